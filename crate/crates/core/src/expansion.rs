//! Subset-state energies, projector action on supports, the greedy
//! frustrated-layer construction, multi-layer bad-string search, light
//! cones, and explicit path reconstruction.
//!
//! Every energy here is computed in exact rational arithmetic from class
//! counts, never floats: membership of a term in the frustrated set is a
//! threshold test (energy >= eps/2) and must not flip on rounding.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::BigRational;
use num::{BigInt, FromPrimitive, One, ToPrimitive, Zero};

use crate::dits::DitString;
use crate::error::{Error, Result};
use crate::graph::{neighbors, PathStep, PathWitness};
use crate::instance::{HamiltonianInstance, SetConstraint};

/// A non-empty set of n-dit strings, standing for the subset state
/// `|S> = |S|^{-1/2} sum_{x in S} |x>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSupport {
    strings: BTreeSet<DitString>,
}

impl SubsetSupport {
    pub fn new(strings: BTreeSet<DitString>) -> Result<Self> {
        if strings.is_empty() {
            return Err(Error::Validation("subset support must be non-empty".into()));
        }
        Ok(Self { strings })
    }

    pub fn singleton(x: DitString) -> Self {
        Self { strings: std::iter::once(x).collect() }
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &DitString) -> bool {
        self.strings.contains(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DitString> {
        self.strings.iter()
    }

    pub fn strings(&self) -> &BTreeSet<DitString> {
        &self.strings
    }

    /// The lexicographically least string in the support that is bad for
    /// the instance, with one term it violates.
    pub fn first_bad(&self, inst: &HamiltonianInstance) -> Result<Option<(DitString, usize)>> {
        for x in &self.strings {
            let report = inst.bad_terms(x)?;
            if let Some(&term) = report.frustrated_terms.first() {
                return Ok(Some((x.clone(), term)));
            }
        }
        Ok(None)
    }
}

/// Exact energy of the subset state against one term's `I - P` form:
/// `1 - sum_{j,y} |T_j cap S_{B,y}|^2 / (|T_j| |S|)`.
pub fn term_energy_subset(s: &SubsetSupport, ground: &SetConstraint) -> BigRational {
    BigRational::one() - term_overlap_subset(s, ground)
}

/// Exact `<S|P~|S>` for one term.
pub fn term_overlap_subset(s: &SubsetSupport, ground: &SetConstraint) -> BigRational {
    // Count support strings per (class index, outside assignment).
    let mut counts: BTreeMap<(usize, DitString), usize> = BTreeMap::new();
    let outside: Vec<usize> = (0..s.iter().next().unwrap().len())
        .filter(|p| !ground.qudits.contains(p))
        .collect();
    for x in s.iter() {
        let local = x.restrict(&ground.qudits).expect("validated positions");
        if let Some(j) = ground.classes.iter().position(|c| c.contains(&local)) {
            let z = x.restrict(&outside).expect("validated positions");
            *counts.entry((j, z)).or_insert(0) += 1;
        }
    }
    let size = BigInt::from(s.len());
    let mut overlap = BigRational::zero();
    for ((j, _), c) in counts {
        let c = BigInt::from(c);
        let t = BigInt::from(ground.classes[j].len());
        overlap += BigRational::new(&c * &c, t * &size);
    }
    overlap
}

/// Exact average term energy `<S|H|S>` over all terms.
pub fn instance_energy_subset(
    s: &SubsetSupport,
    inst: &HamiltonianInstance,
) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for i in 0..inst.num_terms() {
        total += term_energy_subset(s, inst.ground(i)?);
    }
    Ok(total / BigRational::from_integer(BigInt::from(inst.num_terms())))
}

/// The support of `P~|S>`: the union, over (class, outside-string) pairs
/// that intersect `S`, of the full spliced class. Strings bad for the
/// term are dropped; all term-good strings of `S` are retained. Errors
/// when the projector annihilates the state (every string bad).
pub fn apply_projector_subset(
    s: &SubsetSupport,
    ground: &SetConstraint,
    term: usize,
) -> Result<SubsetSupport> {
    let mut out = BTreeSet::new();
    for x in s.iter() {
        if let Some(class) = ground.class_containing(x) {
            for v in class {
                out.insert(x.splice(&ground.qudits, v)?);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Annihilation { term });
    }
    SubsetSupport::new(out)
}

/// An ordered list of term indices with pairwise-disjoint qudit supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub terms: Vec<usize>,
}

impl Layer {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Checks the non-overlap invariant against the instance.
    pub fn validate(&self, inst: &HamiltonianInstance) -> Result<()> {
        let mut used = BTreeSet::new();
        for &t in &self.terms {
            for &q in inst.terms()[t].qudits() {
                if !used.insert(q) {
                    return Err(Error::Validation(format!(
                        "layer terms overlap on qudit {q}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The greedy loop for one layer: maintain the available set `A` (terms
/// not overlapping chosen ones) and the frustrated set `F` (terms with
/// energy at least eps/2 against the current accumulated support); pick
/// the lowest-index term of the intersection, apply it, repeat until the
/// intersection empties. The returned list is ordered by choice.
pub fn find_frustrated_layer(
    s: &SubsetSupport,
    inst: &HamiltonianInstance,
    eps: f64,
) -> Result<Layer> {
    let threshold = rational_eps(eps)? / BigRational::from_integer(2.into());
    let mut available = vec![true; inst.num_terms()];
    let mut occupied: BTreeSet<usize> = BTreeSet::new();
    let mut current = s.clone();
    let mut chosen = Vec::new();

    loop {
        let mut pick = None;
        for i in 0..inst.num_terms() {
            if !available[i] {
                continue;
            }
            if term_energy_subset(&current, inst.ground(i)?) >= threshold {
                pick = Some(i);
                break;
            }
        }
        let Some(i) = pick else { break };
        let ground = inst.ground(i)?;
        current = apply_projector_subset(&current, ground, i)?;
        for &q in &ground.qudits {
            occupied.insert(q);
        }
        for (j, slot) in available.iter_mut().enumerate() {
            if *slot && inst.terms()[j].qudits().iter().any(|q| occupied.contains(q)) {
                *slot = false;
            }
        }
        chosen.push(i);
    }
    Ok(Layer { terms: chosen })
}

/// Applies a non-overlapping layer to a support, term by term in layer
/// order. Order does not matter for the result (the projectors commute),
/// which the test suite checks by permutation sweeps.
pub fn apply_layer(
    s: &SubsetSupport,
    layer: &Layer,
    inst: &HamiltonianInstance,
) -> Result<SubsetSupport> {
    layer.validate(inst)?;
    let mut current = s.clone();
    for &t in &layer.terms {
        current = apply_projector_subset(&current, inst.ground(t)?, t)?;
    }
    Ok(current)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpansionOutcome {
    /// A bad string appeared in the latest support; `apex` is a term it
    /// violates.
    BadFound { bad: DitString, apex: usize },
    /// No bad string within the layer budget (the frustration-free
    /// behavior: the greedy eventually returns an empty layer).
    Exhausted,
}

/// Trace of a layered expansion run.
#[derive(Debug, Clone)]
pub struct ExpansionRun {
    pub layers: Vec<Layer>,
    /// Supports `S_0..S_l`, one more than layers.
    pub supports: Vec<SubsetSupport>,
    /// `|S_l| / |S_{l-1}|` per executed layer.
    pub growth: Vec<f64>,
    pub outcome: ExpansionOutcome,
}

/// Iterates find-layer/apply-layer from `{x}` until some support
/// contains an H-bad string, the greedy returns an empty layer, or
/// `max_layers` is exhausted.
pub fn layers_to_bad(
    x: &DitString,
    inst: &HamiltonianInstance,
    eps: f64,
    max_layers: usize,
) -> Result<ExpansionRun> {
    let mut supports = vec![SubsetSupport::singleton(x.clone())];
    let mut layers = Vec::new();
    let mut growth = Vec::new();

    if let Some((bad, apex)) = supports[0].first_bad(inst)? {
        return Ok(ExpansionRun {
            layers,
            supports,
            growth,
            outcome: ExpansionOutcome::BadFound { bad, apex },
        });
    }
    for _ in 0..max_layers {
        let current = supports.last().unwrap();
        let layer = find_frustrated_layer(current, inst, eps)?;
        if layer.is_empty() {
            return Ok(ExpansionRun { layers, supports, growth, outcome: ExpansionOutcome::Exhausted });
        }
        let next = apply_layer(current, &layer, inst)?;
        growth.push(next.len() as f64 / current.len() as f64);
        layers.push(layer);
        supports.push(next);
        if let Some((bad, apex)) = supports.last().unwrap().first_bad(inst)? {
            return Ok(ExpansionRun {
                layers,
                supports,
                growth,
                outcome: ExpansionOutcome::BadFound { bad, apex },
            });
        }
    }
    Ok(ExpansionRun { layers, supports, growth, outcome: ExpansionOutcome::Exhausted })
}

/// The light cone of an apex term through a stack of layers: walking
/// backwards from the last layer, keep exactly the terms that touch a
/// qudit already accumulated from the layers above (seeded by the apex's
/// own qudits).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LightCone {
    /// Filtered layers, same indexing as the input stack.
    pub layers: Vec<Layer>,
    pub apex: usize,
}

pub fn lightcone(
    layers: &[Layer],
    apex: usize,
    inst: &HamiltonianInstance,
) -> Result<LightCone> {
    if apex >= inst.num_terms() {
        return Err(Error::Validation(format!("apex term {apex} out of range")));
    }
    let k = inst.locality();
    let ell = layers.len();
    let mut cone: Vec<Layer> = vec![Layer { terms: Vec::new() }; ell];
    let mut touched: BTreeSet<usize> = inst.terms()[apex].qudits().iter().copied().collect();

    for j in (0..ell).rev() {
        let mut kept = Vec::new();
        for &t in &layers[j].terms {
            if inst.terms()[t].qudits().iter().any(|q| touched.contains(q)) {
                kept.push(t);
            }
        }
        for &t in &kept {
            for &q in inst.terms()[t].qudits() {
                touched.insert(q);
            }
        }
        cone[j] = Layer { terms: kept };
        // Induction bound on the qudit set: |D_j| <= k^{l-j+2}, with this
        // loop's j being the 0-based version of the paper-indexed layer.
        let bound = num::BigUint::from(k).pow((ell - j + 1) as u32);
        if num::BigUint::from(touched.len()) > bound {
            return Err(Error::Validation(format!(
                "light-cone qudit set of size {} exceeds bound {bound} at layer {j}",
                touched.len()
            )));
        }
    }
    Ok(LightCone { layers: cone, apex })
}

/// Replays only the cone layers from `{x}`; by the locality of badness
/// the result still contains a string bad for the apex term.
pub fn replay_cone(
    x: &DitString,
    cone: &LightCone,
    inst: &HamiltonianInstance,
) -> Result<SubsetSupport> {
    let mut s = SubsetSupport::singleton(x.clone());
    for layer in &cone.layers {
        if !layer.is_empty() {
            s = apply_layer(&s, layer, inst)?;
        }
    }
    Ok(s)
}

/// Builds an explicit `G(H)` path from `x` to a string bad for the cone's
/// apex, one class-internal hop per cone term. Every hop is validated
/// against `neighbors`; the path length is at most the sum of cone layer
/// sizes.
pub fn reconstruct_path(
    x: &DitString,
    cone: &LightCone,
    inst: &HamiltonianInstance,
) -> Result<PathWitness> {
    // Forward pass, keeping every intermediate support.
    let mut stages: Vec<(usize, SubsetSupport)> = Vec::new(); // (term, support after it)
    let mut current = SubsetSupport::singleton(x.clone());
    let mut cone_size = 0usize;
    for layer in &cone.layers {
        for &t in &layer.terms {
            current = apply_projector_subset(&current, inst.ground(t)?, t)?;
            stages.push((t, current.clone()));
            cone_size += 1;
        }
    }

    // The endpoint: a string in the final support bad for the apex.
    let apex_ground = inst.ground(cone.apex)?;
    let mut target = current
        .iter()
        .find(|s| apex_ground.is_bad(s))
        .cloned()
        .ok_or_else(|| {
            Error::Reconstruction("cone replay reached no string bad for the apex term".into())
        })?;

    // Backward pass: for each cone term (in reverse), either the target
    // was already present before the projection, or it entered through a
    // class whose intersection with the previous support is non-empty.
    let start_support = SubsetSupport::singleton(x.clone());
    let mut steps_rev: Vec<PathStep> = Vec::new();
    for i in (0..stages.len()).rev() {
        let (term, _) = &stages[i];
        let prev: &SubsetSupport = if i == 0 { &start_support } else { &stages[i - 1].1 };
        if prev.contains(&target) {
            continue;
        }
        let ground = inst.ground(*term)?;
        let class = ground.class_containing(&target).ok_or_else(|| {
            Error::Reconstruction(format!("target string is bad for cone term {term}"))
        })?;
        let source = class
            .iter()
            .map(|v| target.splice(&ground.qudits, v))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .find(|candidate| prev.contains(candidate))
            .ok_or_else(|| {
                Error::Reconstruction(format!(
                    "no predecessor for {target} through term {term}"
                ))
            })?;
        steps_rev.push(PathStep::new(*term, &target));
        target = source;
    }
    if target != *x {
        return Err(Error::Reconstruction("path did not reach the start string".into()));
    }
    steps_rev.reverse();
    let witness = PathWitness { start: x.to_string(), steps: steps_rev };

    // Validate: every hop is a G(H) edge and the endpoint is apex-bad.
    let mut node = x.clone();
    for step in &witness.steps {
        let to: DitString = step.to.parse().map_err(|_| {
            Error::Reconstruction("unparseable step in reconstructed path".into())
        })?;
        if !neighbors(&node, inst)?.contains(&(step.term, to.clone())) {
            return Err(Error::Reconstruction(format!(
                "hop {node} -> {to} via term {} is not a graph edge",
                step.term
            )));
        }
        node = to;
    }
    if !apex_ground.is_bad(&node) {
        return Err(Error::Reconstruction("endpoint is not bad for the apex term".into()));
    }
    if witness.steps.len() > cone_size {
        return Err(Error::Reconstruction(format!(
            "path length {} exceeds the cone size {cone_size}",
            witness.steps.len()
        )));
    }
    Ok(witness)
}

fn rational_eps(eps: f64) -> Result<BigRational> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsilonRange(eps));
    }
    BigRational::from_f64(eps).ok_or(Error::EpsilonRange(eps))
}

/// Convenience f64 view of an exact rational energy.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn s(x: &str) -> DitString {
        x.parse().unwrap()
    }

    fn support(strings: &[&str]) -> SubsetSupport {
        SubsetSupport::new(strings.iter().map(|x| x.parse().unwrap()).collect()).unwrap()
    }

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn worked_example_energies() {
        let e1 = fixtures::e1();
        let worked = SubsetSupport::new(fixtures::e1_worked_subset()).unwrap();
        assert_eq!(term_energy_subset(&worked, e1.ground(0).unwrap()), rational(1, 2));

        let expanded = apply_projector_subset(&worked, e1.ground(0).unwrap(), 0).unwrap();
        assert_eq!(expanded.strings(), &fixtures::e1_expanded_subset());
        assert_eq!(term_energy_subset(&expanded, e1.ground(1).unwrap()), rational(0, 1));

        // Both terms see energy 1/2 against the original S (the second
        // term only loses its frustration against the expanded support).
        assert_eq!(instance_energy_subset(&worked, &e1).unwrap(), rational(1, 2));
        assert!(instance_energy_subset(&expanded, &e1).unwrap().is_zero());
    }

    #[test]
    fn closed_component_has_zero_energy() {
        let e1 = fixtures::e1();
        let comp = SubsetSupport::new(fixtures::e1_closed_component()).unwrap();
        assert!(instance_energy_subset(&comp, &e1).unwrap().is_zero());
    }

    #[test]
    fn class_extension_by_fixed_outside_string_has_zero_term_energy() {
        // S = one full spliced class: overlap 1, energy 0.
        let e1 = fixtures::e1();
        let full_class = support(&["0000", "1001"]);
        assert!(term_energy_subset(&full_class, e1.ground(0).unwrap()).is_zero());
    }

    #[test]
    fn projector_completes_classes() {
        let e2 = fixtures::e2();
        let out = apply_projector_subset(&support(&["00"]), e2.ground(0).unwrap(), 0).unwrap();
        assert_eq!(out, support(&["00", "11"]));
    }

    #[test]
    fn annihilation_is_an_error() {
        let e2 = fixtures::e2();
        let err = apply_projector_subset(&support(&["01"]), e2.ground(0).unwrap(), 0).unwrap_err();
        assert!(matches!(err, Error::Annihilation { term: 0 }));
    }

    #[test]
    fn greedy_layer_on_e1_origin() {
        let e1 = fixtures::e1();
        let layer = find_frustrated_layer(&support(&["0000"]), &e1, 1.0).unwrap();
        assert_eq!(layer.terms, vec![0, 1]);
    }

    #[test]
    fn greedy_layer_empty_on_closed_component() {
        let e1 = fixtures::e1();
        let comp = SubsetSupport::new(fixtures::e1_closed_component()).unwrap();
        let layer = find_frustrated_layer(&comp, &e1, 1.0).unwrap();
        assert!(layer.is_empty());
    }

    #[test]
    fn apply_layer_expands_e1_origin_to_component() {
        let e1 = fixtures::e1();
        let layer = Layer { terms: vec![0, 1] };
        let out = apply_layer(&support(&["0000"]), &layer, &e1).unwrap();
        assert_eq!(out.strings(), &fixtures::e1_closed_component());
    }

    #[test]
    fn apply_layer_rejects_overlap() {
        let e3 = fixtures::e3();
        let layer = Layer { terms: vec![0, 1] };
        assert!(apply_layer(&support(&["00"]), &layer, &e3).is_err());
    }

    #[test]
    fn empty_layer_leaves_support_unchanged() {
        let e1 = fixtures::e1();
        let sup = support(&["0000"]);
        let out = apply_layer(&sup, &Layer { terms: vec![] }, &e1).unwrap();
        assert_eq!(out, sup);
    }

    #[test]
    fn layers_to_bad_on_e5() {
        let e5 = fixtures::e5();
        let run = layers_to_bad(&s("000"), &e5, 0.25, 8).unwrap();
        match run.outcome {
            ExpansionOutcome::BadFound { ref bad, apex } => {
                assert_eq!(apex, 2);
                assert!(e5.ground(2).unwrap().is_bad(bad));
                assert!(run.layers.len() <= 2, "took {} layers", run.layers.len());
            }
            ExpansionOutcome::Exhausted => panic!("expected a bad string"),
        }
    }

    #[test]
    fn layers_to_bad_exhausts_on_frustration_free_e1() {
        let e1 = fixtures::e1();
        let run = layers_to_bad(&s("0000"), &e1, 1.0, 8).unwrap();
        assert_eq!(run.outcome, ExpansionOutcome::Exhausted);
        assert_eq!(run.layers.len(), 1);
    }

    #[test]
    fn lightcone_on_e5_run() {
        let e5 = fixtures::e5();
        let run = layers_to_bad(&s("000"), &e5, 0.25, 8).unwrap();
        let ExpansionOutcome::BadFound { apex, .. } = run.outcome else {
            panic!("expected a bad string");
        };
        let cone = lightcone(&run.layers, apex, &e5).unwrap();
        let replayed = replay_cone(&s("000"), &cone, &e5).unwrap();
        assert!(replayed.iter().any(|w| e5.ground(apex).unwrap().is_bad(w)));
    }

    #[test]
    fn lightcone_drops_far_away_layers() {
        // A layer touching qudits disjoint from the apex contributes
        // nothing to the cone.
        let e5 = fixtures::e5();
        let layers = vec![Layer { terms: vec![1] }]; // term on {1,2}
        let cone = lightcone(&layers, 0, &e5).unwrap(); // apex on {0,1}
        // Term 1 overlaps apex term 0 on qudit 1, so it is kept; use a
        // genuinely disjoint apex instead: term 2 on {0,2} vs a layer on
        // nothing it touches is not constructible in 3 qubits, so check
        // the kept/dropped logic directly on E1.
        assert_eq!(cone.layers[0].terms, vec![1]);

        let e1 = fixtures::e1();
        let layers = vec![Layer { terms: vec![1] }]; // term on {1,2}
        let cone = lightcone(&layers, 0, &e1).unwrap(); // apex on {0,3}
        assert!(cone.layers[0].is_empty());
    }

    #[test]
    fn reconstruct_path_on_e5() {
        let e5 = fixtures::e5();
        let run = layers_to_bad(&s("000"), &e5, 0.25, 8).unwrap();
        let ExpansionOutcome::BadFound { apex, .. } = run.outcome else {
            panic!("expected a bad string");
        };
        let cone = lightcone(&run.layers, apex, &e5).unwrap();
        let path = reconstruct_path(&s("000"), &cone, &e5).unwrap();
        assert!(!path.steps.is_empty());
        assert!(path.steps.len() <= 2, "path {:?}", path);
        let end: DitString = path.end().parse().unwrap();
        assert!(e5.ground(apex).unwrap().is_bad(&end));
    }

    #[test]
    fn reconstruct_length_zero_when_start_is_bad() {
        let e3 = fixtures::e3();
        let cone = LightCone { layers: vec![], apex: 0 };
        let path = reconstruct_path(&s("01"), &cone, &e3).unwrap();
        assert!(path.steps.is_empty());
    }

    #[test]
    fn one_term_expansion_bound_on_worked_example() {
        let e1 = fixtures::e1();
        let worked = SubsetSupport::new(fixtures::e1_worked_subset()).unwrap();
        let delta = term_energy_subset(&worked, e1.ground(0).unwrap());
        let grown = apply_projector_subset(&worked, e1.ground(0).unwrap(), 0).unwrap();
        let lhs = BigRational::from_integer(grown.len().into());
        let rhs = (BigRational::one() + delta / BigRational::from_integer(2.into()))
            * BigRational::from_integer(worked.len().into());
        assert!(lhs >= rhs);
    }
}
