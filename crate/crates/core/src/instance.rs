//! Instance data model: uniform set-form terms, stoquastic matrix terms,
//! Hamiltonian and SetCSP instances, validation, and the conversions
//! between the two presentations.
//!
//! Instances are immutable after construction. Matrix-form terms are
//! decomposed into groundspace classes once at load time; every verifier
//! and walk re-queries that cache.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num::rational::BigRational;
use num::{BigInt, One, Zero};

use crate::decompose;
use crate::dits::{Alphabet, DitString};
use crate::error::{Error, Result};

/// One groundspace class: a non-empty set of k-symbol strings whose
/// uniform superposition is a rank-1 piece of the term's groundspace
/// projector.
pub type Class = BTreeSet<DitString>;

/// A set-form term: qudit subset `B` plus pairwise-disjoint classes over
/// `Sigma^{|B|}`. Doubles as the cached groundspace data of matrix terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetConstraint {
    pub qudits: Vec<usize>,
    pub classes: Vec<Class>,
}

impl SetConstraint {
    pub fn arity(&self) -> usize {
        self.qudits.len()
    }

    /// The unique class containing the local string `v`, if any.
    pub fn local_class(&self, v: &DitString) -> Option<&Class> {
        self.classes.iter().find(|c| c.contains(v))
    }

    /// The unique class containing `x` restricted to this term's qudits.
    /// `None` means `x` is bad for the term.
    pub fn class_containing(&self, x: &DitString) -> Option<&Class> {
        let local = x.restrict(&self.qudits).ok()?;
        self.local_class(&local)
    }

    /// True iff `x`'s restriction lies in no class: `<x|P~|x> = 0`.
    pub fn is_bad(&self, x: &DitString) -> bool {
        self.class_containing(x).is_none()
    }

    /// `<x_B|P|x_B>` as an exact rational: `1/|T_j|` for the containing
    /// class, 0 when bad.
    pub fn diagonal_overlap(&self, x: &DitString) -> BigRational {
        match self.class_containing(x) {
            Some(c) => BigRational::new(BigInt::one(), BigInt::from(c.len())),
            None => BigRational::zero(),
        }
    }

    fn validate(&self, alphabet: &Alphabet, n: usize, k: usize) -> Result<()> {
        validate_qudits(&self.qudits, n, k)?;
        if self.classes.is_empty() {
            return Err(Error::Validation("term has an empty class list".into()));
        }
        let arity = self.arity();
        let mut seen: BTreeSet<&DitString> = BTreeSet::new();
        for class in &self.classes {
            if class.is_empty() {
                return Err(Error::Validation("term has an empty class".into()));
            }
            for s in class {
                if s.len() != arity {
                    return Err(Error::Validation(format!(
                        "class string {s} has length {} but the term touches {arity} qudits",
                        s.len()
                    )));
                }
                alphabet.validate(s)?;
                if !seen.insert(s) {
                    return Err(Error::Validation(format!(
                        "classes are not disjoint: {s} appears twice"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A matrix-form stoquastic term: real symmetric, non-positive
/// off-diagonal, PSD after the recorded groundshift, norm at most 1.
#[derive(Debug, Clone)]
pub struct MatrixTerm {
    pub qudits: Vec<usize>,
    /// Local matrix over the big-endian basis of `Sigma^{|B|}`, already
    /// shifted so its minimal eigenvalue is 0.
    pub matrix: DMatrix<f64>,
    /// Row-major exact entries when the file supplied rationals only.
    /// Kept unshifted; the shift below applies to the diagonal.
    pub exact: Option<Vec<BigRational>>,
    /// The `c` in `H - cI`: the raw matrix's minimal eigenvalue when it
    /// was not already 0.
    pub shift: f64,
}

impl MatrixTerm {
    pub fn arity(&self) -> usize {
        self.qudits.len()
    }
}

#[derive(Debug, Clone)]
pub enum Term {
    Sets(SetConstraint),
    Matrix(MatrixTerm),
}

impl Term {
    pub fn qudits(&self) -> &[usize] {
        match self {
            Term::Sets(c) => &c.qudits,
            Term::Matrix(m) => &m.qudits,
        }
    }

    pub fn arity(&self) -> usize {
        self.qudits().len()
    }
}

/// Groundspace cache entry for one term.
#[derive(Debug, Clone)]
enum GroundCache {
    Uniform(SetConstraint),
    NonUniform(String),
}

/// A uniform stoquastic k-local Hamiltonian `H = (1/m) sum_i H~_i` with
/// declared locality `k` and degree bound `d`.
#[derive(Debug, Clone)]
pub struct HamiltonianInstance {
    alphabet: Alphabet,
    n: usize,
    k: usize,
    d: usize,
    terms: Vec<Term>,
    ground: Vec<GroundCache>,
}

impl HamiltonianInstance {
    pub fn new(
        alphabet: Alphabet,
        n: usize,
        k: usize,
        d: usize,
        terms: Vec<Term>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("instance must have at least one qudit".into()));
        }
        if terms.is_empty() {
            return Err(Error::Validation("instance must have at least one term".into()));
        }
        let mut degree = vec![0usize; n];
        for (i, term) in terms.iter().enumerate() {
            let check = |r: Result<()>| {
                r.map_err(|e| Error::Validation(format!("term {i}: {e}")))
            };
            match term {
                Term::Sets(c) => check(c.validate(&alphabet, n, k))?,
                Term::Matrix(m) => {
                    check(validate_qudits(&m.qudits, n, k))?;
                    check(decompose::validate_stoquastic_matrix(m, &alphabet))?;
                }
            }
            for &q in term.qudits() {
                degree[q] += 1;
            }
        }
        for (q, &deg) in degree.iter().enumerate() {
            if deg > d {
                return Err(Error::Validation(format!(
                    "qudit {q} appears in {deg} terms, exceeding the declared degree {d}"
                )));
            }
        }

        // Decompose matrix terms once; uniformity failures are recorded,
        // not fatal, so diagnostics can still run on the instance.
        let ground = terms
            .iter()
            .map(|term| match term {
                Term::Sets(c) => GroundCache::Uniform(c.clone()),
                Term::Matrix(m) => {
                    match decompose::decompose_term(m, &alphabet, decompose::DEFAULT_TOL) {
                        Ok(classes) => GroundCache::Uniform(SetConstraint {
                            qudits: m.qudits.clone(),
                            classes,
                        }),
                        Err(e) => GroundCache::NonUniform(e.to_string()),
                    }
                }
            })
            .collect();

        Ok(Self { alphabet, n, k, d, terms, ground })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_dits(&self) -> usize {
        self.n
    }

    pub fn locality(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The groundspace classes of term `i`, or a `NotUniform` error when
    /// the matrix term's decomposition is not made of subset states.
    pub fn ground(&self, i: usize) -> Result<&SetConstraint> {
        match &self.ground[i] {
            GroundCache::Uniform(c) => Ok(c),
            GroundCache::NonUniform(reason) => Err(Error::NotUniform {
                term: i,
                reason: reason.clone(),
            }),
        }
    }

    /// Groundspace classes of every term; errors on the first non-uniform
    /// one. This is the view the walk, expansion, and verifiers operate on.
    pub fn grounds(&self) -> Result<Vec<&SetConstraint>> {
        (0..self.terms.len()).map(|i| self.ground(i)).collect()
    }

    /// Uniformity diagnosis per term (`Ok` classes or the failure reason).
    pub fn uniformity_report(&self) -> Vec<std::result::Result<&SetConstraint, &str>> {
        self.ground
            .iter()
            .map(|g| match g {
                GroundCache::Uniform(c) => Ok(c),
                GroundCache::NonUniform(r) => Err(r.as_str()),
            })
            .collect()
    }

    /// True iff `x` is bad for some term.
    pub fn is_bad(&self, x: &DitString) -> Result<bool> {
        Ok(!self.bad_terms(x)?.frustrated_terms.is_empty())
    }

    /// Per-term badness verdicts for `x`.
    pub fn bad_terms(&self, x: &DitString) -> Result<BadnessReport> {
        let mut frustrated = Vec::new();
        for i in 0..self.terms.len() {
            if self.ground(i)?.is_bad(x) {
                frustrated.push(i);
            }
        }
        Ok(BadnessReport { num_terms: self.terms.len(), frustrated_terms: frustrated })
    }
}

/// Which terms a string is bad for; empty means the string is H-good.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadnessReport {
    pub num_terms: usize,
    pub frustrated_terms: Vec<usize>,
}

impl BadnessReport {
    pub fn is_bad(&self) -> bool {
        !self.frustrated_terms.is_empty()
    }
}

/// A SetCSP instance: the classical presentation of Appendix-style
/// set-constraints with the same locality and degree bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCspInstance {
    pub alphabet: Alphabet,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub constraints: Vec<SetConstraint>,
}

impl SetCspInstance {
    pub fn new(
        alphabet: Alphabet,
        n: usize,
        k: usize,
        d: usize,
        constraints: Vec<SetConstraint>,
    ) -> Result<Self> {
        // Reuse the Hamiltonian validation by wrapping as set-form terms.
        let inst = HamiltonianInstance::new(
            alphabet,
            n,
            k,
            d,
            constraints.iter().cloned().map(Term::Sets).collect(),
        )?;
        let _ = inst;
        Ok(Self { alphabet, n, k, d, constraints })
    }
}

/// Converts an instance to its SetCSP form: one constraint per term, the
/// classes being the term's groundspace subset classes.
pub fn to_setcsp(h: &HamiltonianInstance) -> Result<SetCspInstance> {
    let constraints = (0..h.num_terms())
        .map(|i| h.ground(i).cloned())
        .collect::<Result<Vec<_>>>()?;
    SetCspInstance::new(*h.alphabet(), h.num_dits(), h.locality(), h.degree(), constraints)
}

/// Converts a SetCSP to matrix form: `H_i = I - sum_j |T_j><T_j|` over
/// each constraint's qudits. Round-trips with [`to_setcsp`] on classes.
pub fn from_setcsp(c: &SetCspInstance) -> Result<HamiltonianInstance> {
    let terms = c
        .constraints
        .iter()
        .map(|sc| {
            let dim = c.alphabet.dim(sc.arity())?;
            let mut matrix = DMatrix::<f64>::identity(dim, dim);
            let mut exact = vec![BigRational::zero(); dim * dim];
            for (i, e) in exact.iter_mut().enumerate() {
                if i % dim == i / dim {
                    *e = BigRational::one();
                }
            }
            for class in &sc.classes {
                let size = BigRational::new(BigInt::one(), BigInt::from(class.len()));
                for a in class {
                    for b in class {
                        let (ia, ib) = (c.alphabet.index_of(a), c.alphabet.index_of(b));
                        matrix[(ia, ib)] -= 1.0 / class.len() as f64;
                        exact[ia * dim + ib] -= &size;
                    }
                }
            }
            Ok(Term::Matrix(MatrixTerm {
                qudits: sc.qudits.clone(),
                matrix,
                exact: Some(exact),
                shift: 0.0,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    HamiltonianInstance::new(c.alphabet, c.n, c.k, c.d, terms)
}

fn validate_qudits(qudits: &[usize], n: usize, k: usize) -> Result<()> {
    if qudits.is_empty() {
        return Err(Error::Validation("term touches no qudits".into()));
    }
    if qudits.len() > k {
        return Err(Error::Validation(format!(
            "term touches {} qudits, exceeding the declared locality {k}",
            qudits.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for &q in qudits {
        if q >= n {
            return Err(Error::Validation(format!("qudit {q} out of range for n = {n}")));
        }
        if !seen.insert(q) {
            return Err(Error::Validation(format!("qudit {q} listed twice")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn class(strings: &[&str]) -> Class {
        strings.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn e1_shape() {
        let e1 = fixtures::e1();
        assert_eq!(e1.num_terms(), 2);
        assert_eq!(e1.num_dits(), 4);
        assert_eq!(e1.locality(), 2);
        assert_eq!(e1.degree(), 1);
    }

    #[test]
    fn non_disjoint_classes_rejected() {
        let alphabet = Alphabet::new(2).unwrap();
        let term = Term::Sets(SetConstraint {
            qudits: vec![0, 1],
            classes: vec![class(&["00"]), class(&["00", "11"])],
        });
        let err = HamiltonianInstance::new(alphabet, 2, 2, 1, vec![term]).unwrap_err();
        assert!(err.to_string().contains("disjoint"), "{err}");
    }

    #[test]
    fn degree_violation_rejected() {
        let alphabet = Alphabet::new(2).unwrap();
        let mk = || {
            Term::Sets(SetConstraint {
                qudits: vec![0, 1],
                classes: vec![class(&["00", "11"])],
            })
        };
        let err = HamiltonianInstance::new(alphabet, 2, 2, 1, vec![mk(), mk()]).unwrap_err();
        assert!(err.to_string().contains("degree"), "{err}");
    }

    #[test]
    fn empty_class_list_rejected() {
        let alphabet = Alphabet::new(2).unwrap();
        let term = Term::Sets(SetConstraint { qudits: vec![0], classes: vec![] });
        assert!(HamiltonianInstance::new(alphabet, 1, 1, 1, vec![term]).is_err());
    }

    #[test]
    fn setcsp_round_trip_preserves_classes() {
        let e1 = fixtures::e1();
        let csp = to_setcsp(&e1).unwrap();
        let back = from_setcsp(&csp).unwrap();
        let csp2 = to_setcsp(&back).unwrap();
        assert_eq!(csp.constraints, csp2.constraints);
    }

    #[test]
    fn badness_e5() {
        let e5 = fixtures::e5();
        let x: DitString = "101".parse().unwrap();
        let report = e5.bad_terms(&x).unwrap();
        assert_eq!(report.frustrated_terms, vec![2]);
        let good: DitString = "000".parse().unwrap();
        assert!(!e5.is_bad(&good).unwrap());
    }

    #[test]
    fn diagonal_overlap_values() {
        let e2 = fixtures::e2();
        let g = e2.ground(0).unwrap();
        let x: DitString = "00".parse().unwrap();
        assert_eq!(g.diagonal_overlap(&x), BigRational::new(1.into(), 2.into()));
        let y: DitString = "01".parse().unwrap();
        assert!(g.diagonal_overlap(&y).is_zero());
    }
}
