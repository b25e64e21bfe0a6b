//! The implicit graph `G(H)` on basis strings, neighbor enumeration, the
//! seeded random walk, and bounded-radius breadth-first search for bad
//! strings.
//!
//! Two strings are adjacent iff some term's groundspace connects them,
//! i.e. they agree outside the term's qudits and their restrictions lie
//! in the same class. `neighbors` excludes self-loops; the walk still
//! allows self-transitions because it samples uniformly from the whole
//! containing class, current string included.

use std::collections::{HashMap, VecDeque};

use num::BigUint;
use serde::Serialize;

use crate::dits::DitString;
use crate::error::{Error, Result};
use crate::instance::HamiltonianInstance;
use crate::rng::CounterRng;

/// Default cap on the number of visited states in a breadth-first search.
pub const DEFAULT_FRONTIER_CAP: usize = 1 << 26;

/// One hop of a path: the term used and the string arrived at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub term: usize,
    pub to: String,
}

impl PathStep {
    pub fn new(term: usize, to: &DitString) -> Self {
        Self { term, to: to.to_string() }
    }
}

/// An explicit path in `G(H)` from a start string, each hop labeled by
/// the term that provides the edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub start: String,
    pub steps: Vec<PathStep>,
}

impl PathWitness {
    pub fn end(&self) -> &str {
        self.steps.last().map(|s| s.to.as_str()).unwrap_or(&self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accept,
    Reject,
}

/// Verdict of a walk or verifier run, always carrying replayable
/// evidence: the path walked to a bad string (self-transitions elided so
/// consecutive entries are genuine `G(H)` edges) or the violated term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkVerdict {
    pub outcome: Outcome,
    pub path: Vec<PathStep>,
    pub steps_taken: usize,
    /// A term the final string is bad for, on rejection.
    pub violated_term: Option<usize>,
}

impl WalkVerdict {
    pub fn accept(steps_taken: usize) -> Self {
        Self { outcome: Outcome::Accept, path: Vec::new(), steps_taken, violated_term: None }
    }

    pub fn is_accept(&self) -> bool {
        self.outcome == Outcome::Accept
    }
}

/// All `G(H)` neighbors of `x` as (term index, string) pairs, ordered by
/// term and then string; `x` itself is excluded.
pub fn neighbors(x: &DitString, inst: &HamiltonianInstance) -> Result<Vec<(usize, DitString)>> {
    let mut out = Vec::new();
    for i in 0..inst.num_terms() {
        let ground = inst.ground(i)?;
        if let Some(class) = ground.class_containing(x) {
            for v in class {
                let y = x.splice(&ground.qudits, v)?;
                if y != *x {
                    out.push((i, y));
                }
            }
        }
    }
    Ok(out)
}

/// The seeded random walk: reject as soon as the current string is bad
/// for some term (checked before every move and once more before
/// accepting, so `steps = 0` degenerates to a plain badness test);
/// otherwise pick one of the `m` terms uniformly and resample the
/// positions it touches uniformly from the containing class.
pub fn bt_walk(
    x0: &DitString,
    inst: &HamiltonianInstance,
    steps: usize,
    seed: u64,
) -> Result<WalkVerdict> {
    let mut rng = CounterRng::new(seed);
    let mut current = x0.clone();
    let mut path = Vec::new();
    let m = inst.num_terms() as u64;

    for t in 0..=steps {
        let report = inst.bad_terms(&current)?;
        if report.is_bad() {
            return Ok(WalkVerdict {
                outcome: Outcome::Reject,
                path,
                steps_taken: t,
                violated_term: report.frustrated_terms.first().copied(),
            });
        }
        if t == steps {
            break;
        }
        let i = rng.below(m) as usize;
        let ground = inst.ground(i)?;
        let class = ground
            .class_containing(&current)
            .expect("good string must lie in a class of every term");
        let pick = rng.below(class.len() as u64) as usize;
        let v = class.iter().nth(pick).unwrap();
        let next = current.splice(&ground.qudits, v)?;
        if next != current {
            path.push(PathStep::new(i, &next));
            current = next;
        }
    }
    Ok(WalkVerdict::accept(steps))
}

/// Shortest path (within `radius`) from `x` to any string bad for the
/// instance, or `None` when no bad string lies that close. Deduplicates
/// through a visited map and fails once more than `cap` states are held.
pub fn bfs_to_bad(
    x: &DitString,
    inst: &HamiltonianInstance,
    radius: usize,
    cap: usize,
) -> Result<Option<PathWitness>> {
    if inst.is_bad(x)? {
        return Ok(Some(PathWitness { start: x.to_string(), steps: Vec::new() }));
    }
    // parent: string -> (predecessor, term used to reach it)
    let mut parent: HashMap<DitString, (DitString, usize)> = HashMap::new();
    let mut queue: VecDeque<(DitString, usize)> = VecDeque::new();
    parent.insert(x.clone(), (x.clone(), usize::MAX));
    queue.push_back((x.clone(), 0));

    while let Some((node, dist)) = queue.pop_front() {
        if dist >= radius {
            continue;
        }
        for (term, next) in neighbors(&node, inst)? {
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), (node.clone(), term));
            if parent.len() > cap {
                return Err(Error::FrontierCap { cap });
            }
            if inst.is_bad(&next)? {
                return Ok(Some(unwind(&parent, x, &next)));
            }
            queue.push_back((next, dist + 1));
        }
    }
    Ok(None)
}

fn unwind(
    parent: &HashMap<DitString, (DitString, usize)>,
    start: &DitString,
    end: &DitString,
) -> PathWitness {
    let mut steps = Vec::new();
    let mut node = end.clone();
    while node != *start {
        let (prev, term) = parent[&node].clone();
        steps.push(PathStep::new(term, &node));
        node = prev;
    }
    steps.reverse();
    PathWitness { start: start.to_string(), steps }
}

/// The radius bounds of the short-path guarantee for an
/// `eps`-frustrated instance with locality `k`, degree `d`, and alphabet
/// size `q`, kept as exact big integers so they never overflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusBound {
    /// `ceil((2kd/eps) * log_{1+eps/4} q)`: the layer budget.
    pub ell_star: u64,
    /// `sum_{j=2}^{ell*+1} k^j`: the reconstructed-path length bound.
    pub path_bound: BigUint,
    /// `k^{ell*}`: the headline bound.
    pub headline_bound: BigUint,
}

impl RadiusBound {
    /// `path_bound` clamped into `usize` for use as a search radius; the
    /// breadth-first search stops on frontier exhaustion long before
    /// desk-scale instances ever approach it.
    pub fn effective_radius(&self) -> usize {
        use num::ToPrimitive;
        self.path_bound.to_usize().unwrap_or(usize::MAX)
    }
}

/// Computes the constant-radius bound. `eps` must lie in (0, 1].
pub fn theoretical_radius(eps: f64, k: u32, d: u32, q: u32) -> Result<RadiusBound> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsilonRange(eps));
    }
    if k < 1 || d < 1 || q < 2 {
        return Err(Error::Validation(format!("invalid parameters k={k}, d={d}, q={q}")));
    }
    let layers = (2.0 * f64::from(k) * f64::from(d) / eps) * (f64::from(q)).ln()
        / (1.0 + eps / 4.0).ln();
    let ell_star = layers.ceil() as u64;
    let k_big = BigUint::from(k);
    let headline_bound = k_big.pow(ell_star as u32);
    let mut path_bound = BigUint::from(0u32);
    let mut power = k_big.pow(2);
    for _ in 2..=(ell_star + 1) {
        path_bound += &power;
        power *= &k_big;
    }
    Ok(RadiusBound { ell_star, path_bound, headline_bound })
}
