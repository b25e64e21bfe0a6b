//! Shared helpers for the integration and acceptance suites: seeded
//! random instance/subset generators and oracle-certified corpora.

#![allow(dead_code)]

use std::collections::BTreeSet;

use stoqwalk::dits::{Alphabet, DitString};
use stoqwalk::expansion::SubsetSupport;
use stoqwalk::instance::{Class, HamiltonianInstance, SetConstraint, Term};
use stoqwalk::oracle::{self, Method};
use stoqwalk::CounterRng;

/// A random uniform set-form instance: `m` terms of arity up to `k`,
/// each with randomly partitioned classes covering a random fraction of
/// the local strings. The declared degree is the observed maximum.
pub fn random_instance(
    rng: &mut CounterRng,
    n: usize,
    q: u32,
    k: usize,
    m: usize,
) -> HamiltonianInstance {
    let alphabet = Alphabet::new(q).unwrap();
    let mut terms = Vec::with_capacity(m);
    for _ in 0..m {
        let arity = 1 + rng.below(k as u64) as usize;
        let qudits = distinct_positions(rng, n, arity.min(n));
        let classes = random_classes(rng, &alphabet, qudits.len());
        terms.push(Term::Sets(SetConstraint { qudits, classes }));
    }
    let mut degree = vec![0usize; n];
    for t in &terms {
        for &q in t.qudits() {
            degree[q] += 1;
        }
    }
    let d = degree.into_iter().max().unwrap().max(1);
    HamiltonianInstance::new(alphabet, n, k, d, terms).unwrap()
}

pub fn distinct_positions(rng: &mut CounterRng, n: usize, count: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    // Partial Fisher-Yates.
    for i in 0..count {
        let j = i + rng.below((n - i) as u64) as usize;
        all.swap(i, j);
    }
    let mut picked = all[..count].to_vec();
    picked.sort_unstable();
    picked
}

/// Random disjoint classes over `Sigma^arity`, covering at least one
/// string and possibly everything.
pub fn random_classes(rng: &mut CounterRng, alphabet: &Alphabet, arity: usize) -> Vec<Class> {
    let dim = alphabet.dim(arity).unwrap();
    let mut strings: Vec<DitString> = alphabet.strings(arity).collect();
    for i in (1..dim).rev() {
        let j = rng.below((i + 1) as u64) as usize;
        strings.swap(i, j);
    }
    let covered = 1 + rng.below(dim as u64) as usize;
    let mut classes: Vec<Class> = Vec::new();
    let mut current: Class = BTreeSet::new();
    for s in strings.into_iter().take(covered) {
        current.insert(s);
        // Close the current class with probability 1/2.
        if rng.below(2) == 0 {
            classes.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        classes.push(current);
    }
    classes
}

pub fn random_subset(rng: &mut CounterRng, inst: &HamiltonianInstance) -> SubsetSupport {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let dim = alphabet.dim(n).unwrap();
    loop {
        let mut set = BTreeSet::new();
        for idx in 0..dim {
            if rng.below(3) == 0 {
                set.insert(alphabet.string_at(idx, n));
            }
        }
        if !set.is_empty() {
            return SubsetSupport::new(set).unwrap();
        }
    }
}

/// A random non-negative normalized state over the full basis.
pub fn random_nonneg_state(rng: &mut CounterRng, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.unit()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// An instance certified frustrated by the dense oracle, its certified
/// epsilon, and its lexicographically least good string.
pub struct FrustratedCase {
    pub inst: HamiltonianInstance,
    pub eps: f64,
    pub good_start: DitString,
}

/// Generates `count` oracle-certified epsilon-frustrated instances with
/// at least one good string. The certified epsilon is the dense
/// lambda_min minus a small safety margin.
pub fn frustrated_corpus(seed: u64, count: usize, max_n: usize) -> Vec<FrustratedCase> {
    let mut rng = CounterRng::new(seed);
    let mut corpus = Vec::new();
    let mut attempts = 0;
    while corpus.len() < count {
        attempts += 1;
        assert!(attempts < 50_000, "corpus generation stalled");
        let n = 3 + rng.below((max_n - 2) as u64) as usize;
        let m = (n + rng.below(4) as usize).max(2);
        let inst = random_instance(&mut rng, n, 2, 2.min(n), m);
        let report = match oracle::ground_energy(&inst, Method::Dense) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if report.lambda_min < 0.02 {
            continue;
        }
        let good_start = match first_good_string(&inst) {
            Some(s) => s,
            None => continue,
        };
        let eps = (report.lambda_min - 1e-6).min(1.0);
        corpus.push(FrustratedCase { inst, eps, good_start });
    }
    corpus
}

/// Generates `count` oracle-certified frustration-free instances.
pub fn frustration_free_corpus(seed: u64, count: usize, max_n: usize) -> Vec<HamiltonianInstance> {
    let mut rng = CounterRng::new(seed);
    let mut corpus = Vec::new();
    let mut attempts = 0;
    while corpus.len() < count {
        attempts += 1;
        assert!(attempts < 50_000, "corpus generation stalled");
        let n = 3 + rng.below((max_n - 2) as u64) as usize;
        let m = (n + rng.below(3) as usize).max(2);
        let inst = random_instance(&mut rng, n, 2, 2.min(n), m);
        match oracle::exact_frustration_free(&inst) {
            Ok(cert) if cert.frustration_free => corpus.push(inst),
            _ => continue,
        }
    }
    corpus
}

pub fn first_good_string(inst: &HamiltonianInstance) -> Option<DitString> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let dim = alphabet.dim(n).unwrap();
    (0..dim)
        .map(|i| alphabet.string_at(i, n))
        .find(|x| !inst.is_bad(x).unwrap())
}

/// Dense quadratic-form energy of a subset state, the linear-algebra
/// route independent of the counting formula.
pub fn dense_subset_energy(inst: &HamiltonianInstance, s: &SubsetSupport) -> f64 {
    let h = oracle::dense_hamiltonian(inst).unwrap();
    let alphabet = inst.alphabet();
    let dim = h.nrows();
    let mut v = nalgebra::DVector::<f64>::zeros(dim);
    let amp = 1.0 / (s.len() as f64).sqrt();
    for x in s.iter() {
        v[alphabet.index_of(x)] = amp;
    }
    (&v.transpose() * &h * &v)[(0, 0)]
}
