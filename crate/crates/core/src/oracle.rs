//! Exact desk-scale ground truth: ground energies and non-negative
//! groundstates, the combinatorial frustration-freeness decision,
//! brute-force UNSAT minimization over subsets, and the weight-bound
//! inequality checks.
//!
//! Tolerances (one table, used everywhere):
//! - eigen-residual: 1e-8 (`RESIDUAL_TOL`)
//! - zero-energy threshold: 1e-9 (`ZERO_ENERGY_TOL`)

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num::rational::BigRational;
use num::{BigInt, Zero};
use serde::Serialize;

use crate::dits::DitString;
use crate::error::{Error, Result};
use crate::expansion::{self, SubsetSupport};
use crate::graph::neighbors;
use crate::instance::{HamiltonianInstance, SetCspInstance, Term};

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const ZERO_ENERGY_TOL: f64 = 1e-9;

/// Dimension caps for the two eigensolver routes.
pub const DENSE_DIM_CAP: usize = 1 << 13;
pub const ITERATIVE_DIM_CAP: usize = 1 << 20;
/// String-space cap for component enumeration.
pub const ENUMERATION_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
}

/// Ground energy plus a non-negative representative groundstate.
#[derive(Debug, Clone)]
pub struct GroundReport {
    pub lambda_min: f64,
    /// Non-negative amplitudes over the full basis, big-endian indexing.
    pub amplitudes: Vec<f64>,
    pub method: Method,
    pub residual: f64,
}

impl GroundReport {
    pub fn is_frustration_free(&self) -> bool {
        self.lambda_min.abs() <= ZERO_ENERGY_TOL
    }
}

/// Assembles the dense `q^n x q^n` Hamiltonian `(1/m) sum_i H~_i`, with
/// `H_i = I - P_i` for set-form terms and the (shifted) matrix otherwise.
pub fn dense_hamiltonian(inst: &HamiltonianInstance) -> Result<DMatrix<f64>> {
    let dim = inst.alphabet().dim(inst.num_dits())?;
    if dim > DENSE_DIM_CAP {
        return Err(Error::TooLarge(format!(
            "dimension {dim} exceeds the dense cap {DENSE_DIM_CAP}"
        )));
    }
    let weight = 1.0 / inst.num_terms() as f64;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for term in inst.terms() {
        let local = local_matrix(inst, term)?;
        accumulate_embedded(&mut h, &local, term.qudits(), inst, weight)?;
    }
    Ok(h)
}

/// The local `H_i` block of a term.
fn local_matrix(inst: &HamiltonianInstance, term: &Term) -> Result<DMatrix<f64>> {
    match term {
        Term::Matrix(m) => Ok(m.matrix.clone()),
        Term::Sets(c) => {
            let dim = inst.alphabet().dim(c.arity())?;
            let mut h = DMatrix::<f64>::identity(dim, dim);
            for class in &c.classes {
                let amp = 1.0 / class.len() as f64;
                for a in class {
                    for b in class {
                        let (ia, ib) = (inst.alphabet().index_of(a), inst.alphabet().index_of(b));
                        h[(ia, ib)] -= amp;
                    }
                }
            }
            Ok(h)
        }
    }
}

/// Adds `weight * (local tensor identity)` into the ambient matrix.
fn accumulate_embedded(
    h: &mut DMatrix<f64>,
    local: &DMatrix<f64>,
    qudits: &[usize],
    inst: &HamiltonianInstance,
    weight: f64,
) -> Result<()> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let arity = qudits.len();
    let rest: Vec<usize> = (0..n).filter(|p| !qudits.contains(p)).collect();
    let rest_dim = alphabet.dim(rest.len())?;
    let local_dim = alphabet.dim(arity)?;
    let template = DitString::zeros(n);
    for a in 0..local_dim {
        let sa = alphabet.string_at(a, arity);
        for b in 0..local_dim {
            let val = local[(a, b)];
            if val == 0.0 {
                continue;
            }
            let sb = alphabet.string_at(b, arity);
            for r in 0..rest_dim {
                let sr = alphabet.string_at(r, rest.len());
                let row = template.splice(qudits, &sa)?.splice(&rest, &sr)?;
                let col = template.splice(qudits, &sb)?.splice(&rest, &sr)?;
                h[(alphabet.index_of(&row), alphabet.index_of(&col))] += weight * val;
            }
        }
    }
    Ok(())
}

/// Matrix-free `H |v>` using only splice/class arithmetic per term.
pub fn apply_hamiltonian(inst: &HamiltonianInstance, v: &DVector<f64>) -> Result<DVector<f64>> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let dim = v.len();
    let weight = 1.0 / inst.num_terms() as f64;
    let mut out = DVector::<f64>::zeros(dim);
    for (t, term) in inst.terms().iter().enumerate() {
        match term {
            Term::Sets(_) => {
                let ground = inst.ground(t)?;
                for idx in 0..dim {
                    let x = alphabet.string_at(idx, n);
                    // (I - P) v at x.
                    let mut pv = 0.0;
                    if let Some(class) = ground.class_containing(&x) {
                        let amp = 1.0 / class.len() as f64;
                        for u in class {
                            let y = x.splice(&ground.qudits, u)?;
                            pv += amp * v[alphabet.index_of(&y)];
                        }
                    }
                    out[idx] += weight * (v[idx] - pv);
                }
            }
            Term::Matrix(m) => {
                let arity = m.arity();
                for idx in 0..dim {
                    let x = alphabet.string_at(idx, n);
                    let row = alphabet.index_of(&x.restrict(&m.qudits)?);
                    let mut acc = 0.0;
                    for b in 0..alphabet.dim(arity)? {
                        let val = m.matrix[(row, b)];
                        if val == 0.0 {
                            continue;
                        }
                        let y = x.splice(&m.qudits, &alphabet.string_at(b, arity))?;
                        acc += val * v[alphabet.index_of(&y)];
                    }
                    out[idx] += weight * acc;
                }
            }
        }
    }
    Ok(out)
}

/// Minimal eigenvalue and a non-negative groundstate of the instance.
///
/// The non-negative representative is the entrywise absolute value of the
/// converged eigenvector; the residual check below is the actual
/// guarantee that this is still a groundstate (for degenerate
/// groundspaces any residual-passing non-negative representative is
/// acceptable).
pub fn ground_energy(inst: &HamiltonianInstance, method: Method) -> Result<GroundReport> {
    let dim = inst.alphabet().dim(inst.num_dits())?;
    let (lambda_min, state) = match method {
        Method::Dense => {
            if dim > DENSE_DIM_CAP {
                return Err(Error::TooLarge(format!(
                    "dimension {dim} exceeds the dense cap {DENSE_DIM_CAP}"
                )));
            }
            let h = dense_hamiltonian(inst)?;
            let eigen = h.symmetric_eigen();
            let mut best = 0usize;
            for i in 0..dim {
                if eigen.eigenvalues[i] < eigen.eigenvalues[best] {
                    best = i;
                }
            }
            (eigen.eigenvalues[best], eigen.eigenvectors.column(best).into_owned())
        }
        Method::Iterative => {
            if dim > ITERATIVE_DIM_CAP {
                return Err(Error::TooLarge(format!(
                    "dimension {dim} exceeds the iterative cap {ITERATIVE_DIM_CAP}"
                )));
            }
            // Lanczos on I - H: its top eigenvalue is 1 - lambda_min.
            let (mu, vec) = lanczos_top(inst, dim)?;
            (1.0 - mu, vec)
        }
    };

    let mut amplitudes = state.abs();
    let norm = amplitudes.norm();
    if norm < 1e-12 {
        return Err(Error::Convergence("eigenvector collapsed to zero".into()));
    }
    amplitudes /= norm;
    let hv = apply_hamiltonian(inst, &amplitudes)?;
    let residual = (&hv - &amplitudes * lambda_min).norm();
    if residual > RESIDUAL_TOL {
        return Err(Error::Convergence(format!(
            "sign-fixed groundstate residual {residual} exceeds {RESIDUAL_TOL}"
        )));
    }
    Ok(GroundReport {
        lambda_min,
        amplitudes: amplitudes.iter().copied().collect(),
        method,
        residual,
    })
}

/// Lanczos with full reorthogonalization for the top eigenpair of
/// `I - H`, using only the matrix-free application.
fn lanczos_top(inst: &HamiltonianInstance, dim: usize) -> Result<(f64, DVector<f64>)> {
    let max_iter = 400.min(dim);
    let tol = 1e-12;

    let matvec = |v: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(v - apply_hamiltonian(inst, v)?)
    };

    // Deterministic pseudo-random start vector.
    let mut q = DVector::<f64>::zeros(dim);
    for i in 0..dim {
        q[i] = ((i as f64 + 1.0) * 0.618033988749895).fract() - 0.5 + 1e-3;
    }
    q /= q.norm();

    let mut basis: Vec<DVector<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut prev_top = f64::MIN;

    for j in 0..max_iter {
        let mut w = matvec(&basis[j])?;
        let a = basis[j].dot(&w);
        alpha.push(a);
        w -= &basis[j] * a;
        if j > 0 {
            w -= &basis[j - 1] * beta[j - 1];
        }
        // Full reorthogonalization keeps the Krylov basis numerically
        // orthogonal on clustered spectra.
        for b in &basis {
            let overlap = b.dot(&w);
            w -= b * overlap;
        }
        let nb = w.norm();

        let top = tridiagonal_top(&alpha, &beta).0;
        if (top - prev_top).abs() < tol || nb < 1e-14 || j == max_iter - 1 {
            let (mu, coeffs) = tridiagonal_top(&alpha, &beta);
            let mut vec = DVector::<f64>::zeros(dim);
            for (i, b) in basis.iter().enumerate() {
                vec += b * coeffs[i];
            }
            let norm = vec.norm();
            if norm < 1e-12 {
                return Err(Error::Convergence("Lanczos produced a zero vector".into()));
            }
            return Ok((mu, vec / norm));
        }
        prev_top = top;
        beta.push(nb);
        basis.push(w / nb);
    }
    Err(Error::Convergence("Lanczos failed to converge".into()))
}

fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i > 0 {
            t[(i, i - 1)] = beta[i - 1];
            t[(i - 1, i)] = beta[i - 1];
        }
    }
    let eigen = t.symmetric_eigen();
    let mut best = 0usize;
    for i in 0..m {
        if eigen.eigenvalues[i] > eigen.eigenvalues[best] {
            best = i;
        }
    }
    (eigen.eigenvalues[best], eigen.eigenvectors.column(best).iter().copied().collect())
}

/// Result of the combinatorial frustration-freeness decision.
#[derive(Debug, Clone)]
pub struct FrustrationCertificate {
    pub frustration_free: bool,
    /// A connected component of good strings whose subset state has
    /// exactly zero energy, when one exists.
    pub component: Option<SubsetSupport>,
}

/// Decides frustration-freeness combinatorially: true iff some good
/// string's entire connected component contains no bad string. The
/// certificate component is re-verified to have exact energy zero.
pub fn exact_frustration_free(inst: &HamiltonianInstance) -> Result<FrustrationCertificate> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let dim = alphabet.dim(n)?;
    if dim > ENUMERATION_CAP {
        return Err(Error::TooLarge(format!(
            "string space {dim} exceeds the enumeration cap {ENUMERATION_CAP}"
        )));
    }
    let bad: Vec<bool> = (0..dim)
        .map(|i| inst.is_bad(&alphabet.string_at(i, n)))
        .collect::<Result<Vec<_>>>()?;

    let mut visited = vec![false; dim];
    for start in 0..dim {
        if visited[start] || bad[start] {
            continue;
        }
        // Flood the component of `start`, watching for bad members.
        let mut members = Vec::new();
        let mut clean = true;
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(idx) = queue.pop_front() {
            members.push(idx);
            if bad[idx] {
                clean = false;
            }
            for (_, y) in neighbors(&alphabet.string_at(idx, n), inst)? {
                let yi = alphabet.index_of(&y);
                if !visited[yi] {
                    visited[yi] = true;
                    queue.push_back(yi);
                }
            }
        }
        if clean {
            let component = SubsetSupport::new(
                members.iter().map(|&i| alphabet.string_at(i, n)).collect(),
            )?;
            let energy = expansion::instance_energy_subset(&component, inst)?;
            if !energy.is_zero() {
                return Err(Error::Validation(
                    "clean component has non-zero subset energy; instance is inconsistent".into(),
                ));
            }
            return Ok(FrustrationCertificate { frustration_free: true, component: Some(component) });
        }
    }
    Ok(FrustrationCertificate { frustration_free: false, component: None })
}

/// Exact `UNSAT(I, S)` of a SetCSP against a subset.
pub fn unsat(csp: &SetCspInstance, s: &SubsetSupport) -> BigRational {
    let total: BigRational = csp
        .constraints
        .iter()
        .map(|c| expansion::term_energy_subset(s, c))
        .sum();
    total / BigRational::from_integer(BigInt::from(csp.constraints.len()))
}

/// Exact minimum of `UNSAT(I, S)` over all non-empty subsets
/// `S` of the full string space. Only feasible for `q^n <= 16`.
pub fn min_unsat_over_subsets(csp: &SetCspInstance) -> Result<BigRational> {
    let dim = csp.alphabet.dim(csp.n)?;
    if dim > 16 {
        return Err(Error::TooLarge(format!(
            "subset enumeration over 2^{dim} sets is infeasible"
        )));
    }
    let strings: Vec<DitString> = csp.alphabet.strings(csp.n).collect();
    let mut best: Option<BigRational> = None;
    for mask in 1u32..(1u32 << dim) {
        let subset: std::collections::BTreeSet<DitString> = strings
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| s.clone())
            .collect();
        let value = unsat(csp, &SubsetSupport::new(subset)?);
        if best.as_ref().map_or(true, |b| value < *b) {
            best = Some(value);
        }
    }
    Ok(best.expect("at least one non-empty subset"))
}

/// Energy of a state in the projector form `(1/m) sum_i (I - P~_i)`,
/// which is the form the weight-bound inequalities are stated for.
pub fn projector_energy(inst: &HamiltonianInstance, state: &[f64]) -> Result<f64> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let dim = state.len();
    let norm2: f64 = state.iter().map(|a| a * a).sum();
    let mut overlap_total = 0.0;
    for t in 0..inst.num_terms() {
        let ground = inst.ground(t)?;
        // <psi|P~|psi> accumulated class by class.
        for idx in 0..dim {
            if state[idx] == 0.0 {
                continue;
            }
            let x = alphabet.string_at(idx, n);
            if let Some(class) = ground.class_containing(&x) {
                let amp = 1.0 / class.len() as f64;
                for u in class {
                    let y = x.splice(&ground.qudits, u)?;
                    overlap_total += amp * state[idx] * state[alphabet.index_of(&y)];
                }
            }
        }
    }
    Ok(norm2 - overlap_total / inst.num_terms() as f64)
}

/// Checks the bad-weight bound: the squared weight of bad strings in a
/// non-negative normalized state is at most `m` times its energy.
pub fn bad_weight_check(state: &[f64], inst: &HamiltonianInstance) -> Result<bool> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let mut bad_weight = 0.0;
    for (idx, &a) in state.iter().enumerate() {
        if a != 0.0 && inst.is_bad(&alphabet.string_at(idx, n))? {
            bad_weight += a * a;
        }
    }
    let energy = projector_energy(inst, state)?;
    Ok(bad_weight <= inst.num_terms() as f64 * energy + 1e-9)
}

/// Checks the boundary bound: the energy is at least
/// `1/(q^k m)` times the squared weight of support strings that have a
/// graph neighbor outside the support.
pub fn boundary_weight_check(state: &[f64], inst: &HamiltonianInstance) -> Result<bool> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let support: Vec<bool> = state.iter().map(|&a| a > 1e-14).collect();
    let mut boundary_weight = 0.0;
    for (idx, &a) in state.iter().enumerate() {
        if !support[idx] {
            continue;
        }
        let x = alphabet.string_at(idx, n);
        let escapes = neighbors(&x, inst)?
            .into_iter()
            .any(|(_, y)| !support[alphabet.index_of(&y)]);
        if escapes {
            boundary_weight += a * a;
        }
    }
    let energy = projector_energy(inst, state)?;
    let qk = alphabet.dim(inst.locality())? as f64;
    Ok(energy >= boundary_weight / (qk * inst.num_terms() as f64) - 1e-9)
}

/// The max-amplitude string of the non-negative groundstate, ties broken
/// lexicographically. This is the prover-side witness extractor.
pub fn witness_from_groundstate(inst: &HamiltonianInstance) -> Result<DitString> {
    let dim = inst.alphabet().dim(inst.num_dits())?;
    let method = if dim <= 1 << 10 { Method::Dense } else { Method::Iterative };
    let report = ground_energy(inst, method)?;
    let mut best = 0usize;
    for i in 1..dim {
        if report.amplitudes[i] > report.amplitudes[best] + ZERO_ENERGY_TOL {
            best = i;
        }
    }
    Ok(inst.alphabet().string_at(best, inst.num_dits()))
}

/// Multi-source BFS from the bad set: the maximum over all strings of
/// the distance to the nearest bad string, or `None` when some string
/// cannot reach one (in particular on frustration-free instances).
pub fn max_min_bad_distance(inst: &HamiltonianInstance) -> Result<Option<usize>> {
    let alphabet = inst.alphabet();
    let n = inst.num_dits();
    let dim = alphabet.dim(n)?;
    if dim > ENUMERATION_CAP {
        return Err(Error::TooLarge("string space too large".into()));
    }
    let mut dist = vec![usize::MAX; dim];
    let mut queue = VecDeque::new();
    for idx in 0..dim {
        if inst.is_bad(&alphabet.string_at(idx, n))? {
            dist[idx] = 0;
            queue.push_back(idx);
        }
    }
    if queue.is_empty() {
        return Ok(None);
    }
    while let Some(idx) = queue.pop_front() {
        for (_, y) in neighbors(&alphabet.string_at(idx, n), inst)? {
            let yi = alphabet.index_of(&y);
            if dist[yi] == usize::MAX {
                dist[yi] = dist[idx] + 1;
                queue.push_back(yi);
            }
        }
    }
    Ok(if dist.iter().any(|&d| d == usize::MAX) {
        None
    } else {
        dist.into_iter().max()
    })
}
