//! Matrix-form term machinery: stoquasticity validation, groundspace
//! projectors, the constructive non-negative decomposition, and the
//! uniformity certificate.
//!
//! The decomposition never runs a second eigensolve per block: basis
//! strings are partitioned into connectivity classes under `<x|P|y> > tol`
//! and each class block must be rank 1 with a non-negative top vector,
//! which is exactly what makes `P` a stoquastic projector.

use nalgebra::{DMatrix, DVector};

use crate::dits::Alphabet;
use crate::error::{Error, Result};
use crate::instance::{Class, MatrixTerm};

/// Default tolerance for eigen-zero and entry-sign tests. The uniform
/// snap relies on amplitudes being `1/sqrt(s)` for integer `s <= q^k`, so
/// snapping is exact once a state passes the spread test at this scale.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Builds a [`MatrixTerm`] from raw entries: checks symmetry and
/// stoquasticity, shifts the diagonal so the minimal eigenvalue is 0, and
/// records the shift.
pub fn prepare_matrix_term(
    qudits: Vec<usize>,
    matrix: DMatrix<f64>,
    exact: Option<Vec<num::rational::BigRational>>,
    alphabet: &Alphabet,
) -> Result<MatrixTerm> {
    let dim = alphabet.dim(qudits.len())?;
    if matrix.nrows() != dim || matrix.ncols() != dim {
        return Err(Error::Validation(format!(
            "matrix is {}x{}, expected {dim}x{dim} for {} qudits",
            matrix.nrows(),
            matrix.ncols(),
            qudits.len()
        )));
    }
    for i in 0..dim {
        for j in 0..dim {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > DEFAULT_TOL {
                return Err(Error::Validation(format!(
                    "matrix is not symmetric at ({i},{j})"
                )));
            }
            if i != j && matrix[(i, j)] > DEFAULT_TOL {
                return Err(Error::Validation(format!(
                    "positive off-diagonal entry {} at ({i},{j}): term is not stoquastic",
                    matrix[(i, j)]
                )));
            }
        }
    }
    let eigenvalues = matrix.clone().symmetric_eigen().eigenvalues;
    let lambda_min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let (matrix, shift) = if lambda_min.abs() > 1e-12 {
        let mut shifted = matrix;
        for i in 0..dim {
            shifted[(i, i)] -= lambda_min;
        }
        (shifted, lambda_min)
    } else {
        (matrix, 0.0)
    };
    if lambda_max - shift > 1.0 + DEFAULT_TOL {
        return Err(Error::Validation(format!(
            "term operator norm {} exceeds 1 after the groundshift",
            lambda_max - shift
        )));
    }
    Ok(MatrixTerm { qudits, matrix, exact, shift })
}

/// Re-validates the invariants of an already-prepared matrix term.
pub fn validate_stoquastic_matrix(m: &MatrixTerm, alphabet: &Alphabet) -> Result<()> {
    let dim = alphabet.dim(m.arity())?;
    if m.matrix.nrows() != dim || m.matrix.ncols() != dim {
        return Err(Error::Validation("matrix dimension mismatch".into()));
    }
    for i in 0..dim {
        for j in 0..dim {
            if i != j && m.matrix[(i, j)] > DEFAULT_TOL {
                return Err(Error::Validation(format!(
                    "positive off-diagonal entry at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Orthogonal projector onto the minimal-eigenvalue eigenspace of the
/// term's (shifted) matrix.
///
/// Fails when the spectral gap between the ground cluster and the next
/// eigenvalue is below `10 * tol`, since the projector is then not
/// numerically well defined.
pub fn groundspace_projector(t: &MatrixTerm, tol: f64) -> Result<DMatrix<f64>> {
    let eigen = t.matrix.clone().symmetric_eigen();
    let lambda_min = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !lambda_min.is_finite() {
        return Err(Error::Eigen("eigendecomposition produced non-finite values".into()));
    }
    let in_cluster: Vec<bool> = eigen
        .eigenvalues
        .iter()
        .map(|&l| l <= lambda_min + tol)
        .collect();
    let next_above = eigen
        .eigenvalues
        .iter()
        .zip(&in_cluster)
        .filter(|(_, &inside)| !inside)
        .map(|(&l, _)| l)
        .fold(f64::INFINITY, f64::min);
    if next_above - lambda_min < 10.0 * tol {
        return Err(Error::Eigen(format!(
            "degenerate tolerance: gap {} between ground cluster and next eigenvalue",
            next_above - lambda_min
        )));
    }
    let dim = t.matrix.nrows();
    let mut p = DMatrix::<f64>::zeros(dim, dim);
    for (col, &inside) in in_cluster.iter().enumerate() {
        if inside {
            let v = eigen.eigenvectors.column(col);
            p += v * v.transpose();
        }
    }
    Ok(p)
}

/// A stoquastic projector written as rank-1 projectors onto orthogonal
/// non-negative states with pairwise disjoint supports.
#[derive(Debug, Clone)]
pub struct NonNegDecomposition {
    /// Non-negative unit vectors over the local basis.
    pub states: Vec<DVector<f64>>,
}

impl NonNegDecomposition {
    /// `sum_j |phi_j><phi_j|`, for reassembly checks.
    pub fn reassemble(&self, dim: usize) -> DMatrix<f64> {
        let mut p = DMatrix::<f64>::zeros(dim, dim);
        for phi in &self.states {
            p += phi * phi.transpose();
        }
        p
    }
}

/// Constructive non-negative decomposition of a stoquastic projector.
///
/// Basis strings are grouped by connectivity under `P[x][y] > tol`; each
/// class block must be rank 1, and the normalized dominant column is its
/// non-negative state. Any negative entry beyond tolerance or a block of
/// higher rank signals that `P` is not a stoquastic projector.
pub fn nonneg_decomposition(p: &DMatrix<f64>, tol: f64) -> Result<NonNegDecomposition> {
    let dim = p.nrows();
    for i in 0..dim {
        for j in 0..dim {
            if p[(i, j)] < -tol {
                return Err(Error::Validation(format!(
                    "projector entry {} at ({i},{j}) is negative beyond tolerance",
                    p[(i, j)]
                )));
            }
        }
    }

    let mut uf = UnionFind::new(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            if p[(i, j)] > tol {
                uf.union(i, j);
            }
        }
    }

    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for i in 0..dim {
        if p[(i, i)] > tol {
            classes[uf.find(i)].push(i);
        }
    }

    let mut states = Vec::new();
    for members in classes.into_iter().filter(|c| !c.is_empty()) {
        // Rank-1 extraction: normalize the heaviest column of the block.
        let pivot = members
            .iter()
            .copied()
            .max_by(|&a, &b| p[(a, a)].partial_cmp(&p[(b, b)]).unwrap())
            .unwrap();
        let norm = p[(pivot, pivot)].sqrt();
        let mut phi = DVector::<f64>::zeros(dim);
        for &x in &members {
            phi[x] = (p[(x, pivot)] / norm).max(0.0);
        }
        // Verify the block really is |phi><phi|.
        for &x in &members {
            for &y in &members {
                if (phi[x] * phi[y] - p[(x, y)]).abs() > 10.0 * tol {
                    return Err(Error::Validation(format!(
                        "connectivity class block is not rank 1 at ({x},{y}); \
                         not a stoquastic projector or numerical breakdown"
                    )));
                }
            }
        }
        states.push(phi);
    }

    let d = NonNegDecomposition { states };
    let residual = (d.reassemble(dim) - p).norm();
    if residual > 10.0 * tol * (dim as f64).max(1.0) {
        return Err(Error::Validation(format!(
            "decomposition reassembly residual {residual} too large"
        )));
    }
    Ok(d)
}

/// Certifies each decomposition state as a subset state and returns its
/// support as a class, with amplitudes snapped exactly to
/// `1/sqrt(support size)`.
pub fn uniformize(
    d: &NonNegDecomposition,
    alphabet: &Alphabet,
    arity: usize,
    tol: f64,
) -> Result<Vec<Class>> {
    let mut classes = Vec::with_capacity(d.states.len());
    for phi in &d.states {
        let support: Vec<usize> = (0..phi.len()).filter(|&i| phi[i] > tol).collect();
        if support.is_empty() {
            return Err(Error::NonUniformState("decomposition state has empty support".into()));
        }
        let target = 1.0 / (support.len() as f64).sqrt();
        for &i in &support {
            if (phi[i] - target).abs() > tol {
                return Err(Error::NonUniformState(format!(
                    "amplitude {} deviates from 1/sqrt({}) beyond tolerance",
                    phi[i],
                    support.len()
                )));
            }
        }
        classes.push(support.iter().map(|&i| alphabet.string_at(i, arity)).collect::<Class>());
    }
    // Canonical order: classes sorted by their least string, so the
    // set-form/matrix-form round trip is stable.
    classes.sort_by(|a: &Class, b: &Class| a.iter().next().cmp(&b.iter().next()));
    Ok(classes)
}

/// Load-time pipeline for a matrix term: projector, decomposition,
/// uniformity certificate.
pub fn decompose_term(m: &MatrixTerm, alphabet: &Alphabet, tol: f64) -> Result<Vec<Class>> {
    let p = groundspace_projector(m, tol)?;
    let d = nonneg_decomposition(&p, tol)?;
    uniformize(&d, alphabet, m.arity(), tol)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}
