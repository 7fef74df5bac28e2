//! Cyclic Jacobi eigendecomposition of symmetric matrices.
//!
//! Deterministic by construction: rotations are applied in a fixed row-cyclic
//! order, eigenpairs are sorted by a total order, and every eigenvector is
//! sign-normalized so that its first component of largest magnitude is
//! positive. Identical input bytes therefore produce identical output bytes.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::mat::{Matrix, SymmetricMatrix};

/// Sweep cap for the cyclic Jacobi iteration.
pub const JACOBI_SWEEP_CAP: usize = 100;
/// Convergence: off-diagonal Frobenius norm relative to the input Frobenius norm.
pub const JACOBI_REL_TOL: f64 = 1e-12;
/// Two eigenvalues closer than this (relative to the spectral norm) flag the
/// decomposition as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-12;

/// Eigendecomposition `A = U diag(lambda) U^T` with eigenvalues sorted
/// descending and a companion permutation sorting them by magnitude.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` is the unit eigenvector for `eigenvalues[i]`.
    eigenvectors: Vec<Vec<f64>>,
    /// Permutation `pi` (0-based) with `|lambda[pi[0]]| >= |lambda[pi[1]]| >= ...`.
    singular_order: Vec<usize>,
    degenerate: bool,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i]
    }

    pub fn singular_order(&self) -> &[usize] {
        &self.singular_order
    }

    /// `sigma_i = |lambda_{pi(i)}|`, the `i`-th largest singular value (0-based).
    pub fn sigma(&self, i: usize) -> f64 {
        self.eigenvalues[self.singular_order[i]].abs()
    }

    /// Spectral norm of the decomposed matrix.
    pub fn sigma1(&self) -> f64 {
        self.sigma(0)
    }

    /// Whether some consecutive eigenvalue pair is closer than
    /// `DEGENERACY_REL_TOL * sigma1`.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// Reassemble `U diag(lambda) U^T`; exact symmetry by construction.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.n();
        SymmetricMatrix::from_upper(n, |a, b| {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.eigenvalues[i] * self.eigenvectors[i][a] * self.eigenvectors[i][b];
            }
            acc
        })
    }

    /// `max |U^T U - I|` over all entries.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let dot: f64 = self.eigenvectors[i]
                    .iter()
                    .zip(&self.eigenvectors[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `max |U diag(lambda) U^T - A|` over all entries.
    pub fn reconstruction_residual(&self, a: &SymmetricMatrix) -> f64 {
        self.reconstruct().sub(a).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// Eigenvector matrix with `u_i` as column `i`.
    pub fn eigenvector_matrix(&self) -> Matrix {
        let n = self.n();
        let mut u = Matrix::zeros(n, n);
        for (i, vec_i) in self.eigenvectors.iter().enumerate() {
            for (k, &v) in vec_i.iter().enumerate() {
                u.set(k, i, v);
            }
        }
        u
    }

    /// Assemble a decomposition directly from eigenpairs (used by tests and
    /// by synthetic-spectrum generators). The basis must be orthonormal to
    /// within the type's tolerance; eigenvalues are sorted descending and
    /// vectors sign-normalized here.
    pub fn from_pairs(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>) -> Result<Self, Error> {
        let n = eigenvalues.len();
        if n == 0 || eigenvectors.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: eigenvectors.len(),
            });
        }
        for v in &eigenvectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let decomp = Self::assemble(eigenvalues, eigenvectors);
        let residual = decomp.orthonormality_residual();
        if residual > 1e-10 {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(decomp)
    }

    fn assemble(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>) -> Self {
        let n = eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        // Stable descending sort by value keeps the solver's order on exact ties.
        order.sort_by(|&a, &b| {
            eigenvalues[b]
                .partial_cmp(&eigenvalues[a])
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let sorted_values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let mut sorted_vectors: Vec<Vec<f64>> =
            order.into_iter().map(|i| eigenvectors[i].clone()).collect();
        for v in &mut sorted_vectors {
            normalize_sign(v);
        }
        let scale = sorted_values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let degenerate = sorted_values
            .windows(2)
            .any(|w| (w[0] - w[1]).abs() <= DEGENERACY_REL_TOL * scale);
        let singular_order =
            singular_order(&sorted_values).expect("sorted eigenvalues are descending");
        SpectralDecomposition {
            eigenvalues: sorted_values,
            eigenvectors: sorted_vectors,
            singular_order,
            degenerate,
        }
    }
}

/// Flip the vector so that its first component of largest magnitude is positive.
fn normalize_sign(v: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Permutation `pi` (0-based) sorting eigenvalues by decreasing magnitude.
///
/// Input must be sorted descending by value. Magnitude ties put the positive
/// eigenvalue first, then the smaller index, which makes the order total and
/// reproducible.
pub fn singular_order(eigenvalues: &[f64]) -> Result<Vec<usize>, Error> {
    for (i, w) in eigenvalues.windows(2).enumerate() {
        if w[0] < w[1] {
            return Err(Error::NotDescending { position: i + 1 });
        }
    }
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| {
        let (va, vb) = (eigenvalues[a], eigenvalues[b]);
        vb.abs()
            .partial_cmp(&va.abs())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| {
                let pa = if va > 0.0 { 0u8 } else { 1u8 };
                let pb = if vb > 0.0 { 0u8 } else { 1u8 };
                pa.cmp(&pb)
            })
            .then_with(|| a.cmp(&b))
    });
    Ok(idx)
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `JACOBI_REL_TOL` times the input Frobenius norm; errors with the residual
/// norm if `JACOBI_SWEEP_CAP` sweeps do not get there.
pub fn eigendecompose(a: &SymmetricMatrix) -> Result<SpectralDecomposition, Error> {
    let n = a.n();
    let mut w: Vec<f64> = a.data().to_vec();
    let mut v: Vec<f64> = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fnorm = a.frobenius_norm();
    let threshold = JACOBI_REL_TOL * fnorm;

    let mut converged = fnorm == 0.0 || off_diagonal_norm(&w, n) <= threshold;
    if !converged {
        for _sweep in 0..JACOBI_SWEEP_CAP {
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = w[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = w[p * n + p];
                    let aqq = w[q * n + q];
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    w[p * n + p] = app - t * apq;
                    w[q * n + q] = aqq + t * apq;
                    w[p * n + q] = 0.0;
                    w[q * n + p] = 0.0;
                    for k in 0..n {
                        if k == p || k == q {
                            continue;
                        }
                        let akp = w[k * n + p];
                        let akq = w[k * n + q];
                        let new_kp = c * akp - s * akq;
                        let new_kq = s * akp + c * akq;
                        w[k * n + p] = new_kp;
                        w[p * n + k] = new_kp;
                        w[k * n + q] = new_kq;
                        w[q * n + k] = new_kq;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
            if off_diagonal_norm(&w, n) <= threshold {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::EigenNonConvergence {
            off_diagonal_norm: off_diagonal_norm(&w, n),
        });
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| w[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|k| v[k * n + j]).collect())
        .collect();
    Ok(SpectralDecomposition::assemble(eigenvalues, eigenvectors))
}

fn off_diagonal_norm(w: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let x = w[i * n + j];
            sum += x * x;
        }
    }
    (2.0 * sum).sqrt()
}
