//! Spectral-norm estimation by power iteration on `M^T M` (or `M^* M`).
//!
//! The start vector is the normalized all-ones vector, iteration is capped at
//! [`POWER_ITERATION_CAP`] steps, and the estimate is accepted once the
//! singular-value iterate changes by less than [`POWER_ITERATION_TOL`]
//! relatively. Should the fixed start vector land in the kernel of `M`, the
//! iteration restarts from standard basis vectors in index order, so the
//! result stays deterministic.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cmat::CMatrix;
use crate::mat::{Matrix, SymmetricMatrix};

pub const POWER_ITERATION_CAP: usize = 1000;
pub const POWER_ITERATION_TOL: f64 = 1e-10;

/// Largest singular value of a general square real matrix.
pub fn spectral_norm(m: &Matrix) -> f64 {
    assert_eq!(m.rows(), m.cols(), "spectral_norm expects a square matrix");
    let n = m.rows();
    power_iteration_real(n, |x, y| m.mul_vec(x, y), |x, y| m.mul_vec_transpose(x, y))
}

/// Largest singular value of a symmetric matrix (equals `max_i |lambda_i|`).
pub fn spectral_norm_sym(m: &SymmetricMatrix) -> f64 {
    let n = m.n();
    power_iteration_real(n, |x, y| m.mul_vec(x, y), |x, y| m.mul_vec(x, y))
}

/// Largest singular value of a complex matrix via power iteration on `M^* M`.
pub fn spectral_norm_complex(m: &CMatrix) -> f64 {
    let n = m.n();
    let starts = deterministic_starts(n);
    for start in starts {
        let cstart: Vec<Complex64> = start.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        if let Some(sigma) = power_iteration_complex_from(m, &cstart) {
            return sigma;
        }
    }
    0.0
}

fn deterministic_starts(n: usize) -> impl Iterator<Item = Vec<f64>> {
    let ones = {
        let inv = 1.0 / (n as f64).sqrt();
        vec![inv; n]
    };
    core::iter::once(ones).chain((0..n).map(move |k| {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        e
    }))
}

fn power_iteration_real<F, G>(n: usize, apply: F, apply_t: G) -> f64
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64], &mut [f64]),
{
    for start in deterministic_starts(n) {
        if let Some(sigma) = power_iteration_real_from(n, &apply, &apply_t, &start) {
            return sigma;
        }
    }
    0.0
}

fn power_iteration_real_from<F, G>(n: usize, apply: &F, apply_t: &G, start: &[f64]) -> Option<f64>
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64], &mut [f64]),
{
    let mut v = start.to_vec();
    let mut w = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut sigma_prev = -1.0;
    for iter in 0..POWER_ITERATION_CAP {
        apply(&v, &mut w);
        let sigma = norm2(&w);
        if sigma == 0.0 {
            // Start vector annihilated: the matrix may still be nonzero.
            return if iter == 0 {
                None
            } else {
                Some(sigma_prev.max(0.0))
            };
        }
        if (sigma - sigma_prev).abs() <= POWER_ITERATION_TOL * sigma.max(f64::MIN_POSITIVE) {
            return Some(sigma);
        }
        sigma_prev = sigma;
        apply_t(&w, &mut u);
        let nu = norm2(&u);
        if nu == 0.0 {
            return Some(sigma);
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / nu;
        }
    }
    Some(sigma_prev.max(0.0))
}

fn power_iteration_complex_from(m: &CMatrix, start: &[Complex64]) -> Option<f64> {
    let n = m.n();
    let mut v = start.to_vec();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut sigma_prev = -1.0;
    for iter in 0..POWER_ITERATION_CAP {
        m.mul_vec(&v, &mut w);
        let sigma = norm2_c(&w);
        if sigma == 0.0 {
            return if iter == 0 {
                None
            } else {
                Some(sigma_prev.max(0.0))
            };
        }
        if (sigma - sigma_prev).abs() <= POWER_ITERATION_TOL * sigma.max(f64::MIN_POSITIVE) {
            return Some(sigma);
        }
        sigma_prev = sigma;
        m.mul_vec_adjoint(&w, &mut u);
        let nu = norm2_c(&u);
        if nu == 0.0 {
            return Some(sigma);
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / nu;
        }
    }
    Some(sigma_prev.max(0.0))
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm2_c(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn diagonal_norm_is_max_abs_eigenvalue() {
        let m = SymmetricMatrix::diagonal(&[3.0, 1.0, -5.0]);
        assert!((spectral_norm_sym(&m) - 5.0).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_norm_is_zero() {
        let m = SymmetricMatrix::zeros(4);
        assert_eq!(spectral_norm_sym(&m), 0.0);
    }

    #[test]
    fn kernel_start_vector_recovers() {
        // The all-ones vector is the null vector of this matrix; the
        // deterministic restart must still find sigma_1 = 2.
        let m = SymmetricMatrix::new(2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        assert!((spectral_norm_sym(&m) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn general_matrix_matches_singular_value() {
        // [[0, 2], [0, 0]] has singular values {2, 0}.
        let m = Matrix::from_data(2, 2, vec![0.0, 2.0, 0.0, 0.0]).unwrap();
        assert!((spectral_norm(&m) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn complex_diagonal() {
        let mut m = CMatrix::zeros(2);
        m.set(0, 0, Complex64::new(0.0, 3.0));
        m.set(1, 1, Complex64::new(1.0, 0.0));
        assert!((spectral_norm_complex(&m) - 3.0).abs() < 1e-10);
    }
}
