//! Dense complex matrices produced by resolvent evaluation.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::mat::Matrix;

/// Dense complex `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_data(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n);
        CMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix { n: self.n, data }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix { n: self.n, data }
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Embed a real matrix.
    pub fn from_real(m: &Matrix) -> CMatrix {
        assert_eq!(m.rows(), m.cols());
        CMatrix {
            n: m.rows(),
            data: m.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn real_part(&self) -> Matrix {
        Matrix::from_data(self.n, self.n, self.data.iter().map(|c| c.re).collect()).unwrap()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest imaginary-part magnitude.
    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
    }

    /// `y = M^* x` (conjugate transpose).
    pub fn mul_vec_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        for v in y.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        for i in 0..n {
            let xi = x[i];
            let row = &self.data[i * n..(i + 1) * n];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a.conj() * xi;
            }
        }
    }

    /// Scale row `i` by `d[i]` and column `j` by `e[j]`, i.e.
    /// `out = diag(d) * M * diag(e)`.
    pub fn conjugate_by_diagonals(&self, d: &[Complex64], e: &[Complex64]) -> CMatrix {
        assert_eq!(d.len(), self.n);
        assert_eq!(e.len(), self.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            let di = d[i];
            for j in 0..n {
                out.data[i * n + j] = di * self.data[i * n + j] * e[j];
            }
        }
        out
    }
}
