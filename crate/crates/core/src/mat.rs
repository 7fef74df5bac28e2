//! Dense real matrices: the symmetric carrier type, a general companion for
//! intermediate products, and the plain-text matrix file format.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// Dense real matrix, row-major. Used for intermediate products (eigenvector
/// assemblies, projector powers) where symmetry is not guaranteed.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Largest entry magnitude (the max norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
    }

    /// `y = M^T x`.
    pub fn mul_vec_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a * xi;
            }
        }
    }
}

/// Dense real symmetric `n x n` matrix, row-major full storage.
///
/// Invariants enforced at construction: every entry is finite and
/// `entries[i][j] == entries[j][i]` exactly. Use [`SymmetricMatrix::symmetrized`]
/// to project an almost-symmetric matrix onto the symmetric ones first.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Validating constructor from row-major entries.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, Error> {
        if n == 0 || data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
                if j > i && v != data[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymmetricMatrix { n, data })
    }

    /// Explicit symmetrization `(M + M^T) / 2` of a square matrix.
    pub fn symmetrized(m: &Matrix) -> Result<Self, Error> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let n = m.rows();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = 0.5 * (m.get(i, j) + m.get(j, i));
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymmetricMatrix::new(n, data)
    }

    /// Build from the upper triangle of a generator; the lower triangle is
    /// mirrored, so the result is symmetric by construction.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymmetricMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_of(n, |i| {
            let _ = i;
            1.0
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::diagonal_of(n, |i| values[i])
    }

    fn diagonal_of<F: Fn(usize) -> f64>(n: usize, f: F) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = f(i);
        }
        SymmetricMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix, Error> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix, Error> {
        self.zip(other, |a, b| a - b)
    }

    fn zip<F: Fn(f64, f64) -> f64>(
        &self,
        other: &SymmetricMatrix,
        f: F,
    ) -> Result<SymmetricMatrix, Error> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(SymmetricMatrix { n: self.n, data })
    }

    pub fn scale(&self, c: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
    }
}

/// Parse the plain-text matrix format: an optional batch of `#` comment
/// lines, a line holding `n`, then `n` lines of `n` whitespace-separated
/// decimal floats. Comment lines are allowed anywhere; blank lines are
/// skipped.
pub fn parse_matrix(text: &str) -> Result<SymmetricMatrix, Error> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut n: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match n {
            None => {
                let parsed = line.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("expected dimension, got {line:?}"),
                })?;
                if parsed == 0 {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "dimension must be positive".to_string(),
                    });
                }
                n = Some(parsed);
            }
            Some(dim) => {
                if rows.len() == dim {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected {dim} rows, found extra data"),
                    });
                }
                let mut row = Vec::with_capacity(dim);
                for tok in line.split_whitespace() {
                    let v = tok.parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad float {tok:?}"),
                    })?;
                    row.push(v);
                }
                if row.len() != dim {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected {dim} values, got {}", row.len()),
                    });
                }
                rows.push(row);
            }
        }
    }
    let dim = n.ok_or(Error::Parse {
        line: 0,
        message: "empty input".to_string(),
    })?;
    if rows.len() != dim {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {dim} rows, got {}", rows.len()),
        });
    }
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    SymmetricMatrix::new(dim, data)
}

/// Render a matrix in the plain-text format. Floats use the shortest
/// representation that round-trips exactly, so `parse_matrix` recovers the
/// matrix bit for bit.
pub fn format_matrix(m: &SymmetricMatrix) -> String {
    let n = m.n();
    let mut out = String::new();
    out.push_str(&n.to_string());
    out.push('\n');
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{}", m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_input() {
        let err = SymmetricMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap_err();
        assert_eq!(err, Error::NotSymmetric { row: 0, col: 1 });
    }

    #[test]
    fn rejects_non_finite() {
        let err = SymmetricMatrix::new(2, vec![1.0, f64::NAN, f64::NAN, 4.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteEntry { .. }));
    }

    #[test]
    fn symmetrized_averages() {
        let m = Matrix::from_data(2, 2, vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        let s = SymmetricMatrix::symmetrized(&m).unwrap();
        assert_eq!(s.get(0, 1), 3.0);
        assert_eq!(s.get(1, 0), 3.0);
    }

    #[test]
    fn text_format_round_trips_exactly() {
        let m = SymmetricMatrix::from_upper(3, |i, j| {
            (1.0 + i as f64) / (7.0 + j as f64) - 0.3 * ((i + j) as f64)
        });
        let text = format_matrix(&m);
        let back = parse_matrix(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn parse_skips_comments_and_blank_lines() {
        let text = "# demo\n2\n# row one\n1 0.5\n\n0.5 -2\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 1), -2.0);
    }

    #[test]
    fn parse_rejects_asymmetric_file() {
        let text = "2\n1 2\n3 4\n";
        assert!(matches!(parse_matrix(text), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn matmul_and_transpose() {
        let a = Matrix::from_data(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let at = a.transpose();
        let g = at.mul(&a);
        assert_eq!(g.get(0, 0), 17.0);
        assert_eq!(g.get(2, 1), 2.0 * 3.0 + 5.0 * 6.0);
    }
}
