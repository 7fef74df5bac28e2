//! Spectral functionals (projectors, low-rank approximants, `f_S(A)`),
//! eigenvalue gaps, and the bilinear noise statistics the bound evaluators
//! consume.
//!
//! Indices in this module follow the mathematical convention: eigenvalues are
//! numbered `1..=n` descending, `delta_p = lambda_p - lambda_{p+1}`, and index
//! sets contain 1-based positions. The CLI and file formats use the same
//! convention.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::SpectralDecomposition;
use crate::error::Error;
use crate::mat::SymmetricMatrix;
use crate::norms;

/// Consecutive eigenvalue gaps plus the exact min-pairwise subset gap.
#[derive(Debug, Clone)]
pub struct GapProfile {
    eigenvalues: Vec<f64>,
}

impl GapProfile {
    pub fn new(decomp: &SpectralDecomposition) -> Self {
        GapProfile {
            eigenvalues: decomp.eigenvalues().to_vec(),
        }
    }

    pub fn from_eigenvalues(eigenvalues: &[f64]) -> Self {
        GapProfile {
            eigenvalues: eigenvalues.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `delta_p = lambda_p - lambda_{p+1}`, valid for `1 <= p <= n-1`.
    pub fn delta(&self, p: usize) -> f64 {
        assert!(
            p >= 1 && p < self.eigenvalues.len(),
            "gap index p = {p} out of range"
        );
        self.eigenvalues[p - 1] - self.eigenvalues[p]
    }

    /// All consecutive gaps `[delta_1, ..., delta_{n-1}]`.
    pub fn deltas(&self) -> Vec<f64> {
        self.eigenvalues.windows(2).map(|w| w[0] - w[1]).collect()
    }

    /// `delta_S = min { |lambda_i - lambda_j| : i in S, j not in S }` with
    /// 1-based `S`. Returns infinity when `S` covers every index.
    pub fn subset_gap(&self, s: &[usize]) -> Result<f64, Error> {
        let n = self.eigenvalues.len();
        let inside = validate_index_set(s, n)?;
        let mut member = alloc::vec![false; n];
        for &i in &inside {
            member[i] = true;
        }
        let mut gap = f64::INFINITY;
        for i in 0..n {
            if !member[i] {
                continue;
            }
            for j in 0..n {
                if member[j] {
                    continue;
                }
                gap = gap.min((self.eigenvalues[i] - self.eigenvalues[j]).abs());
            }
        }
        Ok(gap)
    }
}

/// Validate a 1-based index set; returns sorted, deduplicated 0-based indices.
pub fn validate_index_set(s: &[usize], n: usize) -> Result<Vec<usize>, Error> {
    if s.is_empty() {
        return Err(Error::InvalidIndexSet { index: 0, n });
    }
    let mut out: Vec<usize> = Vec::with_capacity(s.len());
    for &i in s {
        if i < 1 || i > n {
            return Err(Error::InvalidIndexSet { index: i, n });
        }
        out.push(i - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Orthogonal projector onto the span of the eigenvectors indexed by `S`
/// (1-based): `Pi_S = sum_{i in S} u_i u_i^T`.
pub fn projector(decomp: &SpectralDecomposition, s: &[usize]) -> Result<SymmetricMatrix, Error> {
    let idx = validate_index_set(s, decomp.n())?;
    Ok(rank_one_sum(decomp, &idx, |_| 1.0))
}

/// Best rank-`p` approximation `A_p = sum_{i<=p} lambda_{pi(i)} u_{pi(i)} u_{pi(i)}^T`.
pub fn best_rank_p(decomp: &SpectralDecomposition, p: usize) -> Result<SymmetricMatrix, Error> {
    let n = decomp.n();
    if p < 1 || p > n {
        return Err(Error::InvalidRank { p, n });
    }
    let idx: Vec<usize> = decomp.singular_order()[..p].to_vec();
    Ok(rank_one_sum(decomp, &idx, |i| decomp.eigenvalues()[i]))
}

/// Direct evaluation of `f_S(A) = sum_{i in S} f(lambda_i) u_i u_i^T`.
///
/// This is the exact spectral-sum route; the contour module computes the same
/// functional by numerical integration and is checked against this one.
pub fn f_s_direct<F: Fn(f64) -> f64>(
    decomp: &SpectralDecomposition,
    s: &[usize],
    f: F,
) -> Result<SymmetricMatrix, Error> {
    let idx = validate_index_set(s, decomp.n())?;
    let mut weights = Vec::with_capacity(idx.len());
    for &i in &idx {
        let w = f(decomp.eigenvalues()[i]);
        if !w.is_finite() {
            return Err(Error::NonFiniteFunctional {
                eigenvalue: decomp.eigenvalues()[i],
            });
        }
        weights.push(w);
    }
    let n = decomp.n();
    Ok(SymmetricMatrix::from_upper(n, |a, b| {
        let mut acc = 0.0;
        for (pos, &i) in idx.iter().enumerate() {
            acc += weights[pos] * decomp.eigenvector(i)[a] * decomp.eigenvector(i)[b];
        }
        acc
    }))
}

fn rank_one_sum<F: Fn(usize) -> f64>(
    decomp: &SpectralDecomposition,
    idx0: &[usize],
    weight: F,
) -> SymmetricMatrix {
    let n = decomp.n();
    SymmetricMatrix::from_upper(n, |a, b| {
        let mut acc = 0.0;
        for &i in idx0 {
            acc += weight(i) * decomp.eigenvector(i)[a] * decomp.eigenvector(i)[b];
        }
        acc
    })
}

/// Noise statistics entering the perturbation bounds. All index fields are
/// 1-based counts as in the bound statements.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PerturbationStats {
    pub n: usize,
    pub p: usize,
    /// Spectral norm of the noise matrix.
    pub noise_norm: f64,
    /// Smallest `r >= p` with `|lambda_p|/2 <= |lambda_p - lambda_{r+1}|`;
    /// `n` with `r_exists = false` when no such index exists.
    pub r: usize,
    pub r_exists: bool,
    /// `max_{i,j <= r} |u_i^T E u_j|`.
    pub x: f64,
    /// Number of positive eigenvalues among the top `p` by magnitude.
    pub k: usize,
    /// Whether the top-`p` magnitude set is exactly the first `k` indices
    /// plus the last `p-k` indices (checked on indices, not values).
    pub split_valid: bool,
    /// Smallest `r1 >= k` with `lambda_k/2 <= |lambda_k - lambda_{r1+1}|`.
    pub r1: usize,
    pub r1_exists: bool,
    /// Largest `r2 <= n-(p-k)+1` with
    /// `|lambda_{n-(p-k)+1}|/2 <= |lambda_{n-(p-k)+1} - lambda_{r2-1}|`.
    /// Zero (with `r2_exists` vacuously true) when the negative block is empty.
    pub r2: usize,
    pub r2_exists: bool,
    /// `max(r1, n - r2 + 1)`.
    pub r_bar: usize,
    /// Largest bilinear over the two diagonal blocks `i,j <= r1` and
    /// `i,j >= r2`; cross-block pairs are excluded.
    pub x_bar: f64,
}

/// Compute every statistic of [`PerturbationStats`] for a decomposition of
/// the unperturbed matrix and a noise matrix.
///
/// Non-applicability (no valid `r`, invalid sign split) is expressed through
/// flags, never through errors; only dimensional misuse fails.
pub fn compute_stats(
    decomp: &SpectralDecomposition,
    noise: &SymmetricMatrix,
    p: usize,
) -> Result<PerturbationStats, Error> {
    let n = decomp.n();
    if noise.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: noise.n(),
        });
    }
    if p < 1 || p > n {
        return Err(Error::InvalidRank { p, n });
    }
    let lambda = decomp.eigenvalues();
    let noise_norm = norms::spectral_norm_sym(noise);

    let (r, r_exists) = smallest_half_gap_index(lambda, p);
    let bilinear = BilinearTable::new(decomp, noise);
    let x = bilinear.block_max(1, r);

    // Positive/negative split of the top-p magnitude set.
    let top: Vec<usize> = decomp.singular_order()[..p].to_vec();
    let k = top.iter().filter(|&&i| lambda[i] > 0.0).count();
    let split_valid = k >= 1 && {
        let mut sorted = top.clone();
        sorted.sort_unstable();
        let expected: Vec<usize> = (0..k).chain(n - (p - k)..n).collect();
        sorted == expected
    };

    let (r1, r1_exists, r2, r2_exists, r_bar, x_bar) = if split_valid {
        let (r1, r1_exists) = smallest_half_gap_index(lambda, k);
        let bottom = p - k;
        let (r2, r2_exists) = if bottom > 0 {
            largest_half_gap_index(lambda, n - bottom + 1)
        } else {
            (0, true)
        };
        let r_bar = r1.max(if bottom > 0 { n - r2 + 1 } else { 0 });
        let mut x_bar = bilinear.block_max(1, r1);
        if bottom > 0 {
            x_bar = x_bar.max(bilinear.block_max(r2, n));
        }
        (r1, r1_exists, r2, r2_exists, r_bar, x_bar)
    } else {
        (k.max(1), false, 0, false, 0, 0.0)
    };

    Ok(PerturbationStats {
        n,
        p,
        noise_norm,
        r,
        r_exists,
        x,
        k,
        split_valid,
        r1,
        r1_exists,
        r2,
        r2_exists,
        r_bar,
        x_bar,
    })
}

/// Smallest `r >= p` (1-based, `r <= n-1`) with
/// `|lambda_p|/2 <= |lambda_p - lambda_{r+1}|`; `(n, false)` if none.
fn smallest_half_gap_index(lambda: &[f64], p: usize) -> (usize, bool) {
    let n = lambda.len();
    let anchor = lambda[p - 1];
    for r in p..n {
        if anchor.abs() / 2.0 <= (anchor - lambda[r]).abs() {
            return (r, true);
        }
    }
    (n, false)
}

/// Largest `r2 <= b` (1-based, `r2 >= 2`) with
/// `|lambda_b|/2 <= |lambda_b - lambda_{r2-1}|`; `(1, false)` if none.
fn largest_half_gap_index(lambda: &[f64], b: usize) -> (usize, bool) {
    let anchor = lambda[b - 1];
    for r2 in (2..=b).rev() {
        if anchor.abs() / 2.0 <= (anchor - lambda[r2 - 2]).abs() {
            return (r2, true);
        }
    }
    (1, false)
}

/// Cached bilinears `u_i^T E u_j`; rows are computed lazily per leading index.
struct BilinearTable<'a> {
    decomp: &'a SpectralDecomposition,
    noise: &'a SymmetricMatrix,
}

impl<'a> BilinearTable<'a> {
    fn new(decomp: &'a SpectralDecomposition, noise: &'a SymmetricMatrix) -> Self {
        BilinearTable { decomp, noise }
    }

    /// `max |u_i^T E u_j|` over the 1-based inclusive index block
    /// `[lo, hi] x [lo, hi]`.
    fn block_max(&self, lo: usize, hi: usize) -> f64 {
        if lo > hi {
            return 0.0;
        }
        let n = self.decomp.n();
        let mut image = alloc::vec![0.0; n];
        let mut best = 0.0f64;
        for i in (lo - 1)..hi {
            self.noise.mul_vec(self.decomp.eigenvector(i), &mut image);
            for j in (lo - 1)..=i {
                let dot: f64 = self
                    .decomp
                    .eigenvector(j)
                    .iter()
                    .zip(&image)
                    .map(|(a, b)| a * b)
                    .sum();
                best = best.max(dot.abs());
            }
        }
        best
    }
}

/// `max_{i,j <= r} |u_i^T E u_j|` for an arbitrary leading block size
/// (1-based `r`). Monotone non-decreasing in `r`.
pub fn bilinear_max(
    decomp: &SpectralDecomposition,
    noise: &SymmetricMatrix,
    r: usize,
) -> Result<f64, Error> {
    if noise.n() != decomp.n() {
        return Err(Error::DimensionMismatch {
            expected: decomp.n(),
            got: noise.n(),
        });
    }
    if r < 1 || r > decomp.n() {
        return Err(Error::InvalidRank {
            p: r,
            n: decomp.n(),
        });
    }
    Ok(BilinearTable::new(decomp, noise).block_max(1, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigendecompose;

    #[test]
    fn projector_on_diagonal_matrix() {
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[3.0, 1.0, -2.0])).unwrap();
        let p = projector(&d, &[1]).unwrap();
        assert_eq!(p, SymmetricMatrix::diagonal(&[1.0, 0.0, 0.0]));
        let full = projector(&d, &[1, 2, 3]).unwrap();
        assert_eq!(full, SymmetricMatrix::identity(3));
        assert!(projector(&d, &[]).is_err());
        assert!(projector(&d, &[4]).is_err());
    }

    #[test]
    fn best_rank_p_uses_magnitude_order() {
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[3.0, 1.0, -2.0])).unwrap();
        let a2 = best_rank_p(&d, 2).unwrap();
        assert_eq!(a2, SymmetricMatrix::diagonal(&[3.0, 0.0, -2.0]));
        let a3 = best_rank_p(&d, 3).unwrap();
        assert_eq!(a3, SymmetricMatrix::diagonal(&[3.0, 1.0, -2.0]));
        assert!(best_rank_p(&d, 0).is_err());
        assert!(best_rank_p(&d, 4).is_err());
    }

    #[test]
    fn f_s_direct_special_cases() {
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[3.0, 1.0, -2.0])).unwrap();
        // f == 1 on S reproduces the projector.
        let p = f_s_direct(&d, &[1, 2], |_| 1.0).unwrap();
        assert_eq!(p, projector(&d, &[1, 2]).unwrap());
        // f(z) = z on the magnitude-top set reproduces best_rank_p.
        let s: Vec<usize> = d.singular_order()[..2].iter().map(|&i| i + 1).collect();
        let a2 = f_s_direct(&d, &s, |z| z).unwrap();
        assert_eq!(a2, best_rank_p(&d, 2).unwrap());
        // f(z) = z^2 on S = {1, 3}.
        let sq = f_s_direct(&d, &[1, 3], |z| z * z).unwrap();
        assert_eq!(sq, SymmetricMatrix::diagonal(&[9.0, 0.0, 4.0]));
    }

    #[test]
    fn f_s_direct_rejects_non_finite() {
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            f_s_direct(&d, &[1, 2], |z| 1.0 / z),
            Err(Error::NonFiniteFunctional { .. })
        ));
    }

    #[test]
    fn gap_profile_and_subset_gap() {
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[3.0, 1.0, -2.0])).unwrap();
        let gaps = GapProfile::new(&d);
        assert_eq!(gaps.delta(1), 2.0);
        assert_eq!(gaps.delta(2), 3.0);
        assert_eq!(gaps.subset_gap(&[1]).unwrap(), 2.0);
        // Non-contiguous set: nearest outside eigenvalue wins.
        assert_eq!(gaps.subset_gap(&[1, 3]).unwrap(), 2.0);
        assert_eq!(gaps.subset_gap(&[1, 2, 3]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn stats_r_scan_matches_definition() {
        let d =
            eigendecompose(&SymmetricMatrix::diagonal(&[10.0, 9.0, 8.5, 4.0, 1.0])).unwrap();
        let e = SymmetricMatrix::zeros(5);
        let stats = compute_stats(&d, &e, 1).unwrap();
        // |lambda_1|/2 = 5: gaps to lambda_2 (1) and lambda_3 (1.5) are too
        // small, the gap to lambda_4 (6) qualifies, so r = 3.
        assert_eq!(stats.r, 3);
        assert!(stats.r_exists);
        assert_eq!(stats.x, 0.0);
        assert_eq!(stats.x_bar, 0.0);
    }

    #[test]
    fn stats_sign_split() {
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[3.0, 1.0, -2.0])).unwrap();
        let e = SymmetricMatrix::zeros(3);
        let stats = compute_stats(&d, &e, 2).unwrap();
        assert_eq!(stats.k, 1);
        assert!(stats.split_valid);
    }

    #[test]
    fn stats_no_half_gap_flags_r() {
        // All eigenvalues huddle near 10, so no r satisfies the condition.
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[10.0, 9.9, 9.8])).unwrap();
        let e = SymmetricMatrix::zeros(3);
        let stats = compute_stats(&d, &e, 1).unwrap();
        assert_eq!(stats.r, 3);
        assert!(!stats.r_exists);
    }

    #[test]
    fn stats_symmetric_toy_spectrum() {
        let d = eigendecompose(&SymmetricMatrix::diagonal(&[8.0, 1.0, -8.0])).unwrap();
        let e = SymmetricMatrix::zeros(3);
        let stats = compute_stats(&d, &e, 2).unwrap();
        assert_eq!(stats.k, 1);
        assert!(stats.split_valid);
        assert_eq!(stats.r1, 1);
        assert_eq!(stats.r2, 3);
        assert_eq!(stats.r_bar, 1);
    }
}
