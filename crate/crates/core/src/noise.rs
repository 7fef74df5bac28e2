//! Seeded noise ensembles, ensemble statistics, and the noisy low-rank
//! pipeline.
//!
//! All randomness flows through a ChaCha8 generator seeded with
//! `seed_from_u64`; independent trials use the generator's word-stream
//! facility (`set_stream(trial)`), one substream per trial index. Uniform
//! doubles take the top 53 bits of one `u64`; Gaussians use the Box-Muller
//! cosine branch, consuming exactly two uniforms per entry. Alternate
//! implementations that follow these conventions reproduce the same
//! distributions (the acceptance statistics do not depend on bit-exact
//! streams).

use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[allow(unused_imports)]
use num_traits::Float;

use crate::bounds::{self, BoundReport};
use crate::eigen::eigendecompose;
use crate::error::Error;
use crate::mat::{Matrix, SymmetricMatrix};
use crate::norms;
use crate::spectral;

/// Entry distribution of a symmetric noise matrix. Every kind draws the
/// diagonal from the same law as the strict upper triangle, with entry
/// standard deviation equal to `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NoiseKind {
    /// Independent Gaussian entries, `N(0, scale^2)`.
    #[serde(rename = "gaussian_wigner")]
    GaussianWigner,
    /// Independent sign flips `+-scale`.
    #[serde(rename = "rademacher_wigner")]
    RademacherWigner,
    /// Gaussian entries with `scale` read directly as the noise level of a
    /// privacy mechanism; same law as `gaussian_wigner`.
    #[serde(rename = "scaled_gaussian")]
    ScaledGaussian,
}

impl NoiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::GaussianWigner => "gaussian_wigner",
            NoiseKind::RademacherWigner => "rademacher_wigner",
            NoiseKind::ScaledGaussian => "scaled_gaussian",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "gaussian_wigner" => Some(NoiseKind::GaussianWigner),
            "rademacher_wigner" => Some(NoiseKind::RademacherWigner),
            "scaled_gaussian" => Some(NoiseKind::ScaledGaussian),
            _ => None,
        }
    }
}

impl core::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fully deterministic description of a noise draw.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Entry standard deviation.
    pub scale: f64,
    pub seed: u64,
}

/// Deterministic stream of uniforms and Gaussians over ChaCha8.
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomStream { rng }
    }

    /// Uniform in `[0, 1)` from the top 53 bits of one `u64`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Standard Gaussian via the Box-Muller cosine branch; consumes exactly
    /// two uniforms.
    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // in (0, 1]
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
    }
}

/// Sample the symmetric noise matrix of a spec on substream `trial`.
///
/// Each upper-triangle entry (including the diagonal) is drawn once in
/// row-major order and mirrored, so the matrix is symmetric bit for bit.
pub fn sample_noise_trial(spec: &NoiseSpec, n: usize, trial: u64) -> SymmetricMatrix {
    if spec.scale == 0.0 {
        return SymmetricMatrix::zeros(n);
    }
    let mut stream = RandomStream::new(spec.seed, trial);
    let draw = |stream: &mut RandomStream| match spec.kind {
        NoiseKind::GaussianWigner | NoiseKind::ScaledGaussian => spec.scale * stream.gaussian(),
        NoiseKind::RademacherWigner => {
            if stream.uniform() < 0.5 {
                spec.scale
            } else {
                -spec.scale
            }
        }
    };
    SymmetricMatrix::from_upper(n, |_, _| draw(&mut stream))
}

/// Sample on the spec's base substream (trial 0).
pub fn sample_noise(spec: &NoiseSpec, n: usize) -> SymmetricMatrix {
    sample_noise_trial(spec, n, 0)
}

/// Haar-distributed orthogonal matrix (columns orthonormal), obtained by
/// Gram-Schmidt on a Gaussian matrix with the sign convention `R_ii > 0`.
pub fn sample_orthogonal(seed: u64, stream: u64, n: usize) -> Matrix {
    let mut rand = RandomStream::new(seed, stream);
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rand.gaussian()).collect())
        .collect();
    for j in 0..n {
        // Two orthogonalization passes keep the basis orthonormal to
        // machine precision even for nearly dependent draws.
        for _ in 0..2 {
            for i in 0..j {
                let proj: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let prev = cols[i].clone();
                for (cj, pi) in cols[j].iter_mut().zip(&prev) {
                    *cj -= proj * pi;
                }
            }
        }
        let norm = norms::norm2(&cols[j]);
        let inv = 1.0 / norm;
        for cj in cols[j].iter_mut() {
            *cj *= inv;
        }
        // Deterministic sign.
        if cols[j][j] < 0.0 {
            for cj in cols[j].iter_mut() {
                *cj = -*cj;
            }
        }
    }
    let mut q = Matrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q.set(i, j, v);
        }
    }
    q
}

/// Symmetric matrix with prescribed eigenvalues and a seeded Haar eigenbasis:
/// `A = Q diag(eigs) Q^T`.
pub fn rotated_spectrum(eigenvalues: &[f64], seed: u64, stream: u64) -> SymmetricMatrix {
    let n = eigenvalues.len();
    let q = sample_orthogonal(seed, stream, n);
    SymmetricMatrix::from_upper(n, |a, b| {
        let mut acc = 0.0;
        for i in 0..n {
            acc += eigenvalues[i] * q.get(a, i) * q.get(b, i);
        }
        acc
    })
}

/// Per-trial ensemble statistics: the scaled spectral norm and the largest
/// probe bilinear.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WignerSummary {
    /// `||E|| / sqrt(n)` per trial.
    pub norm_over_sqrt_n: Vec<f64>,
    /// `max over probe pairs |u^T E v|` per trial.
    pub bilinear_max: Vec<f64>,
}

/// Deterministic probe set: `e_1, e_2, e_3`, the normalized all-ones vector,
/// and the normalized alternating-sign vector. All unordered pairs of these
/// five vectors give ten probe pairs.
pub fn default_probes(n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 3, "probe construction needs n >= 3");
    let mut probes = Vec::with_capacity(5);
    for k in 0..3 {
        let mut e = alloc::vec![0.0; n];
        e[k] = 1.0;
        probes.push(e);
    }
    let inv = 1.0 / (n as f64).sqrt();
    probes.push(alloc::vec![inv; n]);
    probes.push(
        (0..n)
            .map(|i| if i % 2 == 0 { inv } else { -inv })
            .collect(),
    );
    probes
}

/// Spectral-norm and bilinear statistics over seeded trials.
///
/// Trial `t` draws from substream `t`; the bilinear statistic maximizes
/// `|u^T E v|` over all unordered pairs of the supplied unit probes.
pub fn wigner_statistics(
    spec: &NoiseSpec,
    n: usize,
    trials: usize,
    probes: &[Vec<f64>],
) -> Result<WignerSummary, Error> {
    if trials == 0 {
        return Err(Error::InvalidRank { p: 0, n: trials });
    }
    for probe in probes {
        if probe.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: probe.len(),
            });
        }
        if (norms::norm2(probe) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit(alloc::format!(
                "probe vector is not unit norm ({})",
                norms::norm2(probe)
            )));
        }
    }
    let sqrt_n = (n as f64).sqrt();
    let mut norm_over_sqrt_n = Vec::with_capacity(trials);
    let mut bilinear_max = Vec::with_capacity(trials);
    let mut image = alloc::vec![0.0; n];
    for trial in 0..trials {
        let e = sample_noise_trial(spec, n, trial as u64);
        norm_over_sqrt_n.push(norms::spectral_norm_sym(&e) / sqrt_n);
        let mut best = 0.0f64;
        for i in 0..probes.len() {
            e.mul_vec(&probes[i], &mut image);
            for j in (i + 1)..probes.len() {
                let dot: f64 = probes[j].iter().zip(&image).map(|(a, b)| a * b).sum();
                best = best.max(dot.abs());
            }
        }
        bilinear_max.push(best);
    }
    Ok(WignerSummary {
        norm_over_sqrt_n,
        bilinear_max,
    })
}

/// Outcome of the noisy low-rank pipeline: the noisy approximant plus the
/// accuracy certificates that apply to it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PrivatePipelineResult {
    pub noisy_rank_p: SymmetricMatrix,
    pub noise_scale: f64,
    pub measured_noise_norm: f64,
    /// Always contains the Eckart-Young certificate; the sharper low-rank
    /// certificates are included when their gates pass.
    pub certificates: Vec<BoundReport>,
}

/// Add seeded noise to a data matrix, return its best rank-`p` approximation
/// together with accuracy certificates for `||A~_p - A_p||`.
pub fn private_lowrank(
    a: &SymmetricMatrix,
    p: usize,
    spec: &NoiseSpec,
) -> Result<PrivatePipelineResult, Error> {
    let n = a.n();
    if p < 1 || p >= n {
        return Err(Error::InvalidRank { p, n });
    }
    let noise = sample_noise(spec, n);
    let perturbed = a.add(&noise)?;
    let decomp_a = eigendecompose(a)?;
    let decomp_perturbed = eigendecompose(&perturbed)?;
    let noisy_rank_p = spectral::best_rank_p(&decomp_perturbed, p)?;
    let stats = spectral::compute_stats(&decomp_a, &noise, p)?;

    let mut certificates = Vec::new();
    certificates.push(bounds::eckart_young(&stats, &decomp_a));
    let lowrank_e = bounds::lowrank_noise(&stats, &decomp_a);
    if lowrank_e.applicable {
        certificates.push(lowrank_e);
    }
    let lowrank_xbar = bounds::lowrank_bilinear(&stats, &decomp_a);
    if lowrank_xbar.applicable {
        certificates.push(lowrank_xbar);
    }

    Ok(PrivatePipelineResult {
        noisy_rank_p,
        noise_scale: spec.scale,
        measured_noise_norm: stats.noise_norm,
        certificates,
    })
}
