//! Deterministic instance generators for experiments and verification runs.
//!
//! Substream discipline: trial `t` rotates its data matrix on stream `2 t`
//! and draws its noise on stream `2 t + 1`, all derived from the single run
//! seed.

use matperturb_core::eigen::{eigendecompose, SpectralDecomposition};
use matperturb_core::mat::SymmetricMatrix;
use matperturb_core::noise::{rotated_spectrum, sample_noise_trial, NoiseKind, NoiseSpec};
use matperturb_core::norms::spectral_norm_sym;

pub fn rotation_stream(trial: usize) -> u64 {
    2 * trial as u64
}

pub fn noise_stream(trial: usize) -> u64 {
    2 * trial as u64 + 1
}

/// Symmetric matrix with the given descending spectrum and a Haar basis
/// drawn from the trial's rotation substream.
pub fn rotated_instance(eigenvalues: &[f64], seed: u64, trial: usize) -> SymmetricMatrix {
    rotated_spectrum(eigenvalues, seed, rotation_stream(trial))
}

/// Gaussian symmetric noise rescaled to an exact spectral norm.
pub fn noise_with_norm(n: usize, seed: u64, trial: usize, target: f64) -> SymmetricMatrix {
    if target == 0.0 {
        return SymmetricMatrix::zeros(n);
    }
    let raw = sample_noise_trial(
        &NoiseSpec {
            kind: NoiseKind::GaussianWigner,
            scale: 1.0,
            seed,
        },
        n,
        noise_stream(trial),
    );
    let norm = spectral_norm_sym(&raw);
    raw.scale(target / norm)
}

/// Spectrum with a controlled leading gap `delta` after position 1, a clean
/// half-gap index at r = 2, and spread-out lower eigenvalues:
/// `[top, top - delta, 0.45 top .. 0.05 top]`.
pub fn eigenspace_gate_spectrum(n: usize, top: f64, delta: f64) -> Vec<f64> {
    assert!(n >= 3, "eigenspace spectrum needs n >= 3");
    let mut eigs = Vec::with_capacity(n);
    eigs.push(top);
    eigs.push(top - delta);
    let lo = 0.05 * top;
    let hi = 0.45 * top;
    let tail = n - 2;
    for i in 0..tail {
        let frac = if tail == 1 {
            0.0
        } else {
            i as f64 / (tail - 1) as f64
        };
        eigs.push(hi - (hi - lo) * frac);
    }
    eigs
}

/// Sign-symmetric spectrum whose magnitude-top-2 set splits into one positive
/// and one negative eigenvalue (`p = 2, k = 1`), with matching gaps `delta`
/// on both ends: `[top, top - delta, mid .. -mid, -(top - delta), -top]`.
pub fn split_gate_spectrum(n: usize, top: f64, delta: f64) -> Vec<f64> {
    assert!(n >= 5, "split spectrum needs n >= 5");
    let mut eigs = Vec::with_capacity(n);
    eigs.push(top);
    eigs.push(top - delta);
    let mid = n - 4;
    let hi = 0.4 * top;
    for i in 0..mid {
        let frac = if mid == 1 {
            0.5
        } else {
            i as f64 / (mid - 1) as f64
        };
        eigs.push(hi - 2.0 * hi * frac);
    }
    eigs.push(-(top - delta));
    eigs.push(-top);
    eigs
}

/// A data/noise pair plus the decomposition of the data matrix.
pub struct Instance {
    pub matrix: SymmetricMatrix,
    pub noise: SymmetricMatrix,
    pub decomp: SpectralDecomposition,
}

pub fn build_instance(
    eigenvalues: &[f64],
    seed: u64,
    trial: usize,
    noise_norm: f64,
) -> Instance {
    let matrix = rotated_instance(eigenvalues, seed, trial);
    let noise = noise_with_norm(eigenvalues.len(), seed, trial, noise_norm);
    let decomp = eigendecompose(&matrix).expect("synthetic instance decomposes");
    Instance {
        matrix,
        noise,
        decomp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matperturb_core::spectral::compute_stats;

    #[test]
    fn eigenspace_spectrum_has_half_gap_index_two() {
        let eigs = eigenspace_gate_spectrum(8, 10.0, 0.5);
        assert_eq!(eigs.len(), 8);
        assert!(eigs.windows(2).all(|w| w[0] > w[1]));
        // |lambda_1 - lambda_3| = 5.5 >= 5 = |lambda_1| / 2.
        assert!((eigs[0] - eigs[2]).abs() >= eigs[0] / 2.0);
        assert!((eigs[0] - eigs[1]).abs() < eigs[0] / 2.0);
    }

    #[test]
    fn split_spectrum_produces_valid_split() {
        let eigs = split_gate_spectrum(9, 10.0, 0.5);
        let inst = build_instance(&eigs, 7, 0, 0.1);
        let stats = compute_stats(&inst.decomp, &inst.noise, 2).unwrap();
        assert!(stats.split_valid);
        assert_eq!(stats.k, 1);
        assert_eq!(stats.r_bar, 2);
    }

    #[test]
    fn noise_norm_is_exact() {
        let e = noise_with_norm(6, 3, 0, 0.37);
        assert!((spectral_norm_sym(&e) - 0.37).abs() < 1e-10);
    }
}
