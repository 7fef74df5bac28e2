//! Numerical verification of the per-segment integral estimates and the
//! closed-form integral inequality, on seeded instances that satisfy each
//! estimate's hypotheses.

use anyhow::{bail, Result};

use matperturb_core::bounds::{eig_main, lowrank_bilinear};
use matperturb_core::contour::{
    build_contour_main1, build_contours_lowrank, integral_lemma_check, segment_integrals_m,
    segment_integrals_n, ContourFn,
};
use matperturb_core::spectral::{compute_stats, GapProfile};

use crate::gen::{self, Instance};
use crate::report::{LemmaOutcome, Summary};

/// Verified inequality names, as they appear in the JSON report.
pub const LEMMA_NAMES: [&str; 8] = [
    "integral_lemma",
    "m1_constant_weight",
    "m2_m4_lateral",
    "m3_far_edge",
    "m1_linear_weight",
    "n1_near_edge",
    "n2_n4_lateral",
    "n3_far_edge",
];

#[derive(Debug)]
pub struct LemmaSuiteReport {
    pub summary: Summary,
    pub all_pass: bool,
}

struct MarginTracker {
    min: f64,
}

impl MarginTracker {
    fn new() -> Self {
        MarginTracker { min: f64::INFINITY }
    }
    fn add(&mut self, margin: f64) {
        self.min = self.min.min(margin);
    }
}

/// Generate a gate-compliant instance, halving the noise scale (and logging
/// the regeneration) whenever the checker rejects a draw; instances are never
/// skipped silently.
fn gated_instance(
    eigenvalues: &[f64],
    seed: u64,
    trial: usize,
    mut noise_norm: f64,
    p: usize,
    check: impl Fn(&Instance, usize) -> bool,
    regenerated: &mut usize,
) -> Result<Instance> {
    for _attempt in 0..6 {
        let inst = gen::build_instance(eigenvalues, seed, trial, noise_norm);
        if check(&inst, p) {
            return Ok(inst);
        }
        *regenerated += 1;
        noise_norm *= 0.5;
    }
    bail!("could not generate a gate-compliant instance after 6 attempts");
}

/// Run the full estimate-verification suite.
///
/// Instance sizes cycle through `sizes`; `instances` seeded draws are checked
/// per estimate family. Reported margins are `RHS - LHS`, minimized over the
/// instances; the suite passes only if every margin is nonnegative.
pub fn verify_lemmas(seed: u64, sizes: &[usize], instances: usize) -> Result<LemmaSuiteReport> {
    if instances == 0 || sizes.is_empty() {
        bail!("verify-lemmas needs at least one size and one instance");
    }
    let mut regenerated = 0usize;
    let mut margins: std::collections::BTreeMap<&str, MarginTracker> = LEMMA_NAMES
        .iter()
        .map(|&name| (name, MarginTracker::new()))
        .collect();

    // Closed-form integral inequality over the 9-point grid, cross-checked
    // against the arctangent closed form.
    for a in [0.01, 0.1, 1.0] {
        for t in [1.0, 10.0, 100.0] {
            let check = integral_lemma_check(a, t)?;
            if (check.numeric - check.closed_form).abs() > 1e-7 * check.closed_form {
                bail!(
                    "quadrature disagrees with closed form at a = {a}, T = {t}: {} vs {}",
                    check.numeric,
                    check.closed_form
                );
            }
            margins
                .get_mut("integral_lemma")
                .unwrap()
                .add(check.bound - check.numeric);
        }
    }

    for i in 0..instances {
        let n = sizes[i % sizes.len()].max(5);
        let top = 10.0 + 0.5 * i as f64;
        let delta = top * (0.04 + 0.01 * (i % 3) as f64);

        // Eigenspace-gate instance (p = 1): left-segment and geometry
        // estimates for the constant weight.
        {
            let eigs = gen::eigenspace_gate_spectrum(n, top, delta);
            let inst = gated_instance(
                &eigs,
                seed,
                2 * i,
                0.9 * delta / 4.0,
                1,
                |inst, p| {
                    let stats = compute_stats(&inst.decomp, &inst.noise, p).unwrap();
                    eig_main(&stats, &inst.decomp).applicable
                },
                &mut regenerated,
            )?;
            let stats = compute_stats(&inst.decomp, &inst.noise, 1)?;
            let gaps = GapProfile::new(&inst.decomp);
            let delta_p = gaps.delta(1);
            let lambda_p = inst.decomp.eigenvalues()[0];
            let sigma1 = inst.decomp.sigma1();
            let contour = build_contour_main1(&inst.decomp, 1)?;
            let m = segment_integrals_m(&inst.decomp, &inst.noise, &contour, &ContourFn::one())?;

            let log_term = (6.0 * sigma1 / delta_p).ln();
            let m1_rhs = 70.0
                * (stats.noise_norm / lambda_p.abs() * log_term
                    + (stats.r * stats.r) as f64 * stats.x / delta_p);
            margins
                .get_mut("m1_constant_weight")
                .unwrap()
                .add(m1_rhs - m.values[0]);

            let width = contour.x_right() - contour.x_left();
            let t = contour.half_height();
            let lateral_rhs = stats.noise_norm * width / (t * t);
            margins
                .get_mut("m2_m4_lateral")
                .unwrap()
                .add((lateral_rhs - m.values[1]).min(lateral_rhs - m.values[3]));

            let m3_rhs = 4.0 * stats.noise_norm / (contour.x_right() - lambda_p);
            margins
                .get_mut("m3_far_edge")
                .unwrap()
                .add(m3_rhs - m.values[2]);
        }

        // Split-gate instance (p = 2, k = 1): weighted left-segment estimate
        // and the |z|-kernel segment estimates on the positive rectangle.
        {
            let eigs = gen::split_gate_spectrum(n.max(5), top, delta);
            let inst = gated_instance(
                &eigs,
                seed,
                2 * i + 1,
                0.9 * delta / 4.0,
                2,
                |inst, p| {
                    let stats = compute_stats(&inst.decomp, &inst.noise, p).unwrap();
                    stats.split_valid
                        && stats.k == 1
                        && lowrank_bilinear(&stats, &inst.decomp).applicable
                },
                &mut regenerated,
            )?;
            let stats = compute_stats(&inst.decomp, &inst.noise, 2)?;
            let gaps = GapProfile::new(&inst.decomp);
            let delta_k = gaps.delta(1);
            let lambda_k = inst.decomp.eigenvalues()[0];
            let pair = build_contours_lowrank(&inst.decomp, 2, 1)?;
            let g1 = pair.positive;
            let (a0, a1, t) = (g1.x_left(), g1.x_right(), g1.half_height());

            let nvals = segment_integrals_n(&inst.decomp, &g1)?;
            let n1_rhs = 8.0 * a0 / delta_k + 4.0 * (3.0 * t / delta_k).ln();
            margins
                .get_mut("n1_near_edge")
                .unwrap()
                .add(n1_rhs - nvals.values[0]);
            let lateral_rhs = 2.0f64.sqrt() * (a1 - a0) / t;
            margins
                .get_mut("n2_n4_lateral")
                .unwrap()
                .add((lateral_rhs - nvals.values[1]).min(lateral_rhs - nvals.values[3]));
            let n3_rhs =
                4.0 * a1 / (a1 - lambda_k) + 4.0 * (3.0 * t / (a1 - lambda_k)).ln();
            margins
                .get_mut("n3_far_edge")
                .unwrap()
                .add(n3_rhs - nvals.values[2]);

            let m = segment_integrals_m(&inst.decomp, &inst.noise, &g1, &ContourFn::z())?;
            let log_term = (3.0 * t / delta_k).ln();
            let r2 = (stats.r_bar * stats.r_bar) as f64;
            let m1z_rhs = r2 * stats.x_bar * (8.0 * lambda_k / delta_k + 2.0 * log_term)
                + 80.0 * stats.noise_norm * log_term;
            margins
                .get_mut("m1_linear_weight")
                .unwrap()
                .add(m1z_rhs - m.values[0]);
        }
    }

    let mut summary = Summary::new(serde_json::json!({
        "seed": seed,
        "sizes": sizes,
        "instances": instances,
    }));
    for (name, tracker) in margins {
        summary
            .lemmas
            .insert(name.to_string(), LemmaOutcome::from_margin(tracker.min));
    }
    summary
        .regime
        .insert("regenerated_instances".to_string(), regenerated as f64);
    let all_pass = summary.lemmas_pass();
    Ok(LemmaSuiteReport { summary, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_default_sizes() {
        let report = verify_lemmas(7, &[5, 8], 2).unwrap();
        assert!(report.all_pass, "{}", report.summary.to_json());
        assert_eq!(report.summary.lemmas.len(), 8);
    }
}
