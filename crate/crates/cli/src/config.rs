//! Experiment configuration and its command-line syntax.

use anyhow::{anyhow, bail, Context, Result};
use matperturb_core::bounds::BoundName;
use matperturb_core::noise::NoiseSpec;
use serde::{Deserialize, Serialize};

/// Eigenvalue profile of the data matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind")]
pub enum SpectrumSpec {
    /// Exactly `n` eigenvalues, sorted descending.
    #[serde(rename = "explicit")]
    Explicit { values: Vec<f64> },
    /// Leading nonzero eigenvalues; the spectrum is padded with zeros to
    /// length `n` and kept sorted descending.
    #[serde(rename = "low_rank")]
    LowRank { values: Vec<f64> },
    /// `lambda_1 * ratio^(i-1)` for `i = 1..=n`.
    #[serde(rename = "geometric")]
    Geometric { lambda1: f64, ratio: f64 },
}

impl SpectrumSpec {
    /// Materialize the descending eigenvalue list for dimension `n`.
    pub fn eigenvalues(&self, n: usize) -> Result<Vec<f64>> {
        let eigs = match self {
            SpectrumSpec::Explicit { values } => {
                if values.len() != n {
                    bail!("explicit spectrum has {} values, expected n = {n}", values.len());
                }
                values.clone()
            }
            SpectrumSpec::LowRank { values } => {
                if values.len() > n {
                    bail!("low-rank spectrum has {} values, more than n = {n}", values.len());
                }
                let mut eigs = values.clone();
                eigs.extend(std::iter::repeat_n(0.0, n - values.len()));
                eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
                eigs
            }
            SpectrumSpec::Geometric { lambda1, ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    bail!("geometric ratio must lie in (0, 1), got {ratio}");
                }
                (0..n).map(|i| lambda1 * ratio.powi(i as i32)).collect()
            }
        };
        for w in eigs.windows(2) {
            if w[0] < w[1] {
                bail!("spectrum must be sorted descending");
            }
        }
        if eigs.iter().any(|v| !v.is_finite()) {
            bail!("spectrum contains non-finite values");
        }
        Ok(eigs)
    }

    /// Parse the CLI syntax `explicit:..`, `lowrank:..`, `geometric:l1,ratio`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| anyhow!("spectrum must look like kind:values, got {text:?}"))?;
        let values: Vec<f64> = rest
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad spectrum value {tok:?}"))
            })
            .collect::<Result<_>>()?;
        match kind {
            "explicit" => Ok(SpectrumSpec::Explicit { values }),
            "lowrank" | "low_rank" => Ok(SpectrumSpec::LowRank { values }),
            "geometric" => {
                if values.len() != 2 {
                    bail!("geometric spectrum takes lambda1,ratio");
                }
                Ok(SpectrumSpec::Geometric {
                    lambda1: values[0],
                    ratio: values[1],
                })
            }
            other => bail!("unknown spectrum kind {other:?}"),
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    pub spectrum: SpectrumSpec,
    pub noise: NoiseSpec,
    pub trials: usize,
    /// Requested bound columns, in output order.
    pub bounds: Vec<BoundName>,
    pub out_path: String,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            bail!("trials must be at least 1");
        }
        if self.p < 1 || self.p >= self.n {
            bail!("p must satisfy 1 <= p < n, got p = {}, n = {}", self.p, self.n);
        }
        self.spectrum.eigenvalues(self.n)?;
        if self.bounds.is_empty() {
            bail!("at least one bound must be requested");
        }
        Ok(())
    }
}

/// The canonical expansion of `--bounds all`.
pub fn default_bounds() -> Vec<BoundName> {
    vec![
        BoundName::DavisKahanP,
        BoundName::EckartYoung,
        BoundName::EigMain,
        BoundName::LowrankE,
        BoundName::LowrankXbar,
        BoundName::GeneralF,
    ]
}

/// Parse a comma-separated bound list or the keyword `all`.
pub fn parse_bounds(text: &str) -> Result<Vec<BoundName>> {
    if text.trim() == "all" {
        return Ok(default_bounds());
    }
    text.split(',')
        .map(|tok| parse_bound_name(tok.trim()))
        .collect()
}

pub fn parse_bound_name(name: &str) -> Result<BoundName> {
    match name {
        "davis_kahan_S" => Ok(BoundName::DavisKahanS),
        "davis_kahan_p" => Ok(BoundName::DavisKahanP),
        "eckart_young" => Ok(BoundName::EckartYoung),
        "eig_main" => Ok(BoundName::EigMain),
        "lowrank_xbar" => Ok(BoundName::LowrankXbar),
        "lowrank_E" => Ok(BoundName::LowrankE),
        "general_f" => Ok(BoundName::GeneralF),
        "psd_lowrank_xbar" => Ok(BoundName::PsdLowrankXbar),
        "psd_lowrank_E" => Ok(BoundName::PsdLowrankE),
        other => bail!("unknown bound name {other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spectrum_kinds() {
        let s = SpectrumSpec::parse("explicit:3,2,1").unwrap();
        assert_eq!(s.eigenvalues(3).unwrap(), vec![3.0, 2.0, 1.0]);
        let lr = SpectrumSpec::parse("lowrank:100,60,30").unwrap();
        let eigs = lr.eigenvalues(5).unwrap();
        assert_eq!(eigs, vec![100.0, 60.0, 30.0, 0.0, 0.0]);
        let g = SpectrumSpec::parse("geometric:8,0.5").unwrap();
        assert_eq!(g.eigenvalues(3).unwrap(), vec![8.0, 4.0, 2.0]);
    }

    #[test]
    fn rejects_bad_spectra() {
        assert!(SpectrumSpec::parse("explicit:1,2,3").unwrap().eigenvalues(3).is_err());
        assert!(SpectrumSpec::parse("geometric:8,1.5").unwrap().eigenvalues(3).is_err());
        assert!(SpectrumSpec::parse("nope:1").is_err());
    }

    #[test]
    fn bound_list_parsing() {
        assert_eq!(parse_bounds("all").unwrap(), default_bounds());
        let list = parse_bounds("eig_main,davis_kahan_p").unwrap();
        assert_eq!(list, vec![BoundName::EigMain, BoundName::DavisKahanP]);
        assert!(parse_bounds("bogus").is_err());
    }
}
