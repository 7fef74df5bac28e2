//! Shared JSON summary shape emitted by the harness commands.

use serde::Serialize;
use std::collections::BTreeMap;

/// Outcome of one verified inequality: the smallest observed margin
/// (right-hand side minus left-hand side) and whether it stayed nonnegative.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaOutcome {
    pub margin: f64,
    pub pass: bool,
}

impl LemmaOutcome {
    pub fn from_margin(margin: f64) -> Self {
        LemmaOutcome {
            margin,
            pass: margin >= 0.0,
        }
    }
}

/// Summary document: `config`, per-bound `validity` rates, per-bound median
/// sharpness ratios, and per-inequality `lemmas` outcomes. The extra fields
/// (`applicability`, `regime`, `detail`) carry auxiliary rates, regime
/// medians, and per-trial arrays.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config: serde_json::Value,
    pub validity: BTreeMap<String, f64>,
    pub sharpness_median: BTreeMap<String, f64>,
    pub lemmas: BTreeMap<String, LemmaOutcome>,
    pub applicability: BTreeMap<String, f64>,
    pub regime: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl Summary {
    pub fn new(config: serde_json::Value) -> Self {
        Summary {
            config,
            validity: BTreeMap::new(),
            sharpness_median: BTreeMap::new(),
            lemmas: BTreeMap::new(),
            applicability: BTreeMap::new(),
            regime: BTreeMap::new(),
            detail: None,
        }
    }

    /// Deterministic pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summary serializes");
        text.push('\n');
        text
    }

    /// Every lemma outcome is a pass.
    pub fn lemmas_pass(&self) -> bool {
        self.lemmas.values().all(|o| o.pass)
    }
}

/// Median of a sample; the even case averages the two central values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}
