//! Batch harness around `matperturb-core`: experiment sweeps, estimate
//! verification, the bootstrapping-chain check, and report emission.
//!
//! Everything here is driven by a single `u64` seed; no command reads the
//! clock or OS entropy, so rerunning a command with the same seed reproduces
//! its output byte for byte.

pub mod config;
pub mod experiment;
pub mod gen;
pub mod keyineq;
pub mod lemmas;
pub mod report;

pub use config::{ExperimentConfig, SpectrumSpec};
pub use experiment::{run_experiment, ExperimentOutput, TrialRecord};
pub use keyineq::{key_inequality_batch, KeyIneqOptions, KeyIneqReport};
pub use lemmas::{verify_lemmas, LemmaSuiteReport};
pub use report::{LemmaOutcome, Summary};
