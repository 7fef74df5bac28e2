//! `matperturb`: batch front end for spectral perturbation experiments.
//!
//! Exit codes: 0 when every requested check passes, 1 on any invariant or
//! validity failure (or runtime error), 2 on usage errors.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use matperturb_cli::config::{parse_bounds, ExperimentConfig, SpectrumSpec};
use matperturb_cli::experiment::{evaluate_bound, run_experiment};
use matperturb_cli::keyineq::{key_inequality_batch, KeyIneqOptions};
use matperturb_cli::lemmas::verify_lemmas;
use matperturb_cli::report::{median, Summary};
use matperturb_core::bounds::davis_kahan;
use matperturb_core::eigen::eigendecompose;
use matperturb_core::mat::{parse_matrix, SymmetricMatrix};
use matperturb_core::noise::{
    default_probes, private_lowrank, sample_noise, wigner_statistics, NoiseKind, NoiseSpec,
};
use matperturb_core::spectral::{compute_stats, GapProfile};

/// Invocation problems (missing flags, unknown names); mapped to exit 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "matperturb",
    version,
    about = "Spectral perturbation bounds: experiments, certificates, and numerical verification"
)]
struct Cli {
    /// Base seed; all randomness in a command derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path. `experiment` treats it as a prefix and writes
    /// `<out>.csv` plus `<out>.json`; other commands write the document
    /// verbatim (stdout always gets a copy).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format where tabular output exists (`eig`, `wigner-stats`).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Input matrix in the plain text format (dimension line, then rows).
    #[arg(long, global = true)]
    matrix: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigendecomposition of --matrix: eigenvalues, magnitude order, gaps.
    Eig {
        /// Include eigenvectors in the JSON output.
        #[arg(long)]
        vectors: bool,
    },
    /// Evaluate perturbation bounds for --matrix against a noise matrix
    /// (from --noise-matrix, or sampled from --noise-kind/--noise-scale).
    Bound {
        /// Block size p (1-based).
        #[arg(long)]
        p: usize,
        /// Comma-separated bound names, or `all`.
        #[arg(long, default_value = "all")]
        bounds: String,
        /// 1-based index subset for an additional davis_kahan_S report.
        #[arg(long)]
        subset: Option<String>,
        #[arg(long)]
        noise_matrix: Option<PathBuf>,
        #[arg(long, default_value = "gaussian_wigner")]
        noise_kind: String,
        #[arg(long)]
        noise_scale: Option<f64>,
    },
    /// Seeded experiment sweep; requires --out and writes CSV + JSON summary.
    Experiment {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        /// `explicit:v1,v2,..` | `lowrank:v1,..` | `geometric:lambda1,ratio`.
        #[arg(long)]
        spectrum: String,
        #[arg(long, default_value = "gaussian_wigner")]
        noise_kind: String,
        #[arg(long)]
        noise_scale: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value = "all")]
        bounds: String,
    },
    /// Verify the eight integral estimates on seeded instances.
    VerifyLemmas {
        /// Instance sizes, cycled.
        #[arg(long, default_value = "5,8,12")]
        sizes: String,
        /// Instances per estimate family.
        #[arg(long, default_value_t = 10)]
        instances: usize,
    },
    /// Check the bootstrapping chain on gap-compliant instances.
    KeyInequality {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Also compute the slower two-sided norm integral.
        #[arg(long)]
        full_chain: bool,
    },
    /// Noisy low-rank pipeline on --matrix, with accuracy certificates.
    DpLowrank {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value = "scaled_gaussian")]
        noise_kind: String,
        #[arg(long)]
        noise_scale: f64,
    },
    /// Spectral-norm and probe-bilinear statistics of a noise ensemble.
    WignerStats {
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value = "gaussian_wigner")]
        noise_kind: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Eig { vectors } => cmd_eig(&cli, *vectors),
        Command::Bound {
            p,
            bounds,
            subset,
            noise_matrix,
            noise_kind,
            noise_scale,
        } => cmd_bound(
            &cli,
            *p,
            bounds,
            subset.as_deref(),
            noise_matrix,
            noise_kind,
            *noise_scale,
        ),
        Command::Experiment {
            n,
            p,
            spectrum,
            noise_kind,
            noise_scale,
            trials,
            bounds,
        } => cmd_experiment(&cli, *n, *p, spectrum, noise_kind, *noise_scale, *trials, bounds),
        Command::VerifyLemmas { sizes, instances } => cmd_verify_lemmas(&cli, sizes, *instances),
        Command::KeyInequality {
            n,
            p,
            trials,
            full_chain,
        } => cmd_key_inequality(&cli, *n, *p, *trials, *full_chain),
        Command::DpLowrank {
            p,
            noise_kind,
            noise_scale,
        } => cmd_dp_lowrank(&cli, *p, noise_kind, *noise_scale),
        Command::WignerStats {
            n,
            trials,
            noise_kind,
            scale,
        } => cmd_wigner_stats(&cli, *n, *trials, noise_kind, *scale),
    }
}

fn load_matrix(cli: &Cli) -> Result<SymmetricMatrix> {
    let path = cli
        .matrix
        .as_ref()
        .ok_or_else(|| usage("this command requires --matrix <path>"))?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading matrix file {}", path.display()))?;
    Ok(parse_matrix(&text)?)
}

fn parse_noise_kind(name: &str) -> Result<NoiseKind> {
    NoiseKind::from_name(name)
        .ok_or_else(|| usage(format!("unknown noise kind {name:?} (gaussian_wigner | rademacher_wigner | scaled_gaussian)")))
}

/// Print the document to stdout and mirror it to --out when given.
fn emit(cli: &Cli, text: &str) -> Result<()> {
    print!("{text}");
    if let Some(path) = &cli.out {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn require_json(cli: &Cli, command: &str) -> Result<()> {
    if cli.format == Format::Csv {
        return Err(usage(format!("{command} has no CSV form; use --format json")));
    }
    Ok(())
}

fn cmd_eig(cli: &Cli, vectors: bool) -> Result<bool> {
    let a = load_matrix(cli)?;
    let d = eigendecompose(&a)?;
    let n = d.n();
    let text = match cli.format {
        Format::Json => {
            let gaps = GapProfile::new(&d);
            let mut doc = serde_json::json!({
                "n": n,
                "eigenvalues": d.eigenvalues(),
                "singular_order": d.singular_order().iter().map(|&i| i + 1).collect::<Vec<_>>(),
                "sigma": (0..n).map(|i| d.sigma(i)).collect::<Vec<_>>(),
                "gaps": gaps.deltas(),
                "degenerate": d.degenerate(),
            });
            if vectors {
                let rows: Vec<Vec<f64>> = (0..n).map(|i| d.eigenvector(i).to_vec()).collect();
                doc["eigenvectors"] = serde_json::to_value(rows)?;
            }
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("index,eigenvalue,sigma_rank\n");
            // sigma_rank[i]: position of eigenvalue i in the magnitude order.
            let mut rank = vec![0usize; n];
            for (pos, &idx) in d.singular_order().iter().enumerate() {
                rank[idx] = pos + 1;
            }
            for (i, lambda) in d.eigenvalues().iter().enumerate() {
                text.push_str(&format!("{},{},{}\n", i + 1, lambda, rank[i]));
            }
            text
        }
    };
    emit(cli, &text)?;
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    cli: &Cli,
    p: usize,
    bounds: &str,
    subset: Option<&str>,
    noise_matrix: &Option<PathBuf>,
    noise_kind: &str,
    noise_scale: Option<f64>,
) -> Result<bool> {
    require_json(cli, "bound")?;
    let a = load_matrix(cli)?;
    if p < 1 || p > a.n() {
        return Err(usage(format!("p must satisfy 1 <= p <= n = {}", a.n())));
    }
    let noise = match noise_matrix {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading noise matrix {}", path.display()))?;
            parse_matrix(&text)?
        }
        None => {
            let scale = noise_scale
                .ok_or_else(|| usage("provide --noise-matrix or --noise-scale"))?;
            sample_noise(
                &NoiseSpec {
                    kind: parse_noise_kind(noise_kind)?,
                    scale,
                    seed: cli.seed,
                },
                a.n(),
            )
        }
    };
    let requested = parse_bounds(bounds).map_err(|e| usage(e.to_string()))?;
    let decomp = eigendecompose(&a)?;
    let stats = compute_stats(&decomp, &noise, p)?;
    let gaps = GapProfile::new(&decomp);
    let reports: Vec<_> = requested
        .iter()
        .map(|&name| evaluate_bound(name, &stats, &decomp, &gaps))
        .collect();
    let subset_report = match subset {
        Some(spec) => {
            let indices: Vec<usize> = spec
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|_| usage(format!("bad subset index {tok:?}")))
                })
                .collect::<Result<_>>()?;
            let delta_s = gaps.subset_gap(&indices)?;
            Some(davis_kahan(stats.noise_norm, delta_s))
        }
        None => None,
    };
    let mut doc = serde_json::json!({
        "p": p,
        "noise_norm": stats.noise_norm,
        "stats": stats,
        "reports": reports,
    });
    if let Some(rep) = subset_report {
        doc["subset_report"] = serde_json::to_value(rep)?;
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(cli, &text)?;
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    cli: &Cli,
    n: usize,
    p: usize,
    spectrum: &str,
    noise_kind: &str,
    noise_scale: f64,
    trials: usize,
    bounds: &str,
) -> Result<bool> {
    let out = cli
        .out
        .as_ref()
        .ok_or_else(|| usage("experiment requires --out <prefix>"))?;
    let config = ExperimentConfig {
        n,
        p,
        spectrum: SpectrumSpec::parse(spectrum).map_err(|e| usage(e.to_string()))?,
        noise: NoiseSpec {
            kind: parse_noise_kind(noise_kind)?,
            scale: noise_scale,
            seed: cli.seed,
        },
        trials,
        bounds: parse_bounds(bounds).map_err(|e| usage(e.to_string()))?,
        out_path: out.display().to_string(),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let output = run_experiment(&config)?;
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    fs::write(&csv_path, &output.csv)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    let summary_text = output.summary.to_json();
    fs::write(&json_path, &summary_text)
        .with_context(|| format!("writing {}", json_path.display()))?;
    print!("{summary_text}");
    Ok(true)
}

fn cmd_verify_lemmas(cli: &Cli, sizes: &str, instances: usize) -> Result<bool> {
    require_json(cli, "verify-lemmas")?;
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad size {tok:?}")))
        })
        .collect::<Result<_>>()?;
    let report = verify_lemmas(cli.seed, &sizes, instances)?;
    emit(cli, &report.summary.to_json())?;
    Ok(report.all_pass)
}

fn cmd_key_inequality(cli: &Cli, n: usize, p: usize, trials: usize, full_chain: bool) -> Result<bool> {
    require_json(cli, "key-inequality")?;
    let report = key_inequality_batch(
        cli.seed,
        &KeyIneqOptions {
            n,
            p,
            trials,
            compute_f_integral: full_chain,
        },
    )?;
    emit(cli, &report.summary.to_json())?;
    Ok(report.all_pass)
}

fn cmd_dp_lowrank(cli: &Cli, p: usize, noise_kind: &str, noise_scale: f64) -> Result<bool> {
    require_json(cli, "dp-lowrank")?;
    let a = load_matrix(cli)?;
    if p < 1 || p >= a.n() {
        return Err(usage(format!("p must satisfy 1 <= p < n = {}", a.n())));
    }
    let spec = NoiseSpec {
        kind: parse_noise_kind(noise_kind)?,
        scale: noise_scale,
        seed: cli.seed,
    };
    let result = private_lowrank(&a, p, &spec)?;
    let doc = serde_json::json!({
        "config": { "p": p, "noise": spec },
        "noise_scale": result.noise_scale,
        "measured_noise_norm": result.measured_noise_norm,
        "certificates": result.certificates,
        "noisy_rank_p": result.noisy_rank_p,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(cli, &text)?;
    Ok(true)
}

fn cmd_wigner_stats(cli: &Cli, n: usize, trials: usize, noise_kind: &str, scale: f64) -> Result<bool> {
    let spec = NoiseSpec {
        kind: parse_noise_kind(noise_kind)?,
        scale,
        seed: cli.seed,
    };
    let probes = default_probes(n);
    let stats = wigner_statistics(&spec, n, trials, &probes)?;
    let envelope = 10.0 * (n as f64).ln();
    let within = stats
        .bilinear_max
        .iter()
        .filter(|&&v| v <= envelope)
        .count() as f64
        / trials as f64;
    let text = match cli.format {
        Format::Json => {
            let mut summary = Summary::new(serde_json::json!({
                "seed": cli.seed,
                "n": n,
                "trials": trials,
                "noise": spec,
            }));
            if let Some(m) = median(&stats.norm_over_sqrt_n) {
                summary
                    .regime
                    .insert("median_norm_over_sqrt_n".to_string(), m);
            }
            summary
                .regime
                .insert("bilinear_envelope".to_string(), envelope);
            summary
                .regime
                .insert("bilinear_within_envelope_rate".to_string(), within);
            summary.detail = Some(serde_json::to_value(&stats)?);
            summary.to_json()
        }
        Format::Csv => {
            let mut text = String::from("trial,norm_over_sqrt_n,bilinear_max\n");
            for (i, (norm, bilinear)) in stats
                .norm_over_sqrt_n
                .iter()
                .zip(&stats.bilinear_max)
                .enumerate()
            {
                text.push_str(&format!("{i},{norm},{bilinear}\n"));
            }
            text
        }
    };
    emit(cli, &text)?;
    Ok(true)
}
