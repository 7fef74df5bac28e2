//! Binary-level checks: exit codes, file formats, and output schemas.

use std::fs;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_matperturb")
}

fn write_matrix(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn eig_json_and_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_matrix(
        dir.path(),
        "a.txt",
        "# demo matrix\n3\n3 0.5 0\n0.5 1 0\n0 0 -2\n",
    );
    let out = Command::new(bin())
        .args(["eig", "--matrix", matrix.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["n"], 3);
    assert_eq!(doc["singular_order"][1], 3); // lambda_3 = -2 has the second magnitude

    let csv = Command::new(bin())
        .args([
            "eig",
            "--matrix",
            matrix.to_str().unwrap(),
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("index,eigenvalue,sigma_rank\n"));
    assert_eq!(text.lines().count(), 4);

    let with_vectors = Command::new(bin())
        .args(["eig", "--matrix", matrix.to_str().unwrap(), "--vectors"])
        .output()
        .unwrap();
    assert!(with_vectors.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&with_vectors.stdout).unwrap();
    let rows = doc["eigenvectors"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // lambda_3 = -2 sits on the third axis.
    assert!((rows[2][2].as_f64().unwrap().abs() - 1.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    // Missing --matrix.
    let out = Command::new(bin()).args(["eig"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unknown subcommand flags / parse failures come from clap with code 2.
    let out = Command::new(bin())
        .args(["experiment", "--n", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Experiment without --out.
    let out = Command::new(bin())
        .args([
            "experiment",
            "--n",
            "6",
            "--p",
            "1",
            "--spectrum",
            "explicit:6,5,4,3,2,1",
            "--noise-scale",
            "0.01",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unknown noise kind.
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_matrix(dir.path(), "a.txt", "2\n2 0\n0 1\n");
    let out = Command::new(bin())
        .args([
            "bound",
            "--matrix",
            matrix.to_str().unwrap(),
            "--p",
            "1",
            "--noise-kind",
            "bogus",
            "--noise-scale",
            "0.1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // p out of range.
    let out = Command::new(bin())
        .args([
            "bound",
            "--matrix",
            matrix.to_str().unwrap(),
            "--p",
            "9",
            "--noise-scale",
            "0.1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_matrix_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_matrix(dir.path(), "bad.txt", "2\n1 2\n3 4\n"); // asymmetric
    let out = Command::new(bin())
        .args(["eig", "--matrix", matrix.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("differ"), "stderr: {err}");
}

#[test]
fn bound_accepts_noise_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_matrix(dir.path(), "a.txt", "2\n2 0\n0 1\n");
    let noise = write_matrix(dir.path(), "e.txt", "2\n0 0.01\n0.01 0\n");
    let out = Command::new(bin())
        .args([
            "bound",
            "--matrix",
            matrix.to_str().unwrap(),
            "--p",
            "1",
            "--noise-matrix",
            noise.to_str().unwrap(),
            "--bounds",
            "davis_kahan_p,eckart_young",
            "--subset",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["noise_norm"].as_f64().unwrap() - 0.01).abs() < 1e-12);
    assert_eq!(doc["reports"][0]["name"], "davis_kahan_p");
    // delta_1 = 1, so the classical bound is 2 * 0.01 / 1.
    assert!((doc["reports"][0]["value"].as_f64().unwrap() - 0.02).abs() < 1e-12);
    assert_eq!(doc["subset_report"]["name"], "davis_kahan_S");
}

#[test]
fn experiment_writes_csv_and_summary_with_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let out = Command::new(bin())
        .args([
            "experiment",
            "--n",
            "8",
            "--p",
            "1",
            "--spectrum",
            "explicit:10,9.6,4,3,2,1.5,1,0.5",
            "--noise-scale",
            "0.01",
            "--trials",
            "3",
            "--seed",
            "9",
            "--out",
            prefix.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap();
    for key in ["config", "validity", "sharpness_median", "lemmas"] {
        assert!(summary.get(key).is_some(), "summary missing {key}");
    }
    for (_, rate) in summary["validity"].as_object().unwrap() {
        assert_eq!(rate.as_f64().unwrap(), 1.0);
    }

    // Each float cell re-parses to the same bits (shortest round-trip form).
    let csv = fs::read_to_string(prefix.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        &header[..13],
        &[
            "trial",
            "seed",
            "n",
            "p",
            "noise_norm",
            "delta_p",
            "lambda_p",
            "r",
            "x",
            "k",
            "x_bar",
            "actual_proj",
            "actual_rankp"
        ]
    );
    for line in lines {
        for cell in line.split(',') {
            if let Ok(v) = cell.parse::<f64>() {
                assert_eq!(format!("{v}"), cell, "cell {cell} does not round-trip");
            }
        }
    }
}

#[test]
fn dp_lowrank_zero_scale_reproduces_truth() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write_matrix(dir.path(), "a.txt", "3\n2 0 0\n0 1 0\n0 0 0.5\n");
    let out = Command::new(bin())
        .args([
            "dp-lowrank",
            "--matrix",
            matrix.to_str().unwrap(),
            "--p",
            "1",
            "--noise-scale",
            "0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["measured_noise_norm"].as_f64().unwrap(), 0.0);
    let data = doc["noisy_rank_p"]["data"].as_array().unwrap();
    let expected = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    for (cell, want) in data.iter().zip(expected) {
        assert!((cell.as_f64().unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn verify_lemmas_exits_zero_on_pass() {
    let out = Command::new(bin())
        .args(["verify-lemmas", "--instances", "2", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lemmas = doc["lemmas"].as_object().unwrap();
    assert_eq!(lemmas.len(), 8);
    for (name, outcome) in lemmas {
        assert_eq!(outcome["pass"], true, "estimate {name}");
        assert!(outcome["margin"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn out_flag_mirrors_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let out = Command::new(bin())
        .args([
            "wigner-stats",
            "--n",
            "40",
            "--trials",
            "2",
            "--seed",
            "8",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let file_bytes = fs::read(&path).unwrap();
    assert_eq!(out.stdout, file_bytes);
}
