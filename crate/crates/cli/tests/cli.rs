//! End-to-end checks of the command line interface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_longmem"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let run = |path: &Path| {
        let status = bin()
            .args([
                "simulate", "--d", "0.4", "--phi", "0.9", "--sigma2", "1.0", "--T", "64",
                "--seed", "42", "--out",
            ])
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run(&out);
    let text = read(&out);
    assert!(text.starts_with("# d=0.4,phi=0.9,sigma2=1,T=64,seed=42"));
    let values: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && *l != "y")
        .collect();
    assert_eq!(values.len(), 64);
    for v in &values {
        v.parse::<f64>().unwrap();
    }
    // Bit-identical on rerun.
    let out2 = dir.path().join("y2.csv");
    run(&out2);
    assert_eq!(text, read(&out2));
}

#[test]
fn bias_correct_adjusts_acf_within_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("y.csv");
    assert!(bin()
        .args([
            "simulate", "--d", "0.3", "--phi", "0.6", "--T", "200", "--seed", "7", "--out",
        ])
        .arg(&series)
        .status()
        .unwrap()
        .success());

    let out = dir.path().join("adjusted.csv");
    assert!(bin()
        .args([
            "bias-correct",
            "--input",
        ])
        .arg(&series)
        .args([
            "--stat", "acf", "--method", "raw", "--B", "19", "--order", "logsq", "--lags",
            "1,3,6", "--seed", "11", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = read(&out);
    let mut rows = 0;
    for line in text.lines().skip(2) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        let adjusted: f64 = fields[6].parse().unwrap();
        assert!(adjusted.abs() < 1.0, "adjusted {adjusted} escaped (-1,1)");
        rows += 1;
    }
    assert_eq!(rows, 3);
    assert!(text.lines().nth(1).unwrap().starts_with("stat,k,observed"));
}

#[test]
fn bias_correct_supports_fixed_prefilter_and_kilian() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("y.csv");
    assert!(bin()
        .args([
            "simulate", "--d", "0.4", "--phi", "0.0", "--T", "128", "--seed", "3", "--out",
        ])
        .arg(&series)
        .status()
        .unwrap()
        .success());

    for method in ["prefiltered-d=0.4", "kilian"] {
        let out = dir.path().join(format!("{method}.csv"));
        assert!(bin()
            .args(["bias-correct", "--input"])
            .arg(&series)
            .args([
                "--stat", "irf", "--method", method, "--B", "9", "--order", "logsq", "--lags",
                "1,2", "--seed", "5", "--out",
            ])
            .arg(&out)
            .status()
            .unwrap()
            .success());
        assert!(read(&out).lines().count() >= 4);
    }
}

#[test]
fn mc_runs_a_tiny_experiment_and_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.conf");
    std::fs::write(
        &config,
        "d_phi = 0.2:0.5\nT = 48\nR = 3\nB = 4\nmethods = raw\nstats = irf, acf\n\
         order_rule = logsq\nseed = 9\ntable_lags = 1, 3\nprofile_max_lag = 6\n",
    )
    .unwrap();
    let out = dir.path().join("results");
    let output = bin()
        .args(["mc", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&out)
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    for name in ["table_irf.csv", "table_acf.csv", "profile_acf.csv", "run_meta.txt"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let meta = read(&out.join("run_meta.txt"));
    assert!(meta.contains("rng = "));
    assert!(meta.contains("seed = 9"));
}

#[test]
fn bad_inputs_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    // |d| >= 0.5 is rejected.
    let out = dir.path().join("x.csv");
    let output = bin()
        .args([
            "simulate", "--d", "0.6", "--phi", "0.0", "--T", "32", "--seed", "1", "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("error:"));

    // Broken config file.
    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "nonsense = 1\n").unwrap();
    let output = bin()
        .args(["mc", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.path().join("results"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("error:"));
}
