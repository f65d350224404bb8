//! The binary end to end: exit codes, output files and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[grid]
modes = 32
nz = 12

[samples]
roundtrip_samples = 2
eulerian_nx = 8
eulerian_ny = 3
"#;

fn thermowave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermowave")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{SMALL}\n{extra}")).unwrap();
    path.to_str().unwrap().to_owned()
}

fn run_mode(dir: &Path, cfg: &str, mode: &str, out: &str, extra: &[&str]) -> Output {
    let out = dir.join(out);
    let mut args = vec!["--config", cfg, "--mode", mode, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    thermowave(&args)
}

#[test]
fn symbols_mode_writes_one_row_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = run_mode(dir.path(), &cfg, "symbols", "a", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("a/symbols.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "xi_index,xi1,xi2,vn_re,vn_im,phi_re,phi_im,q_re,q_im,rho_re,rho_im,backend,cond"
    );
    assert_eq!(lines.count(), 32);
    assert!(dir.path().join("a/manifest.json").exists());
    assert!(dir.path().join("a/summary.txt").exists());
}

#[test]
fn same_seed_same_bytes_other_seed_other_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let files = ["data.csv", "state.csv", "linear_report.json", "manifest.json", "summary.txt"];
    let snapshot = |seed: &str| {
        let o = run_mode(dir.path(), &cfg, "linear-solve", "a", &["--threads", "1", "--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
        files.map(|f| std::fs::read(dir.path().join("a").join(f)).unwrap())
    };
    let first = snapshot("3");
    let second = snapshot("3");
    for (f, (x, y)) in files.iter().zip(first.iter().zip(&second)) {
        assert_eq!(x, y, "{f}");
    }
    let other = snapshot("4");
    assert_ne!(first[0], other[0]);
}

#[test]
fn nonlinear_mode_produces_trace_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[forcing]\nwavenumber = 3\n");
    let o = run_mode(dir.path(), &cfg, "nonlinear-solve", "w", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let trace: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("w/trace.json")).unwrap()).unwrap();
    assert_eq!(trace["status"], "converged");
    let eul = std::fs::read_to_string(dir.path().join("w/eulerian.csv")).unwrap();
    assert!(eul.starts_with("x1,x2,y,eta,w1,w2,w3,theta,q\n"));
    assert_eq!(eul.lines().count(), 1 + 8 * 3);
    let res = std::fs::read_to_string(dir.path().join("w/residuals.csv")).unwrap();
    assert!(res.starts_with("iteration,residual,factor\n"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    assert_eq!(run_mode(dir.path(), &cfg, "bogus", "x", &[]).status.code(), Some(2));

    let bad_key = write_config(dir.path(), "[params]\nviscosity = 2.0\n");
    assert_eq!(run_mode(dir.path(), &bad_key, "symbols", "x", &[]).status.code(), Some(2));

    let zero_speed = write_config(dir.path(), "[params]\ngamma = 0.0\n");
    let o = run_mode(dir.path(), &zero_speed, "symbols", "x", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));

    let loud = write_config(dir.path(), "[forcing]\nwavenumber = 3\namplitude = 0.5\n");
    assert_eq!(run_mode(dir.path(), &loud, "nonlinear-solve", "x", &[]).status.code(), Some(2));

    assert_eq!(thermowave(&["--config", "/nonexistent/run.toml"]).status.code(), Some(2));
}
