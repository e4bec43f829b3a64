//! End-to-end runs of the `critlab` binary.

use std::path::Path;
use std::process::{Command, Output};

use critlab_cli::RunReport;

fn critlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critlab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn report(out: &Output) -> RunReport {
    serde_json::from_slice(&out.stdout).expect("stdout is a report")
}

#[test]
fn verify_cardy_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(&["verify", "cardy"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.passed && r.consistent() && !r.checks.is_empty());
    assert_eq!(r.config.seed, 1);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["perco", "--set", "colour=red"][..],
        &["perco", "--nosuch"],
        &["nosuch"],
        &["saw", "--samples", "10"],
        &["perco", "--p", "1.5", "--samples", "5"],
        &["cardy", "--format", "svg", "--out", "."],
        &["verify", "99"],
    ] {
        assert_eq!(critlab(args, dir.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a 100-step trace is far too coarse to show dimension 1 + kappa/8
    let out = critlab(&["sle", "--kappa", "6", "--dt", "1e-2", "--kmin", "0", "--kmax", "3"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert!(!r.passed && r.consistent());
}

#[test]
fn saw_counts_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(&["saw", "--lattice", "hex", "--nmax", "20", "--out", "counts.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("counts.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# critlab saw seed=1"));
    assert_eq!(lines.next(), Some("N,A_N,A_prime_N_unrooted_unoriented"));
    assert!(text.contains("\n20,704304,1380\n"));
    assert!(text.contains("# check,submultiplicativity violations,0,pass"));
    assert!(text.contains("# check,bracket contains sqrt(2 + sqrt 2),1,pass"));
}

#[test]
fn sle_svg_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(&["sle", "--kappa", "6", "--tmax", "1", "--dt", "1e-4", "--svg", "trace.svg"], dir.path());
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let svg = std::fs::read_to_string(dir.path().join("trace.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains("seed=1"));
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let args = ["ust", "--n", "3", "--samples", "500", "--seed", "17", "--format", "csv,json,svg", "--out", "run"];
    let mut seen = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(critlab(&args, dir.path()).status.code(), Some(0));
        let read = |f: &str| std::fs::read_to_string(dir.path().join("run").join(f)).unwrap();
        seen.push([read("ust.csv"), read("ust.json"), read("ust.svg")]);
    }
    assert!(seen[0] == seen[1], "artifacts differ between identical runs");
    for text in &seen[0] {
        assert!(text.contains("seed=17") || text.contains("\"seed\": 17"));
    }
}

#[test]
fn config_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(&["gff", "--n", "5", "--samples", "3", "--seed", "9", "--json", "run.json", "--pgm", "field.pgm"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let first = report(&out);
    std::fs::write(dir.path().join("run.cfg"), first.config.to_kv()).unwrap();
    let again = critlab(&["gff", "--config", "run.cfg"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    let second = report(&again);
    assert_eq!(second.config, first.config);
    assert_eq!(second.measurements, first.measurements);
    let saved: RunReport = serde_json::from_slice(&std::fs::read(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(saved.config, first.config);
    let pgm = std::fs::read_to_string(dir.path().join("field.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n# critlab gff seed=9"));
}

#[test]
fn config_file_for_another_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.cfg"), "command = perco\n").unwrap();
    assert_eq!(critlab(&["gff", "--config", "x.cfg"], dir.path()).status.code(), Some(2));
}
