use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(cmd: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isotropica"))
        .arg(cmd)
        .arg("--config")
        .arg(fixture(config))
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(extra)
        .output()
        .expect("binary runs")
}

fn ok(cmd: &str, config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = run(cmd, config, dir.path(), &[]);
    assert!(
        o.status.success(),
        "{cmd} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(dir.path().join("manifest.json").exists());
    dir
}

fn read_json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Rows of a CSV file as strings, header excluded.
fn rows(path: PathBuf) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn last_f64(path: PathBuf, col: usize) -> f64 {
    rows(path).last().unwrap()[col].parse().unwrap()
}

#[test]
fn build_state_writes_field_and_manifest() {
    let d = ok("build-state", "build-state.json");
    assert_eq!(rows(d.path().join("field.csv")).len(), 64 * 64);
    let m = read_json(d.path().join("manifest.json"));
    assert_eq!(m["command"], "build-state");
    assert_eq!(m["config"]["hbar"], 0.01);
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn decompose_round_trip_is_tight() {
    let d = ok("decompose", "decompose.json");
    assert!(last_f64(d.path().join("roundtrip.csv"), 3) < 1e-6);
}

#[test]
fn wavefront_finds_the_coherent_centre() {
    let d = ok("wavefront", "wavefront.json");
    let s = read_json(d.path().join("summary.json"));
    assert!(s["hausdorff_over_sqrt_hbar"].as_f64().unwrap() < 10.0);
}

#[test]
fn widths_separate_slow_and_fast_axes() {
    let d = ok("widths", "widths.json");
    let s = read_json(d.path().join("summary.json"));
    assert!(s["position-0"]["exponent"].as_f64().unwrap().abs() < 0.05);
    assert!((s["position-1"]["exponent"].as_f64().unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn validate_phase_reports_pass() {
    let d = ok("validate-phase", "validate-phase.json");
    assert_eq!(read_json(d.path().join("report.json"))["all_pass"], true);
}

#[test]
fn oscillatory_eval_writes_both_columns() {
    let d = ok("oscillatory-eval", "oscillatory-eval.json");
    let r = rows(d.path().join("values.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!(r[0].len(), 6);
}

#[test]
fn spectrum_lists_eigenvalues_in_window() {
    let d = ok("spectrum", "spectrum.json");
    for r in rows(d.path().join("eigenvalues.csv")) {
        assert!(r[1].parse::<f64>().unwrap().abs() <= 0.3);
    }
}

#[test]
fn trace_check_ratio_mode() {
    let d = ok("trace-check", "trace-check.json");
    assert_eq!(read_json(d.path().join("summary.json"))["mode"], "ratio");
    assert!((last_f64(d.path().join("trace.csv"), 5) - 1.0).abs() < 0.02);
}

#[test]
fn trace_check_odd_profile_uses_decay_fit() {
    let d = ok("trace-check", "trace-check-odd.json");
    let s = read_json(d.path().join("summary.json"));
    assert_eq!(s["mode"], "decay-fit");
    assert!(s["lhs_decay"].is_object());
}

#[test]
fn weyl_count_surrogate_final_ratio() {
    let d = ok("weyl-count", "weyl-count.json");
    let ratio = last_f64(d.path().join("weyl.csv"), 4);
    assert!((0.95..=1.05).contains(&ratio), "{ratio}");
}

#[test]
fn weyl_count_operator_reports_both_estimators() {
    let d = ok("weyl-count", "weyl-count-cos.json");
    let s = read_json(d.path().join("summary.json"));
    assert_eq!(s["estimators_agree_3_sigma"], true);
    assert_eq!(s["monte_carlo_measure"]["method"], "monte-carlo");
}

#[test]
fn gamma_decay_fills_lattice() {
    let d = ok("gamma-decay", "gamma-decay.json");
    assert_eq!(rows(d.path().join("gamma.csv")).len(), 8);
}

#[test]
fn propagate_tracks_classical_flow() {
    let d = ok("propagate", "propagate.json");
    let s = read_json(d.path().join("summary.json"));
    assert!(s["max_deviation_over_sqrt_hbar"].as_f64().unwrap() <= 5.0);
}

#[test]
fn bs_check_circle() {
    let d = ok("bs-check", "bs-check.json");
    assert_eq!(read_json(d.path().join("summary.json"))["condition_holds"], true);
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("bs-check", "malformed.json", dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn schema_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("bs-check", "bad-field.json", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra"));
}

#[test]
fn guard_refusal_exits_3_with_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("spectrum", "guard.json", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spectral-resolution"));
}

#[test]
fn same_seed_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run("weyl-count", "weyl-count-cos.json", d.path(), &["--seed", "11", "--threads", "1"]);
        assert!(o.status.success());
    }
    for f in ["weyl.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
    assert_eq!(read_json(a.path().join("manifest.json"))["seed"], 11);
}
