//! End-to-end exit-code and determinism contracts.

use std::io::Write;
use std::process::{Command, Stdio};

fn ghr() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ghr"));
    c.env_remove("GHR_BACKEND");
    c
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("ghr-cli-test-{name}-{}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn divergent_spectrum_exits_two_and_reports() {
    let path = write_temp(
        "twolevel.json",
        r#"[{"eigenvalue": 1, "probability": 0.5}, {"eigenvalue": -1, "probability": 0.5}]"#,
    );
    let out = ghr()
        .args(["bound", "--spectrum-file", path.to_str().unwrap(), "--kmax", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("divergent"));
    assert!(stdout.contains("bound: infinite"));
}

#[test]
fn invalid_moments_file_exits_one() {
    let path = write_temp("bad.json", r#"{"mu": [1, 0, 1, 0, 0.5]}"#);
    let out = ghr()
        .args(["moments", "--moments-file", path.to_str().unwrap(), "--order", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("invalid moment sequence"), "{stderr}");
}

#[test]
fn moments_goldens_exact_backend() {
    let out = ghr()
        .args([
            "moments", "--dist", "exponential", "--rate", "1", "--order", "8", "--backend",
            "exact", "--output", "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for line in ["2,1,1", "4,9,6", "6,265,120", "8,14833,5040"] {
        assert!(stdout.contains(line), "missing '{line}' in:\n{stdout}");
    }
}

#[test]
fn bound_accepts_moments_on_stdin() {
    let mut child = ghr()
        .args(["bound", "--moments-file", "-", "--kmax", "3", "--output", "csv"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"mu": [1, 0, 1, 2, 9, 44, 265]}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("3,") && l.contains("regular")));
}

#[test]
fn bound_reduces_kmax_with_warning_when_moments_short() {
    let path = write_temp("short.json", r#"{"mu": [1, 0, 1, 2, 9, 44, 265]}"#);
    let out = ghr()
        .args(["bound", "--moments-file", path.to_str().unwrap(), "--kmax", "7"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("k_max = 3"), "{stderr}");
}

#[test]
fn sweep_is_byte_deterministic_and_matches_closed_form() {
    let run = || {
        let out = ghr()
            .args(["sweep", "--dist", "gamma", "--shape-range", "0.5:10:0.5", "--kmax", "5"])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "identical config must give byte-identical CSV");

    let text = String::from_utf8(a).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 20);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let term3: f64 = cols[2].parse().unwrap();
        let closed: f64 = cols[5].parse().unwrap();
        assert!((term3 - closed).abs() <= 1e-12 * closed.max(1e-30));
    }
}

#[test]
fn sweep_empty_range_exits_one() {
    let out = ghr()
        .args(["sweep", "--dist", "gamma", "--shape-range", "5:1", "--kmax", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_spectrum_degenerate_is_consistent() {
    let path = write_temp(
        "twolevel-verify.json",
        r#"[{"eigenvalue": 1, "probability": 0.5}, {"eigenvalue": -1, "probability": 0.5}]"#,
    );
    let out = ghr()
        .args(["verify", "--spectrum-file", path.to_str().unwrap(), "--kmax", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("frame exhaustion"), "{stdout}");
    assert!(stdout.contains("result: PASS"));
}

#[test]
fn verify_deep_kmax_reports_exhaustion_and_passes() {
    let out = ghr()
        .args(["verify", "--dims", "4", "--seeds", "5", "--kmax", "9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("frame exhaustion: 5 model(s)"), "{stdout}");
}

#[test]
fn env_var_selects_backend() {
    let out = ghr()
        .env("GHR_BACKEND", "exact")
        .args(["bound", "--dist", "exponential", "--rate", "1", "--kmax", "3", "--output", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("9/46"), "exact rationals expected:\n{stdout}");

    let out = ghr()
        .env("GHR_BACKEND", "banana")
        .args(["bound", "--dist", "exponential", "--kmax", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn even_kmax_rejected() {
    let out = ghr()
        .args(["bound", "--dist", "gaussian", "--variance", "1", "--kmax", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exact_backend_rejects_float_json() {
    let path = write_temp("floaty.json", r#"{"mu": [1, 0, 0.1]}"#);
    let out = ghr()
        .args([
            "moments", "--moments-file", path.to_str().unwrap(), "--order", "2", "--backend",
            "exact",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("rational"), "{stderr}");
}

#[test]
fn exact_moments_file_roundtrips_rationals() {
    let path = write_temp(
        "exact.json",
        r#"{"order": 6, "mu": [], "exact": [["1","1"],["0","1"],["1","1"],["0","1"],["1","1"],["0","1"],["1","1"]]}"#,
    );
    let out = ghr()
        .args([
            "bound", "--moments-file", path.to_str().unwrap(), "--kmax", "3", "--backend",
            "exact",
        ])
        .output()
        .unwrap();
    // Symmetric two-point moments: divergent, exit 2.
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("-2"), "exact U_3 = -2 expected:\n{stdout}");
}
