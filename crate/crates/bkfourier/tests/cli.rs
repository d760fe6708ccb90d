//! Exit-code and output contract of the `bkfourier` binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bkfourier"))
}

#[test]
fn green_run_exits_zero() {
    let out = bin()
        .args(["--groups", "sl2", "--q", "3", "--checks", "involutivity"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] sl2/stack-involutivity q=3"));
    assert!(text.contains("0 failed"));
}

#[test]
fn parity_mismatch_exits_two() {
    let out = bin()
        .args(["--groups", "gl2-char2", "--q", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{:?}", out);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("config error"), "{}", err);
}

#[test]
fn unknown_group_exits_two() {
    let out = bin().args(["--groups", "so5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{:?}", out);
}

#[test]
fn json_report_parses() {
    let out = bin()
        .args([
            "--groups",
            "torus",
            "--q",
            "3",
            "--checks",
            "pushforward",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["failed"], 0);
    // Three groups, standard and sigma tables each.
    assert_eq!(v["records"].as_array().unwrap().len(), 6);
}

#[test]
fn matrix_cap_env_overrides_flag() {
    let out = bin()
        .args(["--groups", "sl2", "--q", "3", "--checks", "involutivity"])
        .env("BKFOURIER_MATRIX_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{:?}", out);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("exceed the matrix cap 10"), "{}", err);
}

#[test]
fn export_tables_writes_csv() {
    let dir = std::env::temp_dir().join("bkfourier-export-test");
    let _ = std::fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "--groups",
            "sl2",
            "--q",
            "3",
            "--checks",
            "kernels",
            "--export-tables",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let csv = std::fs::read_to_string(dir.join("sl2_q3_kernel.csv")).unwrap();
    assert!(csv.starts_with("\"\",\"(0,0,0,0;0;0)\""));
    let _ = std::fs::remove_dir_all(&dir);
}
