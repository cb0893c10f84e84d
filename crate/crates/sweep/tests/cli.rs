use std::process::{Command, Output};

fn trilevel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trilevel")).args(args).output().unwrap()
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("run.json");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        r#"{"configuration": "lambda", "detunings": {"d31": 0.3, "d32": -0.2},
            "grid": {"mu13": {"min": 0, "max": 1, "step": 0.5}, "mu23": {"min": 0, "max": 1, "step": 0.5}}}"#,
    );
    let out = trilevel(&["validate", "--config", &path]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn forbidden_coupling_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, r#"{"configuration": "lambda", "couplings": {"mu12": 0.4, "mu13": 1.0}}"#);
    let out = trilevel(&["validate", "--config", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mu12 = 0"));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, r#"{"configuration": "xi", "colour": "blue"}"#);
    let out = trilevel(&["semiclassical", "--config", &path]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_alone_drive_a_run() {
    let out = trilevel(&[
        "semiclassical",
        "--configuration",
        "v",
        "--detuning",
        "d21=0.2",
        "--detuning",
        "d31=0.3",
        "--grid",
        "mu12=0:1:0.5",
        "--mu",
        "mu13=1.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("mu12,mu13,e_c,"));
    assert_eq!(lines.count(), 3);
}
