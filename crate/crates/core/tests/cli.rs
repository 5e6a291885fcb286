use std::path::PathBuf;
use std::process::{Command, Output};

fn morita(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morita"))
        .args(args)
        .env_remove("MORITA_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("morita-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn verify_builtin_instance_passes() {
    let out = morita(&["verify", "functor", "--instance", "scalar-trivial", "--trials", "10", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("isometry_gap") && text.trim_end().ends_with("PASS functor"), "{text}");
}

#[test]
fn tightened_tolerance_fails_with_status_one() {
    let out = morita(&["verify", "cp_lemma", "--trials", "2", "--tol", "cp_induction=0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_with_status_two() {
    assert_eq!(morita(&["verify", "functor", "--tol", "no_such_check=1", "--trials", "1"]).status.code(), Some(2));
    assert_eq!(morita(&["verify", "nonsense"]).status.code(), Some(2));
    let dir = scratch("bad");
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\n  \"kind\": \"functor\",\n  \"seed\": [\n}").unwrap();
    let out = morita(&["verify", "functor", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("broken.json:"), "{err}");
}

#[test]
fn generated_instances_verify_and_reports_replay() {
    let dir = scratch("gen");
    let inst = dir.join("stabilize.json");
    let gen = morita(&["generate", "stabilize", "--seed", "5", "--nmax", "2", "--out", inst.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let again = morita(&["generate", "stabilize", "--seed", "5", "--nmax", "2"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap().trim(), std::fs::read_to_string(&inst).unwrap().trim());

    let report = dir.join("report.json");
    let args = ["verify", "stabilize", "--instance", inst.to_str().unwrap(), "--trials", "2", "--format", "machine"];
    let out = morita(&[&args[..], &["--out", report.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    let machine = String::from_utf8(out.stdout).unwrap();
    assert_eq!(machine.trim(), std::fs::read_to_string(&report).unwrap().trim());

    let replay = morita(&["report", report.to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(0));
    assert!(String::from_utf8(replay.stdout).unwrap().contains("rr_star_minus_p0"));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = scratch("env");
    let out = Command::new(env!("CARGO_BIN_EXE_morita"))
        .args(["generate", "functor", "--seed", "42"])
        .env("MORITA_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("functor-0x2a.json").exists());
}
