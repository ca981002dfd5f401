use std::path::PathBuf;
use std::process::Command;

use contraction::cli::run;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("instances").join(format!("{name}.json"))
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("contraction").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn validate_exit_codes() {
    let e2 = fixture("e2");
    let (code, out, _) = call(&["validate", e2.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("valid"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version":1,"p":2,"d":1,"blocks":[{"i":1,"j":0,"entries":[[1]]}]}"#).unwrap();
    let (code, out, _) = call(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("r = -1"), "{out}");
    let (code, _, err) = call(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(call(&["frobnicate"]).0, 4);
    assert_eq!(call(&[]).0, 4);
    assert_eq!(call(&["--help"]).0, 0);
    assert_eq!(call(&["validate", "/definitely/missing.json"]).0, 4);
    assert_eq!(call(&["gen", "--family", "bogus", "--p", "3", "--d", "2"]).0, 4);
    assert_eq!(call(&["gen", "--family", "random", "--p", "4", "--d", "2"]).0, 4);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("range.json");
    std::fs::write(&bad, r#"{"version":1,"p":3,"d":1,"blocks":[{"i":0,"j":0,"entries":[[7]]}]}"#).unwrap();
    let (code, _, err) = call(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(err.contains("blocks[0].entries[0][0]"), "{err}");
}

#[test]
fn budget_failure_exits_3() {
    let f = fixture("toeplitz-index3");
    let (code, _, err) = call(&["solve", f.to_str().unwrap(), "--budget", "1"]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn gen_then_validate_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let p = path.to_str().unwrap();
    let args = ["gen", "--family", "toeplitz", "--p", "3", "--d", "2", "--seed", "7", "--out", p];
    assert_eq!(call(&args).0, 0);
    let first = std::fs::read_to_string(&path).unwrap();
    assert_eq!(call(&args).0, 0);
    assert_eq!(first, std::fs::read_to_string(&path).unwrap());
    assert_eq!(call(&["validate", p]).0, 0);
    let (code, out, _) = call(&["solve", p]);
    assert_eq!(code, 0);
    let res = contraction::format::ResultFile::parse(&out, "stdout").unwrap();
    assert!(res.residuals.iter().all(|r| r.pass));
}

#[test]
fn solve_is_deterministic_and_round_trips() {
    let f = fixture("e2");
    let f = f.to_str().unwrap();
    let (code, a, _) = call(&["solve", f, "--prec", "16"]);
    assert_eq!(code, 0);
    let (_, b, _) = call(&["solve", f, "--prec", "16"]);
    assert_eq!(a, b);
    let parsed = contraction::format::ResultFile::parse(&a, "stdout").unwrap();
    assert_eq!(parsed.to_json(), a);
    assert!(parsed.exact);
    assert!(parsed.oracle.agree);
}

#[test]
fn other_subcommands() {
    let f = fixture("e2");
    let f = f.to_str().unwrap();
    let (code, out, _) = call(&["nilpotency", f]);
    assert_eq!(code, 0);
    assert!(out.starts_with("class <= 2 at precision 16"), "{out}");
    let (code, out, _) = call(&["blocks", f, "--f", "1 + t"]);
    assert_eq!(code, 0);
    assert!(out.contains("block (1, 0)") && out.contains("block (2, 1)"), "{out}");
    let (code, out, _) = call(&["oracle", f, "--window", "0", "4"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("[1, 0]*t^0"), "{out}");
    let trivial = fixture("trivial-p3-d1");
    assert_eq!(call(&["oracle", trivial.to_str().unwrap(), "--window", "2", "2"]).0, 4);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_contraction");
    let status = Command::new(bin).args(["validate", fixture("e2").to_str().unwrap()]).output().unwrap().status;
    assert_eq!(status.code(), Some(0));
    let status = Command::new(bin).arg("nonsense").output().unwrap().status;
    assert_eq!(status.code(), Some(4));
}
