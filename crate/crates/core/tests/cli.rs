use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn flatmu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatmu")).args(args).output().unwrap()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_prints_the_truth_value() {
    let m = scratch(
        "two.json",
        r#"{"states": 2, "edges": [[0, 1]], "valuation": {"p": [1]}}"#,
    );
    let m = m.to_str().unwrap();
    let o = flatmu(&["check", m, "0", "p | ~p"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "true"));
    let o = flatmu(&["check", m, "0", "p"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(2), "false"));
    let o = flatmu(&["check", m, "1", "<B>~p"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "true"));
    assert_eq!(flatmu(&["check", m, "7", "p"]).status.code(), Some(1));
}

#[test]
fn sat_reports_none_for_falsum() {
    let o = flatmu(&["sat", "--max-states", "3", "_|_"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("none"));
    let o = flatmu(&["sat", "--max-states", "2", "<F>p & ~p"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"states\""));
}

#[test]
fn guardify_prints_both_parts() {
    let defs = scratch("defs.json", r#"[{"name": "chi1", "arity": 1, "body": "q1 | <F>x"}]"#);
    let o = flatmu(&["guardify", defs.to_str().unwrap(), "chi1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("gamma1: _|_"), "{out}");
    assert!(out.contains("gamma2: chi1_g"), "{out}");
    assert!(out.contains("equivalence:"), "{out}");
}

#[test]
fn seed_is_rejected() {
    let o = flatmu(&["--seed", "7", "parse", "p"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(flatmu(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(flatmu(&["parse", "p &"]).status.code(), Some(1));
    assert_eq!(flatmu(&["--define", "nonsense", "parse", "p"]).status.code(), Some(1));
}

#[test]
fn build_then_inspect_the_network() {
    let o = flatmu(&["--define", "r:1=q1 | <F>x", "build", "#r(p) & p"]);
    assert_eq!(o.status.code(), Some(0));
    let reports: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let last = reports.as_array().unwrap().last().unwrap();
    assert_eq!(last["verdict"]["kind"], "perfect");
    let net = scratch("net.json", &last["network"].to_string());
    let net = net.to_str().unwrap();
    let o = flatmu(&["net", "validate", net]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "valid"));
    let o = flatmu(&["net", "defects", net]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "[]"));
    assert!(stdout(&flatmu(&["net", "dot", net])).starts_with("digraph"));
    assert_eq!(flatmu(&["net", "timeouts", net]).status.code(), Some(0));
}

#[test]
fn closure_and_atoms_agree_on_size() {
    let o = flatmu(&["closure", "<F>p"]);
    let n = stdout(&o).lines().count();
    let o = flatmu(&["atoms", "<F>p"]);
    for line in stdout(&o).lines() {
        let a: Vec<usize> = serde_json::from_str(line).unwrap();
        assert!(a.iter().all(|&i| i < n));
    }
}
