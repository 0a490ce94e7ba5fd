use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_edsbisim")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let (code, out, _) = run(&a);
    (code, serde_json::from_str(&out).unwrap())
}

#[test]
fn check_eds_search_holds() {
    let (code, out, _) = run(&["check-eds", &fixture("fig1a.ma"), "s0", "t0"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("holds (bound 16)"));
}

#[test]
fn check_eds_named_relation() {
    let (code, v) = json(&["check-eds", &fixture("fig1a.ma"), "--relation", "B"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["holds"], true);
    assert_eq!(v["verdict"]["bound"], 16);
}

#[test]
fn check_timed_distinguishes_first_pair() {
    let (code, out, _) = run(&["check-timed", &fixture("sec4_ctrex1.tlts"), "p", "q"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("does not hold"));
}

#[test]
fn check_eds_tlts_second_pair_not_related() {
    let (code, _, _) = run(&["check-eds-tlts", &fixture("sec4_ctrex2.tlts"), "p", "q"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["check-timed", &fixture("sec4_ctrex2.tlts"), "p", "q"]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["check-eds-tlts", &fixture("sec4_ctrex1.tlts"), "p", "q"]);
    assert_eq!(code, 0);
}

#[test]
fn congruence_failure_without_selfloops() {
    let f = fixture("fig4.ma");
    let (code, _, _) = run(&["--no-chi0-selfloops", "check-eds", &f, "s0", "d"]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["--no-chi0-selfloops", "check-eds", &f, "AK@(s0,c0)", "BK@(d,c0)"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["check-eds", &f, "s0", "e0"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["check-eds", &f, "s0", "d"]);
    assert_eq!(code, 1);
}

#[test]
fn chi_view_selfloop_switch() {
    let f = fixture("fig4.ma");
    let (_, on, _) = run(&["chi-view", &f, "A"]);
    let (_, off, _) = run(&["chi-view", "--no-chi0-selfloops", &f, "A"]);
    assert!(on.contains("A@s1 -chi(0)-> {A@s1: 1}"), "{on}");
    assert!(!off.contains("A@s1 -chi(0)"), "{off}");
}

#[test]
fn failing_relation_reports_witness() {
    let (code, v) = json(&["check-eds", &fixture("fig4.ma"), "--relation-file", concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/fig4_ad.rel")]);
    assert_eq!(code, 1);
    assert_eq!(v["holds"], false);
    assert_eq!(v["verdict"]["failure"]["condition"], 3);
}

#[test]
fn validation_errors_exit_two() {
    let dir = std::env::temp_dir().join(format!("edsbisim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let empty = dir.join("empty.ma");
    std::fs::write(&empty, "").unwrap();
    let (code, _, err) = run(&["validate", empty.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("empty"), "{err}");

    let tau = dir.join("tau.ma");
    std::fs::write(&tau, "ma A { state a init; }\nma B { state b init; }\nsystem S = A ||{tau} B;\n").unwrap();
    let (code, _, err) = run(&["validate", tau.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("τ not permitted in synchronization set"), "{err}");

    let bad = dir.join("bad.ma");
    std::fs::write(&bad, "ma A {\n  state a init;\n  trans a -x-> { a: 1/2 };\n}\n").unwrap();
    let (code, _, err) = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("invalid MA `A`"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["check-eds"]).0, 2);
    assert_eq!(run(&["check-eds", &fixture("fig1a.ma"), "s0"]).0, 2);
    assert_eq!(run(&["check-eds", &fixture("fig1a.ma"), "s0", "nosuch"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn validate_and_compose() {
    let (code, v) = json(&["validate", &fixture("fig3.ma")]);
    assert_eq!(code, 0);
    assert_eq!(v["systems"], serde_json::json!(["C", "D", "CM", "DM"]));
    let (code, out, _) = run(&["compose", &fixture("fig3.ma"), "C"]);
    assert_eq!(code, 0);
    assert!(out.contains("(s0,w0) -a-> {(s0,w1): 1}"), "{out}");
    assert!(out.contains("(s0,w0) -rate 4-> (s1,w0)"), "{out}");
}

#[test]
fn check_strong_pairs() {
    let f = fixture("fig3.ma");
    assert_eq!(run(&["check-strong", &f, "S@s1", "T@t2"]).0, 0);
    assert_eq!(run(&["check-strong", &f, "S@s0", "T@t0"]).0, 1);
}

#[test]
fn search_eds_json_lists_relation() {
    let (code, v) = json(&["search-eds", &fixture("fig2.ma"), "s0", "s'0"]);
    assert_eq!(code, 0);
    assert!(v["relation"].as_array().unwrap().len() >= 2);
}

#[test]
fn fixtures_command_green() {
    let (code, out, _) = run(&["fixtures"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));
    let (_, again, _) = run(&["fixtures"]);
    assert_eq!(out, again);
}
