//! The `ddshap` binary on the bundled fixtures.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    path.to_string_lossy().into_owned()
}

fn ddshap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddshap")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn scratch(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("ddshap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn running_example_scores_and_count() {
    let (nnf, side) = (fixture("running_example.nnf"), fixture("running_example.json"));
    let out = stdout(&ddshap(&["score", "--circuit", &nnf, "--sidecar", &side]));
    assert_eq!(out, "fg\t23/64\ndtr\t-9/64\nnf\t15/64\nna\t15/64\n");
    let one = stdout(&ddshap(&["score", "--circuit", &nnf, "--sidecar", &side, "--feature", "nf"]));
    assert_eq!(one, "nf\t15/64\n");
    assert_eq!(stdout(&ddshap(&["count", "--circuit", &nnf])), "5\n");
    assert_eq!(stdout(&ddshap(&["count", "--circuit", &nnf, "--sidecar", &side])), "5\n");
}

#[test]
fn rank_is_descending_and_stable() {
    let args = ["rank", "--circuit", &fixture("running_example.nnf"), "--sidecar", &fixture("running_example.json")];
    let out = stdout(&ddshap(&args));
    let names: Vec<&str> = out.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names, ["fg", "nf", "na", "dtr"]);
}

#[test]
fn algorithms_agree_on_every_fixture() {
    let loan = scratch("loan.nnf");
    std::fs::write(&loan, stdout(&ddshap(&["encode-dt", "--tree", &fixture("loan_tree.json")]))).unwrap();
    let cases = [
        (fixture("running_example.nnf"), fixture("running_example.json")),
        (fixture("running_example.nnf"), fixture("running_example_skewed.json")),
        (loan, fixture("loan.json")),
    ];
    for (nnf, side) in &cases {
        let runs: Vec<String> = ["dp", "smooth", "brute"]
            .iter()
            .map(|a| stdout(&ddshap(&["score", "--circuit", nnf, "--sidecar", side, "--algorithm", a])))
            .collect();
        assert_eq!(runs[0], runs[1], "{side}");
        assert_eq!(runs[0], runs[2], "{side}");
        // Exact fractions only.
        for line in runs[0].lines() {
            let value = line.split('\t').nth(1).unwrap();
            assert!(value.chars().all(|c| c.is_ascii_digit() || c == '/' || c == '-'), "{line}");
        }
    }
}

#[test]
fn encoders_write_a_usable_sidecar() {
    let (nnf, side) = (scratch("shared.nnf"), scratch("shared.json"));
    let text = stdout(&ddshap(&["encode-fbdd", "--fbdd", &fixture("shared.fbdd.json"), "--sidecar-out", &side]));
    std::fs::write(&nnf, text).unwrap();
    assert!(stdout(&ddshap(&["verify", "--circuit", &nnf, "--sidecar", &side])).contains("deterministic\tyes"));
    // x1 ? (x3 ∨ x4) : (x2 ∧ x4) has 6 + 2 models.
    assert_eq!(stdout(&ddshap(&["count", "--circuit", &nnf, "--sidecar", &side])), "8\n");
}

#[test]
fn closed_form_values() {
    assert_eq!(stdout(&ddshap(&["closed-form", "gnt", "--n", "8", "--t", "3"])), "97/6144\n");
    assert_eq!(stdout(&ddshap(&["closed-form", "gnt", "--n", "8", "--t", "3", "--exact"])), "101/6144\n");
}

#[test]
fn generators() {
    let gnt = stdout(&ddshap(&["gen", "gnt", "--n", "5", "--t", "2"]));
    assert!(gnt.starts_with("p nodes 5\n"));
    assert_eq!(gnt.lines().filter(|l| !l.starts_with('p') && !l.starts_with('c')).count(), 3);

    let graph = fixture("four_cycle.graph");
    let big = stdout(&ddshap(&["gen", "amplify", "--graph", &graph, "--r", "2"]));
    // 4 inner edges plus 4 · 2² between blown-up neighbours.
    assert!(big.starts_with("p nodes 8\n"));
    assert_eq!(big.lines().filter(|l| !l.starts_with('p') && !l.starts_with('c')).count(), 20);

    let tri = fixture("triangle_plus_two.graph");
    let dnf = stdout(&ddshap(&["gen", "theta", "--graph", &tri]));
    assert!(dnf.starts_with("p dnf 5 7\n"));
    let nnf = scratch("theta.nnf");
    std::fs::write(&nnf, stdout(&ddshap(&["gen", "theta", "--graph", &tri, "--format", "nnf"]))).unwrap();
    // θ is not deterministic.
    let out = ddshap(&["verify", "--circuit", &nnf]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "validation");
}

#[test]
fn gnt_needs_two_isolated_nodes() {
    let out = ddshap(&["gen", "theta", "--graph", &fixture("four_cycle.graph")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(ddshap(&["gen", "theta", "--graph", &fixture("four_cycle.graph"), "--unchecked"]).status.success());
}

#[test]
fn errors_are_json_with_exit_codes() {
    let out = ddshap(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "usage");

    let out = ddshap(&["count", "--circuit", "/nonexistent/x.nnf"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "usage");

    let bad = scratch("bad.nnf");
    std::fs::write(&bad, "nnf 2 1 1\nL 1\nA 1 5\n").unwrap();
    let out = ddshap(&["count", "--circuit", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    assert_eq!((err["error"].as_str(), err["line"].as_u64()), (Some("parse"), Some(3)));

    let overlap = scratch("overlap.nnf");
    std::fs::write(&overlap, "nnf 3 2 2\nL 1\nL 2\nO 0 2 0 1\n").unwrap();
    for cmd in ["count", "verify"] {
        let out = ddshap(&[cmd, "--circuit", &overlap]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert!(error_json(&out)["message"].as_str().unwrap().contains("x1=1,x2=1"));
    }
    // Enumeration needs no determinism.
    let side = scratch("overlap.json");
    std::fs::write(&side, r#"{"features": ["x1", "x2"], "entity": {"x1": 1, "x2": 1}, "uniform": true}"#).unwrap();
    let brute = stdout(&ddshap(&["score", "--circuit", &overlap, "--sidecar", &side, "--algorithm", "brute"]));
    assert_eq!(brute, "x1\t1/8\nx2\t1/8\n");

    let out = ddshap(&["score", "--circuit", &overlap, "--sidecar", &side, "--feature", "zz", "--algorithm", "brute"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_refuses_to_guess_beyond_the_bound() {
    let nnf = fixture("running_example.nnf");
    let out = ddshap(&["verify", "--circuit", &nnf, "--max-vars", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_json(&out)["message"].as_str().unwrap().contains("not checked"));
}
