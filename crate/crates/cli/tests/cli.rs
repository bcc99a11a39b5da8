use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bpb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpb"))
        .args(args)
        .output()
        .expect("spawn bpb")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Columns 0.9 and 0.1·e^{0.3i} into the complex line, f0 = (1, 1).
fn write_gated_instance(p: &Path) {
    let z = (0.1 * 0.3f64.cos(), 0.1 * 0.3f64.sin());
    let text = format!(
        r#"{{"n":2,"space":{{"type":"lp","p":2,"dim":1}},
"operator":{{"columns":[[[0.9,0]],[[{},{}]]],"range":{{"type":"lp","p":2,"dim":1}}}},
"f0":[[1,0],[1,0]],"epsilon":0.9,"mode":"custom"}}"#,
        z.0, z.1
    );
    fs::write(p, text).unwrap();
}

#[test]
fn gen_correct_verify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let cert = dir.path().join("cert.json");
    let out = bpb(&[
        "gen",
        "--n",
        "3",
        "--space",
        "lp:2:2",
        "--seed",
        "9",
        "--epsilon",
        "0.6",
        "--out",
        path(&inst),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = bpb(&["correct", path(&inst), "--out", path(&cert)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = bpb(&["verify", path(&cert), "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));

    // Break one entry by hand: verification now fails with exit code 1.
    let mut value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    value["entries"][0]["lhs"] = serde_json::json!(5.0);
    fs::write(&cert, value.to_string()).unwrap();
    let out = bpb(&["verify", path(&cert)]);
    assert_eq!(out.status.code(), Some(1));
    let out = bpb(&["verify", path(&cert), "--tol", "10"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn experiment_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["csv", "json"] {
        let a = dir.path().join(format!("a.{format}"));
        let b = dir.path().join(format!("b.{format}"));
        for (target, threads) in [(&a, "1"), (&b, "3")] {
            let out = Command::new(env!("CARGO_BIN_EXE_bpb"))
                .env("BPB_THREADS", threads)
                .args([
                    "experiment",
                    "--trials",
                    "4",
                    "--seed",
                    "31",
                    "--spaces",
                    "c,lp:3:2",
                    "--epsilons",
                    "0.3,0.9",
                    "--mode",
                    "perturb",
                    "--format",
                    format,
                    "--out",
                    path(target),
                ])
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
    let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 2);
}

#[test]
fn hypothesis_gate_and_relaxed_mode() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("gated.json");
    let cert = dir.path().join("cert.json");
    write_gated_instance(&inst);
    let out = bpb(&["correct", path(&inst), "--out", path(&cert)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis not met"));

    // Relaxed mode completes; hypothesis-dependent entries fail and are flagged.
    let out = bpb(&[
        "correct",
        path(&inst),
        "--relaxed-eta",
        "0.01",
        "--out",
        path(&cert),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(value["meta"]["mode"], "relaxed");
    let entries = value["entries"].as_array().unwrap();
    assert!(entries
        .iter()
        .filter(|e| e["holds"] == false)
        .all(|e| e["guaranteed"] == false));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"n": 1, "space": {"type": "hardy", "p": 2, "dim": 1}}"#,
    )
    .unwrap();
    let out = bpb(&["norm", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`type`"));

    assert_eq!(bpb(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        bpb(&["delta", "--space", "lp:0.5:2", "--eps", "0.3"])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(bpb(&["verify", path(&missing)]).status.code(), Some(2));
}

#[test]
fn delta_reports_profiles() {
    let out = bpb(&["delta", "--space", "c", "--eps", "0.3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["delta"], 0.3);
    let out = bpb(&[
        "delta",
        "--space",
        "lp:3:2",
        "--eps",
        "0.3",
        "--estimator",
        "analytic:l2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lemma_suites_run() {
    let out = bpb(&[
        "lemmas",
        "--samples",
        "500",
        "--triples",
        "10",
        "--seed",
        "4",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 exceptions"));
}
