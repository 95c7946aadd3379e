use std::process::Command;

fn slbench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_slbench"))
        .args(args)
        .env_remove("MODEL_API_KEY")
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(slbench(&["--help"]).status.code(), Some(0));
    assert_eq!(slbench(&["--version"]).status.code(), Some(0));
    assert_eq!(slbench(&[]).status.code(), Some(1));
    assert_eq!(slbench(&["gen", "--spec", "bogus"]).status.code(), Some(1));
    assert_eq!(
        slbench(&["score", "--records", "/nonexistent/x.jsonl"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        slbench(&["run", "--dataset", "x.jsonl"]).status.code(),
        Some(1)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\": \"x\"}\n{\"id\":").unwrap();
    let out = slbench(&["score", "--records", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.jsonl:1:"));
}

#[test]
fn gen_sample_oracle_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("desk.jsonl");
    let data_s = data.to_str().unwrap();
    let out = slbench(&[
        "gen",
        "--spec",
        "standard",
        "--seed",
        "3",
        "--k",
        "2",
        "--sigma",
        "2",
        "--rules",
        "1,2",
        "--count",
        "3",
        "--multiple",
        "1",
        "--out",
        data_s,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 18);
    assert!(text.lines().all(|l| l.contains("\"multiple\":1")));

    let out = slbench(&["oracle-verify", "--dataset", data_s]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).matches("\tok").count(),
        18
    );

    let resampled = dir.path().join("x2.jsonl");
    let out = slbench(&[
        "sample",
        "--dataset",
        data_s,
        "--multiple",
        "2",
        "--repeat",
        "--out",
        resampled.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&resampled).unwrap();
    assert!(text
        .lines()
        .all(|l| l.contains("\"multiple\":2") && l.contains("\"kind\":\"repeated\"")));
}

#[test]
fn eval_accepts_bare_responses() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let data_s = data.to_str().unwrap();
    let out = slbench(&[
        "gen", "--spec", "standard", "--seed", "3", "--k", "2", "--sigma", "5", "--rules", "3",
        "--count", "1", "--out", data_s,
    ]);
    assert!(out.status.success());
    let responses = dir.path().join("r.jsonl");
    std::fs::write(
        &responses,
        "{\"id\": \"isl-k2-s5-n3-00\", \"raw_response\": \"no tags\", \"model\": \"m\"}\n",
    )
    .unwrap();
    let out = slbench(&[
        "eval",
        "--dataset",
        data_s,
        "--responses",
        responses.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["precision"], 0.0);
    assert_eq!(record["compatible"], false);
    assert!(record["parse_error"].is_string());

    std::fs::write(&responses, "{\"id\": \"nope\", \"raw_response\": \"\"}\n").unwrap();
    let out = slbench(&[
        "eval",
        "--dataset",
        data_s,
        "--responses",
        responses.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}
