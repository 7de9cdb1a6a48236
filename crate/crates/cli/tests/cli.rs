use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn loebench(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_loebench"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SCRIPT: &str = "what is the error\nwhy are you not able to reach the cube\n:move 1 2 2\n:continue\n";

#[test]
fn scripted_interact_resolves_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.jsonl");
    let o = loebench(
        &[
            "interact",
            "--variant",
            "AD2",
            "--scenario",
            "out_of_range",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ],
        SCRIPT,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains(r#""level":"High""#));
    assert!(text.contains("SessionResolved"));

    let o = loebench(&["replay", "--transcript", out.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(0));

    let corrupted = dir.path().join("bad.jsonl");
    std::fs::write(&corrupted, text.replacen("\"High\"", "\"Medium2\"", 1)).unwrap();
    let o = loebench(&["replay", "--transcript", corrupted.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("first divergence at record"));
}

#[test]
fn interact_is_deterministic() {
    let args = [
        "interact",
        "--variant",
        "AD1",
        "--scenario",
        "both_random_order",
        "--seed",
        "12",
    ];
    let script = "what?\nwhy?\n:state\n:quit\n";
    assert_eq!(loebench(&args, script).stdout, loebench(&args, script).stdout);
}

#[test]
fn quit_abandons_with_unresolved_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.jsonl");
    let o = loebench(&["interact", "--out", out.to_str().unwrap()], ":quit\n");
    assert_eq!(o.status.code(), Some(3));
    assert!(std::fs::read_to_string(&out).unwrap().contains("SessionAbandoned"));
}

#[test]
fn unknown_command_prints_help_and_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let base = ["interact", "--scenario", "incorrect_item", "--seed", "2", "--out"];
    let o = loebench(&[&base[..], &[a.to_str().unwrap()]].concat(), ":dance\n:quit\n");
    assert!(stdout(&o).contains("unknown command `:dance`"));
    assert!(stdout(&o).contains(":continue"));
    loebench(&[&base[..], &[b.to_str().unwrap()]].concat(), ":quit\n");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn batch_rows_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let tdir = dir.path().join("transcripts");
    let o = loebench(
        &[
            "batch",
            "--policy",
            "WhatWhyRepairUser",
            "--variant",
            "AD1",
            "--variant",
            "AD2",
            "--scenario",
            "both_random_order",
            "--n",
            "10",
            "--out",
            out.to_str().unwrap(),
            "--transcripts",
            tdir.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r["resolution_rate"], 1.0);
    }
    let files: Vec<_> = std::fs::read_dir(&tdir).unwrap().collect();
    assert_eq!(files.len(), 20);
    let first = files[0].as_ref().unwrap().path();
    let o = loebench(&["replay", "--transcript", first.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(0));

    let o = loebench(
        &[
            "batch",
            "--policy",
            "ContinueOnlyUser",
            "--n",
            "2",
            "--out",
            out.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["resolution_rate"] == 0.0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        loebench(&["batch", "--policy", "NoSuchUser"], "").status.code(),
        Some(2)
    );
    assert_eq!(loebench(&["interact", "--variant", "AD3"], "").status.code(), Some(2));
    assert_eq!(loebench(&["interact", "--bogus"], "").status.code(), Some(2));
    assert_eq!(loebench(&[], "").status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one() {
    let o = loebench(&["interact", "--scenario", "/no/such/scenario.toml"], "");
    assert_eq!(o.status.code(), Some(1));
    let o = loebench(&["replay", "--transcript", "/no/such/file.jsonl"], "");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn serve_round_trip() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let addr = format!("127.0.0.1:{port}");
    let mut child = Command::new(env!("CARGO_BIN_EXE_loebench"))
        .args(["serve"])
        .env("LOEBENCH_ADDR", &addr)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let result = rt.block_on(async {
        let client = reqwest::Client::new();
        let base = format!("http://{addr}");
        let mut handle = None;
        for _ in 0..100 {
            let body = serde_json::json!({"variant": "AD2", "scenario": "out_of_range", "seed": 7});
            if let Ok(r) = client.post(format!("{base}/sessions")).json(&body).send().await {
                handle = Some(r.json::<Value>().await.unwrap());
                break;
            }
            tokio::time::sleep(std::time::Duration::from_millis(50)).await;
        }
        let id = handle.expect("server did not come up")["session_id"]
            .as_str()
            .unwrap()
            .to_owned();
        let v: Value = client
            .post(format!("{base}/sessions/{id}/advance"))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        v["events"][1]["payload"]["text"].as_str().unwrap().to_owned()
    });
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(result, "Error occurred");
}
