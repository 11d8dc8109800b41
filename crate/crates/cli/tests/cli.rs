use std::io::{BufRead, BufReader};
use std::process::{Command, Output, Stdio};

fn sslab(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sslab"));
    c.args(args).env_remove("SSLAB_OUT_DIR");
    c
}

fn out(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn corpus_and_validation() {
    let o = sslab(&["corpus", "list"]).output().unwrap();
    assert!(o.status.success());
    assert_eq!(out(&o).lines().count(), 13);
    assert!(!out(&o).contains("FAILED"));

    let o = sslab(&["validate", "fig6"]).output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], true);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"players\": 2, ").unwrap();
    let o = sslab(&["validate", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));
}

#[test]
fn custom_elimination_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let stages = dir.path().join("stages.json");
    std::fs::write(&stages, r#"[[["In1"], []]]"#).unwrap();
    let o = sslab(&["eliminate", "fig1", "--stages", stages.to_str().unwrap()]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["generator"], "custom");
    assert_eq!(v["verified"], true);
}

#[test]
fn replicate_writes_to_the_environment_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = sslab(&["replicate", "claim3"]).env("SSLAB_OUT_DIR", dir.path()).output().unwrap();
    assert!(o.status.success(), "{}", out(&o));
    assert!(out(&o).contains("PASS claim3"));
    assert!(dir.path().join("claim3.json").exists());
    assert!(dir.path().join("claim3.md").exists());

    let spec = dir.path().join("wrong.json");
    std::fs::write(
        &spec,
        r#"{"id":"wrong","title":"t","budget_seconds":5,"checks":[{"name":"bi","kind":"backward_induction","game":"fig5-left","expect":["Drop","Pass","Pass"]}]}"#,
    )
    .unwrap();
    let elsewhere = dir.path().join("elsewhere");
    let o = sslab(&["replicate", spec.to_str().unwrap(), "--out-dir", elsewhere.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(out(&o).contains("FAIL wrong"));
    assert!(elsewhere.join("wrong.md").exists());

    let o = sslab(&["replicate", "claim99"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn server_mode_matches_local_mode() {
    let mut server = sslab(&["serve", "--addr", "127.0.0.1:0"]).stdout(Stdio::piped()).spawn().unwrap();
    let mut line = String::new();
    BufReader::new(server.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").unwrap().to_string();

    let local = sslab(&["normal-form", "fig8"]).output().unwrap();
    let remote = sslab(&["--server", &url, "normal-form", "fig8"]).output().unwrap();
    assert!(remote.status.success());
    assert_eq!(local.stdout, remote.stdout);

    let dir = tempfile::tempdir().unwrap();
    let o = sslab(&["--server", &url, "replicate", "prop5", "--out-dir", dir.path().to_str().unwrap()]).output().unwrap();
    assert!(o.status.success(), "{}", out(&o));
    assert!(dir.path().join("prop5.json").exists());

    let o = sslab(&["--server", &url, "corpus", "list"]).output().unwrap();
    assert_eq!(out(&o).lines().count(), 13);

    let o = sslab(&["--server", &url, "validate", "nowhere"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("404"));

    server.kill().unwrap();
    let _ = server.wait();
}
