use std::net::SocketAddr;
use std::sync::mpsc;

use serde_json::{json, Value};

fn start() -> String {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(sslab_service::serve(SocketAddr::from(([127, 0, 0, 1], 0)), |a| tx.send(a).unwrap())).unwrap();
    });
    format!("http://{}", rx.recv().unwrap())
}

#[test]
fn routes_answer() {
    let base = start();
    let http = reqwest::blocking::Client::new();

    let health: Value = http.get(format!("{base}/v1/health")).send().unwrap().json().unwrap();
    assert_eq!(health["status"], "ok");

    let corpus: Value = http.get(format!("{base}/v1/corpus")).send().unwrap().json().unwrap();
    assert_eq!(corpus.as_array().unwrap().len(), 13);

    let r = http.post(format!("{base}/v1/ops")).json(&json!({ "op": "eliminate", "game": "fig1", "generator": { "kind": "sw" } })).send().unwrap();
    assert_eq!(r.status(), 200);
    let v: Value = r.json().unwrap();
    assert_eq!(v["trace"]["survivors"], json!([["Out", "In2"], ["L", "R"]]));

    let r = http.post(format!("{base}/v1/ops")).json(&json!({ "op": "validate", "game": "nowhere" })).send().unwrap();
    assert_eq!(r.status(), 404);
    let v: Value = r.json().unwrap();
    assert!(v["error"].as_str().unwrap().contains("nowhere"));

    let r = http.post(format!("{base}/v1/ops")).json(&json!({ "op": "juggle" })).send().unwrap();
    assert_eq!(r.status(), 400);

    let r = http
        .post(format!("{base}/v1/ops"))
        .json(&json!({ "op": "policy", "game": "fig1", "role": 1, "delta": 1.5, "gamma": 0.5 }))
        .send()
        .unwrap();
    assert_eq!(r.status(), 422);
}
