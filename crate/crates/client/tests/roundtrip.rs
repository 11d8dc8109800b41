use std::net::SocketAddr;
use std::sync::mpsc;

use sslab_client::{Client, ClientError};
use sslab_experiments::{execute, GameRef, Op};

fn start() -> String {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(sslab_service::serve(SocketAddr::from(([127, 0, 0, 1], 0)), |a| tx.send(a).unwrap())).unwrap();
    });
    format!("http://{}/", rx.recv().unwrap())
}

#[test]
fn remote_results_match_local_ones() {
    let client = Client::new(&start()).unwrap();
    assert_eq!(client.health().unwrap()["status"], "ok");
    assert_eq!(client.corpus().unwrap().as_array().unwrap().len(), 13);

    let op = Op::NormalForm { game: GameRef::Named("fig5-left".into()), partitions: true };
    assert_eq!(client.execute(&op).unwrap(), execute(&op).unwrap());

    let op = Op::Replicate { id: Some("claim3".into()), spec: None };
    let remote = client.execute(&op).unwrap();
    assert_eq!(remote["pass"], true);
    assert_eq!(remote["checks"][0]["criteria"], execute(&op).unwrap()["checks"][0]["criteria"]);
}

#[test]
fn server_errors_carry_the_message() {
    let client = Client::new(&start()).unwrap();
    let op = Op::Replicate { id: Some("nothing".into()), spec: None };
    match client.execute(&op) {
        Err(ClientError::Server { status, message }) => {
            assert_eq!(status, 404);
            assert!(message.contains("nothing"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unreachable_server_is_an_http_error() {
    let client = Client::new("http://127.0.0.1:9").unwrap();
    assert!(matches!(client.health(), Err(ClientError::Http(_))));
}
