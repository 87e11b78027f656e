//! `RemoteProvider` against an in-process HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use errforge::translate::{
    provider_roundtrip, ProviderError, RawHypothesis, RemoteConfig, RemoteProvider, RetryPolicy,
    TranslationProvider,
};
use serde_json::{json, Value};

struct Request {
    headers: Headers,
    body: Value,
}

type Handler = dyn Fn(usize, &Request) -> (u16, String) + Send + Sync;
type Headers = Vec<(String, String)>;

struct MockServer {
    url: String,
    hits: Arc<AtomicUsize>,
    seen_headers: Arc<Mutex<Vec<Headers>>>,
}

fn read_request(reader: &mut BufReader<TcpStream>) -> Option<Request> {
    let mut line = String::new();
    if reader.read_line(&mut line).ok()? == 0 {
        return None;
    }
    let mut headers = Vec::new();
    let mut length = 0;
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        let (name, value) = l.split_once(':')?;
        let (name, value) = (name.trim().to_ascii_lowercase(), value.trim().to_owned());
        if name == "content-length" {
            length = value.parse().ok()?;
        }
        headers.push((name, value));
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    Some(Request {
        headers,
        body: serde_json::from_slice(&body).unwrap_or(Value::Null),
    })
}

fn serve(handler: Arc<Handler>) -> MockServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let seen_headers = Arc::new(Mutex::new(Vec::new()));
    let (h, s) = (hits.clone(), seen_headers.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { return };
            let (handler, hits, seen) = (handler.clone(), h.clone(), s.clone());
            thread::spawn(move || {
                let mut writer = stream.try_clone().unwrap();
                let mut reader = BufReader::new(stream);
                while let Some(req) = read_request(&mut reader) {
                    let n = hits.fetch_add(1, Ordering::SeqCst);
                    seen.lock().unwrap().push(req.headers.clone());
                    let (status, body) = handler(n, &req);
                    let head = format!(
                        "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n",
                        body.len()
                    );
                    if writer
                        .write_all(head.as_bytes())
                        .and_then(|_| writer.write_all(body.as_bytes()))
                        .is_err()
                    {
                        return;
                    }
                }
            });
        }
    });
    MockServer {
        url,
        hits,
        seen_headers,
    }
}

/// Answers every text with two hypotheses that embed the text itself, so a
/// positional mix-up is visible in the output.
fn echo(_: usize, req: &Request) -> (u16, String) {
    let texts = req.body["texts"].as_array().unwrap();
    let results: Vec<Value> = texts
        .iter()
        .map(|t| {
            let t = t.as_str().unwrap();
            json!([{"text": format!("{t} first"), "score": -0.1}, {"text": format!("{t} second"), "score": -1.5}])
        })
        .collect();
    (200, json!({ "results": results }).to_string())
}

fn provider(url: &str) -> RemoteProvider {
    let mut cfg = RemoteConfig::new(url);
    cfg.timeout = Duration::from_secs(5);
    RemoteProvider::new(cfg)
}

fn fast_retry() -> RetryPolicy {
    RetryPolicy {
        attempts: 3,
        base_delay: Duration::from_millis(1),
    }
}

#[test]
fn batch_of_64_stays_positionally_aligned() {
    let server = serve(Arc::new(echo));
    // Per-chunk nonces make every text unique.
    let texts: Vec<String> = (0..64)
        .map(|i| format!("chunk {i} nonce{:x}", i * 7919 + 13))
        .collect();
    let out = provider(&server.url).translate_batch(&texts, 10).unwrap();
    assert_eq!(out.len(), 64);
    for (t, hyps) in texts.iter().zip(&out) {
        assert_eq!(
            hyps,
            &vec![
                RawHypothesis::new(format!("{t} first"), -0.1),
                RawHypothesis::new(format!("{t} second"), -1.5)
            ]
        );
    }
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn request_carries_n_best_and_auth_header() {
    let seen_n = Arc::new(AtomicUsize::new(0));
    let n = seen_n.clone();
    let server = serve(Arc::new(move |i, req: &Request| {
        n.store(req.body["n_best"].as_u64().unwrap() as usize, Ordering::SeqCst);
        echo(i, req)
    }));
    let mut cfg = RemoteConfig::new(format!("{}/", server.url));
    cfg.auth_header = Some(("Authorization".into(), "Bearer s3cret".into()));
    RemoteProvider::new(cfg)
        .translate_batch(&["x".into()], 7)
        .unwrap();
    assert_eq!(seen_n.load(Ordering::SeqCst), 7);
    let headers = server.seen_headers.lock().unwrap();
    assert!(headers[0].contains(&("authorization".into(), "Bearer s3cret".into())));
}

#[test]
fn large_requests_are_split_by_max_batch() {
    let server = serve(Arc::new(echo));
    let texts: Vec<String> = (0..150).map(|i| format!("t{i}")).collect();
    let out = provider_roundtrip(&provider(&server.url), &texts, 2, &fast_retry()).unwrap();
    assert_eq!(out.len(), 150);
    assert_eq!(out[149][0].text, "t149 first");
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn server_errors_are_retried() {
    let server = serve(Arc::new(
        |i, req: &Request| if i < 2 { (503, "busy".into()) } else { echo(i, req) },
    ));
    let out = provider_roundtrip(&provider(&server.url), &["a".into()], 2, &fast_retry()).unwrap();
    assert_eq!(out[0][0].text, "a first");
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn persistent_server_errors_give_up() {
    let server = serve(Arc::new(|_, _: &Request| (500, "down".into())));
    let err = provider_roundtrip(&provider(&server.url), &["a".into()], 2, &fast_retry()).unwrap_err();
    assert!(matches!(err, ProviderError::Status { status: 500 }));
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn malformed_payload_is_not_retried() {
    let server = serve(Arc::new(|_, _: &Request| (200, "{\"results\": 42}".into())));
    let err = provider_roundtrip(&provider(&server.url), &["a".into()], 2, &fast_retry()).unwrap_err();
    match err {
        ProviderError::Malformed { excerpt } => assert!(excerpt.contains("42")),
        other => panic!("expected malformed, got {other:?}"),
    }
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn wrong_result_count_is_malformed() {
    let server = serve(Arc::new(|_, _: &Request| {
        (200, json!({"results": [[]]}).to_string())
    }));
    let err = provider(&server.url)
        .translate_batch(&["a".into(), "b".into()], 2)
        .unwrap_err();
    assert!(matches!(err, ProviderError::Malformed { .. }));
}

#[test]
fn unreachable_host_is_a_transport_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let err = provider(&url).translate_batch(&["a".into()], 2).unwrap_err();
    assert!(matches!(err, ProviderError::Transport(_)));
    assert!(err.is_retryable());
}
