use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use evkit::scoring::{ApiMode, Backend, BackendError, HttpBackend, PromptTemplate, RetryPolicy, Scorer};
use evkit::{Label, ScoringConfig};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    auth: Option<String>,
    body: Value,
}

/// Serves queued (status, body) replies, one per connection, and records
/// every request.
fn fake_server(replies: Vec<(u16, Value)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let mut queue: VecDeque<(u16, Value)> = replies.into();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
            let (mut len, mut auth) = (0usize, None);
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap();
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => auth = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            let mut body = vec![0u8; len];
            reader.read_exact(&mut body).unwrap();
            log.lock().unwrap().push(Seen {
                path,
                auth,
                body: serde_json::from_slice(&body).unwrap_or(Value::Null),
            });
            let (status, reply) = queue.pop_front().unwrap_or((500, json!({})));
            let text = reply.to_string();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
        }
    });
    (format!("http://{addr}/v1"), seen)
}

fn logprob_reply(yes: f64, no: f64) -> Value {
    json!({"choices": [{"text": " Yes", "logprobs": {"top_logprobs": [{" Yes": yes.ln(), " No": no.ln(), " Maybe": -5.0}]}}]})
}

#[test]
fn completion_mode_reads_top_logprobs() {
    let (url, seen) = fake_server(vec![(200, logprob_reply(0.6, 0.2))]);
    let backend = HttpBackend::new(url, "tiny", ApiMode::Completion)
        .with_top_n(7)
        .with_api_key(Some("sk-test".into()));
    let template = PromptTemplate::default_template();
    let config = ScoringConfig::default();
    let scorer = Scorer::new(&backend, &template, &config).with_retry(RetryPolicy::no_delay());
    let pair = scorer.score_pair("It rained all day.", "The ground is wet.").unwrap();
    assert!((pair.score.value - 0.75).abs() < 1e-12);
    assert_eq!(pair.predicted, Label::Support);

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].path, "/v1/completions");
    assert_eq!(seen[0].auth.as_deref(), Some("Bearer sk-test"));
    assert_eq!(seen[0].body["max_tokens"], 1);
    assert_eq!(seen[0].body["logprobs"], 7);
    assert_eq!(seen[0].body["model"], "tiny");
    assert_eq!(
        seen[0].body["prompt"].as_str().unwrap(),
        template.render("It rained all day.", "The ground is wet.")
    );
}

#[test]
fn server_errors_are_retried() {
    let (url, seen) = fake_server(vec![(503, json!({})), (200, logprob_reply(0.1, 0.7))]);
    let backend = HttpBackend::new(url, "tiny", ApiMode::Completion);
    let template = PromptTemplate::default_template();
    let config = ScoringConfig::default();
    let scorer = Scorer::new(&backend, &template, &config).with_retry(RetryPolicy::no_delay());
    let pair = scorer.score_pair("p", "h").unwrap();
    assert_eq!(pair.predicted, Label::NotSupport);
    assert_eq!(seen.lock().unwrap().len(), 2);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = fake_server(vec![(400, json!({"error": "bad"})), (200, logprob_reply(0.9, 0.1))]);
    let backend = HttpBackend::new(url, "tiny", ApiMode::Completion);
    let err = RetryPolicy::no_delay().run(|| backend.next_token_probs("x")).unwrap_err();
    assert!(matches!(err, BackendError::Malformed(_)));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn chat_mode_generates_label_text() {
    let (url, seen) = fake_server(vec![(200, json!({"choices": [{"message": {"content": "No, it does not."}}]}))]);
    let backend = HttpBackend::new(url, "chatty", ApiMode::Chat);
    let template = PromptTemplate::default_template();
    let config = ScoringConfig::default();
    let pair = Scorer::new(&backend, &template, &config).score_pair("p", "h").unwrap();
    assert_eq!(pair.predicted, Label::NotSupport);
    assert!(!pair.unmatched_generation);
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/v1/chat/completions");
    assert_eq!(seen[0].body["messages"][0]["role"], "user");
}

#[test]
fn unreachable_server_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let backend = HttpBackend::new(format!("http://127.0.0.1:{port}/v1"), "m", ApiMode::Completion);
    assert!(matches!(backend.next_token_probs("x"), Err(BackendError::Transport(_))));
}
