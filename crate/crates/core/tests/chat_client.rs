mod common;

use std::time::Duration;

use common::{serve, Reply};
use laura_core::llm::{chat_complete, ChatError, ChatMessage, LlmEndpointConfig, TokenCounts};

fn config(base_url: &str, var: &str) -> LlmEndpointConfig {
    std::env::set_var(var, "test-key");
    LlmEndpointConfig {
        base_url: base_url.to_string(),
        model_name: "stub-model".into(),
        api_key_env_var: var.into(),
        network_retries: 0,
        timeout_s: 5.0,
        ..Default::default()
    }
}

#[test]
fn canned_reply_round_trip() {
    let stub = serve(vec![Reply::ok("[0, 2, 1, 0] omega = 9")]);
    let messages = [ChatMessage::system("sys"), ChatMessage::user("route please")];
    let ex = chat_complete(&config(&stub.base_url, "LAURA_STUB_KEY_A"), &messages).unwrap();
    assert_eq!(ex.response_text, "[0, 2, 1, 0] omega = 9");
    assert_eq!(ex.token_counts, Some(TokenCounts { prompt: 12, completion: 7 }));
    assert_eq!(ex.request_messages, messages.to_vec());
    assert!(ex.latency_s >= 0.0);

    let req = stub.requests.lock().unwrap()[0].clone();
    assert!(req.starts_with("POST /v1/chat/completions"));
    assert!(req.to_ascii_lowercase().contains("authorization: bearer test-key"));
    let body: serde_json::Value = serde_json::from_str(req.split("\r\n\r\n").last().unwrap()).unwrap();
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["messages"][1]["content"], "route please");
    assert_eq!(body["messages"][0]["role"], "system");
}

#[test]
fn server_error_carries_body() {
    let stub = serve(vec![Reply::status(500, "internal kaboom")]);
    let err = chat_complete(&config(&stub.base_url, "LAURA_STUB_KEY_B"), &[ChatMessage::user("x")]).unwrap_err();
    assert_eq!(
        err,
        ChatError::Status {
            status: 500,
            body: "internal kaboom".into()
        }
    );
}

#[test]
fn retries_recover_from_transient_errors() {
    let stub = serve(vec![Reply::status(503, "busy"), Reply::status(429, "slow down"), Reply::ok("[0, 1, 0]")]);
    let mut c = config(&stub.base_url, "LAURA_STUB_KEY_C");
    c.network_retries = 2;
    let ex = chat_complete(&c, &[ChatMessage::user("x")]).unwrap();
    assert_eq!(ex.response_text, "[0, 1, 0]");
    assert_eq!(stub.requests.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let stub = serve(vec![Reply::status(401, "bad key"), Reply::ok("unused")]);
    let mut c = config(&stub.base_url, "LAURA_STUB_KEY_D");
    c.network_retries = 3;
    let err = chat_complete(&c, &[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, ChatError::Status { status: 401, .. }));
    assert_eq!(stub.requests.lock().unwrap().len(), 1);
}

#[test]
fn slow_server_times_out() {
    let mut reply = Reply::ok("late");
    reply.delay = Duration::from_secs(3);
    let stub = serve(vec![reply]);
    let mut c = config(&stub.base_url, "LAURA_STUB_KEY_E");
    c.timeout_s = 0.3;
    let err = chat_complete(&c, &[ChatMessage::user("x")]).unwrap_err();
    assert_eq!(err, ChatError::Timeout(0.3));
}

#[test]
fn malformed_body_is_reported() {
    let stub = serve(vec![Reply::status(200, "{\"choices\": []}")]);
    let err = chat_complete(&config(&stub.base_url, "LAURA_STUB_KEY_F"), &[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, ChatError::MalformedResponse(_)));
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    let c = config("http://127.0.0.1:9/v1", "LAURA_STUB_KEY_G");
    let err = chat_complete(&c, &[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, ChatError::Transport(_)), "{err:?}");
}
