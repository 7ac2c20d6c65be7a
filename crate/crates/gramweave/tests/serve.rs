mod common;

use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use gramweave::serve::{router, SuggestResponse, DEFAULT_K, MAX_CONTEXT_CHARS};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

fn post(body: impl Into<Body>) -> Request<Body> {
    Request::post("/suggest").header(header::CONTENT_TYPE, "application/json").body(body.into()).unwrap()
}

fn get(path: &str) -> Request<Body> {
    Request::get(path).body(Body::empty()).unwrap()
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[tokio::test]
async fn suggest_returns_ranked_known_tokens() {
    let model = common::toy_model();
    let app = router(model.clone());
    let (status, body) = call(&app, post(json!({"context": "the weather", "k": 3}).to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let resp: SuggestResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!(resp.suggestions.len(), 3);
    assert!(resp.suggestions.windows(2).all(|w| w[0].probability >= w[1].probability));
    assert!(resp.suggestions.iter().all(|s| model.vocab.id(&s.token).is_some()));
    let top: Vec<&str> = resp.suggestions.iter().map(|s| s.token.as_str()).collect();
    assert!(top.contains(&"is") && top.contains(&"forecast"), "{top:?}");
    assert_eq!(resp.model_info.n, 3);
    assert_eq!(resp.model_info.embedding_source, "CE");
    assert_eq!(resp.model_info.corpus_digest, "toy");
}

#[tokio::test]
async fn k_defaults_and_caps_at_vocabulary() {
    let app = router(common::toy_model());
    let (_, body) = call(&app, post(r#"{"context":"the"}"#)).await;
    assert_eq!(json_of(&body)["suggestions"].as_array().unwrap().len(), DEFAULT_K);
    let (_, body) = call(&app, post(r#"{"context":"the","k":100}"#)).await;
    assert_eq!(json_of(&body)["suggestions"].as_array().unwrap().len(), 6);
}

#[tokio::test]
async fn bad_requests() {
    let app = router(common::toy_model());
    for body in [
        "not json".to_string(),
        r#"{"k":2}"#.to_string(),
        r#"{"context":"the","k":0}"#.to_string(),
        r#"{"context":"the","k":-1}"#.to_string(),
        r#"{"context":5}"#.to_string(),
        json!({"context": "a".repeat(MAX_CONTEXT_CHARS + 1)}).to_string(),
    ] {
        let (status, resp) = call(&app, post(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body:.40}");
        assert!(json_of(&resp)["error"].is_string());
    }
    let (status, _) = call(&app, post(json!({"context": "the ".repeat(MAX_CONTEXT_CHARS / 4)}).to_string())).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn unusable_context_is_422() {
    let app = router(common::toy_model());
    for ctx in ["", "zebra giraffe", "!!! ..."] {
        let (status, body) = call(&app, post(json!({ "context": ctx }).to_string())).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(json_of(&body), json!({"error": "no usable context"}));
    }
}

#[tokio::test]
async fn health_model_and_unknown_routes() {
    let app = router(common::toy_model());
    let (status, body) = call(&app, get("/health")).await;
    assert_eq!((status, json_of(&body)), (StatusCode::OK, json!({"status": "ok"})));

    call(&app, post(r#"{"context":"the"}"#)).await;
    call(&app, post(r#"{"context":"the weather"}"#)).await;
    let (status, body) = call(&app, get("/model")).await;
    assert_eq!(status, StatusCode::OK);
    let info = json_of(&body);
    assert_eq!(info["n"], 3);
    assert_eq!(info["vocab_size"], 6);
    assert_eq!(info["readout"], "last_real");
    assert_eq!(info["suggest_requests"], 2);

    let (status, _) = call(&app, get("/nope")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, get("/suggest")).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
}

#[tokio::test]
async fn cors_allows_only_local_origins() {
    let app = router(common::toy_model());
    let preflight = |origin: &str| {
        Request::builder()
            .method(Method::OPTIONS)
            .uri("/suggest")
            .header(header::ORIGIN, origin)
            .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
            .body(Body::empty())
            .unwrap()
    };
    let resp = app.clone().oneshot(preflight("http://localhost:5173")).await.unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://localhost:5173");
    let resp = app.clone().oneshot(preflight("https://example.com")).await.unwrap();
    assert!(resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn repeated_and_concurrent_requests_agree() {
    let app = router(common::random_model(500, 16, 32, 4, 3));
    let body = json!({"context": "w1 w7 w300", "k": 10}).to_string();
    let (_, first) = call(&app, post(body.clone())).await;
    let tasks: Vec<_> = (0..16)
        .map(|_| {
            let app = app.clone();
            let body = body.clone();
            tokio::spawn(async move { call(&app, post(body)).await })
        })
        .collect();
    for t in tasks {
        let (status, bytes) = t.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        assert_eq!(bytes, first);
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn median_latency_on_a_desktop_sized_model() {
    let app = router(common::random_model(10_000, 64, 200, 10, 5));
    let mut times = Vec::new();
    for i in 0..41 {
        let ctx = format!("w{} w{} w{} w{}", i, i * 7 + 1, i * 13 + 2, i * 31 + 3);
        let start = Instant::now();
        let (status, _) = call(&app, post(json!({ "context": ctx, "k": 5 }).to_string())).await;
        times.push(start.elapsed());
        assert_eq!(status, StatusCode::OK);
    }
    times.sort();
    let p50 = times[times.len() / 2];
    assert!(p50 < Duration::from_millis(50), "p50 {p50:?}");
}
