use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::routing::get;
use axum::{Json, Router};
use gramweave::fetch::{fetch_articles, seed_cache};
use serde_json::{json, Value};

const UNREACHABLE: &str = "http://127.0.0.1:9/api.php";

const PAGES: [(&str, &str); 3] = [
    ("Storm", "A storm is coming."),
    ("Forecast", "The forecast is sunny."),
    ("Climate", "Climate is long weather."),
];

async fn api(State(hits): State<Arc<AtomicUsize>>, Query(q): Query<HashMap<String, String>>) -> Json<Value> {
    hits.fetch_add(1, Ordering::SeqCst);
    assert_eq!(q.get("formatversion").map(String::as_str), Some("2"));
    if q.get("list").map(String::as_str) == Some("search") {
        let offset: usize = q["sroffset"].parse().unwrap();
        let limit: usize = q["srlimit"].parse().unwrap();
        let page: Vec<Value> = PAGES.iter().skip(offset).take(limit.min(2)).map(|(t, _)| json!({ "title": t })).collect();
        let next = offset + page.len();
        let mut v = json!({ "query": { "search": page } });
        if next < PAGES.len() {
            v["continue"] = json!({ "sroffset": next });
        }
        return Json(v);
    }
    let title = &q["titles"];
    let text = PAGES.iter().find(|(t, _)| t == title).map(|(_, x)| *x).unwrap();
    Json(json!({ "query": { "pages": [{ "title": title, "extract": text }] } }))
}

/// Start a mock search/extract API on an ephemeral port.
fn mock_api() -> (String, Arc<AtomicUsize>) {
    let hits = Arc::new(AtomicUsize::new(0));
    let app = Router::new().route("/api.php", get(api)).with_state(Arc::clone(&hits));
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    (format!("http://{}/api.php", rx.recv().unwrap()), hits)
}

#[test]
fn seeded_cache_is_reproducible_offline() {
    let tmp = tempfile::tempdir().unwrap();
    seed_cache(tmp.path(), "storm", &[("A", "one."), ("B", "two.")]).unwrap();
    let a = fetch_articles("storm", 10, tmp.path(), UNREACHABLE).unwrap();
    let b = fetch_articles("storm", 10, tmp.path(), UNREACHABLE).unwrap();
    assert_eq!(a, b);
    assert!(a.from_cache);
    assert_eq!((a.articles, a.document.text.as_str()), (2, "one.\n\ntwo."));
    let one = fetch_articles("storm", 1, tmp.path(), UNREACHABLE).unwrap();
    assert_eq!(one.document.text, "one.");
}

#[test]
fn invalid_requests_and_empty_cache_fail() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(fetch_articles("storm", 0, tmp.path(), UNREACHABLE).is_err());
    assert!(fetch_articles("  ", 5, tmp.path(), UNREACHABLE).is_err());
    let err = fetch_articles("storm", 5, tmp.path(), UNREACHABLE).unwrap_err();
    assert!(err.to_string().contains("gramweave ingest"), "{err}");
}

#[test]
fn online_fetch_fills_the_cache() {
    let (url, hits) = mock_api();
    let tmp = tempfile::tempdir().unwrap();
    let online = fetch_articles("weather", 10, tmp.path(), &url).unwrap();
    assert!(!online.from_cache);
    assert_eq!(online.articles, 3);
    assert_eq!(online.document.text, "A storm is coming.\n\nThe forecast is sunny.\n\nClimate is long weather.");
    assert_eq!(hits.load(Ordering::SeqCst), 2 + 3);

    let offline = fetch_articles("weather", 10, tmp.path(), UNREACHABLE).unwrap();
    assert!(offline.from_cache);
    assert_eq!(offline.document, online.document);

    let fewer = fetch_articles("weather", 2, tmp.path(), &url).unwrap();
    assert!(fewer.from_cache);
    assert_eq!(fewer.articles, 2);
    assert_eq!(hits.load(Ordering::SeqCst), 5);
}

#[test]
fn partial_cache_is_used_when_offline() {
    let (url, _) = mock_api();
    let tmp = tempfile::tempdir().unwrap();
    let two = fetch_articles("weather", 2, tmp.path(), &url).unwrap();
    assert!(!two.from_cache);
    let more = fetch_articles("weather", 3, tmp.path(), UNREACHABLE).unwrap();
    assert!(more.from_cache);
    assert_eq!(more.document, two.document);
}
