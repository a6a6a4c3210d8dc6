use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use colorforge::io::ColormapDocument;
use colorforge::service::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(false))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, bytes.to_vec())
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (s, b) = send(app, req).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, b) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn wait_terminal(app: &Router, id: &str) -> Value {
    let deadline = Instant::now() + Duration::from_secs(60);
    loop {
        let (s, job) = get(app, &format!("/api/jobs/{id}")).await;
        assert_eq!(s, StatusCode::OK);
        if ["done", "cancelled", "failed"].contains(&job["state"].as_str().unwrap()) {
            return job;
        }
        assert!(Instant::now() < deadline, "job {id} did not finish");
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
}

fn ids(resp: &Value) -> Vec<String> {
    resp["jobs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|j| j["id"].as_str().unwrap().to_string())
        .collect()
}

/// `event: name` / `data: json` pairs from a finished SSE body.
fn sse_events(body: &[u8]) -> Vec<(String, Value)> {
    let text = std::str::from_utf8(body).unwrap();
    let mut out = Vec::new();
    for chunk in text.split("\n\n").filter(|c| !c.trim().is_empty()) {
        let mut name = None;
        let mut data = String::new();
        for line in chunk.lines() {
            if let Some(n) = line.strip_prefix("event:") {
                name = Some(n.trim().to_string());
            } else if let Some(d) = line.strip_prefix("data:") {
                data.push_str(d.trim_start());
            }
        }
        if let Some(name) = name {
            out.push((name, serde_json::from_str(&data).unwrap()));
        }
    }
    out
}

fn percent_encode(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

const QUICK: &str = r#"{"iter_count": 40}"#;

fn quick() -> Value {
    serde_json::from_str(QUICK).unwrap()
}

#[tokio::test]
async fn generate_five_gives_distinct_jobs_and_seeds() {
    let app = app();
    let (s, resp) = post(&app, "/api/generate", json!({"profile": "linear", "count": 5, "shelf": [], "config": quick()})).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let jobs = resp["jobs"].as_array().unwrap();
    assert_eq!(jobs.len(), 5);
    let mut seeds: Vec<u64> = jobs.iter().map(|j| j["seed"].as_u64().unwrap()).collect();
    seeds.sort();
    seeds.dedup();
    assert_eq!(seeds.len(), 5);
    let mut id_list = ids(&resp);
    for id in &id_list {
        let job = wait_terminal(&app, id).await;
        assert_eq!(job["state"], "done");
        let doc: ColormapDocument = serde_json::from_value(job["result"].clone()).unwrap();
        doc.colormap.validate().unwrap();
        assert_eq!(doc.colormap.len(), 25);
    }
    id_list.sort();
    id_list.dedup();
    assert_eq!(id_list.len(), 5);

    let (_, listed) = get(&app, "/api/jobs").await;
    assert_eq!(listed["jobs"].as_array().unwrap().len(), 5);
}

#[tokio::test]
async fn explicit_seed_is_the_base() {
    let app = app();
    let mut cfg = quick();
    cfg["seed"] = json!(100);
    let (_, resp) = post(&app, "/api/generate", json!({"profile": "diverging", "count": 3, "config": cfg})).await;
    let seeds: Vec<u64> = resp["jobs"].as_array().unwrap().iter().map(|j| j["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [100, 101, 102]);
}

#[tokio::test]
async fn invalid_bodies_are_400_with_fields() {
    let app = app();
    let (s, resp) = post(&app, "/api/generate", json!({"profile": "zigzag"})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(resp["errors"][0]["field"], "profile");

    let (s, resp) = post(&app, "/api/generate", json!({"profile": "linear", "count": 2, "colorfulness": 3})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let fields: Vec<&str> = resp["errors"].as_array().unwrap().iter().map(|e| e["field"].as_str().unwrap()).collect();
    assert_eq!(fields, ["count", "colorfulness"]);

    let req = Request::post("/api/generate").body(Body::from("{nope")).unwrap();
    let (s, _) = send(&app, req).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, resp) = get(&app, "/api/jobs/job-missing").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(resp["errors"][0]["field"], "id");
    let (s, _) = post(&app, "/api/jobs/job-missing/cancel", json!({})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn progress_stream_is_monotone_and_ends() {
    let app = app();
    let (_, resp) = post(&app, "/api/generate", json!({"profile": "diverging", "config": quick()})).await;
    let id = &ids(&resp)[0];
    let req = Request::get(format!("/api/jobs/{id}/events")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()[header::CONTENT_TYPE], "text/event-stream");
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    let events = sse_events(&body);

    let (last, progress) = events.split_last().unwrap();
    assert_eq!(last.0, "end");
    assert_eq!(last.1["state"], "done");
    let rungs = progress[0].1["rungs"].as_u64().unwrap() as usize;
    assert_eq!(progress.len(), rungs);
    let mut prev = f64::INFINITY;
    for (name, p) in progress {
        assert_eq!(name, "progress");
        let c = p["best_cost"]["total"].as_f64().unwrap();
        assert!(c <= prev, "best cost rose from {prev} to {c}");
        prev = c;
        assert_eq!(p["hex"].as_array().unwrap().len(), 31);
    }

    // A late subscriber gets the same replay.
    let req = Request::get(format!("/api/jobs/{id}/events")).body(Body::empty()).unwrap();
    let (_, again) = send(&app, req).await;
    assert_eq!(sse_events(&again), events);
    let job = wait_terminal(&app, id).await;
    assert_eq!(job["result"], last.1["result"]);
}

#[tokio::test]
async fn cancel_keeps_the_best_so_far() {
    let app = app();
    // Default iteration count so the run is still going when cancelled.
    let (_, resp) = post(&app, "/api/generate", json!({"profile": "linear", "config": {"seed": 5}})).await;
    let id = ids(&resp)[0].clone();
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        let (_, job) = get(&app, &format!("/api/jobs/{id}")).await;
        if !job["progress"].is_null() {
            break;
        }
        assert!(Instant::now() < deadline);
        tokio::time::sleep(Duration::from_millis(2)).await;
    }
    let t0 = Instant::now();
    let (s, job) = post(&app, &format!("/api/jobs/{id}/cancel"), json!({})).await;
    let latency = t0.elapsed();
    assert_eq!(s, StatusCode::OK);
    assert_eq!(job["state"], "cancelled");
    assert!(latency < Duration::from_millis(500), "cancel took {latency:?}");
    let doc: ColormapDocument = serde_json::from_value(job["result"].clone()).unwrap();
    doc.colormap.validate().unwrap();
    let best = job["progress"]["best_cost"]["total"].as_f64().unwrap();
    assert!(doc.cost.unwrap().total <= best);

    let (s, again) = post(&app, &format!("/api/jobs/{id}/cancel"), json!({})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(again["state"], "cancelled");
    assert_eq!(again["result"], job["result"]);
}

#[tokio::test]
async fn queued_job_cancels_without_result() {
    let app = app();
    let (_, resp) = post(&app, "/api/generate", json!({"profile": "linear", "count": 3, "config": {"seed": 1}})).await;
    let all = ids(&resp);
    let (_, queued) = post(&app, &format!("/api/jobs/{}/cancel", all[2]), json!({})).await;
    assert_eq!(queued["state"], "cancelled");
    assert!(queued["result"].is_null());
    for id in &all[..2] {
        post(&app, &format!("/api/jobs/{id}/cancel"), json!({})).await;
    }
    for id in &all {
        assert_eq!(wait_terminal(&app, id).await["state"], "cancelled");
    }
}

#[tokio::test]
async fn refine_warm_starts_from_a_document() {
    let app = app();
    let (_, resp) = post(&app, "/api/generate", json!({"profile": "linear", "config": quick()})).await;
    let first = wait_terminal(&app, &ids(&resp)[0]).await;
    let doc = first["result"].clone();
    let (s, resp) = post(
        &app,
        "/api/refine",
        json!({"document": doc, "edits": [{"position": 0.5, "color": [50.0, 40.0, 30.0]}], "config": quick()}),
    )
    .await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let job = wait_terminal(&app, &ids(&resp)[0]).await;
    assert_eq!(job["kind"], "refine");
    assert_eq!(job["state"], "done");
    let refined: ColormapDocument = serde_json::from_value(job["result"].clone()).unwrap();
    assert_eq!(refined.shelf.blocks().len(), 1);
    refined.colormap.validate().unwrap();

    let (s, resp) = post(&app, "/api/refine", json!({"document": {"format_version": 1, "profile": "unconstrained", "points": [[10.0, 0.0, 0.0], [90.0, 0.0, 0.0]]}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(resp["errors"][0]["field"], "document.profile", "{resp}");
}

#[tokio::test]
async fn evaluate_reports_metrics_and_simulation() {
    let app = app();
    let doc = serde_json::to_value(ColormapDocument::new(colorforge::metrics::BenchmarkMap::RedBlue.scoring_colormap())).unwrap();
    let (s, r) = post(&app, "/api/evaluate", json!({"document": doc, "cvd": "deutan:0.8"})).await;
    assert_eq!(s, StatusCode::OK);
    for k in ["uniformity", "smoothness", "discriminability", "cvd_discriminability", "retention"] {
        assert!(r[k].is_f64(), "{k}");
    }
    assert_eq!(r["simulated_hex"].as_array().unwrap().len(), 31);
    assert_ne!(r["simulated_hex"], r["hex"]);

    let (_, off) = post(&app, "/api/evaluate", json!({"document": doc, "cvd": "off"})).await;
    assert_eq!(off["simulated_hex"], off["hex"]);
    assert_eq!(off["retention"], 1.0);

    let (s, _) = post(&app, "/api/evaluate", json!({"document": doc, "cvd": "tetartan"})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn suggestions_for_a_position() {
    let app = app();
    let doc = ColormapDocument::new(colorforge::metrics::BenchmarkMap::Viridis.scoring_colormap());
    let q = percent_encode(&serde_json::to_string(&doc).unwrap());
    let (s, r) = get(&app, &format!("/api/suggestions?doc={q}&t=0.5")).await;
    assert_eq!(s, StatusCode::OK);
    let list = r["suggestions"].as_array().unwrap();
    assert_eq!(list.len(), 8);
    let l = r["color"][0].as_f64().unwrap();
    for sug in list {
        assert!((sug["color"][0].as_f64().unwrap() - l).abs() < 1e-9);
    }

    let (s, r) = get(&app, &format!("/api/suggestions?doc={q}&t=2")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(r["errors"][0]["field"], "t");
}

#[tokio::test]
async fn benchmarks_are_embedded_documents() {
    let (s, r) = get(&app(), "/api/benchmarks").await;
    assert_eq!(s, StatusCode::OK);
    let list = r["benchmarks"].as_array().unwrap();
    assert_eq!(list.len(), 8);
    for b in list {
        let doc: ColormapDocument = serde_json::from_value(b["document"].clone()).unwrap();
        doc.colormap.validate().unwrap();
        assert!(b["report"]["retention"].is_f64());
    }
}

#[tokio::test]
async fn cors_is_open_to_localhost_only() {
    let app = app();
    let preflight = |origin: &str| {
        Request::options("/api/generate")
            .header(header::ORIGIN, origin)
            .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
            .body(Body::empty())
            .unwrap()
    };
    let resp = app.clone().oneshot(preflight("http://localhost:5173")).await.unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://localhost:5173");
    let resp = app.clone().oneshot(preflight("http://example.org")).await.unwrap();
    assert!(resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());
}
