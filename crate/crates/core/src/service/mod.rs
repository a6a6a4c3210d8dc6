//! Local HTTP/JSON facade: asynchronous optimization jobs with live
//! progress over server-sent events, refinement, evaluation and the
//! benchmark set.

mod jobs;
pub mod request;

use std::convert::Infallible;
use std::net::{Ipv4Addr, SocketAddr};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use jobs::{
    EndEvent, JobEvent, JobKind, JobManager, JobSpec, JobState, JobView, ProgressEvent, DEFAULT_JOB_CAPACITY,
};
pub use request::FieldError;

use crate::colorspace::lab_to_srgb_clamped;
use crate::cvd::CvdSpec;
use crate::io::ColormapDocument;
use crate::metrics::{evaluate, BenchmarkMap};

pub const DEFAULT_PORT: u16 = 7878;

/// How long `POST /api/jobs/{id}/cancel` waits for a running job to stop.
const CANCEL_WAIT: Duration = Duration::from_secs(2);

#[derive(Clone)]
pub struct AppState {
    pub jobs: JobManager,
}

impl AppState {
    pub fn new(parallel: bool) -> Self {
        AppState {
            jobs: JobManager::new(DEFAULT_JOB_CAPACITY, parallel),
        }
    }
}

struct ApiError(StatusCode, Vec<FieldError>);

impl ApiError {
    fn bad(errors: Vec<FieldError>) -> Self {
        ApiError(StatusCode::BAD_REQUEST, errors)
    }

    fn one(status: StatusCode, field: &str, message: impl Into<String>) -> Self {
        ApiError(
            status,
            vec![FieldError {
                field: field.into(),
                message: message.into(),
            }],
        )
    }

    fn no_job(id: &str) -> Self {
        ApiError::one(StatusCode::NOT_FOUND, "id", format!("no job {id:?}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "errors": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body(body: &Bytes) -> ApiResult<Value> {
    serde_json::from_slice(body).map_err(|e| ApiError::one(StatusCode::BAD_REQUEST, "", format!("invalid JSON: {e}")))
}

fn accepted(views: &[JobView]) -> Response {
    let jobs: Vec<Value> = views.iter().map(|v| json!({ "id": v.id, "seed": v.seed })).collect();
    (StatusCode::ACCEPTED, Json(json!({ "jobs": jobs }))).into_response()
}

/// Localhost on any port and scheme, so a dev server can talk to the API.
fn localhost_origin(origin: &HeaderValue) -> bool {
    let Ok(s) = origin.to_str() else {
        return false;
    };
    let Some(rest) = s.strip_prefix("http://").or_else(|| s.strip_prefix("https://")) else {
        return false;
    };
    let split = if rest.starts_with('[') {
        rest.find(']').map(|i| i + 1)
    } else {
        rest.find(':')
    };
    let (host, port) = rest.split_at(split.unwrap_or(rest.len()));
    let port_ok = port.is_empty() || port.strip_prefix(':').is_some_and(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
    port_ok && matches!(host, "localhost" | "127.0.0.1" | "[::1]")
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|o, _| localhost_origin(o)))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/generate", post(generate))
        .route("/api/refine", post(refine))
        .route("/api/evaluate", post(evaluate_map))
        .route("/api/jobs", get(list_jobs))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/jobs/{id}/events", get(job_events))
        .route("/api/jobs/{id}/cancel", post(cancel_job))
        .route("/api/suggestions", get(suggestions))
        .route("/api/benchmarks", get(benchmarks))
        .layer(cors)
        .with_state(state)
}

/// Serves on `127.0.0.1:port` until the process ends.
pub async fn serve(port: u16, parallel: bool) -> crate::Result<()> {
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| crate::Error::io(format!("{addr}"), e))?;
    let addr = listener.local_addr().map_err(|e| crate::Error::io(format!("{addr}"), e))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router(AppState::new(parallel)))
        .await
        .map_err(|e| crate::Error::io(format!("{addr}"), e))
}

async fn generate(State(s): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body = parse_body(&body)?;
    let specs = request::generate(&body).map_err(ApiError::bad)?;
    let views: Vec<JobView> = specs.into_iter().map(|spec| s.jobs.submit(spec, body.clone())).collect();
    Ok(accepted(&views))
}

async fn refine(State(s): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body = parse_body(&body)?;
    let spec = request::refine(&body).map_err(ApiError::bad)?;
    Ok(accepted(&[s.jobs.submit(spec, body)]))
}

async fn evaluate_map(body: Bytes) -> ApiResult<Json<Value>> {
    let body = parse_body(&body)?;
    let (map, model) = request::evaluate(&body).map_err(ApiError::bad)?;
    let report = evaluate(&map, &model).map_err(|e| ApiError::one(StatusCode::BAD_REQUEST, "document", e.to_string()))?;
    let simulated: Vec<String> = map
        .points()
        .iter()
        .map(|&c| lab_to_srgb_clamped(model.simulate(c)).to_hex())
        .collect();
    let mut out = serde_json::to_value(report).expect("reports serialize");
    out["cvd"] = serde_json::to_value(CvdSpec::from(model)).expect("specs serialize");
    out["hex"] = json!(map.hex_stops());
    out["simulated_hex"] = json!(simulated);
    Ok(Json(out))
}

async fn list_jobs(State(s): State<AppState>) -> Json<Value> {
    Json(json!({ "jobs": s.jobs.list() }))
}

async fn get_job(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<JobView>> {
    s.jobs.get(&id).map(Json).ok_or_else(|| ApiError::no_job(&id))
}

async fn cancel_job(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<JobView>> {
    let mut rx = s.jobs.cancel(&id).ok_or_else(|| ApiError::no_job(&id))?;
    // A timeout just returns the job as it stands; it will still stop.
    let _ = tokio::time::timeout(CANCEL_WAIT, rx.wait_for(|st| st.is_terminal())).await;
    s.jobs.get(&id).map(Json).ok_or_else(|| ApiError::no_job(&id))
}

fn sse_event(e: &JobEvent) -> Event {
    let (name, data) = match e {
        JobEvent::Progress(p) => ("progress", serde_json::to_string(p)),
        JobEvent::End(end) => ("end", serde_json::to_string(end)),
    };
    Event::default().event(name).data(data.expect("events serialize"))
}

/// Replays the job's events so far, then follows it live until the
/// terminal `end` event.
fn job_stream(history: Vec<JobEvent>, rx: broadcast::Receiver<JobEvent>) -> impl Stream<Item = JobEvent> {
    let done = history.iter().any(|e| matches!(e, JobEvent::End(_)));
    let live = stream::unfold((rx, done), |(mut rx, done)| async move {
        if done {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(e) => {
                    let end = matches!(e, JobEvent::End(_));
                    return Some((e, (rx, end)));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    stream::iter(history).chain(live)
}

async fn job_events(
    State(s): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let (history, rx) = s.jobs.subscribe(&id).ok_or_else(|| ApiError::no_job(&id))?;
    let events = job_stream(history, rx).map(|e| Ok(sse_event(&e)));
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}

#[derive(Deserialize)]
struct SuggestionQuery {
    doc: Option<String>,
    t: Option<f64>,
}

async fn suggestions(Query(q): Query<SuggestionQuery>) -> ApiResult<Json<Value>> {
    let mut errors = Vec::new();
    let doc = match q.doc.as_deref() {
        None => {
            errors.push(FieldError {
                field: "doc".into(),
                message: "required".into(),
            });
            None
        }
        Some(text) => serde_json::from_str::<ColormapDocument>(text)
            .map_err(|e| {
                errors.push(FieldError {
                    field: "doc".into(),
                    message: e.to_string(),
                })
            })
            .ok(),
    };
    let t = match q.t {
        Some(t) if (0.0..=1.0).contains(&t) => t,
        other => {
            errors.push(FieldError {
                field: "t".into(),
                message: format!("a position in [0, 1] is required, got {other:?}"),
            });
            0.0
        }
    };
    let Some(doc) = doc.filter(|_| errors.is_empty()) else {
        return Err(ApiError::bad(errors));
    };
    let color = doc.colormap.sample(t);
    let options = crate::suggestions::suggestions(color).map_err(|e| ApiError::one(StatusCode::BAD_REQUEST, "doc", e.to_string()))?;
    Ok(Json(json!({
        "t": t,
        "color": color.to_array(),
        "hex": lab_to_srgb_clamped(color).to_hex(),
        "suggestions": options,
    })))
}

async fn benchmarks() -> Json<Value> {
    let model = crate::cvd::CvdModel::default();
    let items: Vec<Value> = BenchmarkMap::ALL
        .iter()
        .map(|&b| {
            let map = b.scoring_colormap();
            let report = evaluate(&map, &model).expect("benchmark maps evaluate");
            json!({
                "name": b,
                "family": b.family(),
                "document": ColormapDocument::new(map),
                "report": report,
            })
        })
        .collect();
    Json(json!({ "benchmarks": items }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cors_accepts_only_localhost() {
        let ok = ["http://localhost:5173", "http://127.0.0.1:8080", "http://localhost", "https://[::1]:3000"];
        for o in ok {
            assert!(localhost_origin(&HeaderValue::from_static(o)), "{o}");
        }
        let bad = ["http://example.com", "http://localhost.evil.com", "file://localhost", "http://10.0.0.1:80"];
        for o in bad {
            assert!(!localhost_origin(&HeaderValue::from_static(o)), "{o}");
        }
    }
}
