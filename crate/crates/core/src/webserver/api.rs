use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::Serialize;
use tokio_util::sync::CancellationToken;

use super::regen::PageSlot;
use crate::clock::SimClock;
use crate::collector::StateStore;
use crate::logstore::{read_range, LogRecord};
use crate::protocol::StationId;

/// Shared state behind the HTTP routes.
#[derive(Clone, Debug)]
pub struct ApiState {
    pub page: PageSlot,
    pub state: Arc<StateStore>,
    pub log_dir: PathBuf,
    pub clock: SimClock,
    pub stale_after: Duration,
    pub started: DateTime<Utc>,
}

/// `/api/current` element: a log record plus its staleness.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct CurrentEntry {
    #[serde(flatten)]
    pub record: LogRecord,
    pub stale: bool,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

/// A JSON error body with its status.
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1 })).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

pub fn router(state: ApiState) -> Router {
    Router::new()
        .route("/", get(page))
        .route("/api/current", get(current))
        .route("/api/history", get(history))
        .route("/healthz", get(healthz))
        .fallback(|| async { ApiError(StatusCode::NOT_FOUND, "no such resource".into()) })
        .with_state(state)
}

async fn page(State(api): State<ApiState>) -> Response {
    let page = api.page.current();
    ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], page.html.to_string()).into_response()
}

async fn current(State(api): State<ApiState>) -> Json<Vec<CurrentEntry>> {
    let now = api.clock.now();
    let entries = api
        .state
        .snapshot()
        .into_iter()
        .filter_map(|s| {
            let record = s.last_record()?;
            Some(CurrentEntry { record, stale: s.is_stale(now, api.stale_after) })
        })
        .collect();
    Json(entries)
}

fn parse_time(name: &str, value: &str) -> Result<DateTime<Utc>, ApiError> {
    DateTime::parse_from_rfc3339(value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| bad_request(format!("{name}: {e}")))
}

async fn history(
    State(api): State<ApiState>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Json<Vec<LogRecord>>, ApiError> {
    for key in params.keys() {
        if !matches!(key.as_str(), "station" | "from" | "to") {
            return Err(bad_request(format!("unknown parameter {key:?}")));
        }
    }
    let station = match params.get("station").filter(|s| !s.is_empty()) {
        Some(s) => Some(s.parse::<StationId>().map_err(|e| bad_request(format!("station: {e}")))?),
        None => None,
    };
    let now = api.clock.now();
    let from = match params.get("from") {
        Some(v) => parse_time("from", v)?,
        None => now - chrono::Duration::hours(24),
    };
    let to = match params.get("to") {
        Some(v) => parse_time("to", v)?,
        None => DateTime::<Utc>::MAX_UTC,
    };
    if from > to {
        return Err(bad_request("from is after to"));
    }
    let got = read_range(&api.log_dir, from, to, station)
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("log read failed: {e}")))?;
    Ok(Json(got.records))
}

#[derive(Serialize)]
struct StationHealth {
    station_id: StationId,
    polls: u64,
    ok: u64,
    checksum_errors: u64,
    timeouts: u64,
    other_errors: u64,
    consecutive_failures: u32,
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    uptime_s: i64,
    page_generation: u64,
    page_errors: u64,
    stations: Vec<StationHealth>,
}

async fn healthz(State(api): State<ApiState>) -> Json<serde_json::Value> {
    let stations = api
        .state
        .snapshot()
        .into_iter()
        .map(|s| StationHealth {
            station_id: s.station_id,
            polls: s.totals.polls,
            ok: s.totals.ok,
            checksum_errors: s.totals.checksum_errors,
            timeouts: s.totals.timeouts,
            other_errors: s.totals.other_errors,
            consecutive_failures: s.consecutive_failures,
        })
        .collect();
    let health = Health {
        status: "ok",
        uptime_s: (api.clock.now() - api.started).num_seconds(),
        page_generation: api.page.current().generation,
        page_errors: api.page.errors(),
        stations,
    };
    Json(serde_json::to_value(health).expect("health serializes"))
}

/// Serves `router` on `listener` until `shutdown`.
pub async fn serve(
    listener: tokio::net::TcpListener,
    router: Router,
    shutdown: CancellationToken,
) -> std::io::Result<()> {
    axum::serve(listener, router).with_graceful_shutdown(async move { shutdown.cancelled().await }).await
}
