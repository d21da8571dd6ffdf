use std::convert::Infallible;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use crate::error::MonitorError;
use crate::registry::ModelInfo;
use crate::service::MonitorHandle;
use crate::sim::{Command, Event, Mitigation, MitigationKind, PredictRequest, PredictResponse, SimState};

pub struct ApiError(StatusCode, String);

impl From<MonitorError> for ApiError {
    fn from(e: MonitorError) -> Self {
        let status = match e {
            MonitorError::UnknownModel(_) => StatusCode::NOT_FOUND,
            MonitorError::InvalidCommand(_) | MonitorError::Config(_) | MonitorError::Json(_) => StatusCode::BAD_REQUEST,
            MonitorError::Stopped => StatusCode::SERVICE_UNAVAILABLE,
            MonitorError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(handle: MonitorHandle) -> Router {
    Router::new()
        .route("/api/state", get(state))
        .route("/api/history", get(history))
        .route("/api/models", get(models))
        .route("/api/models/select", post(select_model))
        .route("/api/event", post(inject_event))
        .route("/api/mitigation", post(apply_mitigation))
        .route("/api/mitigation/{kind}", delete(remove_mitigation))
        .route("/api/stream", get(stream))
        .route("/api/predict", post(predict))
        .with_state(handle)
}

async fn state(State(h): State<MonitorHandle>) -> Json<SimState> {
    Json(h.current())
}

#[derive(Deserialize)]
struct HistoryQuery {
    n: Option<usize>,
}

async fn history(State(h): State<MonitorHandle>, Query(q): Query<HistoryQuery>) -> Json<Vec<SimState>> {
    Json(h.history(q.n.unwrap_or(h.config().history_capacity)))
}

async fn models(State(h): State<MonitorHandle>) -> Json<serde_json::Value> {
    let models: Vec<ModelInfo> = h.registry().infos();
    Json(json!({
        "selected": h.current().selected_model,
        "models": models,
        "load_errors": h.registry().load_errors(),
    }))
}

#[derive(Deserialize)]
struct SelectBody {
    id: String,
}

async fn run(h: &MonitorHandle, command: Command) -> ApiResult<SimState> {
    let tick = h.apply(command).await?;
    Ok(Json(h.state_at(tick).unwrap_or_else(|| h.current())))
}

async fn select_model(State(h): State<MonitorHandle>, body: Result<Json<SelectBody>, JsonRejection>) -> ApiResult<SimState> {
    let Json(body) = body?;
    if !h.registry().contains(&body.id) {
        return Err(MonitorError::UnknownModel(body.id).into());
    }
    run(&h, Command::SelectModel { id: body.id }).await
}

async fn inject_event(State(h): State<MonitorHandle>, body: Result<Json<Event>, JsonRejection>) -> ApiResult<SimState> {
    let Json(event) = body?;
    event.validate()?;
    run(&h, Command::InjectEvent(event)).await
}

async fn apply_mitigation(State(h): State<MonitorHandle>, body: Result<Json<Mitigation>, JsonRejection>) -> ApiResult<SimState> {
    let Json(m) = body?;
    m.validate()?;
    run(&h, Command::ApplyMitigation(m)).await
}

async fn remove_mitigation(State(h): State<MonitorHandle>, Path(kind): Path<String>) -> ApiResult<SimState> {
    let kind = MitigationKind::parse(&kind)
        .ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, format!("unknown mitigation kind `{kind}`")))?;
    run(&h, Command::RemoveMitigation { kind }).await
}

async fn predict(State(h): State<MonitorHandle>, body: Result<Json<PredictRequest>, JsonRejection>) -> ApiResult<PredictResponse> {
    let Json(req) = body?;
    Ok(Json(h.predict(&req)?))
}

async fn stream(State(h): State<MonitorHandle>) -> Sse<impl Stream<Item = Result<SseEvent, Infallible>>> {
    let rx = h.subscribe();
    let first = Some(h.current());
    let events = futures::stream::unfold((rx, first), |(mut rx, first)| async move {
        if let Some(state) = first {
            return Some((state_event(&state), (rx, None)));
        }
        loop {
            match rx.recv().await {
                Ok(state) => return Some((state_event(&state), (rx, None))),
                Err(RecvError::Lagged(n)) => tracing::warn!(skipped = n, "stream subscriber lagged"),
                Err(RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(events).keep_alive(KeepAlive::new().interval(Duration::from_secs(15)))
}

fn state_event(state: &SimState) -> Result<SseEvent, Infallible> {
    Ok(SseEvent::default()
        .event("state")
        .id(state.tick.to_string())
        .json_data(state)
        .expect("state serializes"))
}
