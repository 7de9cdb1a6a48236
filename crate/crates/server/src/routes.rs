//! HTTP handlers. All routes live under `/sessions`.

use std::convert::Infallible;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use loebench_core::transcript::to_jsonl;
use loebench_core::SessionSetup;
use serde::Deserialize;
use tokio::sync::broadcast::error::RecvError;

use crate::error::{ApiError, ApiJson};
use crate::state::AppState;
use crate::wire::{
    schemas, ApiEvent, CreateSessionRequest, EventsResponse, RepairRequest, SessionHandle, SessionList, StateResponse,
    UtteranceRequest,
};

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/schemas", get(get_schemas))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/utterances", post(post_utterance))
        .route("/sessions/{id}/continue", post(post_continue))
        .route("/sessions/{id}/repairs", post(post_repair))
        .route("/sessions/{id}/transcript", get(get_transcript))
        .route("/sessions/{id}/events", get(events_stream))
        .with_state(state)
}

async fn create_session(
    State(state): State<Shared>,
    ApiJson(req): ApiJson<CreateSessionRequest>,
) -> Result<(StatusCode, Json<SessionHandle>), ApiError> {
    let scenario = req.scenario.resolve()?;
    let setup = state.apply_defaults(SessionSetup {
        table: req.table,
        templates: req.templates,
        rules: req.rules,
        ..SessionSetup::new(req.variant, scenario, req.seed)
    });
    let handle = state.create(setup).await?;
    tracing::info!(session = %handle.session_id, variant = %handle.variant, scenario = %handle.scenario, "session created");
    Ok((StatusCode::CREATED, Json(handle)))
}

async fn list_sessions(State(state): State<Shared>) -> Json<SessionList> {
    Json(SessionList {
        sessions: state.list().await,
    })
}

async fn get_schemas() -> impl IntoResponse {
    Json(schemas())
}

async fn get_state(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<StateResponse>, ApiError> {
    let entry = state.get(&id).await?;
    let s = entry.session.lock().await;
    Ok(Json(StateResponse {
        session: entry.handle.clone(),
        status: s.status(),
        dialog: s.dialog().copied(),
        world: s.world().clone(),
        metrics: s.metrics(),
        next_seq: s.logical_clock(),
    }))
}

async fn advance(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<EventsResponse>, ApiError> {
    let events = state.mutate(&id, |s| s.advance()).await?;
    Ok(Json(EventsResponse { events }))
}

async fn post_utterance(
    State(state): State<Shared>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<UtteranceRequest>,
) -> Result<Json<EventsResponse>, ApiError> {
    let events = state.mutate(&id, |s| s.handle_utterance(&req.text)).await?;
    Ok(Json(EventsResponse { events }))
}

async fn post_continue(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<EventsResponse>, ApiError> {
    let events = state.mutate(&id, |s| s.handle_continue()).await?;
    Ok(Json(EventsResponse { events }))
}

async fn post_repair(
    State(state): State<Shared>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<RepairRequest>,
) -> Result<Json<EventsResponse>, ApiError> {
    let events = state.mutate(&id, |s| s.handle_repair(req)).await?;
    Ok(Json(EventsResponse { events }))
}

async fn get_transcript(State(state): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let entry = state.get(&id).await?;
    let body = to_jsonl(entry.session.lock().await.transcript());
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body))
}

#[derive(Debug, Deserialize)]
struct StreamQuery {
    from: Option<u64>,
}

fn sse_event(e: &ApiEvent) -> Event {
    Event::default()
        .id(e.seq.to_string())
        .event(e.event.body.kind_name())
        .data(serde_json::to_string(e).expect("events serialize"))
}

/// Replays events with `seq >= from` and then follows the live tail. A
/// `Last-Event-ID` header resumes after that id and wins over `?from=`.
async fn events_stream(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<StreamQuery>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let resume_after = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.parse::<u64>().ok());
    let from = resume_after.map_or(q.from.unwrap_or(0), |n| n + 1);

    let entry = state.get(&id).await?;
    let (backlog, rx) = {
        let s = entry.session.lock().await;
        let rx = entry.events.subscribe();
        let backlog: Vec<ApiEvent> = s
            .transcript()
            .iter()
            .skip(usize::try_from(from).unwrap_or(usize::MAX))
            .map(|e| ApiEvent::new(&id, e.clone()))
            .collect();
        (backlog, rx)
    };
    let next = backlog.last().map_or(from, |e| e.seq + 1);

    let live = stream::unfold((rx, next), |(mut rx, next)| async move {
        loop {
            match rx.recv().await {
                Ok(e) if e.seq < next => continue,
                Ok(e) => return Some((e.clone(), (rx, e.seq + 1))),
                // lagging subscribers are dropped; they reconnect with Last-Event-ID
                Err(RecvError::Lagged(_)) | Err(RecvError::Closed) => return None,
            }
        }
    });
    let events = stream::iter(backlog).chain(live).map(|e| Ok(sse_event(&e)));
    Ok(Sse::new(events).keep_alive(KeepAlive::default().interval(Duration::from_secs(15))))
}
