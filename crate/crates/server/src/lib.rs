//! HTTP API over dialog sessions.
//!
//! JSON request/response bodies under `/sessions`, plus a server-sent-events
//! stream per session at `/sessions/{id}/events`. Streams carry the event's
//! sequence number as the SSE `id`, so a client that reconnects with
//! `Last-Event-ID` (or `?from=<seq>`) resumes without gaps.

pub mod error;
pub mod routes;
pub mod state;
pub mod wire;

use std::net::SocketAddr;
use std::sync::Arc;

pub use routes::router;
pub use state::{AppState, ServerConfig};

/// Binds `addr`, restores persisted sessions and serves until ctrl-c.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config));
    let restored = state.restore().await?;
    if restored > 0 {
        tracing::info!("restored {restored} sessions");
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
