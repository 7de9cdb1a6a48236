//! Session registry. Each session sits behind its own mutex, which is the
//! serialization point for every mutating request; events are broadcast to
//! stream subscribers while that lock is held so streams see them in order.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use loebench_core::batch::Overrides;
use loebench_core::replay;
use loebench_core::transcript::{parse_jsonl, to_jsonl};
use loebench_core::{DialogSession, SessionError, SessionSetup, TranscriptEvent};
use tokio::sync::{broadcast, Mutex, RwLock};

use crate::error::ApiError;
use crate::wire::{ApiEvent, SessionHandle};

const STREAM_BUFFER: usize = 1024;

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    /// Defaults applied to sessions whose create request omits an override.
    pub defaults: Overrides,
    /// Where transcripts are persisted; sessions found here are restored on start.
    pub data_dir: Option<PathBuf>,
}

pub struct SessionEntry {
    pub handle: SessionHandle,
    pub session: Mutex<DialogSession>,
    pub events: broadcast::Sender<ApiEvent>,
}

pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<SessionEntry>>>,
    next_id: AtomicU64,
    pub config: ServerConfig,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            config,
        }
    }

    fn fresh_id(&self) -> String {
        format!("s{:06}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    pub fn apply_defaults(&self, mut setup: SessionSetup) -> SessionSetup {
        let d = &self.config.defaults;
        setup.table = setup.table.or_else(|| d.table.clone());
        setup.templates = setup.templates.or_else(|| d.templates.clone());
        setup.rules = setup.rules.or_else(|| d.rules.clone());
        setup
    }

    pub async fn create(&self, setup: SessionSetup) -> Result<SessionHandle, SessionError> {
        let id = self.fresh_id();
        let session = DialogSession::new(id.clone(), setup)?;
        let entry = self.register(session, now_ms());
        self.persist(&entry, &*entry.session.lock().await).await;
        let handle = entry.handle.clone();
        self.sessions.write().await.insert(id, entry);
        Ok(handle)
    }

    fn register(&self, session: DialogSession, created_at: u64) -> Arc<SessionEntry> {
        let setup = session.setup();
        let handle = SessionHandle {
            session_id: session.id().to_owned(),
            created_at,
            variant: setup.variant,
            scenario: setup.scenario.name(),
            seed: setup.seed,
        };
        let (events, _) = broadcast::channel(STREAM_BUFFER);
        Arc::new(SessionEntry {
            handle,
            session: Mutex::new(session),
            events,
        })
    }

    pub async fn get(&self, id: &str) -> Result<Arc<SessionEntry>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    pub async fn list(&self) -> Vec<SessionHandle> {
        let mut handles: Vec<_> = self.sessions.read().await.values().map(|e| e.handle.clone()).collect();
        handles.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        handles
    }

    /// Runs `op` under the session's lock and publishes whatever it appended.
    /// Events appended by a failing operation (a rejected repair) are
    /// published too.
    pub async fn mutate<F>(&self, id: &str, op: F) -> Result<Vec<ApiEvent>, ApiError>
    where
        F: FnOnce(&mut DialogSession) -> Result<Vec<TranscriptEvent>, SessionError>,
    {
        let entry = self.get(id).await?;
        let mut session = entry.session.lock().await;
        let mark = session.transcript().len();
        let result = op(&mut session);
        let appended: Vec<ApiEvent> = session.transcript()[mark..]
            .iter()
            .map(|e| ApiEvent::new(id, e.clone()))
            .collect();
        for e in &appended {
            // no subscribers is fine
            let _ = entry.events.send(e.clone());
        }
        if !appended.is_empty() {
            self.persist(&entry, &session).await;
        }
        match result {
            Ok(_) => Ok(appended),
            Err(e) => {
                let err = ApiError::from(e);
                Err(if appended.is_empty() {
                    err
                } else {
                    err.with_detail(serde_json::json!({ "events": appended }))
                })
            }
        }
    }

    async fn persist(&self, entry: &SessionEntry, session: &DialogSession) {
        let Some(dir) = &self.config.data_dir else {
            return;
        };
        let id = &entry.handle.session_id;
        let transcript = dir.join(format!("{id}.jsonl"));
        let handle = dir.join(format!("{id}.handle.json"));
        let handle_json = serde_json::to_string(&entry.handle).expect("handle serializes");
        if let Err(e) = tokio::fs::write(&transcript, to_jsonl(session.transcript())).await {
            tracing::warn!("persisting {}: {e}", transcript.display());
        }
        if let Err(e) = tokio::fs::write(&handle, handle_json).await {
            tracing::warn!("persisting {}: {e}", handle.display());
        }
    }

    /// Rebuilds every persisted session by replaying its transcript.
    /// Returns the number restored; transcripts that fail to replay are skipped.
    pub async fn restore(&self) -> std::io::Result<usize> {
        let Some(dir) = self.config.data_dir.clone() else {
            return Ok(0);
        };
        tokio::fs::create_dir_all(&dir).await?;
        let mut restored = 0;
        let mut max_id = 0;
        let mut rd = tokio::fs::read_dir(&dir).await?;
        while let Some(ent) = rd.next_entry().await? {
            let path = ent.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            let Some(id) = name.strip_suffix(".jsonl") else {
                continue;
            };
            let text = tokio::fs::read_to_string(&path).await?;
            let recorded = match parse_jsonl(&text) {
                Ok(r) => r,
                Err(e) => {
                    tracing::warn!("skipping {}: {e}", path.display());
                    continue;
                }
            };
            let session = match replay::rebuild(id, &recorded) {
                Ok(s) if replay::first_divergence(&recorded, s.transcript()).is_none() => s,
                Ok(_) => {
                    tracing::warn!("skipping {}: transcript does not replay", path.display());
                    continue;
                }
                Err(e) => {
                    tracing::warn!("skipping {}: {e}", path.display());
                    continue;
                }
            };
            let created_at = tokio::fs::read_to_string(dir.join(format!("{id}.handle.json")))
                .await
                .ok()
                .and_then(|s| serde_json::from_str::<SessionHandle>(&s).ok())
                .map_or_else(now_ms, |h| h.created_at);
            if let Some(n) = id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                max_id = max_id.max(n);
            }
            let entry = self.register(session, created_at);
            self.sessions.write().await.insert(id.to_owned(), entry);
            restored += 1;
        }
        self.next_id.fetch_max(max_id + 1, Ordering::Relaxed);
        Ok(restored)
    }
}
