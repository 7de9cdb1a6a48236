//! Request and response bodies, and the published JSON schemas for them.

use std::collections::BTreeMap;

use loebench_core::explain::ExplanationTemplateSet;
use loebench_core::intent::RuleSet;
use loebench_core::loe::TransitionRecord;
use loebench_core::session::{DialogState, SessionMetrics};
use loebench_core::sim::BuiltinScenario;
use loebench_core::{DialogVariant, RepairAction, ScenarioConfig, SessionStatus, TranscriptEvent, WorldState};
use schemars::{schema_for, JsonSchema, Schema};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ErrorBody};

/// A built-in scenario name or an inline scenario document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum ScenarioRef {
    Name(String),
    Config(ScenarioConfig),
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<ScenarioConfig, ApiError> {
        match self {
            ScenarioRef::Name(name) => BuiltinScenario::from_name(name)
                .map(ScenarioConfig::builtin)
                .ok_or_else(|| {
                    ApiError::bad_request(format!("unknown scenario `{name}`")).with_detail(serde_json::json!({
                        "known": BuiltinScenario::ALL.iter().map(|s| s.name()).collect::<Vec<_>>()
                    }))
                }),
            ScenarioRef::Config(c) => Ok(c.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    pub variant: DialogVariant,
    pub scenario: ScenarioRef,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub table: Option<Vec<TransitionRecord>>,
    #[serde(default)]
    pub templates: Option<ExplanationTemplateSet>,
    #[serde(default)]
    pub rules: Option<RuleSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SessionHandle {
    pub session_id: String,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    pub variant: DialogVariant,
    pub scenario: String,
    pub seed: u64,
}

/// A transcript event as seen on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ApiEvent {
    pub session_id: String,
    /// Per-session sequence number; equal to the event's logical turn.
    pub seq: u64,
    #[serde(flatten)]
    pub event: TranscriptEvent,
}

impl ApiEvent {
    pub fn new(session_id: &str, event: TranscriptEvent) -> Self {
        Self {
            session_id: session_id.to_owned(),
            seq: event.turn,
            event,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct EventsResponse {
    pub events: Vec<ApiEvent>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct UtteranceRequest {
    pub text: String,
}

pub type RepairRequest = RepairAction;

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct StateResponse {
    pub session: SessionHandle,
    pub status: SessionStatus,
    pub dialog: Option<DialogState>,
    pub world: WorldState,
    pub metrics: SessionMetrics,
    /// Sequence number the next event will carry.
    pub next_seq: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct SessionList {
    pub sessions: Vec<SessionHandle>,
}

/// JSON schemas for every request and response body, keyed by type name.
pub fn schemas() -> BTreeMap<&'static str, Schema> {
    BTreeMap::from([
        ("CreateSessionRequest", schema_for!(CreateSessionRequest)),
        ("SessionHandle", schema_for!(SessionHandle)),
        ("SessionList", schema_for!(SessionList)),
        ("UtteranceRequest", schema_for!(UtteranceRequest)),
        ("RepairRequest", schema_for!(RepairRequest)),
        ("EventsResponse", schema_for!(EventsResponse)),
        ("ApiEvent", schema_for!(ApiEvent)),
        ("StateResponse", schema_for!(StateResponse)),
        ("ErrorBody", schema_for!(ErrorBody)),
    ])
}
