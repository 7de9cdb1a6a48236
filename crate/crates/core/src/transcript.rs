//! Transcript events and the line-oriented transcript file format.
//!
//! Every record is one JSON object per line with fields in the order
//! `turn, actor, kind, payload`. `turn` is the logical clock: the event's
//! index in the transcript. No wall-clock time is recorded.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::{ErrorKind, ExplanationTemplateSet};
use crate::intent::RuleSet;
use crate::loe::{DialogVariant, ExplanationLevel, Intent, TransitionRecord};
use crate::sim::{CubeId, RepairAction, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub enum Actor {
    Robot,
    User,
    System,
}

/// Everything needed to rebuild a session from scratch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SessionSetup {
    pub variant: DialogVariant,
    pub scenario: ScenarioConfig,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TransitionRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<ExplanationTemplateSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<RuleSet>,
}

impl SessionSetup {
    pub fn new(variant: DialogVariant, scenario: ScenarioConfig, seed: u64) -> Self {
        Self {
            variant,
            scenario,
            seed,
            table: None,
            templates: None,
            rules: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", content = "payload")]
pub enum EventBody {
    SessionStarted(Box<SessionSetup>),
    ErrorRaised {
        error: ErrorKind,
        cube_id: CubeId,
    },
    RobotUtterance {
        text: String,
        level: ExplanationLevel,
    },
    UserUtterance {
        text: String,
    },
    IntentClassified {
        intent: Intent,
    },
    Continue {},
    Repair {
        action: RepairAction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rejected: Option<String>,
    },
    Sorted {
        cube_id: CubeId,
        shelf: String,
    },
    SessionResolved {},
    SessionAbandoned {
        reason: String,
    },
    Fallback {
        text: String,
    },
}

impl EventBody {
    pub fn actor(&self) -> Actor {
        match self {
            EventBody::ErrorRaised { .. }
            | EventBody::RobotUtterance { .. }
            | EventBody::Sorted { .. }
            | EventBody::Fallback { .. } => Actor::Robot,
            EventBody::UserUtterance { .. } | EventBody::Continue {} | EventBody::Repair { .. } => Actor::User,
            EventBody::SessionStarted(_)
            | EventBody::IntentClassified { .. }
            | EventBody::SessionResolved {}
            | EventBody::SessionAbandoned { .. } => Actor::System,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            EventBody::SessionStarted(_) => "SessionStarted",
            EventBody::ErrorRaised { .. } => "ErrorRaised",
            EventBody::RobotUtterance { .. } => "RobotUtterance",
            EventBody::UserUtterance { .. } => "UserUtterance",
            EventBody::IntentClassified { .. } => "IntentClassified",
            EventBody::Continue {} => "Continue",
            EventBody::Repair { .. } => "Repair",
            EventBody::Sorted { .. } => "Sorted",
            EventBody::SessionResolved {} => "SessionResolved",
            EventBody::SessionAbandoned { .. } => "SessionAbandoned",
            EventBody::Fallback { .. } => "Fallback",
        }
    }

    /// Counts toward a session's user turns.
    pub fn is_user_turn(&self) -> bool {
        matches!(
            self,
            EventBody::UserUtterance { .. } | EventBody::Continue {} | EventBody::Repair { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct TranscriptEvent {
    pub turn: u64,
    pub actor: Actor,
    #[serde(flatten)]
    pub body: EventBody,
}

impl TranscriptEvent {
    pub fn new(turn: u64, body: EventBody) -> Self {
        Self {
            turn,
            actor: body.actor(),
            body,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

#[derive(Debug, Error)]
#[error("transcript line {line}: {source}")]
pub struct TranscriptParseError {
    pub line: usize,
    #[source]
    pub source: serde_json::Error,
}

pub fn to_jsonl(events: &[TranscriptEvent]) -> String {
    events.iter().map(|e| e.to_line() + "\n").collect()
}

pub fn parse_jsonl(text: &str) -> Result<Vec<TranscriptEvent>, TranscriptParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| TranscriptParseError { line: i + 1, source }))
        .collect()
}
