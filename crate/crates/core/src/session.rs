//! A single error-explanation dialog session.
//!
//! The session steps the simulated robot until it halts on an error, opens a
//! dialog at the Low level, moves between levels as the user asks *what* and
//! *why* questions, and resumes the robot when the user presses continue. All
//! activity is appended to a logically clocked transcript.

use std::collections::{BTreeMap, BTreeSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::{self, ErrorKind, ExplanationTemplateSet, TemplateError};
use crate::intent::{self, RuleError, RuleSet, Utterance};
use crate::loe::{self, DialogVariant, ExplanationLevel, Intent, TableError, TransitionTable};
use crate::sim::{self, CubeId, RepairAction, RobotOutcome, SimError, WorldState};
use crate::transcript::{EventBody, SessionSetup, TranscriptEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum SessionStatus {
    Running,
    Resolved,
    Abandoned,
}

/// The open error dialog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct DialogState {
    pub error: ErrorKind,
    pub cube_id: CubeId,
    pub current_level: ExplanationLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("invalid transition table: {0}")]
    Table(#[from] TableError),
    #[error("invalid templates: {0}")]
    Templates(#[from] TemplateError),
    #[error("invalid rules: {0}")]
    Rules(#[from] RuleError),
    #[error("invalid scenario: {0}")]
    Scenario(SimError),
    #[error("session is {0:?}, not running")]
    NotRunning(SessionStatus),
    #[error("an error dialog is open; continue it first")]
    DialogOpen,
    #[error("no error dialog is open")]
    NoDialog,
    #[error("repair rejected: {0}")]
    RepairRejected(SimError),
    #[error("simulator contract violation: {0}")]
    Sim(SimError),
}

/// A user-side action, as produced by a scripted policy or a UI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum UserAction {
    Say { text: String },
    Continue,
    Repair { repair: RepairAction },
}

#[derive(Debug, Clone)]
pub struct DialogSession {
    id: String,
    variant: DialogVariant,
    world: WorldState,
    table: TransitionTable,
    templates: ExplanationTemplateSet,
    rules: RuleSet,
    dialog: Option<DialogState>,
    transcript: Vec<TranscriptEvent>,
    status: SessionStatus,
    user_turns: u32,
}

impl DialogSession {
    /// Validates every component, builds the world and records the setup as
    /// the transcript's first event. Does not step the robot.
    pub fn new(id: impl Into<String>, setup: SessionSetup) -> Result<Self, SessionError> {
        let variant = setup.variant;
        let table = match &setup.table {
            Some(records) => TransitionTable::from_records(variant, records)?,
            None => loe::default_transition_table(variant),
        };
        loe::validate_table(&table)?;
        let templates = setup.templates.clone().unwrap_or_default();
        templates.validate()?;
        let rules = setup.rules.clone().unwrap_or_default();
        rules.validate()?;
        let world = sim::new_world(&setup.scenario, setup.seed).map_err(SessionError::Scenario)?;
        let mut session = Self {
            id: id.into(),
            variant,
            world,
            table,
            templates,
            rules,
            dialog: None,
            transcript: Vec::new(),
            status: SessionStatus::Running,
            user_turns: 0,
        };
        session.emit(EventBody::SessionStarted(Box::new(setup)));
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn variant(&self) -> DialogVariant {
        self.variant
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn dialog(&self) -> Option<&DialogState> {
        self.dialog.as_ref()
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn transcript(&self) -> &[TranscriptEvent] {
        &self.transcript
    }

    pub fn setup(&self) -> &SessionSetup {
        match &self.transcript[0].body {
            EventBody::SessionStarted(s) => s,
            _ => unreachable!("first event is always SessionStarted"),
        }
    }

    pub fn logical_clock(&self) -> u64 {
        self.transcript.len() as u64
    }

    pub fn user_turns(&self) -> u32 {
        self.user_turns
    }

    fn emit(&mut self, body: EventBody) {
        if body.is_user_turn() {
            self.user_turns += 1;
        }
        let turn = self.logical_clock();
        self.transcript.push(TranscriptEvent::new(turn, body));
    }

    fn since(&self, mark: usize) -> Vec<TranscriptEvent> {
        self.transcript[mark..].to_vec()
    }

    fn require_running(&self) -> Result<(), SessionError> {
        match self.status {
            SessionStatus::Running => Ok(()),
            s => Err(SessionError::NotRunning(s)),
        }
    }

    fn say(&mut self, error: ErrorKind, level: ExplanationLevel) {
        let text = explain::render(error, level, &self.templates);
        self.emit(EventBody::RobotUtterance { text, level });
    }

    /// Steps the robot until it halts on an error or finishes the task.
    pub fn advance(&mut self) -> Result<Vec<TranscriptEvent>, SessionError> {
        self.require_running()?;
        if self.dialog.is_some() {
            return Err(SessionError::DialogOpen);
        }
        let mark = self.transcript.len();
        self.run_robot()?;
        Ok(self.since(mark))
    }

    fn run_robot(&mut self) -> Result<(), SessionError> {
        loop {
            match self.world.step().map_err(SessionError::Sim)? {
                RobotOutcome::Sorted { cube_id, shelf } => self.emit(EventBody::Sorted { cube_id, shelf }),
                RobotOutcome::ErrorRaised { kind, cube_id } => {
                    self.dialog = Some(DialogState {
                        error: kind,
                        cube_id,
                        current_level: ExplanationLevel::Low,
                    });
                    self.emit(EventBody::ErrorRaised { error: kind, cube_id });
                    self.say(kind, ExplanationLevel::Low);
                    return Ok(());
                }
                RobotOutcome::Done | RobotOutcome::NoChange => {
                    self.status = SessionStatus::Resolved;
                    self.emit(EventBody::SessionResolved {});
                    return Ok(());
                }
            }
        }
    }

    pub fn handle_utterance(&mut self, text: &str) -> Result<Vec<TranscriptEvent>, SessionError> {
        self.require_running()?;
        let Some(dialog) = self.dialog else {
            return Err(SessionError::NoDialog);
        };
        let mark = self.transcript.len();
        let intent = intent::classify(&Utterance::from(text), &self.rules);
        self.emit(EventBody::UserUtterance { text: text.to_owned() });
        self.emit(EventBody::IntentClassified { intent });
        match intent {
            Intent::What | Intent::Why => {
                let level = loe::next_level(&self.table, dialog.current_level, intent);
                self.dialog = Some(DialogState {
                    current_level: level,
                    ..dialog
                });
                self.say(dialog.error, level);
            }
            Intent::OutOfScope => {
                let text = explain::fallback_utterance(&self.templates).to_owned();
                self.emit(EventBody::Fallback { text });
            }
            Intent::Continue => self.resume()?,
        }
        Ok(self.since(mark))
    }

    /// The continue button. A no-op on a finished session.
    pub fn handle_continue(&mut self) -> Result<Vec<TranscriptEvent>, SessionError> {
        if self.status != SessionStatus::Running {
            return Ok(Vec::new());
        }
        let mark = self.transcript.len();
        self.emit(EventBody::Continue {});
        self.resume()?;
        Ok(self.since(mark))
    }

    // Closes any open dialog and lets the robot try again. If the fault was
    // not repaired the same cube re-raises its error and a fresh dialog opens
    // at Low.
    fn resume(&mut self) -> Result<(), SessionError> {
        self.dialog = None;
        self.world.resume();
        self.run_robot()
    }

    /// Applies a repair. Rejected repairs are still recorded.
    pub fn handle_repair(&mut self, action: RepairAction) -> Result<Vec<TranscriptEvent>, SessionError> {
        self.require_running()?;
        let mark = self.transcript.len();
        match self.world.apply_repair(&action) {
            Ok(()) => {
                self.emit(EventBody::Repair { action, rejected: None });
                Ok(self.since(mark))
            }
            Err(e) => {
                self.emit(EventBody::Repair {
                    action,
                    rejected: Some(e.to_string()),
                });
                Err(SessionError::RepairRejected(e))
            }
        }
    }

    pub fn abandon(&mut self, reason: &str) -> Result<Vec<TranscriptEvent>, SessionError> {
        self.require_running()?;
        let mark = self.transcript.len();
        self.status = SessionStatus::Abandoned;
        self.dialog = None;
        self.emit(EventBody::SessionAbandoned {
            reason: reason.to_owned(),
        });
        Ok(self.since(mark))
    }

    pub fn apply(&mut self, action: &UserAction) -> Result<Vec<TranscriptEvent>, SessionError> {
        match action {
            UserAction::Say { text } => self.handle_utterance(text),
            UserAction::Continue => self.handle_continue(),
            UserAction::Repair { repair } => self.handle_repair(repair.clone()),
        }
    }

    pub fn metrics(&self) -> SessionMetrics {
        metrics(&self.transcript)
    }
}

pub fn create_session(id: impl Into<String>, setup: SessionSetup) -> Result<DialogSession, SessionError> {
    DialogSession::new(id, setup)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SessionMetrics {
    pub resolved: bool,
    pub abandoned: bool,
    pub user_turns: u32,
    /// Maximal elements of `levels_reached` under the lattice order.
    pub max_level_reached: Vec<ExplanationLevel>,
    pub levels_reached: BTreeSet<ExplanationLevel>,
    pub level_counts: BTreeMap<ExplanationLevel, u32>,
    pub high_justification_responses: u32,
    pub fallback_count: u32,
    pub errors_encountered: Vec<ErrorKind>,
}

/// Pure fold over a transcript.
pub fn metrics(transcript: &[TranscriptEvent]) -> SessionMetrics {
    let mut m = SessionMetrics {
        resolved: false,
        abandoned: false,
        user_turns: 0,
        max_level_reached: Vec::new(),
        levels_reached: BTreeSet::new(),
        level_counts: BTreeMap::new(),
        high_justification_responses: 0,
        fallback_count: 0,
        errors_encountered: Vec::new(),
    };
    for e in transcript {
        if e.body.is_user_turn() {
            m.user_turns += 1;
        }
        match &e.body {
            EventBody::RobotUtterance { level, .. } => {
                m.levels_reached.insert(*level);
                *m.level_counts.entry(*level).or_default() += 1;
                if explain::is_justified(*level) {
                    m.high_justification_responses += 1;
                }
            }
            EventBody::Fallback { .. } => m.fallback_count += 1,
            EventBody::ErrorRaised { error, .. } => m.errors_encountered.push(*error),
            EventBody::SessionResolved {} => m.resolved = true,
            EventBody::SessionAbandoned { .. } => m.abandoned = true,
            _ => {}
        }
    }
    m.max_level_reached = loe::maximal_levels(&m.levels_reached);
    m
}
