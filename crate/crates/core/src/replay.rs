//! Transcript replay: rebuild a session from its recorded setup, re-issue the
//! recorded user actions and compare the regenerated transcript line by line.

use std::fmt;

use thiserror::Error;

use crate::session::{DialogSession, SessionError};
use crate::transcript::{EventBody, TranscriptEvent};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// Zero-based index of the first differing record.
    pub index: usize,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "first divergence at record {} (line {})", self.index, self.index + 1)?;
        writeln!(
            f,
            "- expected: {}",
            self.expected.as_deref().unwrap_or("<end of transcript>")
        )?;
        write!(
            f,
            "+ actual:   {}",
            self.actual.as_deref().unwrap_or("<end of transcript>")
        )
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("transcript is empty")]
    Empty,
    #[error("first record is not SessionStarted")]
    MissingSetup,
    #[error("recorded setup is invalid: {0}")]
    Setup(#[from] SessionError),
}

/// Re-runs the recorded actions and returns the regenerated transcript.
pub fn regenerate(recorded: &[TranscriptEvent]) -> Result<Vec<TranscriptEvent>, ReplayError> {
    Ok(rebuild("replay", recorded)?.transcript().to_vec())
}

/// Rebuilds a live session by re-issuing the recorded actions. The result
/// may differ from `recorded` if the recording diverges; check with
/// [`first_divergence`].
pub fn rebuild(id: &str, recorded: &[TranscriptEvent]) -> Result<DialogSession, ReplayError> {
    let first = recorded.first().ok_or(ReplayError::Empty)?;
    let EventBody::SessionStarted(setup) = &first.body else {
        return Err(ReplayError::MissingSetup);
    };
    let mut session = DialogSession::new(id, (**setup).clone())?;
    while session.transcript().len() < recorded.len() {
        let i = session.transcript().len();
        let result = match &recorded[i].body {
            EventBody::UserUtterance { text } => session.handle_utterance(text),
            EventBody::Continue {} => session.handle_continue(),
            EventBody::Repair { action, .. } => match session.handle_repair(action.clone()) {
                Err(SessionError::RepairRejected(_)) => Ok(Vec::new()),
                other => other,
            },
            EventBody::SessionAbandoned { reason } => session.abandon(reason),
            // Any other record at an action boundary came from the robot running.
            _ => session.advance(),
        };
        if result.is_err() || session.transcript().len() == i {
            break;
        }
    }
    Ok(session)
}

/// `Ok(None)` when the replay matches byte-exact.
pub fn verify(recorded: &[TranscriptEvent]) -> Result<Option<Divergence>, ReplayError> {
    let regenerated = regenerate(recorded)?;
    Ok(first_divergence(recorded, &regenerated))
}

pub fn first_divergence(expected: &[TranscriptEvent], actual: &[TranscriptEvent]) -> Option<Divergence> {
    let n = expected.len().max(actual.len());
    (0..n).find_map(|i| {
        let e = expected.get(i).map(TranscriptEvent::to_line);
        let a = actual.get(i).map(TranscriptEvent::to_line);
        (e != a).then_some(Divergence {
            index: i,
            expected: e,
            actual: a,
        })
    })
}

/// Compares raw transcript file text against the canonical encoding of its
/// replay, so formatting drift in the file also counts as divergence.
pub fn verify_text(text: &str) -> Result<Option<Divergence>, VerifyTextError> {
    let recorded = crate::transcript::parse_jsonl(text)?;
    let regenerated = regenerate(&recorded)?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let n = lines.len().max(regenerated.len());
    Ok((0..n).find_map(|i| {
        let e = lines.get(i).map(|s| (*s).to_owned());
        let a = regenerated.get(i).map(TranscriptEvent::to_line);
        (e != a).then_some(Divergence {
            index: i,
            expected: e,
            actual: a,
        })
    }))
}

#[derive(Debug, Error)]
pub enum VerifyTextError {
    #[error(transparent)]
    Parse(#[from] crate::transcript::TranscriptParseError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}
