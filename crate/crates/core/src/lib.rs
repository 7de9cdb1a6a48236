//! Adaptive explanation dialogs for a simulated sorting robot.
//!
//! The robot explains its errors at one of four levels of explanation
//! ([`loe::ExplanationLevel`]) and moves between them as the user asks
//! *what* went wrong and *why*. [`session::DialogSession`] ties the dialog
//! policy, the intent rules, the explanation templates and the task
//! simulator together; [`batch`] drives sessions with scripted users.

pub mod batch;
pub mod config;
pub mod explain;
pub mod intent;
pub mod loe;
pub mod policy;
pub mod replay;
pub mod session;
pub mod sim;
pub mod transcript;

pub use explain::ErrorKind;
pub use loe::{DialogVariant, ExplanationLevel, Intent};
pub use session::{DialogSession, SessionError, SessionStatus, UserAction};
pub use sim::{RepairAction, ScenarioConfig, WorldState};
pub use transcript::{EventBody, SessionSetup, TranscriptEvent};
