//! Scripted users that stand in for study participants.
//!
//! A policy is a deterministic function of the visible transcript, the world
//! and its own seed. Policies keep no state between calls; everything they
//! need is read back from the events since the most recent error.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::loe::Intent;
use crate::session::UserAction;
use crate::sim::{CubeId, GridPos, RepairAction, WorldState};
use crate::transcript::{EventBody, TranscriptEvent};

pub const WHAT_PHRASES: [&str; 4] = [
    "What is the error",
    "What is the mistake with this",
    "what went wrong?",
    "Tell me the error please",
];

pub const WHY_PHRASES: [&str; 4] = [
    "Why are you not able to reach the cube",
    "Why are you not able to place the cube",
    "why has the error occurred?",
    "What is the reason for this error",
];

pub const SMALL_TALK: [&str; 3] = ["hello robot nice weather", "sing me a song", "I like your arm"];

pub trait ScriptedUserPolicy: Send + Sync {
    fn name(&self) -> &'static str;

    fn decide(&self, transcript: &[TranscriptEvent], world: &WorldState) -> UserAction;
}

/// What the user has done since the robot last raised an error.
#[derive(Debug, Default)]
struct ErrorEpisode<'a> {
    cube_id: Option<CubeId>,
    asked_what: bool,
    asked_why: bool,
    repaired: bool,
    last_intent: Option<Intent>,
    last_robot_text: Option<&'a str>,
}

fn current_episode(transcript: &[TranscriptEvent]) -> ErrorEpisode<'_> {
    let start = transcript
        .iter()
        .rposition(|e| matches!(e.body, EventBody::ErrorRaised { .. }))
        .unwrap_or(transcript.len());
    let mut ep = ErrorEpisode::default();
    for e in &transcript[start..] {
        match &e.body {
            EventBody::ErrorRaised { cube_id, .. } => ep.cube_id = Some(*cube_id),
            EventBody::IntentClassified { intent } => {
                ep.last_intent = Some(*intent);
                match intent {
                    Intent::What => ep.asked_what = true,
                    Intent::Why => ep.asked_why = true,
                    _ => {}
                }
            }
            EventBody::Repair { rejected: None, .. } => ep.repaired = true,
            EventBody::RobotUtterance { text, .. } => ep.last_robot_text = Some(text),
            _ => {}
        }
    }
    ep
}

fn turn_rng(seed: u64, transcript: &[TranscriptEvent]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (transcript.len() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn pick(seed: u64, transcript: &[TranscriptEvent], phrases: &[&str]) -> UserAction {
    let text = phrases.choose(&mut turn_rng(seed, transcript)).expect("non-empty");
    UserAction::Say {
        text: (*text).to_owned(),
    }
}

/// The reach-region center, or the free reachable cell closest to it.
pub fn reach_target(world: &WorldState, cube: CubeId) -> Option<GridPos> {
    let center = world.reach_region.center();
    let free = |p: GridPos| world.cube_at(p).is_none_or(|c| c.id == cube);
    world.reach_region.cells().filter(|&p| free(p)).min_by_key(|p| {
        let dx = i64::from(p.x) - i64::from(center.x);
        let dy = i64::from(p.y) - i64::from(center.y);
        (dx * dx + dy * dy, p.y, p.x)
    })
}

/// Reads the remedy out of a robot utterance and turns it into a repair.
pub fn repair_from_remedy(text: &str, cube: CubeId, world: &WorldState) -> Option<RepairAction> {
    let lower = text.to_lowercase();
    if lower.contains("swap") {
        let qr = world.qr_database.keys().next()?;
        Some(RepairAction::SwapCube {
            cube_id: cube,
            new_qr: qr.clone(),
        })
    } else if lower.contains("move it inside") {
        Some(RepairAction::MoveCube {
            cube_id: cube,
            new_position: reach_target(world, cube)?,
        })
    } else {
        None
    }
}

/// Presses continue, every time.
#[derive(Debug, Clone, Copy)]
pub struct ContinueOnlyUser;

impl ScriptedUserPolicy for ContinueOnlyUser {
    fn name(&self) -> &'static str {
        "ContinueOnlyUser"
    }

    fn decide(&self, _: &[TranscriptEvent], _: &WorldState) -> UserAction {
        UserAction::Continue
    }
}

/// Asks what, then why, performs the remedy the robot named, then continues.
#[derive(Debug, Clone, Copy)]
pub struct WhatWhyRepairUser {
    pub seed: u64,
}

fn what_why_repair(seed: u64, transcript: &[TranscriptEvent], world: &WorldState, chatty: bool) -> UserAction {
    let ep = current_episode(transcript);
    let Some(cube) = ep.cube_id else {
        return UserAction::Continue;
    };
    let question = if !ep.asked_what {
        Some(&WHAT_PHRASES[..])
    } else if !ep.asked_why {
        Some(&WHY_PHRASES[..])
    } else {
        None
    };
    if let Some(phrases) = question {
        if chatty && ep.last_intent != Some(Intent::OutOfScope) {
            return pick(seed, transcript, &SMALL_TALK);
        }
        return pick(seed, transcript, phrases);
    }
    if !ep.repaired {
        if let Some(repair) = ep.last_robot_text.and_then(|t| repair_from_remedy(t, cube, world)) {
            return UserAction::Repair { repair };
        }
    }
    UserAction::Continue
}

impl ScriptedUserPolicy for WhatWhyRepairUser {
    fn name(&self) -> &'static str {
        "WhatWhyRepairUser"
    }

    fn decide(&self, transcript: &[TranscriptEvent], world: &WorldState) -> UserAction {
        what_why_repair(self.seed, transcript, world, false)
    }
}

/// Like [`WhatWhyRepairUser`] but makes small talk before every question.
#[derive(Debug, Clone, Copy)]
pub struct ChattyUser {
    pub seed: u64,
}

impl ScriptedUserPolicy for ChattyUser {
    fn name(&self) -> &'static str {
        "ChattyUser"
    }

    fn decide(&self, transcript: &[TranscriptEvent], world: &WorldState) -> UserAction {
        what_why_repair(self.seed, transcript, world, true)
    }
}

/// Asks what once per error, then only continues.
#[derive(Debug, Clone, Copy)]
pub struct WhatOnlyUser {
    pub seed: u64,
}

impl ScriptedUserPolicy for WhatOnlyUser {
    fn name(&self) -> &'static str {
        "WhatOnlyUser"
    }

    fn decide(&self, transcript: &[TranscriptEvent], _: &WorldState) -> UserAction {
        let ep = current_episode(transcript);
        if ep.cube_id.is_some() && !ep.asked_what {
            pick(self.seed, transcript, &WHAT_PHRASES)
        } else {
            UserAction::Continue
        }
    }
}

/// Uniformly random actions, including wrong QR swaps and arbitrary moves.
#[derive(Debug, Clone, Copy)]
pub struct RandomUser {
    pub seed: u64,
}

impl ScriptedUserPolicy for RandomUser {
    fn name(&self) -> &'static str {
        "RandomUser"
    }

    fn decide(&self, transcript: &[TranscriptEvent], world: &WorldState) -> UserAction {
        let mut rng = turn_rng(self.seed, transcript);
        let say = |rng: &mut ChaCha8Rng, list: &[&str]| UserAction::Say {
            text: (*list.choose(rng).expect("non-empty")).to_owned(),
        };
        let cube = world
            .unsorted()
            .map(|c| c.id)
            .collect::<Vec<_>>()
            .choose(&mut rng)
            .copied()
            .unwrap_or(0);
        match rng.random_range(0..6) {
            0 => say(&mut rng, &WHAT_PHRASES),
            1 => say(&mut rng, &WHY_PHRASES),
            2 => say(&mut rng, &SMALL_TALK),
            3 => {
                let mut qrs: Vec<&str> = world.qr_database.keys().map(String::as_str).collect();
                qrs.push("X9");
                UserAction::Repair {
                    repair: RepairAction::SwapCube {
                        cube_id: cube,
                        new_qr: (*qrs.choose(&mut rng).expect("non-empty")).to_owned(),
                    },
                }
            }
            4 => UserAction::Repair {
                repair: RepairAction::MoveCube {
                    cube_id: cube,
                    new_position: GridPos::new(
                        rng.random_range(0..=world.table_extent.width),
                        rng.random_range(0..=world.table_extent.height),
                    ),
                },
            },
            _ => UserAction::Continue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    ContinueOnlyUser,
    WhatWhyRepairUser,
    WhatOnlyUser,
    ChattyUser,
    RandomUser,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::ContinueOnlyUser,
        PolicyKind::WhatWhyRepairUser,
        PolicyKind::WhatOnlyUser,
        PolicyKind::ChattyUser,
        PolicyKind::RandomUser,
    ];

    pub fn build(self, seed: u64) -> Box<dyn ScriptedUserPolicy> {
        match self {
            PolicyKind::ContinueOnlyUser => Box::new(ContinueOnlyUser),
            PolicyKind::WhatWhyRepairUser => Box::new(WhatWhyRepairUser { seed }),
            PolicyKind::WhatOnlyUser => Box::new(WhatOnlyUser { seed }),
            PolicyKind::ChattyUser => Box::new(ChattyUser { seed }),
            PolicyKind::RandomUser => Box::new(RandomUser { seed }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::ContinueOnlyUser => "ContinueOnlyUser",
            PolicyKind::WhatWhyRepairUser => "WhatWhyRepairUser",
            PolicyKind::WhatOnlyUser => "WhatOnlyUser",
            PolicyKind::ChattyUser => "ChattyUser",
            PolicyKind::RandomUser => "RandomUser",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            format!("unknown policy `{s}` (known: {})", known.join(", "))
        })
    }
}
