//! Batch experiments: drive many seeded sessions with a scripted user and
//! aggregate their metrics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::explain::ExplanationTemplateSet;
use crate::intent::RuleSet;
use crate::loe::{DialogVariant, ExplanationLevel, TransitionRecord};
use crate::policy::{PolicyKind, ScriptedUserPolicy};
use crate::session::{DialogSession, SessionError, SessionMetrics, SessionStatus};
use crate::sim::ScenarioConfig;
use crate::transcript::{SessionSetup, TranscriptEvent};

pub const DEFAULT_TURN_CAP: u32 = 50;

/// Runs a session to termination: advances the robot if nothing has happened
/// yet, then lets `policy` act until the session resolves or `turn_cap` user
/// turns have been spent, at which point it is abandoned.
pub fn drive(session: &mut DialogSession, policy: &dyn ScriptedUserPolicy, turn_cap: u32) -> Result<(), SessionError> {
    if session.transcript().len() == 1 {
        session.advance()?;
    }
    while session.status() == SessionStatus::Running {
        if session.user_turns() >= turn_cap {
            session.abandon("turn cap reached")?;
            break;
        }
        let action = policy.decide(session.transcript(), session.world());
        match session.apply(&action) {
            Ok(_) | Err(SessionError::RepairRejected(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Component overrides shared by every session in a batch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub table: Option<Vec<TransitionRecord>>,
    pub templates: Option<ExplanationTemplateSet>,
    pub rules: Option<RuleSet>,
}

impl Overrides {
    pub fn setup(&self, variant: DialogVariant, scenario: ScenarioConfig, seed: u64) -> SessionSetup {
        SessionSetup {
            table: self.table.clone(),
            templates: self.templates.clone(),
            rules: self.rules.clone(),
            ..SessionSetup::new(variant, scenario, seed)
        }
    }
}

/// How simulated participants are assigned to dialog variants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// Every participant seed runs under every variant.
    #[default]
    Within,
    /// Participant `i` runs only under `variants[i % variants.len()]`.
    Between,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub policies: Vec<PolicyKind>,
    pub variants: Vec<DialogVariant>,
    pub scenarios: Vec<ScenarioConfig>,
    /// Participants per (policy, scenario).
    pub n: usize,
    pub seed: u64,
    pub turn_cap: u32,
    pub assignment: Assignment,
    pub overrides: Overrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub variant: DialogVariant,
    pub policy: String,
    pub scenario: String,
    pub n: usize,
    pub resolved: usize,
    pub abandoned: usize,
    pub resolution_rate: f64,
    pub mean_turns: f64,
    /// Number of sessions in which each level was reached at least once.
    pub level_distribution: BTreeMap<ExplanationLevel, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionRecord {
    pub seed: u64,
    pub variant: DialogVariant,
    pub status: SessionStatus,
    pub metrics: SessionMetrics,
    #[serde(skip)]
    pub transcript: Vec<TranscriptEvent>,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub row: BatchRow,
    pub sessions: Vec<SessionRecord>,
}

fn run_one(
    policy: PolicyKind,
    variant: DialogVariant,
    scenario: &ScenarioConfig,
    seed: u64,
    turn_cap: u32,
    overrides: &Overrides,
) -> Result<SessionRecord, SessionError> {
    let mut session = DialogSession::new(
        format!("{variant}-{policy}-{seed}"),
        overrides.setup(variant, scenario.clone(), seed),
    )?;
    drive(&mut session, policy.build(seed).as_ref(), turn_cap)?;
    Ok(SessionRecord {
        seed,
        variant,
        status: session.status(),
        metrics: session.metrics(),
        transcript: session.transcript().to_vec(),
    })
}

fn aggregate(
    policy: PolicyKind,
    variant: DialogVariant,
    scenario: &ScenarioConfig,
    sessions: &[SessionRecord],
) -> BatchRow {
    let n = sessions.len();
    let resolved = sessions.iter().filter(|s| s.metrics.resolved).count();
    let abandoned = sessions.iter().filter(|s| s.status == SessionStatus::Abandoned).count();
    let total_turns: u64 = sessions.iter().map(|s| u64::from(s.metrics.user_turns)).sum();
    let mut level_distribution: BTreeMap<ExplanationLevel, usize> =
        ExplanationLevel::ALL.iter().map(|&l| (l, 0)).collect();
    for s in sessions {
        for l in &s.metrics.levels_reached {
            *level_distribution.entry(*l).or_default() += 1;
        }
    }
    let ratio = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
    BatchRow {
        variant,
        policy: policy.name().to_owned(),
        scenario: scenario.name(),
        n,
        resolved,
        abandoned,
        resolution_rate: ratio(resolved as f64),
        mean_turns: ratio(total_turns as f64),
        level_distribution,
    }
}

/// Runs `n` sessions with seeds `seed..seed + n`.
pub fn run_batch(
    policy: PolicyKind,
    variant: DialogVariant,
    scenario: &ScenarioConfig,
    n: usize,
    seed: u64,
    turn_cap: u32,
    overrides: &Overrides,
) -> Result<BatchResult, SessionError> {
    assert!(n >= 1, "a batch needs at least one session");
    let sessions = (0..n as u64)
        .map(|i| run_one(policy, variant, scenario, seed + i, turn_cap, overrides))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BatchResult {
        row: aggregate(policy, variant, scenario, &sessions),
        sessions,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchReport {
    pub assignment: Assignment,
    pub seed: u64,
    pub turn_cap: u32,
    pub rows: Vec<BatchRow>,
    pub sessions: Vec<SessionRecord>,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<BatchReport, SessionError> {
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for &policy in &spec.policies {
        for scenario in &spec.scenarios {
            let mut by_variant: BTreeMap<DialogVariant, Vec<SessionRecord>> = BTreeMap::new();
            for i in 0..spec.n as u64 {
                let seed = spec.seed + i;
                let variants: Vec<DialogVariant> = match spec.assignment {
                    Assignment::Within => spec.variants.clone(),
                    Assignment::Between => vec![spec.variants[i as usize % spec.variants.len()]],
                };
                for variant in variants {
                    let rec = run_one(policy, variant, scenario, seed, spec.turn_cap, &spec.overrides)?;
                    by_variant.entry(variant).or_default().push(rec);
                }
            }
            for variant in &spec.variants {
                let sessions = by_variant.remove(variant).unwrap_or_default();
                rows.push(aggregate(policy, *variant, scenario, &sessions));
                all.extend(sessions);
            }
        }
    }
    Ok(BatchReport {
        assignment: spec.assignment,
        seed: spec.seed,
        turn_cap: spec.turn_cap,
        rows,
        sessions: all,
    })
}

impl fmt::Display for BatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:<18} {:<18} {:>4} {:>9} {:>10} {:>10}  levels (Low/M1/M2/High)",
            "variant", "policy", "scenario", "n", "resolved", "rate", "mean_turns"
        )?;
        for r in &self.rows {
            let lv: Vec<String> = ExplanationLevel::ALL
                .iter()
                .map(|l| r.level_distribution.get(l).copied().unwrap_or(0).to_string())
                .collect();
            writeln!(
                f,
                "{:<8} {:<18} {:<18} {:>4} {:>9} {:>10.3} {:>10.2}  {}",
                r.variant.to_string(),
                r.policy,
                r.scenario,
                r.n,
                r.resolved,
                r.resolution_rate,
                r.mean_turns,
                lv.join("/")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::BuiltinScenario;

    fn sc(s: BuiltinScenario) -> ScenarioConfig {
        ScenarioConfig::builtin(s)
    }

    #[test]
    fn what_why_repair_resolves_mixed_errors() {
        for v in DialogVariant::ALL {
            let r = run_batch(
                PolicyKind::WhatWhyRepairUser,
                v,
                &sc(BuiltinScenario::BothRandomOrder),
                10,
                1,
                DEFAULT_TURN_CAP,
                &Overrides::default(),
            )
            .unwrap();
            assert_eq!(r.row.resolution_rate, 1.0, "{v}");
        }
    }

    #[test]
    fn continue_only_hits_cap() {
        let r = run_batch(
            PolicyKind::ContinueOnlyUser,
            DialogVariant::AD2,
            &sc(BuiltinScenario::OutOfRange),
            10,
            1,
            DEFAULT_TURN_CAP,
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(r.row.resolution_rate, 0.0);
        assert_eq!(r.row.abandoned, 10);
        assert!(r.sessions.iter().all(|s| s.metrics.user_turns == DEFAULT_TURN_CAP));
    }

    #[test]
    fn ad2_reaches_high_every_session() {
        let r = run_batch(
            PolicyKind::WhatWhyRepairUser,
            DialogVariant::AD2,
            &sc(BuiltinScenario::BothRandomOrder),
            10,
            1,
            DEFAULT_TURN_CAP,
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(r.row.level_distribution[&ExplanationLevel::High], 10);
    }

    #[test]
    fn chatty_resolves_with_fallbacks() {
        let r = run_batch(
            PolicyKind::ChattyUser,
            DialogVariant::AD1,
            &sc(BuiltinScenario::IncorrectItem),
            5,
            3,
            DEFAULT_TURN_CAP,
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(r.row.resolved, 5);
        assert!(r.sessions.iter().all(|s| s.metrics.fallback_count == 2));
    }

    #[test]
    fn what_only_never_repairs() {
        let r = run_batch(
            PolicyKind::WhatOnlyUser,
            DialogVariant::AD2,
            &sc(BuiltinScenario::IncorrectItem),
            3,
            0,
            20,
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(r.row.resolved, 0);
        assert_eq!(r.row.abandoned, 3);
    }

    #[test]
    fn between_subject_split() {
        let spec = ExperimentSpec {
            policies: vec![PolicyKind::WhatWhyRepairUser],
            variants: vec![DialogVariant::AD1, DialogVariant::AD2],
            scenarios: vec![sc(BuiltinScenario::BothRandomOrder)],
            n: 10,
            seed: 0,
            turn_cap: DEFAULT_TURN_CAP,
            assignment: Assignment::Between,
            overrides: Overrides::default(),
        };
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.n == 5));
        let within = run_experiment(&ExperimentSpec {
            assignment: Assignment::Within,
            ..spec
        })
        .unwrap();
        assert!(within.rows.iter().all(|r| r.n == 10));
        assert!(within.to_string().contains("WhatWhyRepairUser"));
    }
}
