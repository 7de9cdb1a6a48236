//! Levels of explanation and the adaptive dialog transition tables.
//!
//! An [`ExplanationLevel`] is a point in the 2x2 lattice formed by a
//! verbosity axis (*what* the robot says) and a justification axis (*why*
//! it happened). A [`TransitionTable`] maps the current level and a user
//! question to the next level; the two built-in tables are the AD1 and AD2
//! dialog variants.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub enum VerbosityLevel {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub enum JustificationLevel {
    Low,
    High,
}

/// One of the four levels of explanation.
///
/// The derived `Ord` is declaration order and only exists so levels can key
/// ordered collections. The explanation lattice itself is a product order in
/// which `Medium1` and `Medium2` are incomparable; see [`ExplanationLevel::lattice_cmp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub enum ExplanationLevel {
    Low,
    Medium1,
    Medium2,
    High,
}

impl ExplanationLevel {
    pub const ALL: [ExplanationLevel; 4] = [
        ExplanationLevel::Low,
        ExplanationLevel::Medium1,
        ExplanationLevel::Medium2,
        ExplanationLevel::High,
    ];

    pub fn components(self) -> (VerbosityLevel, JustificationLevel) {
        use JustificationLevel as J;
        use VerbosityLevel as V;
        match self {
            ExplanationLevel::Low => (V::Low, J::Low),
            ExplanationLevel::Medium1 => (V::High, J::Low),
            ExplanationLevel::Medium2 => (V::Low, J::High),
            ExplanationLevel::High => (V::High, J::High),
        }
    }

    pub fn from_components(verbosity: VerbosityLevel, justification: JustificationLevel) -> Self {
        use JustificationLevel as J;
        use VerbosityLevel as V;
        match (verbosity, justification) {
            (V::Low, J::Low) => ExplanationLevel::Low,
            (V::High, J::Low) => ExplanationLevel::Medium1,
            (V::Low, J::High) => ExplanationLevel::Medium2,
            (V::High, J::High) => ExplanationLevel::High,
        }
    }

    pub fn verbosity(self) -> VerbosityLevel {
        self.components().0
    }

    pub fn justification(self) -> JustificationLevel {
        self.components().1
    }

    /// Product-order comparison on (verbosity, justification). Returns `None`
    /// for `Medium1` vs `Medium2`.
    pub fn lattice_cmp(self, other: Self) -> Option<Ordering> {
        let (v1, j1) = self.components();
        let (v2, j2) = other.components();
        match (v1.cmp(&v2), j1.cmp(&j2)) {
            (a, b) if a == b => Some(a),
            (Ordering::Equal, b) => Some(b),
            (a, Ordering::Equal) => Some(a),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExplanationLevel::Low => "Low",
            ExplanationLevel::Medium1 => "Medium1",
            ExplanationLevel::Medium2 => "Medium2",
            ExplanationLevel::High => "High",
        }
    }
}

impl fmt::Display for ExplanationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maximal elements of a set of levels under the lattice order.
pub fn maximal_levels(levels: &BTreeSet<ExplanationLevel>) -> Vec<ExplanationLevel> {
    levels
        .iter()
        .copied()
        .filter(|&x| !levels.iter().any(|&y| x.lattice_cmp(y) == Some(Ordering::Less)))
        .collect()
}

pub fn loe_components(level: ExplanationLevel) -> (VerbosityLevel, JustificationLevel) {
    level.components()
}

pub fn loe_from_components(v: VerbosityLevel, j: JustificationLevel) -> ExplanationLevel {
    ExplanationLevel::from_components(v, j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub enum DialogVariant {
    AD1,
    AD2,
}

impl DialogVariant {
    pub const ALL: [DialogVariant; 2] = [DialogVariant::AD1, DialogVariant::AD2];
}

impl fmt::Display for DialogVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DialogVariant::AD1 => "AD1",
            DialogVariant::AD2 => "AD2",
        })
    }
}

impl FromStr for DialogVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AD1" => Ok(DialogVariant::AD1),
            "AD2" => Ok(DialogVariant::AD2),
            other => Err(format!("unknown variant `{other}`, expected `AD1` or `AD2`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub enum Intent {
    What,
    Why,
    Continue,
    OutOfScope,
}

impl Intent {
    /// The question this intent asks, if it is one. Only questions move the LOE.
    pub fn question(self) -> Option<Question> {
        match self {
            Intent::What => Some(Question::What),
            Intent::Why => Some(Question::Why),
            Intent::Continue | Intent::OutOfScope => None,
        }
    }
}

/// The subset of [`Intent`] that indexes a transition table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub enum Question {
    What,
    Why,
}

impl Question {
    pub const ALL: [Question; 2] = [Question::What, Question::Why];
}

impl From<Question> for Intent {
    fn from(q: Question) -> Self {
        match q {
            Question::What => Intent::What,
            Question::Why => Intent::Why,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("table for {variant} is missing an entry for ({from}, {question:?})")]
    MissingEntry {
        variant: DialogVariant,
        from: ExplanationLevel,
        question: Question,
    },
    #[error("AD1 table reaches High from Low via ({from}, {question:?}) -> High")]
    HighReachableInAd1 { from: ExplanationLevel, question: Question },
    #[error("duplicate entry for {variant} ({from}, {question:?})")]
    DuplicateEntry {
        variant: DialogVariant,
        from: ExplanationLevel,
        question: Question,
    },
    #[error("no transition records for variant {0}")]
    NoRecords(DialogVariant),
}

/// Maps (current level, question) to the next level for one dialog variant.
///
/// Tables built with [`TransitionTable::unchecked`] or modified with
/// [`TransitionTable::set`] may be invalid until [`validate_table`] accepts them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTable {
    variant: DialogVariant,
    entries: BTreeMap<(ExplanationLevel, Question), ExplanationLevel>,
}

impl TransitionTable {
    pub fn new(
        variant: DialogVariant,
        entries: BTreeMap<(ExplanationLevel, Question), ExplanationLevel>,
    ) -> Result<Self, TableError> {
        let table = Self::unchecked(variant, entries);
        validate_table(&table)?;
        Ok(table)
    }

    pub fn unchecked(
        variant: DialogVariant,
        entries: BTreeMap<(ExplanationLevel, Question), ExplanationLevel>,
    ) -> Self {
        Self { variant, entries }
    }

    pub fn variant(&self) -> DialogVariant {
        self.variant
    }

    pub fn get(&self, from: ExplanationLevel, question: Question) -> Option<ExplanationLevel> {
        self.entries.get(&(from, question)).copied()
    }

    pub fn set(&mut self, from: ExplanationLevel, question: Question, to: ExplanationLevel) {
        self.entries.insert((from, question), to);
    }

    pub fn remove(&mut self, from: ExplanationLevel, question: Question) {
        self.entries.remove(&(from, question));
    }

    pub fn entries(&self) -> impl Iterator<Item = (ExplanationLevel, Question, ExplanationLevel)> + '_ {
        self.entries.iter().map(|(&(f, q), &t)| (f, q, t))
    }

    /// Levels reachable from `Low` under any question sequence.
    pub fn reachable_from_low(&self) -> BTreeSet<ExplanationLevel> {
        let mut seen = BTreeSet::from([ExplanationLevel::Low]);
        let mut queue = VecDeque::from([ExplanationLevel::Low]);
        while let Some(level) = queue.pop_front() {
            for q in Question::ALL {
                if let Some(next) = self.get(level, q) {
                    if seen.insert(next) {
                        queue.push_back(next);
                    }
                }
            }
        }
        seen
    }

    pub fn to_records(&self) -> Vec<TransitionRecord> {
        self.entries()
            .map(|(from, intent, to)| TransitionRecord {
                variant: self.variant,
                from,
                intent,
                to,
            })
            .collect()
    }

    /// Builds the table for `variant` from the records in a document that
    /// may describe several variants.
    pub fn from_records(variant: DialogVariant, records: &[TransitionRecord]) -> Result<Self, TableError> {
        let mut entries = BTreeMap::new();
        for r in records.iter().filter(|r| r.variant == variant) {
            if entries.insert((r.from, r.intent), r.to).is_some() {
                return Err(TableError::DuplicateEntry {
                    variant,
                    from: r.from,
                    question: r.intent,
                });
            }
        }
        if entries.is_empty() {
            return Err(TableError::NoRecords(variant));
        }
        Self::new(variant, entries)
    }
}

/// One row of a transition table document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub variant: DialogVariant,
    pub from: ExplanationLevel,
    pub intent: Question,
    pub to: ExplanationLevel,
}

/// A transition table configuration document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub transitions: Vec<TransitionRecord>,
}

impl TableDocument {
    pub fn defaults() -> Self {
        Self {
            transitions: DialogVariant::ALL
                .into_iter()
                .flat_map(|v| default_transition_table(v).to_records())
                .collect(),
        }
    }
}

pub fn default_transition_table(variant: DialogVariant) -> TransitionTable {
    use ExplanationLevel::*;
    use Question::*;
    let rows: [((ExplanationLevel, Question), ExplanationLevel); 8] = match variant {
        DialogVariant::AD1 => [
            ((Low, What), Medium1),
            ((Low, Why), Medium2),
            ((Medium1, What), Medium1),
            ((Medium1, Why), Medium2),
            ((Medium2, What), Medium2),
            ((Medium2, Why), Medium2),
            // unreachable in AD1; present for totality
            ((High, What), High),
            ((High, Why), High),
        ],
        DialogVariant::AD2 => [
            ((Low, What), Medium1),
            ((Low, Why), Medium2),
            ((Medium1, What), Medium1),
            ((Medium1, Why), High),
            ((Medium2, What), High),
            ((Medium2, Why), Medium2),
            ((High, What), High),
            ((High, Why), High),
        ],
    };
    TransitionTable::unchecked(variant, rows.into_iter().collect())
}

/// Next level after `intent`. Non-questions leave the level unchanged, as does
/// a lookup miss on an invalid table.
pub fn next_level(table: &TransitionTable, current: ExplanationLevel, intent: Intent) -> ExplanationLevel {
    match intent.question() {
        Some(q) => table.get(current, q).unwrap_or(current),
        None => current,
    }
}

/// Checks totality over 4 levels x {What, Why} and, for AD1, that High cannot
/// be reached from Low.
pub fn validate_table(table: &TransitionTable) -> Result<(), TableError> {
    for from in ExplanationLevel::ALL {
        for question in Question::ALL {
            if table.get(from, question).is_none() {
                return Err(TableError::MissingEntry {
                    variant: table.variant,
                    from,
                    question,
                });
            }
        }
    }
    if table.variant == DialogVariant::AD1 {
        let reachable = table.reachable_from_low();
        if reachable.contains(&ExplanationLevel::High) {
            // report an edge that enters High from a reachable non-High level
            let (from, question, _) = table
                .entries()
                .find(|&(f, _, t)| t == ExplanationLevel::High && f != ExplanationLevel::High && reachable.contains(&f))
                .expect("High reachable implies an entering edge");
            return Err(TableError::HighReachableInAd1 { from, question });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExplanationLevel::*;

    #[test]
    fn components_match_design_table() {
        assert_eq!(loe_components(Low), (VerbosityLevel::Low, JustificationLevel::Low));
        assert_eq!(loe_components(Medium1), (VerbosityLevel::High, JustificationLevel::Low));
        assert_eq!(loe_components(High), (VerbosityLevel::High, JustificationLevel::High));
        assert_eq!(
            loe_from_components(VerbosityLevel::Low, JustificationLevel::High),
            Medium2
        );
        assert_eq!(loe_from_components(VerbosityLevel::Low, JustificationLevel::Low), Low);
        assert_eq!(
            loe_from_components(VerbosityLevel::High, JustificationLevel::Low),
            Medium1
        );
    }

    #[test]
    fn lattice_order() {
        assert_eq!(Low.lattice_cmp(High), Some(Ordering::Less));
        assert_eq!(Medium1.lattice_cmp(Medium2), None);
        assert_eq!(Medium2.lattice_cmp(Low), Some(Ordering::Greater));
        assert_eq!(
            maximal_levels(&BTreeSet::from([Low, Medium1, Medium2])),
            vec![Medium1, Medium2]
        );
        assert_eq!(maximal_levels(&BTreeSet::from([Low, Medium1, High])), vec![High]);
        assert!(maximal_levels(&BTreeSet::new()).is_empty());
    }

    #[test]
    fn stated_transitions() {
        let ad1 = default_transition_table(DialogVariant::AD1);
        let ad2 = default_transition_table(DialogVariant::AD2);
        assert_eq!(next_level(&ad1, Low, Intent::What), Medium1);
        assert_eq!(next_level(&ad1, Medium1, Intent::Why), Medium2);
        assert_eq!(next_level(&ad2, Medium1, Intent::Why), High);
        assert_eq!(next_level(&ad2, Medium2, Intent::OutOfScope), Medium2);
        assert_eq!(next_level(&ad2, Low, Intent::Why), Medium2);
    }

    #[test]
    fn defaults_validate() {
        for v in DialogVariant::ALL {
            validate_table(&default_transition_table(v)).unwrap();
        }
    }

    #[test]
    fn ad1_reaching_high_is_rejected() {
        let mut t = default_transition_table(DialogVariant::AD1);
        t.set(Medium1, Question::Why, High);
        assert_eq!(
            validate_table(&t),
            Err(TableError::HighReachableInAd1 {
                from: Medium1,
                question: Question::Why
            })
        );
    }

    #[test]
    fn missing_entry_is_rejected() {
        let mut t = default_transition_table(DialogVariant::AD2);
        t.remove(Medium2, Question::What);
        assert_eq!(
            validate_table(&t),
            Err(TableError::MissingEntry {
                variant: DialogVariant::AD2,
                from: Medium2,
                question: Question::What
            })
        );
    }

    #[test]
    fn ad1_high_self_loop_is_not_reachability() {
        // High -> High edges exist but High is never entered from Low.
        let t = default_transition_table(DialogVariant::AD1);
        assert!(!t.reachable_from_low().contains(&High));
    }

    #[test]
    fn records_round_trip_and_duplicates() {
        let doc = TableDocument::defaults();
        assert_eq!(doc.transitions.len(), 16);
        let ad2 = TransitionTable::from_records(DialogVariant::AD2, &doc.transitions).unwrap();
        assert_eq!(ad2, default_transition_table(DialogVariant::AD2));

        let mut recs = doc.transitions.clone();
        recs.push(recs[0]);
        assert!(matches!(
            TransitionTable::from_records(DialogVariant::AD1, &recs),
            Err(TableError::DuplicateEntry { .. })
        ));
        let only_ad1: Vec<_> = doc
            .transitions
            .iter()
            .copied()
            .filter(|r| r.variant == DialogVariant::AD1)
            .collect();
        assert_eq!(
            TransitionTable::from_records(DialogVariant::AD2, &only_ad1),
            Err(TableError::NoRecords(DialogVariant::AD2))
        );
    }

    #[test]
    fn record_spellings() {
        let rec: TransitionRecord =
            serde_json::from_str(r#"{"variant":"AD1","from":"Medium1","intent":"Why","to":"Medium2"}"#).unwrap();
        assert_eq!(rec.to, Medium2);
        assert!(serde_json::from_str::<TransitionRecord>(
            r#"{"variant":"AD1","from":"Low","intent":"Continue","to":"Low"}"#
        )
        .is_err());
    }
}
