use std::collections::BTreeSet;

use loebench_core::loe::*;
use proptest::prelude::*;

const INTENTS: [Intent; 4] = [Intent::What, Intent::Why, Intent::Continue, Intent::OutOfScope];

// Brute-force oracle: apply every intent sequence up to `depth` from Low.
fn levels_by_enumeration(table: &TransitionTable, depth: usize) -> BTreeSet<ExplanationLevel> {
    let mut seen = BTreeSet::from([ExplanationLevel::Low]);
    let mut frontier = vec![ExplanationLevel::Low];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &level in &frontier {
            for intent in INTENTS {
                next.push(next_level(table, level, intent));
            }
        }
        seen.extend(next.iter().copied());
        frontier = next;
    }
    seen
}

#[test]
fn bijection_is_exhaustive() {
    for level in ExplanationLevel::ALL {
        let (v, j) = loe_components(level);
        assert_eq!(loe_from_components(v, j), level);
    }
    let mut images = BTreeSet::new();
    for v in [VerbosityLevel::Low, VerbosityLevel::High] {
        for j in [JustificationLevel::Low, JustificationLevel::High] {
            let level = loe_from_components(v, j);
            assert_eq!(loe_components(level), (v, j));
            images.insert(level);
        }
    }
    assert_eq!(images.len(), 4);
}

#[test]
fn ad1_never_reaches_high_by_enumeration() {
    // 4^6 sequences; any level reachable in a 4-node graph is reachable in <= 3 steps.
    let reached = levels_by_enumeration(&default_transition_table(DialogVariant::AD1), 6);
    assert_eq!(
        reached,
        BTreeSet::from([
            ExplanationLevel::Low,
            ExplanationLevel::Medium1,
            ExplanationLevel::Medium2
        ])
    );
    let reached = levels_by_enumeration(&default_transition_table(DialogVariant::AD2), 6);
    assert_eq!(reached.len(), 4);
}

#[test]
fn ad2_ascent_is_path_independent() {
    let t = default_transition_table(DialogVariant::AD2);
    let run = |seq: &[Intent]| seq.iter().fold(ExplanationLevel::Low, |l, &i| next_level(&t, l, i));
    assert_eq!(run(&[Intent::What, Intent::Why]), ExplanationLevel::High);
    assert_eq!(run(&[Intent::Why, Intent::What]), ExplanationLevel::High);
}

#[test]
fn why_never_lowers_justification_in_defaults() {
    for v in DialogVariant::ALL {
        let t = default_transition_table(v);
        for level in ExplanationLevel::ALL {
            let next = next_level(&t, level, Intent::Why);
            assert!(next.justification() >= level.justification(), "{v} {level}");
        }
    }
}

fn arb_level() -> impl Strategy<Value = ExplanationLevel> {
    prop::sample::select(ExplanationLevel::ALL.to_vec())
}

fn arb_table() -> impl Strategy<Value = TransitionTable> {
    (
        prop::sample::select(DialogVariant::ALL.to_vec()),
        prop::collection::vec(arb_level(), 8),
    )
        .prop_map(|(v, images)| {
            let mut t = default_transition_table(v);
            let mut it = images.into_iter();
            for from in ExplanationLevel::ALL {
                for q in Question::ALL {
                    t.set(from, q, it.next().unwrap());
                }
            }
            t
        })
}

proptest! {
    #[test]
    fn non_questions_are_identity(t in arb_table(), level in arb_level()) {
        prop_assert_eq!(next_level(&t, level, Intent::Continue), level);
        prop_assert_eq!(next_level(&t, level, Intent::OutOfScope), level);
    }

    #[test]
    fn validation_agrees_with_enumeration(t in arb_table()) {
        let high_reachable = levels_by_enumeration(&t, 4).contains(&ExplanationLevel::High);
        let rejected = matches!(validate_table(&t), Err(TableError::HighReachableInAd1 { .. }));
        prop_assert_eq!(rejected, t.variant() == DialogVariant::AD1 && high_reachable);
    }
}
