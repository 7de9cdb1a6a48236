//! Deterministic simulation of the collaborative cube-sorting task.
//!
//! The table is an integer grid. The robot can only act on cubes inside an
//! axis-aligned reach region ("the square") and only knows where to shelve a
//! cube if its QR code is in the database. Each [`WorldState::step`] picks the
//! unsorted cube nearest to the origin and either sorts it or raises one of
//! the two task errors, checking reach before reading the QR code.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::ErrorKind;

pub type CubeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub struct GridPos {
    pub x: u32,
    pub y: u32,
}

impl GridPos {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Squared distance from the robot origin (0, 0).
    pub fn dist2_from_origin(self) -> u64 {
        let (x, y) = (u64::from(self.x), u64::from(self.y));
        x * x + y * y
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Extent {
    pub width: u32,
    pub height: u32,
}

impl Extent {
    pub fn contains(self, p: GridPos) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn cells(self) -> impl Iterator<Item = GridPos> {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| GridPos::new(x, y)))
    }
}

/// Inclusive axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Rect {
    pub min: GridPos,
    pub max: GridPos,
}

impl Rect {
    pub fn contains(self, p: GridPos) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }

    pub fn center(self) -> GridPos {
        GridPos::new((self.min.x + self.max.x) / 2, (self.min.y + self.max.y) / 2)
    }

    pub fn cells(self) -> impl Iterator<Item = GridPos> {
        (self.min.y..=self.max.y).flat_map(move |y| (self.min.x..=self.max.x).map(move |x| GridPos::new(x, y)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum CubeLocation {
    Table(GridPos),
    Shelf(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Cube {
    pub id: CubeId,
    pub qr: String,
    pub location: CubeLocation,
    pub sorted: bool,
}

impl Cube {
    pub fn table_position(&self) -> Option<GridPos> {
        match self.location {
            CubeLocation::Table(p) => Some(p),
            CubeLocation::Shelf(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Shelf {
    pub id: String,
    pub contents: Vec<CubeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "phase")]
pub enum RobotPhase {
    Idle,
    /// Transient inside [`WorldState::step`]; never observed between steps.
    Detecting,
    /// Transient inside [`WorldState::step`]; never observed between steps.
    Holding {
        cube: CubeId,
    },
    Errored {
        kind: ErrorKind,
        cube: CubeId,
    },
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type")]
pub enum RepairAction {
    SwapCube { cube_id: CubeId, new_qr: String },
    MoveCube { cube_id: CubeId, new_position: GridPos },
}

impl RepairAction {
    pub fn cube_id(&self) -> CubeId {
        match self {
            RepairAction::SwapCube { cube_id, .. } | RepairAction::MoveCube { cube_id, .. } => *cube_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "outcome")]
pub enum RobotOutcome {
    Sorted { cube_id: CubeId, shelf: String },
    ErrorRaised { kind: ErrorKind, cube_id: CubeId },
    Done,
    NoChange,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("robot is halted on {kind} for cube {cube}; repair and continue first")]
    RobotErrored { kind: ErrorKind, cube: CubeId },
    #[error("unknown cube id {0}")]
    UnknownCube(CubeId),
    #[error("cube {0} is already sorted")]
    CubeSorted(CubeId),
    #[error("position {0} is outside the table")]
    OutsideTable(GridPos),
    #[error("position {pos} is occupied by cube {by}")]
    Occupied { pos: GridPos, by: CubeId },
    #[error("invalid world: {0}")]
    InvalidWorld(String),
}

/// The complete simulated task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct WorldState {
    pub table_extent: Extent,
    pub reach_region: Rect,
    pub cubes: Vec<Cube>,
    pub shelves: [Shelf; 2],
    pub qr_database: BTreeMap<String, String>,
    pub robot_phase: RobotPhase,
    pub rng_seed: u64,
}

impl WorldState {
    pub fn cube(&self, id: CubeId) -> Option<&Cube> {
        self.cubes.iter().find(|c| c.id == id)
    }

    fn cube_mut(&mut self, id: CubeId) -> Option<&mut Cube> {
        self.cubes.iter_mut().find(|c| c.id == id)
    }

    pub fn cube_at(&self, pos: GridPos) -> Option<&Cube> {
        self.cubes.iter().find(|c| c.table_position() == Some(pos))
    }

    pub fn unsorted(&self) -> impl Iterator<Item = &Cube> {
        self.cubes.iter().filter(|c| !c.sorted)
    }

    pub fn all_sorted(&self) -> bool {
        self.cubes.iter().all(|c| c.sorted)
    }

    /// The errored phase, if the robot is halted.
    pub fn error(&self) -> Option<(ErrorKind, CubeId)> {
        match self.robot_phase {
            RobotPhase::Errored { kind, cube } => Some((kind, cube)),
            _ => None,
        }
    }

    pub fn shelf_for(&self, qr: &str) -> Option<&str> {
        shelf_for(qr, self)
    }

    /// Next cube the robot will approach: nearest to the origin, lowest id on ties.
    pub fn next_target(&self) -> Option<&Cube> {
        self.unsorted()
            .filter_map(|c| c.table_position().map(|p| (p.dist2_from_origin(), c.id, c)))
            .min_by_key(|&(d, id, _)| (d, id))
            .map(|(_, _, c)| c)
    }

    /// One robot cycle: detect, approach, read, sort.
    pub fn step(&mut self) -> Result<RobotOutcome, SimError> {
        match self.robot_phase {
            RobotPhase::Errored { kind, cube } => return Err(SimError::RobotErrored { kind, cube }),
            RobotPhase::Done => return Ok(RobotOutcome::NoChange),
            _ => {}
        }
        let Some(target) = self.next_target() else {
            self.robot_phase = RobotPhase::Done;
            return Ok(RobotOutcome::Done);
        };
        let (id, qr, pos) = (
            target.id,
            target.qr.clone(),
            target.table_position().expect("unsorted cube on table"),
        );

        if !self.reach_region.contains(pos) {
            return Ok(self.halt(ErrorKind::OutOfRange, id));
        }
        let Some(shelf) = self.shelf_for(&qr).map(str::to_owned) else {
            return Ok(self.halt(ErrorKind::IncorrectItem, id));
        };
        let cube = self.cube_mut(id).expect("target exists");
        cube.location = CubeLocation::Shelf(shelf.clone());
        cube.sorted = true;
        self.shelves
            .iter_mut()
            .find(|s| s.id == shelf)
            .expect("database values name shelves")
            .contents
            .push(id);
        self.robot_phase = RobotPhase::Idle;
        Ok(RobotOutcome::Sorted { cube_id: id, shelf })
    }

    fn halt(&mut self, kind: ErrorKind, cube_id: CubeId) -> RobotOutcome {
        self.robot_phase = RobotPhase::Errored { kind, cube: cube_id };
        RobotOutcome::ErrorRaised { kind, cube_id }
    }

    /// Clears an error so the robot will try again on the next step.
    /// Returns whether the robot was halted.
    pub fn resume(&mut self) -> bool {
        if let RobotPhase::Errored { .. } = self.robot_phase {
            self.robot_phase = RobotPhase::Idle;
            true
        } else {
            false
        }
    }

    pub fn apply_repair(&mut self, action: &RepairAction) -> Result<(), SimError> {
        let id = action.cube_id();
        let cube = self.cube(id).ok_or(SimError::UnknownCube(id))?;
        if cube.sorted {
            return Err(SimError::CubeSorted(id));
        }
        match action {
            RepairAction::SwapCube { new_qr, .. } => {
                self.cube_mut(id).expect("checked").qr = new_qr.clone();
            }
            RepairAction::MoveCube { new_position, .. } => {
                let pos = *new_position;
                if !self.table_extent.contains(pos) {
                    return Err(SimError::OutsideTable(pos));
                }
                if let Some(other) = self.cube_at(pos).filter(|c| c.id != id) {
                    return Err(SimError::Occupied { pos, by: other.id });
                }
                self.cube_mut(id).expect("checked").location = CubeLocation::Table(pos);
            }
        }
        if matches!(self.robot_phase, RobotPhase::Errored { cube, .. } if cube == id) {
            self.robot_phase = RobotPhase::Idle;
        }
        Ok(())
    }

    pub fn check_invariants(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidWorld(m));
        let Rect { min, max } = self.reach_region;
        if min.x > max.x || min.y > max.y {
            return bad("reach region has min > max".into());
        }
        if !self.table_extent.contains(min) || !self.table_extent.contains(max) {
            return bad("reach region extends beyond the table".into());
        }
        if self.shelves[0].id == self.shelves[1].id {
            return bad("shelf identifiers must be distinct".into());
        }
        for (qr, shelf) in &self.qr_database {
            if !self.shelves.iter().any(|s| &s.id == shelf) {
                return bad(format!("QR `{qr}` maps to unknown shelf `{shelf}`"));
            }
        }
        let mut ids = BTreeSet::new();
        let mut cells = BTreeSet::new();
        for c in &self.cubes {
            if !ids.insert(c.id) {
                return bad(format!("duplicate cube id {}", c.id));
            }
            match &c.location {
                CubeLocation::Table(p) => {
                    if c.sorted {
                        return bad(format!("cube {} is on the table but marked sorted", c.id));
                    }
                    if !self.table_extent.contains(*p) {
                        return bad(format!("cube {} at {p} is outside the table", c.id));
                    }
                    if !cells.insert(*p) {
                        return bad(format!("two cubes share position {p}"));
                    }
                }
                CubeLocation::Shelf(s) => {
                    if !c.sorted {
                        return bad(format!("cube {} is shelved but not marked sorted", c.id));
                    }
                    let on_shelf = self.shelves.iter().filter(|sh| sh.contents.contains(&c.id)).count();
                    if on_shelf != 1 || !self.shelves.iter().any(|sh| &sh.id == s && sh.contents.contains(&c.id)) {
                        return bad(format!("cube {} shelf bookkeeping is inconsistent", c.id));
                    }
                }
            }
        }
        let shelved: usize = self.shelves.iter().map(|s| s.contents.len()).sum();
        if shelved != self.cubes.iter().filter(|c| c.sorted).count() {
            return bad("shelf contents do not match sorted cubes".into());
        }
        Ok(())
    }

    /// Stable JSON encoding used for determinism checks and the state endpoint.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("world serializes")
    }
}

pub fn shelf_for<'w>(qr: &str, world: &'w WorldState) -> Option<&'w str> {
    world.qr_database.get(qr).map(String::as_str)
}

pub fn apply_repair(world: &WorldState, action: &RepairAction) -> Result<WorldState, SimError> {
    let mut next = world.clone();
    next.apply_repair(action)?;
    Ok(next)
}

pub fn step_robot(world: &WorldState) -> Result<(WorldState, RobotOutcome), SimError> {
    let mut next = world.clone();
    let outcome = next.step()?;
    Ok((next, outcome))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinScenario {
    IncorrectItem,
    OutOfRange,
    BothRandomOrder,
    Clean,
}

impl BuiltinScenario {
    pub const ALL: [BuiltinScenario; 4] = [
        BuiltinScenario::IncorrectItem,
        BuiltinScenario::OutOfRange,
        BuiltinScenario::BothRandomOrder,
        BuiltinScenario::Clean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinScenario::IncorrectItem => "incorrect_item",
            BuiltinScenario::OutOfRange => "out_of_range",
            BuiltinScenario::BothRandomOrder => "both_random_order",
            BuiltinScenario::Clean => "clean",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CubeSpec {
    pub id: CubeId,
    pub qr: String,
    pub position: GridPos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub table_extent: Extent,
    pub reach_region: Rect,
    pub shelves: [String; 2],
    pub qr_database: BTreeMap<String, String>,
    pub cubes: Vec<CubeSpec>,
}

/// Either a named built-in layout or a fully specified world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Builtin { builtin: BuiltinScenario },
    Custom(CustomScenario),
}

impl ScenarioConfig {
    pub fn builtin(s: BuiltinScenario) -> Self {
        ScenarioConfig::Builtin { builtin: s }
    }

    pub fn name(&self) -> String {
        match self {
            ScenarioConfig::Builtin { builtin } => builtin.name().to_owned(),
            ScenarioConfig::Custom(c) => c.name.clone().unwrap_or_else(|| "custom".to_owned()),
        }
    }
}

const TABLE: Extent = Extent { width: 6, height: 6 };
const REACH: Rect = Rect {
    min: GridPos::new(1, 1),
    max: GridPos::new(4, 4),
};
const KNOWN_QRS: [&str; 2] = ["A1", "B2"];
const UNKNOWN_QR: &str = "X9";

fn builtin_layout(scenario: BuiltinScenario, rng: &mut ChaCha8Rng) -> Vec<CubeSpec> {
    // The reach-region center stays free so a move-to-center repair always lands.
    let center = REACH.center();
    let inside: Vec<GridPos> = REACH.cells().filter(|&p| p != center).collect();
    let outside: Vec<GridPos> = TABLE.cells().filter(|&p| !REACH.contains(p)).collect();
    let cube = |id, qr: &str, position| CubeSpec {
        id,
        qr: qr.to_owned(),
        position,
    };
    match scenario {
        BuiltinScenario::IncorrectItem => {
            vec![cube(1, UNKNOWN_QR, *inside.choose(rng).expect("non-empty"))]
        }
        BuiltinScenario::OutOfRange => {
            let qr = KNOWN_QRS.choose(rng).expect("non-empty");
            vec![cube(1, qr, *outside.choose(rng).expect("non-empty"))]
        }
        BuiltinScenario::Clean => {
            let picks: Vec<GridPos> = inside.choose_multiple(rng, 2).copied().collect();
            vec![cube(1, KNOWN_QRS[0], picks[0]), cube(2, KNOWN_QRS[1], picks[1])]
        }
        BuiltinScenario::BothRandomOrder => {
            let mut order = [ErrorKind::IncorrectItem, ErrorKind::OutOfRange];
            order.shuffle(rng);
            // The out-of-range cube sits either nearer the origin than every
            // other cube or farther than all of them.
            let far = order[0] == ErrorKind::IncorrectItem;
            let oor_pos = if far { GridPos::new(5, 5) } else { GridPos::new(0, 1) };
            let oor_qr = KNOWN_QRS[rng.random_range(0..KNOWN_QRS.len())];
            vec![
                cube(1, UNKNOWN_QR, GridPos::new(1, 3)),
                cube(2, KNOWN_QRS[1], GridPos::new(3, 4)),
                cube(3, oor_qr, oor_pos),
            ]
        }
    }
}

fn builtin_scenario(scenario: BuiltinScenario, rng: &mut ChaCha8Rng) -> CustomScenario {
    CustomScenario {
        name: Some(scenario.name().to_owned()),
        table_extent: TABLE,
        reach_region: REACH,
        shelves: ["shelf1".to_owned(), "shelf2".to_owned()],
        qr_database: KNOWN_QRS
            .iter()
            .zip(["shelf1", "shelf2"])
            .map(|(q, s)| ((*q).to_owned(), s.to_owned()))
            .collect(),
        cubes: builtin_layout(scenario, rng),
    }
}

/// Builds the world for a scenario. Deterministic in `(scenario, seed)`.
pub fn new_world(scenario: &ScenarioConfig, seed: u64) -> Result<WorldState, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let resolved;
    let spec = match scenario {
        ScenarioConfig::Builtin { builtin } => {
            resolved = builtin_scenario(*builtin, &mut rng);
            &resolved
        }
        ScenarioConfig::Custom(c) => c,
    };
    let mut cubes: Vec<Cube> = spec
        .cubes
        .iter()
        .map(|c| Cube {
            id: c.id,
            qr: c.qr.clone(),
            location: CubeLocation::Table(c.position),
            sorted: false,
        })
        .collect();
    cubes.sort_by_key(|c| c.id);
    let world = WorldState {
        table_extent: spec.table_extent,
        reach_region: spec.reach_region,
        cubes,
        shelves: spec.shelves.clone().map(|id| Shelf {
            id,
            contents: Vec::new(),
        }),
        qr_database: spec.qr_database.clone(),
        robot_phase: RobotPhase::Idle,
        rng_seed: seed,
    };
    world.check_invariants()?;
    Ok(world)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(qr: &str, pos: GridPos) -> WorldState {
        new_world(
            &ScenarioConfig::Custom(CustomScenario {
                name: None,
                table_extent: TABLE,
                reach_region: REACH,
                shelves: ["shelf1".into(), "shelf2".into()],
                qr_database: BTreeMap::from([("A1".into(), "shelf1".into()), ("B2".into(), "shelf2".into())]),
                cubes: vec![CubeSpec {
                    id: 1,
                    qr: qr.into(),
                    position: pos,
                }],
            }),
            0,
        )
        .unwrap()
    }

    #[test]
    fn sorts_known_reachable_cube() {
        let (w, out) = step_robot(&single("A1", GridPos::new(2, 2))).unwrap();
        assert_eq!(
            out,
            RobotOutcome::Sorted {
                cube_id: 1,
                shelf: "shelf1".into()
            }
        );
        assert_eq!(w.shelves[0].contents, vec![1]);
        let (w, out) = step_robot(&w).unwrap();
        assert_eq!(out, RobotOutcome::Done);
        assert_eq!(w.robot_phase, RobotPhase::Done);
        assert_eq!(step_robot(&w).unwrap().1, RobotOutcome::NoChange);
    }

    #[test]
    fn raises_both_errors() {
        let (_, out) = step_robot(&single("A1", GridPos::new(5, 0))).unwrap();
        assert_eq!(
            out,
            RobotOutcome::ErrorRaised {
                kind: ErrorKind::OutOfRange,
                cube_id: 1
            }
        );
        let (w, out) = step_robot(&single("X9", GridPos::new(2, 3))).unwrap();
        assert_eq!(
            out,
            RobotOutcome::ErrorRaised {
                kind: ErrorKind::IncorrectItem,
                cube_id: 1
            }
        );
        assert_eq!(
            step_robot(&w).unwrap_err(),
            SimError::RobotErrored {
                kind: ErrorKind::IncorrectItem,
                cube: 1
            }
        );
    }

    #[test]
    fn reach_is_checked_before_qr() {
        let (_, out) = step_robot(&single("X9", GridPos::new(0, 0))).unwrap();
        assert!(matches!(
            out,
            RobotOutcome::ErrorRaised {
                kind: ErrorKind::OutOfRange,
                ..
            }
        ));
    }

    #[test]
    fn repairs() {
        let (w, _) = step_robot(&single("X9", GridPos::new(2, 3))).unwrap();
        let w = apply_repair(
            &w,
            &RepairAction::SwapCube {
                cube_id: 1,
                new_qr: "A1".into(),
            },
        )
        .unwrap();
        assert_eq!(w.robot_phase, RobotPhase::Idle);
        assert!(matches!(step_robot(&w).unwrap().1, RobotOutcome::Sorted { .. }));

        let (w, _) = step_robot(&single("B2", GridPos::new(5, 5))).unwrap();
        let still_out = apply_repair(
            &w,
            &RepairAction::MoveCube {
                cube_id: 1,
                new_position: GridPos::new(0, 3),
            },
        )
        .unwrap();
        assert!(matches!(
            step_robot(&still_out).unwrap().1,
            RobotOutcome::ErrorRaised {
                kind: ErrorKind::OutOfRange,
                ..
            }
        ));
        let fixed = apply_repair(
            &w,
            &RepairAction::MoveCube {
                cube_id: 1,
                new_position: REACH.center(),
            },
        )
        .unwrap();
        assert!(matches!(step_robot(&fixed).unwrap().1, RobotOutcome::Sorted { .. }));
    }

    #[test]
    fn repair_errors() {
        let w = single("A1", GridPos::new(2, 2));
        let swap = |id| RepairAction::SwapCube {
            cube_id: id,
            new_qr: "A1".into(),
        };
        assert_eq!(apply_repair(&w, &swap(9)).unwrap_err(), SimError::UnknownCube(9));
        let mv = RepairAction::MoveCube {
            cube_id: 1,
            new_position: GridPos::new(6, 0),
        };
        assert_eq!(
            apply_repair(&w, &mv).unwrap_err(),
            SimError::OutsideTable(GridPos::new(6, 0))
        );
        let (sorted, _) = step_robot(&w).unwrap();
        assert_eq!(apply_repair(&sorted, &swap(1)).unwrap_err(), SimError::CubeSorted(1));

        let two = new_world(&ScenarioConfig::builtin(BuiltinScenario::Clean), 3).unwrap();
        let p2 = two.cube(2).unwrap().table_position().unwrap();
        let mv = RepairAction::MoveCube {
            cube_id: 1,
            new_position: p2,
        };
        assert_eq!(
            apply_repair(&two, &mv).unwrap_err(),
            SimError::Occupied { pos: p2, by: 2 }
        );
    }

    #[test]
    fn shelf_lookup() {
        let w = single("A1", GridPos::new(2, 2));
        assert_eq!(shelf_for("A1", &w), Some("shelf1"));
        assert_eq!(shelf_for("X9", &w), None);
        assert_eq!(shelf_for("", &w), None);
    }

    #[test]
    fn builtin_scenarios_have_their_faults() {
        for seed in 0..20 {
            let w = new_world(&ScenarioConfig::builtin(BuiltinScenario::OutOfRange), seed).unwrap();
            assert_eq!(
                w.cubes
                    .iter()
                    .filter(|c| !REACH.contains(c.table_position().unwrap()))
                    .count(),
                1
            );
            let w = new_world(&ScenarioConfig::builtin(BuiltinScenario::IncorrectItem), seed).unwrap();
            assert!(w.cubes.iter().any(|c| shelf_for(&c.qr, &w).is_none()));
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut spec = builtin_scenario(BuiltinScenario::Clean, &mut ChaCha8Rng::seed_from_u64(1));
        spec.cubes[1].position = spec.cubes[0].position;
        assert!(new_world(&ScenarioConfig::Custom(spec.clone()), 0).is_err());
        spec.cubes[1].position = GridPos::new(9, 9);
        assert!(new_world(&ScenarioConfig::Custom(spec.clone()), 0).is_err());
        spec.cubes[1].position = GridPos::new(0, 0);
        spec.reach_region.max = GridPos::new(6, 4);
        assert!(new_world(&ScenarioConfig::Custom(spec.clone()), 0).is_err());
        spec.reach_region = REACH;
        spec.qr_database.insert("C3".into(), "shelf9".into());
        assert!(new_world(&ScenarioConfig::Custom(spec), 0).is_err());
    }

    #[test]
    fn scenario_document_forms() {
        let b: ScenarioConfig = serde_json::from_str(r#"{"builtin":"out_of_range"}"#).unwrap();
        assert_eq!(b, ScenarioConfig::builtin(BuiltinScenario::OutOfRange));
        let spec = builtin_scenario(BuiltinScenario::Clean, &mut ChaCha8Rng::seed_from_u64(1));
        let json = serde_json::to_string(&ScenarioConfig::Custom(spec.clone())).unwrap();
        assert_eq!(
            serde_json::from_str::<ScenarioConfig>(&json).unwrap(),
            ScenarioConfig::Custom(spec)
        );
    }
}
