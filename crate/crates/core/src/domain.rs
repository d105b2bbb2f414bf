//! Domain model: candidate infrastructure, timetable scenarios, build configs.
//!
//! All times are integer minutes. Sections are undirected; a traversal
//! direction is derived from the lexicographic order of the endpoint ids, and
//! the per-direction track choice rules live in [`allowed_tracks`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rat::Rat;

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
        pub struct $name(pub String);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

id_type!(NodeId);
id_type!(TrainId);
id_type!(ScenarioId);
id_type!(TrainType);

/// Scenario-qualified train identity; unique across a whole family.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TrainKey {
    pub scenario: ScenarioId,
    pub train: TrainId,
}

impl fmt::Display for TrainKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.scenario, self.train)
    }
}

/// Undirected section key with endpoints in lexicographic order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SectionKey {
    pub lo: NodeId,
    pub hi: NodeId,
}

impl SectionKey {
    pub fn new(a: NodeId, b: NodeId) -> SectionKey {
        if a <= b {
            SectionKey { lo: a, hi: b }
        } else {
            SectionKey { lo: b, hi: a }
        }
    }

    pub fn other(&self, n: &NodeId) -> &NodeId {
        if *n == self.lo {
            &self.hi
        } else {
            &self.lo
        }
    }

    pub fn contains(&self, n: &NodeId) -> bool {
        *n == self.lo || *n == self.hi
    }
}

impl fmt::Display for SectionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

/// Station through-link at `at` joining the sections towards its two ends.
/// The curve is undirected: (i,a,b) and (i,b,a) are the same link.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinkKey {
    pub at: NodeId,
    pub lo: NodeId,
    pub hi: NodeId,
}

impl LinkKey {
    pub fn new(at: NodeId, a: NodeId, b: NodeId) -> LinkKey {
        if a <= b {
            LinkKey { at, lo: a, hi: b }
        } else {
            LinkKey { at, lo: b, hi: a }
        }
    }
}

impl fmt::Display for LinkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.at, self.lo, self.hi)
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub id: NodeId,
    pub max_stop_minutes: i64,
    pub crossing_time_minutes: i64,
}

#[derive(Clone, Debug)]
pub struct Section {
    pub key: SectionKey,
    pub length_km: Rat,
    pub max_tracks: u8,
    /// Travel time per train type, unreduced.
    pub travel_time: BTreeMap<TrainType, i64>,
    /// Minimum headway per ordered (leading, following) type pair.
    pub base_headway: BTreeMap<(TrainType, TrainType), i64>,
    /// Building cost per track index 1..=max_tracks.
    pub track_cost: BTreeMap<u8, Rat>,
    pub time_reduction_cost: Rat,
    pub headway_reduction_cost: Rat,
    pub max_time_reduction: i64,
    pub max_headway_reduction: i64,
}

impl Section {
    pub fn travel(&self, ty: &TrainType) -> Option<i64> {
        self.travel_time.get(ty).copied()
    }

    pub fn headway(&self, leading: &TrainType, following: &TrainType) -> Option<i64> {
        self.base_headway.get(&(leading.clone(), following.clone())).copied()
    }

    pub fn min_headway(&self) -> Option<i64> {
        self.base_headway.values().copied().min()
    }

    /// floor(length_km / 10), the per-ten-kilometres reduction allowance.
    pub fn length_allowance(&self) -> i64 {
        (self.length_km / crate::rat::rat(10)).floor().to_integer()
    }

    pub fn effective_max_tracks(&self, config: &BuildConfig) -> u8 {
        self.max_tracks.min(config.max_tracks_global)
    }

    /// Cap on the travel-time reduction variable under `config`.
    pub fn time_reduction_cap(&self, config: &BuildConfig) -> i64 {
        if config.reductions_allowed {
            self.max_time_reduction
        } else {
            0
        }
    }

    /// Cap on the headway reduction variable under `config`.
    pub fn headway_reduction_cap(&self, config: &BuildConfig) -> i64 {
        if !config.reductions_allowed {
            return 0;
        }
        let by_headway = self
            .min_headway()
            .map(|h| (h - config.headway_floor_minutes).max(0))
            .unwrap_or(0);
        self.max_headway_reduction.min(self.length_allowance()).min(by_headway)
    }
}

#[derive(Clone, Debug)]
pub struct NodeLink {
    pub key: LinkKey,
    pub cost: Rat,
}

#[derive(Clone, Debug, Default)]
pub struct InfrastructureSpec {
    pub nodes: BTreeMap<NodeId, Node>,
    pub sections: BTreeMap<SectionKey, Section>,
    pub links: BTreeMap<LinkKey, NodeLink>,
}

impl InfrastructureSpec {
    pub fn section(&self, a: &NodeId, b: &NodeId) -> Option<&Section> {
        self.sections.get(&SectionKey::new(a.clone(), b.clone()))
    }

    pub fn link(&self, at: &NodeId, a: &NodeId, b: &NodeId) -> Option<&NodeLink> {
        self.links.get(&LinkKey::new(at.clone(), a.clone(), b.clone()))
    }

    pub fn neighbors<'a>(&'a self, n: &'a NodeId) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.sections.keys().filter_map(move |k| {
            if k.lo == *n {
                Some(&k.hi)
            } else if k.hi == *n {
                Some(&k.lo)
            } else {
                None
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct Train {
    pub id: TrainId,
    pub train_type: TrainType,
    pub origin: NodeId,
    pub destination: NodeId,
    pub earliest_departure: i64,
    pub latest_arrival: i64,
    pub via_nodes: BTreeSet<NodeId>,
    pub optional: bool,
    pub penalty: Rat,
}

impl Train {
    pub fn time_budget(&self) -> i64 {
        self.latest_arrival - self.earliest_departure
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RelationKind {
    ArrivalFrequency,
    DepartureFrequency,
    Transfer,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::ArrivalFrequency => "arrival-frequency",
            RelationKind::DepartureFrequency => "departure-frequency",
            RelationKind::Transfer => "transfer",
        })
    }
}

/// Bound on the minute difference between two trains' events at a node:
/// `min <= event(second) - event(first) <= max`.
#[derive(Clone, Debug)]
pub struct TimingRelation {
    pub kind: RelationKind,
    pub first: TrainId,
    pub second: TrainId,
    pub at_node: NodeId,
    pub min_minutes: i64,
    pub max_minutes: i64,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: ScenarioId,
    pub trains: BTreeMap<TrainId, Train>,
    pub relations: Vec<TimingRelation>,
    pub penalty: Rat,
    pub demanded_optional_count: u32,
    pub chosen_optional: BTreeSet<TrainId>,
}

impl Scenario {
    pub fn train_key(&self, id: &TrainId) -> TrainKey {
        TrainKey { scenario: self.id.clone(), train: id.clone() }
    }

    pub fn mandatory_count(&self) -> usize {
        self.trains.values().filter(|t| !t.optional).count()
    }

    pub fn optional_count(&self) -> usize {
        self.trains.values().filter(|t| t.optional).count()
    }
}

#[derive(Clone, Debug)]
pub struct TimetableFamily {
    pub scenarios: Vec<Scenario>,
    pub coverage_share: Rat,
}

impl TimetableFamily {
    pub fn single(scenario: Scenario) -> TimetableFamily {
        TimetableFamily { scenarios: vec![scenario], coverage_share: crate::rat::rat(1) }
    }

    pub fn scenario(&self, id: &ScenarioId) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == *id)
    }

    pub fn trains(&self) -> impl Iterator<Item = (TrainKey, &Train)> + '_ {
        self.scenarios.iter().flat_map(|s| {
            s.trains.values().map(move |t| (s.train_key(&t.id), t))
        })
    }

    pub fn train(&self, key: &TrainKey) -> Option<&Train> {
        self.scenario(&key.scenario)?.trains.get(&key.train)
    }

    pub fn train_count(&self) -> usize {
        self.scenarios.iter().map(|s| s.trains.len()).sum()
    }

    /// Number of scenarios that must be active under the coverage share.
    pub fn required_active(&self) -> i64 {
        let n = crate::rat::rat(self.scenarios.len() as i64);
        (self.coverage_share * n).ceil().to_integer()
    }

    /// True when the robust machinery degenerates to the deterministic model.
    pub fn is_deterministic(&self) -> bool {
        self.scenarios.len() == 1
            && self.coverage_share == crate::rat::rat(1)
            && self.scenarios[0].trains.values().all(|t| !t.optional)
    }
}

#[derive(Clone, Debug)]
pub struct BuildConfig {
    /// Global parallel-track ceiling, 2 or 4.
    pub max_tracks_global: u8,
    pub reductions_allowed: bool,
    pub headway_floor_minutes: i64,
    pub planning_horizon_end: i64,
    /// Couple headways between trains of different scenarios (off by default:
    /// only one scenario operates at a time).
    pub cross_scenario_headways: bool,
}

impl BuildConfig {
    pub fn preset_a(horizon: i64) -> BuildConfig {
        BuildConfig {
            max_tracks_global: 4,
            reductions_allowed: true,
            headway_floor_minutes: 2,
            planning_horizon_end: horizon,
            cross_scenario_headways: false,
        }
    }

    pub fn preset_b(horizon: i64) -> BuildConfig {
        BuildConfig { max_tracks_global: 2, ..BuildConfig::preset_a(horizon) }
    }

    pub fn preset_c(horizon: i64) -> BuildConfig {
        BuildConfig { reductions_allowed: false, ..BuildConfig::preset_b(horizon) }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Traversal direction of the movement `from -> to`, by lexicographic node
/// order. Section endpoints are distinct, so there is no tie.
pub fn direction(from: &NodeId, to: &NodeId) -> Direction {
    debug_assert_ne!(from, to);
    if from < to {
        Direction::Ascending
    } else {
        Direction::Descending
    }
}

#[derive(thiserror::Error, Debug)]
pub enum DomainError {
    #[error("max_tracks {0} out of range 1..=4")]
    TracksOutOfRange(u8),
}

/// Track indices a movement in `dir` may use on a section with `max_tracks`
/// parallel tracks. Ascending traffic gets the odd tracks, descending traffic
/// the low/even ones; track 1 is shared so single-track operation stays
/// possible. The two sets cover 1..=max_tracks between them.
pub fn allowed_tracks(dir: Direction, max_tracks: u8) -> Result<Vec<u8>, DomainError> {
    if max_tracks == 0 || max_tracks > 4 {
        return Err(DomainError::TracksOutOfRange(max_tracks));
    }
    Ok(match (dir, max_tracks) {
        (Direction::Ascending, 1 | 2) => vec![1],
        (Direction::Ascending, _) => vec![1, 3],
        (Direction::Descending, 1) => vec![1],
        (Direction::Descending, 2 | 3) => vec![1, 2],
        (Direction::Descending, _) => vec![1, 2, 4],
    })
}

/// Track indices whose construction is implied by building `track`:
/// track 2 presumes track 1, tracks 3 and 4 presume track 2.
pub fn implied_tracks(track: u8) -> &'static [u8] {
    match track {
        2 => &[1],
        3 | 4 => &[1, 2],
        _ => &[],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascending_two_tracks_only_track_one() {
        assert_eq!(allowed_tracks(Direction::Ascending, 2).unwrap(), vec![1]);
    }

    #[test]
    fn descending_four_tracks() {
        assert_eq!(allowed_tracks(Direction::Descending, 4).unwrap(), vec![1, 2, 4]);
    }

    #[test]
    fn ascending_four_tracks() {
        assert_eq!(allowed_tracks(Direction::Ascending, 4).unwrap(), vec![1, 3]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(allowed_tracks(Direction::Ascending, 0).is_err());
        assert!(allowed_tracks(Direction::Descending, 5).is_err());
    }

    #[test]
    fn direction_is_lexicographic() {
        assert_eq!(direction(&"A".into(), &"B".into()), Direction::Ascending);
        assert_eq!(direction(&"B".into(), &"A".into()), Direction::Descending);
        assert_eq!(direction(&"N10".into(), &"N9".into()), Direction::Ascending);
    }

    proptest! {
        #[test]
        fn track_sets_cover_and_share_track_one(m in 1u8..=4) {
            let asc = allowed_tracks(Direction::Ascending, m).unwrap();
            let desc = allowed_tracks(Direction::Descending, m).unwrap();
            prop_assert!(asc.contains(&1));
            prop_assert!(desc.contains(&1));
            let mut union: Vec<u8> = asc.iter().chain(desc.iter()).copied().collect();
            union.sort_unstable();
            union.dedup();
            prop_assert_eq!(union, (1..=m).collect::<Vec<u8>>());
        }
    }

    #[test]
    fn section_key_canonicalizes() {
        let k1 = SectionKey::new("B".into(), "A".into());
        let k2 = SectionKey::new("A".into(), "B".into());
        assert_eq!(k1, k2);
        assert_eq!(k1.other(&"A".into()), &NodeId::from("B"));
    }

    #[test]
    fn link_key_is_undirected() {
        assert_eq!(
            LinkKey::new("I".into(), "A".into(), "B".into()),
            LinkKey::new("I".into(), "B".into(), "A".into())
        );
    }
}
