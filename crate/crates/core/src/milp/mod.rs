//! Mixed-integer model representation.
//!
//! Constraint coefficients and right-hand sides are integers by construction;
//! only objective coefficients carry fractional cost data. That keeps every
//! integral solution exactly checkable in rational arithmetic regardless of
//! how the relaxations are solved.

pub mod build;

pub use build::{build_deterministic, build_robust, compute_big_m};

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{NodeId, ScenarioId, SectionKey, TrainKey};
use crate::rat::Rat;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

/// Structured variable identity; the display form is the LP-file name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum VarName {
    /// y: track `tr` on a section is built.
    Track { section: SectionKey, track: u8 },
    /// l: a station through-link is built.
    Link { at: NodeId, lo: NodeId, hi: NodeId },
    /// u: minutes of travel-time reduction bought, one per orientation.
    TimeReduction { from: NodeId, to: NodeId },
    /// w: minutes of headway reduction bought, one per orientation.
    HeadwayReduction { from: NodeId, to: NodeId },
    /// p: train follows its route with this ordinal.
    PathChoice { train: TrainKey, ordinal: usize },
    /// x: train runs `from -> to` on `track`.
    Move { train: TrainKey, from: NodeId, to: NodeId, track: u8 },
    /// d: minute the movement leaves `from` (0 when unused).
    Departure { train: TrainKey, from: NodeId, to: NodeId, track: u8 },
    /// a: minute the movement reaches `to` (0 when unused).
    Arrival { train: TrainKey, from: NodeId, to: NodeId, track: u8 },
    /// s: scenario is operated.
    ScenarioActive { scenario: ScenarioId },
    /// t: optional train is operated.
    TrainActive { train: TrainKey },
    /// z: `first` precedes `second` on the section behind `from -> to`
    /// (first's arc) and both movements are active.
    Order {
        first: TrainKey,
        second: TrainKey,
        from: NodeId,
        to: NodeId,
        track: u8,
        crossing: bool,
    },
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarName::Track { section, track } => {
                write!(f, "y({},{},{})", section.lo, section.hi, track)
            }
            VarName::Link { at, lo, hi } => write!(f, "l({at},{lo},{hi})"),
            VarName::TimeReduction { from, to } => write!(f, "u({from},{to})"),
            VarName::HeadwayReduction { from, to } => write!(f, "w({from},{to})"),
            VarName::PathChoice { train, ordinal } => write!(f, "p({train},{ordinal})"),
            VarName::Move { train, from, to, track } => {
                write!(f, "x({train},{from},{to},{track})")
            }
            VarName::Departure { train, from, to, track } => {
                write!(f, "d({train},{from},{to},{track})")
            }
            VarName::Arrival { train, from, to, track } => {
                write!(f, "a({train},{from},{to},{track})")
            }
            VarName::ScenarioActive { scenario } => write!(f, "s({scenario})"),
            VarName::TrainActive { train } => write!(f, "t({train})"),
            VarName::Order { first, second, from, to, track, crossing } => {
                let kind = if *crossing { 'c' } else { 'f' };
                write!(f, "z({first},{second},{from},{to},{track},{kind})")
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum VarDomain {
    Binary,
    Integer { lb: i64, ub: i64 },
    Continuous { lb: i64, ub: i64 },
}

impl VarDomain {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarDomain::Continuous { .. })
    }

    pub fn bounds(self) -> (i64, i64) {
        match self {
            VarDomain::Binary => (0, 1),
            VarDomain::Integer { lb, ub } | VarDomain::Continuous { lb, ub } => (lb, ub),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MilpVariable {
    pub name: VarName,
    pub domain: VarDomain,
    pub objective: Rat,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// Row families, used for row names and audits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum ConstraintTag {
    PathChoice,
    LinkUse,
    PathMove,
    TrackUse,
    TrackOrder,
    TravelLo,
    TravelHi,
    ZeroTime,
    DepartEarliest,
    ArriveLatest,
    NodeFlow,
    MaxStop,
    ReductionSymmetry,
    RelationLo,
    RelationHi,
    RelationVisit,
    OrderLink,
    HeadwayGap,
    CrossingGap,
    TrackConflict,
    Coverage,
    Activation,
    OptionalDemand,
}

impl ConstraintTag {
    pub fn label(self) -> &'static str {
        match self {
            ConstraintTag::PathChoice => "path_choice",
            ConstraintTag::LinkUse => "link_use",
            ConstraintTag::PathMove => "path_move",
            ConstraintTag::TrackUse => "track_use",
            ConstraintTag::TrackOrder => "track_order",
            ConstraintTag::TravelLo => "travel_lo",
            ConstraintTag::TravelHi => "travel_hi",
            ConstraintTag::ZeroTime => "zero_time",
            ConstraintTag::DepartEarliest => "depart_earliest",
            ConstraintTag::ArriveLatest => "arrive_latest",
            ConstraintTag::NodeFlow => "node_flow",
            ConstraintTag::MaxStop => "max_stop",
            ConstraintTag::ReductionSymmetry => "reduction_symmetry",
            ConstraintTag::RelationLo => "relation_lo",
            ConstraintTag::RelationHi => "relation_hi",
            ConstraintTag::RelationVisit => "relation_visit",
            ConstraintTag::OrderLink => "order_link",
            ConstraintTag::HeadwayGap => "headway_gap",
            ConstraintTag::CrossingGap => "crossing_gap",
            ConstraintTag::TrackConflict => "track_conflict",
            ConstraintTag::Coverage => "coverage",
            ConstraintTag::Activation => "activation",
            ConstraintTag::OptionalDemand => "optional_demand",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub name: String,
    pub tag: ConstraintTag,
    /// Nonzero coefficients, one entry per variable, ordered by id.
    pub terms: Vec<(VarId, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Clone, Debug, Default)]
pub struct MilpModel {
    pub variables: Vec<MilpVariable>,
    pub constraints: Vec<LinearConstraint>,
    /// Added to the (minimized) objective value; carries penalty offsets.
    pub objective_constant: Rat,
    name_index: BTreeMap<VarName, VarId>,
    tag_counters: BTreeMap<ConstraintTag, usize>,
}

impl MilpModel {
    pub fn new() -> MilpModel {
        MilpModel { objective_constant: crate::rat::rat(0), ..MilpModel::default() }
    }

    pub fn add_variable(&mut self, name: VarName, domain: VarDomain, objective: Rat) -> VarId {
        assert!(
            !self.name_index.contains_key(&name),
            "duplicate variable {name}"
        );
        let id = VarId(self.variables.len());
        self.name_index.insert(name.clone(), id);
        self.variables.push(MilpVariable { name, domain, objective });
        id
    }

    pub fn var_id(&self, name: &VarName) -> Option<VarId> {
        self.name_index.get(name).copied()
    }

    pub fn variable(&self, id: VarId) -> &MilpVariable {
        &self.variables[id.0]
    }

    /// Adds a row; terms with zero coefficient are dropped, duplicates merged.
    pub fn add_row(
        &mut self,
        tag: ConstraintTag,
        terms: impl IntoIterator<Item = (VarId, i64)>,
        sense: Sense,
        rhs: i64,
    ) {
        let mut merged: BTreeMap<VarId, i64> = BTreeMap::new();
        for (id, c) in terms {
            *merged.entry(id).or_insert(0) += c;
        }
        merged.retain(|_, c| *c != 0);
        let ordinal = self.tag_counters.entry(tag).or_insert(0);
        let name = format!("{}_{}", tag.label(), ordinal);
        *ordinal += 1;
        self.constraints.push(LinearConstraint {
            name,
            tag,
            terms: merged.into_iter().collect(),
            sense,
            rhs,
        });
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_integer_variables(&self) -> usize {
        self.variables.iter().filter(|v| v.domain.is_integer()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn names_render_compactly() {
        let train = TrainKey { scenario: "s0".into(), train: "k1".into() };
        let name = VarName::Move { train, from: "A".into(), to: "B".into(), track: 1 };
        assert_eq!(name.to_string(), "x(s0.k1,A,B,1)");
        let name = VarName::Track { section: SectionKey::new("B".into(), "A".into()), track: 2 };
        assert_eq!(name.to_string(), "y(A,B,2)");
    }

    #[test]
    fn rows_merge_and_drop_zero_terms() {
        let mut m = MilpModel::new();
        let a = m.add_variable(
            VarName::ScenarioActive { scenario: "s0".into() },
            VarDomain::Binary,
            rat(0),
        );
        let b = m.add_variable(
            VarName::ScenarioActive { scenario: "s1".into() },
            VarDomain::Binary,
            rat(0),
        );
        m.add_row(ConstraintTag::Coverage, vec![(a, 1), (b, 2), (a, -1)], Sense::Ge, 1);
        assert_eq!(m.constraints[0].terms, vec![(b, 2)]);
        assert_eq!(m.constraints[0].name, "coverage_0");
        m.add_row(ConstraintTag::Coverage, vec![(a, 1)], Sense::Ge, 1);
        assert_eq!(m.constraints[1].name, "coverage_1");
    }

    #[test]
    #[should_panic(expected = "duplicate variable")]
    fn duplicate_names_are_rejected() {
        let mut m = MilpModel::new();
        let name = VarName::ScenarioActive { scenario: "s0".into() };
        m.add_variable(name.clone(), VarDomain::Binary, rat(0));
        m.add_variable(name, VarDomain::Binary, rat(0));
    }
}
