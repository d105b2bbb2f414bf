//! Railway network design from a strategic timetable.
//!
//! Given candidate infrastructure (sections with up to four parallel tracks,
//! station through-links, travel-time and headway reduction levers) and one or
//! more timetable scenarios, this crate decides the cheapest buildable network
//! on which every scenario can run, by way of a mixed-integer model with an
//! exact in-repo branch-and-bound solver. A brute-force oracle and an
//! independent plan checker re-derive feasibility from first principles so the
//! solver can be cross-examined on desk-size instances.

pub mod domain;
pub mod generate;
pub mod milp;
pub mod oracle;
pub mod pipeline;
pub mod plan;
pub mod preprocess;
pub mod rat;
pub mod schema;
pub mod shortest;
pub mod solve;
pub mod validate;

pub use domain::{
    allowed_tracks, direction, BuildConfig, Direction, InfrastructureSpec, LinkKey, Node,
    NodeId, NodeLink, RelationKind, Scenario, ScenarioId, Section, SectionKey, TimetableFamily,
    TimingRelation, Train, TrainId, TrainKey, TrainType,
};
pub use rat::Rat;
