//! Instance well-formedness diagnostics.

use std::collections::BTreeSet;
use std::fmt;

use crate::domain::*;
use crate::rat::{is_nonnegative, rat};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Checks an in-memory instance against every structural invariant the model
/// builders rely on. Returns an empty list when the instance is usable.
pub fn validate_instance(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |location: &str, message: String| {
        out.push(Diagnostic { location: location.to_string(), message });
    };

    for node in spec.nodes.values() {
        if node.max_stop_minutes < 0 {
            push(&format!("node {}", node.id), "negative max stop".into());
        }
        if node.crossing_time_minutes < 0 {
            push(&format!("node {}", node.id), "negative crossing time".into());
        }
    }

    let family_types: BTreeSet<&TrainType> =
        family.trains().map(|(_, t)| &t.train_type).collect();

    for (key, section) in &spec.sections {
        let loc = format!("section {key}");
        if key.lo == key.hi {
            push(&loc, "endpoints must be distinct".into());
        }
        for end in [&key.lo, &key.hi] {
            if !spec.nodes.contains_key(end) {
                push(&loc, format!("endpoint {end} is not a node"));
            }
        }
        if section.max_tracks == 0 || section.max_tracks > 4 {
            push(&loc, format!("max_tracks {} out of range 1..=4", section.max_tracks));
        }
        if section.length_km <= rat(0) {
            push(&loc, "length must be positive".into());
        }
        for tr in 1..=section.max_tracks {
            match section.track_cost.get(&tr) {
                None => push(&loc, format!("missing track cost for track {tr}")),
                Some(c) if !is_nonnegative(c) => {
                    push(&loc, format!("negative track cost for track {tr}"))
                }
                _ => {}
            }
        }
        for (ty, t) in &section.travel_time {
            if *t <= 0 {
                push(&loc, format!("travel time for type {ty} must be positive"));
            }
            if section.max_time_reduction >= *t {
                push(
                    &loc,
                    format!(
                        "time reduction cap {} would allow type {ty} a nonpositive travel time",
                        section.max_time_reduction
                    ),
                );
            }
        }
        for ((lead, follow), h) in &section.base_headway {
            if *h <= 0 {
                push(&loc, format!("headway ({lead},{follow}) must be positive"));
            }
        }
        if !is_nonnegative(&section.time_reduction_cost)
            || !is_nonnegative(&section.headway_reduction_cost)
        {
            push(&loc, "reduction costs must be nonnegative".into());
        }
        if section.max_time_reduction < 0 || section.max_headway_reduction < 0 {
            push(&loc, "reduction caps must be nonnegative".into());
        }
        let allowance = section.length_allowance();
        if section.max_headway_reduction > allowance {
            push(
                &loc,
                format!(
                    "headway reduction cap {} exceeds one minute per ten km ({allowance})",
                    section.max_headway_reduction
                ),
            );
        }
        if let Some(min_h) = section.min_headway() {
            if section.max_headway_reduction > min_h - config.headway_floor_minutes {
                push(
                    &loc,
                    format!(
                        "headway reduction cap {} would cut some headway below the {}-minute floor",
                        section.max_headway_reduction, config.headway_floor_minutes
                    ),
                );
            }
        }
        for ty in &family_types {
            if !section.travel_time.contains_key(*ty) {
                push(&loc, format!("missing travel time for used train type {ty}"));
            }
        }
        for lead in &family_types {
            for follow in &family_types {
                if section.headway(lead, follow).is_none() {
                    push(&loc, format!("missing headway for used type pair ({lead},{follow})"));
                }
            }
        }
    }

    for (key, link) in &spec.links {
        let loc = format!("link {key}");
        if key.lo == key.hi {
            push(&loc, "link ends must be distinct".into());
        }
        for n in [&key.at, &key.lo, &key.hi] {
            if !spec.nodes.contains_key(n) {
                push(&loc, format!("node {n} does not exist"));
            }
        }
        for end in [&key.lo, &key.hi] {
            if spec.section(&key.at, end).is_none() {
                push(&loc, format!("no section between {} and {end}", key.at));
            }
        }
        if !is_nonnegative(&link.cost) {
            push(&loc, "negative link cost".into());
        }
    }

    // connectivity over sections
    if !spec.nodes.is_empty() {
        let start = spec.nodes.keys().next().unwrap();
        let mut seen: BTreeSet<&NodeId> = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            for next in spec.neighbors(n) {
                if !seen.contains(next) {
                    stack.push(next);
                }
            }
        }
        for n in spec.nodes.keys() {
            if !seen.contains(n) {
                push(&format!("node {n}"), "not connected to the rest of the network".into());
            }
        }
    }

    if family.scenarios.is_empty() {
        push("family", "at least one scenario is required".into());
    }
    {
        let mut ids = BTreeSet::new();
        for s in &family.scenarios {
            if !ids.insert(&s.id) {
                push("family", format!("duplicate scenario id {}", s.id));
            }
        }
    }
    if family.coverage_share <= rat(0) || family.coverage_share > rat(1) {
        push("family", "coverage share must lie in (0, 1]".into());
    }

    for scenario in &family.scenarios {
        let sloc = format!("scenario {}", scenario.id);
        if !is_nonnegative(&scenario.penalty) {
            push(&sloc, "negative scenario penalty".into());
        }
        if scenario.demanded_optional_count as usize > scenario.optional_count() {
            push(
                &sloc,
                format!(
                    "demanded optional count {} exceeds the {} optional trains",
                    scenario.demanded_optional_count,
                    scenario.optional_count()
                ),
            );
        }
        for id in &scenario.chosen_optional {
            match scenario.trains.get(id) {
                None => push(&sloc, format!("chosen optional train {id} does not exist")),
                Some(t) if !t.optional => {
                    push(&sloc, format!("chosen optional train {id} is mandatory"))
                }
                _ => {}
            }
        }
        for train in scenario.trains.values() {
            let tloc = format!("train {}.{}", scenario.id, train.id);
            for n in [&train.origin, &train.destination] {
                if !spec.nodes.contains_key(n) {
                    push(&tloc, format!("node {n} does not exist"));
                }
            }
            if train.origin == train.destination {
                push(&tloc, "degenerate train: origin equals destination".into());
            }
            if train.earliest_departure >= train.latest_arrival {
                push(&tloc, "degenerate train: empty time window".into());
            }
            if train.earliest_departure < 0 {
                push(&tloc, "earliest departure must be nonnegative".into());
            }
            if train.latest_arrival > config.planning_horizon_end {
                push(&tloc, "latest arrival lies beyond the planning horizon".into());
            }
            for via in &train.via_nodes {
                if !spec.nodes.contains_key(via) {
                    push(&tloc, format!("via node {via} does not exist"));
                }
                if *via == train.origin || *via == train.destination {
                    push(&tloc, format!("via node {via} duplicates an endpoint"));
                }
            }
            if !is_nonnegative(&train.penalty) {
                push(&tloc, "negative train penalty".into());
            }
        }
        for (i, rel) in scenario.relations.iter().enumerate() {
            let rloc = format!("relation {}#{i}", scenario.id);
            if rel.min_minutes > rel.max_minutes {
                push(&rloc, "min exceeds max".into());
            }
            if !spec.nodes.contains_key(&rel.at_node) {
                push(&rloc, format!("node {} does not exist", rel.at_node));
            }
            if rel.first == rel.second {
                push(&rloc, "relation must couple two distinct trains".into());
            }
            for id in [&rel.first, &rel.second] {
                match scenario.trains.get(id) {
                    None => push(&rloc, format!("train {id} does not exist in this scenario")),
                    Some(t) if t.optional => {
                        push(&rloc, format!("relation references optional train {id}"))
                    }
                    _ => {}
                }
            }
        }
    }

    if config.max_tracks_global != 2 && config.max_tracks_global != 4 {
        push("config", format!("max_tracks_global {} must be 2 or 4", config.max_tracks_global));
    }
    if config.headway_floor_minutes < 1 {
        push("config", "headway floor must be at least one minute".into());
    }
    if config.planning_horizon_end <= 0 {
        push("config", "planning horizon must be positive".into());
    }

    out.sort();
    out
}

#[cfg(test)]
pub mod tests {
    use super::*;
    use std::collections::BTreeMap;

    pub fn node(id: &str, max_stop: i64, crossing: i64) -> Node {
        Node { id: id.into(), max_stop_minutes: max_stop, crossing_time_minutes: crossing }
    }

    pub fn section(
        a: &str,
        b: &str,
        travel: i64,
        headway: i64,
        max_tracks: u8,
        reduction: i64,
    ) -> Section {
        let ty = TrainType::from("local");
        let mut track_cost = BTreeMap::new();
        for tr in 1..=max_tracks {
            track_cost.insert(tr, rat(100));
        }
        Section {
            key: SectionKey::new(a.into(), b.into()),
            length_km: rat(20),
            max_tracks,
            travel_time: BTreeMap::from([(ty.clone(), travel)]),
            base_headway: BTreeMap::from([((ty.clone(), ty), headway)]),
            track_cost,
            time_reduction_cost: rat(100),
            headway_reduction_cost: rat(100),
            max_time_reduction: reduction,
            max_headway_reduction: 0,
        }
    }

    pub fn train(id: &str, origin: &str, destination: &str, dep: i64, arr: i64) -> Train {
        Train {
            id: id.into(),
            train_type: "local".into(),
            origin: origin.into(),
            destination: destination.into(),
            earliest_departure: dep,
            latest_arrival: arr,
            via_nodes: BTreeSet::new(),
            optional: false,
            penalty: rat(0),
        }
    }

    pub fn scenario(id: &str, trains: Vec<Train>) -> Scenario {
        Scenario {
            id: id.into(),
            trains: trains.into_iter().map(|t| (t.id.clone(), t)).collect(),
            relations: Vec::new(),
            penalty: rat(0),
            demanded_optional_count: 0,
            chosen_optional: BTreeSet::new(),
        }
    }

    /// Chain A - B - C with one train type, given travel times per section
    /// and a shared time-reduction cap.
    pub fn chain_abc(t_ab: i64, t_bc: i64, reduction: i64) -> InfrastructureSpec {
        let mut spec = InfrastructureSpec::default();
        for id in ["A", "B", "C"] {
            spec.nodes.insert(id.into(), node(id, 10, 2));
        }
        for (a, b, t) in [("A", "B", t_ab), ("B", "C", t_bc)] {
            let s = section(a, b, t, 4, 2, reduction);
            spec.sections.insert(s.key.clone(), s);
        }
        let link = NodeLink { key: LinkKey::new("B".into(), "A".into(), "C".into()), cost: rat(10) };
        spec.links.insert(link.key.clone(), link);
        spec
    }

    pub fn config_b(horizon: i64) -> BuildConfig {
        BuildConfig::preset_b(horizon)
    }

    #[test]
    fn well_formed_instance_is_clean() {
        let spec = chain_abc(10, 10, 1);
        let family = TimetableFamily::single(scenario("s0", vec![train("k1", "A", "C", 0, 60)]));
        assert!(validate_instance(&spec, &family, &config_b(240)).is_empty());
    }

    #[test]
    fn flags_five_track_section() {
        let mut spec = chain_abc(10, 10, 0);
        let mut s = section("A", "B", 10, 4, 4, 0);
        s.max_tracks = 5;
        spec.sections.insert(s.key.clone(), s);
        let family = TimetableFamily::single(scenario("s0", vec![train("k1", "A", "C", 0, 60)]));
        let diags = validate_instance(&spec, &family, &config_b(240));
        assert!(diags.iter().any(|d| d.message.contains("out of range")), "{diags:?}");
    }

    #[test]
    fn flags_empty_time_window() {
        let spec = chain_abc(10, 10, 0);
        let family = TimetableFamily::single(scenario("s0", vec![train("k1", "A", "C", 50, 50)]));
        let diags = validate_instance(&spec, &family, &config_b(240));
        assert!(diags.iter().any(|d| d.message.contains("degenerate train")), "{diags:?}");
    }

    #[test]
    fn flags_relation_on_optional_train() {
        let spec = chain_abc(10, 10, 0);
        let mut opt = train("k2", "A", "C", 0, 80);
        opt.optional = true;
        opt.penalty = rat(5);
        let mut sc = scenario("s0", vec![train("k1", "A", "C", 0, 60), opt]);
        sc.relations.push(TimingRelation {
            kind: RelationKind::Transfer,
            first: "k1".into(),
            second: "k2".into(),
            at_node: "C".into(),
            min_minutes: 0,
            max_minutes: 30,
        });
        let family = TimetableFamily::single(sc);
        let diags = validate_instance(&spec, &family, &config_b(240));
        assert!(diags.iter().any(|d| d.message.contains("optional train")), "{diags:?}");
    }

    #[test]
    fn flags_disconnected_network() {
        let mut spec = chain_abc(10, 10, 0);
        spec.nodes.insert("Z".into(), node("Z", 5, 1));
        let family = TimetableFamily::single(scenario("s0", vec![train("k1", "A", "C", 0, 60)]));
        let diags = validate_instance(&spec, &family, &config_b(240));
        assert!(diags.iter().any(|d| d.message.contains("not connected")), "{diags:?}");
    }

    #[test]
    fn flags_reduction_cap_reaching_travel_time() {
        let spec = chain_abc(10, 10, 10);
        let family = TimetableFamily::single(scenario("s0", vec![train("k1", "A", "C", 0, 60)]));
        let diags = validate_instance(&spec, &family, &config_b(240));
        assert!(diags.iter().any(|d| d.message.contains("nonpositive travel time")), "{diags:?}");
    }
}
