//! Network plans: the solved artefact (built tracks, purchased links and
//! reductions, per-scenario train routes with times), a rule checker that
//! re-derives feasibility from the instance alone, and exact cost
//! recomputation.
//!
//! The checker deliberately shares nothing with the model builder; it reads
//! the plan the way an operator would, so a wrong model and a wrong checker
//! would have to agree by accident to let a bad plan through.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    allowed_tracks, direction, implied_tracks, BuildConfig, InfrastructureSpec, LinkKey, NodeId,
    RelationKind, ScenarioId, SectionKey, TimetableFamily, TrainId, TrainKey, TrainType,
};
use crate::milp::{MilpModel, VarName};
use crate::preprocess::{Movement, RelevantSets};
use crate::rat::{format_decimal, rat, Rat};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanSolution {
    /// Exact total cost as a decimal string.
    pub objective: String,
    pub tracks: Vec<TrackBuild>,
    pub links: Vec<LinkBuild>,
    pub time_reductions: Vec<ReductionBuy>,
    pub headway_reductions: Vec<ReductionBuy>,
    pub scenarios: Vec<ScenarioPlan>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrackBuild {
    pub from: String,
    pub to: String,
    pub track: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinkBuild {
    pub at: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionBuy {
    pub from: String,
    pub to: String,
    pub minutes: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioPlan {
    pub id: String,
    pub active: bool,
    pub trains: Vec<TrainPlan>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainPlan {
    pub id: String,
    pub active: bool,
    pub stops: Vec<StopPlan>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StopPlan {
    pub node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub departure: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_to_next: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("cannot reconstruct route for {0}: {1}")]
    BrokenChain(TrainKey, String),
}

/// Reads solver values back into a plan. Movement chains are rebuilt from
/// the chosen arcs; times come straight from the event variables, which are
/// integral at accepted incumbents.
pub fn extract_plan(
    family: &TimetableFamily,
    sets: &RelevantSets,
    model: &MilpModel,
    values: &[i64],
    objective: Rat,
) -> Result<PlanSolution, ExtractError> {
    let get = |name: &VarName| -> i64 { model.var_id(name).map_or(0, |id| values[id.0]) };

    let mut tracks = Vec::new();
    for (key, track) in &sets.section_tracks {
        if get(&VarName::Track { section: key.clone(), track: *track }) != 0 {
            tracks.push(TrackBuild {
                from: key.lo.to_string(),
                to: key.hi.to_string(),
                track: *track,
            });
        }
    }

    let mut links = Vec::new();
    for key in &sets.link_keys {
        let name = VarName::Link { at: key.at.clone(), lo: key.lo.clone(), hi: key.hi.clone() };
        if get(&name) != 0 {
            links.push(LinkBuild {
                at: key.at.to_string(),
                from: key.lo.to_string(),
                to: key.hi.to_string(),
            });
        }
    }

    let used_sections: BTreeSet<&SectionKey> =
        sets.section_tracks.iter().map(|(key, _)| key).collect();
    let mut time_reductions = Vec::new();
    let mut headway_reductions = Vec::new();
    for key in used_sections {
        let u = get(&VarName::TimeReduction { from: key.lo.clone(), to: key.hi.clone() });
        if u > 0 {
            time_reductions.push(ReductionBuy {
                from: key.lo.to_string(),
                to: key.hi.to_string(),
                minutes: u,
            });
        }
        let w = get(&VarName::HeadwayReduction { from: key.lo.clone(), to: key.hi.clone() });
        if w > 0 {
            headway_reductions.push(ReductionBuy {
                from: key.lo.to_string(),
                to: key.hi.to_string(),
                minutes: w,
            });
        }
    }

    let mut chosen: BTreeMap<&TrainKey, BTreeMap<&NodeId, &Movement>> = BTreeMap::new();
    for movement in &sets.movements {
        let name = VarName::Move {
            train: movement.train.clone(),
            from: movement.from.clone(),
            to: movement.to.clone(),
            track: movement.track,
        };
        if get(&name) != 0 {
            let slot = chosen.entry(&movement.train).or_default();
            if slot.insert(&movement.from, movement).is_some() {
                return Err(ExtractError::BrokenChain(
                    movement.train.clone(),
                    format!("two active movements leave {}", movement.from),
                ));
            }
        }
    }

    let mut scenarios = Vec::new();
    for scenario in &family.scenarios {
        let s_active = match model.var_id(&VarName::ScenarioActive { scenario: scenario.id.clone() })
        {
            Some(id) => values[id.0] != 0,
            None => true,
        };
        let mut trains = Vec::new();
        for train in scenario.trains.values() {
            let key = scenario.train_key(&train.id);
            let t_active = if !s_active {
                false
            } else if train.optional {
                match model.var_id(&VarName::TrainActive { train: key.clone() }) {
                    Some(id) => values[id.0] != 0,
                    None => true,
                }
            } else {
                true
            };
            let stops = if t_active {
                let arcs = chosen.remove(&key).unwrap_or_default();
                walk_chain(&key, &train.origin, &train.destination, arcs, model, values)?
            } else {
                Vec::new()
            };
            trains.push(TrainPlan { id: train.id.to_string(), active: t_active, stops });
        }
        scenarios.push(ScenarioPlan { id: scenario.id.to_string(), active: s_active, trains });
    }
    for (key, arcs) in chosen {
        if !arcs.is_empty() {
            return Err(ExtractError::BrokenChain(
                key.clone(),
                "inactive train has active movements".into(),
            ));
        }
    }

    Ok(PlanSolution {
        objective: format_decimal(&objective),
        tracks,
        links,
        time_reductions,
        headway_reductions,
        scenarios,
    })
}

fn walk_chain(
    key: &TrainKey,
    origin: &NodeId,
    destination: &NodeId,
    arcs: BTreeMap<&NodeId, &Movement>,
    model: &MilpModel,
    values: &[i64],
) -> Result<Vec<StopPlan>, ExtractError> {
    let get = |name: &VarName| -> i64 { model.var_id(name).map_or(0, |id| values[id.0]) };
    let mut stops = Vec::new();
    let mut at = origin.clone();
    let mut arrived: Option<i64> = None;
    let mut used = 0usize;
    loop {
        if at == *destination {
            stops.push(StopPlan {
                node: at.to_string(),
                arrival: arrived,
                departure: None,
                track_to_next: None,
            });
            break;
        }
        let Some(movement) = arcs.get(&at) else {
            return Err(ExtractError::BrokenChain(
                key.clone(),
                format!("no active movement out of {at}"),
            ));
        };
        let depart = get(&VarName::Departure {
            train: movement.train.clone(),
            from: movement.from.clone(),
            to: movement.to.clone(),
            track: movement.track,
        });
        let arrive = get(&VarName::Arrival {
            train: movement.train.clone(),
            from: movement.from.clone(),
            to: movement.to.clone(),
            track: movement.track,
        });
        stops.push(StopPlan {
            node: at.to_string(),
            arrival: arrived,
            departure: Some(depart),
            track_to_next: Some(movement.track),
        });
        arrived = Some(arrive);
        at = movement.to.clone();
        used += 1;
        if used > arcs.len() {
            return Err(ExtractError::BrokenChain(key.clone(), "movement cycle".into()));
        }
    }
    if used != arcs.len() {
        return Err(ExtractError::BrokenChain(
            key.clone(),
            "active movements left over after reaching the destination".into(),
        ));
    }
    Ok(stops)
}

struct Occupation<'a> {
    scenario_pos: usize,
    train: &'a str,
    ty: &'a TrainType,
    key: SectionKey,
    ascending: bool,
    track: u8,
    depart: i64,
    arrive: i64,
}

/// Checks every rule the plan must satisfy. Rule ids are stable and used by
/// the mutation tests:
/// path, link, travel-time, time-bounds, node-timing, max-stop, frequency,
/// transfer, headway-following, headway-crossing, conflict, track-order,
/// reduction-cap, coverage-share, optional-count.
pub fn check_plan(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    plan: &PlanSolution,
) -> Vec<Violation> {
    let mut out: Vec<Violation> = Vec::new();
    macro_rules! flag {
        ($rule:expr, $($arg:tt)*) => {
            out.push(Violation { rule: $rule, message: format!($($arg)*) })
        };
    }

    // Built infrastructure.
    let mut built: BTreeMap<SectionKey, BTreeSet<u8>> = BTreeMap::new();
    for tb in &plan.tracks {
        let a = NodeId::from(tb.from.as_str());
        let b = NodeId::from(tb.to.as_str());
        match spec.section(&a, &b) {
            None => flag!("track-order", "built track on unknown section {}-{}", tb.from, tb.to),
            Some(section) => {
                let eff = section.effective_max_tracks(config);
                if tb.track < 1 || tb.track > eff {
                    flag!(
                        "track-order",
                        "track {} on {}-{} outside the buildable range 1..={eff}",
                        tb.track,
                        section.key.lo,
                        section.key.hi
                    );
                }
                if !built.entry(section.key.clone()).or_default().insert(tb.track) {
                    flag!("track-order", "track {} on {}-{} listed twice", tb.track, tb.from, tb.to);
                }
            }
        }
    }
    for (key, set) in &built {
        for &t in set {
            for need in implied_tracks(t) {
                if !set.contains(need) {
                    flag!(
                        "track-order",
                        "track {t} on {}-{} requires track {need} to be built first",
                        key.lo,
                        key.hi
                    );
                }
            }
        }
    }

    let mut links_built: BTreeSet<LinkKey> = BTreeSet::new();
    for lb in &plan.links {
        let key = LinkKey::new(
            NodeId::from(lb.at.as_str()),
            NodeId::from(lb.from.as_str()),
            NodeId::from(lb.to.as_str()),
        );
        if !spec.links.contains_key(&key) {
            flag!("link", "purchased link ({},{},{}) is not declared", lb.at, lb.from, lb.to);
        } else if !links_built.insert(key) {
            flag!("link", "link ({},{},{}) listed twice", lb.at, lb.from, lb.to);
        }
    }

    let mut gather = |entries: &Vec<ReductionBuy>, what: &str| -> BTreeMap<SectionKey, i64> {
        let mut map = BTreeMap::new();
        for rb in entries {
            let a = NodeId::from(rb.from.as_str());
            let b = NodeId::from(rb.to.as_str());
            match spec.section(&a, &b) {
                None => flag!("reduction-cap", "{what} reduction on unknown section {}-{}", rb.from, rb.to),
                Some(section) => {
                    if map.insert(section.key.clone(), rb.minutes).is_some() {
                        flag!("reduction-cap", "{what} reduction on {}-{} listed twice", rb.from, rb.to);
                    }
                }
            }
        }
        map
    };
    let time_red = gather(&plan.time_reductions, "travel-time");
    let headway_red = gather(&plan.headway_reductions, "headway");
    for (map, what, cap_of) in [
        (&time_red, "travel-time", true),
        (&headway_red, "headway", false),
    ] {
        for (key, minutes) in map {
            let section = &spec.sections[key];
            let cap = if cap_of {
                section.time_reduction_cap(config)
            } else {
                section.headway_reduction_cap(config)
            };
            if *minutes < 0 || *minutes > cap {
                flag!(
                    "reduction-cap",
                    "{what} reduction of {minutes} min on {}-{} outside 0..={cap}",
                    key.lo,
                    key.hi
                );
            }
        }
    }

    // Activation bookkeeping.
    let mut active_scenarios = 0i64;
    let mut seen_scenarios: BTreeSet<&str> = BTreeSet::new();
    // (scenario index in family, plan entry) for runs processed later
    let mut listed: Vec<(usize, &ScenarioPlan)> = Vec::new();
    for sp in &plan.scenarios {
        let sid = ScenarioId::from(sp.id.as_str());
        let Some(pos) = family.scenarios.iter().position(|s| s.id == sid) else {
            flag!("coverage-share", "plan lists unknown scenario {}", sp.id);
            continue;
        };
        if !seen_scenarios.insert(sp.id.as_str()) {
            flag!("coverage-share", "scenario {} listed twice", sp.id);
            continue;
        }
        if sp.active {
            active_scenarios += 1;
        }
        listed.push((pos, sp));

        let scenario = &family.scenarios[pos];
        let mut seen_trains: BTreeSet<&str> = BTreeSet::new();
        let mut active_optional = 0u32;
        for tp in &sp.trains {
            let tid = TrainId::from(tp.id.as_str());
            let Some(train) = scenario.trains.get(&tid) else {
                flag!("optional-count", "plan lists unknown train {} in scenario {}", tp.id, sp.id);
                continue;
            };
            if !seen_trains.insert(tp.id.as_str()) {
                flag!("optional-count", "train {}.{} listed twice", sp.id, tp.id);
                continue;
            }
            if sp.active {
                if train.optional {
                    if tp.active {
                        active_optional += 1;
                    } else if scenario.chosen_optional.contains(&tid) {
                        flag!(
                            "optional-count",
                            "scenario {} demands optional train {} but it is not running",
                            sp.id,
                            tp.id
                        );
                    }
                } else if !tp.active {
                    flag!(
                        "optional-count",
                        "mandatory train {}.{} is not running in an active scenario",
                        sp.id,
                        tp.id
                    );
                }
            } else if tp.active {
                flag!("optional-count", "train {}.{} runs in an inactive scenario", sp.id, tp.id);
            }
            if !tp.active && !tp.stops.is_empty() {
                flag!("optional-count", "inactive train {}.{} has a route", sp.id, tp.id);
            }
        }
        for tid in scenario.trains.keys() {
            if !seen_trains.contains(tid.to_string().as_str()) {
                flag!("optional-count", "plan does not list train {}.{}", sp.id, tid);
            }
        }
        if sp.active && active_optional < scenario.demanded_optional_count {
            flag!(
                "optional-count",
                "scenario {} runs {active_optional} optional trains, {} demanded",
                sp.id,
                scenario.demanded_optional_count
            );
        }
    }
    for scenario in &family.scenarios {
        if !seen_scenarios.contains(scenario.id.to_string().as_str()) {
            flag!("coverage-share", "plan does not list scenario {}", scenario.id);
        }
    }
    if active_scenarios < family.required_active() {
        flag!(
            "coverage-share",
            "{active_scenarios} scenarios operate, coverage requires {}",
            family.required_active()
        );
    }

    // Routes, timing, and occupations.
    let mut occupations: Vec<Occupation<'_>> = Vec::new();
    for &(pos, sp) in &listed {
        let scenario = &family.scenarios[pos];
        for tp in &sp.trains {
            if !tp.active {
                continue;
            }
            let tid = TrainId::from(tp.id.as_str());
            let Some(train) = scenario.trains.get(&tid) else {
                continue;
            };
            let label = format!("{}.{}", sp.id, tp.id);

            if tp.stops.len() < 2 {
                flag!("path", "{label} has fewer than two stops");
                continue;
            }
            let nodes: Vec<NodeId> =
                tp.stops.iter().map(|s| NodeId::from(s.node.as_str())).collect();
            let mut nodes_ok = true;
            for n in &nodes {
                if !spec.nodes.contains_key(n) {
                    flag!("path", "{label} visits unknown node {n}");
                    nodes_ok = false;
                }
            }
            if !nodes_ok {
                continue;
            }
            if nodes[0] != train.origin {
                flag!("path", "{label} starts at {} instead of {}", nodes[0], train.origin);
            }
            if nodes[nodes.len() - 1] != train.destination {
                flag!(
                    "path",
                    "{label} ends at {} instead of {}",
                    nodes[nodes.len() - 1],
                    train.destination
                );
            }
            let distinct: BTreeSet<&NodeId> = nodes.iter().collect();
            if distinct.len() != nodes.len() {
                flag!("path", "{label} visits a node twice");
            }
            for via in &train.via_nodes {
                if !distinct.contains(via) {
                    flag!("path", "{label} misses required via node {via}");
                }
            }
            for window in nodes.windows(3) {
                let (prev, at, next) = (&window[0], &window[1], &window[2]);
                if spec.link(at, prev, next).is_none() {
                    flag!("path", "{label} turns {prev}->{at}->{next} without a declared link");
                } else if !links_built.contains(&LinkKey::new(at.clone(), prev.clone(), next.clone()))
                {
                    flag!("link", "{label} uses link ({at},{prev},{next}) that is not purchased");
                }
            }

            // Stop record completeness.
            let last = tp.stops.len() - 1;
            let mut record_ok = true;
            for (i, stop) in tp.stops.iter().enumerate() {
                if i > 0 && stop.arrival.is_none() {
                    flag!("path", "{label} stop {} has no arrival time", stop.node);
                    record_ok = false;
                }
                if i < last && stop.departure.is_none() {
                    flag!("path", "{label} stop {} has no departure time", stop.node);
                    record_ok = false;
                }
                if i < last && stop.track_to_next.is_none() {
                    flag!("path", "{label} leg from {} has no track", stop.node);
                    record_ok = false;
                }
                for time in [stop.arrival, stop.departure].into_iter().flatten() {
                    if time < 0 {
                        flag!("node-timing", "{label} has a negative time at {}", stop.node);
                    }
                }
            }
            if !record_ok {
                continue;
            }

            // Interior dwell rules.
            for stop in &tp.stops[1..last] {
                let (arr, dep) = (stop.arrival.unwrap(), stop.departure.unwrap());
                if dep < arr {
                    flag!("node-timing", "{label} departs {} at {dep} before arriving at {arr}", stop.node);
                }
                let node = &spec.nodes[&NodeId::from(stop.node.as_str())];
                if dep - arr > node.max_stop_minutes {
                    flag!(
                        "max-stop",
                        "{label} waits {} min at {}, at most {} allowed",
                        dep - arr,
                        stop.node,
                        node.max_stop_minutes
                    );
                }
            }

            // Window rules.
            let first_dep = tp.stops[0].departure.unwrap();
            let last_arr = tp.stops[last].arrival.unwrap();
            if first_dep < train.earliest_departure {
                flag!(
                    "time-bounds",
                    "{label} departs at {first_dep}, earliest allowed is {}",
                    train.earliest_departure
                );
            }
            if last_arr > train.latest_arrival {
                flag!(
                    "time-bounds",
                    "{label} arrives at {last_arr}, latest allowed is {}",
                    train.latest_arrival
                );
            }

            // Per-leg travel and occupation records.
            for i in 0..last {
                let (from, to) = (&nodes[i], &nodes[i + 1]);
                let Some(section) = spec.section(from, to) else {
                    flag!("path", "{label} travels {from}-{to} without a section");
                    continue;
                };
                let depart = tp.stops[i].departure.unwrap();
                let arrive = tp.stops[i + 1].arrival.unwrap();
                let track = tp.stops[i].track_to_next.unwrap();

                match section.travel(&train.train_type) {
                    None => flag!(
                        "travel-time",
                        "no travel time for type {} on {from}-{to}",
                        train.train_type
                    ),
                    Some(t) => {
                        let u = time_red.get(&section.key).copied().unwrap_or(0);
                        if arrive - depart != t - u {
                            flag!(
                                "travel-time",
                                "{label} covers {from}-{to} in {} min, expected {}",
                                arrive - depart,
                                t - u
                            );
                        }
                    }
                }

                let eff = section.effective_max_tracks(config);
                if !built.get(&section.key).is_some_and(|set| set.contains(&track)) {
                    flag!("track-order", "{label} uses unbuilt track {track} on {from}-{to}");
                }
                match allowed_tracks(direction(from, to), eff) {
                    Ok(allowed) if allowed.contains(&track) => {}
                    Ok(_) => flag!(
                        "track-order",
                        "{label} uses track {track} on {from}-{to} against its direction"
                    ),
                    Err(_) => flag!("track-order", "{from}-{to} has no usable tracks"),
                }

                occupations.push(Occupation {
                    scenario_pos: pos,
                    train: &tp.id,
                    ty: &train.train_type,
                    key: section.key.clone(),
                    ascending: from < to,
                    track,
                    depart,
                    arrive,
                });
            }
        }

        // Relations hold whenever the scenario operates.
        if sp.active {
            for rel in &scenario.relations {
                let rule = match rel.kind {
                    RelationKind::Transfer => "transfer",
                    _ => "frequency",
                };
                let event = |train_id: &TrainId, departs: bool| -> Option<i64> {
                    let tp = sp.trains.iter().find(|t| t.id == train_id.to_string())?;
                    let stop = tp.stops.iter().find(|s| s.node == rel.at_node.to_string())?;
                    if departs {
                        stop.departure
                    } else {
                        stop.arrival
                    }
                };
                let (first_departs, second_departs) = match rel.kind {
                    RelationKind::ArrivalFrequency => (false, false),
                    RelationKind::DepartureFrequency => (true, true),
                    RelationKind::Transfer => (false, true),
                };
                let Some(e1) = event(&rel.first, first_departs) else {
                    flag_missing(&mut out, rule, &sp.id, &rel.first, &rel.at_node);
                    continue;
                };
                let Some(e2) = event(&rel.second, second_departs) else {
                    flag_missing(&mut out, rule, &sp.id, &rel.second, &rel.at_node);
                    continue;
                };
                let gap = e2 - e1;
                if gap < rel.min_minutes || gap > rel.max_minutes {
                    out.push(Violation {
                        rule,
                        message: format!(
                            "{} between {}.{} and {}.{} at {} is {gap} min, allowed {}..={}",
                            rel.kind,
                            sp.id,
                            rel.first,
                            sp.id,
                            rel.second,
                            rel.at_node,
                            rel.min_minutes,
                            rel.max_minutes
                        ),
                    });
                }
            }
        }
    }

    // Shared-track rules.
    for i in 0..occupations.len() {
        for j in i + 1..occupations.len() {
            let (a, b) = (&occupations[i], &occupations[j]);
            if a.key != b.key || a.track != b.track {
                continue;
            }
            let same_scenario = a.scenario_pos == b.scenario_pos;
            if same_scenario && a.train == b.train {
                continue;
            }
            if !same_scenario && !config.cross_scenario_headways {
                continue;
            }
            let section = &spec.sections[&a.key];
            let (first, second) = if (a.depart, a.arrive) <= (b.depart, b.arrive) {
                (a, b)
            } else {
                (b, a)
            };
            if a.ascending == b.ascending {
                let w = headway_red.get(&a.key).copied().unwrap_or(0);
                match section.headway(first.ty, second.ty) {
                    None => flag!(
                        "headway-following",
                        "no headway defined for ({}, {}) on {}-{}",
                        first.ty,
                        second.ty,
                        a.key.lo,
                        a.key.hi
                    ),
                    Some(h) => {
                        if second.depart - first.depart < h - w {
                            flag!(
                                "headway-following",
                                "{} follows {} on {}-{} track {} after {} min, {} required",
                                second.train,
                                first.train,
                                a.key.lo,
                                a.key.hi,
                                a.track,
                                second.depart - first.depart,
                                h - w
                            );
                        }
                    }
                }
            } else {
                let into = if first.ascending { &a.key.hi } else { &a.key.lo };
                let ct = spec.nodes[into].crossing_time_minutes;
                if second.depart < first.arrive + ct {
                    flag!(
                        "headway-crossing",
                        "{} enters {}-{} track {} at {} before {} clears it at {}",
                        second.train,
                        a.key.lo,
                        a.key.hi,
                        a.track,
                        second.depart,
                        first.train,
                        first.arrive + ct
                    );
                }
                if first.depart.max(second.depart) < first.arrive.min(second.arrive) {
                    flag!(
                        "conflict",
                        "{} and {} occupy {}-{} track {} in opposite directions at once",
                        first.train,
                        second.train,
                        a.key.lo,
                        a.key.hi,
                        a.track
                    );
                }
            }
        }
    }

    out.sort_by(|x, y| x.rule.cmp(y.rule).then_with(|| x.message.cmp(&y.message)));
    out
}

fn flag_missing(
    out: &mut Vec<Violation>,
    rule: &'static str,
    scenario: &str,
    train: &TrainId,
    at: &NodeId,
) {
    out.push(Violation {
        rule,
        message: format!("{scenario}.{train} has no timed event at {at}"),
    });
}

/// Exact cost of a plan: built infrastructure plus penalties for scenarios
/// and trains that do not run.
pub fn recompute_cost(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    plan: &PlanSolution,
) -> Result<Rat, String> {
    let mut total = rat(0);
    for tb in &plan.tracks {
        let section = spec
            .section(&NodeId::from(tb.from.as_str()), &NodeId::from(tb.to.as_str()))
            .ok_or_else(|| format!("unknown section {}-{}", tb.from, tb.to))?;
        let cost = section
            .track_cost
            .get(&tb.track)
            .ok_or_else(|| format!("no cost for track {} on {}-{}", tb.track, tb.from, tb.to))?;
        total += *cost;
    }
    for lb in &plan.links {
        let link = spec
            .link(
                &NodeId::from(lb.at.as_str()),
                &NodeId::from(lb.from.as_str()),
                &NodeId::from(lb.to.as_str()),
            )
            .ok_or_else(|| format!("unknown link ({},{},{})", lb.at, lb.from, lb.to))?;
        total += link.cost;
    }
    for (entries, time) in [(&plan.time_reductions, true), (&plan.headway_reductions, false)] {
        for rb in entries {
            let section = spec
                .section(&NodeId::from(rb.from.as_str()), &NodeId::from(rb.to.as_str()))
                .ok_or_else(|| format!("unknown section {}-{}", rb.from, rb.to))?;
            let unit = if time {
                section.time_reduction_cost
            } else {
                section.headway_reduction_cost
            };
            total += rat(rb.minutes) * unit;
        }
    }
    for sp in &plan.scenarios {
        let scenario = family
            .scenario(&ScenarioId::from(sp.id.as_str()))
            .ok_or_else(|| format!("unknown scenario {}", sp.id))?;
        if !sp.active {
            total += scenario.penalty;
            for train in scenario.trains.values() {
                total += train.penalty;
            }
        } else {
            for tp in &sp.trains {
                if !tp.active {
                    let train = scenario
                        .trains
                        .get(&TrainId::from(tp.id.as_str()))
                        .ok_or_else(|| format!("unknown train {}.{}", sp.id, tp.id))?;
                    total += train.penalty;
                }
            }
        }
    }
    Ok(total)
}
