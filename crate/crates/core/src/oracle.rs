//! Exhaustive reference solver for tiny instances.
//!
//! Costs are derived from first principles: enumerate which scenarios run
//! and which optional trains they keep, enumerate every simple route and
//! track assignment, price the infrastructure those choices touch, then
//! search reduction purchases in cost order until a timetable exists.
//! Timetable existence is a difference-constraint system, with one two-way
//! branch per pair of movements sharing a track.
//!
//! Nothing here touches the preprocessing or model-building code, so a
//! disagreement with the main pipeline points at a real bug on one side.
//! Everything is exponential; [`exhaustive_best`] refuses instances beyond
//! a small fixed size instead of pretending to scale.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::domain::{
    BuildConfig, InfrastructureSpec, LinkKey, NodeId, RelationKind, Scenario, SectionKey,
    TimetableFamily, TimingRelation, Train, TrainId,
};
use crate::rat::{rat, Rat};

#[derive(Clone, Debug, PartialEq)]
pub enum OracleOutcome {
    Optimal(Rat),
    Infeasible,
}

#[derive(Debug, thiserror::Error)]
#[error("instance too large for exhaustive search: {0}")]
pub struct TooLarge(pub String);

const MAX_NODES: usize = 6;
const MAX_SCENARIOS: usize = 3;
const MAX_SCENARIO_TRAINS: usize = 6;
const MAX_HORIZON: i64 = 120;
const MAX_ROUTES_PER_TRAIN: usize = 1024;

/// Minimum total cost over every design and timetable, or proof that none
/// exists. Refuses instances whose enumeration would not finish promptly.
pub fn exhaustive_best(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
) -> Result<OracleOutcome, TooLarge> {
    if spec.nodes.len() > MAX_NODES {
        return Err(TooLarge(format!("{} nodes (limit {MAX_NODES})", spec.nodes.len())));
    }
    if family.scenarios.len() > MAX_SCENARIOS {
        return Err(TooLarge(format!(
            "{} scenarios (limit {MAX_SCENARIOS})",
            family.scenarios.len()
        )));
    }
    for scenario in &family.scenarios {
        if scenario.trains.len() > MAX_SCENARIO_TRAINS {
            return Err(TooLarge(format!(
                "scenario {} has {} trains (limit {MAX_SCENARIO_TRAINS})",
                scenario.id,
                scenario.trains.len()
            )));
        }
    }
    if config.planning_horizon_end > MAX_HORIZON {
        return Err(TooLarge(format!(
            "horizon {} (limit {MAX_HORIZON})",
            config.planning_horizon_end
        )));
    }

    let mut routes: BTreeMap<(usize, TrainId), Vec<Route>> = BTreeMap::new();
    for (i, scenario) in family.scenarios.iter().enumerate() {
        for train in scenario.trains.values() {
            let r = routes_for(spec, config, train);
            if r.len() > MAX_ROUTES_PER_TRAIN {
                return Err(TooLarge(format!(
                    "train {} admits {} routed variants (limit {MAX_ROUTES_PER_TRAIN})",
                    train.id,
                    r.len()
                )));
            }
            routes.insert((i, train.id.clone()), r);
        }
    }

    let options: Vec<Vec<Option<BTreeSet<TrainId>>>> =
        family.scenarios.iter().map(scenario_options).collect();
    let required = family.required_active();
    let mut best: Option<Rat> = None;

    let mut idx = vec![0usize; options.len()];
    'patterns: loop {
        let pattern: Vec<&Option<BTreeSet<TrainId>>> =
            idx.iter().enumerate().map(|(i, &j)| &options[i][j]).collect();
        try_pattern(spec, family, config, &routes, &pattern, required, &mut best);
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < options[k].len() {
                continue 'patterns;
            }
            idx[k] = 0;
            k += 1;
        }
        break;
    }
    Ok(best.map_or(OracleOutcome::Infeasible, OracleOutcome::Optimal))
}

/// One traversal of one section on a concrete track.
#[derive(Clone, Debug)]
struct Mv {
    key: SectionKey,
    from: NodeId,
    to: NodeId,
    ascending: bool,
    track: u8,
}

/// A simple origin-to-destination walk with a track picked per section.
#[derive(Clone, Debug)]
struct Route {
    moves: Vec<Mv>,
    links: Vec<LinkKey>,
}

struct Run<'a> {
    scenario: usize,
    train: &'a Train,
    routes: &'a [Route],
}

struct Pick<'a> {
    scenario: usize,
    train: &'a Train,
    route: &'a Route,
}

/// Directional choice on a parallel bundle: ascending keeps to track 1 and
/// may take a third, descending keeps to 1 and may take 2 or 4.
fn usable_tracks(ascending: bool, max: u8) -> &'static [u8] {
    match (ascending, max) {
        (true, 0..=2) => &[1],
        (true, _) => &[1, 3],
        (false, 0..=1) => &[1],
        (false, 2..=3) => &[1, 2],
        (false, _) => &[1, 2, 4],
    }
}

/// Lower tracks that must exist before the given one can be laid.
fn implied_builds(track: u8) -> &'static [u8] {
    match track {
        2 => &[1],
        3 | 4 => &[1, 2],
        _ => &[],
    }
}

fn collect_paths(
    spec: &InfrastructureSpec,
    destination: &NodeId,
    path: &mut Vec<NodeId>,
    out: &mut Vec<Vec<NodeId>>,
) {
    let here = path.last().unwrap().clone();
    if here == *destination {
        if path.len() >= 2 {
            out.push(path.clone());
        }
        return;
    }
    let next_nodes: Vec<NodeId> = spec.neighbors(&here).cloned().collect();
    for next in next_nodes {
        if path.contains(&next) {
            continue;
        }
        if path.len() >= 2 {
            let prev = &path[path.len() - 2];
            if spec.link(&here, prev, &next).is_none() {
                continue;
            }
        }
        path.push(next);
        collect_paths(spec, destination, path, out);
        path.pop();
    }
}

fn routes_for(spec: &InfrastructureSpec, config: &BuildConfig, train: &Train) -> Vec<Route> {
    let mut paths = Vec::new();
    let mut prefix = vec![train.origin.clone()];
    collect_paths(spec, &train.destination, &mut prefix, &mut paths);

    let mut out = Vec::new();
    for path in &paths {
        if !train.via_nodes.iter().all(|v| path.contains(v)) {
            continue;
        }
        let mut legs = Vec::new();
        let mut choices: Vec<&'static [u8]> = Vec::new();
        let mut ok = true;
        for pair in path.windows(2) {
            let (from, to) = (pair[0].clone(), pair[1].clone());
            let key = SectionKey::new(from.clone(), to.clone());
            let Some(section) = spec.sections.get(&key) else {
                ok = false;
                break;
            };
            if section.travel(&train.train_type).is_none() {
                ok = false;
                break;
            }
            let ascending = from < to;
            choices.push(usable_tracks(ascending, section.effective_max_tracks(config)));
            legs.push((key, from, to, ascending));
        }
        if !ok || legs.is_empty() {
            continue;
        }
        let links: Vec<LinkKey> = path
            .windows(3)
            .map(|w| LinkKey::new(w[1].clone(), w[0].clone(), w[2].clone()))
            .collect();
        let mut idx = vec![0usize; legs.len()];
        'tracks: loop {
            let moves: Vec<Mv> = legs
                .iter()
                .enumerate()
                .map(|(k, (key, from, to, ascending))| Mv {
                    key: key.clone(),
                    from: from.clone(),
                    to: to.clone(),
                    ascending: *ascending,
                    track: choices[k][idx[k]],
                })
                .collect();
            out.push(Route { moves, links: links.clone() });
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    continue 'tracks;
                }
                idx[k] = 0;
                k += 1;
            }
            break;
        }
    }
    out
}

/// Per scenario: inactive, or active with any admissible set of runners.
fn scenario_options(scenario: &Scenario) -> Vec<Option<BTreeSet<TrainId>>> {
    let mandatory: BTreeSet<TrainId> = scenario
        .trains
        .values()
        .filter(|t| !t.optional)
        .map(|t| t.id.clone())
        .collect();
    let optional: Vec<TrainId> = scenario
        .trains
        .values()
        .filter(|t| t.optional)
        .map(|t| t.id.clone())
        .collect();
    let mut out = vec![None];
    for mask in 0u32..(1 << optional.len()) {
        let picked: BTreeSet<TrainId> = optional
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, id)| id.clone())
            .collect();
        if (picked.len() as u32) < scenario.demanded_optional_count {
            continue;
        }
        if !scenario.chosen_optional.iter().all(|id| picked.contains(id)) {
            continue;
        }
        let mut running = mandatory.clone();
        running.extend(picked);
        out.push(Some(running));
    }
    out
}

fn pattern_penalty(family: &TimetableFamily, pattern: &[&Option<BTreeSet<TrainId>>]) -> Rat {
    let mut pen = rat(0);
    for (scenario, running) in family.scenarios.iter().zip(pattern) {
        match running {
            None => {
                pen += scenario.penalty;
                for t in scenario.trains.values() {
                    pen += t.penalty;
                }
            }
            Some(set) => {
                for t in scenario.trains.values() {
                    if t.optional && !set.contains(&t.id) {
                        pen += t.penalty;
                    }
                }
            }
        }
    }
    pen
}

fn improves(best: &Option<Rat>, candidate: &Rat) -> bool {
    match best {
        None => true,
        Some(b) => candidate < b,
    }
}

#[allow(clippy::too_many_arguments)]
fn try_pattern<'a>(
    spec: &InfrastructureSpec,
    family: &'a TimetableFamily,
    config: &BuildConfig,
    routes: &'a BTreeMap<(usize, TrainId), Vec<Route>>,
    pattern: &[&Option<BTreeSet<TrainId>>],
    required: i64,
    best: &mut Option<Rat>,
) {
    let active = pattern.iter().filter(|p| p.is_some()).count() as i64;
    if active < required {
        return;
    }
    let penalty = pattern_penalty(family, pattern);
    if !improves(best, &penalty) {
        return;
    }
    let mut runs: Vec<Run<'a>> = Vec::new();
    for (i, running) in pattern.iter().enumerate() {
        let Some(set) = running else { continue };
        for id in set.iter() {
            let train = &family.scenarios[i].trains[id];
            let list = &routes[&(i, id.clone())];
            if list.is_empty() {
                return;
            }
            runs.push(Run { scenario: i, train, routes: list });
        }
    }
    descend(
        spec,
        family,
        config,
        &runs,
        0,
        &mut Vec::new(),
        &mut BTreeSet::new(),
        &mut BTreeSet::new(),
        &penalty,
        best,
    );
}

#[allow(clippy::too_many_arguments)]
fn descend<'a>(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    runs: &[Run<'a>],
    depth: usize,
    picks: &mut Vec<Pick<'a>>,
    tracks: &mut BTreeSet<(SectionKey, u8)>,
    links: &mut BTreeSet<LinkKey>,
    penalty: &Rat,
    best: &mut Option<Rat>,
) {
    // routes only ever add infrastructure, so this is a valid lower bound
    let floor = *penalty + infra_cost(spec, tracks, links);
    if !improves(best, &floor) {
        return;
    }
    if depth == runs.len() {
        settle_reductions(spec, family, config, picks, tracks, &floor, best);
        return;
    }
    let run = &runs[depth];
    for route in run.routes {
        let mut added_tracks = Vec::new();
        for mv in &route.moves {
            let entry = (mv.key.clone(), mv.track);
            if tracks.insert(entry.clone()) {
                added_tracks.push(entry);
            }
        }
        let mut added_links = Vec::new();
        for link in &route.links {
            if links.insert(link.clone()) {
                added_links.push(link.clone());
            }
        }
        picks.push(Pick { scenario: run.scenario, train: run.train, route });
        descend(spec, family, config, runs, depth + 1, picks, tracks, links, penalty, best);
        picks.pop();
        for e in added_tracks {
            tracks.remove(&e);
        }
        for e in added_links {
            links.remove(&e);
        }
    }
}

fn infra_cost(
    spec: &InfrastructureSpec,
    tracks: &BTreeSet<(SectionKey, u8)>,
    links: &BTreeSet<LinkKey>,
) -> Rat {
    let mut built: BTreeSet<(SectionKey, u8)> = BTreeSet::new();
    for (key, track) in tracks {
        built.insert((key.clone(), *track));
        for lower in implied_builds(*track) {
            built.insert((key.clone(), *lower));
        }
    }
    let mut total = rat(0);
    for (key, track) in &built {
        if let Some(section) = spec.sections.get(key) {
            if let Some(c) = section.track_cost.get(track) {
                total += *c;
            }
        }
    }
    for key in links {
        if let Some(link) = spec.links.get(key) {
            total += link.cost;
        }
    }
    total
}

/// Walks reduction purchase vectors in nondecreasing cost order and settles
/// on the first one under which every scenario can be timetabled.
fn settle_reductions(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    picks: &[Pick],
    tracks: &BTreeSet<(SectionKey, u8)>,
    fixed: &Rat,
    best: &mut Option<Rat>,
) {
    let used: Vec<SectionKey> =
        tracks.iter().map(|(k, _)| k.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let caps: Vec<(i64, i64)> = used
        .iter()
        .map(|k| {
            let s = &spec.sections[k];
            (s.time_reduction_cap(config), s.headway_reduction_cap(config))
        })
        .collect();
    let prices: Vec<(Rat, Rat)> = used
        .iter()
        .map(|k| {
            let s = &spec.sections[k];
            (s.time_reduction_cost, s.headway_reduction_cost)
        })
        .collect();

    let mut heap: BinaryHeap<Reverse<(Rat, Vec<(i64, i64)>)>> = BinaryHeap::new();
    let mut seen: BTreeSet<Vec<(i64, i64)>> = BTreeSet::new();
    let zero = vec![(0i64, 0i64); used.len()];
    seen.insert(zero.clone());
    heap.push(Reverse((rat(0), zero)));

    while let Some(Reverse((cost, levels))) = heap.pop() {
        let total = *fixed + cost;
        if !improves(best, &total) {
            return;
        }
        let buy: BTreeMap<&SectionKey, (i64, i64)> =
            used.iter().zip(levels.iter().copied()).collect();
        if timetable_exists(spec, family, config, picks, &buy) {
            *best = Some(total);
            return;
        }
        for i in 0..levels.len() {
            if levels[i].0 < caps[i].0 {
                let mut next = levels.clone();
                next[i].0 += 1;
                if seen.insert(next.clone()) {
                    heap.push(Reverse((cost + prices[i].0, next)));
                }
            }
            if levels[i].1 < caps[i].1 {
                let mut next = levels.clone();
                next[i].1 += 1;
                if seen.insert(next.clone()) {
                    heap.push(Reverse((cost + prices[i].1, next)));
                }
            }
        }
    }
}

fn timetable_exists(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    picks: &[Pick],
    buy: &BTreeMap<&SectionKey, (i64, i64)>,
) -> bool {
    let groups: Vec<Vec<usize>> = if config.cross_scenario_headways {
        vec![(0..picks.len()).collect()]
    } else {
        let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, p) in picks.iter().enumerate() {
            by.entry(p.scenario).or_default().push(i);
        }
        by.into_values().collect()
    };
    groups.iter().all(|g| group_feasible(spec, family, picks, g, buy))
}

/// `x[to] - x[from] <= w`; variable 0 is the fixed time origin.
#[derive(Clone, Copy, Debug)]
struct Edge {
    from: usize,
    to: usize,
    w: i64,
}

fn edge(from: usize, to: usize, w: i64) -> Edge {
    Edge { from, to, w }
}

fn group_feasible(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    picks: &[Pick],
    group: &[usize],
    buy: &BTreeMap<&SectionKey, (i64, i64)>,
) -> bool {
    let mut n = 1;
    let mut events: Vec<Vec<(usize, usize)>> = Vec::with_capacity(group.len());
    for &pi in group {
        let mut per = Vec::new();
        for _ in &picks[pi].route.moves {
            per.push((n, n + 1));
            n += 2;
        }
        events.push(per);
    }

    let mut cons: Vec<Edge> = Vec::new();
    for (gi, &pi) in group.iter().enumerate() {
        let pick = &picks[pi];
        let evs = &events[gi];
        for (k, mv) in pick.route.moves.iter().enumerate() {
            let (d, a) = evs[k];
            let section = &spec.sections[&mv.key];
            let u = buy.get(&mv.key).map_or(0, |b| b.0);
            let t = section.travel(&pick.train.train_type).unwrap_or(0) - u;
            cons.push(edge(d, a, t));
            cons.push(edge(a, d, -t));
            cons.push(edge(d, 0, 0));
            cons.push(edge(a, 0, 0));
            if k + 1 < evs.len() {
                let (dn, _) = evs[k + 1];
                cons.push(edge(dn, a, 0));
                let stop = spec.nodes[&mv.to].max_stop_minutes;
                cons.push(edge(a, dn, stop));
            }
        }
        let (d0, _) = evs[0];
        cons.push(edge(d0, 0, -pick.train.earliest_departure));
        let (_, a_last) = evs[evs.len() - 1];
        cons.push(edge(0, a_last, pick.train.latest_arrival));
    }

    let scenario_ids: BTreeSet<usize> = group.iter().map(|&pi| picks[pi].scenario).collect();
    for &s_idx in &scenario_ids {
        for rel in &family.scenarios[s_idx].relations {
            let Some(e1) = relation_event(picks, group, &events, s_idx, rel, true) else {
                return false;
            };
            let Some(e2) = relation_event(picks, group, &events, s_idx, rel, false) else {
                return false;
            };
            cons.push(edge(e1, e2, rel.max_minutes));
            cons.push(edge(e2, e1, -rel.min_minutes));
        }
    }

    let mut branches: Vec<[Edge; 2]> = Vec::new();
    for gi in 0..group.len() {
        for gj in gi + 1..group.len() {
            let (pa, pb) = (&picks[group[gi]], &picks[group[gj]]);
            for (i, ma) in pa.route.moves.iter().enumerate() {
                for (j, mb) in pb.route.moves.iter().enumerate() {
                    if ma.key != mb.key || ma.track != mb.track {
                        continue;
                    }
                    let (da, aa) = events[gi][i];
                    let (db, ab) = events[gj][j];
                    if ma.ascending == mb.ascending {
                        let section = &spec.sections[&ma.key];
                        let w = buy.get(&ma.key).map_or(0, |b| b.1);
                        let h_ab =
                            section.headway(&pa.train.train_type, &pb.train.train_type).unwrap_or(0) - w;
                        let h_ba =
                            section.headway(&pb.train.train_type, &pa.train.train_type).unwrap_or(0) - w;
                        branches.push([edge(db, da, -h_ab), edge(da, db, -h_ba)]);
                    } else {
                        let ct_a = spec.nodes[&ma.to].crossing_time_minutes;
                        let ct_b = spec.nodes[&mb.to].crossing_time_minutes;
                        branches.push([edge(db, aa, -ct_a), edge(da, ab, -ct_b)]);
                    }
                }
            }
        }
    }

    branch_search(n, &mut cons, &branches)
}

fn relation_event(
    picks: &[Pick],
    group: &[usize],
    events: &[Vec<(usize, usize)>],
    scenario: usize,
    rel: &TimingRelation,
    is_first: bool,
) -> Option<usize> {
    let id = if is_first { &rel.first } else { &rel.second };
    let gi = group
        .iter()
        .position(|&pi| picks[pi].scenario == scenario && picks[pi].train.id == *id)?;
    let departs = match rel.kind {
        RelationKind::ArrivalFrequency => false,
        RelationKind::DepartureFrequency => true,
        // a feeder arrives, its connection departs
        RelationKind::Transfer => !is_first,
    };
    let moves = &picks[group[gi]].route.moves;
    for (k, mv) in moves.iter().enumerate() {
        if departs && mv.from == rel.at_node {
            return Some(events[gi][k].0);
        }
        if !departs && mv.to == rel.at_node {
            return Some(events[gi][k].1);
        }
    }
    None
}

fn branch_search(n: usize, cons: &mut Vec<Edge>, branches: &[[Edge; 2]]) -> bool {
    if !feasible(n, cons) {
        return false;
    }
    let Some((head, rest)) = branches.split_first() else {
        return true;
    };
    for option in head {
        cons.push(*option);
        let ok = branch_search(n, cons, rest);
        cons.pop();
        if ok {
            return true;
        }
    }
    false
}

/// Bellman-Ford with an implicit zero super-source; integral weights give
/// integral witnesses, so real and integer feasibility coincide.
fn feasible(n: usize, cons: &[Edge]) -> bool {
    let mut dist = vec![0i64; n];
    for _ in 0..n {
        let mut changed = false;
        for c in cons {
            let cand = dist[c.from] + c.w;
            if cand < dist[c.to] {
                dist[c.to] = cand;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    cons.iter().all(|c| dist[c.from] + c.w >= dist[c.to])
}
