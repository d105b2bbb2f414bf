//! Model assembly from the preprocessed sets.
//!
//! Two builders share one code path: the deterministic one assumes a single
//! always-on scenario of mandatory trains, the robust one adds activation
//! binaries per scenario and optional train, coverage, and penalty terms.
//! Every constraint coefficient stays integral; the big-M constant is sized
//! so that a relaxed row can never cut a feasible point.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::*;
use crate::preprocess::{PairClass, PairRelation, RelevantSets};
use crate::rat::{rat, Rat};

use super::{ConstraintTag as Tag, MilpModel, Sense, VarDomain, VarId, VarName};

/// Smallest constant that dominates every time expression a relaxed row can
/// see: the latest arrival plus the largest headway, node buffer, or buyable
/// time reduction, plus one.
pub fn compute_big_m(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    sets: &RelevantSets,
) -> i64 {
    let latest = family.trains().map(|(_, t)| t.latest_arrival).max().unwrap_or(0);
    let mut slack = 0;
    let used: BTreeSet<&SectionKey> = sets.section_tracks.iter().map(|(k, _)| k).collect();
    for key in used {
        let section = &spec.sections[key];
        slack = slack.max(section.time_reduction_cap(config));
        if let Some(h) = section.base_headway.values().copied().max() {
            slack = slack.max(h);
        }
    }
    for m in &sets.movements {
        slack = slack.max(spec.nodes[&m.to].crossing_time_minutes);
    }
    latest + slack + 1
}

pub fn build_deterministic(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    sets: &RelevantSets,
) -> MilpModel {
    debug_assert!(family.is_deterministic());
    Builder::new(spec, family, config, sets, false).run()
}

pub fn build_robust(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    sets: &RelevantSets,
) -> MilpModel {
    Builder::new(spec, family, config, sets, true).run()
}

#[derive(Clone, Copy)]
struct MoveVars {
    x: VarId,
    d: VarId,
    a: VarId,
}

#[derive(Clone, Copy)]
enum PairVars {
    None,
    Fixed(VarId),
    Free { a_first: VarId, b_first: VarId },
}

struct Builder<'a> {
    spec: &'a InfrastructureSpec,
    family: &'a TimetableFamily,
    config: &'a BuildConfig,
    sets: &'a RelevantSets,
    robust: bool,
    big_m: i64,
    model: MilpModel,
    used_sections: BTreeSet<SectionKey>,
    move_vars: Vec<MoveVars>,
    path_vars: BTreeMap<TrainKey, Vec<VarId>>,
    moves_of: BTreeMap<TrainKey, Vec<usize>>,
    scenario_vars: BTreeMap<ScenarioId, VarId>,
    train_vars: BTreeMap<TrainKey, VarId>,
    pair_vars: Vec<PairVars>,
}

impl<'a> Builder<'a> {
    fn new(
        spec: &'a InfrastructureSpec,
        family: &'a TimetableFamily,
        config: &'a BuildConfig,
        sets: &'a RelevantSets,
        robust: bool,
    ) -> Builder<'a> {
        let used_sections = sets.section_tracks.iter().map(|(k, _)| k.clone()).collect();
        let mut moves_of: BTreeMap<TrainKey, Vec<usize>> = BTreeMap::new();
        for (i, m) in sets.movements.iter().enumerate() {
            moves_of.entry(m.train.clone()).or_default().push(i);
        }
        Builder {
            spec,
            family,
            config,
            sets,
            robust,
            big_m: compute_big_m(spec, family, config, sets),
            model: MilpModel::new(),
            used_sections,
            move_vars: Vec::new(),
            path_vars: BTreeMap::new(),
            moves_of,
            scenario_vars: BTreeMap::new(),
            train_vars: BTreeMap::new(),
            pair_vars: Vec::new(),
        }
    }

    fn run(mut self) -> MilpModel {
        self.create_infrastructure_vars();
        if self.robust {
            self.create_activation_vars();
        }
        self.create_train_vars();
        self.create_order_vars();
        self.emit_path_rows();
        self.emit_link_rows();
        self.emit_path_move_rows();
        self.emit_track_rows();
        self.emit_timing_rows();
        self.emit_reduction_symmetry_rows();
        self.emit_relation_rows();
        self.emit_pair_rows();
        if self.robust {
            self.emit_robust_rows();
        }
        self.model
    }

    fn time_red(&self, from: &NodeId, to: &NodeId) -> VarId {
        let name = VarName::TimeReduction { from: from.clone(), to: to.clone() };
        self.model.var_id(&name).expect("reduction var exists for used sections")
    }

    fn headway_red(&self, from: &NodeId, to: &NodeId) -> VarId {
        let name = VarName::HeadwayReduction { from: from.clone(), to: to.clone() };
        self.model.var_id(&name).expect("reduction var exists for used sections")
    }

    /// Activation variable the train's running is tied to, if any.
    fn act_var(&self, key: &TrainKey) -> Option<VarId> {
        if !self.robust {
            return None;
        }
        if let Some(&t) = self.train_vars.get(key) {
            return Some(t);
        }
        Some(self.scenario_vars[&key.scenario])
    }

    fn create_infrastructure_vars(&mut self) {
        for (key, track) in &self.sets.section_tracks {
            let cost = self.spec.sections[key].track_cost[track].clone();
            self.model.add_variable(
                VarName::Track { section: key.clone(), track: *track },
                VarDomain::Binary,
                cost,
            );
        }
        for key in &self.sets.link_keys {
            let cost = self.spec.links[key].cost.clone();
            self.model.add_variable(
                VarName::Link { at: key.at.clone(), lo: key.lo.clone(), hi: key.hi.clone() },
                VarDomain::Binary,
                cost,
            );
        }
        for key in &self.used_sections {
            let section = &self.spec.sections[key];
            let time_cap = section.time_reduction_cap(self.config);
            let headway_cap = section.headway_reduction_cap(self.config);
            // the ascending orientation carries the cost, the symmetry rows
            // tie its twin to it
            for (from, to, canonical) in
                [(&key.lo, &key.hi, true), (&key.hi, &key.lo, false)]
            {
                let cost = |c: &Rat| if canonical { c.clone() } else { rat(0) };
                self.model.add_variable(
                    VarName::TimeReduction { from: from.clone(), to: to.clone() },
                    VarDomain::Integer { lb: 0, ub: time_cap },
                    cost(&section.time_reduction_cost),
                );
                self.model.add_variable(
                    VarName::HeadwayReduction { from: from.clone(), to: to.clone() },
                    VarDomain::Integer { lb: 0, ub: headway_cap },
                    cost(&section.headway_reduction_cost),
                );
            }
        }
    }

    fn create_activation_vars(&mut self) {
        let mut constant = rat(0);
        for scenario in &self.family.scenarios {
            // skipping a scenario forfeits its penalty and every train's
            let mut weight = scenario.penalty.clone();
            for train in scenario.trains.values() {
                constant += train.penalty.clone();
                if !train.optional {
                    weight += train.penalty.clone();
                }
            }
            constant += scenario.penalty.clone();
            let s = self.model.add_variable(
                VarName::ScenarioActive { scenario: scenario.id.clone() },
                VarDomain::Binary,
                -weight,
            );
            self.scenario_vars.insert(scenario.id.clone(), s);
            for train in scenario.trains.values() {
                if train.optional {
                    let key = scenario.train_key(&train.id);
                    let t = self.model.add_variable(
                        VarName::TrainActive { train: key.clone() },
                        VarDomain::Binary,
                        -train.penalty.clone(),
                    );
                    self.train_vars.insert(key, t);
                }
            }
        }
        self.model.objective_constant = constant;
    }

    fn create_train_vars(&mut self) {
        let m = self.big_m;
        for scenario in &self.family.scenarios {
            for train in scenario.trains.values() {
                let key = scenario.train_key(&train.id);
                let ps = &self.sets.paths[&key];
                let vars = (0..ps.paths.len())
                    .map(|ordinal| {
                        self.model.add_variable(
                            VarName::PathChoice { train: key.clone(), ordinal },
                            VarDomain::Binary,
                            rat(0),
                        )
                    })
                    .collect();
                self.path_vars.insert(key, vars);
            }
        }
        for mv in &self.sets.movements {
            let base =
                (mv.train.clone(), mv.from.clone(), mv.to.clone(), mv.track);
            let x = self.model.add_variable(
                VarName::Move {
                    train: base.0.clone(),
                    from: base.1.clone(),
                    to: base.2.clone(),
                    track: base.3,
                },
                VarDomain::Binary,
                rat(0),
            );
            let d = self.model.add_variable(
                VarName::Departure {
                    train: base.0.clone(),
                    from: base.1.clone(),
                    to: base.2.clone(),
                    track: base.3,
                },
                VarDomain::Continuous { lb: 0, ub: m },
                rat(0),
            );
            let a = self.model.add_variable(
                VarName::Arrival { train: base.0, from: base.1, to: base.2, track: base.3 },
                VarDomain::Continuous { lb: 0, ub: m },
                rat(0),
            );
            self.move_vars.push(MoveVars { x, d, a });
        }
    }

    fn create_order_vars(&mut self) {
        for pair in &self.sets.pairs {
            let (ma, mb) = (&self.sets.movements[pair.a], &self.sets.movements[pair.b]);
            let crossing = pair.relation == PairRelation::Crossing;
            let order = |first: &crate::preprocess::Movement,
                             second: &crate::preprocess::Movement,
                             model: &mut MilpModel| {
                model.add_variable(
                    VarName::Order {
                        first: first.train.clone(),
                        second: second.train.clone(),
                        from: first.from.clone(),
                        to: first.to.clone(),
                        track: first.track,
                        crossing,
                    },
                    VarDomain::Binary,
                    rat(0),
                )
            };
            let vars = match pair.class {
                PairClass::Implicit | PairClass::Conflict => PairVars::None,
                PairClass::FixedOrder { first_is_a } => {
                    let (f, s) = if first_is_a { (ma, mb) } else { (mb, ma) };
                    PairVars::Fixed(order(f, s, &mut self.model))
                }
                PairClass::FreeOrder => PairVars::Free {
                    a_first: order(ma, mb, &mut self.model),
                    b_first: order(mb, ma, &mut self.model),
                },
            };
            self.pair_vars.push(vars);
        }
    }

    fn emit_path_rows(&mut self) {
        for scenario in &self.family.scenarios {
            for train in scenario.trains.values() {
                let key = scenario.train_key(&train.id);
                let deltas: Vec<(VarId, i64)> =
                    self.path_vars[&key].iter().map(|&v| (v, 1)).collect();
                if !self.robust {
                    self.model.add_row(Tag::PathChoice, deltas, Sense::Eq, 1);
                    continue;
                }
                let s = self.scenario_vars[&key.scenario];
                if let Some(&t) = self.train_vars.get(&key) {
                    let mut with = |extra: Vec<(VarId, i64)>, sense, rhs| {
                        let mut terms = deltas.clone();
                        terms.extend(extra);
                        self.model.add_row(Tag::PathChoice, terms, sense, rhs);
                    };
                    with(vec![(t, -1)], Sense::Le, 0);
                    with(vec![(s, -1)], Sense::Le, 0);
                    with(vec![(t, -1), (s, -1)], Sense::Ge, -1);
                    // optional trains may only run in an active scenario;
                    // pre-chosen ones must
                    let sense = if scenario.chosen_optional.contains(&train.id) {
                        Sense::Eq
                    } else {
                        Sense::Le
                    };
                    self.model.add_row(Tag::Activation, vec![(t, 1), (s, -1)], sense, 0);
                } else {
                    let mut terms = deltas;
                    terms.push((s, -1));
                    self.model.add_row(Tag::PathChoice, terms, Sense::Eq, 0);
                }
            }
        }
    }

    fn emit_link_rows(&mut self) {
        for key in &self.sets.link_keys {
            let l = self
                .model
                .var_id(&VarName::Link {
                    at: key.at.clone(),
                    lo: key.lo.clone(),
                    hi: key.hi.clone(),
                })
                .unwrap();
            let mut terms = Vec::new();
            for (train, ps) in &self.sets.paths {
                for (ordinal, path) in ps.paths.iter().enumerate() {
                    let uses = path.nodes.windows(3).any(|w| {
                        LinkKey::new(w[1].clone(), w[0].clone(), w[2].clone()) == *key
                    });
                    if uses {
                        terms.push((self.path_vars[train][ordinal], 1));
                    }
                }
            }
            let n = terms.len() as i64;
            if n == 0 {
                continue;
            }
            terms.push((l, -n));
            self.model.add_row(Tag::LinkUse, terms, Sense::Le, 0);
        }
    }

    fn emit_path_move_rows(&mut self) {
        for scenario in &self.family.scenarios {
            for train in scenario.trains.values() {
                let key = scenario.train_key(&train.id);
                let ps = &self.sets.paths[&key];
                let mut sections: BTreeSet<SectionKey> = BTreeSet::new();
                for path in &ps.paths {
                    sections.extend(path.sections());
                }
                for section in sections {
                    let mut terms: Vec<(VarId, i64)> = Vec::new();
                    for (ordinal, path) in ps.paths.iter().enumerate() {
                        if path.sections().any(|s| s == section) {
                            terms.push((self.path_vars[&key][ordinal], 1));
                        }
                    }
                    for &mi in &self.moves_of[&key] {
                        if self.sets.movements[mi].section_key() == section {
                            terms.push((self.move_vars[mi].x, -1));
                        }
                    }
                    self.model.add_row(Tag::PathMove, terms, Sense::Eq, 0);
                }
            }
        }
    }

    fn emit_track_rows(&mut self) {
        for (key, track) in &self.sets.section_tracks {
            let y = self
                .model
                .var_id(&VarName::Track { section: key.clone(), track: *track })
                .unwrap();
            let mut terms: Vec<(VarId, i64)> = Vec::new();
            for (mi, mv) in self.sets.movements.iter().enumerate() {
                if mv.track == *track && mv.section_key() == *key {
                    terms.push((self.move_vars[mi].x, 1));
                }
            }
            if !terms.is_empty() {
                let n = terms.len() as i64;
                terms.push((y, -n));
                self.model.add_row(Tag::TrackUse, terms, Sense::Le, 0);
            }
            // building a higher track presumes the one below it; the chain
            // through track 2 covers what tracks 3 and 4 imply
            let lower = match *track {
                2 => Some(1),
                3 | 4 => Some(2),
                _ => None,
            };
            if let Some(lower) = lower {
                let y_lower = self
                    .model
                    .var_id(&VarName::Track { section: key.clone(), track: lower })
                    .unwrap();
                self.model.add_row(
                    Tag::TrackOrder,
                    vec![(y, 1), (y_lower, -1)],
                    Sense::Le,
                    0,
                );
            }
        }
    }

    fn emit_timing_rows(&mut self) {
        let m = self.big_m;
        for (mi, mv) in self.sets.movements.iter().enumerate() {
            let MoveVars { x, d, a } = self.move_vars[mi];
            let section = &self.spec.sections[&mv.section_key()];
            let t = section.travel(&mv.train_type).unwrap();
            let u = self.time_red(&mv.from, &mv.to);
            // a = d + t - u while the movement runs, free to 0 otherwise
            self.model.add_row(
                Tag::TravelLo,
                vec![(a, 1), (d, -1), (u, 1), (x, -m)],
                Sense::Ge,
                t - m,
            );
            self.model.add_row(
                Tag::TravelHi,
                vec![(a, 1), (d, -1), (u, 1), (x, m)],
                Sense::Le,
                t + m,
            );
            self.model.add_row(
                Tag::ZeroTime,
                vec![(d, 1), (a, 1), (x, -2 * m)],
                Sense::Le,
                0,
            );
        }
        for scenario in &self.family.scenarios {
            for train in scenario.trains.values() {
                let key = scenario.train_key(&train.id);
                if train.earliest_departure > 0 {
                    let mut terms = self.departures_out(&key, &train.origin);
                    let rhs = if let Some(act) = self.act_var(&key) {
                        terms.push((act, -train.earliest_departure));
                        0
                    } else {
                        train.earliest_departure
                    };
                    self.model.add_row(Tag::DepartEarliest, terms, Sense::Ge, rhs);
                }
                let arrivals = self.arrivals_into(&key, &train.destination);
                self.model.add_row(
                    Tag::ArriveLatest,
                    arrivals,
                    Sense::Le,
                    train.latest_arrival,
                );
                for node in self.sets.interior_nodes(&key) {
                    let mut flow = self.arrivals_into(&key, &node);
                    flow.extend(self.departures_out(&key, &node).into_iter().map(|(v, c)| (v, -c)));
                    self.model.add_row(Tag::NodeFlow, flow.clone(), Sense::Le, 0);
                    let stop: Vec<(VarId, i64)> =
                        flow.into_iter().map(|(v, c)| (v, -c)).collect();
                    self.model.add_row(
                        Tag::MaxStop,
                        stop,
                        Sense::Le,
                        self.spec.nodes[&node].max_stop_minutes,
                    );
                }
            }
        }
    }

    fn emit_reduction_symmetry_rows(&mut self) {
        for key in &self.used_sections {
            let section = &self.spec.sections[key];
            if section.time_reduction_cap(self.config) > 0 {
                let asc = self.time_red(&key.lo, &key.hi);
                let desc = self.time_red(&key.hi, &key.lo);
                self.model.add_row(
                    Tag::ReductionSymmetry,
                    vec![(asc, 1), (desc, -1)],
                    Sense::Eq,
                    0,
                );
            }
            if section.headway_reduction_cap(self.config) > 0 {
                let asc = self.headway_red(&key.lo, &key.hi);
                let desc = self.headway_red(&key.hi, &key.lo);
                self.model.add_row(
                    Tag::ReductionSymmetry,
                    vec![(asc, 1), (desc, -1)],
                    Sense::Eq,
                    0,
                );
            }
        }
    }

    fn emit_relation_rows(&mut self) {
        for scenario in &self.family.scenarios {
            let s = self.robust.then(|| self.scenario_vars[&scenario.id]);
            for rel in &scenario.relations {
                let first = scenario.train_key(&rel.first);
                let second = scenario.train_key(&rel.second);
                let (ev1, visit1) = self.relation_event(&first, rel, true);
                let (ev2, visit2) = self.relation_event(&second, rel, false);
                let mut diff: Vec<(VarId, i64)> = ev2;
                diff.extend(ev1.into_iter().map(|(v, c)| (v, -c)));
                let mut lo = diff.clone();
                let mut hi = diff;
                let (rhs_lo, rhs_hi) = if let Some(s) = s {
                    lo.push((s, -rel.min_minutes));
                    hi.push((s, -rel.max_minutes));
                    (0, 0)
                } else {
                    (rel.min_minutes, rel.max_minutes)
                };
                self.model.add_row(Tag::RelationLo, lo, Sense::Ge, rhs_lo);
                self.model.add_row(Tag::RelationHi, hi, Sense::Le, rhs_hi);
                for (key, mut visit) in [(first, visit1), (second, visit2)] {
                    let rhs = if let Some(act) = self.act_var(&key) {
                        visit.push((act, -1));
                        0
                    } else {
                        1
                    };
                    self.model.add_row(Tag::RelationVisit, visit, Sense::Ge, rhs);
                }
            }
        }
    }

    /// Event terms for one side of a relation plus the row terms that force
    /// the train to produce that event at all.
    fn relation_event(
        &self,
        key: &TrainKey,
        rel: &TimingRelation,
        is_first: bool,
    ) -> (Vec<(VarId, i64)>, Vec<(VarId, i64)>) {
        let departs = match rel.kind {
            RelationKind::ArrivalFrequency => false,
            RelationKind::DepartureFrequency => true,
            // a feeder arrives, its connection departs
            RelationKind::Transfer => !is_first,
        };
        if departs {
            (self.departures_out(key, &rel.at_node), self.x_out(key, &rel.at_node))
        } else {
            (self.arrivals_into(key, &rel.at_node), self.x_into(key, &rel.at_node))
        }
    }

    fn emit_pair_rows(&mut self) {
        for (pi, pair) in self.sets.pairs.iter().enumerate() {
            let (ma, mb) = (&self.sets.movements[pair.a], &self.sets.movements[pair.b]);
            let (va, vb) = (self.move_vars[pair.a], self.move_vars[pair.b]);
            match (self.pair_vars[pi], pair.class) {
                (PairVars::None, PairClass::Implicit) => {}
                (PairVars::None, PairClass::Conflict) => {
                    self.model.add_row(
                        Tag::TrackConflict,
                        vec![(va.x, 1), (vb.x, 1)],
                        Sense::Le,
                        1,
                    );
                }
                (PairVars::Fixed(z), PairClass::FixedOrder { first_is_a }) => {
                    self.model.add_row(
                        Tag::OrderLink,
                        vec![(z, 1), (va.x, -1), (vb.x, -1)],
                        Sense::Ge,
                        -1,
                    );
                    let (f, fm, s, sm) = if first_is_a {
                        (va, ma, vb, mb)
                    } else {
                        (vb, mb, va, ma)
                    };
                    self.emit_gap_row(pair.relation, fm, f, sm, s, z);
                }
                (PairVars::Free { a_first, b_first }, PairClass::FreeOrder) => {
                    let both = vec![(a_first, 1), (b_first, 1)];
                    let mut link = |extra: Vec<(VarId, i64)>, sense, rhs| {
                        let mut terms = both.clone();
                        terms.extend(extra);
                        self.model.add_row(Tag::OrderLink, terms, sense, rhs);
                    };
                    link(vec![(va.x, -1), (vb.x, -1)], Sense::Ge, -1);
                    link(vec![(va.x, -1)], Sense::Le, 0);
                    link(vec![(vb.x, -1)], Sense::Le, 0);
                    self.emit_gap_row(pair.relation, ma, va, mb, vb, a_first);
                    self.emit_gap_row(pair.relation, mb, vb, ma, va, b_first);
                }
                _ => unreachable!("pair vars follow the class"),
            }
        }
    }

    /// One separation row: `second` departs late enough behind `first`,
    /// active only when the order binary is raised.
    fn emit_gap_row(
        &mut self,
        relation: PairRelation,
        first: &crate::preprocess::Movement,
        first_vars: MoveVars,
        second: &crate::preprocess::Movement,
        second_vars: MoveVars,
        z: VarId,
    ) {
        let m = self.big_m;
        match relation {
            PairRelation::Following => {
                let section = &self.spec.sections[&first.section_key()];
                let h = section.headway(&first.train_type, &second.train_type).unwrap();
                let w = self.headway_red(&first.from, &first.to);
                self.model.add_row(
                    Tag::HeadwayGap,
                    vec![(second_vars.d, 1), (first_vars.d, -1), (w, 1), (z, -m)],
                    Sense::Ge,
                    h - m,
                );
            }
            PairRelation::Crossing => {
                let ct = self.spec.nodes[&first.to].crossing_time_minutes;
                self.model.add_row(
                    Tag::CrossingGap,
                    vec![(second_vars.d, 1), (first_vars.a, -1), (z, -m)],
                    Sense::Ge,
                    ct - m,
                );
            }
        }
    }

    fn emit_robust_rows(&mut self) {
        let required = self.family.required_active();
        let terms: Vec<(VarId, i64)> =
            self.scenario_vars.values().map(|&v| (v, 1)).collect();
        self.model.add_row(Tag::Coverage, terms, Sense::Ge, required);
        for scenario in &self.family.scenarios {
            if scenario.demanded_optional_count == 0 {
                continue;
            }
            let s = self.scenario_vars[&scenario.id];
            let mut terms: Vec<(VarId, i64)> = scenario
                .trains
                .values()
                .filter(|t| t.optional)
                .map(|t| (self.train_vars[&scenario.train_key(&t.id)], 1))
                .collect();
            terms.push((s, -(scenario.demanded_optional_count as i64)));
            self.model.add_row(Tag::OptionalDemand, terms, Sense::Ge, 0);
        }
    }

    fn movement_terms(
        &self,
        key: &TrainKey,
        pick: impl Fn(&crate::preprocess::Movement, MoveVars) -> Option<VarId>,
    ) -> Vec<(VarId, i64)> {
        self.moves_of
            .get(key)
            .into_iter()
            .flatten()
            .filter_map(|&mi| {
                pick(&self.sets.movements[mi], self.move_vars[mi]).map(|v| (v, 1))
            })
            .collect()
    }

    fn departures_out(&self, key: &TrainKey, node: &NodeId) -> Vec<(VarId, i64)> {
        self.movement_terms(key, |m, v| (m.from == *node).then_some(v.d))
    }

    fn arrivals_into(&self, key: &TrainKey, node: &NodeId) -> Vec<(VarId, i64)> {
        self.movement_terms(key, |m, v| (m.to == *node).then_some(v.a))
    }

    fn x_out(&self, key: &TrainKey, node: &NodeId) -> Vec<(VarId, i64)> {
        self.movement_terms(key, |m, v| (m.from == *node).then_some(v.x))
    }

    fn x_into(&self, key: &TrainKey, node: &NodeId) -> Vec<(VarId, i64)> {
        self.movement_terms(key, |m, v| (m.to == *node).then_some(v.x))
    }
}
