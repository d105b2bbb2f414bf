//! Model-shrinking sets computed before the MILP is built: candidate routes,
//! candidate movements with departure windows, track slots, and pre-classified
//! separation pairs.

pub mod headway;
pub mod paths;

pub use headway::{classify_crossing, classify_following, CrossingTimes, PairClass, Window};
pub use paths::{enumerate_paths, Path, PathSet, MAX_PATHS_PER_TRAIN};

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::*;
use crate::shortest::min_travel_time;

/// One candidate movement: `train` traverses the section `from -> to` on
/// `track`. The window bounds its departure from `from` given the train's own
/// time limits, assuming every buyable reduction elsewhere.
#[derive(Clone, Debug)]
pub struct Movement {
    pub train: TrainKey,
    pub train_type: TrainType,
    pub from: NodeId,
    pub to: NodeId,
    pub track: u8,
    pub window: Window,
}

impl Movement {
    pub fn section_key(&self) -> SectionKey {
        SectionKey::new(self.from.clone(), self.to.clone())
    }

    pub fn direction(&self) -> Direction {
        direction(&self.from, &self.to)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PairRelation {
    /// Same direction, same track: a minimum-gap requirement at departure.
    Following,
    /// Opposite directions, same track: the section must be cleared between.
    Crossing,
}

/// Two movements (indices into [`RelevantSets::movements`]) that could share
/// a track, with their pre-decided class.
#[derive(Clone, Debug)]
pub struct HeadwayPair {
    pub a: usize,
    pub b: usize,
    pub relation: PairRelation,
    pub class: PairClass,
}

#[derive(Clone, Debug, Default)]
pub struct RelevantSets {
    pub paths: BTreeMap<TrainKey, PathSet>,
    pub movements: Vec<Movement>,
    /// Track slots on sections touched by at least one route. Build variables
    /// exist exactly for these, including lower tracks a movement never uses
    /// itself but whose construction a higher track presumes.
    pub section_tracks: BTreeSet<(SectionKey, u8)>,
    /// Through-links needed by at least one route.
    pub link_keys: BTreeSet<LinkKey>,
    pub pairs: Vec<HeadwayPair>,
    pub warnings: Vec<String>,
}

impl RelevantSets {
    /// Nodes strictly inside at least one of the train's routes.
    pub fn interior_nodes(&self, key: &TrainKey) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        if let Some(ps) = self.paths.get(key) {
            for p in &ps.paths {
                if p.nodes.len() > 2 {
                    out.extend(p.nodes[1..p.nodes.len() - 1].iter().cloned());
                }
            }
        }
        out
    }

    pub fn movement_indices_of(&self, key: &TrainKey) -> Vec<usize> {
        (0..self.movements.len()).filter(|&i| self.movements[i].train == *key).collect()
    }
}

#[derive(thiserror::Error, Debug)]
pub enum PreprocessError {
    #[error(transparent)]
    Tracks(#[from] DomainError),
    #[error("section {section}: no headway for type pair ({lead},{follow})")]
    MissingHeadway { section: SectionKey, lead: TrainType, follow: TrainType },
}

/// Departure bounds for `train` leaving `from` towards `to`, or `None` when
/// no timing inside the train's bounds can use this movement at all.
pub fn departure_window(
    spec: &InfrastructureSpec,
    train: &Train,
    from: &NodeId,
    to: &NodeId,
    config: &BuildConfig,
) -> Option<Window> {
    let reduce = config.reductions_allowed;
    let section = spec.section(from, to)?;
    let step = section.travel(&train.train_type)? - section.time_reduction_cap(config);
    let before = min_travel_time(spec, &train.train_type, &train.origin, from, reduce)?;
    let after = min_travel_time(spec, &train.train_type, to, &train.destination, reduce)?;
    let w = Window {
        lb: train.earliest_departure + before,
        ub: train.latest_arrival - step - after,
    };
    (!w.is_empty()).then_some(w)
}

pub fn build_relevant_sets(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
) -> Result<RelevantSets, PreprocessError> {
    let mut sets = RelevantSets::default();
    let mut used_sections: BTreeSet<SectionKey> = BTreeSet::new();
    for scenario in &family.scenarios {
        for train in scenario.trains.values() {
            let key = scenario.train_key(&train.id);
            let ps = enumerate_paths(spec, train, config);
            if ps.truncated {
                sets.warnings
                    .push(format!("train {key}: route list cut to {MAX_PATHS_PER_TRAIN}"));
            }
            if ps.paths.is_empty() {
                sets.warnings.push(format!("train {key}: no usable route"));
            }
            let mut arcs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
            for p in &ps.paths {
                used_sections.extend(p.sections());
                arcs.extend(p.arcs().map(|(u, v)| (u.clone(), v.clone())));
                for w in p.nodes.windows(3) {
                    sets.link_keys.insert(LinkKey::new(w[1].clone(), w[0].clone(), w[2].clone()));
                }
            }
            for (u, v) in arcs {
                // every arc on a surviving route has a nonempty window
                let Some(window) = departure_window(spec, train, &u, &v, config) else {
                    sets.warnings.push(format!("train {key}: dead movement {u}->{v}"));
                    continue;
                };
                let section = spec.section(&u, &v).unwrap();
                for track in
                    allowed_tracks(direction(&u, &v), section.effective_max_tracks(config))?
                {
                    sets.movements.push(Movement {
                        train: key.clone(),
                        train_type: train.train_type.clone(),
                        from: u.clone(),
                        to: v.clone(),
                        track,
                        window,
                    });
                }
            }
            sets.paths.insert(key, ps);
        }
    }
    for key in used_sections {
        let top = spec.sections[&key].effective_max_tracks(config);
        for track in 1..=top {
            sets.section_tracks.insert((key.clone(), track));
        }
    }
    sets.movements.sort_by(|x, y| {
        (&x.train, &x.from, &x.to, x.track).cmp(&(&y.train, &y.from, &y.to, y.track))
    });
    sets.pairs = pair_classes(spec, config, &sets.movements)?;
    Ok(sets)
}

fn pair_classes(
    spec: &InfrastructureSpec,
    config: &BuildConfig,
    movements: &[Movement],
) -> Result<Vec<HeadwayPair>, PreprocessError> {
    let mut out = Vec::new();
    for a in 0..movements.len() {
        for b in a + 1..movements.len() {
            let (ma, mb) = (&movements[a], &movements[b]);
            if ma.train == mb.train || ma.track != mb.track {
                continue;
            }
            if ma.section_key() != mb.section_key() {
                continue;
            }
            if ma.train.scenario != mb.train.scenario && !config.cross_scenario_headways {
                continue;
            }
            let section = spec.sections.get(&ma.section_key()).unwrap();
            let missing = |lead: &Movement, follow: &Movement| PreprocessError::MissingHeadway {
                section: lead.section_key(),
                lead: lead.train_type.clone(),
                follow: follow.train_type.clone(),
            };
            let pair = if ma.from == mb.from {
                let h_ab = section.headway(&ma.train_type, &mb.train_type)
                    .ok_or_else(|| missing(ma, mb))?;
                let h_ba = section.headway(&mb.train_type, &ma.train_type)
                    .ok_or_else(|| missing(mb, ma))?;
                HeadwayPair {
                    a,
                    b,
                    relation: PairRelation::Following,
                    class: classify_following(ma.window, mb.window, h_ab, h_ba),
                }
            } else {
                let cap = section.time_reduction_cap(config);
                let travel_a = section.travel(&ma.train_type).unwrap();
                let travel_b = section.travel(&mb.train_type).unwrap();
                let t = CrossingTimes {
                    travel_a,
                    travel_a_min: travel_a - cap,
                    travel_b,
                    travel_b_min: travel_b - cap,
                    clear_after_a: spec.nodes[&ma.to].crossing_time_minutes,
                    clear_after_b: spec.nodes[&mb.to].crossing_time_minutes,
                };
                HeadwayPair {
                    a,
                    b,
                    relation: PairRelation::Crossing,
                    class: classify_crossing(ma.window, mb.window, &t),
                }
            };
            out.push(pair);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::validate::tests::{chain_abc, config_b, node, scenario, section, train};

    fn single_section_spec(headway: i64, crossing: i64) -> InfrastructureSpec {
        let mut spec = InfrastructureSpec::default();
        for id in ["A", "B"] {
            spec.nodes.insert(id.into(), node(id, 10, crossing));
        }
        let s = section("A", "B", 10, headway, 2, 0);
        spec.sections.insert(s.key.clone(), s);
        spec
    }

    #[test]
    fn chain_departure_windows() {
        let spec = chain_abc(10, 10, 0);
        let k = train("k", "A", "C", 10, 40);
        let cfg = config_b(240);
        let w1 = departure_window(&spec, &k, &"A".into(), &"B".into(), &cfg).unwrap();
        assert_eq!((w1.lb, w1.ub), (10, 20));
        let w2 = departure_window(&spec, &k, &"B".into(), &"C".into(), &cfg).unwrap();
        assert_eq!((w2.lb, w2.ub), (20, 30));
        // too tight to fit both legs
        let tight = train("k", "A", "C", 10, 29);
        assert!(departure_window(&spec, &tight, &"A".into(), &"B".into(), &cfg).is_none());
    }

    #[test]
    fn reductions_widen_windows() {
        let spec = chain_abc(10, 10, 2);
        let k = train("k", "A", "C", 10, 40);
        let w = departure_window(&spec, &k, &"A".into(), &"B".into(), &config_b(240)).unwrap();
        assert_eq!((w.lb, w.ub), (10, 24));
        let w = departure_window(&spec, &k, &"A".into(), &"B".into(), &BuildConfig::preset_c(240))
            .unwrap();
        assert_eq!((w.lb, w.ub), (10, 20));
    }

    #[test]
    fn movement_sets_and_track_slots() {
        let spec = chain_abc(10, 10, 0);
        let up = train("k1", "A", "C", 0, 60);
        let down = train("k2", "C", "A", 0, 60);
        let family = TimetableFamily::single(scenario("s0", vec![up, down]));
        let sets = build_relevant_sets(&spec, &family, &config_b(240)).unwrap();
        // ascending movements may only take track 1; descending ones 1 or 2
        let count = |id: &str| sets.movements.iter().filter(|m| m.train.train.0 == id).count();
        assert_eq!(count("k1"), 2);
        assert_eq!(count("k2"), 4);
        assert_eq!(sets.section_tracks.len(), 4);
        assert_eq!(sets.link_keys.len(), 1);
        assert_eq!(sets.interior_nodes(&family.scenarios[0].train_key(&"k1".into())).len(), 1);
    }

    #[test]
    fn four_trains_one_free_one_fixed_pair() {
        let spec = single_section_spec(8, 2);
        let family = TimetableFamily::single(scenario(
            "s0",
            vec![
                train("k1", "A", "B", 10, 40),
                train("k2", "A", "B", 45, 70),
                train("k3", "A", "B", 63, 90),
                train("k4", "A", "B", 69, 95),
            ],
        ));
        let sets = build_relevant_sets(&spec, &family, &config_b(240)).unwrap();
        assert_eq!(sets.movements.len(), 4);
        assert_eq!(sets.pairs.len(), 6);
        let by_class = |c: PairClass| sets.pairs.iter().filter(|p| p.class == c).count();
        assert_eq!(by_class(PairClass::FreeOrder), 1);
        assert_eq!(by_class(PairClass::FixedOrder { first_is_a: true }), 1);
        assert_eq!(by_class(PairClass::Implicit), 4);
        let free = sets.pairs.iter().find(|p| p.class == PairClass::FreeOrder).unwrap();
        let names = (
            sets.movements[free.a].train.train.0.as_str(),
            sets.movements[free.b].train.train.0.as_str(),
        );
        assert_eq!(names, ("k3", "k4"));
    }

    #[test]
    fn opposite_trains_far_apart_are_implicit() {
        let spec = single_section_spec(8, 2);
        let family = TimetableFamily::single(scenario(
            "s0",
            vec![train("k1", "A", "B", 10, 30), train("k2", "B", "A", 50, 70)],
        ));
        let sets = build_relevant_sets(&spec, &family, &config_b(240)).unwrap();
        // k1 ascending track 1; k2 descending tracks 1 and 2; shared track 1
        assert_eq!(sets.movements.len(), 3);
        assert_eq!(sets.pairs.len(), 1);
        assert_eq!(sets.pairs[0].relation, PairRelation::Crossing);
        assert_eq!(sets.pairs[0].class, PairClass::Implicit);
    }

    #[test]
    fn opposite_trains_same_tight_window_conflict() {
        let spec = single_section_spec(8, 2);
        let family = TimetableFamily::single(scenario(
            "s0",
            vec![train("k1", "A", "B", 10, 22), train("k2", "B", "A", 10, 22)],
        ));
        let sets = build_relevant_sets(&spec, &family, &config_b(240)).unwrap();
        assert_eq!(sets.pairs.len(), 1);
        assert_eq!(sets.pairs[0].class, PairClass::Conflict);
    }

    #[test]
    fn scenarios_do_not_interact_unless_asked() {
        let spec = single_section_spec(8, 2);
        let mk = || train("k1", "A", "B", 10, 40);
        let family = TimetableFamily {
            scenarios: vec![scenario("s0", vec![mk()]), scenario("s1", vec![mk()])],
            coverage_share: rat(1),
        };
        let mut cfg = config_b(240);
        let sets = build_relevant_sets(&spec, &family, &cfg).unwrap();
        assert!(sets.pairs.is_empty());
        cfg.cross_scenario_headways = true;
        let sets = build_relevant_sets(&spec, &family, &cfg).unwrap();
        assert_eq!(sets.pairs.len(), 1);
    }
}
