//! Seeded random instance generation.
//!
//! Instances come out connected, fully linked at every junction, and with
//! train windows wide enough that at least one route fits, so infeasibility
//! can only enter through train interactions and timing relations. All
//! draws run in a fixed order from one ChaCha8 stream: the same parameters
//! give byte-identical documents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rat::format_decimal;
use crate::schema::{
    HeadwayDoc, InstanceDocument, LinkDoc, NodeDoc, RelationDoc, ReductionDoc, ScenarioDoc,
    SectionDoc, TrackCostDoc, TrainDoc, TravelDoc, SCHEMA_VERSION,
};
use crate::shortest::min_travel_time;

#[derive(Clone, Debug)]
pub struct GenerateParams {
    pub seed: u64,
    pub nodes: usize,
    pub sections: usize,
    /// Trains per scenario; the first one is always mandatory.
    pub trains: usize,
    pub scenarios: usize,
    /// 1 = local only, 2 = local and express.
    pub train_types: usize,
    /// Chance, in percent, that a generated train after the first is optional.
    pub optional_percent: u32,
    /// Coverage share in percent, exact (60 becomes 0.6).
    pub coverage_percent: u32,
    pub horizon: i64,
}

impl Default for GenerateParams {
    fn default() -> Self {
        GenerateParams {
            seed: 0,
            nodes: 5,
            sections: 6,
            trains: 2,
            scenarios: 1,
            train_types: 1,
            optional_percent: 0,
            coverage_percent: 100,
            horizon: 120,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot generate instance: {0}")]
pub struct GenerateError(pub String);

fn fail(msg: impl Into<String>) -> GenerateError {
    GenerateError(msg.into())
}

const TYPE_NAMES: [&str; 2] = ["local", "express"];

pub fn generate_instance(params: &GenerateParams) -> Result<InstanceDocument, GenerateError> {
    if params.nodes < 2 || params.nodes > 26 {
        return Err(fail(format!("nodes {} outside 2..=26", params.nodes)));
    }
    let complete = params.nodes * (params.nodes - 1) / 2;
    if params.sections < params.nodes - 1 || params.sections > complete {
        return Err(fail(format!(
            "sections {} cannot connect {} nodes (need {}..={complete})",
            params.sections,
            params.nodes,
            params.nodes - 1
        )));
    }
    if params.trains == 0 || params.scenarios == 0 {
        return Err(fail("need at least one train and one scenario"));
    }
    if params.train_types == 0 || params.train_types > TYPE_NAMES.len() {
        return Err(fail(format!("train_types {} outside 1..=2", params.train_types)));
    }
    if params.optional_percent > 100 || params.coverage_percent == 0 || params.coverage_percent > 100
    {
        return Err(fail("percentages must lie in 0..=100, coverage in 1..=100"));
    }
    if params.horizon < 30 {
        return Err(fail("horizon shorter than 30 minutes leaves no room for slack"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let node_name = |i: usize| ((b'A' + i as u8) as char).to_string();

    let nodes: Vec<NodeDoc> = (0..params.nodes)
        .map(|i| NodeDoc {
            id: node_name(i),
            max_stop: rng.gen_range(5..=15),
            crossing_time: rng.gen_range(1..=3),
        })
        .collect();

    // spanning tree first, then extra edges until the quota is met
    let mut edge_set = std::collections::BTreeSet::new();
    for i in 1..params.nodes {
        let j = rng.gen_range(0..i);
        edge_set.insert((j.min(i), j.max(i)));
    }
    while edge_set.len() < params.sections {
        let a = rng.gen_range(0..params.nodes);
        let b = rng.gen_range(0..params.nodes);
        if a != b {
            edge_set.insert((a.min(b), a.max(b)));
        }
    }

    let types = &TYPE_NAMES[..params.train_types];
    let mut sections = Vec::new();
    for &(a, b) in &edge_set {
        let local = rng.gen_range(4..=12i64);
        let mut travel_times = vec![TravelDoc { train_type: types[0].into(), minutes: local }];
        let mut min_travel = local;
        if types.len() > 1 {
            let express = (local - rng.gen_range(1..=3)).max(2);
            min_travel = min_travel.min(express);
            travel_times.push(TravelDoc { train_type: types[1].into(), minutes: express });
        }
        let mut headways = Vec::new();
        let mut min_headway = i64::MAX;
        for lead in types {
            for follow in types {
                let h = rng.gen_range(2..=4i64);
                min_headway = min_headway.min(h);
                headways.push(HeadwayDoc {
                    lead: (*lead).into(),
                    follow: (*follow).into(),
                    minutes: h,
                });
            }
        }
        let max_tracks = [1u8, 2, 2, 2, 3, 4][rng.gen_range(0..6)];
        let base = 100 * rng.gen_range(1..=5i64);
        let track_costs = (1..=max_tracks)
            .map(|t| TrackCostDoc { track: t, cost: (base * t as i64).to_string() })
            .collect();
        let length = 10 * rng.gen_range(1..=6i64);
        let time_cap = rng.gen_range(0..=(min_travel - 1).clamp(0, 2));
        let headway_cap_limit = (min_headway - 2).clamp(0, length / 10);
        let headway_cap = rng.gen_range(0..=headway_cap_limit);
        sections.push(SectionDoc {
            from: node_name(a),
            to: node_name(b),
            length_km: length.to_string(),
            max_tracks,
            travel_times,
            headways,
            track_costs,
            time_reduction: ReductionDoc {
                cost_per_minute: (50 * rng.gen_range(1..=4i64)).to_string(),
                cap: time_cap,
            },
            headway_reduction: ReductionDoc {
                cost_per_minute: (50 * rng.gen_range(1..=4i64)).to_string(),
                cap: headway_cap,
            },
        });
    }

    // every turn at every junction is purchasable
    let mut links = Vec::new();
    for v in 0..params.nodes {
        let mut around: Vec<usize> = Vec::new();
        for &(a, b) in &edge_set {
            if a == v {
                around.push(b);
            } else if b == v {
                around.push(a);
            }
        }
        around.sort_unstable();
        for i in 0..around.len() {
            for j in i + 1..around.len() {
                links.push(LinkDoc {
                    at: node_name(v),
                    from: node_name(around[i]),
                    to: node_name(around[j]),
                    cost: (50 * rng.gen_range(1..=2i64)).to_string(),
                });
            }
        }
    }

    let mut doc = InstanceDocument {
        schema_version: SCHEMA_VERSION,
        planning_horizon: params.horizon,
        coverage_share: format_decimal(&crate::rat::Rat::new(params.coverage_percent as i64, 100)),
        nodes,
        sections,
        links,
        scenarios: Vec::new(),
    };
    let (spec, _, _) = doc
        .into_domain()
        .map_err(|e| fail(format!("internal: generated infrastructure is malformed: {e}")))?;

    for s in 0..params.scenarios {
        let mut trains = Vec::new();
        for k in 0..params.trains {
            let ty = types[rng.gen_range(0..types.len())];
            let mut placed = None;
            for _ in 0..100 {
                let o = rng.gen_range(0..params.nodes);
                let d = rng.gen_range(0..params.nodes);
                if o == d {
                    continue;
                }
                let Some(shortest) = min_travel_time(
                    &spec,
                    &ty.into(),
                    &node_name(o).as_str().into(),
                    &node_name(d).as_str().into(),
                    false,
                ) else {
                    continue;
                };
                let slack = rng.gen_range(4..=20i64);
                if shortest + slack > params.horizon {
                    continue;
                }
                let latest_start = params.horizon - shortest - slack;
                let earliest = rng.gen_range(0..=latest_start.min(params.horizon / 4));
                placed = Some((o, d, earliest, earliest + shortest + slack));
                break;
            }
            let Some((o, d, earliest, latest)) = placed else {
                return Err(fail("horizon too tight to place a train"));
            };
            let optional = k > 0 && rng.gen_range(0..100) < params.optional_percent;
            let penalty =
                if optional { 5 * rng.gen_range(1..=6i64) } else { 10 * rng.gen_range(0..=3i64) };
            trains.push(TrainDoc {
                id: format!("k{}", k + 1),
                train_type: ty.into(),
                origin: node_name(o),
                destination: node_name(d),
                earliest_departure: earliest,
                latest_arrival: latest,
                via: vec![],
                optional,
                penalty: penalty.to_string(),
            });
        }

        let mut relations = Vec::new();
        let mandatory: Vec<&TrainDoc> = trains.iter().filter(|t| !t.optional).collect();
        let mut candidates = Vec::new();
        for i in 0..mandatory.len() {
            for j in 0..mandatory.len() {
                if i == j {
                    continue;
                }
                let (f, g) = (mandatory[i], mandatory[j]);
                if i < j && f.origin == g.origin {
                    candidates.push(("departure-frequency", f.id.clone(), g.id.clone(), f.origin.clone()));
                }
                if i < j && f.destination == g.destination {
                    candidates.push(("arrival-frequency", f.id.clone(), g.id.clone(), f.destination.clone()));
                }
                if f.destination == g.origin {
                    candidates.push(("transfer", f.id.clone(), g.id.clone(), f.destination.clone()));
                }
            }
        }
        if !candidates.is_empty() && rng.gen_bool(0.5) {
            let (kind, first, second, at) =
                candidates[rng.gen_range(0..candidates.len())].clone();
            let min = if kind == "transfer" { 0 } else { rng.gen_range(0..=5) };
            relations.push(RelationDoc {
                kind: kind.into(),
                first,
                second,
                at,
                min,
                max: min + rng.gen_range(10..=30),
            });
        }

        let optional_ids: Vec<String> =
            trains.iter().filter(|t| t.optional).map(|t| t.id.clone()).collect();
        let demanded_optional =
            if !optional_ids.is_empty() && rng.gen_range(0..100) < 30 { 1 } else { 0 };
        let chosen_optional = if !optional_ids.is_empty() && rng.gen_range(0..100) < 20 {
            vec![optional_ids[rng.gen_range(0..optional_ids.len())].clone()]
        } else {
            vec![]
        };
        doc.scenarios.push(ScenarioDoc {
            id: format!("s{s}"),
            penalty: (50 * rng.gen_range(1..=4i64)).to_string(),
            demanded_optional,
            chosen_optional,
            trains,
            relations,
        });
    }

    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BuildConfig;
    use crate::validate::validate_instance;

    #[test]
    fn same_seed_same_bytes() {
        let params = GenerateParams { seed: 11, ..GenerateParams::default() };
        let a = generate_instance(&params).unwrap().to_json();
        let b = generate_instance(&params).unwrap().to_json();
        assert_eq!(a, b);
        let c = generate_instance(&GenerateParams { seed: 12, ..GenerateParams::default() })
            .unwrap()
            .to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_instances_validate_cleanly() {
        for seed in 0..15 {
            let params = GenerateParams {
                seed,
                nodes: 5,
                sections: 6,
                trains: 3,
                scenarios: 2,
                train_types: 2,
                optional_percent: 40,
                coverage_percent: 50,
                ..GenerateParams::default()
            };
            let doc = generate_instance(&params).unwrap();
            let (spec, family, horizon) = doc.into_domain().unwrap();
            let diags = validate_instance(&spec, &family, &BuildConfig::preset_b(horizon));
            assert!(diags.is_empty(), "seed {seed}: {diags:?}");
        }
    }

    #[test]
    fn every_train_fits_its_window() {
        for seed in 0..10 {
            let doc = generate_instance(&GenerateParams {
                seed,
                nodes: 6,
                sections: 8,
                trains: 4,
                ..GenerateParams::default()
            })
            .unwrap();
            let (spec, family, _) = doc.into_domain().unwrap();
            for scenario in &family.scenarios {
                for train in scenario.trains.values() {
                    let t = min_travel_time(
                        &spec,
                        &train.train_type,
                        &train.origin,
                        &train.destination,
                        false,
                    )
                    .expect("trains connect");
                    assert!(
                        train.earliest_departure + t <= train.latest_arrival,
                        "seed {seed} train {}",
                        train.id
                    );
                }
            }
        }
    }

    #[test]
    fn zero_optional_share_means_mandatory_only() {
        let doc = generate_instance(&GenerateParams {
            seed: 3,
            trains: 5,
            optional_percent: 0,
            ..GenerateParams::default()
        })
        .unwrap();
        assert!(doc.scenarios[0].trains.iter().all(|t| !t.optional));
    }

    #[test]
    fn rejects_contradictory_parameters() {
        assert!(generate_instance(&GenerateParams {
            nodes: 5,
            sections: 3,
            ..GenerateParams::default()
        })
        .is_err());
        assert!(generate_instance(&GenerateParams {
            nodes: 40,
            ..GenerateParams::default()
        })
        .is_err());
    }
}
