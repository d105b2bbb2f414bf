//! On-disk instance format.
//!
//! Instances travel as JSON documents with flat, order-stable lists; maps
//! keyed by struct-like keys do not survive JSON, so sections carry their
//! endpoints inline and are normalised during conversion. All money fields
//! are decimal strings to keep costs exact. [`InstanceDocument::into_domain`]
//! only checks what is needed to build the domain model (ids, number
//! formats, duplicates); semantic checks live in [`crate::validate`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    InfrastructureSpec, LinkKey, Node, NodeLink, RelationKind, Scenario, Section, SectionKey,
    TimetableFamily, TimingRelation, Train,
};
use crate::rat::parse_decimal;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

fn bad(location: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError::Invalid { location: location.into(), message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub schema_version: u32,
    pub planning_horizon: i64,
    /// Fraction of scenarios that must be operated, as a decimal string.
    #[serde(default = "one_text")]
    pub coverage_share: String,
    pub nodes: Vec<NodeDoc>,
    pub sections: Vec<SectionDoc>,
    #[serde(default)]
    pub links: Vec<LinkDoc>,
    pub scenarios: Vec<ScenarioDoc>,
}

fn one_text() -> String {
    "1".into()
}

fn zero_text() -> String {
    "0".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub max_stop: i64,
    pub crossing_time: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionDoc {
    pub from: String,
    pub to: String,
    pub length_km: String,
    pub max_tracks: u8,
    pub travel_times: Vec<TravelDoc>,
    pub headways: Vec<HeadwayDoc>,
    pub track_costs: Vec<TrackCostDoc>,
    pub time_reduction: ReductionDoc,
    pub headway_reduction: ReductionDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelDoc {
    pub train_type: String,
    pub minutes: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadwayDoc {
    pub lead: String,
    pub follow: String,
    pub minutes: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackCostDoc {
    pub track: u8,
    pub cost: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionDoc {
    pub cost_per_minute: String,
    pub cap: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub at: String,
    pub from: String,
    pub to: String,
    pub cost: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub id: String,
    #[serde(default = "zero_text")]
    pub penalty: String,
    #[serde(default)]
    pub demanded_optional: u32,
    #[serde(default)]
    pub chosen_optional: Vec<String>,
    pub trains: Vec<TrainDoc>,
    #[serde(default)]
    pub relations: Vec<RelationDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainDoc {
    pub id: String,
    pub train_type: String,
    pub origin: String,
    pub destination: String,
    pub earliest_departure: i64,
    pub latest_arrival: i64,
    #[serde(default)]
    pub via: Vec<String>,
    #[serde(default)]
    pub optional: bool,
    #[serde(default = "zero_text")]
    pub penalty: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    /// "arrival-frequency", "departure-frequency" or "transfer".
    pub kind: String,
    pub first: String,
    pub second: String,
    pub at: String,
    pub min: i64,
    pub max: i64,
}

pub fn load_instance(path: &Path) -> Result<InstanceDocument, SchemaError> {
    let text = fs::read_to_string(path)
        .map_err(|source| SchemaError::Io { path: path.display().to_string(), source })?;
    InstanceDocument::from_json(&text)
}

pub fn save_instance(path: &Path, doc: &InstanceDocument) -> Result<(), SchemaError> {
    fs::write(path, doc.to_json())
        .map_err(|source| SchemaError::Io { path: path.display().to_string(), source })
}

fn valid_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn checked_id(location: &str, s: &str) -> Result<String, SchemaError> {
    if valid_id(s) {
        Ok(s.to_string())
    } else {
        Err(bad(location, format!("id {s:?} must match [A-Za-z0-9_]+")))
    }
}

fn money(location: &str, text: &str) -> Result<crate::rat::Rat, SchemaError> {
    parse_decimal(text).map_err(|e| bad(location, e))
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("document serialisation");
        out.push('\n');
        out
    }

    /// Builds the domain model. Rejects version mismatches, malformed ids,
    /// unparseable numbers and duplicate entries; everything else is left
    /// to the semantic validator.
    pub fn into_domain(
        &self,
    ) -> Result<(InfrastructureSpec, TimetableFamily, i64), SchemaError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        let mut spec = InfrastructureSpec::default();
        for n in &self.nodes {
            let loc = format!("node {}", n.id);
            let id = checked_id(&loc, &n.id)?;
            let node = Node {
                id: id.as_str().into(),
                max_stop_minutes: n.max_stop,
                crossing_time_minutes: n.crossing_time,
            };
            if spec.nodes.insert(node.id.clone(), node).is_some() {
                return Err(bad(&loc, "declared twice"));
            }
        }
        for s in &self.sections {
            let loc = format!("section {}-{}", s.from, s.to);
            checked_id(&loc, &s.from)?;
            checked_id(&loc, &s.to)?;
            if s.from == s.to {
                return Err(bad(&loc, "endpoints must differ"));
            }
            let mut travel_time = BTreeMap::new();
            for t in &s.travel_times {
                if travel_time.insert(t.train_type.as_str().into(), t.minutes).is_some() {
                    return Err(bad(&loc, format!("travel time for {} listed twice", t.train_type)));
                }
            }
            let mut base_headway = BTreeMap::new();
            for h in &s.headways {
                let pair = (h.lead.as_str().into(), h.follow.as_str().into());
                if base_headway.insert(pair, h.minutes).is_some() {
                    return Err(bad(
                        &loc,
                        format!("headway ({},{}) listed twice", h.lead, h.follow),
                    ));
                }
            }
            let mut track_cost = BTreeMap::new();
            for c in &s.track_costs {
                let cost = money(&loc, &c.cost)?;
                if track_cost.insert(c.track, cost).is_some() {
                    return Err(bad(&loc, format!("cost for track {} listed twice", c.track)));
                }
            }
            let section = Section {
                key: SectionKey::new(s.from.as_str().into(), s.to.as_str().into()),
                length_km: money(&loc, &s.length_km)?,
                max_tracks: s.max_tracks,
                travel_time,
                base_headway,
                track_cost,
                time_reduction_cost: money(&loc, &s.time_reduction.cost_per_minute)?,
                headway_reduction_cost: money(&loc, &s.headway_reduction.cost_per_minute)?,
                max_time_reduction: s.time_reduction.cap,
                max_headway_reduction: s.headway_reduction.cap,
            };
            if spec.sections.insert(section.key.clone(), section).is_some() {
                return Err(bad(&loc, "declared twice"));
            }
        }
        for l in &self.links {
            let loc = format!("link {} through {}", l.from, l.at);
            checked_id(&loc, &l.at)?;
            checked_id(&loc, &l.from)?;
            checked_id(&loc, &l.to)?;
            let link = NodeLink {
                key: LinkKey::new(l.at.as_str().into(), l.from.as_str().into(), l.to.as_str().into()),
                cost: money(&loc, &l.cost)?,
            };
            if spec.links.insert(link.key.clone(), link).is_some() {
                return Err(bad(&loc, "declared twice"));
            }
        }

        let mut scenarios = Vec::new();
        let mut scenario_ids = BTreeSet::new();
        for sc in &self.scenarios {
            let loc = format!("scenario {}", sc.id);
            let id = checked_id(&loc, &sc.id)?;
            if !scenario_ids.insert(id.clone()) {
                return Err(bad(&loc, "declared twice"));
            }
            let mut trains = BTreeMap::new();
            for t in &sc.trains {
                let tloc = format!("{loc}, train {}", t.id);
                checked_id(&tloc, &t.id)?;
                let train = Train {
                    id: t.id.as_str().into(),
                    train_type: t.train_type.as_str().into(),
                    origin: t.origin.as_str().into(),
                    destination: t.destination.as_str().into(),
                    earliest_departure: t.earliest_departure,
                    latest_arrival: t.latest_arrival,
                    via_nodes: t.via.iter().map(|v| v.as_str().into()).collect(),
                    optional: t.optional,
                    penalty: money(&tloc, &t.penalty)?,
                };
                if trains.insert(train.id.clone(), train).is_some() {
                    return Err(bad(&tloc, "declared twice"));
                }
            }
            let mut relations = Vec::new();
            for r in &sc.relations {
                let rloc = format!("{loc}, relation {} -> {}", r.first, r.second);
                let kind = match r.kind.as_str() {
                    "arrival-frequency" => RelationKind::ArrivalFrequency,
                    "departure-frequency" => RelationKind::DepartureFrequency,
                    "transfer" => RelationKind::Transfer,
                    other => return Err(bad(&rloc, format!("unknown kind {other:?}"))),
                };
                relations.push(TimingRelation {
                    kind,
                    first: r.first.as_str().into(),
                    second: r.second.as_str().into(),
                    at_node: r.at.as_str().into(),
                    min_minutes: r.min,
                    max_minutes: r.max,
                });
            }
            scenarios.push(Scenario {
                id: id.as_str().into(),
                trains,
                relations,
                penalty: money(&loc, &sc.penalty)?,
                demanded_optional_count: sc.demanded_optional,
                chosen_optional: sc.chosen_optional.iter().map(|s| s.as_str().into()).collect(),
            });
        }

        let coverage_share = parse_decimal(&self.coverage_share)
            .map_err(|e| bad("coverage_share", e))?;
        let family = TimetableFamily { scenarios, coverage_share };
        Ok((spec, family, self.planning_horizon))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn tiny_doc() -> InstanceDocument {
        InstanceDocument {
            schema_version: 1,
            planning_horizon: 60,
            coverage_share: "1".into(),
            nodes: vec![
                NodeDoc { id: "A".into(), max_stop: 10, crossing_time: 2 },
                NodeDoc { id: "B".into(), max_stop: 10, crossing_time: 2 },
            ],
            sections: vec![SectionDoc {
                from: "A".into(),
                to: "B".into(),
                length_km: "20".into(),
                max_tracks: 2,
                travel_times: vec![TravelDoc { train_type: "local".into(), minutes: 10 }],
                headways: vec![HeadwayDoc {
                    lead: "local".into(),
                    follow: "local".into(),
                    minutes: 4,
                }],
                track_costs: vec![
                    TrackCostDoc { track: 1, cost: "100".into() },
                    TrackCostDoc { track: 2, cost: "100.5".into() },
                ],
                time_reduction: ReductionDoc { cost_per_minute: "50".into(), cap: 2 },
                headway_reduction: ReductionDoc { cost_per_minute: "50".into(), cap: 0 },
            }],
            links: vec![],
            scenarios: vec![ScenarioDoc {
                id: "s0".into(),
                penalty: "0".into(),
                demanded_optional: 0,
                chosen_optional: vec![],
                trains: vec![TrainDoc {
                    id: "k1".into(),
                    train_type: "local".into(),
                    origin: "A".into(),
                    destination: "B".into(),
                    earliest_departure: 0,
                    latest_arrival: 40,
                    via: vec![],
                    optional: false,
                    penalty: "0".into(),
                }],
                relations: vec![],
            }],
        }
    }

    #[test]
    fn json_round_trip() {
        let doc = tiny_doc();
        let back = InstanceDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn builds_domain_model() {
        let (spec, family, horizon) = tiny_doc().into_domain().unwrap();
        assert_eq!(horizon, 60);
        assert_eq!(spec.nodes.len(), 2);
        let key = SectionKey::new("A".into(), "B".into());
        let section = &spec.sections[&key];
        assert_eq!(section.track_cost[&2], rat(201) / rat(2));
        assert_eq!(family.scenarios.len(), 1);
        assert!(family.is_deterministic());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_ids() {
        let mut json = tiny_doc().to_json();
        json = json.replacen("\"schema_version\"", "\"surprise\": 1, \"schema_version\"", 1);
        assert!(InstanceDocument::from_json(&json).is_err());

        let mut doc = tiny_doc();
        doc.nodes[0].id = "A station".into();
        assert!(doc.into_domain().is_err());

        let mut doc = tiny_doc();
        doc.sections[0].track_costs[0].cost = "1.2.3".into();
        assert!(doc.into_domain().is_err());

        let mut doc = tiny_doc();
        doc.schema_version = 2;
        assert!(doc.into_domain().is_err());
    }

    #[test]
    fn rejects_duplicates() {
        let mut doc = tiny_doc();
        let copy = doc.sections[0].clone();
        doc.sections.push(copy);
        assert!(doc.into_domain().is_err());

        let mut doc = tiny_doc();
        let copy = doc.scenarios[0].trains[0].clone();
        doc.scenarios[0].trains.push(copy);
        assert!(doc.into_domain().is_err());
    }

    #[test]
    fn unknown_relation_kind_is_rejected() {
        let mut doc = tiny_doc();
        doc.scenarios[0].relations.push(RelationDoc {
            kind: "tea-break".into(),
            first: "k1".into(),
            second: "k1".into(),
            at: "A".into(),
            min: 0,
            max: 5,
        });
        assert!(doc.into_domain().is_err());
    }
}
