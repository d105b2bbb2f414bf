//! Result files. All tables are plain CSV with a header row, UTF-8, LF line
//! ends; ids never contain commas so no quoting is needed.

use std::fs;
use std::io;
use std::path::Path;

use railnet_core::domain::{InfrastructureSpec, NodeId, TimetableFamily, TrainId};
use railnet_core::pipeline::SweepRow;
use railnet_core::plan::PlanSolution;
use railnet_core::rat::{format_decimal, rat, Rat};

pub fn write_text(path: &Path, content: &str) -> io::Result<()> {
    fs::write(path, content)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut body = serde_json::to_string_pretty(value).expect("serializable report");
    body.push('\n');
    fs::write(path, body)
}

/// Built infrastructure with its price tags: one row per track, link and
/// reduction purchase.
pub fn network_csv(spec: &InfrastructureSpec, plan: &PlanSolution) -> String {
    let mut out = String::from("kind,from,to,at,track,minutes,cost\n");
    for tb in &plan.tracks {
        let cost = spec
            .section(&NodeId::from(tb.from.as_str()), &NodeId::from(tb.to.as_str()))
            .and_then(|s| s.track_cost.get(&tb.track))
            .map(format_decimal)
            .unwrap_or_default();
        out.push_str(&format!("track,{},{},,{},,{}\n", tb.from, tb.to, tb.track, cost));
    }
    for lb in &plan.links {
        let cost = spec
            .link(
                &NodeId::from(lb.at.as_str()),
                &NodeId::from(lb.from.as_str()),
                &NodeId::from(lb.to.as_str()),
            )
            .map(|l| format_decimal(&l.cost))
            .unwrap_or_default();
        out.push_str(&format!("link,{},{},{},,,{}\n", lb.from, lb.to, lb.at, cost));
    }
    for (kind, buys, price) in [
        ("time-reduction", &plan.time_reductions, true),
        ("headway-reduction", &plan.headway_reductions, false),
    ] {
        for rb in buys {
            let section =
                spec.section(&NodeId::from(rb.from.as_str()), &NodeId::from(rb.to.as_str()));
            let cost = section
                .map(|s| {
                    let per_min = if price { s.time_reduction_cost } else { s.headway_reduction_cost };
                    format_decimal(&(per_min * rat(rb.minutes)))
                })
                .unwrap_or_default();
            out.push_str(&format!("{kind},{},{},,,{},{}\n", rb.from, rb.to, rb.minutes, cost));
        }
    }
    out
}

/// Chosen route of every running train, one row per travelled section.
pub fn routing_csv(plan: &PlanSolution) -> String {
    let mut out = String::from("scenario,train,leg,from,to,track\n");
    for sp in &plan.scenarios {
        for tp in sp.trains.iter().filter(|t| t.active) {
            for leg in 0..tp.stops.len().saturating_sub(1) {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    sp.id,
                    tp.id,
                    leg + 1,
                    tp.stops[leg].node,
                    tp.stops[leg + 1].node,
                    tp.stops[leg].track_to_next.map(|t| t.to_string()).unwrap_or_default()
                ));
            }
        }
    }
    out
}

/// Arrival and departure minutes per train and node.
pub fn timetable_csv(plan: &PlanSolution) -> String {
    let mut out = String::from("scenario,train,node,arrival,departure\n");
    let fmt = |v: Option<i64>| v.map(|m| m.to_string()).unwrap_or_default();
    for sp in &plan.scenarios {
        for tp in sp.trains.iter().filter(|t| t.active) {
            for stop in &tp.stops {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    sp.id,
                    tp.id,
                    stop.node,
                    fmt(stop.arrival),
                    fmt(stop.departure)
                ));
            }
        }
    }
    out
}

/// Time-space trajectories: cumulative distance along each train's route
/// against event minutes, tagged with the train type for per-type coloring.
pub fn diagram_csv(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    plan: &PlanSolution,
) -> String {
    let mut out = String::from("scenario,train,train_type,node,distance_km,minute,event\n");
    for sp in &plan.scenarios {
        let Some(scenario) = family
            .scenarios
            .iter()
            .find(|s| s.id.to_string() == sp.id)
        else {
            continue;
        };
        for tp in sp.trains.iter().filter(|t| t.active) {
            let ty = scenario
                .trains
                .get(&TrainId::from(tp.id.as_str()))
                .map(|t| t.train_type.to_string())
                .unwrap_or_default();
            let mut travelled: Rat = rat(0);
            for (i, stop) in tp.stops.iter().enumerate() {
                if i > 0 {
                    let a = NodeId::from(tp.stops[i - 1].node.as_str());
                    let b = NodeId::from(stop.node.as_str());
                    if let Some(section) = spec.section(&a, &b) {
                        travelled += section.length_km;
                    }
                }
                let km = format_decimal(&travelled);
                if let Some(arr) = stop.arrival {
                    out.push_str(&format!(
                        "{},{},{ty},{},{km},{arr},arrival\n",
                        sp.id, tp.id, stop.node
                    ));
                }
                if let Some(dep) = stop.departure {
                    out.push_str(&format!(
                        "{},{},{ty},{},{km},{dep},departure\n",
                        sp.id, tp.id, stop.node
                    ));
                }
            }
        }
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "requested_percent,achieved_percent,status,cost,active_scenarios,total_scenarios,tracks,links,solve_seconds,gap_percent\n",
    );
    for row in rows {
        let opt_num = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.3},{}\n",
            row.requested_percent,
            row.achieved_percent.map(|p| format!("{p:.1}")).unwrap_or_default(),
            row.status,
            row.cost.clone().unwrap_or_default(),
            opt_num(row.active_scenarios),
            row.total_scenarios,
            opt_num(row.tracks_built),
            opt_num(row.links_built),
            row.runtime_seconds,
            row.gap_percent.map(|g| format!("{g:.2}")).unwrap_or_default(),
        ));
    }
    out
}
