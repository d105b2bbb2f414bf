//! Shortest travel times over the candidate network.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::domain::{InfrastructureSpec, NodeId, TrainType};

/// Minimal running time in minutes from `from` to `to` for `train_type`,
/// ignoring stops. With `assume_max_reductions` every section contributes its
/// travel time minus the full time-reduction allowance, which is the right
/// lower bound when reductions may still be bought. Returns `None` when no
/// route exists (including sections that lack a travel time for the type).
pub fn min_travel_time(
    spec: &InfrastructureSpec,
    train_type: &TrainType,
    from: &NodeId,
    to: &NodeId,
    assume_max_reductions: bool,
) -> Option<i64> {
    if from == to {
        return Some(0);
    }
    if !spec.nodes.contains_key(from) || !spec.nodes.contains_key(to) {
        return None;
    }
    let mut dist: BTreeMap<&NodeId, i64> = BTreeMap::new();
    let mut heap: BinaryHeap<Reverse<(i64, &NodeId)>> = BinaryHeap::new();
    dist.insert(from, 0);
    heap.push(Reverse((0, from)));
    while let Some(Reverse((d, node))) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        if node == to {
            return Some(d);
        }
        for (key, section) in &spec.sections {
            if !key.contains(node) {
                continue;
            }
            let Some(t) = section.travel(train_type) else { continue };
            let w = if assume_max_reductions { t - section.max_time_reduction } else { t };
            let next = key.other(node);
            let nd = d + w;
            if dist.get(next).map_or(true, |&old| nd < old) {
                dist.insert(next, nd);
                heap.push(Reverse((nd, next)));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_instance, GenerateParams};

    fn chain_spec(reduction: i64) -> InfrastructureSpec {
        crate::validate::tests::chain_abc(10, 10, reduction)
    }

    #[test]
    fn chain_without_reductions() {
        let spec = chain_spec(0);
        let t = min_travel_time(&spec, &"local".into(), &"A".into(), &"C".into(), false);
        assert_eq!(t, Some(20));
    }

    #[test]
    fn chain_with_max_reductions() {
        let spec = chain_spec(2);
        let t = min_travel_time(&spec, &"local".into(), &"A".into(), &"C".into(), true);
        assert_eq!(t, Some(16));
        // the flag off ignores the allowance
        let t = min_travel_time(&spec, &"local".into(), &"A".into(), &"C".into(), false);
        assert_eq!(t, Some(20));
    }

    #[test]
    fn disconnected_pair_unreachable() {
        let mut spec = chain_spec(0);
        spec.nodes.insert(
            "Z".into(),
            crate::domain::Node { id: "Z".into(), max_stop_minutes: 5, crossing_time_minutes: 1 },
        );
        let t = min_travel_time(&spec, &"local".into(), &"A".into(), &"Z".into(), false);
        assert_eq!(t, None);
    }

    /// Exhaustive simple-path enumeration; deliberately shares no code with
    /// the Dijkstra above.
    fn dfs_min(
        spec: &InfrastructureSpec,
        ty: &TrainType,
        at: &NodeId,
        to: &NodeId,
        seen: &mut Vec<NodeId>,
        time: i64,
        best: &mut Option<i64>,
    ) {
        if at == to {
            if best.map_or(true, |b| time < b) {
                *best = Some(time);
            }
            return;
        }
        let neighbors: Vec<NodeId> = spec.neighbors(at).cloned().collect();
        for next in neighbors {
            if seen.contains(&next) {
                continue;
            }
            let section = spec.section(at, &next).unwrap();
            let Some(t) = section.travel(ty) else { continue };
            seen.push(next.clone());
            dfs_min(spec, ty, &next, to, seen, time + t, best);
            seen.pop();
        }
    }

    #[test]
    fn agrees_with_exhaustive_dfs_on_random_graph() {
        let doc = generate_instance(&GenerateParams {
            seed: 7,
            nodes: 10,
            sections: 14,
            trains: 1,
            ..GenerateParams::default()
        })
        .unwrap();
        let (spec, family, _) = doc.into_domain().unwrap();
        let ty = family.scenarios[0].trains.values().next().unwrap().train_type.clone();
        let ids: Vec<NodeId> = spec.nodes.keys().cloned().collect();
        for from in &ids {
            for to in &ids {
                let mut best = None;
                let mut seen = vec![from.clone()];
                dfs_min(&spec, &ty, from, to, &mut seen, 0, &mut best);
                let got = min_travel_time(&spec, &ty, from, to, false);
                assert_eq!(got, best, "pair {from}->{to}");
            }
        }
    }

    #[test]
    fn symmetric_between_endpoints() {
        let spec = chain_spec(1);
        let ab = min_travel_time(&spec, &"local".into(), &"A".into(), &"C".into(), true);
        let ba = min_travel_time(&spec, &"local".into(), &"C".into(), &"A".into(), true);
        assert_eq!(ab, ba);
    }
}
