//! Candidate route enumeration.
//!
//! A route is a simple node sequence from origin to destination where every
//! consecutive pair is a section and every interior turn is a declared
//! through-link. Routes whose best-case running time exceeds the train's time
//! budget are dropped during the search, not afterwards.

use std::collections::BTreeMap;

use crate::domain::*;
use crate::shortest::min_travel_time;

/// Routes kept per train after sorting; the rest are cut with a warning.
pub const MAX_PATHS_PER_TRAIN: usize = 64;

/// Hard stop for the route search itself.
const EXPLORATION_CAP: usize = 4096;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Path {
    pub nodes: Vec<NodeId>,
}

impl Path {
    pub fn arcs(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.nodes.windows(2).map(|w| (&w[0], &w[1]))
    }

    pub fn sections(&self) -> impl Iterator<Item = SectionKey> + '_ {
        self.arcs().map(|(a, b)| SectionKey::new(a.clone(), b.clone()))
    }

    pub fn visits(&self, n: &NodeId) -> bool {
        self.nodes.contains(n)
    }

    /// Running time with no reductions bought.
    pub fn travel_full(&self, spec: &InfrastructureSpec, ty: &TrainType) -> Option<i64> {
        self.sections()
            .map(|k| spec.sections.get(&k).and_then(|s| s.travel(ty)))
            .sum()
    }

    /// Running time with every reduction the config allows bought in full.
    pub fn travel_reduced(
        &self,
        spec: &InfrastructureSpec,
        ty: &TrainType,
        config: &BuildConfig,
    ) -> Option<i64> {
        self.sections()
            .map(|k| {
                let s = spec.sections.get(&k)?;
                Some(s.travel(ty)? - s.time_reduction_cap(config))
            })
            .sum()
    }
}

#[derive(Clone, Debug, Default)]
pub struct PathSet {
    /// Sorted by best-case running time, then by node sequence.
    pub paths: Vec<Path>,
    pub truncated: bool,
}

struct Search<'a> {
    spec: &'a InfrastructureSpec,
    train: &'a Train,
    config: &'a BuildConfig,
    budget: i64,
    /// Best-case remaining time to the destination, memoized per node.
    tail: BTreeMap<NodeId, Option<i64>>,
    found: Vec<Path>,
    hit_cap: bool,
}

impl Search<'_> {
    fn tail_time(&mut self, n: &NodeId) -> Option<i64> {
        if let Some(d) = self.tail.get(n) {
            return *d;
        }
        let d = min_travel_time(
            self.spec,
            &self.train.train_type,
            n,
            &self.train.destination,
            self.config.reductions_allowed,
        );
        self.tail.insert(n.clone(), d);
        d
    }

    fn extend(&mut self, stack: &mut Vec<NodeId>, elapsed: i64) {
        if self.found.len() >= EXPLORATION_CAP {
            self.hit_cap = true;
            return;
        }
        let at = stack.last().unwrap().clone();
        if at == self.train.destination {
            if self.train.via_nodes.iter().all(|v| stack.contains(v)) {
                self.found.push(Path { nodes: stack.clone() });
            }
            return;
        }
        let prev = (stack.len() >= 2).then(|| stack[stack.len() - 2].clone());
        let neighbors: Vec<NodeId> = self.spec.neighbors(&at).cloned().collect();
        for next in neighbors {
            if stack.contains(&next) {
                continue;
            }
            let section = self.spec.section(&at, &next).unwrap();
            let Some(t) = section.travel(&self.train.train_type) else { continue };
            if let Some(p) = &prev {
                if self.spec.link(&at, p, &next).is_none() {
                    continue;
                }
            }
            let step = t - section.time_reduction_cap(self.config);
            let Some(rest) = self.tail_time(&next) else { continue };
            if elapsed + step + rest > self.budget {
                continue;
            }
            stack.push(next);
            self.extend(stack, elapsed + step);
            stack.pop();
        }
    }
}

pub fn enumerate_paths(
    spec: &InfrastructureSpec,
    train: &Train,
    config: &BuildConfig,
) -> PathSet {
    if train.origin == train.destination
        || !spec.nodes.contains_key(&train.origin)
        || !spec.nodes.contains_key(&train.destination)
    {
        return PathSet::default();
    }
    let mut search = Search {
        spec,
        train,
        config,
        budget: train.time_budget(),
        tail: BTreeMap::new(),
        found: Vec::new(),
        hit_cap: false,
    };
    let mut stack = vec![train.origin.clone()];
    search.extend(&mut stack, 0);
    let mut paths = search.found;
    paths.sort_by_key(|p| {
        (p.travel_reduced(spec, &train.train_type, config).unwrap(), p.nodes.clone())
    });
    let mut truncated = search.hit_cap;
    if paths.len() > MAX_PATHS_PER_TRAIN {
        paths.truncate(MAX_PATHS_PER_TRAIN);
        truncated = true;
    }
    PathSet { paths, truncated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::tests::{chain_abc, config_b, node, section, train};
    use crate::rat::rat;

    fn names(ps: &PathSet) -> Vec<Vec<&str>> {
        ps.paths
            .iter()
            .map(|p| p.nodes.iter().map(|n| n.0.as_str()).collect())
            .collect()
    }

    /// A - {B, C} - D with the upper branch 4 minutes faster.
    fn diamond() -> InfrastructureSpec {
        let mut spec = InfrastructureSpec::default();
        for id in ["A", "B", "C", "D"] {
            spec.nodes.insert(id.into(), node(id, 10, 2));
        }
        for (a, b, t) in [("A", "B", 10), ("B", "D", 10), ("A", "C", 12), ("C", "D", 12)] {
            let s = section(a, b, t, 4, 2, 0);
            spec.sections.insert(s.key.clone(), s);
        }
        for (at, a, b) in [("B", "A", "D"), ("C", "A", "D")] {
            let link = NodeLink { key: LinkKey::new(at.into(), a.into(), b.into()), cost: rat(10) };
            spec.links.insert(link.key.clone(), link);
        }
        spec
    }

    #[test]
    fn chain_has_exactly_one_route() {
        let spec = chain_abc(10, 10, 0);
        let ps = enumerate_paths(&spec, &train("k", "A", "C", 0, 60), &config_b(240));
        assert_eq!(names(&ps), vec![vec!["A", "B", "C"]]);
        assert!(!ps.truncated);
    }

    #[test]
    fn missing_link_blocks_through_running() {
        let mut spec = chain_abc(10, 10, 0);
        spec.links.clear();
        let through = enumerate_paths(&spec, &train("k", "A", "C", 0, 60), &config_b(240));
        assert!(through.paths.is_empty());
        // the first hop alone needs no link
        let hop = enumerate_paths(&spec, &train("k", "A", "B", 0, 60), &config_b(240));
        assert_eq!(names(&hop), vec![vec!["A", "B"]]);
    }

    #[test]
    fn routes_sorted_fastest_first() {
        let ps = enumerate_paths(&diamond(), &train("k", "A", "D", 0, 120), &config_b(240));
        assert_eq!(names(&ps), vec![vec!["A", "B", "D"], vec!["A", "C", "D"]]);
    }

    #[test]
    fn via_node_selects_the_slower_branch() {
        let mut t = train("k", "A", "D", 0, 120);
        t.via_nodes.insert("C".into());
        let ps = enumerate_paths(&diamond(), &t, &config_b(240));
        assert_eq!(names(&ps), vec![vec!["A", "C", "D"]]);
    }

    #[test]
    fn time_budget_prunes_the_slower_branch() {
        let ps = enumerate_paths(&diamond(), &train("k", "A", "D", 0, 22), &config_b(240));
        assert_eq!(names(&ps), vec![vec!["A", "B", "D"]]);
    }

    #[test]
    fn budget_pruning_respects_possible_reductions() {
        let mut spec = diamond();
        for s in spec.sections.values_mut() {
            s.max_time_reduction = 2;
        }
        // 24 - 2*2 = 20 <= 21: the slower branch survives only if reductions count
        let ps = enumerate_paths(&spec, &train("k", "A", "D", 0, 21), &config_b(240));
        assert_eq!(ps.paths.len(), 2);
        let cfg_no_red = crate::domain::BuildConfig::preset_c(240);
        let ps = enumerate_paths(&spec, &train("k", "A", "D", 0, 21), &cfg_no_red);
        assert_eq!(names(&ps), vec![vec!["A", "B", "D"]]);
    }

    #[test]
    fn route_explosion_is_cut_with_a_flag() {
        // seven diamonds in series: 2^7 = 128 simple routes
        let mut spec = InfrastructureSpec::default();
        let stem = |i: usize| format!("N{i}");
        for i in 0..=7 {
            let id = stem(i);
            spec.nodes.insert(id.as_str().into(), node(&id, 10, 2));
        }
        for i in 0..7 {
            for branch in ["P", "Q"] {
                let mid = format!("{branch}{i}");
                spec.nodes.insert(mid.as_str().into(), node(&mid, 10, 2));
                for end in [stem(i), stem(i + 1)] {
                    let s = section(&mid, &end, 5, 4, 1, 0);
                    spec.sections.insert(s.key.clone(), s);
                }
                let link = NodeLink {
                    key: LinkKey::new(mid.as_str().into(), stem(i).as_str().into(), stem(i + 1).as_str().into()),
                    cost: rat(10),
                };
                spec.links.insert(link.key.clone(), link);
            }
        }
        for i in 1..7 {
            for before in ["P", "Q"] {
                for after in ["P", "Q"] {
                    let link = NodeLink {
                        key: LinkKey::new(
                            stem(i).as_str().into(),
                            format!("{before}{}", i - 1).as_str().into(),
                            format!("{after}{i}").as_str().into(),
                        ),
                        cost: rat(10),
                    };
                    spec.links.insert(link.key.clone(), link);
                }
            }
        }
        let ps = enumerate_paths(&spec, &train("k", "N0", "N7", 0, 200), &config_b(240));
        assert_eq!(ps.paths.len(), MAX_PATHS_PER_TRAIN);
        assert!(ps.truncated);
    }
}
