//! Best-first branch and bound on top of the LP relaxation.
//!
//! Nodes are ordered by relaxation bound (ties by creation id) and branch on
//! the lowest-indexed fractional integer variable. A candidate incumbent is
//! accepted only after its rounded values pass every row and bound in exact
//! integer arithmetic, and its objective is recomputed in rationals, so the
//! reported optimum never inherits floating-point error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::milp::{MilpModel, Sense};
use crate::rat::Rat;

use super::simplex::{solve_lp_bounded, LinearProgram, LpRow, SimplexOutcome};

/// Separation below which two objective values are treated as equal when
/// pruning. Instance costs are decimals with at most a few digits after the
/// point, so distinct objectives differ by far more than this.
const PRUNE_EPS: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SolveLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub integrality_tolerance: f64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            time_limit: None,
            node_limit: None,
            integrality_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimedOut,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimedOut => "timed-out",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Exact objective of the incumbent, including the model constant.
    pub objective: Option<Rat>,
    /// Incumbent values by variable id. Times are integral at accepted
    /// incumbents because the timing rows reduce to difference constraints
    /// once the integer skeleton is fixed.
    pub values: Option<Vec<i64>>,
    pub best_bound: Option<f64>,
    pub nodes: u64,
    pub gap_percent: Option<f64>,
}

struct HeapNode {
    bound: f64,
    id: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for HeapNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for HeapNode {}
impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapNode {
    // Reversed so the BinaryHeap pops the lowest bound first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.id.cmp(&self.id))
    }
}

fn rat_to_f64(r: Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn base_lp(model: &MilpModel) -> LinearProgram {
    let n = model.num_variables();
    let mut objective = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for (j, var) in model.variables.iter().enumerate() {
        objective[j] = rat_to_f64(var.objective);
        let (lb, ub) = var.domain.bounds();
        lower[j] = lb as f64;
        upper[j] = ub as f64;
    }
    let rows = model
        .constraints
        .iter()
        .map(|c| LpRow {
            terms: c.terms.iter().map(|&(v, k)| (v.0, k as f64)).collect(),
            sense: c.sense,
            rhs: c.rhs as f64,
        })
        .collect();
    LinearProgram {
        num_vars: n,
        objective,
        lower,
        upper,
        rows,
    }
}

/// Exact feasibility of rounded values: every domain and every row, checked
/// in integer arithmetic.
pub fn satisfies_model(model: &MilpModel, values: &[i64]) -> bool {
    for (j, var) in model.variables.iter().enumerate() {
        let (lb, ub) = var.domain.bounds();
        if values[j] < lb || values[j] > ub {
            return false;
        }
    }
    for row in &model.constraints {
        let lhs: i128 = row
            .terms
            .iter()
            .map(|&(v, k)| k as i128 * values[v.0] as i128)
            .sum();
        let rhs = row.rhs as i128;
        let ok = match row.sense {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        };
        if !ok {
            return false;
        }
    }
    true
}

pub fn exact_objective(model: &MilpModel, values: &[i64]) -> Rat {
    let mut total = model.objective_constant;
    for (j, var) in model.variables.iter().enumerate() {
        if !var.objective.is_zero() && values[j] != 0 {
            total += var.objective * Ratio::from_integer(values[j]);
        }
    }
    total
}

pub fn solve_branch_and_bound(model: &MilpModel, limits: &SolveLimits) -> MilpSolution {
    let started = Instant::now();
    let base = base_lp(model);
    let int_mask: Vec<bool> = model
        .variables
        .iter()
        .map(|v| v.domain.is_integer())
        .collect();
    let tol = limits.integrality_tolerance;

    let mut heap: BinaryHeap<HeapNode> = BinaryHeap::new();
    heap.push(HeapNode {
        bound: f64::NEG_INFINITY,
        id: 0,
        lower: base.lower.clone(),
        upper: base.upper.clone(),
    });

    let mut next_id = 1u64;
    let mut nodes = 0u64;
    let mut incumbent: Option<(Rat, Vec<i64>)> = None;
    let mut incumbent_f = f64::INFINITY;
    let mut open_bound: Option<f64> = None;
    let mut numerical_trouble = false;
    let mut proved = false;

    loop {
        if let Some(tl) = limits.time_limit {
            if started.elapsed() >= tl {
                open_bound = heap.peek().map(|n| n.bound);
                break;
            }
        }
        if let Some(nl) = limits.node_limit {
            if nodes >= nl {
                open_bound = heap.peek().map(|n| n.bound);
                break;
            }
        }
        let Some(node) = heap.pop() else {
            proved = true;
            break;
        };
        if incumbent.is_some() && node.bound >= incumbent_f - PRUNE_EPS {
            // Best-first order: every open node is at least as bad.
            proved = true;
            break;
        }
        nodes += 1;

        let (objective, values) = match solve_lp_bounded(&base, &node.lower, &node.upper) {
            SimplexOutcome::Infeasible => continue,
            SimplexOutcome::Unbounded | SimplexOutcome::Stalled => {
                numerical_trouble = true;
                continue;
            }
            SimplexOutcome::Optimal { objective, values } => (objective, values),
        };
        if incumbent.is_some() && objective >= incumbent_f - PRUNE_EPS {
            continue;
        }

        let fractional = (0..base.num_vars).find(|&j| {
            int_mask[j] && (values[j] - values[j].round()).abs() > tol
        });
        match fractional {
            None => {
                let rounded: Vec<i64> = values.iter().map(|v| v.round() as i64).collect();
                if !satisfies_model(model, &rounded) {
                    numerical_trouble = true;
                    continue;
                }
                let exact = exact_objective(model, &rounded);
                if incumbent.as_ref().map_or(true, |(best, _)| exact < *best) {
                    incumbent_f = rat_to_f64(exact);
                    incumbent = Some((exact, rounded));
                }
            }
            Some(j) => {
                let v = values[j];
                let down = v.floor();
                if down >= node.lower[j] - 0.5 {
                    let mut upper = node.upper.clone();
                    upper[j] = down;
                    heap.push(HeapNode {
                        bound: objective,
                        id: next_id,
                        lower: node.lower.clone(),
                        upper,
                    });
                    next_id += 1;
                }
                let up = v.ceil();
                if up <= node.upper[j] + 0.5 {
                    let mut lower = node.lower.clone();
                    lower[j] = up;
                    heap.push(HeapNode {
                        bound: objective,
                        id: next_id,
                        lower,
                        upper: node.upper.clone(),
                    });
                    next_id += 1;
                }
            }
        }
    }

    match incumbent {
        Some((exact, values)) => {
            let status = if proved && !numerical_trouble {
                SolveStatus::Optimal
            } else {
                SolveStatus::Feasible
            };
            let bound = if status == SolveStatus::Optimal {
                incumbent_f
            } else {
                open_bound.unwrap_or(f64::NEG_INFINITY).min(incumbent_f)
            };
            let gap = if status == SolveStatus::Optimal {
                Some(0.0)
            } else if bound.is_finite() && incumbent_f.abs() > 1e-9 {
                Some(100.0 * (incumbent_f - bound) / incumbent_f.abs())
            } else {
                None
            };
            MilpSolution {
                status,
                objective: Some(exact),
                values: Some(values),
                best_bound: Some(bound),
                nodes,
                gap_percent: gap,
            }
        }
        None => {
            let status = if proved && !numerical_trouble {
                SolveStatus::Infeasible
            } else {
                SolveStatus::TimedOut
            };
            MilpSolution {
                status,
                objective: None,
                values: None,
                best_bound: open_bound.filter(|b| b.is_finite()),
                nodes,
                gap_percent: None,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{SectionKey, TrainKey};
    use crate::milp::{ConstraintTag, VarDomain, VarName};
    use num_rational::Ratio;

    fn choice(ordinal: usize) -> VarName {
        VarName::PathChoice {
            train: TrainKey {
                scenario: "s0".into(),
                train: "k1".into(),
            },
            ordinal,
        }
    }

    fn track_var(track: u8) -> VarName {
        VarName::Track {
            section: SectionKey::new("A".into(), "B".into()),
            track,
        }
    }

    #[test]
    fn picks_better_binary() {
        // max 3x + 2y with x + y <= 1 == min -3x - 2y
        let mut model = MilpModel::new();
        let x = model.add_variable(choice(0), VarDomain::Binary, Ratio::from_integer(-3));
        let y = model.add_variable(choice(1), VarDomain::Binary, Ratio::from_integer(-2));
        model.add_row(
            ConstraintTag::PathChoice,
            vec![(x, 1), (y, 1)],
            Sense::Le,
            1,
        );
        let sol = solve_branch_and_bound(&model, &SolveLimits::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, Some(Ratio::from_integer(-3)));
        assert_eq!(sol.values.as_ref().unwrap()[x.0], 1);
        assert_eq!(sol.values.as_ref().unwrap()[y.0], 0);
    }

    #[test]
    fn infeasible_binary_system() {
        let mut model = MilpModel::new();
        let x = model.add_variable(choice(0), VarDomain::Binary, Ratio::from_integer(1));
        let y = model.add_variable(choice(1), VarDomain::Binary, Ratio::from_integer(1));
        model.add_row(
            ConstraintTag::Coverage,
            vec![(x, 1), (y, 1)],
            Sense::Ge,
            3,
        );
        let sol = solve_branch_and_bound(&model, &SolveLimits::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.objective.is_none());
    }

    #[test]
    fn fractional_relaxation_forces_branching() {
        // min x with 2x >= 1, x binary: relaxation gives 0.5, answer is 1.
        let mut model = MilpModel::new();
        let x = model.add_variable(choice(0), VarDomain::Binary, Ratio::from_integer(1));
        model.add_row(ConstraintTag::Coverage, vec![(x, 2)], Sense::Ge, 1);
        let sol = solve_branch_and_bound(&model, &SolveLimits::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, Some(Ratio::from_integer(1)));
        assert!(sol.nodes > 1);
    }

    #[test]
    fn constant_and_rational_costs_stay_exact() {
        let mut model = MilpModel::new();
        model.objective_constant = Ratio::new(7, 2);
        let x = model.add_variable(track_var(1), VarDomain::Integer { lb: 0, ub: 9 }, Ratio::new(1, 4));
        model.add_row(ConstraintTag::TrackUse, vec![(x, 1)], Sense::Ge, 3);
        let sol = solve_branch_and_bound(&model, &SolveLimits::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        // 7/2 + 3/4 = 17/4
        assert_eq!(sol.objective, Some(Ratio::new(17, 4)));
    }

    #[test]
    fn zero_node_budget_times_out() {
        let mut model = MilpModel::new();
        let x = model.add_variable(choice(0), VarDomain::Binary, Ratio::from_integer(1));
        model.add_row(ConstraintTag::Coverage, vec![(x, 2)], Sense::Ge, 1);
        let limits = SolveLimits {
            node_limit: Some(0),
            ..SolveLimits::default()
        };
        let sol = solve_branch_and_bound(&model, &limits);
        assert_eq!(sol.status, SolveStatus::TimedOut);
        assert_eq!(sol.nodes, 0);
    }

    #[test]
    fn continuous_tail_follows_integers() {
        // min 5x + d with d >= 10x, x binary forced on by d >= 3 and d <= 10x.
        let mut model = MilpModel::new();
        let x = model.add_variable(choice(0), VarDomain::Binary, Ratio::from_integer(5));
        let d = model.add_variable(
            VarName::Departure {
                train: TrainKey {
                    scenario: "s0".into(),
                    train: "k1".into(),
                },
                from: "A".into(),
                to: "B".into(),
                track: 1,
            },
            VarDomain::Continuous { lb: 0, ub: 100 },
            Ratio::from_integer(1),
        );
        model.add_row(ConstraintTag::ZeroTime, vec![(d, 1), (x, -10)], Sense::Le, 0);
        model.add_row(ConstraintTag::DepartEarliest, vec![(d, 1)], Sense::Ge, 3);
        let sol = solve_branch_and_bound(&model, &SolveLimits::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, Some(Ratio::from_integer(8)));
        let values = sol.values.unwrap();
        assert_eq!(values[x.0], 1);
        assert_eq!(values[d.0], 3);
    }
}
