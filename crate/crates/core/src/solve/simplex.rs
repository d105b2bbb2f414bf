//! Bounded-variable primal simplex over a dense tableau.
//!
//! Two phases: artificials are introduced only for rows whose slack start
//! would be infeasible (and for all equalities), minimised out, then purged.
//! Rows left with a basic artificial after phase one are redundant and are
//! dropped. Nonbasic variables may sit at either bound; the ratio test
//! allows bound flips without a basis change. Pricing is Dantzig with a
//! lowest-index tie break, switching to Bland's rule after a degenerate
//! stall to break cycles.

use crate::milp::Sense;

/// Relaxation input. All variables carry explicit bounds; `upper` may be
/// infinite. Row senses are kept as in the model; `Ge` rows are negated
/// internally.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimplexOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
    Stalled,
}

const RC_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-8;
const FEAS_TOL: f64 = 1e-7;
const RATIO_TIE: f64 = 1e-9;
const STALL_LIMIT: u32 = 60;

enum PhaseEnd {
    Converged,
    Unbounded,
    Stalled,
}

enum Ratio {
    Flip,
    Pivot { row: usize, delta: f64 },
    Unbounded,
}

struct Tableau {
    structurals: usize,
    artificial_start: usize,
    cols: usize,
    /// Row-major, width `cols + 1`; the trailing entry is the transformed rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    /// Phase-one reduced costs (artificial sum).
    art_cost: Vec<f64>,
    /// Reduced costs of the real objective, maintained through both phases.
    real_cost: Vec<f64>,
    bland: bool,
    degenerate_run: u32,
    iterations: u64,
}

pub fn solve_lp(lp: &LinearProgram) -> SimplexOutcome {
    solve_lp_bounded(lp, &lp.lower, &lp.upper)
}

/// Solves `lp` with the variable bounds replaced; branch and bound uses this
/// to share one row set across all nodes.
pub fn solve_lp_bounded(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> SimplexOutcome {
    debug_assert_eq!(lp.objective.len(), lp.num_vars);
    debug_assert_eq!(lower.len(), lp.num_vars);
    debug_assert_eq!(upper.len(), lp.num_vars);
    for j in 0..lp.num_vars {
        if lower[j] > upper[j] + 1e-12 {
            return SimplexOutcome::Infeasible;
        }
    }

    let mut t = Tableau::build(lp, lower, upper);
    let cap = 2_000 + 200 * (t.rows.len() as u64 + t.cols as u64);

    if t.artificial_start < t.cols {
        match t.run_phase(true, cap) {
            PhaseEnd::Stalled => return SimplexOutcome::Stalled,
            PhaseEnd::Unbounded => return SimplexOutcome::Unbounded,
            PhaseEnd::Converged => {}
        }
        let xb = t.basic_values();
        let infeasibility: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b >= t.artificial_start)
            .map(|(i, _)| xb[i].max(0.0))
            .sum();
        if infeasibility > FEAS_TOL {
            return SimplexOutcome::Infeasible;
        }
        t.purge_artificials();
    }

    match t.run_phase(false, cap) {
        PhaseEnd::Stalled => return SimplexOutcome::Stalled,
        PhaseEnd::Unbounded => return SimplexOutcome::Unbounded,
        PhaseEnd::Converged => {}
    }

    let xb = t.basic_values();
    let values = t.solution_values(&xb);
    let objective = lp
        .objective
        .iter()
        .zip(&values)
        .map(|(c, x)| c * x)
        .sum();
    SimplexOutcome::Optimal { objective, values }
}

impl Tableau {
    fn build(lp: &LinearProgram, lp_lower: &[f64], lp_upper: &[f64]) -> Tableau {
        let n = lp.num_vars;
        let m = lp.rows.len();

        // Canonical form: Ge rows are negated into Le, every inequality gets
        // a slack, infeasible starts and equalities get an artificial.
        struct Prepared {
            coeffs: Vec<(usize, f64)>,
            rhs: f64,
            slack: bool,
            artificial: bool,
        }
        let mut prepared = Vec::with_capacity(m);
        let mut num_slacks = 0usize;
        let mut num_arts = 0usize;
        for row in &lp.rows {
            let flip = matches!(row.sense, Sense::Ge);
            let mut coeffs: Vec<(usize, f64)> = row
                .terms
                .iter()
                .map(|&(j, c)| (j, if flip { -c } else { c }))
                .collect();
            let mut rhs = if flip { -row.rhs } else { row.rhs };
            let activity: f64 = coeffs.iter().map(|&(j, c)| c * lp_lower[j]).sum();
            let residual = rhs - activity;
            let slack = !matches!(row.sense, Sense::Eq);
            let artificial = if slack { residual < 0.0 } else { true };
            if artificial && residual < 0.0 {
                for t in coeffs.iter_mut() {
                    t.1 = -t.1;
                }
                rhs = -rhs;
            }
            if slack {
                num_slacks += 1;
            }
            if artificial {
                num_arts += 1;
            }
            prepared.push(Prepared { coeffs, rhs, slack, artificial });
        }

        let artificial_start = n + num_slacks;
        let cols = artificial_start + num_arts;
        let width = cols + 1;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack_at = n;
        let mut art_at = artificial_start;
        for p in &prepared {
            let mut row = vec![0.0; width];
            for &(j, c) in &p.coeffs {
                row[j] += c;
            }
            row[cols] = p.rhs;
            if p.slack {
                // A negated infeasible-start row carries its slack with -1.
                row[slack_at] = if p.artificial { -1.0 } else { 1.0 };
                slack_at += 1;
            }
            if p.artificial {
                row[art_at] = 1.0;
                basis.push(art_at);
                art_at += 1;
            } else {
                basis.push(slack_at - 1);
            }
            rows.push(row);
        }

        let mut lower = lp_lower.to_vec();
        let mut upper = lp_upper.to_vec();
        lower.resize(cols, 0.0);
        upper.resize(cols, f64::INFINITY);

        let mut in_basis = vec![false; cols];
        for &b in &basis {
            in_basis[b] = true;
        }

        let mut art_cost = vec![0.0; cols];
        for j in artificial_start..cols {
            art_cost[j] = 1.0;
        }
        for (i, &b) in basis.iter().enumerate() {
            if b >= artificial_start {
                for j in 0..cols {
                    art_cost[j] -= rows[i][j];
                }
            }
        }

        let mut real_cost = vec![0.0; cols];
        real_cost[..n].copy_from_slice(&lp.objective);

        Tableau {
            structurals: n,
            artificial_start,
            cols,
            rows,
            basis,
            in_basis,
            lower,
            upper,
            at_upper: vec![false; cols],
            art_cost,
            real_cost,
            bland: false,
            degenerate_run: 0,
            iterations: 0,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            self.lower[j]
        }
    }

    fn basic_values(&self) -> Vec<f64> {
        let m = self.rows.len();
        let mut xb: Vec<f64> = (0..m).map(|i| self.rows[i][self.cols]).collect();
        for j in 0..self.cols {
            if self.in_basis[j] {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for (i, x) in xb.iter_mut().enumerate() {
                    *x -= self.rows[i][j] * v;
                }
            }
        }
        xb
    }

    fn choose_entering(&self, phase_one: bool) -> Option<(usize, f64)> {
        let rc = if phase_one { &self.art_cost } else { &self.real_cost };
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.artificial_start {
            if self.in_basis[j] || self.upper[j] - self.lower[j] <= 1e-12 {
                continue;
            }
            let r = rc[j];
            let (dir, score) = if !self.at_upper[j] && r < -RC_TOL {
                (1.0, -r)
            } else if self.at_upper[j] && r > RC_TOL {
                (-1.0, r)
            } else {
                continue;
            };
            if self.bland {
                return Some((j, dir));
            }
            match best {
                Some((_, _, s)) if s >= score => {}
                _ => best = Some((j, dir, score)),
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ratio_test(&self, col: usize, dir: f64, xb: &[f64]) -> Ratio {
        let flip = self.upper[col] - self.lower[col];
        let mut best_delta = f64::INFINITY;
        let mut best_row: Option<usize> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let eff = dir * row[col];
            if eff.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.basis[i];
            let lim = if eff > 0.0 {
                (xb[i] - self.lower[b]).max(0.0) / eff
            } else {
                if self.upper[b].is_infinite() {
                    continue;
                }
                (self.upper[b] - xb[i]).max(0.0) / -eff
            };
            let better = match best_row {
                None => lim < best_delta,
                Some(r) => {
                    if lim < best_delta - RATIO_TIE {
                        true
                    } else if lim > best_delta + RATIO_TIE {
                        false
                    } else if self.bland {
                        self.basis[i] < self.basis[r]
                    } else {
                        row[col].abs() > self.rows[r][col].abs()
                    }
                }
            };
            if better {
                best_delta = best_delta.min(lim);
                best_row = Some(i);
            }
        }
        match best_row {
            None if flip.is_infinite() => Ratio::Unbounded,
            None => Ratio::Flip,
            Some(_) if flip <= best_delta + RATIO_TIE => Ratio::Flip,
            Some(r) => Ratio::Pivot { row: r, delta: best_delta },
        }
    }

    fn pivot(&mut self, prow: usize, pcol: usize, dir: f64) {
        let y = self.rows[prow][pcol];
        let leaving = self.basis[prow];
        self.at_upper[leaving] = dir * y < 0.0;
        self.in_basis[leaving] = false;
        self.in_basis[pcol] = true;
        self.basis[prow] = pcol;

        let width = self.cols + 1;
        let inv = 1.0 / y;
        for v in self.rows[prow].iter_mut() {
            *v *= inv;
        }
        let pivot_row = std::mem::take(&mut self.rows[prow]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == prow {
                continue;
            }
            let f = row[pcol];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
                row[pcol] = 0.0;
            }
        }
        let f = self.art_cost[pcol];
        if f != 0.0 {
            for k in 0..self.cols {
                self.art_cost[k] -= f * pivot_row[k];
            }
            self.art_cost[pcol] = 0.0;
        }
        let f = self.real_cost[pcol];
        if f != 0.0 {
            for k in 0..self.cols {
                self.real_cost[k] -= f * pivot_row[k];
            }
            self.real_cost[pcol] = 0.0;
        }
        self.rows[prow] = pivot_row;
    }

    fn run_phase(&mut self, phase_one: bool, max_iterations: u64) -> PhaseEnd {
        loop {
            if self.iterations >= max_iterations {
                return PhaseEnd::Stalled;
            }
            self.iterations += 1;
            let Some((col, dir)) = self.choose_entering(phase_one) else {
                return PhaseEnd::Converged;
            };
            let xb = self.basic_values();
            match self.ratio_test(col, dir, &xb) {
                Ratio::Unbounded => return PhaseEnd::Unbounded,
                Ratio::Flip => {
                    self.at_upper[col] = !self.at_upper[col];
                    self.degenerate_run = 0;
                    self.bland = false;
                }
                Ratio::Pivot { row, delta } => {
                    if delta <= 1e-11 {
                        self.degenerate_run += 1;
                        if self.degenerate_run > STALL_LIMIT {
                            self.bland = true;
                        }
                    } else {
                        self.degenerate_run = 0;
                        self.bland = false;
                    }
                    self.pivot(row, col, dir);
                }
            }
        }
    }

    /// Swaps leftover basic artificials for real columns where possible and
    /// drops rows that admit no swap; those rows are linear combinations of
    /// the others.
    fn purge_artificials(&mut self) {
        let mut dropped: Vec<usize> = Vec::new();
        for i in 0..self.rows.len() {
            if self.basis[i] < self.artificial_start {
                continue;
            }
            let mut swap = None;
            for j in 0..self.artificial_start {
                if !self.in_basis[j] && self.rows[i][j].abs() > 1e-7 {
                    swap = Some(j);
                    break;
                }
            }
            match swap {
                Some(j) => {
                    let dir = if self.rows[i][j] > 0.0 { 1.0 } else { -1.0 };
                    self.pivot(i, j, dir);
                }
                None => dropped.push(i),
            }
        }
        for &i in dropped.iter().rev() {
            let b = self.basis[i];
            self.in_basis[b] = false;
            self.rows.remove(i);
            self.basis.remove(i);
        }
    }

    fn solution_values(&self, xb: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.structurals];
        for (j, v) in x.iter_mut().enumerate() {
            if !self.in_basis[j] {
                *v = self.nonbasic_value(j);
            }
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structurals {
                x[b] = xb[i];
            }
        }
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[j], self.upper[j]);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(
        objective: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
    ) -> LinearProgram {
        LinearProgram {
            num_vars: objective.len(),
            objective,
            lower,
            upper,
            rows: rows
                .into_iter()
                .map(|(terms, sense, rhs)| LpRow { terms, sense, rhs })
                .collect(),
        }
    }

    fn optimal(outcome: SimplexOutcome) -> (f64, Vec<f64>) {
        match outcome {
            SimplexOutcome::Optimal { objective, values } => (objective, values),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn knapsack_corner() {
        let p = lp(
            vec![-1.0, -1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
        );
        let (obj, values) = optimal(solve_lp(&p));
        assert!((obj + 1.0).abs() < 1e-9);
        assert!((values[0] + values[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bound_flip_reaches_upper() {
        let p = lp(
            vec![-1.0],
            vec![0.0],
            vec![3.0],
            vec![(vec![(0, 1.0)], Sense::Le, 10.0)],
        );
        let (obj, values) = optimal(solve_lp(&p));
        assert!((obj + 3.0).abs() < 1e-9);
        assert!((values[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn conflicting_rows_infeasible() {
        let p = lp(
            vec![1.0],
            vec![0.0],
            vec![5.0],
            vec![
                (vec![(0, 1.0)], Sense::Ge, 2.0),
                (vec![(0, 1.0)], Sense::Le, 1.0),
            ],
        );
        assert_eq!(solve_lp(&p), SimplexOutcome::Infeasible);
    }

    #[test]
    fn equality_splits_between_bounds() {
        let p = lp(
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![5.0, 3.0],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 5.0)],
        );
        let (obj, values) = optimal(solve_lp(&p));
        assert!((obj - 2.0).abs() < 1e-9);
        assert!((values[0] - 2.0).abs() < 1e-9);
        assert!((values[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_equalities_drop_redundant_row() {
        let p = lp(
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![4.0, 4.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Eq, 4.0),
                (vec![(0, 2.0), (1, 2.0)], Sense::Eq, 8.0),
            ],
        );
        let (obj, _) = optimal(solve_lp(&p));
        assert!((obj - 4.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_needs_artificial() {
        let p = lp(
            vec![1.0],
            vec![0.0],
            vec![5.0],
            vec![(vec![(0, -1.0)], Sense::Le, -2.0)],
        );
        let (obj, values) = optimal(solve_lp(&p));
        assert!((obj - 2.0).abs() < 1e-9);
        assert!((values[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_variable_respected() {
        let p = lp(
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 10.0],
            vec![(vec![(0, -3.0), (1, 1.0)], Sense::Ge, 0.0)],
        );
        let (obj, values) = optimal(solve_lp(&p));
        assert!((obj - 3.0).abs() < 1e-9);
        assert!((values[0] - 1.0).abs() < 1e-9);
        assert!((values[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_senses_small_system() {
        // min x + 2y  st  x + y >= 4, x - y <= 1, y <= 3
        let p = lp(
            vec![1.0, 2.0],
            vec![0.0, 0.0],
            vec![10.0, 3.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Ge, 4.0),
                (vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0),
            ],
        );
        let (obj, values) = optimal(solve_lp(&p));
        // best is y = 1.5, x = 2.5
        assert!((obj - 5.5).abs() < 1e-9);
        assert!((values[0] - 2.5).abs() < 1e-9);
        assert!((values[1] - 1.5).abs() < 1e-9);
    }
}
