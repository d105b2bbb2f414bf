//! Exact solving: LP relaxations, branch and bound, and the LP text format.

pub mod branch_bound;
pub mod lp_text;
pub mod simplex;

pub use branch_bound::{
    exact_objective, satisfies_model, solve_branch_and_bound, MilpSolution, SolveLimits,
    SolveStatus,
};
pub use lp_text::{emit_model_text, import_solution, parse_model_text, render_solution};
pub use simplex::{solve_lp, solve_lp_bounded, LinearProgram, LpRow, SimplexOutcome};
