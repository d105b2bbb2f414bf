//! End-to-end drive: validate, preprocess, build, solve, read the plan back
//! and cross-check it.
//!
//! The pipeline never reports success on its own word alone: any plan the
//! solver produces must pass the independent rule checker, and its cost must
//! reproduce exactly from the plan. A failure of either is an internal
//! error, not a result.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::domain::{BuildConfig, InfrastructureSpec, TimetableFamily};
use crate::milp::{build_deterministic, build_robust, MilpModel};
use crate::plan::{check_plan, extract_plan, recompute_cost, ExtractError, PlanSolution};
use crate::preprocess::{build_relevant_sets, PreprocessError, RelevantSets};
use crate::rat::{format_decimal, Rat};
use crate::solve::{
    exact_objective, import_solution, satisfies_model, solve_branch_and_bound, SolveLimits,
};
use crate::validate::{validate_instance, Diagnostic};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("instance failed validation: {}", summarise(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("preprocessing failed: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("plan reconstruction failed: {0}")]
    Extract(#[from] ExtractError),
    #[error("{0}")]
    Unsupported(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

fn summarise(diags: &[Diagnostic]) -> String {
    let mut out = format!("{} problem(s)", diags.len());
    for d in diags.iter().take(3) {
        out.push_str(&format!("; {d}"));
    }
    if diags.len() > 3 {
        out.push_str("; ...");
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub status: String,
    /// Exact incumbent cost as a decimal string, when one exists.
    pub objective: Option<String>,
    pub best_bound: Option<f64>,
    pub gap_percent: Option<f64>,
    pub nodes: u64,
    pub preprocess_seconds: f64,
    pub solve_seconds: f64,
    pub variables: usize,
    pub constraints: usize,
    pub movements: usize,
    pub candidate_routes: usize,
    pub headway_pairs: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct PipelineResult {
    pub report: RunReport,
    pub plan: Option<PlanSolution>,
}

/// Validation, preprocessing and model construction without solving.
pub fn prepare_model(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
) -> Result<(RelevantSets, MilpModel), PipelineError> {
    let diagnostics = validate_instance(spec, family, config);
    if !diagnostics.is_empty() {
        return Err(PipelineError::Invalid(diagnostics));
    }
    let sets = build_relevant_sets(spec, family, config)?;
    let model = if family.is_deterministic() {
        build_deterministic(spec, family, config, &sets)
    } else {
        build_robust(spec, family, config, &sets)
    };
    Ok((sets, model))
}

pub fn run_pipeline(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    limits: &SolveLimits,
) -> Result<PipelineResult, PipelineError> {
    let prep_started = Instant::now();
    let (sets, model) = prepare_model(spec, family, config)?;
    let preprocess_seconds = prep_started.elapsed().as_secs_f64();
    let started = Instant::now();
    let solution = solve_branch_and_bound(&model, limits);
    let solve_seconds = started.elapsed().as_secs_f64();

    let mut plan = None;
    if let (Some(values), Some(objective)) = (&solution.values, solution.objective) {
        plan = Some(checked_plan(spec, family, config, &sets, &model, values, objective)?);
    }

    let report = RunReport {
        status: solution.status.to_string(),
        objective: solution.objective.map(|o| format_decimal(&o)),
        best_bound: solution.best_bound,
        gap_percent: solution.gap_percent,
        nodes: solution.nodes,
        preprocess_seconds,
        solve_seconds,
        variables: model.variables.len(),
        constraints: model.constraints.len(),
        movements: sets.movements.len(),
        candidate_routes: sets.paths.values().map(|p| p.paths.len()).sum(),
        headway_pairs: sets.pairs.len(),
        warnings: sets.warnings.clone(),
    };
    Ok(PipelineResult { report, plan })
}

/// Adopts an externally produced variable assignment: verifies it against the
/// model row by row, then runs it through the same plan extraction and rule
/// checks as an internal solve. The status is "feasible", never "optimal",
/// because nothing proves optimality of an imported point.
pub fn adopt_solution(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    solution_text: &str,
) -> Result<PipelineResult, PipelineError> {
    let prep_started = Instant::now();
    let (sets, model) = prepare_model(spec, family, config)?;
    let preprocess_seconds = prep_started.elapsed().as_secs_f64();
    let imported = import_solution(&model, solution_text)
        .map_err(|e| PipelineError::Unsupported(format!("solution file rejected: {e}")))?;
    if !satisfies_model(&model, &imported.values) {
        return Err(PipelineError::Unsupported(
            "imported solution violates the model".into(),
        ));
    }
    let objective = exact_objective(&model, &imported.values);
    let plan = checked_plan(spec, family, config, &sets, &model, &imported.values, objective)?;
    let mut warnings = sets.warnings.clone();
    warnings.extend(imported.warnings);
    let report = RunReport {
        status: "feasible".into(),
        objective: Some(format_decimal(&objective)),
        best_bound: None,
        gap_percent: None,
        nodes: 0,
        preprocess_seconds,
        solve_seconds: 0.0,
        variables: model.variables.len(),
        constraints: model.constraints.len(),
        movements: sets.movements.len(),
        candidate_routes: sets.paths.values().map(|p| p.paths.len()).sum(),
        headway_pairs: sets.pairs.len(),
        warnings,
    };
    Ok(PipelineResult { report, plan: Some(plan) })
}

/// Plan extraction plus the two consistency gates every solution must clear:
/// the independent rule checker and exact cost recomputation.
fn checked_plan(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    sets: &RelevantSets,
    model: &MilpModel,
    values: &[i64],
    objective: Rat,
) -> Result<PlanSolution, PipelineError> {
    let extracted = extract_plan(family, sets, model, values, objective)?;
    let violations = check_plan(spec, family, config, &extracted);
    if !violations.is_empty() {
        let listed: Vec<String> = violations
            .iter()
            .take(5)
            .map(|v| format!("{}: {}", v.rule, v.message))
            .collect();
        return Err(PipelineError::Internal(format!(
            "solution breaks {} rule(s): {}",
            violations.len(),
            listed.join("; ")
        )));
    }
    let recomputed = recompute_cost(spec, family, &extracted).map_err(PipelineError::Internal)?;
    if recomputed != objective {
        return Err(PipelineError::Internal(format!(
            "plan cost {} does not reproduce objective {}",
            format_decimal(&recomputed),
            format_decimal(&objective)
        )));
    }
    Ok(extracted)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub requested_percent: u32,
    /// Share of scenarios actually operated; coverage may be over-fulfilled
    /// when running a scenario is cheaper than paying its penalty.
    pub achieved_percent: Option<f64>,
    pub status: String,
    pub cost: Option<String>,
    pub active_scenarios: Option<usize>,
    pub total_scenarios: usize,
    pub tracks_built: Option<usize>,
    pub links_built: Option<usize>,
    pub runtime_seconds: f64,
    pub gap_percent: Option<f64>,
}

/// Re-solves the family once per requested coverage share.
pub fn sweep_coverage(
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    config: &BuildConfig,
    limits: &SolveLimits,
    shares_percent: &[u32],
) -> Result<Vec<SweepRow>, PipelineError> {
    if family.scenarios.len() < 2 {
        return Err(PipelineError::Unsupported(
            "coverage sweeps need a robust family with at least two scenarios".into(),
        ));
    }
    let total = family.scenarios.len();
    let mut rows = Vec::new();
    for &pct in shares_percent {
        if pct == 0 || pct > 100 {
            return Err(PipelineError::Unsupported(format!(
                "coverage share {pct}% outside 1..=100"
            )));
        }
        let mut variant = family.clone();
        variant.coverage_share = crate::rat::Rat::new(pct as i64, 100);
        let result = run_pipeline(spec, &variant, config, limits)?;
        let active = result
            .plan
            .as_ref()
            .map(|p| p.scenarios.iter().filter(|s| s.active).count());
        rows.push(SweepRow {
            requested_percent: pct,
            achieved_percent: active.map(|a| 100.0 * a as f64 / total as f64),
            status: result.report.status.clone(),
            cost: result.report.objective.clone(),
            active_scenarios: active,
            total_scenarios: total,
            tracks_built: result.plan.as_ref().map(|p| p.tracks.len()),
            links_built: result.plan.as_ref().map(|p| p.links.len()),
            runtime_seconds: result.report.solve_seconds,
            gap_percent: result.report.gap_percent,
        });
    }
    Ok(rows)
}
