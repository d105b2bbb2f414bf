//! Command line front end: solve, validate, sweep, generate, emit-model.
//!
//! Exit codes: 0 success, 2 infeasible instance or failed validation,
//! 3 runtime trouble (I/O, internal inconsistency, timeout with no solution),
//! 64 usage errors.

mod artifacts;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use railnet_core::domain::{BuildConfig, InfrastructureSpec, TimetableFamily};
use railnet_core::generate::{generate_instance, GenerateParams};
use railnet_core::pipeline::{
    adopt_solution, prepare_model, run_pipeline, sweep_coverage, PipelineError, PipelineResult,
};
use railnet_core::plan::{check_plan, recompute_cost, PlanSolution};
use railnet_core::rat::{format_decimal, parse_decimal, Rat};
use railnet_core::schema::{load_instance, SchemaError};
use railnet_core::solve::{emit_model_text, SolveLimits};

const EXIT_OK: i32 = 0;
const EXIT_NO_PLAN: i32 = 2;
const EXIT_RUNTIME: i32 = 3;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "railnet",
    version,
    about = "Cheapest railway network that carries a strategic timetable"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write plan, tables, diagram data and a report.
    Solve(SolveArgs),
    /// Check a plan file against an instance and report every rule violation.
    Validate(ValidateArgs),
    /// Re-solve a robust instance over a range of coverage shares.
    Sweep(SweepArgs),
    /// Write a synthetic instance file.
    Gen(GenArgs),
    /// Write the instance's optimization model as LP text without solving.
    EmitModel(EmitModelArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum Preset {
    /// Up to four tracks per section, reductions allowed.
    #[value(name = "A", alias = "a")]
    A,
    /// Up to two tracks per section, reductions allowed.
    #[value(name = "B", alias = "b")]
    B,
    /// Up to two tracks per section, no reductions.
    #[value(name = "C", alias = "c")]
    C,
}

#[derive(Copy, Clone, ValueEnum)]
enum SolverChoice {
    /// Solve in-process with the built-in branch and bound.
    Internal,
    /// Write model.lp for an external solver and stop.
    Emit,
}

#[derive(Args)]
struct ConfigOpts {
    /// Capacity preset.
    #[arg(long, value_enum, default_value_t = Preset::B)]
    config: Preset,
    /// Cap parallel tracks everywhere at this count (1-4).
    #[arg(long, value_name = "N")]
    max_tracks: Option<u8>,
    /// Forbid buying travel-time and headway reductions.
    #[arg(long)]
    no_reductions: bool,
    /// Apply headway rules between trains of different scenarios too.
    #[arg(long)]
    cross_scenario_headways: bool,
}

impl ConfigOpts {
    fn build(&self, horizon: i64) -> BuildConfig {
        let mut config = match self.config {
            Preset::A => BuildConfig::preset_a(horizon),
            Preset::B => BuildConfig::preset_b(horizon),
            Preset::C => BuildConfig::preset_c(horizon),
        };
        if let Some(n) = self.max_tracks {
            config.max_tracks_global = n;
        }
        if self.no_reductions {
            config.reductions_allowed = false;
        }
        if self.cross_scenario_headways {
            config.cross_scenario_headways = true;
        }
        config
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON).
    instance: PathBuf,
    #[command(flatten)]
    config: ConfigOpts,
    /// Stop the search after this many seconds.
    #[arg(long, value_name = "S")]
    time_limit: Option<u64>,
    #[arg(long, value_enum, default_value_t = SolverChoice::Internal)]
    solver: SolverChoice,
    /// Adopt a `variable value` solution file instead of solving.
    #[arg(long, value_name = "FILE", conflicts_with = "solver")]
    import: Option<PathBuf>,
    /// Override the instance's coverage share, in percent.
    #[arg(long, value_name = "PCT")]
    coverage: Option<u32>,
    /// Directory for result files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Plan file as written by `solve`.
    plan: PathBuf,
    /// Instance the plan claims to satisfy.
    instance: PathBuf,
    #[command(flatten)]
    config: ConfigOpts,
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Instance file; must have at least two scenarios.
    instance: PathBuf,
    #[command(flatten)]
    config: ConfigOpts,
    /// Shares to test: "60", "10..100", or "10..100:5" (inclusive, percent).
    #[arg(long, value_name = "PCT|LO..HI[:STEP]", default_value = "10..100:10")]
    coverage: String,
    /// Per-share time limit in seconds.
    #[arg(long, value_name = "S")]
    time_limit: Option<u64>,
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    nodes: usize,
    #[arg(long, default_value_t = 6)]
    sections: usize,
    /// Trains per scenario.
    #[arg(long, default_value_t = 3)]
    trains: usize,
    #[arg(long, default_value_t = 1)]
    scenarios: usize,
    /// 1 = local only, 2 = local and express.
    #[arg(long, default_value_t = 1)]
    train_types: usize,
    /// Chance that a train after the first is optional, in percent.
    #[arg(long, default_value_t = 0)]
    optional_percent: u32,
    /// Coverage share of the generated family, in percent.
    #[arg(long, default_value_t = 100)]
    coverage: u32,
    /// Planning horizon in minutes.
    #[arg(long, default_value_t = 120)]
    horizon: i64,
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EmitModelArgs {
    instance: PathBuf,
    #[command(flatten)]
    config: ConfigOpts,
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gen(args) => cmd_gen(args),
        Command::EmitModel(args) => cmd_emit_model(args),
    };
    std::process::exit(code);
}

fn fail(code: i32, message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    code
}

fn load(path: &Path) -> Result<(InfrastructureSpec, TimetableFamily, i64), i32> {
    let doc = load_instance(path).map_err(|e| {
        let code = match e {
            SchemaError::Io { .. } => EXIT_RUNTIME,
            _ => EXIT_NO_PLAN,
        };
        fail(code, e)
    })?;
    doc.into_domain().map_err(|e| fail(EXIT_NO_PLAN, e))
}

fn pipeline_exit(err: &PipelineError) -> i32 {
    match err {
        PipelineError::Invalid(_)
        | PipelineError::Preprocess(_)
        | PipelineError::Unsupported(_) => EXIT_NO_PLAN,
        PipelineError::Extract(_) | PipelineError::Internal(_) => EXIT_RUNTIME,
    }
}

fn status_exit(status: &str) -> i32 {
    match status {
        "optimal" | "feasible" => EXIT_OK,
        "infeasible" => EXIT_NO_PLAN,
        _ => EXIT_RUNTIME,
    }
}

fn ensure_dir(path: &Path) -> Result<(), i32> {
    fs::create_dir_all(path)
        .map_err(|e| fail(EXIT_RUNTIME, format!("cannot create {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), i32> {
    artifacts::write_text(path, content)
        .map_err(|e| fail(EXIT_RUNTIME, format!("cannot write {}: {e}", path.display())))
}

fn cmd_solve(args: SolveArgs) -> i32 {
    let (spec, mut family, horizon) = match load(&args.instance) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if let Some(pct) = args.coverage {
        if pct == 0 || pct > 100 {
            return fail(EXIT_USAGE, "--coverage must be between 1 and 100");
        }
        family.coverage_share = Rat::new(pct as i64, 100);
    }
    let config = args.config.build(horizon);
    if let Err(code) = ensure_dir(&args.out) {
        return code;
    }

    if matches!(args.solver, SolverChoice::Emit) {
        let model = match prepare_model(&spec, &family, &config) {
            Ok((_, model)) => model,
            Err(e) => return fail(pipeline_exit(&e), e),
        };
        let path = args.out.join("model.lp");
        if let Err(code) = write_file(&path, &emit_model_text(&model)) {
            return code;
        }
        println!("wrote {}", path.display());
        return EXIT_OK;
    }

    let outcome = if let Some(import) = &args.import {
        match fs::read_to_string(import) {
            Ok(text) => adopt_solution(&spec, &family, &config, &text),
            Err(e) => return fail(EXIT_RUNTIME, format!("cannot read {}: {e}", import.display())),
        }
    } else {
        let limits = SolveLimits {
            time_limit: args.time_limit.map(Duration::from_secs),
            ..SolveLimits::default()
        };
        run_pipeline(&spec, &family, &config, &limits)
    };
    let result = match outcome {
        Ok(result) => result,
        Err(e) => return fail(pipeline_exit(&e), e),
    };

    if let Err(code) = write_solve_artifacts(&args.out, &spec, &family, &result) {
        return code;
    }
    match &result.report.objective {
        Some(cost) => println!("{}: cost {cost}", result.report.status),
        None => println!("{}", result.report.status),
    }
    println!("results in {}", args.out.display());
    status_exit(&result.report.status)
}

fn write_solve_artifacts(
    out: &Path,
    spec: &InfrastructureSpec,
    family: &TimetableFamily,
    result: &PipelineResult,
) -> Result<(), i32> {
    artifacts::write_json(&out.join("report.json"), &result.report)
        .map_err(|e| fail(EXIT_RUNTIME, format!("cannot write report.json: {e}")))?;
    if let Some(plan) = &result.plan {
        artifacts::write_json(&out.join("plan.json"), plan)
            .map_err(|e| fail(EXIT_RUNTIME, format!("cannot write plan.json: {e}")))?;
        write_file(&out.join("network.csv"), &artifacts::network_csv(spec, plan))?;
        write_file(&out.join("routing.csv"), &artifacts::routing_csv(plan))?;
        write_file(&out.join("timetable.csv"), &artifacts::timetable_csv(plan))?;
        write_file(&out.join("diagram.csv"), &artifacts::diagram_csv(spec, family, plan))?;
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> i32 {
    let (spec, family, horizon) = match load(&args.instance) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let config = args.config.build(horizon);
    let plan: PlanSolution = match fs::read_to_string(&args.plan) {
        Ok(text) => match serde_json::from_str(&text) {
            Ok(plan) => plan,
            Err(e) => return fail(EXIT_NO_PLAN, format!("plan file rejected: {e}")),
        },
        Err(e) => return fail(EXIT_RUNTIME, format!("cannot read {}: {e}", args.plan.display())),
    };
    if let Err(code) = ensure_dir(&args.out) {
        return code;
    }

    let violations = check_plan(&spec, &family, &config, &plan);
    let claimed = parse_decimal(&plan.objective).ok();
    let recomputed = recompute_cost(&spec, &family, &plan);
    let cost_matches = match (&claimed, &recomputed) {
        (Some(c), Ok(r)) => c == r,
        _ => false,
    };

    let report = serde_json::json!({
        "violation_count": violations.len(),
        "violations": violations
            .iter()
            .map(|v| serde_json::json!({"rule": v.rule, "message": v.message}))
            .collect::<Vec<_>>(),
        "claimed_cost": plan.objective,
        "recomputed_cost": recomputed.as_ref().ok().map(format_decimal),
        "cost_matches": cost_matches,
    });
    if artifacts::write_json(&args.out.join("report.json"), &report).is_err() {
        return fail(EXIT_RUNTIME, "cannot write report.json");
    }

    for v in &violations {
        println!("{}: {}", v.rule, v.message);
    }
    if let Err(e) = &recomputed {
        println!("cost recomputation failed: {e}");
    }
    if violations.is_empty() && cost_matches {
        println!("plan is consistent, cost {}", plan.objective);
        EXIT_OK
    } else {
        println!(
            "plan rejected: {} violation(s), cost {}",
            violations.len(),
            if cost_matches { "consistent" } else { "inconsistent" }
        );
        EXIT_NO_PLAN
    }
}

fn parse_shares(text: &str) -> Result<Vec<u32>, String> {
    let (range, step) = match text.split_once(':') {
        Some((r, s)) => {
            let step: u32 = s.parse().map_err(|_| format!("bad step `{s}`"))?;
            if step == 0 {
                return Err("step must be positive".into());
            }
            (r, step)
        }
        None => (text, 10),
    };
    let (lo, hi) = match range.split_once("..") {
        Some((a, b)) => (
            a.parse::<u32>().map_err(|_| format!("bad share `{a}`"))?,
            b.parse::<u32>().map_err(|_| format!("bad share `{b}`"))?,
        ),
        None => {
            let v = range.parse::<u32>().map_err(|_| format!("bad share `{range}`"))?;
            (v, v)
        }
    };
    if lo == 0 || hi > 100 || lo > hi {
        return Err(format!("shares must satisfy 1 <= lo <= hi <= 100, got {lo}..{hi}"));
    }
    Ok((lo..=hi).step_by(step as usize).collect())
}

fn cmd_sweep(args: SweepArgs) -> i32 {
    let shares = match parse_shares(&args.coverage) {
        Ok(shares) => shares,
        Err(e) => return fail(EXIT_USAGE, format!("--coverage: {e}")),
    };
    let (spec, family, horizon) = match load(&args.instance) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let config = args.config.build(horizon);
    if let Err(code) = ensure_dir(&args.out) {
        return code;
    }
    let limits = SolveLimits {
        time_limit: args.time_limit.map(Duration::from_secs),
        ..SolveLimits::default()
    };
    let rows = match sweep_coverage(&spec, &family, &config, &limits, &shares) {
        Ok(rows) => rows,
        Err(e) => return fail(pipeline_exit(&e), e),
    };
    if let Err(code) = write_file(&args.out.join("sweep.csv"), &artifacts::sweep_csv(&rows)) {
        return code;
    }
    let mut worst = EXIT_OK;
    for row in &rows {
        println!(
            "share {:>3}%: {} cost {} achieved {}",
            row.requested_percent,
            row.status,
            row.cost.as_deref().unwrap_or("-"),
            row.achieved_percent.map(|p| format!("{p:.0}%")).unwrap_or_else(|| "-".into()),
        );
        worst = worst.max(status_exit(&row.status));
    }
    worst
}

fn cmd_gen(args: GenArgs) -> i32 {
    let params = GenerateParams {
        seed: args.seed,
        nodes: args.nodes,
        sections: args.sections,
        trains: args.trains,
        scenarios: args.scenarios,
        train_types: args.train_types,
        optional_percent: args.optional_percent,
        coverage_percent: args.coverage,
        horizon: args.horizon,
    };
    let doc = match generate_instance(&params) {
        Ok(doc) => doc,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if let Err(code) = ensure_dir(&args.out) {
        return code;
    }
    let path = args.out.join("instance.json");
    if let Err(code) = write_file(&path, &doc.to_json()) {
        return code;
    }
    println!("wrote {}", path.display());
    EXIT_OK
}

fn cmd_emit_model(args: EmitModelArgs) -> i32 {
    let (spec, family, horizon) = match load(&args.instance) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let config = args.config.build(horizon);
    let model = match prepare_model(&spec, &family, &config) {
        Ok((_, model)) => model,
        Err(e) => return fail(pipeline_exit(&e), e),
    };
    if let Err(code) = ensure_dir(&args.out) {
        return code;
    }
    let path = args.out.join("model.lp");
    if let Err(code) = write_file(&path, &emit_model_text(&model)) {
        return code;
    }
    println!("wrote {}", path.display());
    EXIT_OK
}
