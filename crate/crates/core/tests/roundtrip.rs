//! Disk-to-plan integration: an instance survives the file format, solves,
//! and the resulting artifacts survive their own round trips.

use std::path::PathBuf;

use railnet_core::domain::BuildConfig;
use railnet_core::generate::{generate_instance, GenerateParams};
use railnet_core::pipeline::{prepare_model, run_pipeline};
use railnet_core::plan::PlanSolution;
use railnet_core::schema::{load_instance, save_instance};
use railnet_core::solve::{emit_model_text, parse_model_text, SolveLimits};

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn instance_file_to_checked_plan() {
    let doc = generate_instance(&GenerateParams {
        seed: 11,
        nodes: 4,
        sections: 4,
        trains: 2,
        scenarios: 2,
        train_types: 2,
        optional_percent: 30,
        coverage_percent: 50,
        horizon: 100,
    })
    .unwrap();

    let path = tmp("roundtrip-instance.json");
    save_instance(&path, &doc).unwrap();
    let loaded = load_instance(&path).unwrap();
    assert_eq!(loaded, doc);

    let (spec, family, horizon) = loaded.into_domain().unwrap();
    let config = BuildConfig::preset_b(horizon);
    let result = run_pipeline(&spec, &family, &config, &SolveLimits::default()).unwrap();
    assert_eq!(result.report.status, "optimal");

    let plan = result.plan.unwrap();
    let json = serde_json::to_string_pretty(&plan).unwrap();
    let back: PlanSolution = serde_json::from_str(&json).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&plan).unwrap());

    let (_, model) = prepare_model(&spec, &family, &config).unwrap();
    let text = emit_model_text(&model);
    parse_model_text(&text).unwrap();
}
