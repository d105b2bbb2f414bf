//! Shared fixtures for the criterion benches.

use railnet_core::domain::{BuildConfig, InfrastructureSpec, TimetableFamily};
use railnet_core::generate::{generate_instance, GenerateParams};

/// A reproducible instance plus the preset-B build settings for it.
pub fn fixture(
    seed: u64,
    nodes: usize,
    trains: usize,
    scenarios: usize,
) -> (InfrastructureSpec, TimetableFamily, BuildConfig) {
    let doc = generate_instance(&GenerateParams {
        seed,
        nodes,
        sections: nodes, // one spare beyond a spanning line
        trains,
        scenarios,
        train_types: 2,
        optional_percent: 20,
        coverage_percent: 100,
        horizon: 120,
    })
    .expect("fixture parameters are consistent");
    let (spec, family, horizon) = doc.into_domain().expect("generated instances are well formed");
    (spec, family, BuildConfig::preset_b(horizon))
}
