use proptest::prelude::*;

use railnet_core::domain::BuildConfig;
use railnet_core::generate::{generate_instance, GenerateParams};
use railnet_core::preprocess::build_relevant_sets;
use railnet_core::rat::{format_decimal, parse_decimal};
use railnet_core::validate::validate_instance;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    /// Decimal text is a faithful encoding: whatever parses formats back to a
    /// string that parses to the same rational.
    #[test]
    fn decimal_text_round_trips(
        sign in prop::bool::ANY,
        int_part in 0u64..=1_000_000_000,
        frac_digits in 0usize..=9,
        frac_raw in 0u64..=999_999_999,
    ) {
        let frac = if frac_digits == 0 {
            String::new()
        } else {
            format!(".{:0width$}", frac_raw % 10u64.pow(frac_digits as u32), width = frac_digits)
        };
        let text = format!("{}{int_part}{frac}", if sign { "-" } else { "" });
        let value = parse_decimal(&text).unwrap();
        let rendered = format_decimal(&value);
        prop_assert_eq!(parse_decimal(&rendered).unwrap(), value);
    }

    /// Every generated instance is reproducible, passes validation, and gives
    /// each train at least one route inside its time window.
    #[test]
    fn generated_instances_are_usable(
        seed in 0u64..=u64::MAX,
        nodes in 2usize..=6,
        extra_sections in 0usize..=2,
        trains in 1usize..=4,
        scenarios in 1usize..=3,
        train_types in 1usize..=2,
        optional_percent in 0u32..=100,
        coverage_percent in 1u32..=100,
        horizon in 40i64..=150,
    ) {
        let complete = nodes * (nodes - 1) / 2;
        let params = GenerateParams {
            seed,
            nodes,
            sections: (nodes - 1 + extra_sections).min(complete),
            trains,
            scenarios,
            train_types,
            optional_percent,
            coverage_percent,
            horizon,
        };
        let doc = generate_instance(&params).unwrap();
        prop_assert_eq!(doc.to_json(), generate_instance(&params).unwrap().to_json());

        let (spec, family, horizon) = doc.into_domain().unwrap();
        let config = BuildConfig::preset_b(horizon);
        let diagnostics = validate_instance(&spec, &family, &config);
        prop_assert!(diagnostics.is_empty(), "diagnostics: {:?}", diagnostics);
        let sets = build_relevant_sets(&spec, &family, &config);
        prop_assert!(sets.is_ok(), "no relevant sets: {:?}", sets.err());
        prop_assert!(sets.unwrap().paths.values().all(|p| !p.paths.is_empty()));
    }
}
