//! Randomized cross-checks: generated models are always valid, trials are
//! reproducible, and across many seeds the graph verdicts never contradict
//! the exact enumeration oracle.

use crossworld_core::genrand::{
    random_scm, run_trials, soundness_trial, GenConfig, GenError, TableFill,
};
use crossworld_core::{parse_model, render};
use proptest::prelude::*;

#[test]
fn generated_models_are_always_valid() {
    for seed in 0..50 {
        let cfg = GenConfig {
            seed,
            n_endogenous: 2 + (seed as usize % 5),
            max_parents: 1 + (seed as usize % 3),
            ..GenConfig::default()
        };
        let m = random_scm(&cfg).unwrap();
        let report = m.validate();
        assert!(report.is_valid(), "seed {seed}: {report}");
        assert!(m.exogenous_state_count() <= crossworld_core::DEFAULT_STATE_CAP);
    }
}

#[test]
fn generation_is_reproducible_and_seed_sensitive() {
    let cfg = GenConfig {
        seed: 99,
        ..GenConfig::default()
    };
    assert_eq!(random_scm(&cfg).unwrap(), random_scm(&cfg).unwrap());
    let other = GenConfig {
        seed: 100,
        ..GenConfig::default()
    };
    assert_ne!(random_scm(&cfg).unwrap(), random_scm(&other).unwrap());
}

#[test]
fn infeasible_configs_are_rejected() {
    let too_many = GenConfig {
        n_endogenous: 7,
        ..GenConfig::default()
    };
    assert!(matches!(
        random_scm(&too_many),
        Err(GenError::InfeasibleConfig(_))
    ));
    let bad_weights = GenConfig {
        table_fill: TableFill::Weighted(vec![0, 0]),
        ..GenConfig::default()
    };
    assert!(matches!(
        random_scm(&bad_weights),
        Err(GenError::InfeasibleConfig(_))
    ));
}

#[test]
fn trial_reports_are_byte_identical_across_runs() {
    let cfg = GenConfig {
        seed: 42,
        ..GenConfig::default()
    };
    let a = run_trials(&cfg, 5, 3).unwrap();
    let b = run_trials(&cfg, 5, 3).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_eq!(a.summary.models, 5);
    assert!(a.summary.queries > 0);
}

#[test]
fn a_trial_batch_finds_no_soundness_or_consistency_failures() {
    let cfg = GenConfig {
        seed: 7,
        ..GenConfig::default()
    };
    let report = run_trials(&cfg, 40, 3).unwrap();
    let s = &report.summary;
    assert_eq!(
        s.teleporter_soundness_violations,
        0,
        "{}",
        report.to_jsonl()
    );
    assert_eq!(s.twin_soundness_violations, 0);
    assert_eq!(s.dominance_violations, 0);
    assert_eq!(s.adjustment_mismatches, 0);
    assert_eq!(s.consistency_failures, 0);
    assert!(
        s.adjustments_checked > 0,
        "batch never exercised adjustment"
    );
}

#[test]
fn single_trials_cover_weighted_tables() {
    let cfg = GenConfig {
        seed: 3,
        table_fill: TableFill::Weighted(vec![3, 1]),
        ..GenConfig::default()
    };
    let report = soundness_trial(&cfg, 2).unwrap();
    assert_eq!(report.summary.teleporter_soundness_violations, 0);
    assert_eq!(report.summary.consistency_failures, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Rendering then parsing returns the same model for arbitrary
    /// generator outputs, not just the curated fixtures.
    #[test]
    fn render_parse_round_trip(seed in 0u64..10_000) {
        let cfg = GenConfig { seed, ..GenConfig::default() };
        let m = random_scm(&cfg).unwrap();
        prop_assert_eq!(&m, &parse_model(&render(&m)).unwrap());
    }

    /// Across random seeds, no trial query may show a d-separation verdict
    /// that the exact joint distribution contradicts, the twin network may
    /// never out-separate the teleporter graph, and every admissible
    /// adjustment must reproduce the oracle exactly.
    #[test]
    fn verdicts_never_contradict_the_oracle(seed in 0u64..10_000) {
        let cfg = GenConfig { seed, n_endogenous: 4, ..GenConfig::default() };
        let report = soundness_trial(&cfg, 3).unwrap();
        let s = report.summary.clone();
        prop_assert_eq!(s.teleporter_soundness_violations, 0, "{}", report.to_jsonl());
        prop_assert_eq!(s.twin_soundness_violations, 0);
        prop_assert_eq!(s.dominance_violations, 0);
        prop_assert_eq!(s.adjustment_mismatches, 0);
        prop_assert_eq!(s.consistency_failures, 0);
    }
}
