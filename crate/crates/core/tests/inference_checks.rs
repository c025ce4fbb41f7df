//! Counterfactual queries on the fixtures: criterion verdicts, adjustment
//! estimates against the enumeration oracle, the consistency condition, and
//! the out-of-distribution identity. Expected probabilities were derived by
//! hand from the fixture tables and marginals.

use crossworld_core::fixtures::{canonical_intervention, fixture, FIXTURE_NAMES};
use crossworld_core::{
    abduction_action_prediction, adjustment_estimate, consistency_check, counterfactual_criterion,
    duplicate_id, graphood_eq7, parse_model, parse_ratio, Assignment, InferenceError, VariableId,
};
use num::BigRational;
use std::collections::BTreeSet;

fn r(s: &str) -> BigRational {
    parse_ratio(s).unwrap()
}

fn v(s: &str) -> VariableId {
    VariableId::new(s)
}

fn set(names: &[&str]) -> BTreeSet<VariableId> {
    names.iter().map(|n| v(n)).collect()
}

#[test]
fn consistency_holds_on_every_fixture() {
    for name in FIXTURE_NAMES {
        let m = fixture(name).unwrap();
        let iv = canonical_intervention(name).unwrap();
        assert!(consistency_check(&m, &iv).unwrap(), "{name}");
    }
}

#[test]
fn criterion_accepts_each_backdoor_blocker_on_fig3() {
    let m = fixture("fig3").unwrap();
    let iv = canonical_intervention("fig3").unwrap();
    let no_evidence = BTreeSet::new();
    for blocker in ["C", "Z", "T"] {
        let verdict =
            counterfactual_criterion(&m, &iv, &v("Y"), &no_evidence, &set(&[blocker])).unwrap();
        assert!(verdict.satisfied, "{{{blocker}}}");
    }
    let empty = counterfactual_criterion(&m, &iv, &v("Y"), &no_evidence, &set(&[])).unwrap();
    assert!(!empty.satisfied);
    assert_eq!(
        empty.witness_path.unwrap().to_string(),
        "X <- C -> Z -> T -> Y_do_X=1"
    );
}

#[test]
fn fig3_adjustment_matches_the_oracle_for_every_admissible_set() {
    let m = fixture("fig3").unwrap();
    let iv = canonical_intervention("fig3").unwrap();
    let none = Assignment::new();
    // By hand: Y_x = T xor U_Y with P(T=1) = 1/2, so P(Y_x=1) = 1/2.
    let oracle = abduction_action_prediction(&m, &iv, (&v("Y"), "1"), &none).unwrap();
    assert_eq!(oracle, r("1/2"));
    for blocker in ["C", "Z", "T"] {
        let est = adjustment_estimate(&m, &iv, (&v("Y"), "1"), &none, &set(&[blocker])).unwrap();
        assert_eq!(est, oracle, "adjusting on {{{blocker}}}");
    }
    // The empty set fails the criterion and must refuse to estimate.
    let err = adjustment_estimate(&m, &iv, (&v("Y"), "1"), &none, &set(&[])).unwrap_err();
    assert!(matches!(
        err,
        InferenceError::AdjustmentNotAdmissible { .. }
    ));
}

#[test]
fn fig4_adjustment_under_collider_evidence() {
    let m = fixture("fig4").unwrap();
    let iv = canonical_intervention("fig4").unwrap();
    let evidence = Assignment::new().with("W", "1");
    // Hand derivation: P(Z=1 | W=1) = 3/7, P(T=1 | W=1) = 25/56, and
    // Y_x = T xor U_Y gives P(Y_x=1 | W=1) = 109/224.
    let oracle = abduction_action_prediction(&m, &iv, (&v("Y"), "1"), &evidence).unwrap();
    assert_eq!(oracle, r("109/224"));
    for adjust in [&["T", "Z"][..], &["T"], &["Z"]] {
        let est = adjustment_estimate(&m, &iv, (&v("Y"), "1"), &evidence, &set(adjust)).unwrap();
        assert_eq!(est, oracle, "adjusting on {adjust:?}");
    }
    // Evidence on the collider alone leaves the worlds connected.
    let err = adjustment_estimate(&m, &iv, (&v("Y"), "1"), &evidence, &set(&[])).unwrap_err();
    match err {
        InferenceError::AdjustmentNotAdmissible { witness } => {
            assert_eq!(witness, "X -> W <- Z -> T -> Y_do_X=1");
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn impossible_evidence_is_rejected() {
    let m = fixture("fig2").unwrap();
    let iv = canonical_intervention("fig2").unwrap();
    // A = C and B = not C, so A=1, B=1 has probability zero.
    let evidence = Assignment::new().with("A", "1").with("B", "1");
    let err = abduction_action_prediction(&m, &iv, (&v("D"), "1"), &evidence).unwrap_err();
    assert!(matches!(err, InferenceError::ZeroProbabilityEvidence));
}

#[test]
fn positivity_violation_names_the_offending_slice() {
    // X copies C deterministically, so the slice C=0 never sees X=1.
    let text = r#"{
      "exogenous": [
        { "name": "U_C", "domain": ["0", "1"], "marginal": ["1/2", "1/2"] },
        { "name": "U_Y", "domain": ["0", "1"], "marginal": ["7/8", "1/8"] }
      ],
      "endogenous": [
        { "name": "C", "domain": ["0", "1"], "parents": ["U_C"],
          "table": [ { "given": ["0"], "then": "0" }, { "given": ["1"], "then": "1" } ] },
        { "name": "X", "domain": ["0", "1"], "parents": ["C"],
          "table": [ { "given": ["0"], "then": "0" }, { "given": ["1"], "then": "1" } ] },
        { "name": "Y", "domain": ["0", "1"], "parents": ["X", "C", "U_Y"],
          "table": [
            { "given": ["0", "0", "0"], "then": "0" },
            { "given": ["0", "0", "1"], "then": "1" },
            { "given": ["0", "1", "0"], "then": "0" },
            { "given": ["0", "1", "1"], "then": "1" },
            { "given": ["1", "0", "0"], "then": "0" },
            { "given": ["1", "0", "1"], "then": "1" },
            { "given": ["1", "1", "0"], "then": "1" },
            { "given": ["1", "1", "1"], "then": "0" }
          ] }
      ]
    }"#;
    let m = parse_model(text).unwrap();
    let iv = crossworld_core::Intervention::new("X", "1");
    let verdict =
        counterfactual_criterion(&m, &iv, &v("Y"), &BTreeSet::new(), &set(&["C"])).unwrap();
    assert!(verdict.satisfied);
    let err =
        adjustment_estimate(&m, &iv, (&v("Y"), "1"), &Assignment::new(), &set(&["C"])).unwrap_err();
    match err {
        InferenceError::PositivityViolation { slice } => assert_eq!(slice, "C=0"),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn out_of_distribution_identity_on_the_surrogate_fixture() {
    let m = fixture("fig5").unwrap();
    let iv = canonical_intervention("fig5").unwrap();
    let dist = graphood_eq7(&m, &iv, "0").unwrap();
    let yx = duplicate_id(&v("Y"), &iv);
    // Hand derivation: P(E=1 | X=0) = 1/3; given E=0 the counterfactual
    // outcome is U_Y, given E=1 it is not-U_R xor U_Y, so
    // P(Y_x=1 | X=0) = 2/3 * 1/8 + 1/3 * 11/16 = 5/16.
    assert_eq!(dist.prob(&[(yx.clone(), "1".into())]).unwrap(), r("5/16"));
    assert_eq!(dist.prob(&[(yx, "0".into())]).unwrap(), r("11/16"));

    // The same query through abduction agrees exactly.
    let evidence = Assignment::new().with("X", "0");
    let p = abduction_action_prediction(&m, &iv, (&v("Y"), "1"), &evidence).unwrap();
    assert_eq!(p, r("5/16"));
}

#[test]
fn identity_requires_the_separating_environment() {
    // fig1 has no E variable, so the identity should refuse to run.
    let m = fixture("fig1").unwrap();
    let iv = canonical_intervention("fig1").unwrap();
    let err = graphood_eq7(&m, &iv, "0").unwrap_err();
    assert!(matches!(err, InferenceError::FixtureShapeMismatch(_)));
}

#[test]
fn adjustment_with_evidence_on_fig5_matches_abduction() {
    let m = fixture("fig5").unwrap();
    let iv = canonical_intervention("fig5").unwrap();
    // Criterion with evidence {E} and empty adjustment set.
    let verdict =
        counterfactual_criterion(&m, &iv, &v("Y"), &set(&["E"]), &BTreeSet::new()).unwrap();
    assert!(verdict.satisfied);
    let evidence = Assignment::new().with("E", "1");
    let est = adjustment_estimate(&m, &iv, (&v("Y"), "1"), &evidence, &BTreeSet::new()).unwrap();
    let oracle = abduction_action_prediction(&m, &iv, (&v("Y"), "1"), &evidence).unwrap();
    assert_eq!(est, oracle);
    // From the hand table: given E=1, Y_x = not U_R xor U_Y = 11/16.
    assert_eq!(est, r("11/16"));
}
