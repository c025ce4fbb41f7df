//! Structural checks on twin and teleporter constructions across all the
//! embedded fixtures: which nodes get duplicated, which exogenous variables
//! survive, and which edges the duplicate world carries.

use crossworld_core::fixtures::{canonical_intervention, fixture, FIXTURE_NAMES};
use crossworld_core::{
    base_graph, build_teleporter, build_twin, duplicate_id, Intervention, NodeRole, VariableId,
    WorldError,
};
use std::collections::BTreeSet;

fn v(s: &str) -> VariableId {
    VariableId::new(s)
}

fn node_set(g: &crossworld_core::CausalGraph) -> BTreeSet<String> {
    g.node_ids().map(|id| id.to_string()).collect()
}

fn edge_set(g: &crossworld_core::CausalGraph) -> BTreeSet<(String, String)> {
    g.edges()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

#[test]
fn twin_duplicates_every_endogenous_variable() {
    for name in FIXTURE_NAMES {
        let m = fixture(name).unwrap();
        let iv = canonical_intervention(name).unwrap();
        let twin = build_twin(&m, &iv).unwrap();
        let bases: BTreeSet<&VariableId> = twin.duplicate_bases().collect();
        let endo: BTreeSet<&VariableId> = m.endogenous.iter().map(|e| &e.id).collect();
        assert_eq!(bases, endo, "{name}: twin must duplicate all endogenous");
        // Every exogenous variable is shared between the worlds.
        for exo in &m.exogenous {
            assert_eq!(
                twin.role_of(&exo.id),
                Some(&NodeRole::SharedExogenous),
                "{name}: {}",
                exo.id
            );
        }
    }
}

#[test]
fn teleporter_duplicates_exactly_the_descendants_of_the_target() {
    for name in FIXTURE_NAMES {
        let m = fixture(name).unwrap();
        let iv = canonical_intervention(name).unwrap();
        let base = base_graph(&m).unwrap();
        let tele = build_teleporter(&m, &iv).unwrap();
        let expected: BTreeSet<VariableId> = base
            .descendants(&iv.target)
            .unwrap()
            .into_iter()
            .filter(|d| !m.is_exogenous(d))
            .collect();
        let got: BTreeSet<VariableId> = tele.duplicate_bases().cloned().collect();
        assert_eq!(got, expected, "{name}: duplicated set");
        // Everything endogenous outside the duplicates and the target is a
        // teleporter, serving both worlds.
        for e in &m.endogenous {
            if e.id == iv.target || expected.contains(&e.id) {
                continue;
            }
            assert_eq!(
                tele.role_of(&e.id),
                Some(&NodeRole::Teleporter),
                "{name}: {}",
                e.id
            );
        }
    }
}

#[test]
fn fig1_teleporter_graph_has_the_expected_shape() {
    let m = fixture("fig1").unwrap();
    let iv = canonical_intervention("fig1").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let g = tele.graph();
    // U_Z disappears: its only child Z serves both worlds unchanged.
    let expected: BTreeSet<String> = ["Z", "X", "Y", "Y_do_X=1", "U_X", "U_Y"]
        .map(String::from)
        .into();
    assert_eq!(node_set(g), expected);
    let expected_edges: BTreeSet<(String, String)> = [
        ("U_X", "X"),
        ("U_Y", "Y"),
        ("U_Y", "Y_do_X=1"),
        ("Z", "X"),
        ("Z", "Y"),
        ("Z", "Y_do_X=1"),
        ("X", "Y"),
    ]
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .into();
    assert_eq!(edge_set(g), expected_edges);
    // The intervention constant is not materialized: the duplicate has no
    // parent standing in for X.
    assert!(!g.contains(&v("X_do_X=1")));
}

#[test]
fn fig1_twin_graph_has_the_expected_shape() {
    let m = fixture("fig1").unwrap();
    let iv = canonical_intervention("fig1").unwrap();
    let twin = build_twin(&m, &iv).unwrap();
    let g = twin.graph();
    let expected: BTreeSet<String> = [
        "Z", "X", "Y", "Z_do_X=1", "X_do_X=1", "Y_do_X=1", "U_Z", "U_X", "U_Y",
    ]
    .map(String::from)
    .into();
    assert_eq!(node_set(g), expected);
    // The intervened duplicate is parentless; the rest of the duplicate
    // world mirrors the base equations.
    assert!(g.parents_of(&v("X_do_X=1")).unwrap().is_empty());
    let expected_edges: BTreeSet<(String, String)> = [
        ("U_Z", "Z"),
        ("U_X", "X"),
        ("U_Y", "Y"),
        ("Z", "X"),
        ("Z", "Y"),
        ("X", "Y"),
        ("U_Z", "Z_do_X=1"),
        ("U_Y", "Y_do_X=1"),
        ("Z_do_X=1", "Y_do_X=1"),
        ("X_do_X=1", "Y_do_X=1"),
    ]
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .into();
    assert_eq!(edge_set(g), expected_edges);
}

#[test]
fn fig2_teleporter_removes_the_shared_confounder() {
    let m = fixture("fig2").unwrap();
    let iv = canonical_intervention("fig2").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let g = tele.graph();
    // U's only child C serves both worlds, so U drops out entirely.
    let expected: BTreeSet<String> = ["C", "A", "B", "D", "D_do_A=1"].map(String::from).into();
    assert_eq!(node_set(g), expected);
    let expected_edges: BTreeSet<(String, String)> = [
        ("C", "A"),
        ("C", "B"),
        ("A", "D"),
        ("B", "D"),
        ("B", "D_do_A=1"),
    ]
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .into();
    assert_eq!(edge_set(g), expected_edges);
}

#[test]
fn fig4_teleporter_duplicates_both_descendants() {
    let m = fixture("fig4").unwrap();
    let iv = canonical_intervention("fig4").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let g = tele.graph();
    let dups: BTreeSet<VariableId> = tele.duplicate_bases().cloned().collect();
    assert_eq!(dups, [v("W"), v("Y")].into());
    // W's duplicate keeps Z and the shared disturbance, loses the target.
    let wx = duplicate_id(&v("W"), &iv);
    let parents: BTreeSet<String> = g
        .parents_of(&wx)
        .unwrap()
        .into_iter()
        .map(|p| p.to_string())
        .collect();
    assert_eq!(parents, ["Z", "U_W"].map(String::from).into());
    // U_Z and U_T vanish; U_W and U_Y are retained and shared.
    assert!(!g.contains(&v("U_Z")));
    assert!(!g.contains(&v("U_T")));
    assert_eq!(tele.role_of(&v("U_W")), Some(&NodeRole::SharedExogenous));
    assert_eq!(tele.role_of(&v("U_Y")), Some(&NodeRole::SharedExogenous));
}

#[test]
fn counterfactual_node_resolution() {
    let m = fixture("fig1").unwrap();
    let iv = canonical_intervention("fig1").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    // Descendant: resolves to its duplicate.
    assert_eq!(tele.counterfactual_node(&v("Y")).unwrap(), &v("Y_do_X=1"));
    // Non-descendant: the teleporter itself serves as the counterfactual.
    assert_eq!(tele.counterfactual_node(&v("Z")).unwrap(), &v("Z"));
    // The target has no counterfactual node in the teleporter graph.
    assert!(matches!(
        tele.counterfactual_node(&v("X")),
        Err(WorldError::ConstantCounterfactual(_))
    ));
    // The twin graph resolves everything to a duplicate.
    let twin = build_twin(&m, &iv).unwrap();
    assert_eq!(twin.counterfactual_node(&v("Z")).unwrap(), &v("Z_do_X=1"));
    assert_eq!(twin.counterfactual_node(&v("X")).unwrap(), &v("X_do_X=1"));
}

#[test]
fn intervention_errors_are_reported() {
    let m = fixture("fig1").unwrap();
    assert!(matches!(
        build_teleporter(&m, &Intervention::new("U_Z", "1")),
        Err(WorldError::InterveneOnExogenous(_))
    ));
    assert!(matches!(
        build_teleporter(&m, &Intervention::new("X", "2")),
        Err(WorldError::ValueNotInDomain { .. })
    ));
    assert!(matches!(
        build_twin(&m, &Intervention::new("Q", "1")),
        Err(WorldError::UnknownVariable(_))
    ));
}

#[test]
fn intervening_on_a_sink_duplicates_nothing() {
    let m = fixture("fig1").unwrap();
    let iv = Intervention::new("Y", "1");
    let tele = build_teleporter(&m, &iv).unwrap();
    assert!(tele.is_counterfactually_trivial());
    assert_eq!(tele.duplicate_bases().count(), 0);
    // With no descendants the real graph already answers every query.
    assert_eq!(tele.counterfactual_node(&v("Z")).unwrap(), &v("Z"));
    assert_eq!(tele.counterfactual_node(&v("X")).unwrap(), &v("X"));
}
