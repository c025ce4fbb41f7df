//! d-separation verdicts on the cross-world graphs, including the cases
//! where the twin network reports a spurious dependence that the teleporter
//! construction avoids. The fast reachability routine is also cross-checked
//! against the exhaustive path enumeration on every query made here.

use crossworld_core::fixtures::{canonical_intervention, fixture, FIXTURE_NAMES};
use crossworld_core::{
    build_teleporter, build_twin, CausalGraph, GraphError, SeparationVerdict, VariableId,
};
use std::collections::BTreeSet;

fn v(s: &str) -> VariableId {
    VariableId::new(s)
}

fn cond(names: &[&str]) -> BTreeSet<VariableId> {
    names.iter().map(|n| v(n)).collect()
}

/// Query through both routes and insist they agree before returning.
fn dsep(g: &CausalGraph, a: &str, b: &str, c: &BTreeSet<VariableId>) -> SeparationVerdict {
    let fast = g.d_separated(&v(a), &v(b), c).unwrap();
    let slow = g.d_separated_naive(&v(a), &v(b), c).unwrap();
    assert_eq!(
        fast.separated, slow.separated,
        "routes disagree on {a} vs {b} given {c:?}"
    );
    fast
}

#[test]
fn twin_network_reports_a_spurious_path_that_the_teleporter_removes() {
    let m = fixture("fig2").unwrap();
    let iv = canonical_intervention("fig2").unwrap();
    let twin = build_twin(&m, &iv).unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();

    // Conditioning on B: the twin network stays connected through the
    // duplicated confounder chain, the teleporter graph separates.
    let c = cond(&["B"]);
    let twin_verdict = dsep(twin.graph(), "A", "D_do_A=1", &c);
    assert!(!twin_verdict.separated);
    assert_eq!(
        twin_verdict.witness.unwrap().to_string(),
        "A <- C <- U -> C_do_A=1 -> B_do_A=1 -> D_do_A=1"
    );
    assert!(dsep(tele.graph(), "A", "D_do_A=1", &c).separated);
}

#[test]
fn teleporter_verdicts_on_the_diamond() {
    let m = fixture("fig2").unwrap();
    let iv = canonical_intervention("fig2").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let g = tele.graph();

    assert!(dsep(g, "A", "D_do_A=1", &cond(&["C"])).separated);
    assert!(dsep(g, "A", "D_do_A=1", &cond(&["D", "B"])).separated);
    // Conditioning on the collider D re-opens A -> D <- B -> D_a.
    let verdict = dsep(g, "A", "D_do_A=1", &cond(&["D", "C"]));
    assert!(!verdict.separated);
    assert_eq!(
        verdict.witness.unwrap().to_string(),
        "A -> D <- B -> D_do_A=1"
    );
    // And unconditionally the confounder C connects the worlds.
    assert!(!dsep(g, "A", "D_do_A=1", &cond(&[])).separated);
}

#[test]
fn twin_agrees_with_teleporter_when_conditioning_on_the_confounder() {
    let m = fixture("fig2").unwrap();
    let iv = canonical_intervention("fig2").unwrap();
    let twin = build_twin(&m, &iv).unwrap();
    assert!(dsep(twin.graph(), "A", "D_do_A=1", &cond(&["C"])).separated);
}

#[test]
fn backdoor_sets_on_the_mediated_confounder_fixture() {
    let m = fixture("fig3").unwrap();
    let iv = canonical_intervention("fig3").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let g = tele.graph();

    // The only back-door path is X <- C -> Z -> T -> Y_x.
    let verdict = dsep(g, "X", "Y_do_X=1", &cond(&[]));
    assert!(!verdict.separated);
    assert_eq!(
        verdict.witness.unwrap().to_string(),
        "X <- C -> Z -> T -> Y_do_X=1"
    );
    for blocker in ["C", "Z", "T"] {
        assert!(
            dsep(g, "X", "Y_do_X=1", &cond(&[blocker])).separated,
            "{{{blocker}}} should block the back-door path"
        );
        assert!(g
            .backdoor_admissible(&v("X"), &v("Y_do_X=1"), &cond(&[blocker]))
            .unwrap());
    }
    assert!(!g
        .backdoor_admissible(&v("X"), &v("Y_do_X=1"), &cond(&[]))
        .unwrap());
}

#[test]
fn conditioning_on_a_collider_descendant_opens_the_path() {
    let m = fixture("fig4").unwrap();
    let iv = canonical_intervention("fig4").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let g = tele.graph();

    // Unconditionally X and Y_x are separated (the only link runs through
    // the collider W), but evidence on W opens X -> W <- Z -> T -> Y_x.
    assert!(dsep(g, "X", "Y_do_X=1", &cond(&[])).separated);
    let opened = dsep(g, "X", "Y_do_X=1", &cond(&["W"]));
    assert!(!opened.separated);
    assert_eq!(
        opened.witness.unwrap().to_string(),
        "X -> W <- Z -> T -> Y_do_X=1"
    );
    // Adding Z or T on top of the evidence restores separation.
    assert!(dsep(g, "X", "Y_do_X=1", &cond(&["W", "Z"])).separated);
    assert!(dsep(g, "X", "Y_do_X=1", &cond(&["W", "T"])).separated);
    assert!(dsep(g, "X", "Y_do_X=1", &cond(&["W", "Z", "T"])).separated);
}

#[test]
fn surrogate_fixture_separates_given_the_environment() {
    let m = fixture("fig5").unwrap();
    let iv = canonical_intervention("fig5").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let g = tele.graph();
    assert!(dsep(g, "X", "Y_do_X=1", &cond(&["E"])).separated);
    let open = dsep(g, "X", "Y_do_X=1", &cond(&[]));
    assert!(!open.separated);
    assert_eq!(open.witness.unwrap().to_string(), "X <- E -> Y_do_X=1");
}

#[test]
fn endpoint_inside_the_conditioning_set_is_rejected() {
    let m = fixture("fig1").unwrap();
    let iv = canonical_intervention("fig1").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let err = tele
        .graph()
        .d_separated(&v("X"), &v("Y_do_X=1"), &cond(&["X", "Z"]))
        .unwrap_err();
    assert!(matches!(err, GraphError::EndpointInConditioningSet(_)));
    let err = tele
        .graph()
        .d_separated(&v("X"), &v("X"), &cond(&[]))
        .unwrap_err();
    assert!(matches!(err, GraphError::SameEndpoints));
}

#[test]
fn fast_and_naive_routes_agree_exhaustively_on_all_fixture_graphs() {
    for name in FIXTURE_NAMES {
        let m = fixture(name).unwrap();
        let iv = canonical_intervention(name).unwrap();
        for g in [
            build_twin(&m, &iv).unwrap().graph().clone(),
            build_teleporter(&m, &iv).unwrap().graph().clone(),
        ] {
            let ids: Vec<VariableId> = g.node_ids().cloned().collect();
            for a in &ids {
                for b in &ids {
                    if a >= b {
                        continue;
                    }
                    let rest: Vec<&VariableId> =
                        ids.iter().filter(|n| *n != a && *n != b).collect();
                    // Every subset of the remaining nodes on the small
                    // graphs; pairs at most on the larger twin graphs.
                    for mask in 0..(1u32 << rest.len()) {
                        if rest.len() > 7 && mask.count_ones() > 2 {
                            continue;
                        }
                        let c: BTreeSet<VariableId> = rest
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, n)| (*n).clone())
                            .collect();
                        let fast = g.d_separated(a, b, &c).unwrap();
                        let slow = g.d_separated_naive(a, b, &c).unwrap();
                        assert_eq!(
                            fast.separated, slow.separated,
                            "{name}: {a} vs {b} given {c:?}"
                        );
                        assert_eq!(fast.witness, slow.witness);
                    }
                }
            }
        }
    }
}
