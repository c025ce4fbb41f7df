//! The executable regression suite over the embedded fixtures: every graph
//! verdict, adjustment identity, and counterfactual probability the fixtures
//! are built to demonstrate, each checked against an explicit expectation.

use crossworld_core::fixtures::{canonical_intervention, fixture, FIXTURE_NAMES};
use crossworld_core::{
    abduction_action_prediction, adjustment_estimate, build_teleporter, build_twin,
    consistency_check, counterfactual_criterion, crossworld_joint, duplicate_id, format_ratio,
    graphood_eq7, Assignment, CwVar, NodeRole, VariableId,
};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Serialize)]
pub struct Scenario {
    pub fixture: &'static str,
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

fn scenario(
    out: &mut Vec<Scenario>,
    fixture: &'static str,
    name: impl Into<String>,
    expected: impl Into<String>,
    actual: impl Into<String>,
) {
    let expected = expected.into();
    let actual = actual.into();
    let pass = expected == actual;
    out.push(Scenario {
        fixture,
        name: name.into(),
        expected,
        actual,
        pass,
    });
}

fn verdict(separated: bool) -> &'static str {
    if separated {
        "SEPARATED"
    } else {
        "CONNECTED"
    }
}

fn v(s: &str) -> VariableId {
    VariableId::new(s)
}

fn set(names: &[&str]) -> BTreeSet<VariableId> {
    names.iter().map(|n| v(n)).collect()
}

/// Run every fixture scenario. Any failed expectation is reported in the
/// returned list, never panicked on.
pub fn run_all() -> Vec<Scenario> {
    let mut out = Vec::new();
    fig1(&mut out);
    fig2(&mut out);
    fig3(&mut out);
    fig4(&mut out);
    fig5(&mut out);
    consistency(&mut out);
    out
}

fn fig1(out: &mut Vec<Scenario>) {
    let m = fixture("fig1").unwrap();
    let iv = canonical_intervention("fig1").unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();

    let teleporters: Vec<String> = tele
        .roles()
        .filter(|(_, r)| **r == NodeRole::Teleporter)
        .map(|(id, _)| id.to_string())
        .collect();
    scenario(
        out,
        "fig1",
        "teleporter set",
        "{Z}",
        format!("{{{}}}", teleporters.join(",")),
    );
    scenario(
        out,
        "fig1",
        "merged graph size",
        "6 nodes",
        format!("{} nodes", tele.graph().len()),
    );
    scenario(
        out,
        "fig1",
        "U_Z removed from the merged graph",
        "removed",
        if tele.graph().contains(&v("U_Z")) {
            "present"
        } else {
            "removed"
        },
    );
    scenario(
        out,
        "fig1",
        "U_Y shared between the worlds",
        "shared",
        match tele.role_of(&v("U_Y")) {
            Some(NodeRole::SharedExogenous) => "shared",
            _ => "not shared",
        },
    );
    let sep = tele
        .graph()
        .d_separated(&v("X"), &v("Y_do_X=1"), &set(&["Z"]))
        .unwrap();
    scenario(
        out,
        "fig1",
        "X vs Y_x given {Z}",
        "SEPARATED",
        verdict(sep.separated),
    );
}

fn fig2(out: &mut Vec<Scenario>) {
    let m = fixture("fig2").unwrap();
    let iv = canonical_intervention("fig2").unwrap();
    let twin = build_twin(&m, &iv).unwrap();
    let tele = build_teleporter(&m, &iv).unwrap();
    let d_a = duplicate_id(&v("D"), &iv);

    let twin_b = twin
        .graph()
        .d_separated(&v("A"), &d_a, &set(&["B"]))
        .unwrap();
    scenario(
        out,
        "fig2",
        "twin: A vs D_a given {B}",
        "CONNECTED",
        verdict(twin_b.separated),
    );
    scenario(
        out,
        "fig2",
        "twin witness path",
        "A <- C <- U -> C_do_A=1 -> B_do_A=1 -> D_do_A=1",
        twin_b
            .witness
            .map(|p| p.to_string())
            .unwrap_or_else(|| "none".into()),
    );
    let twin_c = twin
        .graph()
        .d_separated(&v("A"), &d_a, &set(&["C"]))
        .unwrap();
    scenario(
        out,
        "fig2",
        "twin: A vs D_a given {C}",
        "SEPARATED",
        verdict(twin_c.separated),
    );

    for (given, expected) in [
        (vec!["B"], "SEPARATED"),
        (vec!["C"], "SEPARATED"),
        (vec!["D", "C"], "CONNECTED"),
        (vec!["D", "B"], "SEPARATED"),
    ] {
        let got = tele
            .graph()
            .d_separated(&v("A"), &d_a, &set(&given))
            .unwrap();
        scenario(
            out,
            "fig2",
            format!("teleporter: A vs D_a given {{{}}}", given.join(",")),
            expected,
            verdict(got.separated),
        );
    }

    // The exact joint confirms the separations numerically.
    for given in [["B"], ["C"]] {
        let joint = crossworld_joint(
            &m,
            &iv,
            &[
                CwVar::Real(v("A")),
                CwVar::Counterfactual(v("D")),
                CwVar::Real(v(given[0])),
            ],
        )
        .unwrap();
        let ci = joint
            .check_ci_numeric(&v("A"), &d_a, &[v(given[0])])
            .unwrap();
        scenario(
            out,
            "fig2",
            format!("oracle: A and D_a independent given {{{}}}", given[0]),
            "independent",
            if ci { "independent" } else { "dependent" },
        );
    }
}

fn fig3(out: &mut Vec<Scenario>) {
    let m = fixture("fig3").unwrap();
    let iv = canonical_intervention("fig3").unwrap();
    let no_evidence = BTreeSet::new();
    let none = Assignment::new();
    let oracle = abduction_action_prediction(&m, &iv, (&v("Y"), "1"), &none).unwrap();

    for blocker in ["C", "Z", "T"] {
        let crit =
            counterfactual_criterion(&m, &iv, &v("Y"), &no_evidence, &set(&[blocker])).unwrap();
        scenario(
            out,
            "fig3",
            format!("criterion with adjustment set {{{blocker}}}"),
            "satisfied",
            if crit.satisfied {
                "satisfied"
            } else {
                "violated"
            },
        );
        let est = adjustment_estimate(&m, &iv, (&v("Y"), "1"), &none, &set(&[blocker])).unwrap();
        scenario(
            out,
            "fig3",
            format!("adjustment on {{{blocker}}} equals the oracle"),
            format_ratio(&oracle),
            format_ratio(&est),
        );
    }
    let crit = counterfactual_criterion(&m, &iv, &v("Y"), &no_evidence, &set(&[])).unwrap();
    scenario(
        out,
        "fig3",
        "criterion with the empty adjustment set",
        "violated",
        if crit.satisfied {
            "satisfied"
        } else {
            "violated"
        },
    );
}

fn fig4(out: &mut Vec<Scenario>) {
    let m = fixture("fig4").unwrap();
    let iv = canonical_intervention("fig4").unwrap();
    let evidence = Assignment::new().with("W", "1");
    let e_vars: BTreeSet<VariableId> = [v("W")].into();
    let oracle = abduction_action_prediction(&m, &iv, (&v("Y"), "1"), &evidence).unwrap();

    for adjust in [&["T"][..], &["Z"], &["T", "Z"]] {
        let crit = counterfactual_criterion(&m, &iv, &v("Y"), &e_vars, &set(adjust)).unwrap();
        scenario(
            out,
            "fig4",
            format!("criterion with evidence W and set {{{}}}", adjust.join(",")),
            "satisfied",
            if crit.satisfied {
                "satisfied"
            } else {
                "violated"
            },
        );
        let est = adjustment_estimate(&m, &iv, (&v("Y"), "1"), &evidence, &set(adjust)).unwrap();
        scenario(
            out,
            "fig4",
            format!("adjustment on {{{}}} equals the oracle", adjust.join(",")),
            format_ratio(&oracle),
            format_ratio(&est),
        );
    }
    let crit = counterfactual_criterion(&m, &iv, &v("Y"), &e_vars, &set(&[])).unwrap();
    scenario(
        out,
        "fig4",
        "empty adjustment set under collider evidence",
        "violated",
        if crit.satisfied {
            "satisfied"
        } else {
            "violated"
        },
    );
}

fn fig5(out: &mut Vec<Scenario>) {
    let m = fixture("fig5").unwrap();
    let iv = canonical_intervention("fig5").unwrap();
    let crit = counterfactual_criterion(&m, &iv, &v("Y"), &set(&["E"]), &BTreeSet::new()).unwrap();
    scenario(
        out,
        "fig5",
        "X and Y_x d-separated by the environment E",
        "satisfied",
        if crit.satisfied {
            "satisfied"
        } else {
            "violated"
        },
    );

    let dist = graphood_eq7(&m, &iv, "0").unwrap();
    let yx = duplicate_id(&v("Y"), &iv);
    let eq7 = dist.prob(&[(yx, "1".into())]).unwrap();
    let evidence = Assignment::new().with("X", "0");
    let oracle = abduction_action_prediction(&m, &iv, (&v("Y"), "1"), &evidence).unwrap();
    scenario(
        out,
        "fig5",
        "environment-mediated identity equals the oracle",
        format_ratio(&oracle),
        format_ratio(&eq7),
    );
}

fn consistency(out: &mut Vec<Scenario>) {
    for name in FIXTURE_NAMES {
        let m = fixture(name).unwrap();
        let iv = canonical_intervention(name).unwrap();
        let ok = consistency_check(&m, &iv).unwrap();
        scenario(
            out,
            name,
            format!("consistency under {iv}"),
            "holds",
            if ok { "holds" } else { "violated" },
        );
    }
}

/// Fixed-width table rendering with one PASS/FAIL line per scenario.
pub fn render_table(scenarios: &[Scenario]) -> String {
    let mut txt = String::new();
    for s in scenarios {
        let status = if s.pass { "PASS" } else { "FAIL" };
        txt.push_str(&format!(
            "{status}  {:<5} {:<55} expected: {:<55} actual: {}\n",
            s.fixture, s.name, s.expected, s.actual
        ));
    }
    let failed = scenarios.iter().filter(|s| !s.pass).count();
    txt.push_str(&format!(
        "{} scenario(s), {} failed\n",
        scenarios.len(),
        failed
    ));
    txt
}
