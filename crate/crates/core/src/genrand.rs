//! Seeded random generation of valid discrete models, plus batch trials that
//! compare graph-level verdicts against the exact numeric oracle.

use crate::inference::{
    abduction_action_prediction, adjustment_estimate, consistency_check, counterfactual_criterion,
    crossworld_joint, CwVar, InferenceError,
};
use crate::rational::format_ratio;
use crate::scm::{
    Assignment, Domain, EndogenousSpec, ExogenousSpec, ProbabilisticSCM, TableRow, VariableId,
    DEFAULT_STATE_CAP,
};
use crate::world::{base_graph, build_teleporter, build_twin, Intervention};
use num::BigRational;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// Configuration for the random model generator.
#[derive(Clone, PartialEq, Debug)]
pub struct GenConfig {
    pub seed: u64,
    /// Number of endogenous variables, 2..=6.
    pub n_endogenous: usize,
    /// Maximum endogenous parents per variable, 1..=3.
    pub max_parents: usize,
    /// Domain size for endogenous variables (binary by default).
    pub domain_size: usize,
    /// How equation-table outputs are sampled per row.
    pub table_fill: TableFill,
    /// Probability (numerator over 10) of a shared exogenous confounder per
    /// endogenous pair. Biasing toward confounded structures keeps the
    /// independence structure non-trivial.
    pub confounder_tenths: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TableFill {
    Uniform,
    /// Relative weights over output value indices.
    Weighted(Vec<u32>),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            n_endogenous: 4,
            max_parents: 2,
            domain_size: 2,
            table_fill: TableFill::Uniform,
            confounder_tenths: 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("infeasible generator config: {0}")]
    InfeasibleConfig(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
    #[error(transparent)]
    Scm(#[from] crate::scm::ScmError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Table(#[from] crate::table::TableError),
}

fn check_config(cfg: &GenConfig) -> Result<(), GenError> {
    if !(2..=6).contains(&cfg.n_endogenous) {
        return Err(GenError::InfeasibleConfig(format!(
            "n_endogenous {} outside 2..=6",
            cfg.n_endogenous
        )));
    }
    if !(1..=3).contains(&cfg.max_parents) {
        return Err(GenError::InfeasibleConfig(format!(
            "max_parents {} outside 1..=3",
            cfg.max_parents
        )));
    }
    if !(2..=4).contains(&cfg.domain_size) {
        return Err(GenError::InfeasibleConfig(format!(
            "domain_size {} outside 2..=4",
            cfg.domain_size
        )));
    }
    if let TableFill::Weighted(w) = &cfg.table_fill {
        if w.len() != cfg.domain_size || w.iter().all(|&x| x == 0) {
            return Err(GenError::InfeasibleConfig(
                "table_fill weights must match domain_size and not all be zero".into(),
            ));
        }
    }
    Ok(())
}

fn random_marginal(rng: &mut ChaCha8Rng) -> Vec<BigRational> {
    // k/8 split keeps every exogenous state at positive probability.
    let k = rng.gen_range(1..=7u32);
    vec![
        BigRational::new((8 - k).into(), 8.into()),
        BigRational::new(k.into(), 8.into()),
    ]
}

fn sample_output(rng: &mut ChaCha8Rng, fill: &TableFill, domain_size: usize) -> usize {
    match fill {
        TableFill::Uniform => rng.gen_range(0..domain_size),
        TableFill::Weighted(w) => {
            let total: u32 = w.iter().sum();
            let mut pick = rng.gen_range(0..total);
            for (i, &wi) in w.iter().enumerate() {
                if pick < wi {
                    return i;
                }
                pick -= wi;
            }
            unreachable!()
        }
    }
}

/// Deterministic random model: a DAG over `n_endogenous` nodes in
/// declaration order, one dedicated exogenous parent each, plus optional
/// shared exogenous confounders per pair. Always passes `validate`.
pub fn random_scm(cfg: &GenConfig) -> Result<ProbabilisticSCM, GenError> {
    check_config(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_endogenous;
    let endo_domain = Domain::new((0..cfg.domain_size).map(|i| i.to_string()));

    let endo_names: Vec<VariableId> = (1..=n).map(|i| VariableId::new(format!("X{i}"))).collect();

    // Endogenous parent sets: edges only from earlier to later declaration.
    let mut endo_parents: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.gen_range(0..=cfg.max_parents.min(i));
        let mut pool: Vec<usize> = (0..i).collect();
        let mut chosen = Vec::with_capacity(k);
        for _ in 0..k {
            let at = rng.gen_range(0..pool.len());
            chosen.push(pool.swap_remove(at));
        }
        chosen.sort_unstable();
        endo_parents.push(chosen);
    }

    // Confounders: shared exogenous parents, bounded by the enumeration cap.
    let mut exogenous: Vec<ExogenousSpec> = Vec::new();
    let mut exo_parents_of: Vec<Vec<VariableId>> = vec![Vec::new(); n];
    for (i, name) in endo_names.iter().enumerate() {
        let id = VariableId::new(format!("U_{name}"));
        exogenous.push(ExogenousSpec {
            id: id.clone(),
            domain: Domain::binary(),
            marginal: random_marginal(&mut rng),
        });
        exo_parents_of[i].push(id);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_range(0..10) < cfg.confounder_tenths {
                let states = 1u128 << (exogenous.len() as u32 + 1).min(127);
                if states > DEFAULT_STATE_CAP {
                    continue;
                }
                let id = VariableId::new(format!("U_{}_{}", endo_names[i], endo_names[j]));
                exogenous.push(ExogenousSpec {
                    id: id.clone(),
                    domain: Domain::binary(),
                    marginal: random_marginal(&mut rng),
                });
                exo_parents_of[i].push(id.clone());
                exo_parents_of[j].push(id);
            }
        }
    }

    let mut endogenous = Vec::with_capacity(n);
    for i in 0..n {
        let mut parents: Vec<VariableId> = endo_parents[i]
            .iter()
            .map(|&p| endo_names[p].clone())
            .collect();
        parents.extend(exo_parents_of[i].iter().cloned());
        let parent_sizes: Vec<usize> = parents
            .iter()
            .map(|p| {
                if p.as_str().starts_with("U_") {
                    2
                } else {
                    cfg.domain_size
                }
            })
            .collect();
        let rows_total: usize = parent_sizes.iter().product();
        let mut table = Vec::with_capacity(rows_total);
        let mut idx = vec![0usize; parents.len()];
        for _ in 0..rows_total {
            let given: Vec<String> = idx.iter().map(|&v| v.to_string()).collect();
            let out = sample_output(&mut rng, &cfg.table_fill, cfg.domain_size);
            table.push(TableRow {
                given,
                then: out.to_string(),
            });
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < parent_sizes[pos] {
                    break;
                }
                idx[pos] = 0;
            }
        }
        endogenous.push(EndogenousSpec {
            id: endo_names[i].clone(),
            domain: endo_domain.clone(),
            parents,
            table,
        });
    }

    Ok(ProbabilisticSCM {
        exogenous,
        endogenous,
    })
}

/// One d-separation-vs-oracle comparison inside a trial.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct QueryRecord {
    pub trial: usize,
    pub query: String,
    pub twin_separated: bool,
    pub teleporter_separated: bool,
    pub oracle_ci: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjustment: Option<AdjustmentRecord>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct AdjustmentRecord {
    pub adjust_set: Vec<String>,
    pub evidence: String,
    pub admissible: bool,
    pub positivity_violation: bool,
    /// Exact rational strings; equal iff `delta_zero`.
    pub estimate: Option<String>,
    pub oracle: Option<String>,
    pub delta_zero: Option<bool>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct TrialSummary {
    pub models: usize,
    pub queries: usize,
    pub teleporter_soundness_violations: usize,
    pub twin_soundness_violations: usize,
    pub dominance_violations: usize,
    pub adjustments_checked: usize,
    pub adjustment_mismatches: usize,
    pub positivity_violations: usize,
    pub consistency_failures: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct TrialReport {
    pub records: Vec<QueryRecord>,
    pub summary: TrialSummary,
}

impl TrialReport {
    /// Line-delimited rendering: one JSON record per line, summary last.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("serializable"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&self.summary).expect("serializable"));
        out.push('\n');
        out
    }

    pub fn merge(&mut self, other: TrialReport) {
        self.records.extend(other.records);
        let s = other.summary;
        self.summary.models += s.models;
        self.summary.queries += s.queries;
        self.summary.teleporter_soundness_violations += s.teleporter_soundness_violations;
        self.summary.twin_soundness_violations += s.twin_soundness_violations;
        self.summary.dominance_violations += s.dominance_violations;
        self.summary.adjustments_checked += s.adjustments_checked;
        self.summary.adjustment_mismatches += s.adjustment_mismatches;
        self.summary.positivity_violations += s.positivity_violations;
        self.summary.consistency_failures += s.consistency_failures;
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

/// Generate one model, pick a random intervention, and compare twin and
/// teleporter verdicts against the numeric oracle over `n_queries` queries.
/// Verdict disagreements are report rows, never panics.
pub fn soundness_trial(cfg: &GenConfig, n_queries: usize) -> Result<TrialReport, GenError> {
    soundness_trial_indexed(cfg, n_queries, 0)
}

fn soundness_trial_indexed(
    cfg: &GenConfig,
    n_queries: usize,
    trial: usize,
) -> Result<TrialReport, GenError> {
    let model = random_scm(cfg)?;
    // Query sampling uses its own stream so model generation stays stable.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x715E_ED01);

    let endo_ids: Vec<VariableId> = model.endogenous.iter().map(|e| e.id.clone()).collect();
    let graph = base_graph(&model)?;

    // Prefer targets with at least one endogenous descendant.
    let with_desc: Vec<VariableId> = endo_ids
        .iter()
        .filter(|id| {
            graph
                .descendants(id)
                .map(|d| d.iter().any(|v| !model.is_exogenous(v)))
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    let target = if with_desc.is_empty() {
        endo_ids[0].clone()
    } else {
        pick(&mut rng, &with_desc).clone()
    };
    let target_domain = model.domain_of(&target).expect("endogenous").clone();
    let iv = Intervention::new(
        target.clone(),
        target_domain.label(rng.gen_range(0..target_domain.len())),
    );

    let twin = build_twin(&model, &iv)?;
    let tele = build_teleporter(&model, &iv)?;
    let desc: Vec<VariableId> = tele.duplicate_bases().cloned().collect();

    let mut report = TrialReport::default();
    report.summary.models = 1;
    if !consistency_check(&model, &iv)? {
        report.summary.consistency_failures += 1;
    }

    let mut produced = 0usize;
    let mut attempts = 0usize;
    while produced < n_queries && attempts < n_queries * 20 {
        attempts += 1;
        // Counterfactual endpoint: a descendant of the target when possible.
        let b = if desc.is_empty() {
            let others: Vec<&VariableId> = endo_ids.iter().filter(|v| **v != target).collect();
            if others.is_empty() {
                break;
            }
            (*pick(&mut rng, &others)).clone()
        } else {
            pick(&mut rng, &desc).clone()
        };
        // Real endpoint: the intervened variable half the time.
        let a = if rng.gen_bool(0.5) {
            target.clone()
        } else {
            pick(&mut rng, &endo_ids).clone()
        };
        let b_tele = tele.counterfactual_node(&b)?.clone();
        if a == b || a == b_tele {
            continue;
        }
        let b_twin = twin.counterfactual_node(&b)?.clone();

        let cond: BTreeSet<VariableId> = endo_ids
            .iter()
            .filter(|v| **v != a && **v != b)
            .filter(|_| rng.gen_bool(0.4))
            .cloned()
            .collect();

        let twin_verdict = twin.graph().d_separated(&a, &b_twin, &cond)?;
        let tele_verdict = tele.graph().d_separated(&a, &b_tele, &cond)?;

        let mut cw_vars = vec![CwVar::Real(a.clone()), CwVar::Counterfactual(b.clone())];
        for c in &cond {
            cw_vars.push(CwVar::Real(c.clone()));
        }
        let joint = crossworld_joint(&model, &iv, &cw_vars)?;
        let cond_cols: Vec<VariableId> = cond.iter().cloned().collect();
        let oracle_ci = joint.check_ci_numeric(
            &a,
            &CwVar::Counterfactual(b.clone()).column_id(&iv),
            &cond_cols,
        )?;

        if tele_verdict.separated && !oracle_ci {
            report.summary.teleporter_soundness_violations += 1;
        }
        if twin_verdict.separated && !oracle_ci {
            report.summary.twin_soundness_violations += 1;
        }
        if twin_verdict.separated && !tele_verdict.separated {
            report.summary.dominance_violations += 1;
        }

        // Adjustment check: evidence from a solved context (so it has
        // positive probability), adjustment set from the teleporters.
        let adjustment = if rng.gen_bool(0.7) {
            let y_domain = model.domain_of(&b).expect("endogenous");
            let y_val = y_domain.label(rng.gen_range(0..y_domain.len())).to_owned();

            let mut u = Assignment::new();
            for exo in &model.exogenous {
                let i = rng.gen_range(0..exo.domain.len());
                u.set(exo.id.clone(), exo.domain.label(i));
            }
            let solved = model.solve(&u)?;
            let mut evidence = Assignment::new();
            for v in endo_ids.iter() {
                if *v != target && *v != b && rng.gen_bool(0.3) {
                    evidence.set(v.clone(), solved.get(v).expect("solved"));
                }
            }

            let teleporters: Vec<VariableId> = endo_ids
                .iter()
                .filter(|v| **v != target && **v != b && !desc.contains(v) && !evidence.contains(v))
                .cloned()
                .collect();
            let adjust: BTreeSet<VariableId> = teleporters
                .into_iter()
                .filter(|_| rng.gen_bool(0.5))
                .collect();

            let evidence_vars: BTreeSet<VariableId> = evidence.variables().cloned().collect();
            let verdict = counterfactual_criterion(&model, &iv, &b, &evidence_vars, &adjust)?;
            let mut record = AdjustmentRecord {
                adjust_set: adjust.iter().map(|v| v.to_string()).collect(),
                evidence: evidence.to_string(),
                admissible: verdict.satisfied,
                positivity_violation: false,
                estimate: None,
                oracle: None,
                delta_zero: None,
            };
            if verdict.satisfied {
                match adjustment_estimate(&model, &iv, (&b, &y_val), &evidence, &adjust) {
                    Ok(estimate) => {
                        let oracle =
                            abduction_action_prediction(&model, &iv, (&b, &y_val), &evidence)?;
                        record.delta_zero = Some(estimate == oracle);
                        record.estimate = Some(format_ratio(&estimate));
                        record.oracle = Some(format_ratio(&oracle));
                        report.summary.adjustments_checked += 1;
                        if estimate != oracle {
                            report.summary.adjustment_mismatches += 1;
                        }
                    }
                    Err(InferenceError::PositivityViolation { .. }) => {
                        record.positivity_violation = true;
                        report.summary.positivity_violations += 1;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Some(record)
        } else {
            None
        };

        let cond_desc: Vec<String> = cond.iter().map(|v| v.to_string()).collect();
        report.records.push(QueryRecord {
            trial,
            query: format!("{a} _||_ {b_tele} | {{{}}} under {iv}", cond_desc.join(",")),
            twin_separated: twin_verdict.separated,
            teleporter_separated: tele_verdict.separated,
            oracle_ci,
            adjustment,
        });
        report.summary.queries += 1;
        produced += 1;
    }
    Ok(report)
}

/// Run `n_models` independent trials with per-trial derived seeds, merging
/// the reports in trial order.
pub fn run_trials(
    base: &GenConfig,
    n_models: usize,
    n_queries: usize,
) -> Result<TrialReport, GenError> {
    let mut report = TrialReport::default();
    for t in 0..n_models {
        let cfg = GenConfig {
            seed: base
                .seed
                .wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..base.clone()
        };
        report.merge(soundness_trial_indexed(&cfg, n_queries, t)?);
    }
    report.summary.models = n_models;
    Ok(report)
}
