//! Exact cross-world probability computation: the enumeration oracle over
//! exogenous contexts, abduction-action-prediction, the counterfactual
//! criterion, and the cross-world adjustment formula.
//!
//! Every probability here is an exact rational; all equality checks are
//! zero-tolerance.

use crate::graph::Path;
use crate::scm::{
    Assignment, ProbabilisticSCM, ScmError, Solver, VarRef, VariableId, DEFAULT_STATE_CAP,
};
use crate::table::{JointTable, TableError};
use crate::world::{build_teleporter, duplicate_id, intervene, Intervention, WorldError};
use num::{BigRational, Zero};
use std::collections::BTreeSet;
use std::fmt;

/// A variable addressed in the cross-world joint: either its real-world
/// value or its counterfactual value under the query intervention.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum CwVar {
    Real(VariableId),
    Counterfactual(VariableId),
}

impl CwVar {
    pub fn base(&self) -> &VariableId {
        match self {
            CwVar::Real(v) | CwVar::Counterfactual(v) => v,
        }
    }

    /// Column name used in joint tables. Counterfactual columns reuse the
    /// duplicate-node naming so they are query-addressable.
    pub fn column_id(&self, iv: &Intervention) -> VariableId {
        match self {
            CwVar::Real(v) => v.clone(),
            CwVar::Counterfactual(v) => duplicate_id(v, iv),
        }
    }
}

impl fmt::Display for CwVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CwVar::Real(v) => write!(f, "{v}"),
            CwVar::Counterfactual(v) => write!(f, "{v}*"),
        }
    }
}

/// Verdict of the counterfactual criterion (d-separation of X and Y_x given
/// E ∪ Z in the teleporter cross-world graph).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CriterionVerdict {
    pub satisfied: bool,
    pub separating_set_used: BTreeSet<VariableId>,
    /// An unblocked path, present exactly when the criterion fails.
    pub witness_path: Option<Path>,
}

#[derive(Debug, thiserror::Error)]
pub enum InferenceError {
    #[error("evidence has zero probability")]
    ZeroProbabilityEvidence,
    #[error("adjustment set not admissible: {witness}")]
    AdjustmentNotAdmissible { witness: String },
    #[error("positivity violation at slice {slice}")]
    PositivityViolation { slice: String },
    #[error("unknown variable {0}")]
    UnknownVariable(VariableId),
    #[error("value {value:?} not in the domain of {variable}")]
    ValueNotInDomain { variable: VariableId, value: String },
    #[error("fixture shape mismatch: {0}")]
    FixtureShapeMismatch(String),
    #[error("exact identity violated: {0}")]
    IdentityViolated(String),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Pair of solvers over the same exogenous context space: the base model and
/// its mutilation under one intervention.
struct WorldPair<'m> {
    base: Solver<'m>,
    counterfactual: Solver<'m>,
}

impl<'m> WorldPair<'m> {
    fn new(
        model: &'m ProbabilisticSCM,
        intervened: &'m ProbabilisticSCM,
    ) -> Result<Self, InferenceError> {
        Ok(WorldPair {
            base: Solver::new(model)?,
            counterfactual: Solver::new(intervened)?,
        })
    }
}

fn resolve_value_index(
    model: &ProbabilisticSCM,
    var: &VariableId,
    value: &str,
) -> Result<usize, InferenceError> {
    let domain = model
        .domain_of(var)
        .ok_or_else(|| InferenceError::UnknownVariable(var.clone()))?;
    domain
        .index_of(value)
        .ok_or_else(|| InferenceError::ValueNotInDomain {
            variable: var.clone(),
            value: value.to_owned(),
        })
}

/// Exact joint over real and counterfactual variables: for every exogenous
/// context `u`, the mass P(u) accumulates onto the tuple (V(u), V_x(u))
/// restricted to `vars`.
pub fn crossworld_joint(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    vars: &[CwVar],
) -> Result<JointTable, InferenceError> {
    crossworld_joint_with_cap(model, iv, vars, DEFAULT_STATE_CAP)
}

pub fn crossworld_joint_with_cap(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    vars: &[CwVar],
    cap: u128,
) -> Result<JointTable, InferenceError> {
    let intervened = intervene(model, iv)?;
    let pair = WorldPair::new(model, &intervened)?;

    let mut table_vars = Vec::with_capacity(vars.len());
    let mut accessors = Vec::with_capacity(vars.len());
    for v in vars {
        let base = v.base();
        let domain = model
            .domain_of(base)
            .ok_or_else(|| InferenceError::UnknownVariable(base.clone()))?;
        table_vars.push((v.column_id(iv), domain.clone()));
        let var_ref = pair.base.var_ref(base).expect("checked");
        accessors.push((v.clone(), var_ref));
    }
    let mut table = JointTable::new(table_vars);
    pair.base.for_each_u(cap, |u_idx, weight| {
        let real_idx = pair.base.solve_indices(u_idx);
        let cf_idx = pair.counterfactual.solve_indices(u_idx);
        let key: Vec<usize> = accessors
            .iter()
            .map(|(v, r)| match (v, r) {
                (_, VarRef::Exo(i)) => u_idx[*i],
                (CwVar::Real(_), VarRef::Endo(i)) => real_idx[*i],
                (CwVar::Counterfactual(_), VarRef::Endo(i)) => cf_idx[*i],
            })
            .collect();
        table.add_mass(key, weight.clone());
    })?;
    Ok(table)
}

/// P(Y_x = y | e) by the three-step recipe: condition P(u) on the real-world
/// evidence, mutilate the model, and sum the updated weights where the
/// counterfactual solution hits the target.
pub fn abduction_action_prediction(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    target: (&VariableId, &str),
    evidence: &Assignment,
) -> Result<BigRational, InferenceError> {
    abduction_action_prediction_with_cap(model, iv, target, evidence, DEFAULT_STATE_CAP)
}

pub fn abduction_action_prediction_with_cap(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    target: (&VariableId, &str),
    evidence: &Assignment,
    cap: u128,
) -> Result<BigRational, InferenceError> {
    let intervened = intervene(model, iv)?;
    let pair = WorldPair::new(model, &intervened)?;

    let (y_var, y_val) = target;
    let y_idx = resolve_value_index(model, y_var, y_val)?;
    let y_ref = pair.base.var_ref(y_var).expect("checked");

    let mut evidence_refs = Vec::with_capacity(evidence.len());
    for (var, value) in evidence.iter() {
        let idx = resolve_value_index(model, var, value)?;
        evidence_refs.push((pair.base.var_ref(var).expect("checked"), idx));
    }

    let mut total = BigRational::zero();
    let mut hit = BigRational::zero();
    pair.base.for_each_u(cap, |u_idx, weight| {
        let real_idx = pair.base.solve_indices(u_idx);
        let value_of = |r: &VarRef| match *r {
            VarRef::Exo(i) => u_idx[i],
            VarRef::Endo(i) => real_idx[i],
        };
        if !evidence_refs.iter().all(|(r, want)| value_of(r) == *want) {
            return;
        }
        total += weight;
        let cf_idx = pair.counterfactual.solve_indices(u_idx);
        let cf_value = match y_ref {
            VarRef::Exo(i) => u_idx[i],
            VarRef::Endo(i) => cf_idx[i],
        };
        if cf_value == y_idx {
            hit += weight;
        }
    })?;
    if total.is_zero() {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }
    Ok(hit / total)
}

/// Theorem-style counterfactual criterion: satisfied iff X and Y_x are
/// d-separated given E ∪ Z in the teleporter cross-world graph.
pub fn counterfactual_criterion(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    target_var: &VariableId,
    evidence_vars: &BTreeSet<VariableId>,
    adjust: &BTreeSet<VariableId>,
) -> Result<CriterionVerdict, InferenceError> {
    let cw = build_teleporter(model, iv)?;
    let y_node = cw.counterfactual_node(target_var)?.clone();
    let mut cond: BTreeSet<VariableId> = BTreeSet::new();
    for v in evidence_vars.iter().chain(adjust.iter()) {
        if !model.domain_of(v).is_some() {
            return Err(InferenceError::UnknownVariable(v.clone()));
        }
        cond.insert(v.clone());
    }
    let verdict = cw
        .graph()
        .d_separated(&iv.target, &y_node, &cond)
        .map_err(WorldError::from)?;
    Ok(CriterionVerdict {
        satisfied: verdict.separated,
        separating_set_used: cond,
        witness_path: verdict.witness,
    })
}

/// Cross-world adjustment: Σ_z P(Y=y | Z=z, X=x, E=e) · P(Z=z | E=e),
/// computed from the observational distribution alone.
///
/// Slices with P(Z=z | E=e) = 0 contribute nothing; a slice with positive
/// weight but P(X=x, Z=z, E=e) = 0 is a positivity violation and errors.
pub fn adjustment_estimate(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    target: (&VariableId, &str),
    evidence: &Assignment,
    adjust: &BTreeSet<VariableId>,
) -> Result<BigRational, InferenceError> {
    adjustment_estimate_with_cap(model, iv, target, evidence, adjust, DEFAULT_STATE_CAP)
}

pub fn adjustment_estimate_with_cap(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    target: (&VariableId, &str),
    evidence: &Assignment,
    adjust: &BTreeSet<VariableId>,
    cap: u128,
) -> Result<BigRational, InferenceError> {
    let (y_var, y_val) = target;
    let evidence_vars: BTreeSet<VariableId> = evidence.variables().cloned().collect();
    let verdict = counterfactual_criterion(model, iv, y_var, &evidence_vars, adjust)?;
    if !verdict.satisfied {
        let witness = verdict
            .witness_path
            .map(|p| p.to_string())
            .unwrap_or_else(|| "d-connected".to_owned());
        return Err(InferenceError::AdjustmentNotAdmissible { witness });
    }

    // Observational joint over Y, X, Z, E.
    let mut joint_vars: Vec<VariableId> = vec![y_var.clone(), iv.target.clone()];
    for z in adjust {
        if !joint_vars.contains(z) {
            joint_vars.push(z.clone());
        }
    }
    for e in evidence.variables() {
        if !joint_vars.contains(e) {
            joint_vars.push(e.clone());
        }
    }
    let joint = model.observational_joint_with_cap(&joint_vars, cap)?;

    resolve_value_index(model, y_var, y_val)?;
    let e_event: Vec<(VariableId, String)> = evidence
        .iter()
        .map(|(v, val)| (v.clone(), val.to_owned()))
        .collect();
    let p_e = joint.prob(&e_event)?;
    if p_e.is_zero() {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }

    let adjust_vars: Vec<VariableId> = adjust.iter().cloned().collect();
    let adjust_domains: Vec<_> = adjust_vars
        .iter()
        .map(|z| model.domain_of(z).expect("checked by criterion").clone())
        .collect();

    let mut total = BigRational::zero();
    let mut z_idx = vec![0usize; adjust_vars.len()];
    loop {
        let z_event: Vec<(VariableId, String)> = adjust_vars
            .iter()
            .zip(&adjust_domains)
            .zip(&z_idx)
            .map(|((v, d), &i)| (v.clone(), d.label(i).to_owned()))
            .collect();

        let mut ze_event = z_event.clone();
        ze_event.extend(e_event.iter().cloned());
        let p_ze = joint.prob(&ze_event)?;
        if !p_ze.is_zero() {
            let mut xze_event = ze_event.clone();
            xze_event.push((iv.target.clone(), iv.value.clone()));
            let p_xze = joint.prob(&xze_event)?;
            if p_xze.is_zero() {
                let slice = z_event
                    .iter()
                    .map(|(v, val)| format!("{v}={val}"))
                    .collect::<Vec<_>>()
                    .join(",");
                return Err(InferenceError::PositivityViolation {
                    slice: if slice.is_empty() {
                        "{}".to_owned()
                    } else {
                        slice
                    },
                });
            }
            let mut yxze_event = xze_event.clone();
            yxze_event.push((y_var.clone(), y_val.to_owned()));
            let p_yxze = joint.prob(&yxze_event)?;
            // P(y | z, x, e) * P(z | e)
            total += (p_yxze / &p_xze) * (&p_ze / &p_e);
        }

        // Mixed-radix increment over the adjustment domains.
        let mut pos = z_idx.len();
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            z_idx[pos] += 1;
            if z_idx[pos] < adjust_domains[pos].len() {
                break;
            }
            z_idx[pos] = 0;
        }
    }
}

/// Consistency condition: whenever the real world already has X(u) = x,
/// the counterfactual solution under do(X=x) coincides with the real one on
/// every variable.
pub fn consistency_check(
    model: &ProbabilisticSCM,
    iv: &Intervention,
) -> Result<bool, InferenceError> {
    consistency_check_with_cap(model, iv, DEFAULT_STATE_CAP)
}

pub fn consistency_check_with_cap(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    cap: u128,
) -> Result<bool, InferenceError> {
    let intervened = intervene(model, iv)?;
    let pair = WorldPair::new(model, &intervened)?;
    let x_ref = pair
        .base
        .var_ref(&iv.target)
        .ok_or_else(|| InferenceError::UnknownVariable(iv.target.clone()))?;
    let x_idx = resolve_value_index(model, &iv.target, &iv.value)?;

    let mut ok = true;
    pair.base.for_each_u(cap, |u_idx, _| {
        if !ok {
            return;
        }
        let real_idx = pair.base.solve_indices(u_idx);
        let x_val = match x_ref {
            VarRef::Exo(i) => u_idx[i],
            VarRef::Endo(i) => real_idx[i],
        };
        if x_val == x_idx {
            let cf_idx = pair.counterfactual.solve_indices(u_idx);
            if cf_idx != real_idx {
                ok = false;
            }
        }
    })?;
    Ok(ok)
}

/// Counterfactual conditional probability for the four-variable OOD fixture:
/// P(Y_x = y | X = x') = Σ_e P(Y_x = y | X = x, E = e) · P(E = e | X = x'),
/// computed from observational quantities (using consistency for the inner
/// conditional) and verified exactly against the enumeration oracle.
///
/// Returns the conditional distribution over the counterfactual label as a
/// single-column table.
pub fn graphood_eq7(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    x_prime: &str,
) -> Result<JointTable, InferenceError> {
    let e_var = VariableId::new("E");
    let y_var = VariableId::new("Y");
    for v in [&e_var, &y_var, &iv.target] {
        if model.domain_of(v).is_none() {
            return Err(InferenceError::FixtureShapeMismatch(format!(
                "variable {v} missing"
            )));
        }
    }
    resolve_value_index(model, &iv.target, x_prime)?;

    // The fixture must certify X ⊥ Y_x | E on the teleporter graph.
    let verdict = counterfactual_criterion(
        model,
        iv,
        &y_var,
        &BTreeSet::from([e_var.clone()]),
        &BTreeSet::new(),
    )?;
    if !verdict.satisfied {
        return Err(InferenceError::FixtureShapeMismatch(format!(
            "{} and the counterfactual of {} are not d-separated given {}",
            iv.target, y_var, e_var
        )));
    }

    let joint = model.observational_joint(&[y_var.clone(), iv.target.clone(), e_var.clone()])?;
    let p_xp = joint.prob(&[(iv.target.clone(), x_prime.to_owned())])?;
    if p_xp.is_zero() {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }

    let y_domain = model.domain_of(&y_var).expect("checked").clone();
    let e_domain = model.domain_of(&e_var).expect("checked").clone();
    let mut out = JointTable::new(vec![(duplicate_id(&y_var, iv), y_domain.clone())]);
    for (yi, y_val) in y_domain.values().iter().enumerate() {
        let mut sum = BigRational::zero();
        for e_val in e_domain.values() {
            let e_xp = joint.prob(&[
                (e_var.clone(), e_val.clone()),
                (iv.target.clone(), x_prime.to_owned()),
            ])?;
            if e_xp.is_zero() {
                continue;
            }
            let p_xe = joint.prob(&[
                (iv.target.clone(), iv.value.clone()),
                (e_var.clone(), e_val.clone()),
            ])?;
            if p_xe.is_zero() {
                return Err(InferenceError::PositivityViolation {
                    slice: format!("{e_var}={e_val}"),
                });
            }
            let p_yxe = joint.prob(&[
                (y_var.clone(), y_val.clone()),
                (iv.target.clone(), iv.value.clone()),
                (e_var.clone(), e_val.clone()),
            ])?;
            // P(Y_x=y | X=x, E=e) = P(Y=y | X=x, E=e) by consistency.
            sum += (p_yxe / &p_xe) * (e_xp / &p_xp);
        }
        out.add_mass(vec![yi], sum);
    }

    // Exact cross-check against the enumeration oracle.
    let cw = crossworld_joint(
        model,
        iv,
        &[
            CwVar::Counterfactual(y_var.clone()),
            CwVar::Real(iv.target.clone()),
        ],
    )?;
    let yx_col = duplicate_id(&y_var, iv);
    for y_val in y_domain.values() {
        let oracle = cw.prob(&[
            (yx_col.clone(), y_val.clone()),
            (iv.target.clone(), x_prime.to_owned()),
        ])? / &p_xp;
        let formula = out.prob(&[(yx_col.clone(), y_val.clone())])?;
        if oracle != formula {
            return Err(InferenceError::IdentityViolated(format!(
                "counterfactual conditional for {y_var}={y_val}: formula {} vs oracle {}",
                crate::rational::format_ratio(&formula),
                crate::rational::format_ratio(&oracle)
            )));
        }
    }
    Ok(out)
}
