//! Derived worlds: intervened models, twin networks, and teleporter-merged
//! cross-world graphs.
//!
//! The twin construction duplicates every endogenous variable and shares the
//! exogenous nodes between copies. The teleporter construction duplicates
//! only the descendants of the intervened variable and connects the worlds
//! through the shared non-descendants (the teleporters), removing exogenous
//! nodes that would only re-introduce paths the merge already represents.

use crate::graph::{CausalGraph, GraphError, NodeKind};
use crate::scm::{Assignment, Domain, EndogenousSpec, ProbabilisticSCM, ScmError, VariableId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Atomic intervention do(target = value) on one endogenous variable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Intervention {
    pub target: VariableId,
    pub value: String,
}

impl Intervention {
    pub fn new(target: impl Into<VariableId>, value: impl Into<String>) -> Self {
        Intervention {
            target: target.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "do({}={})", self.target, self.value)
    }
}

/// Name of the counterfactual duplicate of `base` under `iv`.
///
/// The suffix is mechanical and collision-checked at build time, so the
/// duplicate namespace never clashes with model variables.
pub fn duplicate_id(base: &VariableId, iv: &Intervention) -> VariableId {
    VariableId::new(format!("{}_do_{}={}", base, iv.target, iv.value))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WorldMethod {
    Twin,
    Teleporter,
}

impl fmt::Display for WorldMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorldMethod::Twin => write!(f, "twin"),
            WorldMethod::Teleporter => write!(f, "teleporter"),
        }
    }
}

/// Role of a node in a merged cross-world graph.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NodeRole {
    /// Real-world endogenous node.
    Real,
    /// Counterfactual copy of the named base node.
    CounterfactualDuplicateOf(VariableId),
    /// Shared node with identical structural equations in both worlds.
    Teleporter,
    /// Exogenous node feeding both worlds.
    SharedExogenous,
    /// Exogenous node whose influence is confined to the real world.
    RealOnlyExogenous,
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRole::Real => write!(f, "real"),
            NodeRole::CounterfactualDuplicateOf(v) => write!(f, "counterfactual-duplicate-of({v})"),
            NodeRole::Teleporter => write!(f, "teleporter"),
            NodeRole::SharedExogenous => write!(f, "shared-exogenous"),
            NodeRole::RealOnlyExogenous => write!(f, "real-only-exogenous"),
        }
    }
}

#[derive(Clone, PartialEq, Debug, thiserror::Error)]
pub enum WorldError {
    #[error("cannot intervene on exogenous variable {0}")]
    InterveneOnExogenous(VariableId),
    #[error("unknown variable {0}")]
    UnknownVariable(VariableId),
    #[error("value {value:?} not in the domain of {variable}")]
    ValueNotInDomain { variable: VariableId, value: String },
    #[error("model is invalid: {0}")]
    InvalidModel(String),
    #[error("duplicate name {0} collides with an existing variable")]
    NameCollision(VariableId),
    #[error("counterfactual of the intervened variable {0} is the intervention constant")]
    ConstantCounterfactual(VariableId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scm(#[from] ScmError),
}

fn validated(model: &ProbabilisticSCM) -> Result<(), WorldError> {
    let report = model.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(WorldError::InvalidModel(report.to_string()))
    }
}

fn check_intervention(model: &ProbabilisticSCM, iv: &Intervention) -> Result<Domain, WorldError> {
    if model.is_exogenous(&iv.target) {
        return Err(WorldError::InterveneOnExogenous(iv.target.clone()));
    }
    let spec = model
        .endogenous_spec(&iv.target)
        .ok_or_else(|| WorldError::UnknownVariable(iv.target.clone()))?;
    if spec.domain.index_of(&iv.value).is_none() {
        return Err(WorldError::ValueNotInDomain {
            variable: iv.target.clone(),
            value: iv.value.clone(),
        });
    }
    Ok(spec.domain.clone())
}

/// The DAG induced by a model: exogenous roots plus endogenous nodes with
/// edges from every parent.
pub fn base_graph(model: &ProbabilisticSCM) -> Result<CausalGraph, WorldError> {
    validated(model)?;
    let mut nodes = Vec::new();
    for exo in &model.exogenous {
        nodes.push((exo.id.clone(), NodeKind::Exogenous));
    }
    for endo in &model.endogenous {
        nodes.push((endo.id.clone(), NodeKind::Endogenous));
    }
    let mut edges = Vec::new();
    for endo in &model.endogenous {
        for p in &endo.parents {
            edges.push((p.clone(), endo.id.clone()));
        }
    }
    Ok(CausalGraph::new(nodes, edges)?)
}

/// Graph mutilation: replace the target's equation with the constant value
/// and empty its parent list. Everything else is untouched.
pub fn intervene(
    model: &ProbabilisticSCM,
    iv: &Intervention,
) -> Result<ProbabilisticSCM, WorldError> {
    validated(model)?;
    let domain = check_intervention(model, iv)?;
    let mut out = model.clone();
    for endo in &mut out.endogenous {
        if endo.id == iv.target {
            *endo = EndogenousSpec::constant(iv.target.clone(), domain.clone(), &iv.value);
        }
    }
    Ok(out)
}

/// Merged cross-world graph plus the bookkeeping that maps nodes back to the
/// base model.
#[derive(Clone, PartialEq, Debug)]
pub struct CrossWorldGraph {
    graph: CausalGraph,
    method: WorldMethod,
    intervention: Intervention,
    roles: BTreeMap<VariableId, NodeRole>,
    /// Base endogenous node -> its counterfactual duplicate node, when one
    /// exists in this graph.
    duplicates: BTreeMap<VariableId, VariableId>,
}

impl CrossWorldGraph {
    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn method(&self) -> WorldMethod {
        self.method
    }

    pub fn intervention(&self) -> &Intervention {
        &self.intervention
    }

    pub fn role_of(&self, id: &VariableId) -> Option<&NodeRole> {
        self.roles.get(id)
    }

    pub fn roles(&self) -> impl Iterator<Item = (&VariableId, &NodeRole)> {
        self.roles.iter()
    }

    /// Duplicate node of a base endogenous variable, if materialized.
    pub fn duplicate_of(&self, base: &VariableId) -> Option<&VariableId> {
        self.duplicates.get(base)
    }

    pub fn duplicate_bases(&self) -> impl Iterator<Item = &VariableId> {
        self.duplicates.keys()
    }

    /// True when the intervention target has no descendants, so every
    /// counterfactual variable coincides with its real counterpart.
    pub fn is_counterfactually_trivial(&self) -> bool {
        self.duplicates.is_empty()
    }

    /// Resolve the node standing for the counterfactual value of `base`.
    ///
    /// Descendants of the target resolve to their duplicates; in the
    /// teleporter graph every other variable is shared with the real world
    /// and resolves to itself. Asking for the intervened variable in the
    /// teleporter graph is an error: its counterfactual value is the
    /// intervention constant, which is not a node.
    pub fn counterfactual_node(&self, base: &VariableId) -> Result<&VariableId, WorldError> {
        if let Some(dup) = self.duplicates.get(base) {
            return Ok(dup);
        }
        match self.roles.get_key_value(base) {
            // Exogenous contexts are shared between worlds in both methods.
            Some((k, NodeRole::SharedExogenous))
            | Some((k, NodeRole::RealOnlyExogenous))
            | Some((k, NodeRole::Teleporter)) => Ok(k),
            Some((k, NodeRole::Real)) => {
                if base == &self.intervention.target {
                    Err(WorldError::ConstantCounterfactual(base.clone()))
                } else {
                    // Teleporter graph of a trivial intervention: Y_x ≡ Y.
                    Ok(k)
                }
            }
            _ => Err(WorldError::UnknownVariable(base.clone())),
        }
    }
}

fn check_collisions(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    bases: impl Iterator<Item = VariableId>,
) -> Result<(), WorldError> {
    let names: BTreeSet<&str> = model.variable_ids().map(VariableId::as_str).collect();
    for base in bases {
        let dup = duplicate_id(&base, iv);
        if names.contains(dup.as_str()) {
            return Err(WorldError::NameCollision(dup));
        }
    }
    Ok(())
}

/// Twin network: duplicate every endogenous variable, share the exogenous
/// nodes between both copies, and remove all arrows into the duplicate of
/// the intervened variable.
pub fn build_twin(
    model: &ProbabilisticSCM,
    iv: &Intervention,
) -> Result<CrossWorldGraph, WorldError> {
    validated(model)?;
    check_intervention(model, iv)?;
    check_collisions(model, iv, model.endogenous.iter().map(|e| e.id.clone()))?;

    let mut nodes = Vec::new();
    let mut roles = BTreeMap::new();
    let mut duplicates = BTreeMap::new();
    for exo in &model.exogenous {
        nodes.push((exo.id.clone(), NodeKind::Exogenous));
        roles.insert(exo.id.clone(), NodeRole::SharedExogenous);
    }
    for endo in &model.endogenous {
        nodes.push((endo.id.clone(), NodeKind::Endogenous));
        roles.insert(endo.id.clone(), NodeRole::Real);
    }
    for endo in &model.endogenous {
        let dup = duplicate_id(&endo.id, iv);
        nodes.push((dup.clone(), NodeKind::CounterfactualDuplicate));
        roles.insert(
            dup.clone(),
            NodeRole::CounterfactualDuplicateOf(endo.id.clone()),
        );
        duplicates.insert(endo.id.clone(), dup);
    }

    let mut edges = Vec::new();
    for endo in &model.endogenous {
        for p in &endo.parents {
            edges.push((p.clone(), endo.id.clone()));
        }
        if endo.id != iv.target {
            let dup = duplicates[&endo.id].clone();
            for p in &endo.parents {
                if model.is_exogenous(p) {
                    edges.push((p.clone(), dup.clone()));
                } else {
                    edges.push((duplicates[p].clone(), dup.clone()));
                }
            }
        }
    }

    Ok(CrossWorldGraph {
        graph: CausalGraph::new(nodes, edges)?,
        method: WorldMethod::Twin,
        intervention: iv.clone(),
        roles,
        duplicates,
    })
}

/// Endogenous teleporters plus retained-shared exogenous teleporters: every
/// variable whose structural equation is identical in both worlds and which
/// appears as a shared connecting node in the merged graph.
pub fn find_teleporters(
    model: &ProbabilisticSCM,
    iv: &Intervention,
) -> Result<BTreeSet<VariableId>, WorldError> {
    let g = build_teleporter(model, iv)?;
    Ok(g.roles
        .iter()
        .filter(|(_, role)| matches!(role, NodeRole::Teleporter))
        .map(|(id, _)| id.clone())
        .collect())
}

/// Teleporter construction (the merged cross-world graph).
///
/// Rule 1: exactly the descendants of the target gain counterfactual
/// duplicates; the target itself is replaced by the intervention constant and
/// is not materialized on the counterfactual side.
///
/// Rule 2 (exogenous classification, generalized beyond the canonical
/// one-exogenous-per-endogenous form):
/// - all children are teleporters and there is exactly one child: removed;
/// - two or more children, all teleporters: retained as a shared teleporter
///   (removal would sever a confounding path);
/// - at least one child in {target} ∪ descendants(target): retained; it
///   additionally parents the duplicates of its descendant children.
pub fn build_teleporter(
    model: &ProbabilisticSCM,
    iv: &Intervention,
) -> Result<CrossWorldGraph, WorldError> {
    validated(model)?;
    check_intervention(model, iv)?;

    let base = base_graph(model)?;
    let desc = base.descendants(&iv.target)?;
    check_collisions(model, iv, desc.iter().cloned())?;

    let is_teleporter_endo = |id: &VariableId| -> bool {
        !model.is_exogenous(id) && id != &iv.target && !desc.contains(id)
    };

    let mut nodes = Vec::new();
    let mut roles = BTreeMap::new();
    let mut duplicates = BTreeMap::new();
    let mut removed_exo: BTreeSet<VariableId> = BTreeSet::new();

    for exo in &model.exogenous {
        let children: Vec<&VariableId> = base.children_of(&exo.id)?;
        let all_tele = !children.is_empty() && children.iter().all(|c| is_teleporter_endo(c));
        let role = if desc.is_empty() {
            // Degenerate intervention: no descendants, real graph unchanged.
            if all_tele || children.is_empty() {
                NodeRole::Teleporter
            } else {
                NodeRole::RealOnlyExogenous
            }
        } else if all_tele && children.len() == 1 {
            removed_exo.insert(exo.id.clone());
            continue;
        } else if all_tele || children.is_empty() {
            NodeRole::Teleporter
        } else if children
            .iter()
            .any(|c| desc.contains(c) || is_teleporter_endo(c))
        {
            NodeRole::SharedExogenous
        } else {
            // Children are the target only.
            NodeRole::RealOnlyExogenous
        };
        nodes.push((exo.id.clone(), NodeKind::Exogenous));
        roles.insert(exo.id.clone(), role);
    }

    for endo in &model.endogenous {
        let (kind, role) = if is_teleporter_endo(&endo.id) {
            (NodeKind::TeleporterShared, NodeRole::Teleporter)
        } else {
            (NodeKind::Endogenous, NodeRole::Real)
        };
        nodes.push((endo.id.clone(), kind));
        roles.insert(endo.id.clone(), role);
    }
    for endo in &model.endogenous {
        if desc.contains(&endo.id) {
            let dup = duplicate_id(&endo.id, iv);
            nodes.push((dup.clone(), NodeKind::CounterfactualDuplicate));
            roles.insert(
                dup.clone(),
                NodeRole::CounterfactualDuplicateOf(endo.id.clone()),
            );
            duplicates.insert(endo.id.clone(), dup);
        }
    }

    let mut edges = Vec::new();
    for endo in &model.endogenous {
        // Real side: base edges minus those from removed exogenous nodes.
        for p in &endo.parents {
            if !removed_exo.contains(p) {
                edges.push((p.clone(), endo.id.clone()));
            }
        }
        // Counterfactual side.
        if let Some(dup) = duplicates.get(&endo.id) {
            for p in &endo.parents {
                if p == &iv.target {
                    continue; // hard-coded intervention constant
                }
                if let Some(pdup) = duplicates.get(p) {
                    edges.push((pdup.clone(), dup.clone()));
                } else {
                    // Teleporter or retained exogenous parent, shared node.
                    debug_assert!(!removed_exo.contains(p));
                    edges.push((p.clone(), dup.clone()));
                }
            }
        }
    }

    Ok(CrossWorldGraph {
        graph: CausalGraph::new(nodes, edges)?,
        method: WorldMethod::Teleporter,
        intervention: iv.clone(),
        roles,
        duplicates,
    })
}

/// A cross-world graph together with executable semantics: for every
/// exogenous context the joint real and counterfactual solution.
#[derive(Clone, PartialEq, Debug)]
pub struct CrossWorldModel {
    base: ProbabilisticSCM,
    intervened: ProbabilisticSCM,
    graph: CrossWorldGraph,
}

impl CrossWorldModel {
    pub fn new(model: &ProbabilisticSCM, iv: &Intervention) -> Result<Self, WorldError> {
        Ok(CrossWorldModel {
            base: model.clone(),
            intervened: intervene(model, iv)?,
            graph: build_teleporter(model, iv)?,
        })
    }

    pub fn base(&self) -> &ProbabilisticSCM {
        &self.base
    }

    pub fn intervened(&self) -> &ProbabilisticSCM {
        &self.intervened
    }

    pub fn graph(&self) -> &CrossWorldGraph {
        &self.graph
    }

    pub fn intervention(&self) -> &Intervention {
        self.graph.intervention()
    }

    /// Real-world and counterfactual solutions under one shared context `u`.
    pub fn solve_pair(&self, u: &Assignment) -> Result<(Assignment, Assignment), WorldError> {
        let real = self.base.solve(u)?;
        let counterfactual = self.intervened.solve(u)?;
        Ok((real, counterfactual))
    }
}
