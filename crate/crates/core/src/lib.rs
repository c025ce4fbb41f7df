//! Exact engine for counterfactual reasoning in discrete structural causal
//! models: model validation and solving, cross-world graph construction by
//! twin-network or teleporter duplication, d-separation with witness paths,
//! counterfactual probability queries in exact rational arithmetic, and a
//! randomized soundness harness comparing graph verdicts to enumeration.

pub mod dot;
pub mod fixtures;
pub mod genrand;
pub mod graph;
pub mod inference;
pub mod rational;
pub mod scm;
pub mod table;
pub mod world;

pub use dot::{export_dot, export_dot_crossworld};
pub use graph::{CausalGraph, GraphError, NodeKind, Path, SeparationVerdict, StepDir};
pub use inference::{
    abduction_action_prediction, adjustment_estimate, consistency_check, counterfactual_criterion,
    crossworld_joint, graphood_eq7, CriterionVerdict, CwVar, InferenceError,
};
pub use rational::{approx_f64, format_ratio, parse_ratio, RatioParseError};
pub use scm::{
    parse_model, render, Assignment, Domain, EndogenousSpec, ExogenousSpec, ProbabilisticSCM,
    ScmError, TableRow, ValidationReport, VariableId, Violation, DEFAULT_STATE_CAP,
};
pub use table::{JointTable, TableError};
pub use world::{
    base_graph, build_teleporter, build_twin, duplicate_id, intervene, CrossWorldGraph,
    CrossWorldModel, Intervention, NodeRole, WorldError, WorldMethod,
};
