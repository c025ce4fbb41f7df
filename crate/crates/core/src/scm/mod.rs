//! Discrete structural causal models: variables, deterministic equation
//! tables, exogenous marginals, validation, and exact solving.
//!
//! All randomness lives in the product distribution over the exogenous
//! variables; every structural equation is a total lookup table over its
//! parents' domains. Probabilities are exact rationals throughout.

mod format;

pub use format::{parse_model, render, ParseError};

use crate::table::JointTable;
use num::{BigRational, One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Joint exogenous state count above which enumeration refuses to run.
pub const DEFAULT_STATE_CAP: u128 = 1 << 20;

/// Name of a model variable. Duplicate (counterfactual) node names are
/// derived mechanically from base names, see `world::duplicate_id`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(String);

impl VariableId {
    pub fn new(name: impl Into<String>) -> Self {
        VariableId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VariableId({:?})", self.0)
    }
}

impl From<&str> for VariableId {
    fn from(s: &str) -> Self {
        VariableId::new(s)
    }
}

/// Ordered finite set of discrete value labels.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Domain {
    values: Vec<String>,
}

impl Domain {
    pub fn new(values: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Domain {
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    /// The default binary domain `{"0", "1"}`.
    pub fn binary() -> Self {
        Domain::new(["0", "1"])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.values[idx]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

/// Exogenous variable: a root node with an exact marginal distribution.
#[derive(Clone, PartialEq, Debug)]
pub struct ExogenousSpec {
    pub id: VariableId,
    pub domain: Domain,
    /// Probabilities aligned with `domain.values()`.
    pub marginal: Vec<BigRational>,
}

/// One row of an equation table: a joint parent-value tuple and the output.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TableRow {
    pub given: Vec<String>,
    pub then: String,
}

/// Endogenous variable: deterministic function of its parents, given as a
/// total lookup table over the Cartesian product of parent domains.
#[derive(Clone, PartialEq, Debug)]
pub struct EndogenousSpec {
    pub id: VariableId,
    pub domain: Domain,
    pub parents: Vec<VariableId>,
    pub table: Vec<TableRow>,
}

impl EndogenousSpec {
    /// Constant-function spec (no parents), used by interventions.
    pub fn constant(id: VariableId, domain: Domain, value: &str) -> Self {
        EndogenousSpec {
            id,
            domain,
            parents: Vec::new(),
            table: vec![TableRow {
                given: Vec::new(),
                then: value.to_owned(),
            }],
        }
    }
}

/// The tuple ⟨X, U, F, P(u)⟩ over finite discrete domains.
#[derive(Clone, PartialEq, Debug)]
pub struct ProbabilisticSCM {
    pub exogenous: Vec<ExogenousSpec>,
    pub endogenous: Vec<EndogenousSpec>,
}

/// Map from variables to value labels.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment(BTreeMap<VariableId, String>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn set(&mut self, id: VariableId, value: impl Into<String>) {
        self.0.insert(id, value.into());
    }

    pub fn with(mut self, id: impl Into<VariableId>, value: impl Into<String>) -> Self {
        self.set(id.into(), value);
        self
    }

    pub fn get(&self, id: &VariableId) -> Option<&str> {
        self.0.get(id).map(String::as_str)
    }

    pub fn contains(&self, id: &VariableId) -> bool {
        self.0.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VariableId, &str)> {
        self.0.iter().map(|(k, v)| (k, v.as_str()))
    }

    pub fn variables(&self) -> impl Iterator<Item = &VariableId> {
        self.0.keys()
    }
}

impl FromIterator<(VariableId, String)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (VariableId, String)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in self.iter() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

/// A single invariant violation found by [`ProbabilisticSCM::validate`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    EmptyIdentifier,
    DuplicateVariable(VariableId),
    EmptyDomain(VariableId),
    DuplicateDomainLabel(VariableId, String),
    MarginalLengthMismatch(VariableId),
    NegativeProbability(VariableId),
    MarginalNotNormalized(VariableId),
    UnknownParent {
        child: VariableId,
        parent: VariableId,
    },
    DuplicateParent {
        child: VariableId,
        parent: VariableId,
    },
    SelfParent(VariableId),
    IncompleteEquationTable {
        child: VariableId,
        missing: usize,
    },
    DuplicateEquationRow {
        child: VariableId,
        given: Vec<String>,
    },
    RowArityMismatch {
        child: VariableId,
        given: Vec<String>,
    },
    ValueOutsideDomain {
        child: VariableId,
        value: String,
    },
    Cycle(Vec<VariableId>),
    UngroundedEquation(VariableId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyIdentifier => write!(f, "empty variable identifier"),
            Violation::DuplicateVariable(v) => write!(f, "duplicate variable {v}"),
            Violation::EmptyDomain(v) => write!(f, "empty domain for {v}"),
            Violation::DuplicateDomainLabel(v, l) => {
                write!(f, "duplicate domain label {l:?} for {v}")
            }
            Violation::MarginalLengthMismatch(v) => {
                write!(f, "marginal of {v} does not match its domain size")
            }
            Violation::NegativeProbability(v) => {
                write!(f, "negative probability in marginal of {v}")
            }
            Violation::MarginalNotNormalized(v) => write!(f, "marginal of {v} not normalized"),
            Violation::UnknownParent { child, parent } => {
                write!(f, "unknown parent {parent} of {child}")
            }
            Violation::DuplicateParent { child, parent } => {
                write!(f, "duplicate parent {parent} of {child}")
            }
            Violation::SelfParent(v) => write!(f, "{v} lists itself as a parent"),
            Violation::IncompleteEquationTable { child, missing } => {
                write!(f, "incomplete equation table for {child}: {missing} parent combination(s) missing")
            }
            Violation::DuplicateEquationRow { child, given } => {
                write!(f, "duplicate equation row for {child} at {given:?}")
            }
            Violation::RowArityMismatch { child, given } => {
                write!(f, "equation row arity mismatch for {child} at {given:?}")
            }
            Violation::ValueOutsideDomain { child, value } => {
                write!(f, "value {value:?} outside the domain of {child}")
            }
            Violation::Cycle(vs) => {
                write!(f, "graph contains a cycle through ")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            Violation::UngroundedEquation(v) => write!(
                f,
                "equation of {v} is not grounded in exogenous variables or constants"
            ),
        }
    }
}

/// Result of validating a model; an empty violation list means valid.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, violation) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{violation}")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Debug, thiserror::Error)]
pub enum ScmError {
    #[error("model is invalid: {0}")]
    Invalid(String),
    #[error("unknown variable {0}")]
    UnknownVariable(VariableId),
    #[error("missing exogenous assignment for {0}")]
    MissingExogenousAssignment(VariableId),
    #[error("value {value:?} not in the domain of {variable}")]
    ValueNotInDomain { variable: VariableId, value: String },
    #[error("exogenous state space has {states} joint states, exceeding the cap of {cap}")]
    EnumerationCapExceeded { states: u128, cap: u128 },
}

impl ProbabilisticSCM {
    pub fn variable_ids(&self) -> impl Iterator<Item = &VariableId> {
        self.exogenous
            .iter()
            .map(|e| &e.id)
            .chain(self.endogenous.iter().map(|e| &e.id))
    }

    pub fn domain_of(&self, id: &VariableId) -> Option<&Domain> {
        self.exogenous
            .iter()
            .find(|e| &e.id == id)
            .map(|e| &e.domain)
            .or_else(|| {
                self.endogenous
                    .iter()
                    .find(|e| &e.id == id)
                    .map(|e| &e.domain)
            })
    }

    pub fn is_exogenous(&self, id: &VariableId) -> bool {
        self.exogenous.iter().any(|e| &e.id == id)
    }

    pub fn endogenous_spec(&self, id: &VariableId) -> Option<&EndogenousSpec> {
        self.endogenous.iter().find(|e| &e.id == id)
    }

    pub fn exogenous_spec(&self, id: &VariableId) -> Option<&ExogenousSpec> {
        self.exogenous.iter().find(|e| &e.id == id)
    }

    /// Number of joint exogenous states, saturating at `u128::MAX`.
    pub fn exogenous_state_count(&self) -> u128 {
        self.exogenous
            .iter()
            .fold(1u128, |acc, e| acc.saturating_mul(e.domain.len() as u128))
    }

    /// Check every model invariant; an empty report means the model is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();

        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for id in self.variable_ids() {
            if id.as_str().is_empty() {
                v.push(Violation::EmptyIdentifier);
            }
            if !seen.insert(id.as_str()) {
                v.push(Violation::DuplicateVariable(id.clone()));
            }
        }

        for (id, domain) in self
            .exogenous
            .iter()
            .map(|e| (&e.id, &e.domain))
            .chain(self.endogenous.iter().map(|e| (&e.id, &e.domain)))
        {
            if domain.is_empty() {
                v.push(Violation::EmptyDomain(id.clone()));
            }
            let mut labels = BTreeSet::new();
            for l in domain.values() {
                if !labels.insert(l.as_str()) {
                    v.push(Violation::DuplicateDomainLabel(id.clone(), l.clone()));
                }
            }
        }

        for exo in &self.exogenous {
            if exo.marginal.len() != exo.domain.len() {
                v.push(Violation::MarginalLengthMismatch(exo.id.clone()));
                continue;
            }
            let mut sum = BigRational::zero();
            let mut negative = false;
            for p in &exo.marginal {
                if p.is_negative() {
                    negative = true;
                }
                sum += p;
            }
            if negative {
                v.push(Violation::NegativeProbability(exo.id.clone()));
            }
            if !sum.is_one() {
                v.push(Violation::MarginalNotNormalized(exo.id.clone()));
            }
        }

        for endo in &self.endogenous {
            let mut parent_seen = BTreeSet::new();
            let mut parents_ok = true;
            for p in &endo.parents {
                if p == &endo.id {
                    v.push(Violation::SelfParent(endo.id.clone()));
                    parents_ok = false;
                    continue;
                }
                if self.domain_of(p).is_none() {
                    v.push(Violation::UnknownParent {
                        child: endo.id.clone(),
                        parent: p.clone(),
                    });
                    parents_ok = false;
                }
                if !parent_seen.insert(p.clone()) {
                    v.push(Violation::DuplicateParent {
                        child: endo.id.clone(),
                        parent: p.clone(),
                    });
                    parents_ok = false;
                }
            }
            if parents_ok {
                self.check_table(endo, &mut v);
            }
        }

        match self.topo_order() {
            Ok(_) => {
                // Every equation must be grounded: walking up through the
                // parents has to end in exogenous variables or constants
                // (parentless endogenous, e.g. intervention targets).
                for endo in &self.endogenous {
                    if !self.is_grounded(&endo.id) {
                        v.push(Violation::UngroundedEquation(endo.id.clone()));
                    }
                }
            }
            Err(cycle) => v.push(Violation::Cycle(cycle)),
        }

        ValidationReport { violations: v }
    }

    fn check_table(&self, endo: &EndogenousSpec, v: &mut Vec<Violation>) {
        let parent_domains: Vec<&Domain> = endo
            .parents
            .iter()
            .map(|p| self.domain_of(p).expect("parents checked"))
            .collect();
        let expected: u128 = parent_domains
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128));

        let mut covered: BTreeSet<Vec<usize>> = BTreeSet::new();
        for row in &endo.table {
            if row.given.len() != endo.parents.len() {
                v.push(Violation::RowArityMismatch {
                    child: endo.id.clone(),
                    given: row.given.clone(),
                });
                continue;
            }
            let key: Option<Vec<usize>> = row
                .given
                .iter()
                .zip(&parent_domains)
                .map(|(label, dom)| dom.index_of(label))
                .collect();
            match key {
                Some(key) => {
                    if !covered.insert(key) {
                        v.push(Violation::DuplicateEquationRow {
                            child: endo.id.clone(),
                            given: row.given.clone(),
                        });
                    }
                }
                None => v.push(Violation::ValueOutsideDomain {
                    child: endo.id.clone(),
                    value: row
                        .given
                        .iter()
                        .zip(&parent_domains)
                        .find(|(label, dom)| dom.index_of(label).is_none())
                        .map(|(label, _)| label.clone())
                        .unwrap_or_default(),
                }),
            }
            if endo.domain.index_of(&row.then).is_none() {
                v.push(Violation::ValueOutsideDomain {
                    child: endo.id.clone(),
                    value: row.then.clone(),
                });
            }
        }
        if (covered.len() as u128) < expected {
            v.push(Violation::IncompleteEquationTable {
                child: endo.id.clone(),
                missing: (expected - covered.len() as u128) as usize,
            });
        }
    }

    fn is_grounded(&self, id: &VariableId) -> bool {
        let mut stack = vec![id.clone()];
        let mut seen = BTreeSet::new();
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            match self.endogenous_spec(&cur) {
                Some(spec) => {
                    for p in &spec.parents {
                        if !self.is_exogenous(p) {
                            stack.push(p.clone());
                        }
                    }
                }
                // Reached a parent that is neither endogenous nor (by the
                // earlier checks) exogenous: the equation dangles.
                None if !self.is_exogenous(&cur) => return false,
                None => {}
            }
        }
        true
    }

    /// Topological order of the endogenous variables (exogenous are roots and
    /// excluded). Ties broken by declaration order. `Err` carries the nodes
    /// left on a cycle.
    pub fn topo_order(&self) -> Result<Vec<VariableId>, Vec<VariableId>> {
        let n = self.endogenous.len();
        let index: HashMap<&str, usize> = self
            .endogenous
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, endo) in self.endogenous.iter().enumerate() {
            for p in &endo.parents {
                if let Some(&pi) = index.get(p.as_str()) {
                    indegree[i] += 1;
                    children[pi].push(i);
                }
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        while let Some(&i) = ready.iter().next() {
            ready.remove(&i);
            order.push(self.endogenous[i].id.clone());
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n)
                .filter(|&i| indegree[i] > 0)
                .map(|i| self.endogenous[i].id.clone())
                .collect())
        }
    }

    /// Evaluate every structural equation in topological order under the
    /// complete exogenous assignment `u`.
    pub fn solve(&self, u: &Assignment) -> Result<Assignment, ScmError> {
        let solver = Solver::new(self)?;
        let u_idx = solver.exogenous_indices(u)?;
        let endo_idx = solver.solve_indices(&u_idx);
        Ok(solver.labelled(&u_idx, &endo_idx))
    }

    /// Exact joint distribution over `vars` by enumerating all exogenous
    /// assignments. Uses the default enumeration cap.
    pub fn observational_joint(&self, vars: &[VariableId]) -> Result<JointTable, ScmError> {
        self.observational_joint_with_cap(vars, DEFAULT_STATE_CAP)
    }

    pub fn observational_joint_with_cap(
        &self,
        vars: &[VariableId],
        cap: u128,
    ) -> Result<JointTable, ScmError> {
        let solver = Solver::new(self)?;
        let mut table_vars = Vec::with_capacity(vars.len());
        for v in vars {
            let domain = self
                .domain_of(v)
                .ok_or_else(|| ScmError::UnknownVariable(v.clone()))?;
            table_vars.push((v.clone(), domain.clone()));
        }
        let positions: Vec<VarRef> = vars.iter().map(|v| solver.var_ref(v).unwrap()).collect();
        let mut table = JointTable::new(table_vars);
        solver.for_each_u(cap, |u_idx, weight| {
            let endo_idx = solver.solve_indices(u_idx);
            let key: Vec<usize> = positions
                .iter()
                .map(|r| match *r {
                    VarRef::Exo(i) => u_idx[i],
                    VarRef::Endo(i) => endo_idx[i],
                })
                .collect();
            table.add_mass(key, weight.clone());
        })?;
        Ok(table)
    }
}

/// Reference to a variable by position in the model's declaration lists.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarRef {
    Exo(usize),
    Endo(usize),
}

/// Index-based evaluator over a validated model.
///
/// Validation, the topological order, and dense equation tables are computed
/// once, so repeated evaluation during enumeration is cheap.
pub struct Solver<'m> {
    model: &'m ProbabilisticSCM,
    /// Endogenous indices in topological order.
    order: Vec<usize>,
    /// Per endogenous variable: parents resolved to positions.
    parent_refs: Vec<Vec<VarRef>>,
    /// Per endogenous variable: dense table indexed by the mixed-radix key of
    /// parent value indices (declaration parent order, last parent fastest).
    dense_tables: Vec<Vec<usize>>,
}

impl<'m> Solver<'m> {
    pub fn new(model: &'m ProbabilisticSCM) -> Result<Self, ScmError> {
        let report = model.validate();
        if !report.is_valid() {
            return Err(ScmError::Invalid(report.to_string()));
        }
        let exo_index: HashMap<&str, usize> = model
            .exogenous
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let endo_index: HashMap<&str, usize> = model
            .endogenous
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let order: Vec<usize> = model
            .topo_order()
            .expect("validated")
            .iter()
            .map(|id| endo_index[id.as_str()])
            .collect();

        let mut parent_refs = Vec::with_capacity(model.endogenous.len());
        let mut dense_tables = Vec::with_capacity(model.endogenous.len());
        for endo in &model.endogenous {
            let refs: Vec<VarRef> = endo
                .parents
                .iter()
                .map(|p| match exo_index.get(p.as_str()) {
                    Some(&i) => VarRef::Exo(i),
                    None => VarRef::Endo(endo_index[p.as_str()]),
                })
                .collect();
            let parent_domains: Vec<&Domain> = endo
                .parents
                .iter()
                .map(|p| model.domain_of(p).expect("validated"))
                .collect();
            let size: usize = parent_domains.iter().map(|d| d.len()).product();
            let mut dense = vec![usize::MAX; size];
            for row in &endo.table {
                let mut key = 0usize;
                for (label, dom) in row.given.iter().zip(&parent_domains) {
                    key = key * dom.len() + dom.index_of(label).expect("validated");
                }
                dense[key] = endo.domain.index_of(&row.then).expect("validated");
            }
            debug_assert!(dense.iter().all(|&v| v != usize::MAX));
            parent_refs.push(refs);
            dense_tables.push(dense);
        }
        Ok(Solver {
            model,
            order,
            parent_refs,
            dense_tables,
        })
    }

    pub fn model(&self) -> &'m ProbabilisticSCM {
        self.model
    }

    pub fn var_ref(&self, id: &VariableId) -> Option<VarRef> {
        if let Some(i) = self.model.exogenous.iter().position(|e| &e.id == id) {
            return Some(VarRef::Exo(i));
        }
        self.model
            .endogenous
            .iter()
            .position(|e| &e.id == id)
            .map(VarRef::Endo)
    }

    /// Convert a labelled exogenous assignment into declaration-order value
    /// indices, checking completeness and domain membership.
    pub fn exogenous_indices(&self, u: &Assignment) -> Result<Vec<usize>, ScmError> {
        let mut out = Vec::with_capacity(self.model.exogenous.len());
        for exo in &self.model.exogenous {
            let value = u
                .get(&exo.id)
                .ok_or_else(|| ScmError::MissingExogenousAssignment(exo.id.clone()))?;
            let idx = exo
                .domain
                .index_of(value)
                .ok_or_else(|| ScmError::ValueNotInDomain {
                    variable: exo.id.clone(),
                    value: value.to_owned(),
                })?;
            out.push(idx);
        }
        Ok(out)
    }

    /// Endogenous value indices (declaration order) under exogenous indices.
    pub fn solve_indices(&self, u_idx: &[usize]) -> Vec<usize> {
        let mut endo_idx = vec![usize::MAX; self.model.endogenous.len()];
        for &i in &self.order {
            let mut key = 0usize;
            for r in &self.parent_refs[i] {
                let (value, len) = match *r {
                    VarRef::Exo(j) => (u_idx[j], self.model.exogenous[j].domain.len()),
                    VarRef::Endo(j) => (endo_idx[j], self.model.endogenous[j].domain.len()),
                };
                key = key * len + value;
            }
            endo_idx[i] = self.dense_tables[i][key];
        }
        endo_idx
    }

    /// Full labelled assignment from index form.
    pub fn labelled(&self, u_idx: &[usize], endo_idx: &[usize]) -> Assignment {
        let mut full = Assignment::new();
        for (j, exo) in self.model.exogenous.iter().enumerate() {
            full.set(exo.id.clone(), exo.domain.label(u_idx[j]));
        }
        for (j, endo) in self.model.endogenous.iter().enumerate() {
            full.set(endo.id.clone(), endo.domain.label(endo_idx[j]));
        }
        full
    }

    /// Iterate all exogenous assignments (as value indices, declaration
    /// order, last variable fastest) with their exact weights.
    pub fn for_each_u<F>(&self, cap: u128, mut f: F) -> Result<(), ScmError>
    where
        F: FnMut(&[usize], &BigRational),
    {
        let states = self.model.exogenous_state_count();
        if states > cap {
            return Err(ScmError::EnumerationCapExceeded { states, cap });
        }
        let k = self.model.exogenous.len();
        let mut idx = vec![0usize; k];
        loop {
            let mut weight = BigRational::one();
            for (j, exo) in self.model.exogenous.iter().enumerate() {
                weight *= &exo.marginal[idx[j]];
            }
            f(&idx, &weight);
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < self.model.exogenous[pos].domain.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}
