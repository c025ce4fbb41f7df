//! Exact joint probability tables over (possibly cross-world) variables.

use crate::scm::{Domain, VariableId};
use num::{BigRational, One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Sparse exact joint distribution: only rows with positive mass are stored,
/// keyed by value indices into each variable's domain.
#[derive(Clone, PartialEq, Debug)]
pub struct JointTable {
    vars: Vec<(VariableId, Domain)>,
    rows: BTreeMap<Vec<usize>, BigRational>,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum TableError {
    #[error("variable {0} not in table")]
    UnknownVariable(VariableId),
    #[error("value {value:?} not in the domain of {variable}")]
    ValueNotInDomain { variable: VariableId, value: String },
    #[error("conditioning overlaps the tested variables")]
    OverlappingQuery,
}

impl JointTable {
    pub fn new(vars: Vec<(VariableId, Domain)>) -> Self {
        JointTable {
            vars,
            rows: BTreeMap::new(),
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &VariableId> {
        self.vars.iter().map(|(id, _)| id)
    }

    pub fn domain_of(&self, id: &VariableId) -> Option<&Domain> {
        self.vars.iter().find(|(v, _)| v == id).map(|(_, d)| d)
    }

    fn position(&self, id: &VariableId) -> Result<usize, TableError> {
        self.vars
            .iter()
            .position(|(v, _)| v == id)
            .ok_or_else(|| TableError::UnknownVariable(id.clone()))
    }

    pub fn add_mass(&mut self, key: Vec<usize>, weight: BigRational) {
        debug_assert_eq!(key.len(), self.vars.len());
        if weight.is_zero() {
            return;
        }
        *self.rows.entry(key).or_insert_with(BigRational::zero) += weight;
    }

    pub fn add_mass_by_labels(&mut self, labels: &[&str], weight: BigRational) {
        let key: Vec<usize> = labels
            .iter()
            .zip(&self.vars)
            .map(|(l, (_, d))| d.index_of(l).expect("label in domain"))
            .collect();
        self.add_mass(key, weight);
    }

    /// Rows with positive mass, in deterministic key order.
    pub fn rows(&self) -> impl Iterator<Item = (&[usize], &BigRational)> {
        self.rows.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn row_labels<'a>(&'a self, key: &'a [usize]) -> Vec<&'a str> {
        key.iter()
            .zip(&self.vars)
            .map(|(&i, (_, d))| d.label(i))
            .collect()
    }

    pub fn total_mass(&self) -> BigRational {
        self.rows.values().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn is_normalized(&self) -> bool {
        self.total_mass().is_one()
    }

    /// Probability of a partial event given as (variable, value-label) pairs.
    pub fn prob(&self, event: &[(VariableId, String)]) -> Result<BigRational, TableError> {
        let mut constraints = Vec::with_capacity(event.len());
        for (id, label) in event {
            let pos = self.position(id)?;
            let idx =
                self.vars[pos]
                    .1
                    .index_of(label)
                    .ok_or_else(|| TableError::ValueNotInDomain {
                        variable: id.clone(),
                        value: label.clone(),
                    })?;
            constraints.push((pos, idx));
        }
        let mut total = BigRational::zero();
        for (key, w) in &self.rows {
            if constraints.iter().all(|&(pos, idx)| key[pos] == idx) {
                total += w;
            }
        }
        Ok(total)
    }

    /// Marginal table over a subset of the variables, in the given order.
    pub fn marginalize(&self, keep: &[VariableId]) -> Result<JointTable, TableError> {
        let positions: Vec<usize> = keep
            .iter()
            .map(|id| self.position(id))
            .collect::<Result<_, _>>()?;
        let vars: Vec<(VariableId, Domain)> =
            positions.iter().map(|&p| self.vars[p].clone()).collect();
        let mut out = JointTable::new(vars);
        for (key, w) in &self.rows {
            let sub: Vec<usize> = positions.iter().map(|&p| key[p]).collect();
            out.add_mass(sub, w.clone());
        }
        Ok(out)
    }

    /// Exact conditional-independence test: true iff within every
    /// positive-probability slice of `cond`, the joint over (`a`, `b`)
    /// factorizes exactly.
    ///
    /// This is the numeric side of the graphical d-separation verdicts; it is
    /// deliberately independent of any graph machinery.
    pub fn check_ci_numeric(
        &self,
        a: &VariableId,
        b: &VariableId,
        cond: &[VariableId],
    ) -> Result<bool, TableError> {
        let pa = self.position(a)?;
        let pb = self.position(b)?;
        let pcond: Vec<usize> = cond
            .iter()
            .map(|id| self.position(id))
            .collect::<Result<_, _>>()?;
        if pa == pb || pcond.contains(&pa) || pcond.contains(&pb) {
            return Err(TableError::OverlappingQuery);
        }

        // Aggregate masses per slice: P(c), P(a,c), P(b,c), P(a,b,c).
        let mut slice: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
        let mut ac: BTreeMap<(Vec<usize>, usize), BigRational> = BTreeMap::new();
        let mut bc: BTreeMap<(Vec<usize>, usize), BigRational> = BTreeMap::new();
        let mut abc: BTreeMap<(Vec<usize>, usize, usize), BigRational> = BTreeMap::new();
        for (key, w) in &self.rows {
            let c: Vec<usize> = pcond.iter().map(|&p| key[p]).collect();
            *slice.entry(c.clone()).or_insert_with(BigRational::zero) += w;
            *ac.entry((c.clone(), key[pa]))
                .or_insert_with(BigRational::zero) += w;
            *bc.entry((c.clone(), key[pb]))
                .or_insert_with(BigRational::zero) += w;
            *abc.entry((c, key[pa], key[pb]))
                .or_insert_with(BigRational::zero) += w;
        }

        // P(a,b|c) = P(a|c) P(b|c)  <=>  P(a,b,c) * P(c) = P(a,c) * P(b,c),
        // checked over the full (a, b) product within each slice.
        for (c, pc) in &slice {
            let na = self.vars[pa].1.len();
            let nb = self.vars[pb].1.len();
            for ia in 0..na {
                for ib in 0..nb {
                    let pab = abc
                        .get(&(c.clone(), ia, ib))
                        .cloned()
                        .unwrap_or_else(BigRational::zero);
                    let pa_c = ac
                        .get(&(c.clone(), ia))
                        .cloned()
                        .unwrap_or_else(BigRational::zero);
                    let pb_c = bc
                        .get(&(c.clone(), ib))
                        .cloned()
                        .unwrap_or_else(BigRational::zero);
                    if pab * pc != pa_c * pb_c {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for JointTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (id, _)) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, "\t")?;
            }
            write!(f, "{id}")?;
        }
        writeln!(f, "\tP")?;
        for (key, w) in &self.rows {
            for label in self.row_labels(key) {
                write!(f, "{label}\t")?;
            }
            writeln!(f, "{}", crate::rational::format_ratio(w))?;
        }
        Ok(())
    }
}
