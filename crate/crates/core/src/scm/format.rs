//! Model file format: a JSON document with `exogenous` and `endogenous`
//! lists. Marginal probabilities are rational strings (`"p/q"` or an
//! integer); the canonical serializer emits them in lowest terms and keeps
//! declaration order.

use super::{
    Domain, EndogenousSpec, ExogenousSpec, ProbabilisticSCM, TableRow, ValidationReport, VariableId,
};
use crate::rational::{format_ratio, parse_ratio};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    exogenous: Vec<ExoDoc>,
    endogenous: Vec<EndoDoc>,
}

#[derive(Serialize, Deserialize)]
struct ExoDoc {
    name: String,
    domain: Vec<String>,
    marginal: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct EndoDoc {
    name: String,
    domain: Vec<String>,
    parents: Vec<String>,
    table: Vec<RowDoc>,
}

#[derive(Serialize, Deserialize)]
struct RowDoc {
    given: Vec<String>,
    then: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid rational in marginal of {variable}: {literal:?}")]
    BadRational { variable: String, literal: String },
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
}

/// Parse and validate a model file. Semantic problems are reported through
/// the same checks as [`ProbabilisticSCM::validate`].
pub fn parse_model(text: &str) -> Result<ProbabilisticSCM, ParseError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut exogenous = Vec::with_capacity(doc.exogenous.len());
    for exo in doc.exogenous {
        let mut marginal = Vec::with_capacity(exo.marginal.len());
        for lit in &exo.marginal {
            marginal.push(parse_ratio(lit).map_err(|_| ParseError::BadRational {
                variable: exo.name.clone(),
                literal: lit.clone(),
            })?);
        }
        exogenous.push(ExogenousSpec {
            id: VariableId::new(exo.name),
            domain: Domain::new(exo.domain),
            marginal,
        });
    }
    let endogenous = doc
        .endogenous
        .into_iter()
        .map(|endo| EndogenousSpec {
            id: VariableId::new(endo.name),
            domain: Domain::new(endo.domain),
            parents: endo.parents.into_iter().map(VariableId::new).collect(),
            table: endo
                .table
                .into_iter()
                .map(|row| TableRow {
                    given: row.given,
                    then: row.then,
                })
                .collect(),
        })
        .collect();
    let model = ProbabilisticSCM {
        exogenous,
        endogenous,
    };
    let report = model.validate();
    if !report.is_valid() {
        return Err(ParseError::Invalid(report));
    }
    Ok(model)
}

/// Canonical serializer: declaration order, marginals in lowest terms.
pub fn render(model: &ProbabilisticSCM) -> String {
    let doc = ModelDoc {
        exogenous: model
            .exogenous
            .iter()
            .map(|e| ExoDoc {
                name: e.id.to_string(),
                domain: e.domain.values().to_vec(),
                marginal: e.marginal.iter().map(format_ratio).collect(),
            })
            .collect(),
        endogenous: model
            .endogenous
            .iter()
            .map(|e| EndoDoc {
                name: e.id.to_string(),
                domain: e.domain.values().to_vec(),
                parents: e.parents.iter().map(VariableId::to_string).collect(),
                table: e
                    .table
                    .iter()
                    .map(|r| RowDoc {
                        given: r.given.clone(),
                        then: r.then.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
    out.push('\n');
    out
}
