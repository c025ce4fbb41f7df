//! Flag parsing helpers shared by the subcommands: `X=x` pairs,
//! `Y@do(X=x)` counterfactual addressing, and comma-separated node lists.

use crossworld_core::{Intervention, VariableId};

/// Errors that should surface as usage problems (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parse `X=x` into a (variable, value) pair.
pub fn parse_binding(s: &str) -> Result<(VariableId, String), UsageError> {
    match s.split_once('=') {
        Some((var, val)) if !var.is_empty() && !val.is_empty() => {
            Ok((VariableId::new(var), val.to_owned()))
        }
        _ => Err(UsageError(format!("expected VAR=value, got {s:?}"))),
    }
}

pub fn parse_do(s: &str) -> Result<Intervention, UsageError> {
    let (var, val) = parse_binding(s)?;
    Ok(Intervention::new(var, val))
}

/// A node reference on the command line: either a plain name or the
/// counterfactual address `Y@do(X=x)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NodeRef {
    Plain(VariableId),
    Counterfactual(VariableId, Intervention),
}

pub fn parse_node_ref(s: &str) -> Result<NodeRef, UsageError> {
    match s.split_once("@do(") {
        None => {
            if s.is_empty() {
                return Err(UsageError("empty node name".into()));
            }
            Ok(NodeRef::Plain(VariableId::new(s)))
        }
        Some((base, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| UsageError(format!("expected Y@do(X=x), got {s:?}")))?;
            if base.is_empty() {
                return Err(UsageError(format!("expected Y@do(X=x), got {s:?}")));
            }
            Ok(NodeRef::Counterfactual(
                VariableId::new(base),
                parse_do(inner)?,
            ))
        }
    }
}

/// Split a comma-separated list, ignoring empty segments so `--given ""`
/// means the empty set.
pub fn split_list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect()
}
