//! Deterministic DOT rendering for causal and cross-world graphs.
//!
//! Styling: real nodes solid, counterfactual duplicates dashed, teleporters
//! double-bordered, exogenous nodes dotted, conditioned nodes filled grey.

use crate::graph::{CausalGraph, NodeKind};
use crate::scm::VariableId;
use crate::world::{CrossWorldGraph, NodeRole};
use std::collections::BTreeSet;
use std::fmt::Write;

fn sanitize(id: &VariableId) -> String {
    let ok = id
        .as_str()
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok && !id.as_str().is_empty() {
        id.as_str().to_owned()
    } else {
        format!("\"{}\"", id.as_str().replace('"', "\\\""))
    }
}

fn node_line(id: &VariableId, attrs: &[(&str, String)]) -> String {
    let mut line = format!("  {}", sanitize(id));
    if !attrs.is_empty() {
        line.push_str(" [");
        for (i, (k, v)) in attrs.iter().enumerate() {
            if i > 0 {
                line.push_str(", ");
            }
            let _ = write!(line, "{k}={v}");
        }
        line.push(']');
    }
    line.push_str(";\n");
    line
}

fn kind_attrs(kind: NodeKind) -> Vec<(&'static str, String)> {
    match kind {
        NodeKind::Endogenous => vec![],
        NodeKind::Exogenous => vec![("style", "\"dotted\"".into())],
        NodeKind::CounterfactualDuplicate => vec![("style", "\"dashed\"".into())],
        NodeKind::TeleporterShared => vec![("peripheries", "2".into())],
    }
}

fn merge_conditioning(
    mut attrs: Vec<(&'static str, String)>,
    conditioned: bool,
) -> Vec<(&'static str, String)> {
    if conditioned {
        let style = attrs.iter_mut().find(|(k, _)| *k == "style");
        match style {
            Some((_, v)) => {
                let inner = v.trim_matches('"').to_owned();
                *v = format!("\"{inner},filled\"");
            }
            None => attrs.push(("style", "\"filled\"".into())),
        }
        attrs.push(("fillcolor", "\"grey\"".into()));
    }
    attrs
}

/// Render a plain causal graph, shading any conditioned nodes grey.
pub fn export_dot(g: &CausalGraph, conditioned: &BTreeSet<VariableId>) -> String {
    let mut out = String::from("digraph causal {\n  rankdir=TB;\n");
    for (id, kind) in g.nodes() {
        let attrs = merge_conditioning(kind_attrs(kind), conditioned.contains(id));
        out.push_str(&node_line(id, &attrs));
    }
    for (from, to) in g.edges() {
        let _ = writeln!(out, "  {} -> {};", sanitize(from), sanitize(to));
    }
    out.push_str("}\n");
    out
}

/// Render a cross-world graph with role-aware styling. Duplicate nodes get a
/// subscripted label `base[do(X=x)]`.
pub fn export_dot_crossworld(g: &CrossWorldGraph, conditioned: &BTreeSet<VariableId>) -> String {
    let iv = g.intervention();
    let mut out = String::from("digraph crossworld {\n  rankdir=TB;\n");
    let _ = writeln!(out, "  label=\"{} ({})\";", iv, g.method());
    for (id, kind) in g.graph().nodes() {
        let mut attrs = kind_attrs(kind);
        if let Some(NodeRole::CounterfactualDuplicateOf(base)) = g.role_of(id) {
            attrs.push((
                "label",
                format!("<{}<SUB>{}={}</SUB>>", base, iv.target, iv.value),
            ));
        }
        let attrs = merge_conditioning(attrs, conditioned.contains(id));
        out.push_str(&node_line(id, &attrs));
    }
    for (from, to) in g.graph().edges() {
        let _ = writeln!(out, "  {} -> {};", sanitize(from), sanitize(to));
    }
    out.push_str("}\n");
    out
}
