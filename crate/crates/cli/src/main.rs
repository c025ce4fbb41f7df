//! `crossworld`: validate discrete causal models, build cross-world graphs,
//! run d-separation and counterfactual probability queries, and batch-check
//! graph verdicts against exact enumeration.
//!
//! Exit codes: 0 success, 1 domain error (bad model, impossible query,
//! failed check), 2 usage error (malformed flags or query shape).

mod args;
mod examples;

use args::{parse_binding, parse_do, parse_node_ref, split_list, NodeRef, UsageError};
use clap::{Parser, Subcommand, ValueEnum};
use crossworld_core::genrand::{run_trials, GenConfig};
use crossworld_core::scm::ParseError;
use crossworld_core::{
    abduction_action_prediction, adjustment_estimate, approx_f64, base_graph, build_teleporter,
    build_twin, crossworld_joint, export_dot, export_dot_crossworld, format_ratio, parse_model,
    Assignment, CausalGraph, CrossWorldGraph, CwVar, GraphError, InferenceError, Intervention,
    ProbabilisticSCM, SeparationVerdict, VariableId, WorldError,
};
use num::BigRational;
use serde_json::json;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "crossworld",
    version,
    about = "Exact counterfactual reasoning over discrete structural causal models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum World {
    Real,
    Twin,
    Teleporter,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a model file against every structural invariant.
    Validate {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// d-separation query on the real, twin, or teleporter graph.
    ///
    /// Endpoints and conditioning nodes accept counterfactual addresses
    /// like `Y@do(X=1)`, which resolve to the duplicate when Y descends
    /// from the target and to the shared node otherwise.
    Dsep {
        model: PathBuf,
        a: String,
        b: String,
        #[arg(long, value_enum, default_value = "teleporter")]
        world: World,
        /// Intervention `X=x`; required for twin and teleporter worlds.
        #[arg(long = "do")]
        intervention: Option<String>,
        /// Comma-separated conditioning set.
        #[arg(long, default_value = "")]
        given: String,
        #[arg(long)]
        json: bool,
    },
    /// Construct a graph and emit it as DOT or JSON.
    Build {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "teleporter")]
        world: World,
        #[arg(long = "do")]
        intervention: Option<String>,
        #[arg(long, value_enum, default_value = "dot")]
        emit: Emit,
        /// Nodes to shade as conditioned in DOT output.
        #[arg(long, default_value = "")]
        given: String,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counterfactual probability P(Y_x=y | evidence).
    Query {
        model: PathBuf,
        #[arg(long = "do")]
        intervention: String,
        /// Counterfactual target `Y=y` (Y is read in the intervened world).
        #[arg(long)]
        target: String,
        /// Comma-separated real-world evidence `E=e,...`.
        #[arg(long, default_value = "")]
        evidence: String,
        /// One of: enumerate, abduction, adjust:Z1,Z2 (adjust: for the
        /// empty set).
        #[arg(long, default_value = "enumerate")]
        method: String,
        /// Also run the other applicable methods and require exact
        /// agreement.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        json: bool,
    },
    /// Compare twin, teleporter, and exact-oracle verdicts on one query.
    Compare {
        model: PathBuf,
        a: String,
        b: String,
        #[arg(long = "do")]
        intervention: String,
        #[arg(long, default_value = "")]
        given: String,
        #[arg(long)]
        json: bool,
    },
    /// Random-model soundness sweep against the enumeration oracle.
    Trials {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        models: usize,
        #[arg(long, default_value_t = 3)]
        queries: usize,
        #[arg(long, default_value_t = 4)]
        n_endogenous: usize,
        #[arg(long, default_value_t = 2)]
        max_parents: usize,
        /// Print only the summary line instead of one record per query.
        #[arg(long)]
        summary_only: bool,
    },
    /// Run every embedded fixture scenario and report expected vs actual.
    Examples {
        /// Write the embedded fixture model files into this directory.
        #[arg(long)]
        emit_fixtures: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

enum AppError {
    Usage(String),
    Domain(String),
}

impl From<UsageError> for AppError {
    fn from(e: UsageError) -> Self {
        AppError::Usage(e.0)
    }
}

impl From<WorldError> for AppError {
    fn from(e: WorldError) -> Self {
        AppError::Domain(e.to_string())
    }
}

impl From<GraphError> for AppError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::EndpointInConditioningSet(_) | GraphError::SameEndpoints => {
                AppError::Usage(e.to_string())
            }
            other => AppError::Domain(other.to_string()),
        }
    }
}

impl From<InferenceError> for AppError {
    fn from(e: InferenceError) -> Self {
        AppError::Domain(e.to_string())
    }
}

fn load_model(path: &Path) -> Result<ProbabilisticSCM, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Domain(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| AppError::Domain(format!("{}: {e}", path.display())))
}

/// Either the plain causal graph or a cross-world construction.
enum BuiltWorld {
    Real(CausalGraph),
    Cross(CrossWorldGraph),
}

impl BuiltWorld {
    fn graph(&self) -> &CausalGraph {
        match self {
            BuiltWorld::Real(g) => g,
            BuiltWorld::Cross(c) => c.graph(),
        }
    }
}

fn build_world(
    model: &ProbabilisticSCM,
    world: World,
    intervention: &Option<String>,
) -> Result<BuiltWorld, AppError> {
    match world {
        World::Real => {
            if intervention.is_some() {
                return Err(AppError::Usage(
                    "--do applies only to the twin and teleporter worlds".into(),
                ));
            }
            Ok(BuiltWorld::Real(base_graph(model)?))
        }
        World::Twin | World::Teleporter => {
            let spec = intervention.as_deref().ok_or_else(|| {
                AppError::Usage("--world twin|teleporter requires --do X=x".into())
            })?;
            let iv = parse_do(spec)?;
            let built = match world {
                World::Twin => build_twin(model, &iv)?,
                _ => build_teleporter(model, &iv)?,
            };
            Ok(BuiltWorld::Cross(built))
        }
    }
}

/// Resolve a node reference against the built world. Counterfactual
/// addresses must name the same intervention the world was built with.
fn resolve_node(world: &BuiltWorld, text: &str) -> Result<VariableId, AppError> {
    match (parse_node_ref(text)?, world) {
        (NodeRef::Plain(id), _) => Ok(id),
        (NodeRef::Counterfactual(..), BuiltWorld::Real(_)) => Err(AppError::Usage(format!(
            "{text}: counterfactual addresses need --world twin or teleporter"
        ))),
        (NodeRef::Counterfactual(base, addr_iv), BuiltWorld::Cross(cw)) => {
            if &addr_iv != cw.intervention() {
                return Err(AppError::Usage(format!(
                    "{text}: address names {addr_iv} but the graph was built with {}",
                    cw.intervention()
                )));
            }
            Ok(cw.counterfactual_node(&base)?.clone())
        }
    }
}

fn parse_assignment(spec: &str) -> Result<Assignment, AppError> {
    let mut a = Assignment::new();
    for part in split_list(spec) {
        let (var, val) = parse_binding(part)?;
        a.set(var, val);
    }
    Ok(a)
}

fn verdict_word(separated: bool) -> &'static str {
    if separated {
        "SEPARATED"
    } else {
        "CONNECTED"
    }
}

fn print_verdict(v: &SeparationVerdict) {
    match &v.witness {
        Some(path) => println!("{} via {path}", verdict_word(v.separated)),
        None => println!("{}", verdict_word(v.separated)),
    }
}

fn cmd_validate(model: &Path, json: bool) -> Result<(), AppError> {
    let text = std::fs::read_to_string(model)
        .map_err(|e| AppError::Domain(format!("cannot read {}: {e}", model.display())))?;
    let outcome = parse_model(&text);
    let violations: Vec<String> = match &outcome {
        Ok(_) => Vec::new(),
        Err(ParseError::Invalid(report)) => {
            report.violations.iter().map(|v| v.to_string()).collect()
        }
        Err(other) => vec![other.to_string()],
    };
    if json {
        println!(
            "{}",
            json!({ "valid": violations.is_empty(), "violations": violations })
        );
    } else if violations.is_empty() {
        println!("valid");
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(AppError::Domain(format!(
            "{} violation(s) found",
            violations.len()
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_dsep(
    model_path: &Path,
    a: &str,
    b: &str,
    world: World,
    intervention: &Option<String>,
    given: &str,
    json: bool,
) -> Result<(), AppError> {
    let model = load_model(model_path)?;
    let built = build_world(&model, world, intervention)?;
    let a_id = resolve_node(&built, a)?;
    let b_id = resolve_node(&built, b)?;
    let cond: BTreeSet<VariableId> = split_list(given)
        .into_iter()
        .map(|n| resolve_node(&built, n))
        .collect::<Result<_, _>>()?;
    let verdict = built.graph().d_separated(&a_id, &b_id, &cond)?;
    if json {
        println!(
            "{}",
            json!({
                "a": a_id.to_string(),
                "b": b_id.to_string(),
                "given": cond.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "separated": verdict.separated,
                "witness": verdict.witness.as_ref().map(|p| p.to_string()),
            })
        );
    } else {
        print_verdict(&verdict);
    }
    Ok(())
}

fn cmd_build(
    model_path: &Path,
    world: World,
    intervention: &Option<String>,
    emit: Emit,
    given: &str,
    out: &Option<PathBuf>,
) -> Result<(), AppError> {
    let model = load_model(model_path)?;
    let built = build_world(&model, world, intervention)?;
    let cond: BTreeSet<VariableId> = split_list(given)
        .into_iter()
        .map(|n| resolve_node(&built, n))
        .collect::<Result<_, _>>()?;
    for c in &cond {
        if !built.graph().contains(c) {
            return Err(AppError::Domain(format!("unknown node {c}")));
        }
    }
    let text = match (emit, &built) {
        (Emit::Dot, BuiltWorld::Real(g)) => export_dot(g, &cond),
        (Emit::Dot, BuiltWorld::Cross(cw)) => export_dot_crossworld(cw, &cond),
        (Emit::Json, _) => {
            let g = built.graph();
            let nodes: Vec<serde_json::Value> = g
                .nodes()
                .map(|(id, kind)| {
                    json!({
                        "id": id.to_string(),
                        "kind": format!("{kind:?}"),
                        "conditioned": cond.contains(id),
                    })
                })
                .collect();
            let edges: Vec<[String; 2]> = g
                .edges()
                .map(|(x, y)| [x.to_string(), y.to_string()])
                .collect();
            let mut s = serde_json::to_string_pretty(&json!({ "nodes": nodes, "edges": edges }))
                .expect("serializable");
            s.push('\n');
            s
        }
    };
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Domain(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// How a query method was requested on the command line.
enum Method {
    Enumerate,
    Abduction,
    Adjust(BTreeSet<VariableId>),
}

fn parse_method(spec: &str) -> Result<Method, AppError> {
    match spec {
        "enumerate" => Ok(Method::Enumerate),
        "abduction" => Ok(Method::Abduction),
        _ => match spec.strip_prefix("adjust:") {
            Some(list) => Ok(Method::Adjust(
                split_list(list).into_iter().map(VariableId::new).collect(),
            )),
            None => Err(AppError::Usage(format!(
                "unknown method {spec:?}; expected enumerate, abduction, or adjust:Z1,Z2"
            ))),
        },
    }
}

fn method_name(m: &Method) -> String {
    match m {
        Method::Enumerate => "enumerate".into(),
        Method::Abduction => "abduction".into(),
        Method::Adjust(z) => format!(
            "adjust:{}",
            z.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
    }
}

/// P(Y_x=y | e) by direct enumeration of the cross-world joint.
fn enumerate_probability(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    target: (&VariableId, &str),
    evidence: &Assignment,
) -> Result<BigRational, AppError> {
    let mut vars = vec![CwVar::Counterfactual(target.0.clone())];
    for e in evidence.variables() {
        vars.push(CwVar::Real(e.clone()));
    }
    let joint = crossworld_joint(model, iv, &vars)?;
    let ev: Vec<(VariableId, String)> = evidence
        .iter()
        .map(|(k, val)| (k.clone(), val.to_owned()))
        .collect();
    let p_e = joint
        .prob(&ev)
        .map_err(|e| AppError::Domain(e.to_string()))?;
    if p_e == BigRational::default() {
        return Err(AppError::Domain(
            InferenceError::ZeroProbabilityEvidence.to_string(),
        ));
    }
    let mut both = ev.clone();
    both.push((
        CwVar::Counterfactual(target.0.clone()).column_id(iv),
        target.1.to_owned(),
    ));
    let p_both = joint
        .prob(&both)
        .map_err(|e| AppError::Domain(e.to_string()))?;
    Ok(p_both / p_e)
}

fn run_method(
    model: &ProbabilisticSCM,
    iv: &Intervention,
    target: (&VariableId, &str),
    evidence: &Assignment,
    method: &Method,
) -> Result<BigRational, AppError> {
    match method {
        Method::Enumerate => enumerate_probability(model, iv, target, evidence),
        Method::Abduction => Ok(abduction_action_prediction(model, iv, target, evidence)?),
        Method::Adjust(z) => Ok(adjustment_estimate(model, iv, target, evidence, z)?),
    }
}

fn cmd_query(
    model_path: &Path,
    intervention: &str,
    target: &str,
    evidence: &str,
    method: &str,
    check: bool,
    json: bool,
) -> Result<(), AppError> {
    let model = load_model(model_path)?;
    let iv = parse_do(intervention)?;
    let (y_var, y_val) = parse_binding(target)?;
    let evidence = parse_assignment(evidence)?;
    let method = parse_method(method)?;

    let p = run_method(&model, &iv, (&y_var, &y_val), &evidence, &method)?;

    let mut checked = vec![method_name(&method)];
    if check {
        let mut others = vec![Method::Enumerate, Method::Abduction];
        if matches!(method, Method::Adjust(_)) {
            // nothing extra: adjust is the method under test
        }
        others.retain(|m| method_name(m) != method_name(&method));
        for other in others {
            let q = run_method(&model, &iv, (&y_var, &y_val), &evidence, &other)?;
            if q != p {
                return Err(AppError::Domain(format!(
                    "methods disagree: {} gave {}, {} gave {}",
                    method_name(&method),
                    format_ratio(&p),
                    method_name(&other),
                    format_ratio(&q)
                )));
            }
            checked.push(method_name(&other));
        }
    }

    let yx = CwVar::Counterfactual(y_var.clone()).column_id(&iv);
    if json {
        println!(
            "{}",
            json!({
                "do": iv.to_string(),
                "target": format!("{yx}={y_val}"),
                "evidence": evidence.iter().map(|(k, v)| (k.to_string(), v.to_owned()))
                    .collect::<std::collections::BTreeMap<_, _>>(),
                "probability": format_ratio(&p),
                "approx": approx_f64(&p),
                "methods": checked,
            })
        );
    } else {
        let given = if evidence.is_empty() {
            String::new()
        } else {
            format!(" | {evidence}")
        };
        println!(
            "P({yx}={y_val}{given}) = {} ~ {:.6}",
            format_ratio(&p),
            approx_f64(&p)
        );
        if check {
            println!("methods agree: {}", checked.join(", "));
        }
    }
    Ok(())
}

fn cmd_compare(
    model_path: &Path,
    a: &str,
    b: &str,
    intervention: &str,
    given: &str,
    json: bool,
) -> Result<(), AppError> {
    let model = load_model(model_path)?;
    let iv = parse_do(intervention)?;
    let twin = BuiltWorld::Cross(build_twin(&model, &iv)?);
    let tele = BuiltWorld::Cross(build_teleporter(&model, &iv)?);

    // Resolve against the teleporter world to learn the base variables,
    // then re-resolve the counterfactual endpoint per world.
    let resolve_pair = |world: &BuiltWorld| -> Result<_, AppError> {
        let a_id = resolve_node(world, a)?;
        let b_id = resolve_node(world, b)?;
        let cond: BTreeSet<VariableId> = split_list(given)
            .into_iter()
            .map(|n| resolve_node(world, n))
            .collect::<Result<_, _>>()?;
        Ok((a_id, b_id, cond))
    };

    let (ta, tb, tcond) = resolve_pair(&twin)?;
    let twin_verdict = twin.graph().d_separated(&ta, &tb, &tcond)?;
    let (pa, pb, pcond) = resolve_pair(&tele)?;
    let tele_verdict = tele.graph().d_separated(&pa, &pb, &pcond)?;

    // Numeric oracle over the base variables (plain names and @do bases).
    let as_cw = |text: &str| -> Result<CwVar, AppError> {
        Ok(match parse_node_ref(text)? {
            NodeRef::Plain(id) => CwVar::Real(id),
            NodeRef::Counterfactual(base, _) => CwVar::Counterfactual(base),
        })
    };
    let cw_a = as_cw(a)?;
    let cw_b = as_cw(b)?;
    let mut vars = vec![cw_a.clone(), cw_b.clone()];
    let cond_vars: Vec<CwVar> = split_list(given)
        .into_iter()
        .map(as_cw)
        .collect::<Result<_, _>>()?;
    vars.extend(cond_vars.iter().cloned());
    let joint = crossworld_joint(&model, &iv, &vars)?;
    let cond_cols: Vec<VariableId> = cond_vars.iter().map(|c| c.column_id(&iv)).collect();
    let independent = joint
        .check_ci_numeric(&cw_a.column_id(&iv), &cw_b.column_id(&iv), &cond_cols)
        .map_err(|e| AppError::Domain(e.to_string()))?;

    if json {
        println!(
            "{}",
            json!({
                "do": iv.to_string(),
                "twin": verdict_word(twin_verdict.separated),
                "teleporter": verdict_word(tele_verdict.separated),
                "oracle": if independent { "independent" } else { "dependent" },
            })
        );
    } else {
        println!("query: {a} vs {b} given [{given}] under do({intervention})");
        match &twin_verdict.witness {
            Some(p) => println!(
                "twin:       {} via {p}",
                verdict_word(twin_verdict.separated)
            ),
            None => println!("twin:       {}", verdict_word(twin_verdict.separated)),
        }
        match &tele_verdict.witness {
            Some(p) => println!(
                "teleporter: {} via {p}",
                verdict_word(tele_verdict.separated)
            ),
            None => println!("teleporter: {}", verdict_word(tele_verdict.separated)),
        }
        println!(
            "oracle:     {}",
            if independent {
                "INDEPENDENT"
            } else {
                "DEPENDENT"
            }
        );
    }
    // A separation claim contradicted by the exact joint is a defect worth
    // a nonzero exit.
    if tele_verdict.separated && !independent {
        return Err(AppError::Domain(
            "teleporter graph claims separation but the joint shows dependence".into(),
        ));
    }
    Ok(())
}

fn cmd_trials(
    seed: u64,
    models: usize,
    queries: usize,
    n_endogenous: usize,
    max_parents: usize,
    summary_only: bool,
) -> Result<(), AppError> {
    let cfg = GenConfig {
        seed,
        n_endogenous,
        max_parents,
        ..GenConfig::default()
    };
    let report = run_trials(&cfg, models, queries).map_err(|e| AppError::Domain(e.to_string()))?;
    if summary_only {
        println!(
            "{}",
            serde_json::to_string(&report.summary).expect("serializable")
        );
    } else {
        print!("{}", report.to_jsonl());
    }
    let s = &report.summary;
    let defects = s.teleporter_soundness_violations
        + s.twin_soundness_violations
        + s.dominance_violations
        + s.adjustment_mismatches
        + s.consistency_failures;
    if defects > 0 {
        return Err(AppError::Domain(format!(
            "{defects} verdict defect(s) found across {} model(s)",
            s.models
        )));
    }
    Ok(())
}

fn cmd_examples(emit_fixtures: &Option<PathBuf>, json: bool) -> Result<(), AppError> {
    if let Some(dir) = emit_fixtures {
        std::fs::create_dir_all(dir)
            .map_err(|e| AppError::Domain(format!("cannot create {}: {e}", dir.display())))?;
        for name in crossworld_core::fixtures::FIXTURE_NAMES {
            let path = dir.join(format!("{name}.json"));
            let source = crossworld_core::fixtures::fixture_source(name).expect("known name");
            std::fs::write(&path, source)
                .map_err(|e| AppError::Domain(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    let scenarios = examples::run_all();
    if json {
        println!(
            "{}",
            serde_json::to_string(&scenarios).expect("serializable")
        );
    } else {
        print!("{}", examples::render_table(&scenarios));
    }
    let failed = scenarios.iter().filter(|s| !s.pass).count();
    if failed > 0 {
        return Err(AppError::Domain(format!("{failed} scenario(s) failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    match &cli.cmd {
        Cmd::Validate { model, json } => cmd_validate(model, *json),
        Cmd::Dsep {
            model,
            a,
            b,
            world,
            intervention,
            given,
            json,
        } => cmd_dsep(model, a, b, *world, intervention, given, *json),
        Cmd::Build {
            model,
            world,
            intervention,
            emit,
            given,
            out,
        } => cmd_build(model, *world, intervention, *emit, given, out),
        Cmd::Query {
            model,
            intervention,
            target,
            evidence,
            method,
            check,
            json,
        } => cmd_query(model, intervention, target, evidence, method, *check, *json),
        Cmd::Compare {
            model,
            a,
            b,
            intervention,
            given,
            json,
        } => cmd_compare(model, a, b, intervention, given, *json),
        Cmd::Trials {
            seed,
            models,
            queries,
            n_endogenous,
            max_parents,
            summary_only,
        } => cmd_trials(
            *seed,
            *models,
            *queries,
            *n_endogenous,
            *max_parents,
            *summary_only,
        ),
        Cmd::Examples {
            emit_fixtures,
            json,
        } => cmd_examples(emit_fixtures, *json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
