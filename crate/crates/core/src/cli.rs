//! The `editlab` command line.
//!
//! [`run`] parses an argument vector, executes one verb and returns the exit
//! status together with everything that would be written to stdout and
//! stderr, so the binary is a thin wrapper and tests can drive it in-process.
//!
//! Exit statuses: 0 success, 1 domain error or failed verification, 2 usage
//! error, 3 indeterminate (a homomorphism search ran out of budget).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    closed_form_bound, envelope_value, exhaustive_bound_with, gray_bound, json_string, lower_bound_chi,
    maximize_envelope_with, BoundReport, DEFAULT_GRID, DEFAULT_MAX_K, DEFAULT_TOLERANCE,
};
use crate::crg::{
    blow_up, crg_count, enumerate_crgs_with, gray_complete, hom_search, in_family, parse_crg, quotient, tableau,
    Crg, EnumerateOptions, HomOutcome, DEFAULT_HOM_BUDGET,
};
use crate::curves::{f_of, g_of, sample_curves};
use crate::graph::{binary_chromatic, catalog_ref, clique_plus_coclique, complete_bipartite, co_p3_k1, h9};
use crate::graph::{parse_graph, GraphFormat, SimpleGraph};
use crate::num::{csv_field, shortest, sig};
use crate::oracle::{exact_dist, monte_carlo_step_a, verify_weighted_turan};
use crate::Error;

const DEFAULT_MC_N: usize = 100;
const DEFAULT_MC_P: f64 = 0.5;
const DEFAULT_MC_TRIALS: u64 = 1000;
const MC_SPOT_CHECKS: u64 = 100;
const DEFAULT_INVARIANT_TRIALS: u64 = 200;
const CURVE_DIGITS: usize = 12;

#[derive(Parser, Debug)]
#[command(name = "editlab", version, about = "Edit distance bounds from colored regularity graphs")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Graph: catalog:NAME, file:PATH, inline:N:u-v,u-v,... or graph6:STRING
    #[arg(long, global = true)]
    graph: Option<String>,
    /// CRG: K(a,c), file:PATH or inline:ROWS with rows separated by ';'
    #[arg(long, global = true)]
    crg: Option<String>,
    /// Comma-separated CRG references
    #[arg(long, global = true)]
    crgs: Option<String>,
    /// Forbidden graph (repeatable)
    #[arg(long, global = true)]
    forbid: Vec<String>,
    #[arg(long, global = true)]
    a: Option<usize>,
    #[arg(long, global = true)]
    b: Option<usize>,
    /// Vertex count (mc) or largest order (verify turan-lemma)
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Edge density for mc
    #[arg(long, global = true)]
    p: Option<f64>,
    /// CRG order limit for enumeration, and the a+c limit for tableaux
    #[arg(long = "max-k", global = true, default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Node budget of each homomorphism search
    #[arg(long, global = true, default_value_t = DEFAULT_HOM_BUDGET)]
    budget: u64,
    /// Bound method when no --crgs portfolio is given
    #[arg(long, global = true, value_enum, default_value_t = BoundMethod::Exhaustive)]
    method: BoundMethod,
    /// Keep one CRG per isomorphism class when enumerating
    #[arg(long, global = true)]
    dedup: bool,
    /// Output format (json by default, csv for gcurve)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Verb {
    /// Binary chromatic number of --graph
    Chib,
    /// Young tableau of --graph up to a+c = --max-k
    Tableau,
    /// Sample g-curves of --crg or --crgs on --grid points
    Gcurve,
    /// Colored homomorphism search from --graph into --crg
    Hom,
    /// Maximize the envelope for Forb(--graph)
    Bound,
    /// List CRGs up to --max-k vertices avoiding every --forbid graph
    Enumerate,
    /// Exact edit distance from --graph to Forb(--forbid ...)
    Oracle,
    /// Run a built-in verification bundle
    Verify {
        #[arg(value_enum)]
        bundle: Bundle,
    },
    /// Monte Carlo estimate of the expected cost of a random partition edit
    Mc,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BoundMethod {
    Exhaustive,
    ClosedForm,
    Gray,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Bundle {
    Kaeb,
    K33,
    H9,
    P3k1,
    TuranLemma,
    Invariants,
}

impl Bundle {
    fn name(self) -> &'static str {
        match self {
            Bundle::Kaeb => "kaeb",
            Bundle::K33 => "k33",
            Bundle::H9 => "h9",
            Bundle::P3k1 => "p3k1",
            Bundle::TuranLemma => "turan-lemma",
            Bundle::Invariants => "invariants",
        }
    }
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    status: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { status: 2, message: message.into() }
}

fn failed(input: &str, e: impl Into<Error>) -> Failure {
    let e = e.into();
    Failure { status: if e.is_indeterminate() { 3 } else { 1 }, message: format!("{input}: {e}") }
}

/// Parse `args` (including the program name) and execute the verb.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { status: 0, stdout: text, stderr: String::new() }
                }
                _ => Outcome { status: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    match execute(&cli) {
        Ok(artifact) => {
            let format = cli.format.unwrap_or(if cli.verb == Verb::Gcurve { Format::Csv } else { Format::Json });
            let rendered = artifact.render(format);
            match &cli.out {
                Some(path) => match std::fs::write(path, &rendered) {
                    Ok(()) => Outcome { status: artifact.status, stdout: String::new(), stderr: String::new() },
                    Err(e) => Outcome {
                        status: 1,
                        stdout: String::new(),
                        stderr: format!("editlab: --out {}: {e}\n", path.display()),
                    },
                },
                None => Outcome { status: artifact.status, stdout: rendered, stderr: String::new() },
            }
        }
        Err(f) => Outcome { status: f.status, stdout: String::new(), stderr: format!("editlab: {}\n", f.message) },
    }
}

// ---------------------------------------------------------------------------
// Emitted documents

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    /// Rounded to the given number of significant digits.
    Rounded(f64, usize),
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
    List(Vec<Value>),
    Obj(Vec<(String, Value)>),
}

fn num(x: f64) -> Value {
    Value::Num(x)
}

fn int(x: impl TryInto<i64>) -> Value {
    Value::Int(x.try_into().unwrap_or(i64::MAX))
}

fn text(s: impl Into<String>) -> Value {
    Value::Str(s.into())
}

fn obj(fields: Vec<(&str, Value)>) -> Value {
    Value::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

impl Value {
    fn json(&self, out: &mut String) {
        match self {
            Value::Num(x) | Value::Rounded(x, _) if !x.is_finite() => out.push_str("null"),
            Value::Num(_) | Value::Rounded(..) => out.push_str(&self.plain()),
            Value::Null => out.push_str("null"),
            Value::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Value::Str(s) => out.push_str(&json_string(s)),
            Value::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Value::List(items) => {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    v.json(out);
                }
                out.push(']');
            }
            Value::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&json_string(k));
                    out.push(':');
                    v.json(out);
                }
                out.push('}');
            }
        }
    }

    /// Scalars as plain text; lists of scalars inline.
    fn plain(&self) -> String {
        match self {
            Value::Num(x) => shortest(*x),
            Value::Rounded(x, d) => sig(*x, *d),
            Value::Int(i) => i.to_string(),
            Value::Str(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Null => "null".to_string(),
            Value::List(items) => format!("[{}]", items.iter().map(Value::plain).collect::<Vec<_>>().join(", ")),
            Value::Obj(_) => {
                let mut s = String::new();
                self.json(&mut s);
                s
            }
        }
    }

    fn is_scalar_list(&self) -> bool {
        matches!(self, Value::List(items) if items.iter().all(|v| !matches!(v, Value::List(_) | Value::Obj(_))))
    }

    fn flatten(&self, prefix: &str, out: &mut Vec<(String, Value)>) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match self {
            Value::Obj(fields) => {
                for (k, v) in fields {
                    v.flatten(&join(k), out);
                }
            }
            Value::List(items) if !self.is_scalar_list() => {
                for (i, v) in items.iter().enumerate() {
                    v.flatten(&join(&i.to_string()), out);
                }
            }
            v => out.push((prefix.to_string(), v.clone())),
        }
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn as_value(&self) -> Value {
        Value::List(
            self.rows
                .iter()
                .map(|row| Value::Obj(self.columns.iter().map(|c| c.to_string()).zip(row.iter().cloned()).collect()))
                .collect(),
        )
    }
}

/// One verb's result: a JSON record, optionally a table that the CSV form
/// carries instead of the flattened record, and an optional text form.
struct Artifact {
    record: Value,
    table: Option<Table>,
    text: Option<String>,
    status: i32,
}

impl Artifact {
    fn new(record: Value) -> Artifact {
        Artifact { record, table: None, text: None, status: 0 }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = String::new();
                self.record.json(&mut s);
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => {
                    let mut s = t.columns.join(",");
                    s.push('\n');
                    for row in &t.rows {
                        let cells: Vec<String> = row.iter().map(csv_cell).collect();
                        s.push_str(&cells.join(","));
                        s.push('\n');
                    }
                    s
                }
                None => {
                    let mut flat = Vec::new();
                    self.record.flatten("", &mut flat);
                    let mut s = String::from("key,value\n");
                    for (k, v) in flat {
                        let _ = writeln!(s, "{},{}", csv_field(&k), csv_cell(&v));
                    }
                    s
                }
            },
            Format::Text => match &self.text {
                Some(t) => t.clone(),
                None => {
                    let mut flat = Vec::new();
                    self.record.flatten("", &mut flat);
                    let mut s = String::new();
                    for (k, v) in flat {
                        let body = v.plain();
                        if body.contains('\n') {
                            let _ = writeln!(s, "{k}:");
                            for line in body.lines() {
                                let _ = writeln!(s, "  {line}");
                            }
                        } else {
                            let _ = writeln!(s, "{k}: {body}");
                        }
                    }
                    s
                }
            },
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        v => csv_field(&v.plain()),
    }
}

// ---------------------------------------------------------------------------
// References

/// Resolve a graph reference: `catalog:NAME`, `file:PATH`,
/// `inline:N:u-v,u-v,...`, `graph6:STRING`, or a bare catalog name.
pub fn resolve_graph(reference: &str) -> Result<SimpleGraph, String> {
    let fail = |e: &dyn std::fmt::Display| format!("{reference}: {e}");
    if let Some(name) = reference.strip_prefix("catalog:") {
        catalog_ref(name).map_err(|e| fail(&e))
    } else if let Some(path) = reference.strip_prefix("file:") {
        let body = std::fs::read_to_string(path).map_err(|e| fail(&e))?;
        let first = body.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
        let format = if first.parse::<usize>().is_ok() { GraphFormat::EdgeList } else { GraphFormat::Graph6 };
        parse_graph(&body, format).map_err(|e| fail(&e))
    } else if let Some(spec) = reference.strip_prefix("inline:") {
        parse_inline_graph(spec).map_err(|e| fail(&e))
    } else if let Some(g6) = reference.strip_prefix("graph6:") {
        parse_graph(g6, GraphFormat::Graph6).map_err(|e| fail(&e))
    } else {
        catalog_ref(reference).map_err(|e| fail(&e))
    }
}

fn parse_inline_graph(spec: &str) -> Result<SimpleGraph, String> {
    let (n, edges) = spec.split_once(':').unwrap_or((spec, ""));
    let n: usize = n.trim().parse().map_err(|_| format!("expected a vertex count, found {n:?}"))?;
    let mut pairs = Vec::new();
    for item in edges.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (u, v) = item.split_once('-').ok_or_else(|| format!("expected u-v, found {item:?}"))?;
        let u: usize = u.trim().parse().map_err(|_| format!("bad vertex in {item:?}"))?;
        let v: usize = v.trim().parse().map_err(|_| format!("bad vertex in {item:?}"))?;
        if u == v || u >= n || v >= n {
            return Err(format!("edge {item:?} is not a pair of distinct vertices below {n}"));
        }
        pairs.push((u, v));
    }
    SimpleGraph::from_edges(n, &pairs).map_err(|e| e.to_string())
}

/// Resolve a CRG reference: `K(a,c)`, `file:PATH` or `inline:ROWS` with
/// rows separated by `;`.
pub fn resolve_crg(reference: &str) -> Result<Crg, String> {
    let fail = |e: &dyn std::fmt::Display| format!("{reference}: {e}");
    let trimmed = reference.trim();
    if let Some(inner) = trimmed.strip_prefix("K(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [a, c] = parts[..] else {
            return Err(fail(&"expected K(a,c)"));
        };
        let a: usize = a.parse().map_err(|_| fail(&format!("bad count {a:?}")))?;
        let c: usize = c.parse().map_err(|_| fail(&format!("bad count {c:?}")))?;
        gray_complete(a, c).map_err(|e| fail(&e))
    } else if let Some(path) = trimmed.strip_prefix("file:") {
        let body = std::fs::read_to_string(path).map_err(|e| fail(&e))?;
        parse_crg(&body).map_err(|e| fail(&e))
    } else if let Some(rows) = trimmed.strip_prefix("inline:") {
        parse_crg(&rows.replace(';', "\n")).map_err(|e| fail(&e))
    } else {
        Err(fail(&"expected K(a,c), file:PATH or inline:ROWS"))
    }
}

/// Split on commas outside parentheses, so `K(1,2),K(0,3)` has two items.
fn split_top_level(list: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in list.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(std::mem::take(&mut current));
                continue;
            }
            _ => {}
        }
        current.push(ch);
    }
    items.push(current);
    items.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

// ---------------------------------------------------------------------------
// Verbs

fn execute(cli: &Cli) -> Result<Artifact, Failure> {
    validate(cli)?;
    match cli.verb {
        Verb::Chib => chib(cli),
        Verb::Tableau => tableau_verb(cli),
        Verb::Gcurve => gcurve(cli),
        Verb::Hom => hom(cli),
        Verb::Bound => bound(cli),
        Verb::Enumerate => enumerate(cli),
        Verb::Oracle => oracle(cli),
        Verb::Verify { bundle } => verify(cli, bundle),
        Verb::Mc => mc(cli),
    }
}

fn validate(cli: &Cli) -> Result<(), Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(usage(format!("--tol must be positive and finite, got {}", cli.tol)));
    }
    if cli.grid < 2 {
        return Err(usage(format!("--grid needs at least 2 points, got {}", cli.grid)));
    }
    if cli.max_k == 0 {
        return Err(usage("--max-k must be at least 1"));
    }
    if cli.budget == 0 {
        return Err(usage("--budget must be positive"));
    }
    if let Some(p) = cli.p {
        if !(0.0..=1.0).contains(&p) {
            return Err(usage(format!("--p must lie in [0, 1], got {p}")));
        }
    }
    if cli.trials == Some(0) {
        return Err(usage("--trials must be positive"));
    }
    Ok(())
}

fn required_graph(cli: &Cli) -> Result<(String, SimpleGraph), Failure> {
    let reference = cli.graph.as_deref().ok_or_else(|| usage("--graph is required"))?;
    let g = resolve_graph(reference).map_err(|m| Failure { status: 1, message: format!("--graph {m}") })?;
    Ok((reference.to_string(), g))
}

fn crg_refs(cli: &Cli) -> Result<Vec<(String, Crg)>, Failure> {
    let mut refs = Vec::new();
    if let Some(r) = &cli.crg {
        refs.push(r.clone());
    }
    if let Some(list) = &cli.crgs {
        refs.extend(split_top_level(list));
    }
    refs.into_iter()
        .map(|r| {
            let k = resolve_crg(&r).map_err(|m| Failure { status: 1, message: format!("--crg {m}") })?;
            Ok((r, k))
        })
        .collect()
}

fn forbidden(cli: &Cli, include_graph: bool) -> Result<(Vec<String>, Vec<SimpleGraph>), Failure> {
    let mut refs: Vec<String> = cli.forbid.clone();
    if include_graph {
        refs.extend(cli.graph.iter().cloned());
    }
    let graphs = refs
        .iter()
        .map(|r| resolve_graph(r).map_err(|m| Failure { status: 1, message: format!("--forbid {m}") }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((refs, graphs))
}

fn chib(cli: &Cli) -> Result<Artifact, Failure> {
    let (reference, g) = required_graph(cli)?;
    let chi = binary_chromatic(&g);
    let lower = if chi >= 2 { num(1.0 / (2.0 * (chi - 1) as f64)) } else { Value::Null };
    Ok(Artifact::new(obj(vec![
        ("graph", text(reference)),
        ("order", int(g.order())),
        ("edges", int(g.edge_count())),
        ("chi_b", int(chi)),
        ("lower_bound", lower),
    ])))
}

fn tableau_verb(cli: &Cli) -> Result<Artifact, Failure> {
    let (reference, g) = required_graph(cli)?;
    let t = tableau(&g, cli.max_k);
    let table = Table {
        columns: vec!["cocliques", "cliques"],
        rows: t.cells.iter().map(|&(a, c)| vec![int(a), int(c)]).collect(),
    };
    let mut diagram = String::new();
    let _ = writeln!(diagram, "graph {reference}: chi_b {}, c_min {}, c_max {}", t.chi_b, t.c_min, t.c_max);
    let _ = writeln!(diagram, "rows a = cocliques, columns c = cliques, # = no partition");
    for a in 0..=t.limit {
        let row: String = (0..=t.limit - a).map(|c| if t.contains(a, c) { '#' } else { '.' }).collect();
        let _ = writeln!(diagram, "{a:>3} {row}");
    }
    let record = obj(vec![
        ("graph", text(reference)),
        ("limit", int(t.limit)),
        ("chi_b", int(t.chi_b)),
        ("c_min", int(t.c_min)),
        ("c_max", int(t.c_max)),
        ("cells", table.as_value()),
    ]);
    Ok(Artifact { record, table: Some(table), text: Some(diagram), status: 0 })
}

fn gcurve(cli: &Cli) -> Result<Artifact, Failure> {
    let curves = crg_refs(cli)?;
    if curves.is_empty() {
        return Err(usage("gcurve needs --crg or --crgs"));
    }
    let rows: Vec<Vec<Value>> = sample_curves(&curves, cli.grid)
        .into_iter()
        .map(|(p, v, id)| vec![Value::Rounded(p, CURVE_DIGITS), Value::Rounded(v, CURVE_DIGITS), text(id)])
        .collect();
    let table = Table { columns: vec!["p", "value", "curve_id"], rows };
    let record = obj(vec![("grid", int(cli.grid)), ("points", table.as_value())]);
    Ok(Artifact { record, table: Some(table), text: None, status: 0 })
}

fn hom(cli: &Cli) -> Result<Artifact, Failure> {
    let (graph_ref, g) = required_graph(cli)?;
    let crgs = crg_refs(cli)?;
    let [(crg_ref, k)] = &crgs[..] else {
        return Err(usage("hom needs exactly one --crg"));
    };
    let (outcome, mapping) = match hom_search(&g, k, cli.budget) {
        HomOutcome::Found(w) => ("found", Value::List(w.mapping.iter().map(|&t| int(t)).collect())),
        HomOutcome::NotFound => ("not_found", Value::Null),
        HomOutcome::BudgetExhausted => {
            return Err(failed(
                &format!("hom --graph {graph_ref} --crg {crg_ref}"),
                crate::crg::CrgError::Indeterminate { budget: cli.budget, order: g.order(), crg: k.to_text() },
            ))
        }
    };
    Ok(Artifact::new(obj(vec![
        ("graph", text(graph_ref)),
        ("crg", text(crg_ref.clone())),
        ("outcome", text(outcome)),
        ("mapping", mapping),
        ("budget", int(cli.budget)),
    ])))
}

fn report_fields(r: &BoundReport) -> Vec<(&'static str, Value)> {
    vec![
        ("p_star", num(r.p_star)),
        ("d_star_upper", num(r.d_star_upper)),
        ("d_star_lower", num(r.d_star_lower)),
        ("witnesses", Value::List(r.witnesses.iter().map(|k| text(k.to_text())).collect())),
        ("method", text(r.method.as_str())),
        ("grid", int(r.grid)),
        ("tolerance", num(r.tolerance)),
        ("min_f_evidence", r.min_f_evidence.map_or(Value::Null, num)),
        ("flat_interval", r.flat_interval.map_or(Value::Null, |(a, b)| Value::List(vec![num(a), num(b)]))),
    ]
}

fn bound(cli: &Cli) -> Result<Artifact, Failure> {
    let (graph_ref, g) = required_graph(cli)?;
    let portfolio = crg_refs(cli)?;
    let context = format!("bound --graph {graph_ref}");
    let mut fields = vec![("graph", text(graph_ref.clone()))];
    let report = if portfolio.is_empty() {
        match cli.method {
            BoundMethod::Exhaustive => exhaustive_bound_with(&g, cli.max_k, cli.tol, cli.grid),
            BoundMethod::ClosedForm => closed_form_bound(&g),
            BoundMethod::Gray => gray_bound(&tableau(&g, cli.max_k), cli.tol),
        }
        .map_err(|e| failed(&context, e))?
    } else {
        for (r, k) in &portfolio {
            let admissible = in_family(std::slice::from_ref(&g), k).map_err(|e| failed(&format!("{context} --crgs {r}"), e))?;
            if !admissible {
                return Err(Failure {
                    status: 1,
                    message: format!("{context}: CRG {r} is not admissible, the forbidden graph maps into it"),
                });
            }
        }
        let members: Vec<Crg> = portfolio.iter().map(|(_, k)| k.clone()).collect();
        let mut report = maximize_envelope_with(&members, cli.tol, cli.grid).map_err(|e| failed(&context, e))?;
        report.d_star_lower = lower_bound_chi(&g).map_err(|e| failed(&context, e))?;
        fields.push(("portfolio", Value::List(portfolio.iter().map(|(r, _)| text(r.clone())).collect())));
        report
    };
    fields.extend(report_fields(&report));
    Ok(Artifact::new(obj(fields)))
}

fn enumerate(cli: &Cli) -> Result<Artifact, Failure> {
    let (refs, graphs) = forbidden(cli, true)?;
    let options = EnumerateOptions { dedup_isomorphic: cli.dedup };
    let crgs = enumerate_crgs_with(cli.max_k, &graphs, options).map_err(|e| failed("enumerate", e))?;
    let mut by_order = vec![0usize; cli.max_k];
    for k in &crgs {
        by_order[k.order() - 1] += 1;
    }
    let table = Table {
        columns: vec!["order", "index", "crg"],
        rows: crgs.iter().map(|k| vec![int(k.order()), int(k.index()), text(k.to_text())]).collect(),
    };
    let text_form: String = crgs.iter().map(|k| k.to_text()).collect::<Vec<_>>().join("\n");
    let record = obj(vec![
        ("max_k", int(cli.max_k)),
        ("forbidden", Value::List(refs.into_iter().map(text).collect())),
        ("dedup", Value::Bool(cli.dedup)),
        ("count", int(crgs.len())),
        ("by_order", Value::List(by_order.into_iter().map(int).collect())),
        ("crgs", table.as_value()),
    ]);
    Ok(Artifact { record, table: Some(table), text: Some(text_form), status: 0 })
}

fn oracle(cli: &Cli) -> Result<Artifact, Failure> {
    let (graph_ref, g) = required_graph(cli)?;
    let (refs, graphs) = forbidden(cli, false)?;
    if graphs.is_empty() {
        return Err(usage("oracle needs at least one --forbid graph"));
    }
    let result = exact_dist(&g, &graphs).map_err(|e| failed(&format!("oracle --graph {graph_ref}"), e))?;
    let edits: Vec<Value> = (0..g.order())
        .flat_map(|u| (u + 1..g.order()).map(move |v| (u, v)))
        .filter(|&(u, v)| g.has_edge(u, v) != result.witness.has_edge(u, v))
        .map(|(u, v)| Value::List(vec![int(u), int(v)]))
        .collect();
    Ok(Artifact::new(obj(vec![
        ("graph", text(graph_ref)),
        ("forbidden", Value::List(refs.into_iter().map(text).collect())),
        ("distance", int(result.distance)),
        ("edits", Value::List(edits)),
        ("witness_graph6", text(result.witness.to_graph6())),
    ])))
}

fn mc(cli: &Cli) -> Result<Artifact, Failure> {
    let n = cli.n.unwrap_or(DEFAULT_MC_N);
    let p = cli.p.unwrap_or(DEFAULT_MC_P);
    let trials = cli.trials.unwrap_or(DEFAULT_MC_TRIALS);
    let crgs = crg_refs(cli)?;
    let (crg_ref, k) = match &crgs[..] {
        [] => ("K(1,2)".to_string(), gray_complete(1, 2).expect("valid order")),
        [one] => one.clone(),
        _ => return Err(usage("mc takes a single --crg")),
    };
    let (refs, graphs) = forbidden(cli, true)?;
    let r = monte_carlo_step_a(n, p, &k, &graphs, trials, MC_SPOT_CHECKS, cli.seed)
        .map_err(|e| failed(&format!("mc --crg {crg_ref}"), e))?;
    Ok(Artifact::new(obj(vec![
        ("crg", text(crg_ref)),
        ("forbidden", Value::List(refs.into_iter().map(text).collect())),
        ("seed", int(cli.seed)),
        ("n", int(r.n)),
        ("edges", int(r.edges)),
        ("density", num(r.density)),
        ("trials", int(r.trials)),
        ("mean_cost", num(r.mean_cost)),
        ("expected_cost", num(r.expected_cost)),
        ("relative_error", num(r.relative_error)),
        ("spot_checks", int(r.spot_checks)),
        ("spot_failures", int(r.spot_failures)),
    ])))
}

// ---------------------------------------------------------------------------
// Verification bundles

struct Check {
    name: String,
    expected: Value,
    actual: Value,
    tolerance: Option<f64>,
    pass: bool,
}

#[derive(Default)]
struct Checks {
    list: Vec<Check>,
    reported: Option<(f64, f64)>,
}

impl Checks {
    fn close(&mut self, name: &str, expected: f64, actual: f64, tolerance: f64) {
        self.list.push(Check {
            name: name.to_string(),
            expected: num(expected),
            actual: num(actual),
            tolerance: Some(tolerance),
            pass: (expected - actual).abs() <= tolerance,
        });
    }

    fn at_least(&mut self, name: &str, floor: f64, actual: f64, tolerance: f64) {
        self.list.push(Check {
            name: name.to_string(),
            expected: text(format!(">= {}", shortest(floor))),
            actual: num(actual),
            tolerance: Some(tolerance),
            pass: actual >= floor - tolerance,
        });
    }

    fn equal(&mut self, name: &str, expected: Value, actual: Value) {
        let pass = expected == actual;
        self.list.push(Check { name: name.to_string(), expected, actual, tolerance: None, pass });
    }

    fn flag(&mut self, name: &str, expected: bool, actual: Result<bool, Error>) {
        match actual {
            Ok(b) => self.equal(name, Value::Bool(expected), Value::Bool(b)),
            Err(e) => self.list.push(Check {
                name: name.to_string(),
                expected: Value::Bool(expected),
                actual: text(e.to_string()),
                tolerance: None,
                pass: false,
            }),
        }
    }

    fn error(&mut self, name: &str, e: impl Into<Error>) {
        let e: Error = e.into();
        self.list.push(Check {
            name: name.to_string(),
            expected: text("a result"),
            actual: text(format!("error: {e}")),
            tolerance: None,
            pass: false,
        });
    }

    fn envelope(&mut self, what: &str, portfolio: &[Crg], point: (f64, f64), tol: f64, grid: usize) {
        match maximize_envelope_with(portfolio, tol, grid) {
            Ok(r) => {
                self.close(&format!("{what} p*"), point.0, r.p_star, tol);
                self.close(&format!("{what} d*"), point.1, r.d_star_upper, tol);
                self.reported.get_or_insert((r.p_star, r.d_star_upper));
            }
            Err(e) => self.error(what, e),
        }
    }
}

fn verify(cli: &Cli, bundle: Bundle) -> Result<Artifact, Failure> {
    let tol = cli.tol;
    let mut checks = Checks::default();
    let mut parameters: Vec<(&str, Value)> = vec![("tolerance", num(tol))];
    let gc = |a, c| gray_complete(a, c).expect("small gray CRG");
    match bundle {
        Bundle::Kaeb => {
            let (a, b) = (cli.a.unwrap_or(3), cli.b.unwrap_or(2));
            if a < 2 || b < 1 {
                return Err(usage(format!("verify kaeb needs --a >= 2 and --b >= 1, got a={a}, b={b}")));
            }
            parameters.extend([("a", int(a)), ("b", int(b))]);
            let h = clique_plus_coclique(a, b).map_err(|e| failed(&format!("K_{a}+E_{b}"), e))?;
            let forbidden = [h.clone()];
            checks.equal("chi_b", int(a.max(b + 1)), int(binary_chromatic(&h)));
            checks.flag(&format!("K({},0) admissible", a - 1), true, in_family(&forbidden, &gc(a - 1, 0)).map_err(Error::from));
            checks.flag(&format!("K(0,{b}) admissible"), true, in_family(&forbidden, &gc(0, b)).map_err(Error::from));
            let s = (a + b - 1) as f64;
            checks.envelope("envelope", &[gc(a - 1, 0), gc(0, b)], ((a - 1) as f64 / s, 1.0 / s), tol, cli.grid);
        }
        Bundle::K33 => {
            let h = complete_bipartite(3, 3).expect("six vertices");
            let forbidden = [h.clone()];
            let (p, d) = (2f64.sqrt() - 1.0, 3.0 - 2.0 * 2f64.sqrt());
            checks.equal("chi_b", int(4), int(binary_chromatic(&h)));
            checks.flag("K(1,2) admissible", true, in_family(&forbidden, &gc(1, 2)).map_err(Error::from));
            checks.envelope("envelope over K(1,2)", &[gc(1, 2)], (p, d), tol, cli.grid);
            match closed_form_bound(&h) {
                Ok(r) => checks.close("closed-form d*", d, r.d_star_upper, tol),
                Err(e) => checks.error("closed-form bound", e),
            }
            match exhaustive_bound_with(&h, 3, tol, cli.grid) {
                Ok(r) => {
                    checks.at_least("exhaustive k<=3 min f at p*", d, r.min_f_evidence.unwrap_or(f64::NAN), tol);
                    checks.close("exhaustive k<=3 d*", d, r.d_star_upper, tol);
                }
                Err(e) => checks.error("exhaustive bound", e),
            }
        }
        Bundle::H9 => {
            let h = h9();
            let kpp = parse_crg("crg 4\nwwww\nggg\ngg\nb").expect("valid CRG");
            let s5 = 5f64.sqrt();
            checks.equal("chi_b", int(4), int(binary_chromatic(&h)));
            let outcome = match hom_search(&h, &kpp, cli.budget) {
                HomOutcome::Found(_) => "found",
                HomOutcome::NotFound => "not_found",
                HomOutcome::BudgetExhausted => "budget_exhausted",
            };
            checks.equal("H9 into K''", text("not_found"), text(outcome));
            checks.envelope("envelope over K(0,2), K''", &[gc(0, 2), kpp], ((s5 - 1.0) / 2.0, (3.0 - s5) / 4.0), tol, cli.grid);
            match gray_bound(&tableau(&h, 8), tol) {
                Ok(r) => checks.close("gray-only envelope d*", 0.2, r.d_star_upper, tol),
                Err(e) => checks.error("gray-only envelope", e),
            }
            match lower_bound_chi(&h) {
                Ok(x) => checks.equal("chi_b lower bound", num(1.0 / 6.0), num(x)),
                Err(e) => checks.error("chi_b lower bound", e),
            }
        }
        Bundle::P3k1 => {
            let h = co_p3_k1();
            match exhaustive_bound_with(&h, 2, tol, cli.grid) {
                Ok(r) => {
                    checks.close("exhaustive k<=2 p*", 2.0 / 3.0, r.p_star, tol);
                    checks.close("exhaustive k<=2 d*", 1.0 / 3.0, r.d_star_upper, tol);
                    checks.reported = Some((r.p_star, r.d_star_upper));
                }
                Err(e) => checks.error("exhaustive bound", e),
            }
        }
        Bundle::TuranLemma => {
            let (a, nmax) = (cli.a.unwrap_or(3), cli.n.unwrap_or(5));
            parameters.extend([("a", int(a)), ("n_max", int(nmax))]);
            let report = verify_weighted_turan(a, nmax).map_err(|e| failed("verify turan-lemma", e))?;
            for row in &report.rows {
                checks.equal(&format!("violations at n={}", row.n), int(0), int(row.violations));
            }
            parameters.extend([
                ("colorings", int(report.enumerated())),
                ("checked", int(report.checked())),
                ("equality_cases", int(report.equality_cases())),
            ]);
        }
        Bundle::Invariants => {
            let trials = cli.trials.unwrap_or(DEFAULT_INVARIANT_TRIALS);
            parameters.extend([("trials", int(trials)), ("seed", int(cli.seed))]);
            invariants(&mut checks, trials, cli.seed, cli.budget);
        }
    }

    let pass = checks.list.iter().all(|c| c.pass);
    let status = if pass { "PASS" } else { "FAIL" };
    let table = Table {
        columns: vec!["check", "expected", "actual", "tolerance", "pass"],
        rows: checks
            .list
            .iter()
            .map(|c| {
                vec![
                    text(c.name.clone()),
                    c.expected.clone(),
                    c.actual.clone(),
                    c.tolerance.map_or(Value::Null, num),
                    Value::Bool(c.pass),
                ]
            })
            .collect(),
    };
    let mut report = String::new();
    for c in &checks.list {
        let tolerance = c.tolerance.map_or(String::from("exact"), |t| sig(t, 3));
        let _ = writeln!(
            report,
            "{}  {}  expected {}  actual {}  tolerance {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.expected.plain(),
            c.actual.plain(),
            tolerance
        );
    }
    let _ = write!(report, "{status}  {}", bundle.name());
    if let Some((p, d)) = checks.reported {
        let _ = write!(report, "  reported ({}, {})", sig(p, CURVE_DIGITS), sig(d, CURVE_DIGITS));
    }
    report.push('\n');

    let mut fields = vec![("bundle", text(bundle.name())), ("status", text(status))];
    fields.push(("parameters", obj(parameters)));
    fields.push((
        "reported",
        checks.reported.map_or(Value::Null, |(p, d)| obj(vec![("p_star", num(p)), ("d_star", num(d))])),
    ));
    fields.push(("checks", table.as_value()));
    Ok(Artifact { record: obj(fields), table: Some(table), text: Some(report), status: if pass { 0 } else { 1 } })
}

fn random_crg(rng: &mut ChaCha8Rng, kmax: usize) -> Crg {
    let k = rng.gen_range(1..=kmax);
    Crg::from_index(k, rng.gen_range(0..crg_count(k))).expect("index in range")
}

/// Seeded spot checks of structural identities of `f`, `g`, the envelope
/// and the homomorphism search.
fn invariants(checks: &mut Checks, trials: u64, seed: u64, budget: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = [0u64; 5];
    for _ in 0..trials {
        let k = random_crg(&mut rng, 4);
        let p: f64 = rng.gen();
        let g = g_of(&k, p).expect("p in [0, 1]").value;

        if f_of(&k, p).expect("p in [0, 1]") < g - 1e-12 {
            failures[0] += 1;
        }
        let copies = rng.gen_range(2..=3);
        let blown = blow_up(&k, copies).expect("at most 12 vertices");
        if (g_of(&blown, p).expect("p in [0, 1]").value - g).abs() > 1e-9 {
            failures[1] += 1;
        }
        if (g_of(&quotient(&k), p).expect("p in [0, 1]").value - g).abs() > 1e-9 {
            failures[2] += 1;
        }

        let portfolio: Vec<Crg> = (0..rng.gen_range(1..=3)).map(|_| random_crg(&mut rng, 4)).collect();
        let (x, y, t): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let env = |q: f64| envelope_value(&portfolio, q).expect("q in [0, 1]");
        if env(t * x + (1.0 - t) * y) < t * env(x) + (1.0 - t) * env(y) - 1e-8 {
            failures[3] += 1;
        }

        let n = rng.gen_range(1..=6);
        let density: f64 = rng.gen();
        let h = SimpleGraph::from_fn(n, |_, _| rng.gen::<f64>() < density).expect("small graph");
        let direct = hom_search(&h, &k, budget);
        let dual = hom_search(&h.complement(), &k.swapped(), budget);
        if direct.is_found() != dual.is_found() || matches!(direct, HomOutcome::BudgetExhausted) {
            failures[4] += 1;
        }
    }
    let names = [
        "f >= g",
        "g invariant under blow-up",
        "g invariant under quotient",
        "envelope concave (chord slack 1e-8)",
        "hom search complement duality",
    ];
    for (name, count) in names.iter().zip(failures) {
        checks.equal(&format!("{name}: failures"), int(0), int(count));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("editlab").chain(args.iter().copied()))
    }

    #[test]
    fn splits_crg_lists_outside_parentheses() {
        assert_eq!(split_top_level("K(1,2), K(0,3),inline:crg 1;w"), vec!["K(1,2)", "K(0,3)", "inline:crg 1;w"]);
        assert!(split_top_level("").is_empty());
    }

    #[test]
    fn resolves_references() {
        assert_eq!(resolve_graph("catalog:K33").unwrap(), complete_bipartite(3, 3).unwrap());
        assert_eq!(resolve_graph("inline:3:0-1,1-2").unwrap().edge_count(), 2);
        assert_eq!(resolve_graph("graph6:Bw").unwrap().edge_count(), 3);
        assert!(resolve_graph("inline:3:0-3").unwrap_err().contains("inline:3:0-3"));
        assert_eq!(resolve_crg("K(1,2)").unwrap(), gray_complete(1, 2).unwrap());
        assert_eq!(resolve_crg("inline:crg 2;wb;g").unwrap(), gray_complete(1, 1).unwrap());
        assert!(resolve_crg("K(1)").is_err());
        assert!(resolve_crg("nonsense").unwrap_err().contains("nonsense"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]).status, 2);
        assert_eq!(run_args(&["frobnicate"]).status, 2);
        assert_eq!(run_args(&["chib"]).status, 2);
        assert_eq!(run_args(&["bound", "--graph", "catalog:K33", "--tol", "-1"]).status, 2);
        assert_eq!(run_args(&["gcurve", "--crg", "K(1,2)", "--grid", "1"]).status, 2);
    }

    #[test]
    fn domain_errors_name_the_input() {
        let out = run_args(&["chib", "--graph", "catalog:NoSuchGraph"]);
        assert_eq!(out.status, 1);
        assert!(out.stderr.contains("catalog:NoSuchGraph"), "{}", out.stderr);
    }

    #[test]
    fn budget_exhaustion_exits_3() {
        let out = run_args(&["hom", "--graph", "catalog:H9", "--crg", "inline:crg 4;wwww;ggg;gg;b", "--budget", "1"]);
        assert_eq!(out.status, 3, "{}", out.stderr);
    }

    #[test]
    fn chib_of_h9() {
        let out = run_args(&["chib", "--graph", "catalog:H9"]);
        assert_eq!(out.status, 0);
        assert_eq!(
            out.stdout,
            "{\"graph\":\"catalog:H9\",\"order\":9,\"edges\":21,\"chi_b\":4,\"lower_bound\":0.16666666666666666}\n"
        );
    }

    #[test]
    fn text_and_csv_flattening() {
        let a = Artifact::new(obj(vec![
            ("x", num(0.5)),
            ("pair", Value::List(vec![int(1), int(2)])),
            ("nested", obj(vec![("s", text("a,b"))])),
            ("none", Value::Null),
        ]));
        assert_eq!(a.render(Format::Csv), "key,value\nx,0.5\npair,\"[1, 2]\"\nnested.s,\"a,b\"\nnone,\n");
        assert_eq!(a.render(Format::Text), "x: 0.5\npair: [1, 2]\nnested.s: a,b\nnone: null\n");
        assert_eq!(a.render(Format::Json), "{\"x\":0.5,\"pair\":[1,2],\"nested\":{\"s\":\"a,b\"},\"none\":null}\n");
    }
}
