use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;

use hag_core::cost::{evaluate_cost, CostCoefficients, CostReport, CSV_HEADER};
use hag_core::exec::{
    count_runtime_ops, forward_gnn_graph, forward_hag, max_relative_deviation, FeatureMatrix,
    ForwardOutput, GnnModel, ModelKind, Scalar,
};
use hag_core::generate;
use hag_core::oracle::{brute_force_optimal_set, prefix_lower_bound, verify_approximation};
use hag_core::parallel::map_collect;
use hag_core::search::{search, SearchConfig};
use hag_core::{
    check_equivalence, AggregateMode, Equivalence, ExecError, Hag, InputGraph, OracleError,
    Parallelism,
};
use serde::Serialize;

use crate::{GenArgs, GenKind, GraphInput, OptimizeArgs, OracleArgs, RunArgs, SearchArgs, SweepArgs, VerifyArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations.
    Usage(String),
    /// Unreadable, unwritable or malformed files.
    Io(String),
    /// The check the command exists to perform did not hold.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Failed(_) => ExitCode::from(1),
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<ExecError> for CliError {
    fn from(e: ExecError) -> Self {
        match e {
            ExecError::Graph(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult = Result<ExitCode, CliError>;

fn read_text(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        _ => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn load_graph(input: &GraphInput) -> Result<InputGraph, CliError> {
    let text = read_text(&input.input)?;
    InputGraph::parse_edge_list(&text, input.undirected)
        .map_err(|e| CliError::Io(format!("{}: {e}", input.input.display())))
}

fn load_hag(path: &Path) -> Result<Hag, hag_core::GraphError> {
    let text = fs::read_to_string(path).map_err(|e| hag_core::GraphError::Schema(e.to_string()))?;
    Hag::from_json(&text)
}

fn graph_name(input: &GraphInput) -> String {
    if input.input == Path::new("-") {
        return "stdin".into();
    }
    input
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().replace(',', "_"))
        .unwrap_or_else(|| "graph".into())
}

fn coefficients(alpha: f64, beta: f64) -> Result<CostCoefficients, CliError> {
    CostCoefficients::new(alpha, beta).map_err(CliError::Usage)
}

impl SearchArgs {
    fn config(&self, g: &InputGraph) -> Result<SearchConfig, CliError> {
        let capacity = match self.capacity {
            Some(c) => c,
            None => {
                let f = self.capacity_frac;
                if !(0.0..=1.0).contains(&f) {
                    return Err(CliError::Usage(format!("--capacity-frac must be in [0, 1], got {f}")));
                }
                (f * g.num_nodes() as f64).floor() as usize
            }
        };
        Ok(SearchConfig::new(capacity, self.mode))
    }
}

fn ratio(before: usize, after: usize) -> Option<f64> {
    (after > 0).then(|| before as f64 / after as f64)
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    graph: &'a str,
    mode: AggregateMode,
    capacity: usize,
    before: CostReport,
    after: CostReport,
    aggregation_reduction: Option<f64>,
    transfer_reduction: Option<f64>,
}

pub fn optimize(a: OptimizeArgs) -> CliResult {
    let g = load_graph(&a.graph)?;
    let coeff = coefficients(a.search.alpha, a.search.beta)?;
    let cfg = a.search.config(&g)?;
    let (hag, trace) = search(&g, cfg, coeff);
    if !check_equivalence(&g, &hag).map_err(|e| CliError::Failed(e.to_string()))?.is_equivalent() {
        return Err(CliError::Failed("search produced a non-equivalent HAG".into()));
    }
    if let Some(out) = &a.output {
        write_text(Some(out), &(hag.to_json() + "\n"))?;
    }
    if let Some(path) = &a.trace {
        write_text(Some(path), &trace.to_json_lines())?;
    }
    let name = graph_name(&a.graph);
    let before = evaluate_cost(&Hag::trivial(&g, cfg.mode), coeff);
    let after = evaluate_cost(&hag, coeff);
    let report = OptimizeReport {
        graph: &name,
        mode: cfg.mode,
        capacity: cfg.capacity,
        aggregation_reduction: ratio(before.num_aggregations, after.num_aggregations),
        transfer_reduction: ratio(before.num_transfers, after.num_transfers),
        before,
        after,
    };
    let text = if a.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        format!(
            "{CSV_HEADER}\n{}\n{}\n",
            report.before.csv_row(&name, cfg.mode, 0),
            report.after.csv_row(&name, cfg.mode, cfg.capacity)
        )
    };
    write_text(None, &text)?;
    let fmt_ratio = |r: Option<f64>| r.map_or("n/a".to_string(), |x| format!("{x:.2}x"));
    eprintln!(
        "aggregations {} -> {} ({}), transfers {} -> {} ({}), {} aggregation nodes",
        report.before.num_aggregations,
        report.after.num_aggregations,
        fmt_ratio(report.aggregation_reduction),
        report.before.num_transfers,
        report.after.num_transfers,
        fmt_ratio(report.transfer_reduction),
        report.after.num_agg_nodes
    );
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: VerifyArgs) -> CliResult {
    let g = load_graph(&a.graph)?;
    if !a.hag.exists() {
        return Err(CliError::Io(format!("{}: file not found", a.hag.display())));
    }
    let hag = load_hag(&a.hag).map_err(|e| CliError::Failed(format!("invalid HAG: {e}")))?;
    match check_equivalence(&g, &hag).map_err(|e| CliError::Failed(format!("invalid HAG: {e}")))? {
        Equivalence::Equivalent => {
            println!("equivalent");
            Ok(ExitCode::SUCCESS)
        }
        mismatch => Err(CliError::Failed(mismatch.to_string())),
    }
}

trait CliScalar: Scalar + fmt::Display {
    const TOLERANCE: f64;
    fn random(rows: usize, dim: usize, seed: u64) -> FeatureMatrix<Self>;
}

impl CliScalar for f64 {
    const TOLERANCE: f64 = 1e-9;
    fn random(rows: usize, dim: usize, seed: u64) -> FeatureMatrix<Self> {
        FeatureMatrix::<f64>::seeded(rows, dim, seed)
    }
}

impl CliScalar for i64 {
    const TOLERANCE: f64 = 0.0;
    fn random(rows: usize, dim: usize, seed: u64) -> FeatureMatrix<Self> {
        FeatureMatrix::<i64>::seeded(rows, dim, seed)
    }
}

pub fn run(a: RunArgs) -> CliResult {
    if a.integer {
        run_typed::<i64>(&a)
    } else {
        run_typed::<f64>(&a)
    }
}

fn counters_csv<S: Scalar>(path: &str, out: &ForwardOutput<S>, text: &mut String) {
    for (k, layer) in out.layers.iter().enumerate() {
        let c = layer.counters;
        text.push_str(&format!("{path},{},{},{}\n", k + 1, c.binary_aggregations, c.activation_reads));
    }
    let total = count_runtime_ops(out);
    text.push_str(&format!("{path},total,{},{}\n", total.binary_aggregations, total.activation_reads));
}

/// Largest relative deviation over every layer's aggregates and outputs.
fn deviation<S: Scalar>(a: &ForwardOutput<S>, b: &ForwardOutput<S>) -> f64 {
    a.layers
        .iter()
        .zip(&b.layers)
        .map(|(x, y)| {
            max_relative_deviation(&x.aggregated, &y.aggregated).max(max_relative_deviation(&x.hidden, &y.hidden))
        })
        .fold(0.0, f64::max)
}

fn run_typed<S: CliScalar>(a: &RunArgs) -> CliResult {
    let g = load_graph(&a.graph)?;
    let kind = ModelKind::from(a.model);
    let x = match &a.features {
        Some(path) => {
            let x = FeatureMatrix::<S>::from_csv(&read_text(path)?)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if x.rows() != g.num_nodes() && g.num_nodes() > 0 {
                return Err(CliError::Usage(format!(
                    "{} has {} rows, graph has {} nodes",
                    path.display(),
                    x.rows(),
                    g.num_nodes()
                )));
            }
            x
        }
        None => S::random(g.num_nodes(), a.dim, a.seed),
    };
    let dim = if g.num_nodes() > 0 { x.dim() } else { a.dim };
    let model = GnnModel::seeded(kind, dim, a.layers, a.activation.into(), a.seed, a.integer);
    let par = if a.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    let hag = match &a.hag {
        Some(path) => {
            let h = load_hag(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if h.num_input_nodes() != g.num_nodes() {
                return Err(CliError::Usage(format!(
                    "HAG has {} input nodes, graph has {}",
                    h.num_input_nodes(),
                    g.num_nodes()
                )));
            }
            Some(h)
        }
        None if a.compare => {
            let mut cfg = a.search.config(&g)?;
            cfg.mode = kind.mode();
            Some(search(&g, cfg, coefficients(a.search.alpha, a.search.beta)?).0)
        }
        None => None,
    };

    let mut report = String::from("path,layer,binary_aggregations,activation_reads\n");
    let (primary, compare) = match (&hag, a.compare) {
        (Some(h), true) => {
            let plain = forward_gnn_graph(&g, &model, &x, par)?;
            let hier = forward_hag(h, &model, &x, par)?;
            counters_csv("graph", &plain, &mut report);
            counters_csv("hag", &hier, &mut report);
            let dev = deviation(&plain, &hier);
            (hier, Some(dev))
        }
        (Some(h), false) => {
            let out = forward_hag(h, &model, &x, par)?;
            counters_csv("hag", &out, &mut report);
            (out, None)
        }
        (None, _) => {
            let out = forward_gnn_graph(&g, &model, &x, par)?;
            counters_csv("graph", &out, &mut report);
            (out, None)
        }
    };
    if let Some(dev) = compare {
        report.push_str(&format!("max deviation: {dev}\n"));
    }
    write_text(None, &report)?;
    if let Some(out) = &a.output {
        let h = primary
            .final_hidden()
            .map(|m| m.to_csv())
            .unwrap_or_else(|| x.to_csv());
        write_text(Some(out), &h)?;
    }
    match compare {
        Some(dev) if dev > S::TOLERANCE => Err(CliError::Failed(format!(
            "graph and HAG outputs differ: max deviation {dev} exceeds {}",
            S::TOLERANCE
        ))),
        _ => Ok(ExitCode::SUCCESS),
    }
}

fn parse_capacities(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad capacity list {spec:?}; use a..b or a,b,c"));
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

fn default_capacities(g: &InputGraph) -> Vec<usize> {
    let top = g.num_nodes() / 4;
    let mut caps = vec![0];
    let mut c = 1;
    while c < top {
        caps.push(c);
        c *= 2;
    }
    if top > 0 {
        caps.push(top);
    }
    caps
}

pub fn sweep(a: SweepArgs) -> CliResult {
    let g = load_graph(&a.graph)?;
    let coeff = coefficients(a.alpha, a.beta)?;
    let caps = match &a.capacities {
        Some(spec) => parse_capacities(spec)?,
        None => default_capacities(&g),
    };
    let name = graph_name(&a.graph);
    let rows = map_collect(Parallelism::Parallel, &caps, |&cap| {
        let (h, _) = search(&g, SearchConfig::new(cap, a.mode), coeff);
        evaluate_cost(&h, coeff).csv_row(&name, a.mode, cap)
    });
    let mut text = format!("{CSV_HEADER}\n");
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_text(a.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct OracleReport {
    nodes: usize,
    edges: usize,
    capacity: usize,
    greedy_cost: f64,
    optimal_cost: f64,
    trivial_cost: f64,
    bound: f64,
    bound_holds: bool,
    candidates_examined: usize,
    sequential_aggregations: usize,
    prefix_lower_bound: usize,
}

pub fn oracle_compare(a: OracleArgs) -> CliResult {
    let g = load_graph(&a.graph)?;
    let coeff = coefficients(a.alpha, a.beta)?;
    let opt = brute_force_optimal_set(&g, a.capacity, coeff).map_err(|e| match e {
        OracleError::TooLarge { .. } => CliError::Usage(e.to_string()),
    })?;
    let (greedy, _) = search(&g, SearchConfig::new(a.capacity, AggregateMode::Set), coeff);
    let (seq, _) = search(&g, SearchConfig::new(g.num_edges(), AggregateMode::Sequential), coeff);
    let trivial_cost = evaluate_cost(&Hag::trivial(&g, AggregateMode::Set), coeff).cost_value;
    let e = std::f64::consts::E;
    let report = OracleReport {
        nodes: g.num_nodes(),
        edges: g.num_edges(),
        capacity: a.capacity,
        greedy_cost: evaluate_cost(&greedy, coeff).cost_value,
        optimal_cost: opt.best_cost,
        trivial_cost,
        bound: trivial_cost / e + (e - 1.0) / e * opt.best_cost,
        bound_holds: verify_approximation(&g, &greedy, &opt, coeff),
        candidates_examined: opt.num_candidates_examined,
        sequential_aggregations: evaluate_cost(&seq, coeff).num_aggregations,
        prefix_lower_bound: prefix_lower_bound(&g).lb,
    };
    write_text(None, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    if !report.bound_holds {
        return Err(CliError::Failed("greedy cost exceeds the approximation bound".into()));
    }
    if report.sequential_aggregations != report.prefix_lower_bound {
        return Err(CliError::Failed("sequential search misses the prefix lower bound".into()));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn gen(a: GenArgs) -> CliResult {
    let g = match a.kind {
        GenKind::Diamond => generate::diamond(),
        GenKind::Share { m, n } => generate::share(m, n),
        GenKind::Er { n, p, seed, shuffle } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Usage(format!("p must be in [0, 1], got {p}")));
            }
            if shuffle {
                generate::erdos_renyi_shuffled(n, p, seed)
            } else {
                generate::erdos_renyi(n, p, seed)
            }
        }
    };
    write_text(a.output.as_deref(), &g.to_edge_list())?;
    Ok(ExitCode::SUCCESS)
}
