//! The `bnkit` command line. Every run prints one JSON report on stdout and
//! exits 0 (ok), 1 (data or algorithm error) or 2 (usage error).

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::causal::{instrumental_variables, minimal_adjustment_sets_limited, CausalQuery, IvOptions};
use crate::data::DataTable;
use crate::error::{Error, ParseDiagnostic};
use crate::fit::{bayes_fit, em_fit, mle_fit, EmConfig, PriorSpec};
use crate::graph::{pdag_to_dag, Dag};
use crate::infer::{build_junction_tree, ve_query, EliminationHeuristic, Evidence};
use crate::io::{self, parse_bif_with_warnings, parse_uai, read_csv, serialize_bif, serialize_uai, write_csv};
use crate::learn::{chow_liu, hill_climb_traced, mmhc, pc_stable_with_oracle, structure_score, tan};
use crate::learn::{CiMethod, DataCiTest, EdgeWeight, HillClimbOptions, ScoreMethod};
use crate::metrics::{correlation_score, log_likelihood, CorrelationScoreConfig};
use crate::model::{DiscreteBayesianNetwork, TabularCpd, VariableMeta};
use crate::simulate::{approx_query, simulate, SamplingMode, SimulationSpec};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "BN_ENGINE_SEED";

#[derive(Debug, Parser)]
#[command(name = "bnkit", version, about = "Discrete Bayesian network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a graph from a CSV dataset.
    Learn(LearnArgs),
    /// Fit CPDs for a graph from a CSV dataset.
    Fit(FitArgs),
    /// Compute a posterior distribution.
    Query(QueryArgs),
    /// Sample a dataset from a model.
    Simulate(SimulateArgs),
    /// Find adjustment sets or instrumental variables.
    Identify(IdentifyArgs),
    /// Score a model or graph against data.
    Score(ScoreArgs),
    /// Convert between BIF and UAI.
    Convert(ConvertArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Learn(_) => "learn",
            Command::Fit(_) => "fit",
            Command::Query(_) => "query",
            Command::Simulate(_) => "simulate",
            Command::Identify(_) => "identify",
            Command::Score(_) => "score",
            Command::Convert(_) => "convert",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algorithm {
    Pc,
    Hc,
    Mmhc,
    Chowliu,
    Tan,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoreName {
    Bic,
    Aic,
    K2,
    Bdeu,
    Bds,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CiName {
    /// Pearson chi-square
    Chi2,
    /// G-test (log-likelihood ratio)
    G,
    /// Modified log-likelihood ratio
    ModifiedG,
    /// Cressie-Read, lambda 2/3
    CressieRead,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightName {
    /// Mutual information
    Mi,
    /// Mutual information over the mean of the two entropies
    Nmi,
}

#[derive(Debug, Args)]
struct LearnArgs {
    /// Input CSV with a header row.
    data: PathBuf,
    /// Structure learning algorithm.
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    /// Score for hc and mmhc [default: bic].
    #[arg(long, value_enum)]
    score: Option<ScoreName>,
    /// Equivalent sample size for bdeu and bds.
    #[arg(long)]
    ess: Option<f64>,
    /// Independence test for pc and mmhc [default: chi2].
    #[arg(long, value_enum)]
    ci_test: Option<CiName>,
    /// Significance level for pc and mmhc, strictly between 0 and 1 [default: 0.05].
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest conditioning set tried by pc.
    #[arg(long)]
    max_cond: Option<usize>,
    /// Largest parent set allowed by hc.
    #[arg(long)]
    max_indegree: Option<usize>,
    /// Length of the hc tabu list [default: 100].
    #[arg(long)]
    tabu_length: Option<usize>,
    /// Edge weight for chowliu and tan [default: mi].
    #[arg(long, value_enum)]
    edge_weight: Option<WeightName>,
    /// Class variable for tan.
    #[arg(long)]
    class: Option<String>,
    /// Root of the tree for chowliu and tan.
    #[arg(long)]
    root: Option<String>,
    /// Random seed (falls back to BN_ENGINE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Write the graph here: `.bif` gets uniform CPDs, anything else an edge list.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitMethod {
    Mle,
    Bayes,
    Em,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PriorName {
    K2,
    Bdeu,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Graph: a BIF or UAI model, or an edge list (`A -> B` per line).
    dag: PathBuf,
    /// Training data CSV.
    data: PathBuf,
    /// Estimator.
    #[arg(long, value_enum, default_value = "mle")]
    method: FitMethod,
    /// Dirichlet prior for bayes [default: k2].
    #[arg(long, value_enum)]
    prior: Option<PriorName>,
    /// Equivalent sample size of the bdeu prior [default: 1].
    #[arg(long)]
    ess: Option<f64>,
    /// Comma-separated latent variables (em only). Latents of an edge list get two states.
    #[arg(long, value_delimiter = ',')]
    latent: Vec<String>,
    /// EM iteration cap [default: 100].
    #[arg(long)]
    max_iter: Option<usize>,
    /// EM log-likelihood tolerance [default: 1e-4].
    #[arg(long)]
    tol: Option<f64>,
    /// Random seed for EM initialization (falls back to BN_ENGINE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Write the fitted model as BIF; without it the model goes into the report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Engine {
    Ve,
    Bp,
    Approx,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Heuristic {
    MinFill,
    MinNeighbours,
    MinWeight,
    WeightedMinFill,
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Model file (BIF or UAI).
    model: PathBuf,
    /// Comma-separated query variables.
    #[arg(long, value_delimiter = ',', required = true)]
    query: Vec<String>,
    /// Hard evidence `VAR=STATE`, comma-separated; STATE is a label or an index.
    #[arg(long, value_delimiter = ',')]
    evidence: Vec<String>,
    /// Virtual evidence `VAR:l1,l2,...`; repeatable.
    #[arg(long = "virtual")]
    virtual_evidence: Vec<String>,
    /// Inference engine.
    #[arg(long, value_enum, default_value = "ve")]
    engine: Engine,
    /// Elimination heuristic for ve.
    #[arg(long, value_enum, default_value = "min-fill")]
    heuristic: Heuristic,
    /// Sample count for approx [default: 10000].
    #[arg(long)]
    samples: Option<usize>,
    /// Random seed for approx (falls back to BN_ENGINE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    /// Likelihood weighting
    Lw,
    /// Rejection sampling
    Rejection,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Model file (BIF or UAI).
    model: PathBuf,
    /// Number of rows (proposals in rejection mode).
    #[arg(long)]
    n: usize,
    /// Random seed (falls back to BN_ENGINE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Hard intervention `VAR=STATE`, comma-separated.
    #[arg(long = "do", value_delimiter = ',')]
    interventions: Vec<String>,
    /// Hard evidence `VAR=STATE`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    evidence: Vec<String>,
    /// Virtual evidence `VAR:l1,l2,...`; repeatable.
    #[arg(long = "virtual")]
    virtual_evidence: Vec<String>,
    /// Replacement CPD `VAR:p1,p2,...` over the variable's own parents
    /// (parent-major, child fastest); repeatable.
    #[arg(long = "virtual-do")]
    virtual_do: Vec<String>,
    /// How evidence is imposed.
    #[arg(long, value_enum, default_value = "lw")]
    mode: Mode,
    /// Write the CSV here; without it the CSV text goes into the report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum What {
    Adjustment,
    Iv,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    /// Graph: a BIF or UAI model, or an edge list.
    dag: PathBuf,
    /// Exposure variable.
    #[arg(long)]
    exposure: String,
    /// Outcome variable.
    #[arg(long)]
    outcome: String,
    /// What to look for.
    #[arg(long, value_enum, default_value = "adjustment")]
    what: What,
    /// Comma-separated unobserved variables.
    #[arg(long, value_delimiter = ',')]
    latent: Vec<String>,
    /// Most results to report [default: 100].
    #[arg(long)]
    limit: Option<usize>,
    /// Largest conditioning set for conditional instruments.
    #[arg(long)]
    max_conditioning: Option<usize>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// A BIF or UAI model, or an edge-list graph.
    input: PathBuf,
    /// Data CSV.
    data: PathBuf,
    /// `loglik`, `structure:<bic|aic|k2|bdeu|bds>` or `correlation`.
    #[arg(long)]
    metric: String,
    /// Equivalent sample size for structure:bdeu and structure:bds [default: 10].
    #[arg(long)]
    ess: Option<f64>,
    /// Significance level for correlation [default: 0.05].
    #[arg(long)]
    alpha: Option<f64>,
    /// Independence test for correlation [default: chi2].
    #[arg(long, value_enum)]
    ci_test: Option<CiName>,
    /// Comma-separated latent variables.
    #[arg(long, value_delimiter = ',')]
    latent: Vec<String>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Input model, `.bif` or `.uai`.
    input: PathBuf,
    /// Output model, `.bif` or `.uai`.
    output: PathBuf,
}

enum CliError {
    Usage(String),
    Domain(Error, Option<&'static str>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e, None)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let command = args.get(1).and_then(|a| a.to_str()).unwrap_or("").to_string();
            let msg = e.render().to_string();
            let report = json!({
                "command": command,
                "status": "error",
                "payload": Value::Null,
                "diagnostics": [{"kind": "UsageError", "severity": "error", "message": msg.trim_end()}],
            });
            emit(out, &report);
            return 2;
        }
    };
    let command = cli.command.name();
    let mut warnings = Vec::new();
    let result = match &cli.command {
        Command::Learn(a) => learn(a),
        Command::Fit(a) => fit(a, &mut warnings),
        Command::Query(a) => query(a, &mut warnings),
        Command::Simulate(a) => simulate_cmd(a, &mut warnings),
        Command::Identify(a) => identify(a, &mut warnings),
        Command::Score(a) => score(a, &mut warnings),
        Command::Convert(a) => convert(a, &mut warnings),
    };
    let mut diagnostics: Vec<Value> = warnings.iter().map(diagnostic_json).collect();
    let (status, payload, code) = match result {
        Ok(p) => ("ok", p, 0),
        Err(CliError::Usage(msg)) => {
            diagnostics.push(json!({"kind": "UsageError", "severity": "error", "message": msg}));
            ("error", Value::Null, 2)
        }
        Err(CliError::Domain(e, hint)) => {
            let mut d = json!({"kind": e.kind(), "severity": "error", "message": e.to_string()});
            if let Some((line, column)) = e.position() {
                d["line"] = json!(line);
                d["column"] = json!(column);
            }
            if let Some(h) = hint {
                d["hint"] = json!(h);
            }
            diagnostics.push(d);
            ("error", Value::Null, 1)
        }
    };
    let report = json!({
        "command": command,
        "status": status,
        "payload": payload,
        "diagnostics": diagnostics,
    });
    emit(out, &report);
    code
}

fn emit(out: &mut dyn Write, report: &Value) {
    let text = serde_json::to_string_pretty(report).expect("JSON values serialize");
    let _ = writeln!(out, "{text}");
}

fn diagnostic_json(d: &ParseDiagnostic) -> Value {
    json!({
        "kind": "ParseWarning",
        "severity": d.severity.to_string(),
        "message": d.message,
        "line": d.line,
        "column": d.column,
    })
}

fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .or_else(|_| usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())).into())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())).into())
}

fn is_model_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("bif") || e.eq_ignore_ascii_case("uai"))
}

fn load_model(path: &Path, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<DiscreteBayesianNetwork> {
    let text = read_text(path)?;
    if io::is_uai(path) {
        Ok(parse_uai(&text)?)
    } else {
        let (bn, w) = parse_bif_with_warnings(&text)?;
        warnings.extend(w);
        Ok(bn)
    }
}

/// Parses `A -> B` lines; a line with a single name declares a node.
/// Blank lines and `#` comments are skipped.
pub fn parse_edge_list(text: &str) -> crate::error::Result<Dag> {
    let mut dag = Dag::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let diag = |msg: String| Error::Parse(ParseDiagnostic::error(i + 1, 1, msg));
        match line.split_once("->") {
            Some((a, b)) => {
                let (a, b) = (a.trim(), b.trim());
                if a.is_empty() || b.is_empty() {
                    return Err(diag(format!("malformed edge `{line}`")));
                }
                dag.add_node(a).map_err(|e| diag(e.to_string()))?;
                dag.add_node(b).map_err(|e| diag(e.to_string()))?;
                dag.add_edge(a, b).map_err(|e| diag(e.to_string()))?;
            }
            None => dag.add_node(line).map_err(|e| diag(e.to_string()))?,
        }
    }
    Ok(dag)
}

/// One edge per line, isolated nodes on their own line.
pub fn format_edge_list(dag: &Dag) -> String {
    let mut out = String::new();
    for n in dag.nodes() {
        if dag.parents(n).is_empty() && dag.children(n).is_empty() {
            out.push_str(n);
            out.push('\n');
        }
    }
    for (a, b) in dag.edges() {
        out.push_str(&format!("{a} -> {b}\n"));
    }
    out
}

/// A graph read from disk, with the model when the file carried one.
struct GraphInput {
    dag: Dag,
    model: Option<DiscreteBayesianNetwork>,
}

fn load_graph(path: &Path, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<GraphInput> {
    if is_model_path(path) {
        let bn = load_model(path, warnings)?;
        Ok(GraphInput {
            dag: bn.dag().clone(),
            model: Some(bn),
        })
    } else {
        Ok(GraphInput {
            dag: parse_edge_list(&read_text(path)?)?,
            model: None,
        })
    }
}

fn load_data(path: &Path, schema: Option<&[VariableMeta]>) -> CliResult<DataTable> {
    Ok(read_csv(&read_text(path)?, schema)?)
}

fn ci_method(name: Option<CiName>) -> CiMethod {
    match name.unwrap_or(CiName::Chi2) {
        CiName::Chi2 => CiMethod::chi_squared(),
        CiName::G => CiMethod::g_test(),
        CiName::ModifiedG => CiMethod::PowerDivergence { lambda: -1.0 },
        CiName::CressieRead => CiMethod::cressie_read(),
    }
}

fn score_method(name: Option<ScoreName>, ess: Option<f64>) -> CliResult<ScoreMethod> {
    let ess_value = ess.unwrap_or(10.0);
    if !(ess_value > 0.0 && ess_value.is_finite()) {
        return usage("--ess must be positive");
    }
    let name = name.unwrap_or(ScoreName::Bic);
    if ess.is_some() && !matches!(name, ScoreName::Bdeu | ScoreName::Bds) {
        return usage("--ess applies to bdeu and bds only");
    }
    Ok(match name {
        ScoreName::Bic => ScoreMethod::Bic,
        ScoreName::Aic => ScoreMethod::Aic,
        ScoreName::K2 => ScoreMethod::K2,
        ScoreName::Bdeu => ScoreMethod::BDeu { ess: ess_value },
        ScoreName::Bds => ScoreMethod::BDs { ess: ess_value },
    })
}

fn check_alpha(alpha: Option<f64>) -> CliResult<f64> {
    let a = alpha.unwrap_or(0.05);
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        usage(format!("--alpha must lie strictly between 0 and 1, got {a}"))
    }
}

fn edges_json(dag: &Dag) -> Value {
    json!(dag.edges().into_iter().map(|(a, b)| vec![a, b]).collect::<Vec<_>>())
}

fn uniform_model(dag: &Dag, data: &DataTable) -> CliResult<DiscreteBayesianNetwork> {
    let mut metas = Vec::new();
    let mut cpds = Vec::new();
    for n in dag.nodes() {
        let meta = data.meta(n)?.clone();
        let parents: Vec<(&str, usize)> = dag
            .parents(n)
            .iter()
            .map(|p| Ok((p.as_str(), data.meta(p)?.cardinality())))
            .collect::<crate::error::Result<_>>()?;
        cpds.push(TabularCpd::uniform(n, meta.cardinality(), &parents)?);
        metas.push(meta);
    }
    Ok(DiscreteBayesianNetwork::from_parts(
        dag.clone(),
        metas,
        cpds,
        BTreeSet::new(),
    )?)
}

fn learn(a: &LearnArgs) -> CliResult<Value> {
    let seed = resolve_seed(a.seed)?;
    let uses_ci = matches!(a.algorithm, Algorithm::Pc | Algorithm::Mmhc);
    let uses_score = matches!(a.algorithm, Algorithm::Hc | Algorithm::Mmhc);
    let is_tree = matches!(a.algorithm, Algorithm::Chowliu | Algorithm::Tan);
    let misplaced = [
        ("--ci-test", a.ci_test.is_some() && !uses_ci),
        ("--alpha", a.alpha.is_some() && !uses_ci),
        (
            "--max-cond",
            a.max_cond.is_some() && !matches!(a.algorithm, Algorithm::Pc),
        ),
        ("--score", a.score.is_some() && !uses_score),
        ("--ess", a.ess.is_some() && !uses_score),
        (
            "--max-indegree",
            a.max_indegree.is_some() && !matches!(a.algorithm, Algorithm::Hc),
        ),
        (
            "--tabu-length",
            a.tabu_length.is_some() && !matches!(a.algorithm, Algorithm::Hc),
        ),
        ("--edge-weight", a.edge_weight.is_some() && !is_tree),
        ("--root", a.root.is_some() && !is_tree),
        ("--class", a.class.is_some() && !matches!(a.algorithm, Algorithm::Tan)),
    ];
    if let Some((flag, _)) = misplaced.iter().find(|(_, bad)| *bad) {
        return usage(format!("{flag} does not apply to --algorithm {:?}", a.algorithm).to_lowercase());
    }
    let alpha = if uses_ci { Some(check_alpha(a.alpha)?) } else { None };
    let score = if uses_score {
        Some(score_method(a.score, a.ess)?)
    } else {
        None
    };
    if matches!(a.algorithm, Algorithm::Tan) && a.class.is_none() {
        return usage("--algorithm tan needs --class");
    }
    let data = load_data(&a.data, None)?;
    let weight = match a.edge_weight.unwrap_or(WeightName::Mi) {
        WeightName::Mi => EdgeWeight::MutualInformation,
        WeightName::Nmi => EdgeWeight::NormalizedMutualInformation,
    };
    let mut payload = json!({"algorithm": format!("{:?}", a.algorithm).to_lowercase(), "seed": seed});
    let dag = match a.algorithm {
        Algorithm::Pc => {
            let vars = data.column_names();
            let test = DataCiTest {
                data: &data,
                method: ci_method(a.ci_test),
            };
            let res = pc_stable_with_oracle(&test, &vars, alpha.expect("pc uses alpha"), a.max_cond)?;
            let directed: Vec<Vec<String>> = res
                .pdag
                .directed_edges()
                .iter()
                .map(|(x, y)| vec![x.clone(), y.clone()])
                .collect();
            let undirected: Vec<Vec<String>> = res
                .pdag
                .undirected_edges()
                .iter()
                .map(|(x, y)| vec![x.clone(), y.clone()])
                .collect();
            payload["directed"] = json!(directed);
            payload["undirected"] = json!(undirected);
            payload["tests_performed"] = json!(res.tests_performed);
            pdag_to_dag(&res.pdag)?
        }
        Algorithm::Hc => {
            let opts = HillClimbOptions {
                max_indegree: a.max_indegree,
                tabu_length: a.tabu_length.unwrap_or(HillClimbOptions::default().tabu_length),
                ..HillClimbOptions::default()
            };
            let res = hill_climb_traced(&data, score.as_ref().expect("hc uses a score"), &opts)?;
            payload["score"] = json!(res.score);
            payload["moves"] = json!(res.moves.len());
            res.dag
        }
        Algorithm::Mmhc => {
            let method = score.expect("mmhc uses a score");
            let dag = mmhc(&data, alpha.expect("mmhc uses alpha"), &ci_method(a.ci_test), &method)?;
            payload["score"] = json!(structure_score(&dag, &data, &method)?);
            dag
        }
        Algorithm::Chowliu => chow_liu(&data, &weight, a.root.as_deref())?,
        Algorithm::Tan => tan(&data, a.class.as_deref().expect("checked"), &weight, a.root.as_deref())?,
    };
    payload["edges"] = edges_json(&dag);
    payload["nodes"] = json!(dag.nodes().collect::<Vec<_>>());
    if let Some(out) = &a.out {
        let text = if is_model_path(out) {
            let bn = uniform_model(&dag, &data)?;
            if io::is_uai(out) {
                serialize_uai(&bn)
            } else {
                serialize_bif(&bn)
            }
        } else {
            format_edge_list(&dag)
        };
        write_text(out, &text)?;
        payload["out"] = json!(out.display().to_string());
    }
    Ok(payload)
}

fn model_json(bn: &DiscreteBayesianNetwork) -> Value {
    let variables: BTreeMap<&str, &[String]> = bn.metas().map(|m| (m.name(), m.states())).collect();
    let cpds: BTreeMap<&str, Value> = bn
        .cpds()
        .map(|c| {
            (
                c.child(),
                json!({"parents": c.parents(), "values": c.factor().values()}),
            )
        })
        .collect();
    json!({"variables": variables, "cpds": cpds, "latents": bn.latents()})
}

fn fit(a: &FitArgs, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<Value> {
    let is_em = matches!(a.method, FitMethod::Em);
    if !a.latent.is_empty() && !is_em {
        return usage("--latent needs --method em");
    }
    if (a.max_iter.is_some() || a.tol.is_some()) && !is_em {
        return usage("--max-iter and --tol apply to --method em only");
    }
    if (a.prior.is_some() || a.ess.is_some()) && !matches!(a.method, FitMethod::Bayes) {
        return usage("--prior and --ess apply to --method bayes only");
    }
    if a.ess.is_some() && !matches!(a.prior, Some(PriorName::Bdeu)) {
        return usage("--ess needs --prior bdeu");
    }
    let seed = resolve_seed(a.seed)?;
    let graph = load_graph(&a.dag, warnings)?;
    for l in &a.latent {
        if !graph.dag.contains(l) {
            return usage(format!("latent `{l}` is not in the graph"));
        }
    }
    let schema: Option<Vec<VariableMeta>> = graph.model.as_ref().map(|m| m.metas().cloned().collect());
    let data = load_data(&a.data, schema.as_deref())?;
    let mut payload = json!({"method": format!("{:?}", a.method).to_lowercase()});
    let model = match a.method {
        FitMethod::Mle | FitMethod::Bayes => {
            let bn = if matches!(a.method, FitMethod::Mle) {
                mle_fit(&graph.dag, &data)
            } else {
                let prior = match a.prior.unwrap_or(PriorName::K2) {
                    PriorName::K2 => PriorSpec::K2,
                    PriorName::Bdeu => PriorSpec::BDeu {
                        ess: a.ess.unwrap_or(1.0),
                    },
                };
                bayes_fit(&graph.dag, &data, &prior)
            };
            let bn = bn.map_err(|e| match e {
                Error::MissingDataPresent(_) => {
                    CliError::Domain(e, Some("the data has missing cells; use --method em"))
                }
                e => e.into(),
            })?;
            payload["log_likelihood"] = json!(log_likelihood(&bn, &data)?);
            bn
        }
        FitMethod::Em => {
            let latents: Vec<VariableMeta> = a
                .latent
                .iter()
                .map(|l| match &graph.model {
                    Some(m) => m.meta(l).cloned(),
                    None => VariableMeta::with_cardinality(l.as_str(), 2),
                })
                .collect::<crate::error::Result<_>>()?;
            let defaults = EmConfig::default();
            let config = EmConfig {
                max_iter: a.max_iter.unwrap_or(defaults.max_iter),
                tol: a.tol.unwrap_or(defaults.tol),
                seed,
                ..defaults
            };
            let res = em_fit(&graph.dag, &data, &latents, &config)?;
            payload["log_likelihood"] = json!(res.log_likelihoods.last());
            payload["trace"] = json!(res.log_likelihoods);
            payload["iterations"] = json!(res.iterations);
            payload["converged"] = json!(res.converged);
            payload["seed"] = json!(seed);
            res.model
        }
    };
    match &a.out {
        Some(out) => {
            let text = if io::is_uai(out) {
                serialize_uai(&model)
            } else {
                serialize_bif(&model)
            };
            write_text(out, &text)?;
            payload["out"] = json!(out.display().to_string());
        }
        None => payload["model"] = model_json(&model),
    }
    Ok(payload)
}

fn state_of(bn: &DiscreteBayesianNetwork, var: &str, label: &str) -> CliResult<usize> {
    let meta = match bn.meta(var) {
        Ok(m) => m,
        Err(_) => return usage(format!("unknown variable `{var}`")),
    };
    if let Ok(s) = meta.state_index(label) {
        return Ok(s);
    }
    match label.parse::<usize>() {
        Ok(i) if i < meta.cardinality() => Ok(i),
        _ => usage(format!("`{label}` is not a state of `{var}`")),
    }
}

fn assignments(bn: &DiscreteBayesianNetwork, items: &[String], flag: &str) -> CliResult<Vec<(String, usize)>> {
    let mut out = Vec::new();
    for item in items {
        let Some((var, label)) = item.split_once('=') else {
            return usage(format!("{flag} expects VAR=STATE, got `{item}`"));
        };
        let var = var.trim();
        out.push((var.to_string(), state_of(bn, var, label.trim())?));
    }
    Ok(out)
}

fn vectors(bn: &DiscreteBayesianNetwork, items: &[String], flag: &str) -> CliResult<Vec<(String, Vec<f64>)>> {
    let mut out = Vec::new();
    for item in items {
        let Some((var, values)) = item.split_once(':') else {
            return usage(format!("{flag} expects VAR:v1,v2,..., got `{item}`"));
        };
        let var = var.trim();
        if bn.meta(var).is_err() {
            return usage(format!("unknown variable `{var}`"));
        }
        let parsed: std::result::Result<Vec<f64>, _> = values.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => out.push((var.to_string(), v)),
            Err(_) => return usage(format!("{flag}: `{values}` is not a list of numbers")),
        }
    }
    Ok(out)
}

fn query(a: &QueryArgs, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<Value> {
    if a.samples.is_some() && !matches!(a.engine, Engine::Approx) {
        return usage("--samples applies to --engine approx only");
    }
    let bn = load_model(&a.model, warnings)?;
    for q in &a.query {
        if bn.meta(q).is_err() {
            return usage(format!("unknown variable `{q}`"));
        }
    }
    let mut evidence = Evidence::new();
    for (v, s) in assignments(&bn, &a.evidence, "--evidence")? {
        evidence = evidence.observe(v, s);
    }
    for (v, l) in vectors(&bn, &a.virtual_evidence, "--virtual")? {
        evidence = evidence.likelihood(v, l);
    }
    let mut payload = json!({"engine": format!("{:?}", a.engine).to_lowercase()});
    let factor = match a.engine {
        Engine::Ve => {
            let h = match a.heuristic {
                Heuristic::MinFill => EliminationHeuristic::MinFill,
                Heuristic::MinNeighbours => EliminationHeuristic::MinNeighbours,
                Heuristic::MinWeight => EliminationHeuristic::MinWeight,
                Heuristic::WeightedMinFill => EliminationHeuristic::WeightedMinFill,
            };
            ve_query(&bn, &a.query, &evidence, &h)?
        }
        Engine::Bp => {
            evidence.validate(&bn)?;
            build_junction_tree(&bn)?.calibrate(&evidence)?.query(&a.query)?
        }
        Engine::Approx => {
            let seed = resolve_seed(a.seed)?;
            let n = a.samples.unwrap_or(10_000);
            let res = approx_query(&bn, &a.query, &evidence, n, seed)?;
            payload["samples"] = json!(n);
            payload["seed"] = json!(seed);
            payload["effective_sample_size"] = json!(res.effective_sample_size);
            res.distribution
        }
    };
    let factor = factor.reorder(&a.query)?;
    let states: Vec<&[String]> = a
        .query
        .iter()
        .map(|q| bn.meta(q).map(VariableMeta::states))
        .collect::<crate::error::Result<_>>()?;
    payload["variables"] = json!(a.query);
    payload["states"] = json!(states);
    payload["values"] = json!(factor.values());
    Ok(payload)
}

fn simulate_cmd(a: &SimulateArgs, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<Value> {
    let seed = resolve_seed(a.seed)?;
    let bn = load_model(&a.model, warnings)?;
    let mut spec = SimulationSpec::new(a.n, seed);
    spec.hard_intervention = assignments(&bn, &a.interventions, "--do")?;
    spec.hard_evidence = assignments(&bn, &a.evidence, "--evidence")?;
    spec.virtual_evidence = vectors(&bn, &a.virtual_evidence, "--virtual")?;
    for (var, values) in vectors(&bn, &a.virtual_do, "--virtual-do")? {
        let parents: Vec<(&str, usize)> = bn
            .dag()
            .parents(&var)
            .iter()
            .map(|p| Ok((p.as_str(), bn.cardinality(p)?)))
            .collect::<crate::error::Result<_>>()?;
        let expected = parents.iter().map(|(_, c)| c).product::<usize>() * bn.cardinality(&var)?;
        if values.len() != expected {
            return Err(Error::IncompatibleSpec(format!(
                "replacement CPD for `{var}` needs {expected} values over its parents, got {}",
                values.len()
            ))
            .into());
        }
        let cpd = TabularCpd::new(var.as_str(), bn.cardinality(&var)?, &parents, values)
            .map_err(|e| Error::IncompatibleSpec(e.to_string()))?;
        spec.virtual_intervention.push(cpd);
    }
    spec.mode = match a.mode {
        Mode::Lw => SamplingMode::LikelihoodWeighting,
        Mode::Rejection => SamplingMode::Rejection,
    };
    let weighted = !spec.hard_evidence.is_empty() || !spec.virtual_evidence.is_empty();
    let mut table = simulate(&bn, &spec)?;
    if !weighted {
        table = table.without_weights();
    }
    let csv = write_csv(&table);
    let mut payload = json!({
        "rows": table.n_rows(),
        "columns": table.column_names(),
        "weighted": weighted,
        "seed": seed,
    });
    if let Some(w) = table.weights() {
        let total: f64 = w.iter().sum();
        let squares: f64 = w.iter().map(|x| x * x).sum();
        payload["effective_sample_size"] = json!(if squares > 0.0 { total * total / squares } else { 0.0 });
    }
    match &a.out {
        Some(out) => {
            write_text(out, &csv)?;
            payload["out"] = json!(out.display().to_string());
        }
        None => payload["csv"] = json!(csv),
    }
    Ok(payload)
}

fn identify(a: &IdentifyArgs, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<Value> {
    let graph = load_graph(&a.dag, warnings)?;
    for v in [&a.exposure, &a.outcome].into_iter().chain(&a.latent) {
        if !graph.dag.contains(v) {
            return usage(format!("`{v}` is not in the graph"));
        }
    }
    if a.exposure == a.outcome {
        return usage("exposure and outcome must differ");
    }
    if a.max_conditioning.is_some() && matches!(a.what, What::Adjustment) {
        return usage("--max-conditioning applies to --what iv only");
    }
    let q = CausalQuery::new(graph.dag, &a.exposure, &a.outcome, a.latent.iter().map(String::as_str))?;
    let limit = a.limit.unwrap_or(crate::causal::DEFAULT_RESULT_LIMIT);
    Ok(match a.what {
        What::Adjustment => {
            let sets = minimal_adjustment_sets_limited(&q, limit)?;
            json!({"what": "adjustment", "identified": !sets.is_empty(), "sets": sets})
        }
        What::Iv => {
            let opts = IvOptions {
                max_conditioning_size: a.max_conditioning,
                limit,
            };
            let ivs = instrumental_variables(&q, &opts)?;
            let list: Vec<Value> = ivs
                .iter()
                .map(|r| json!({"instrument": r.instrument, "conditioning_set": r.conditioning_set}))
                .collect();
            json!({"what": "iv", "identified": !list.is_empty(), "instruments": list})
        }
    })
}

fn score(a: &ScoreArgs, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<Value> {
    let metric = a.metric.as_str();
    let structure = metric.strip_prefix("structure:");
    if metric != "correlation" && (a.alpha.is_some() || a.ci_test.is_some()) {
        return usage("--alpha and --ci-test apply to --metric correlation only");
    }
    if structure.is_none() && a.ess.is_some() {
        return usage("--ess applies to structure metrics only");
    }
    let structure_method = match structure {
        Some(name) => match ScoreName::from_str(name, true) {
            Ok(s) => Some(score_method(Some(s), a.ess)?),
            Err(_) => return usage(format!("unknown structure score `{name}`")),
        },
        None if metric == "loglik" || metric == "correlation" => None,
        None => return usage(format!("unknown metric `{metric}`")),
    };
    let alpha = if metric == "correlation" {
        check_alpha(a.alpha)?
    } else {
        0.05
    };
    let graph = load_graph(&a.input, warnings)?;
    if metric == "loglik" && graph.model.is_none() {
        return usage("loglik needs a parameterized model (BIF or UAI), not a bare graph");
    }
    for l in &a.latent {
        if !graph.dag.contains(l) {
            return usage(format!("latent `{l}` is not in the graph"));
        }
    }
    let schema: Option<Vec<VariableMeta>> = graph.model.as_ref().map(|m| m.metas().cloned().collect());
    let data = load_data(&a.data, schema.as_deref())?;
    let mut payload = json!({"metric": metric});
    if let Some(method) = structure_method {
        payload["value"] = json!(structure_score(&graph.dag, &data, &method)?);
    } else if metric == "loglik" {
        let bn = graph
            .model
            .expect("checked")
            .with_latents(a.latent.iter().map(String::as_str))?;
        payload["value"] = json!(log_likelihood(&bn, &data)?);
    } else {
        let config = CorrelationScoreConfig {
            ci_method: ci_method(a.ci_test),
            alpha,
        };
        let latents: BTreeSet<String> = a.latent.iter().cloned().collect();
        let s = correlation_score(&graph.dag, &latents, &data, &config)?;
        payload["value"] = json!(s.f1);
        payload["precision"] = json!(s.precision());
        payload["recall"] = json!(s.recall());
        payload["true_positives"] = json!(s.true_positives);
        payload["false_positives"] = json!(s.false_positives);
        payload["false_negatives"] = json!(s.false_negatives);
        payload["true_negatives"] = json!(s.true_negatives);
    }
    Ok(payload)
}

fn format_of(path: &Path) -> Option<&'static str> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("bif") => Some("bif"),
        Some("uai") => Some("uai"),
        _ => None,
    }
}

fn convert(a: &ConvertArgs, warnings: &mut Vec<ParseDiagnostic>) -> CliResult<Value> {
    let (Some(from), Some(to)) = (format_of(&a.input), format_of(&a.output)) else {
        return usage("convert needs `.bif` or `.uai` paths");
    };
    let bn = load_model(&a.input, warnings)?;
    let text = if to == "uai" {
        serialize_uai(&bn)
    } else {
        serialize_bif(&bn)
    };
    write_text(&a.output, &text)?;
    Ok(json!({
        "from": from,
        "to": to,
        "variables": bn.dag().node_count(),
        "edges": bn.dag().edge_count(),
        "out": a.output.display().to_string(),
    }))
}
