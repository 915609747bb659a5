//! Command-line front end: sampling random Cayley graphs, certifying
//! structure, counting embeddings, building blow-ups, running the
//! cross-check suites, and sweeping parameter grids.
//!
//! Reports are JSON on stdout (or `--output`) with an embedded run
//! manifest; sweeps emit CSV. Exit codes: 0 when every condition passes,
//! 1 on any failure, 2 when a verdict was skipped, 64 for usage problems
//! (bad flags, bad parameter ranges, unreadable inputs), 70 for runtime
//! errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use inducilab::blowup::{
    balanced_tree, classify_embeddings, count_into_blowup, optimize_partition, BlowupTree,
    LeafPolicy,
};
use inducilab::bounds::Verdict;
use inducilab::cayley::{cycle_cayley, sample_connection_set, CayleyDescriptor, CayleyGraph};
use inducilab::certify::{
    check_near_rigidity, check_reasonable, check_typical, inherited_parameters, replay_witness,
    CertifyError, ConditionReport, Outcome, SearchBudget,
};
use inducilab::embed::{count_automorphisms, count_embeddings, count_induced_copies};
use inducilab::graph6;
use inducilab::group::AbelianGroup;
use inducilab::interval::{parse_decimal_rational, LogBase};
use inducilab::report::{
    rational_string, run_sweep, sweep_csv, verification_matrix, Report, ReportError, RunManifest,
    SweepSpec,
};
use inducilab::{Graph, VertexSet};

const EXIT_PASS: i32 = 0;
const EXIT_FAIL: i32 = 1;
const EXIT_SKIPPED: i32 = 2;
const EXIT_USAGE: i32 = 64;
const EXIT_RUNTIME: i32 = 70;

/// Nodes charged per requested millisecond of search budget. A wall-clock
/// budget would tie verdicts to machine speed and break reproducibility
/// from the manifest, so the flag buys a deterministic node count; the
/// default 1000 ms equals the library's default budget.
const NODES_PER_MS: u64 = 20_000;

#[derive(Parser)]
#[command(
    name = "inducilab",
    version,
    about = "Random Cayley graphs of abelian groups: sampling, certification, counting, blow-ups",
    after_help = "Exit codes: 0 all pass, 1 any fail, 2 skipped verdicts, 64 usage, 70 runtime."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random Cayley graph and write descriptor and graph6 artifacts
    Sample(SampleArgs),
    /// Certify typicality conditions on a Cayley graph
    Check(CheckArgs),
    /// Count embeddings, automorphisms, and induced copies exactly
    Count(CountArgs),
    /// Build an iterated blow-up and count a pattern into it
    Blowup(BlowupArgs),
    /// Search part sizes maximizing the blow-up embedding count
    Optimize(OptimizeArgs),
    /// Run the cross-check suites and emit a pass/fail matrix
    VerifySuite(VerifySuiteArgs),
    /// Monte Carlo sweep over group orders and edge probabilities
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Cyclic factor orders, comma separated (5 or 4,2,2)
    #[arg(long, value_delimiter = ',', required = true)]
    factors: Vec<u64>,
    /// Edge-class probability in (0,1), decimal or fraction
    #[arg(long)]
    p: String,
    /// Master seed; connection class i draws from substream i
    #[arg(long)]
    seed: u64,
    /// Directory receiving the artifacts
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Artifact basename, producing <stem>.json and <stem>.g6
    #[arg(long, default_value = "sample")]
    stem: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Cayley descriptor JSON path, or C<n> for the n-cycle
    host: String,
    /// Degree and distinguisher scale, in (0, 1/2)
    #[arg(long)]
    q0: Option<String>,
    /// Rigidity slack, in (0, 1)
    #[arg(long)]
    delta0: Option<String>,
    /// iv-prime checks near-rigidity alone, plus the implication it buys
    #[arg(long, value_enum, conflicts_with_all = ["subgraph", "replay"])]
    variant: Option<VariantArg>,
    /// Certify this induced subgraph instead, comma-separated vertices
    #[arg(long, value_delimiter = ',', conflicts_with = "replay")]
    subgraph: Option<Vec<usize>>,
    /// Subgraph pair-floor scale; inherited from --q0/--delta0 when omitted
    #[arg(long, requires = "subgraph")]
    q: Option<String>,
    /// Subgraph rigidity slack; inherited from --q0/--delta0 when omitted
    #[arg(long, requires = "subgraph")]
    delta: Option<String>,
    /// Re-verify the failure witnesses stored in a previous report
    #[arg(long, value_name = "REPORT")]
    replay: Option<PathBuf>,
    /// Search budget in milliseconds, charged as 20000 nodes per ms
    #[arg(long, default_value_t = 1000)]
    budget_ms: u64,
    /// Override the analytic biclique side threshold
    #[arg(long)]
    biclique_side: Option<usize>,
    /// Worker threads; INDUCILAB_WORKERS, then 1, when omitted
    #[arg(long)]
    workers: Option<usize>,
    /// Logarithm base for inherited parameters
    #[arg(long, value_enum, default_value = "e")]
    log_base: LogBaseArg,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    /// Pattern: graph6 file, Cayley JSON, or a name like C5, P4, K3, E2
    pattern: String,
    /// Host graph, same formats
    host: String,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BlowupArgs {
    /// Base Cayley graph: descriptor JSON path, or C<n> for the n-cycle
    #[arg(long)]
    base: String,
    /// Blow-up order for the balanced tree
    #[arg(long, required_unless_present = "tree", conflicts_with = "tree")]
    n: Option<usize>,
    /// Leaf policy for the balanced tree
    #[arg(long, value_enum, default_value = "empty")]
    policy: PolicyArg,
    /// Pattern vertices inside the base; the whole base when omitted
    #[arg(long, value_delimiter = ',')]
    pattern: Option<Vec<usize>>,
    /// Load this blow-up tree JSON instead of building one
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Write the built tree JSON here
    #[arg(long, value_name = "PATH")]
    emit_tree: Option<PathBuf>,
    /// Classify every embedding against the top-level parts
    #[arg(long)]
    classify: bool,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Base Cayley graph: descriptor JSON path, or C<n> for the n-cycle
    #[arg(long)]
    base: String,
    /// Total order to split among the base parts
    #[arg(long)]
    n: usize,
    /// Leaf policy applied inside every candidate
    #[arg(long, value_enum, default_value = "empty")]
    policy: PolicyArg,
    /// Pattern vertices inside the base; the whole base when omitted
    #[arg(long, value_delimiter = ',')]
    pattern: Option<Vec<usize>>,
    /// Collapse compositions to sorted multisets
    #[arg(long)]
    reduce: bool,
    /// Worker threads; INDUCILAB_WORKERS, then 1, when omitted
    #[arg(long)]
    workers: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifySuiteArgs {
    /// Trim sizes and sample counts to stay interactive
    #[arg(long)]
    quick: bool,
    /// Worker threads; INDUCILAB_WORKERS, then 1, when omitted
    #[arg(long)]
    workers: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Cyclic group orders, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    ktilde: Vec<u64>,
    /// Edge probabilities, comma separated, decimals or fractions
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<String>,
    /// Samples per (order, probability) cell
    #[arg(long)]
    samples: u32,
    /// Master seed; each cell owns a named substream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Two-sided level for the Wilson intervals
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Search budget in milliseconds, charged as 20000 nodes per ms
    #[arg(long, default_value_t = 1000)]
    budget_ms: u64,
    /// Worker threads; INDUCILAB_WORKERS, then 1, when omitted
    #[arg(long)]
    workers: Option<usize>,
    /// Write the CSV here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the rows as a JSON report with the run manifest
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Near-rigidity on its own (exhaustive, order at most 12)
    IvPrime,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    /// Leaves are edgeless
    Empty,
    /// Leaves maximize embeddings of the pattern
    EmbMax,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogBaseArg {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
    #[value(name = "10")]
    Ten,
}

impl LogBaseArg {
    fn to_log_base(self) -> LogBase {
        match self {
            LogBaseArg::E => LogBase::Natural,
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::Ten => LogBase::Ten,
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parameter-range refusals are the user's input; everything else coming
/// out of the certifiers is a runtime error.
fn certify_err(e: CertifyError) -> CliError {
    match &e {
        CertifyError::ParameterRange { .. } => usage(e.to_string()),
        _ => runtime(e),
    }
}

fn report_err(e: ReportError) -> CliError {
    match &e {
        ReportError::ParameterRange { .. } => usage(e.to_string()),
        _ => runtime(e),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.code());
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Sample(a) => run_sample(a),
        Command::Check(a) => run_check(a),
        Command::Count(a) => run_count(a),
        Command::Blowup(a) => run_blowup(a),
        Command::Optimize(a) => run_optimize(a),
        Command::VerifySuite(a) => run_verify_suite(a),
        Command::Sweep(a) => run_sweep_cmd(a),
    }
}

fn run_sample(args: SampleArgs) -> Result<i32, CliError> {
    let p = parse_probability("--p", &args.p)?;
    let group = AbelianGroup::new(args.factors.clone()).map_err(|e| usage(e.to_string()))?;
    let lambda = sample_connection_set(&group, &p, args.seed).map_err(runtime)?;
    let host = CayleyGraph::build(lambda).map_err(runtime)?;
    let descriptor = host.to_descriptor(p.to_f64(), Some(args.seed));
    let json = serde_json::to_string_pretty(&descriptor).map_err(runtime)? + "\n";
    let g6 = graph6::encode(host.graph()) + "\n";
    fs::create_dir_all(&args.out).map_err(runtime)?;
    let json_path = args.out.join(format!("{}.json", args.stem));
    let g6_path = args.out.join(format!("{}.g6", args.stem));
    fs::write(&json_path, json).map_err(runtime)?;
    fs::write(&g6_path, g6).map_err(runtime)?;
    println!("{}", json_path.display());
    println!("{}", g6_path.display());
    Ok(EXIT_PASS)
}

fn run_check(args: CheckArgs) -> Result<i32, CliError> {
    let workers = resolve_workers(args.workers)?;
    let host = load_cayley(&args.host)?;
    let budget = SearchBudget {
        nodes: args.budget_ms.saturating_mul(NODES_PER_MS),
        workers,
        biclique_side: args.biclique_side,
    };
    if let Some(report_path) = args.replay.clone() {
        return run_replay(&args, &host, &report_path, workers);
    }
    if let Some(listed) = args.subgraph.clone() {
        return run_subgraph_check(&args, &host, &listed, &budget, workers);
    }
    if args.variant.is_some() {
        return run_near_rigidity(&args, &host, &budget, workers);
    }
    let q0 = required_rational("--q0", &args.q0)?;
    let delta0 = required_rational("--delta0", &args.delta0)?;
    let report = check_typical(&host, &q0, &delta0, &budget).map_err(certify_err)?;
    let code = verdict_code(report.any_fail(), report.any_skipped());
    let manifest = check_manifest(&args, workers)
        .param("q0", rational_string(&q0))
        .param("delta0", rational_string(&delta0));
    emit(&args.output, Report::new(manifest, report).to_json())?;
    Ok(code)
}

fn run_near_rigidity(
    args: &CheckArgs,
    host: &CayleyGraph,
    budget: &SearchBudget,
    workers: usize,
) -> Result<i32, CliError> {
    let delta0 = required_rational("--delta0", &args.delta0)?;
    let q0 = match &args.q0 {
        Some(text) => Some(parse_rational("--q0", text)?),
        None => None,
    };
    let report = check_near_rigidity(host, &delta0, q0.as_ref(), budget).map_err(certify_err)?;
    let mut fail = report.near_restriction_rigidity.outcome.failed();
    let mut skip = report.near_restriction_rigidity.outcome.skipped();
    if let Some(imp) = &report.implication {
        fail = fail || imp.consistent == Some(false);
        skip = skip || imp.consistent.is_none();
    }
    let code = verdict_code(fail, skip);
    let mut manifest = check_manifest(args, workers)
        .param("variant", "iv-prime")
        .param("delta0", rational_string(&delta0));
    if let Some(q0) = &q0 {
        manifest = manifest.param("q0", rational_string(q0));
    }
    emit(&args.output, Report::new(manifest, report).to_json())?;
    Ok(code)
}

fn run_subgraph_check(
    args: &CheckArgs,
    host: &CayleyGraph,
    listed: &[usize],
    budget: &SearchBudget,
    workers: usize,
) -> Result<i32, CliError> {
    let vs = vertex_set(listed, host.order())?;
    let mut manifest = check_manifest(args, workers).param("subgraph", join_list(listed));
    let (q, delta) = match (&args.q, &args.delta) {
        (Some(qt), Some(dt)) => {
            let q = parse_rational("--q", qt)?;
            let delta = parse_rational("--delta", dt)?;
            manifest = manifest
                .param("q", rational_string(&q))
                .param("delta", rational_string(&delta));
            (q, delta)
        }
        (None, None) => {
            let missing =
                "--subgraph needs --q and --delta, or --q0 and --delta0 to inherit from";
            let q0 = args.q0.as_deref().ok_or_else(|| usage(missing))?;
            let delta0 = args.delta0.as_deref().ok_or_else(|| usage(missing))?;
            let q0 = parse_rational("--q0", q0)?;
            let delta0 = parse_rational("--delta0", delta0)?;
            let base = args.log_base.to_log_base();
            let inherited = inherited_parameters(&q0, &delta0, host.order(), base)
                .map_err(certify_err)?
                .ok_or_else(|| {
                    usage(
                        "the host order leaves nothing after the inheritance slack; \
                         pass --q and --delta explicitly",
                    )
                })?;
            if vs.len() < inherited.size_floor {
                eprintln!(
                    "warning: subgraph size {} is below the inherited size floor {}",
                    vs.len(),
                    inherited.size_floor
                );
            }
            manifest = manifest
                .param("q0", rational_string(&q0))
                .param("delta0", rational_string(&delta0))
                .param("log-base", base.as_str())
                .param("size-floor", inherited.size_floor)
                .param("margin-floor", verdict_name(inherited.margin_floor));
            (inherited.q, inherited.delta)
        }
        _ => return Err(usage("--q and --delta go together")),
    };
    let report = check_reasonable(host, &vs, &q, &delta, budget).map_err(certify_err)?;
    let fail = report.conditions().iter().any(|(_, c)| c.outcome.failed());
    let skip = report.conditions().iter().any(|(_, c)| c.outcome.skipped());
    let code = verdict_code(fail, skip);
    emit(&args.output, Report::new(manifest, report).to_json())?;
    Ok(code)
}

/// Condition names a stored report can carry witnesses under.
const REPLAYABLE: [&str; 5] = [
    "degree_window",
    "pair_distinguishers",
    "biclique_free",
    "restriction_rigidity",
    "near_restriction_rigidity",
];

#[derive(Serialize)]
struct ReplayRow {
    condition: &'static str,
    witness: serde_json::Value,
    revalidates: bool,
}

#[derive(Serialize)]
struct ReplayData {
    host_order: usize,
    replayed: usize,
    all_revalidate: bool,
    witnesses: Vec<ReplayRow>,
}

fn run_replay(
    args: &CheckArgs,
    host: &CayleyGraph,
    path: &Path,
    workers: usize,
) -> Result<i32, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let data = value.get("data").unwrap_or(&value);
    let q0 = match &args.q0 {
        Some(text) => parse_rational("--q0", text)?,
        None => stored_rational(data, "q0")?
            .ok_or_else(|| usage("the report stores no q0; pass --q0"))?,
    };
    let delta0 = match &args.delta0 {
        Some(text) => parse_rational("--delta0", text)?,
        None => stored_rational(data, "delta0")?
            .ok_or_else(|| usage("the report stores no delta0; pass --delta0"))?,
    };
    let mut rows = Vec::new();
    let mut all = true;
    for slug in REPLAYABLE {
        let Some(cond_value) = data.get(slug) else {
            continue;
        };
        let cond: ConditionReport = serde_json::from_value(cond_value.clone())
            .map_err(|e| usage(format!("{slug} in the stored report: {e}")))?;
        if let Outcome::Fail { witness } = cond.outcome {
            let ok = replay_witness(host, slug, &witness, &q0, &delta0, args.biclique_side)
                .map_err(certify_err)?;
            all = all && ok;
            rows.push(ReplayRow {
                condition: slug,
                witness: serde_json::to_value(&witness).map_err(runtime)?,
                revalidates: ok,
            });
        }
    }
    let manifest = check_manifest(args, workers)
        .param("replay", path.display())
        .param("q0", rational_string(&q0))
        .param("delta0", rational_string(&delta0));
    let code = if all { EXIT_PASS } else { EXIT_FAIL };
    let data = ReplayData {
        host_order: host.order(),
        replayed: rows.len(),
        all_revalidate: all,
        witnesses: rows,
    };
    emit(&args.output, Report::new(manifest, data).to_json())?;
    Ok(code)
}

#[derive(Serialize)]
struct CountData {
    pattern_order: usize,
    host_order: usize,
    emb: String,
    aut: String,
    ind: String,
}

fn run_count(args: CountArgs) -> Result<i32, CliError> {
    let pattern = load_graph(&args.pattern)?;
    let host = load_graph(&args.host)?;
    let emb = count_embeddings(&pattern, &host, None).map_err(runtime)?;
    let aut = count_automorphisms(&pattern);
    let ind = count_induced_copies(&pattern, &host).map_err(runtime)?;
    let data = CountData {
        pattern_order: pattern.n(),
        host_order: host.n(),
        emb: emb.to_string(),
        aut: aut.to_string(),
        ind: ind.to_string(),
    };
    let manifest = RunManifest::start("count")
        .param("pattern", &args.pattern)
        .param("host", &args.host)
        .workers(1);
    emit(&args.output, Report::new(manifest, data).to_json())?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct SplitData {
    across: String,
    within: Vec<String>,
}

#[derive(Serialize)]
struct ClassificationData {
    restrictions: Vec<Vec<usize>>,
    in_part: Vec<u64>,
    follows: Vec<u64>,
    violation_total: u64,
    total: u64,
}

#[derive(Serialize)]
struct BlowupData {
    base_order: usize,
    pattern_vertices: Vec<usize>,
    n: usize,
    total: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    split: Option<SplitData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<ClassificationData>,
}

fn run_blowup(args: BlowupArgs) -> Result<i32, CliError> {
    let base = load_cayley(&args.base)?;
    if base.order() < 2 {
        return Err(usage("the base needs at least two vertices"));
    }
    let pv = match &args.pattern {
        Some(list) => vertex_set(list, base.order())?,
        None => VertexSet::full(base.order()),
    };
    let policy = leaf_policy(args.policy, &base, &pv)?;
    let tree = match &args.tree {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<BlowupTree>(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => {
            let n = args.n.expect("clap requires --n without --tree");
            let (tree, warnings) = balanced_tree(base.graph(), n, &policy).map_err(runtime)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            tree
        }
    };
    if let Some(path) = &args.emit_tree {
        let text = serde_json::to_string_pretty(&tree).map_err(runtime)? + "\n";
        fs::write(path, text).map_err(runtime)?;
    }
    let count = count_into_blowup(&base, &pv, &tree).map_err(runtime)?;
    let classification = if args.classify {
        Some(classify_embeddings(&base, &pv, &tree).map_err(runtime)?)
    } else {
        None
    };
    let violations = classification.as_ref().map_or(0, |c| c.violation_total);
    let data = BlowupData {
        base_order: base.order(),
        pattern_vertices: pv.iter().collect(),
        n: tree.size(),
        total: count.total.to_string(),
        split: count.split.map(|s| SplitData {
            across: s.across.to_string(),
            within: s.within.iter().map(|c| c.to_string()).collect(),
        }),
        classification: classification.map(|c| ClassificationData {
            restrictions: c.restrictions,
            in_part: c.in_part,
            follows: c.follows,
            violation_total: c.violation_total,
            total: c.total,
        }),
    };
    let mut manifest = RunManifest::start("blowup")
        .param("base", &args.base)
        .param("n", data.n)
        .param("policy", policy_name(args.policy))
        .param("classify", args.classify)
        .workers(1);
    if let Some(path) = &args.tree {
        manifest = manifest.param("tree", path.display());
    }
    emit(&args.output, Report::new(manifest, data).to_json())?;
    Ok(if violations > 0 { EXIT_FAIL } else { EXIT_PASS })
}

#[derive(Serialize)]
struct OptimizeData {
    n: usize,
    ktilde: usize,
    best: String,
    maximizers: Vec<Vec<usize>>,
    all_balanced: bool,
    reduced: bool,
}

fn run_optimize(args: OptimizeArgs) -> Result<i32, CliError> {
    let workers = resolve_workers(args.workers)?;
    let base = load_cayley(&args.base)?;
    if base.order() < 2 {
        return Err(usage("the base needs at least two vertices"));
    }
    let pv = match &args.pattern {
        Some(list) => vertex_set(list, base.order())?,
        None => VertexSet::full(base.order()),
    };
    let policy = leaf_policy(args.policy, &base, &pv)?;
    let outcome = optimize_partition(&base, &pv, args.n, &policy, args.reduce, workers)
        .map_err(|e| usage(e.to_string()))?;
    let data = OptimizeData {
        n: outcome.n,
        ktilde: outcome.ktilde,
        best: outcome.best.to_string(),
        maximizers: outcome.maximizers,
        all_balanced: outcome.all_balanced,
        reduced: outcome.reduced,
    };
    let manifest = RunManifest::start("optimize")
        .param("base", &args.base)
        .param("n", args.n)
        .param("policy", policy_name(args.policy))
        .param("reduce", args.reduce)
        .workers(workers);
    emit(&args.output, Report::new(manifest, data).to_json())?;
    Ok(EXIT_PASS)
}

fn run_verify_suite(args: VerifySuiteArgs) -> Result<i32, CliError> {
    let workers = resolve_workers(args.workers)?;
    let rows = verification_matrix(args.quick, workers).map_err(report_err)?;
    let all = rows.iter().all(|r| r.passed);
    let manifest = RunManifest::start("verify-suite")
        .param("quick", args.quick)
        .workers(workers);
    emit(&args.output, Report::new(manifest, rows).to_json())?;
    Ok(if all { EXIT_PASS } else { EXIT_FAIL })
}

fn run_sweep_cmd(args: SweepArgs) -> Result<i32, CliError> {
    let workers = resolve_workers(args.workers)?;
    let mut p_values = Vec::new();
    for text in &args.p {
        p_values.push(parse_probability("--p", text)?);
    }
    if args.ktilde.iter().any(|&k| k < 2) {
        return Err(usage("--ktilde orders need at least two elements"));
    }
    let spec = SweepSpec {
        factor_sets: args.ktilde.iter().map(|&k| vec![k]).collect(),
        p_values,
        samples: args.samples,
        seed: args.seed,
        alpha: args.alpha,
        budget: SearchBudget {
            nodes: args.budget_ms.saturating_mul(NODES_PER_MS),
            workers,
            biclique_side: None,
        },
    };
    let rows = run_sweep(&spec).map_err(report_err)?;
    let code = if rows.iter().any(|r| r.label == "inconsistent") {
        EXIT_FAIL
    } else if rows.iter().any(|r| r.skips > 0) {
        EXIT_SKIPPED
    } else {
        EXIT_PASS
    };
    if let Some(path) = &args.report {
        let manifest = RunManifest::start("sweep")
            .param("ktilde", join_list(&args.ktilde))
            .param("p", args.p.join(","))
            .param("samples", args.samples)
            .param("alpha", args.alpha)
            .param("budget-ms", args.budget_ms)
            .seed(args.seed)
            .workers(workers);
        fs::write(path, Report::new(manifest, &rows).to_json()).map_err(runtime)?;
    }
    emit(&args.output, sweep_csv(&rows))?;
    Ok(code)
}

fn check_manifest(args: &CheckArgs, workers: usize) -> RunManifest {
    let mut m = RunManifest::start("check")
        .param("host", &args.host)
        .param("budget-ms", args.budget_ms)
        .workers(workers);
    if let Some(side) = args.biclique_side {
        m = m.param("biclique-side", side);
    }
    m
}

fn verdict_code(fail: bool, skip: bool) -> i32 {
    if fail {
        EXIT_FAIL
    } else if skip {
        EXIT_SKIPPED
    } else {
        EXIT_PASS
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::CertifiedHolds => "certified_holds",
        Verdict::CertifiedFails => "certified_fails",
        Verdict::Inconclusive => "inconclusive",
        Verdict::Skipped => "skipped",
    }
}

/// The worker count comes from the flag, then INDUCILAB_WORKERS, then 1;
/// single-worker runs keep witnesses bit-reproducible.
fn resolve_workers(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        if w == 0 {
            return Err(usage("--workers must be positive"));
        }
        return Ok(w);
    }
    match std::env::var("INDUCILAB_WORKERS") {
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(usage(format!(
                "INDUCILAB_WORKERS must be a positive integer, got {text:?}"
            ))),
        },
        Err(_) => Ok(1),
    }
}

fn parse_rational(flag: &str, text: &str) -> Result<BigRational, CliError> {
    parse_decimal_rational(text).map_err(|e| usage(format!("{flag}: {e}")))
}

fn parse_probability(flag: &str, text: &str) -> Result<BigRational, CliError> {
    let p = parse_rational(flag, text)?;
    if p <= BigRational::zero() || p >= BigRational::one() {
        return Err(usage(format!(
            "{flag} must lie strictly between 0 and 1, got {text}"
        )));
    }
    Ok(p)
}

fn required_rational(flag: &str, value: &Option<String>) -> Result<BigRational, CliError> {
    match value {
        Some(text) => parse_rational(flag, text),
        None => Err(usage(format!("{flag} is required here"))),
    }
}

fn stored_rational(
    data: &serde_json::Value,
    key: &str,
) -> Result<Option<BigRational>, CliError> {
    match data.get(key).and_then(|v| v.as_str()) {
        Some(text) => parse_decimal_rational(text)
            .map(Some)
            .map_err(|e| usage(format!("stored {key}: {e}"))),
        None => Ok(None),
    }
}

fn vertex_set(listed: &[usize], n: usize) -> Result<VertexSet, CliError> {
    if listed.is_empty() {
        return Err(usage("the vertex list is empty"));
    }
    let mut vs = VertexSet::new(n);
    for &v in listed {
        if v >= n {
            return Err(usage(format!("vertex {v} is out of range for order {n}")));
        }
        vs.insert(v);
    }
    Ok(vs)
}

fn leaf_policy(arg: PolicyArg, base: &CayleyGraph, pv: &VertexSet) -> Result<LeafPolicy, CliError> {
    Ok(match arg {
        PolicyArg::Empty => LeafPolicy::EmptyGraph,
        PolicyArg::EmbMax => {
            let (pattern, _) = base.graph().induced_subgraph(pv).map_err(runtime)?;
            LeafPolicy::EmbMaximizer(pattern)
        }
    })
}

fn policy_name(arg: PolicyArg) -> &'static str {
    match arg {
        PolicyArg::Empty => "empty",
        PolicyArg::EmbMax => "emb-max",
    }
}

/// C<n>, P<n>, K<n>, E<n> for the cycle, path, complete, and edgeless
/// graphs. Anything else is a file path.
fn named_graph(name: &str) -> Result<Option<Graph>, CliError> {
    let mut chars = name.chars();
    let Some(kind) = chars.next() else {
        return Ok(None);
    };
    if !matches!(kind, 'C' | 'P' | 'K' | 'E') {
        return Ok(None);
    }
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Ok(None);
    }
    let n: usize = digits
        .parse()
        .map_err(|_| usage(format!("graph name {name:?} overflows")))?;
    if n > 4096 {
        return Err(usage(format!(
            "named graphs cap at 4096 vertices, got {name:?}; supply a file"
        )));
    }
    Ok(Some(match kind {
        'C' => {
            if n < 3 {
                return Err(usage("cycles need at least 3 vertices"));
            }
            Graph::cycle(n)
        }
        'P' => Graph::path(n),
        'K' => Graph::complete(n),
        _ => Graph::empty(n),
    }))
}

/// A graph argument: an existing file (Cayley descriptor JSON or graph6),
/// otherwise a graph name.
fn load_graph(arg: &str) -> Result<Graph, CliError> {
    if !Path::new(arg).exists() {
        if let Some(g) = named_graph(arg)? {
            return Ok(g);
        }
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| usage(format!("cannot read graph {arg:?}: {e}")))?;
    if text.trim_start().starts_with('{') {
        let d: CayleyDescriptor =
            serde_json::from_str(&text).map_err(|e| usage(format!("{arg}: {e}")))?;
        let host = CayleyGraph::from_descriptor(&d).map_err(|e| usage(format!("{arg}: {e}")))?;
        return Ok(host.graph().clone());
    }
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| usage(format!("graph file {arg:?} is empty")))?;
    graph6::decode(line.trim()).map_err(|e| usage(format!("{arg}: {e}")))
}

/// A Cayley-graph argument: a descriptor JSON file, or C<n> for the cycle
/// on Z/n. Plain graph6 will not do here, the group structure matters.
fn load_cayley(arg: &str) -> Result<CayleyGraph, CliError> {
    if !Path::new(arg).exists() {
        if let Some(digits) = arg.strip_prefix('C') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let n: u64 = digits
                    .parse()
                    .map_err(|_| usage(format!("cycle name {arg:?} overflows")))?;
                return cycle_cayley(n).map_err(|e| usage(e.to_string()));
            }
        }
        return Err(usage(format!(
            "{arg:?} is neither a file nor a cycle name like C11"
        )));
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| usage(format!("cannot read {arg:?}: {e}")))?;
    if !text.trim_start().starts_with('{') {
        return Err(usage(format!(
            "{arg:?} is not a Cayley descriptor; graph6 drops the group structure"
        )));
    }
    let d: CayleyDescriptor =
        serde_json::from_str(&text).map_err(|e| usage(format!("{arg}: {e}")))?;
    CayleyGraph::from_descriptor(&d).map_err(|e| usage(format!("{arg}: {e}")))
}

fn join_list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn emit(output: &Option<PathBuf>, text: String) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| runtime(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
