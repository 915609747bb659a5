//! Run manifests, report envelopes, the randomized sweep over group and
//! probability grids, and the verification matrix behind `verify-suite`.
//!
//! Every JSON report carries a schema version and the manifest needed to
//! reproduce it: command, full parameter map, master seed, toolkit version,
//! wall-clock bounds, worker count. Rationals serialize as exact integer or
//! "num/den" strings, never as floats. Sweeps emit CSV; their randomized
//! cells get Wilson intervals and a consistency label, never a verdict on
//! the asymptotic statement itself.

use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::blowup::{
    balanced_tree, classify_embeddings, closed_form_blowup_count, count_into_blowup, BlowupError,
    LeafPolicy,
};
use crate::bounds::{
    check_balanced_product, check_preconditions, emb_sequence_diagnostics, epsilon_ledger,
    BoundsError, Verdict,
};
use crate::cayley::{
    cycle_cayley, maps_hitting_vertex, sample_connection_set, CayleyError, CayleyGraph,
    ConnectionSet,
};
use crate::certify::{
    check_typical, distinguisher_count, find_signature, find_super_signature, CertifyError,
    SearchBudget,
};
use crate::embed::{count_embeddings, count_induced_copies, emb_sequence, BigCount, EmbedError};
use crate::enumerate::{graph_from_code, labeled_count};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::group::{AbelianGroup, GroupError};
use crate::interval::{LogBase, Magnitude};

/// Version stamp on every serialized report; bump on any shape change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportError {
    ParameterRange { name: &'static str, value: String },
    Group(GroupError),
    Graph(GraphError),
    Cayley(CayleyError),
    Certify(CertifyError),
    Embed(EmbedError),
    Blowup(BlowupError),
    Bounds(BoundsError),
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::ParameterRange { name, value } => {
                write!(f, "parameter {name} out of range: {value}")
            }
            ReportError::Group(e) => write!(f, "{e}"),
            ReportError::Graph(e) => write!(f, "{e}"),
            ReportError::Cayley(e) => write!(f, "{e}"),
            ReportError::Certify(e) => write!(f, "{e}"),
            ReportError::Embed(e) => write!(f, "{e}"),
            ReportError::Blowup(e) => write!(f, "{e}"),
            ReportError::Bounds(e) => write!(f, "{e}"),
        }
    }
}

impl Error for ReportError {}

impl From<GroupError> for ReportError {
    fn from(e: GroupError) -> Self {
        ReportError::Group(e)
    }
}

impl From<GraphError> for ReportError {
    fn from(e: GraphError) -> Self {
        ReportError::Graph(e)
    }
}

impl From<CayleyError> for ReportError {
    fn from(e: CayleyError) -> Self {
        ReportError::Cayley(e)
    }
}

impl From<CertifyError> for ReportError {
    fn from(e: CertifyError) -> Self {
        ReportError::Certify(e)
    }
}

impl From<EmbedError> for ReportError {
    fn from(e: EmbedError) -> Self {
        ReportError::Embed(e)
    }
}

impl From<BlowupError> for ReportError {
    fn from(e: BlowupError) -> Self {
        ReportError::Blowup(e)
    }
}

impl From<BoundsError> for ReportError {
    fn from(e: BoundsError) -> Self {
        ReportError::Bounds(e)
    }
}

/// Integers render bare, everything else as "num/den".
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn serialize_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

pub fn serialize_rational_option<S: Serializer>(
    r: &Option<BigRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&rational_string(r)),
        None => s.serialize_none(),
    }
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| u64::try_from(d.as_millis()).unwrap_or(u64::MAX))
        .unwrap_or(0)
}

/// Everything a rerun needs. Verdicts are reproducible from the manifest at
/// any worker count; witness identity is pinned only at one worker.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub params: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub workers: usize,
}

impl RunManifest {
    pub fn start(command: &str) -> RunManifest {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            params: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: unix_ms(),
            finished_unix_ms: 0,
            workers: 1,
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> RunManifest {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> RunManifest {
        self.seed = Some(seed);
        self
    }

    pub fn workers(mut self, workers: usize) -> RunManifest {
        self.workers = workers;
        self
    }
}

/// A manifest wrapped around any payload, the shape of every JSON report.
/// Construction stamps the finish time.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub manifest: RunManifest,
    pub data: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(mut manifest: RunManifest, data: T) -> Report<T> {
        manifest.finished_unix_ms = unix_ms();
        Report { manifest, data }
    }

    /// Pretty JSON with a trailing newline, ready to write out.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
/// Clamped to [0, 1]; the degenerate zero-trial case spans everything.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(successes <= trials, "successes exceed trials");
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Inverse standard normal CDF by rational approximation, absolute error
/// below 1.2e-9 across (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p strictly inside (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const SPLIT: f64 = 0.02425;
    if p < SPLIT {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - SPLIT {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Grid of randomized typicality runs, one cell per (group, p) pair. Each
/// cell draws its per-sample seeds from the master seed on its own RNG
/// stream, so inserting a cell never perturbs the others.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub factor_sets: Vec<Vec<u64>>,
    pub p_values: Vec<BigRational>,
    pub samples: u32,
    pub seed: u64,
    /// Two-sided level for the Wilson intervals.
    pub alpha: f64,
    pub budget: SearchBudget,
}

/// One CSV row: a single condition's tallies over a cell. `consistent`
/// means the Wilson interval for the pass probability still reaches 1/2,
/// `no_data` that no sample produced a decided verdict.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub factors: String,
    pub p: String,
    pub condition: &'static str,
    pub samples: u32,
    pub passes: u32,
    pub fails: u32,
    pub skips: u32,
    pub frequency: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub label: &'static str,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    passes: u32,
    fails: u32,
    skips: u32,
}

/// Runs the whole grid. Typicality parameters follow the sampled edge
/// probability: q0 = p'/50 and delta0 = p'/100 with p' = min(p, 1-p).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ReportError> {
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(ReportError::ParameterRange {
            name: "alpha",
            value: format!("{}", spec.alpha),
        });
    }
    if spec.samples == 0 {
        return Err(ReportError::ParameterRange {
            name: "samples",
            value: "0".into(),
        });
    }
    let z = normal_quantile(1.0 - spec.alpha / 2.0);
    let one = BigRational::one();
    let mut rows = Vec::new();
    for (gi, factors) in spec.factor_sets.iter().enumerate() {
        let group = AbelianGroup::new(factors.clone())?;
        let factors_label = factors
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join("x");
        for (pi, p) in spec.p_values.iter().enumerate() {
            let complement = &one - p;
            let p_prime = if *p <= complement { p.clone() } else { complement };
            let q0 = &p_prime / BigRational::from_integer(50.into());
            let delta0 = &p_prime / BigRational::from_integer(100.into());

            let cell = (gi * spec.p_values.len() + pi) as u64;
            let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed);
            seeder.set_stream(cell);
            let rep_seeds: Vec<u64> = (0..spec.samples).map(|_| seeder.next_u64()).collect();

            let mut names = [""; 5];
            let mut tallies = [Tally::default(); 5];
            for rep in rep_seeds {
                let lambda = sample_connection_set(&group, p, rep)?;
                let host = CayleyGraph::build(lambda)?;
                let report = check_typical(&host, &q0, &delta0, &spec.budget)?;
                for (i, (name, c)) in report.conditions().iter().enumerate() {
                    names[i] = name;
                    if c.outcome.passed() {
                        tallies[i].passes += 1;
                    } else if c.outcome.failed() {
                        tallies[i].fails += 1;
                    } else {
                        tallies[i].skips += 1;
                    }
                }
            }
            for (name, t) in names.iter().zip(tallies.iter()) {
                let decided = t.passes + t.fails;
                let (frequency, ci_low, ci_high, label) = if decided == 0 {
                    (None, None, None, "no_data")
                } else {
                    let f = f64::from(t.passes) / f64::from(decided);
                    let (lo, hi) = wilson_interval(u64::from(t.passes), u64::from(decided), z);
                    let label = if hi >= 0.5 { "consistent" } else { "inconsistent" };
                    (Some(f), Some(lo), Some(hi), label)
                };
                rows.push(SweepRow {
                    factors: factors_label.clone(),
                    p: rational_string(p),
                    condition: name,
                    samples: spec.samples,
                    passes: t.passes,
                    fails: t.fails,
                    skips: t.skips,
                    frequency,
                    ci_low,
                    ci_high,
                    label,
                });
            }
        }
    }
    Ok(rows)
}

/// Fixed-header CSV; floats at six places, absent values as empty cells.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "factors,p,condition,samples,passes,fails,skips,frequency,ci_low,ci_high,label\n",
    );
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.factors,
            r.p,
            r.condition,
            r.samples,
            r.passes,
            r.fails,
            r.skips,
            cell(r.frequency),
            cell(r.ci_low),
            cell(r.ci_high),
            r.label,
        ));
    }
    out
}

/// One suite outcome in the verification matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub suite: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u64,
}

type SuiteFn = fn(bool, usize) -> Result<(bool, String), ReportError>;

/// Cross-checks every major component against an independent computation.
/// `quick` trims sizes and sample counts to stay interactive; the full run
/// widens them. A failed suite is an answer, not an error.
pub fn verification_matrix(quick: bool, workers: usize) -> Result<Vec<SuiteRow>, ReportError> {
    let workers = workers.max(1);
    let suites: [(&'static str, SuiteFn); 12] = [
        ("embedding-oracle", suite_embedding_oracle),
        ("blowup-closed-form", suite_blowup_closed_form),
        ("balanced-product-bounds", suite_balanced_product),
        ("epsilon-ledger", suite_epsilon_ledger),
        ("precondition-chain", suite_precondition_chain),
        ("first-difference-bounds", suite_first_difference),
        ("density-monotonicity", suite_density_monotonicity),
        ("maps-hitting-vertex", suite_maps_hitting_vertex),
        ("generating-connected", suite_generating_connected),
        ("blowup-classification", suite_blowup_classification),
        ("signature-sampling", suite_signature_sampling),
        ("typicality-certifier", suite_typicality_certifier),
    ];
    let mut rows = Vec::with_capacity(suites.len());
    for (suite, run) in suites {
        let clock = Instant::now();
        let (passed, detail) = run(quick, workers)?;
        rows.push(SuiteRow {
            suite,
            passed,
            detail,
            elapsed_ms: u64::try_from(clock.elapsed().as_millis()).unwrap_or(u64::MAX),
        });
    }
    Ok(rows)
}

fn frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Counts injections preserving adjacency and non-adjacency, by bare
/// recursion with no ordering tricks; the reference for the fast counter.
fn injection_oracle(pattern: &Graph, host: &Graph) -> u64 {
    fn rec(pattern: &Graph, host: &Graph, image: &mut Vec<usize>, used: &mut [bool]) -> u64 {
        let v = image.len();
        if v == pattern.n() {
            return 1;
        }
        let mut total = 0;
        'cand: for y in 0..host.n() {
            if used[y] {
                continue;
            }
            for (w, &img) in image.iter().enumerate() {
                if pattern.has_edge(v, w) != host.has_edge(y, img) {
                    continue 'cand;
                }
            }
            used[y] = true;
            image.push(y);
            total += rec(pattern, host, image, used);
            image.pop();
            used[y] = false;
        }
        total
    }
    if pattern.n() > host.n() {
        return 0;
    }
    rec(pattern, host, &mut Vec::new(), &mut vec![false; host.n()])
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 0..n {
        for w in 0..v {
            if rng.gen::<bool>() {
                edges.push((v, w));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("vertices in range")
}

fn suite_embedding_oracle(quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let (pairs, k_max, n_max) = if quick { (40, 4, 6) } else { (150, 5, 7) };
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bac1e);
    let mut mismatches = 0u32;
    for _ in 0..pairs {
        let k = rng.gen_range(1..=k_max);
        let n = rng.gen_range(1..=n_max);
        let pattern = random_graph(&mut rng, k);
        let host = random_graph(&mut rng, n);
        let fast = count_embeddings(&pattern, &host, None)?;
        if fast != BigCount::from(injection_oracle(&pattern, &host)) {
            mismatches += 1;
        }
    }
    Ok((
        mismatches == 0,
        format!("{pairs} random pattern/host pairs, {mismatches} oracle mismatches"),
    ))
}

fn suite_blowup_closed_form(quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let base = cycle_cayley(5)?;
    let full = VertexSet::full(5);
    let arc = VertexSet::from_indices(5, &[0, 1, 2, 3])?;
    let mut cases: Vec<(&VertexSet, u64, u32)> = vec![(&full, 5, 1)];
    if !quick {
        cases.push((&full, 5, 2));
        cases.push((&arc, 4, 2));
    }
    let mut parts = Vec::new();
    let mut ok = true;
    for (vertices, k, m) in cases {
        let closed = closed_form_blowup_count(5, k, m);
        let n = 5usize.pow(m);
        let (tree, _) = balanced_tree(base.graph(), n, &LeafPolicy::EmptyGraph)?;
        let built = tree.build()?;
        let (pattern, _) = base.graph().induced_subgraph(vertices)?;
        let direct = count_embeddings(&pattern, built.graph(), None)?;
        let split = count_into_blowup(&base, vertices, &tree)?.total;
        ok &= closed == direct && closed == split;
        parts.push(format!("(k={k}, m={m}): closed {closed}, direct {direct}, split {split}"));
    }
    Ok((ok, parts.join("; ")))
}

fn suite_balanced_product(quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let (parts_max, total_max) = if quick { (4, 16) } else { (5, 22) };
    let report = check_balanced_product(parts_max, total_max);
    Ok((
        report.all_hold(),
        format!(
            "grid {parts_max}x{total_max}: {} oracle mismatches, {} superadditivity violations, \
             {} shrink failures over {} cases ({} inconclusive)",
            report.oracle_mismatches.len(),
            report.superadditivity_violations.len(),
            report.shrink_failures.len(),
            report.shrink_cases,
            report.shrink_inconclusive.len(),
        ),
    ))
}

fn suite_epsilon_ledger(_quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let tiny_q = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(20));
    let huge_k = Magnitude::Pow { base: 10, exp: 200 };
    let flagship = epsilon_ledger(&tiny_q, &huge_k, Some(&frac(1, 1000)))?;
    let desk = epsilon_ledger(&frac(1, 10), &Magnitude::from_u64(100), Some(&frac(1, 1000)))?;
    let failing = desk.failing();
    let passed = flagship.all_hold()
        && flagship.ordering_strict() == Verdict::CertifiedHolds
        && !failing.is_empty();
    Ok((
        passed,
        format!(
            "all hold at q = 1/10^20, k = 10^200; at q = 1/10, k = 100 the failures are: {}",
            failing.join(", "),
        ),
    ))
}

fn suite_precondition_chain(_quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let huge = Magnitude::Pow { base: 10, exp: 200 };
    let flagship = check_preconditions(&huge, &frac(1, 2), &huge)?;
    let desk_k = Magnitude::from_u64(1_000_000);
    let desk = check_preconditions(&desk_k, &frac(1, 2), &desk_k)?;
    let gaps: Vec<String> = desk
        .conditions
        .iter()
        .filter(|c| !c.verdict.holds())
        .map(|c| format!("{} (ln margin {:.2})", c.slug, c.ln_margin))
        .collect();
    Ok((
        flagship.all_hold() && !gaps.is_empty(),
        format!("certified at 10^200; gaps at 10^6: {}", gaps.join(", ")),
    ))
}

fn suite_first_difference(quick: bool, workers: usize) -> Result<(bool, String), ReportError> {
    let m_hi = if quick { 5 } else { 6 };
    let patterns = [
        ("K2", Graph::complete(2)),
        ("K3", Graph::complete(3)),
        ("P4", Graph::path(4)),
    ];
    let mut violations = 0usize;
    for (_, pattern) in &patterns {
        let seq: Vec<BigCount> = emb_sequence(pattern, 1, m_hi, workers)?
            .into_iter()
            .map(|(_, c)| c)
            .collect();
        let diag = emb_sequence_diagnostics(pattern, 1, &seq)?;
        violations += diag
            .first_difference
            .iter()
            .filter(|r| !(r.lower_holds && r.upper_holds))
            .count();
    }
    Ok((
        violations == 0,
        format!("K2, K3, P4 with hosts up to {m_hi} vertices: {violations} bound violations"),
    ))
}

/// Largest induced-copy count over all labeled hosts on n vertices.
fn ind_max(pattern: &Graph, n: usize, workers: usize) -> Result<BigCount, ReportError> {
    let total = labeled_count(n);
    let best = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers as u64 {
            handles.push(scope.spawn(move || -> Result<BigCount, EmbedError> {
                let mut best = BigCount::from(0u32);
                let mut code = w;
                while code < total {
                    let host = graph_from_code(n, code);
                    let c = count_induced_copies(pattern, &host)?;
                    if c > best {
                        best = c;
                    }
                    code += workers as u64;
                }
                Ok(best)
            }));
        }
        let mut best = BigCount::from(0u32);
        for h in handles {
            let local = h.join().expect("worker panicked")?;
            if local > best {
                best = local;
            }
        }
        Ok::<BigCount, EmbedError>(best)
    })?;
    Ok(best)
}

fn suite_density_monotonicity(quick: bool, workers: usize) -> Result<(bool, String), ReportError> {
    let n_hi = if quick { 5 } else { 6 };
    let patterns = [
        ("K3", Graph::complete(3)),
        ("P4", Graph::path(4)),
        ("C5", Graph::cycle(5)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, pattern) in &patterns {
        let k = pattern.n();
        if k > n_hi {
            continue;
        }
        let mut previous: Option<BigRational> = None;
        let mut last = String::new();
        for n in k..=n_hi {
            let best = ind_max(pattern, n, workers)?;
            let choices = num_integer::binomial(BigInt::from(n), BigInt::from(k));
            let ratio = BigRational::new(BigInt::from(best), choices);
            if let Some(prev) = &previous {
                ok &= ratio <= *prev;
            }
            last = rational_string(&ratio);
            previous = Some(ratio);
        }
        parts.push(format!("{name} down to {last} at n = {n_hi}"));
    }
    Ok((ok, format!("densities nonincreasing: {}", parts.join(", "))))
}

fn suite_maps_hitting_vertex(_quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let mut checked = 0u32;
    let mut violations = 0u32;
    for ktilde in [5u64, 7] {
        let group = AbelianGroup::new(vec![ktilde])?;
        let n = ktilde as usize;
        for mask in 0u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k + 1 < n {
                continue;
            }
            let indices: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
            let subset = VertexSet::from_indices(n, &indices)?;
            for x in 0..n {
                checked += 1;
                if maps_hitting_vertex(&group, &subset, x)? != 2 * k {
                    violations += 1;
                }
            }
        }
    }
    Ok((
        violations == 0,
        format!("{checked} (subset, vertex) pairs over C5 and C7: {violations} off 2k"),
    ))
}

fn suite_generating_connected(quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let (samples, max_order) = if quick { (150, 12) } else { (500, 24) };
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e4e);
    let probabilities = [frac(1, 4), frac(1, 2), frac(3, 4)];
    let mut mismatches = 0u32;
    for _ in 0..samples {
        let factors = loop {
            let rank = rng.gen_range(1..=3);
            let draw: Vec<u64> = (0..rank).map(|_| rng.gen_range(2..=max_order)).collect();
            if draw.iter().product::<u64>() <= max_order {
                break draw;
            }
        };
        let group = AbelianGroup::new(factors)?;
        let p = &probabilities[rng.gen_range(0..probabilities.len())];
        let lambda = sample_connection_set(&group, p, rng.next_u64())?;
        let generating = lambda.is_generating();
        let host = CayleyGraph::build(lambda)?;
        if generating != host.graph().is_connected() {
            mismatches += 1;
        }
    }
    Ok((
        mismatches == 0,
        format!("{samples} sampled (group, set) pairs up to order {max_order}: {mismatches} mismatches"),
    ))
}

fn suite_blowup_classification(
    quick: bool,
    _workers: usize,
) -> Result<(bool, String), ReportError> {
    let base = cycle_cayley(5)?;
    let full = VertexSet::full(5);
    let arc = VertexSet::from_indices(5, &[0, 1, 2, 3])?;
    let maximizer = LeafPolicy::EmbMaximizer(Graph::cycle(5));
    let mut specs: Vec<(usize, &LeafPolicy)> =
        vec![(10, &LeafPolicy::EmptyGraph), (13, &maximizer)];
    if !quick {
        specs.push((17, &LeafPolicy::EmptyGraph));
        specs.push((20, &maximizer));
    }
    let mut violations = 0u64;
    let mut count_mismatches = 0u32;
    for (n, policy) in &specs {
        let (tree, _) = balanced_tree(base.graph(), *n, policy)?;
        for vertices in [&full, &arc] {
            let classes = classify_embeddings(&base, vertices, &tree)?;
            violations += classes.violation_total;
            if count_into_blowup(&base, vertices, &tree)?.total != BigCount::from(classes.total) {
                count_mismatches += 1;
            }
        }
    }
    let square = cycle_cayley(4)?;
    let (control_tree, _) = balanced_tree(square.graph(), 8, &LeafPolicy::EmptyGraph)?;
    let control = classify_embeddings(&square, &VertexSet::full(4), &control_tree)?;
    let passed = violations == 0 && count_mismatches == 0 && control.violation_total >= 1;
    Ok((
        passed,
        format!(
            "C5 and its arc over {} blow-up specs: {violations} violations, \
             {count_mismatches} count mismatches; C4 control produced {}",
            specs.len(),
            control.violation_total,
        ),
    ))
}

fn suite_signature_sampling(quick: bool, _workers: usize) -> Result<(bool, String), ReportError> {
    let group = AbelianGroup::new(vec![17])?;
    let lambda = sample_connection_set(&group, &frac(1, 2), 42)?;
    let host = CayleyGraph::build(lambda)?;
    let g = host.graph();
    let n = g.n();
    let full = VertexSet::full(n);
    let mut min_d = usize::MAX;
    for v in 0..n {
        for w in v + 1..n {
            min_d = min_d.min(distinguisher_count(g, v, w, &full)?);
        }
    }
    let q = frac(min_d as i64, n as i64);
    let seeds = if quick { 200u64 } else { 1000 };
    let mut sig_hits = 0u64;
    let mut sup_hits = 0u64;
    for seed in 0..seeds {
        if find_signature(g, &full, &q, 1, seed, LogBase::Natural)?.found().is_some() {
            sig_hits += 1;
        }
        if find_super_signature(g, &full, &q, 1, seed, LogBase::Natural)?
            .found()
            .is_some()
        {
            sup_hits += 1;
        }
    }
    let passed = 2 * sig_hits >= seeds && 4 * sup_hits >= seeds;
    Ok((
        passed,
        format!(
            "single-trial hits over {seeds} seeds at q = {}: \
             signatures {sig_hits} (floor {}), super-signatures {sup_hits} (floor {})",
            rational_string(&q),
            seeds / 2,
            seeds / 4,
        ),
    ))
}

fn suite_typicality_certifier(_quick: bool, workers: usize) -> Result<(bool, String), ReportError> {
    let budget = SearchBudget {
        workers,
        ..SearchBudget::default()
    };
    let pentagon = cycle_cayley(5)?;
    let typical = check_typical(&pentagon, &frac(3, 10), &frac(1, 10), &budget)?;

    let z6 = AbelianGroup::new(vec![6])?;
    let involution = z6.element(3);
    let matching = CayleyGraph::build(ConnectionSet::new(z6, vec![involution])?)?;
    let floppy = check_typical(&matching, &frac(1, 10), &frac(1, 10), &budget)?;

    let z8 = AbelianGroup::new(vec![8])?;
    let everything: Vec<_> = (1..8).map(|i| z8.element(i)).collect();
    let complete = CayleyGraph::build(ConnectionSet::new(z8, everything)?)?;
    let saturated = check_typical(&complete, &frac(1, 4), &frac(1, 10), &budget)?;

    let passed = typical.all_pass()
        && floppy.restriction_rigidity.outcome.failed()
        && saturated.degree_window.outcome.failed();
    Ok((
        passed,
        format!(
            "pentagon passes all five conditions: {}; perfect matching fails rigidity: {}; \
             complete host fails the degree window: {}",
            typical.all_pass(),
            floppy.restriction_rigidity.outcome.failed(),
            saturated.degree_window.outcome.failed(),
        ),
    ))
}
