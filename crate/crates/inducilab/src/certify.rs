//! Structural certification of Cayley graphs and their induced subgraphs:
//! degree windows, pairwise distinguisher floors, biclique-freeness,
//! rigidity of partial maps against the canonical rotations and reflections,
//! and signature sets with their randomized constructions.
//!
//! Every verdict is exact or explicitly `Skipped`; a `Fail` always carries a
//! witness that revalidates on replay. The counterexample searches enumerate
//! partial injections directly instead of iterating over all domains, so a
//! single violating map is found (or ruled out) without touching the doubly
//! exponential space of (domain, map) pairs.

use std::error::Error;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::Verdict;
use crate::cayley::{rotations_reflections, CayleyError, CayleyGraph};
use crate::graph::{Graph, GraphError, Primality, VertexSet};
use crate::interval::{
    ceil_scaled_power, floor_log_scaled_rational, ln_interval, LogBase, RatInterval,
};

/// Largest group order for which the rigidity searches run exhaustively.
pub const RIGIDITY_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertifyError {
    /// Probability-like parameters have open-interval ranges.
    ParameterRange { name: &'static str, value: String },
    /// Distinguishers are defined for distinct vertices only.
    IdenticalPair { v: usize },
    VertexOutOfRange { vertex: usize, n: usize },
    /// Super-signatures are non-empty by definition; sampling needs a pool.
    EmptySet { what: &'static str },
    /// The exhaustive rigidity check refuses orders beyond its cap.
    CapacityExceeded { order: usize, cap: usize },
    /// Witness replay only knows the condition names reports emit.
    UnknownCondition { name: String },
    Graph(GraphError),
    Cayley(CayleyError),
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::ParameterRange { name, value } => {
                write!(f, "parameter {name} out of range: {value}")
            }
            CertifyError::IdenticalPair { v } => {
                write!(f, "distinguishers need two distinct vertices, got {v} twice")
            }
            CertifyError::VertexOutOfRange { vertex, n } => {
                write!(f, "vertex {vertex} out of range for a graph on {n} vertices")
            }
            CertifyError::EmptySet { what } => write!(f, "{what} must be non-empty"),
            CertifyError::CapacityExceeded { order, cap } => {
                write!(f, "order {order} exceeds the exhaustive-search cap {cap}")
            }
            CertifyError::UnknownCondition { name } => {
                write!(f, "no replayable condition named {name:?}")
            }
            CertifyError::Graph(e) => write!(f, "{e}"),
            CertifyError::Cayley(e) => write!(f, "{e}"),
        }
    }
}

impl Error for CertifyError {}

impl From<GraphError> for CertifyError {
    fn from(e: GraphError) -> Self {
        CertifyError::Graph(e)
    }
}

impl From<CayleyError> for CertifyError {
    fn from(e: CayleyError) -> Self {
        CertifyError::Cayley(e)
    }
}

/// Concrete evidence attached to a failing condition. Each variant carries
/// enough to replay the specific violation against the same graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A vertex whose degree escapes the window.
    Vertex { v: usize, degree: usize },
    /// A vertex pair with too few distinguishers.
    Pair { v: usize, w: usize, distinguishers: usize },
    /// Disjoint sets joined completely or not at all.
    SetPair { x: Vec<usize>, y: Vec<usize>, complete: bool },
    /// A partial injection (domain ascending) escaping the canonical maps.
    Map { domain: Vec<usize>, images: Vec<usize> },
    /// A homogeneous set violating primality.
    Module { vertices: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail { witness: Witness },
    Skipped { reason: String },
}

impl Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn failed(&self) -> bool {
        matches!(self, Outcome::Fail { .. })
    }

    pub fn skipped(&self) -> bool {
        matches!(self, Outcome::Skipped { .. })
    }
}

/// One certified condition: its outcome, whether the method was exhaustive,
/// and how long it took.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub outcome: Outcome,
    pub exact: bool,
    pub elapsed_ms: u64,
}

fn timed(f: impl FnOnce() -> (Outcome, bool)) -> ConditionReport {
    let start = Instant::now();
    let (outcome, exact) = f();
    ConditionReport {
        outcome,
        exact,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// Resource limits for the counterexample searches. `nodes` caps the search
/// tree per root branch; exceeding it yields `Skipped`, never a wrong
/// verdict. `biclique_side` overrides the analytic side threshold, which
/// otherwise exceeds half the order for every group below a thousand
/// elements and makes the condition hold vacuously.
#[derive(Debug, Clone)]
pub struct SearchBudget {
    pub nodes: u64,
    pub workers: usize,
    pub biclique_side: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            nodes: 20_000_000,
            workers: 1,
            biclique_side: None,
        }
    }
}

/// Per-condition verdicts for a host graph: degree window, distinguisher
/// floor for every vertex pair, absence of large one-sided set pairs, and
/// rigidity of large partial maps (exact and near variants).
#[derive(Debug, Clone, Serialize)]
pub struct TypicalityReport {
    pub order: usize,
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub q0: BigRational,
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub delta0: BigRational,
    pub degree_window: ConditionReport,
    pub pair_distinguishers: ConditionReport,
    pub biclique_free: ConditionReport,
    pub restriction_rigidity: ConditionReport,
    pub near_restriction_rigidity: ConditionReport,
}

impl TypicalityReport {
    pub fn conditions(&self) -> [(&'static str, &ConditionReport); 5] {
        [
            ("degree_window", &self.degree_window),
            ("pair_distinguishers", &self.pair_distinguishers),
            ("biclique_free", &self.biclique_free),
            ("restriction_rigidity", &self.restriction_rigidity),
            ("near_restriction_rigidity", &self.near_restriction_rigidity),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.conditions().iter().all(|(_, c)| c.outcome.passed())
    }

    pub fn any_fail(&self) -> bool {
        self.conditions().iter().any(|(_, c)| c.outcome.failed())
    }

    pub fn any_skipped(&self) -> bool {
        self.conditions().iter().any(|(_, c)| c.outcome.skipped())
    }
}

/// Verdicts for an induced subgraph: primality, distinguisher floor with
/// pairs drawn from the whole host but distinguishers counted inside the
/// subgraph, and rigidity at the subgraph-scaled threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ReasonableReport {
    pub host_order: usize,
    pub subgraph_size: usize,
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub q: BigRational,
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub delta: BigRational,
    pub prime: ConditionReport,
    pub pair_distinguishers: ConditionReport,
    pub restriction_rigidity: ConditionReport,
}

impl ReasonableReport {
    pub fn conditions(&self) -> [(&'static str, &ConditionReport); 3] {
        [
            ("prime", &self.prime),
            ("pair_distinguishers", &self.pair_distinguishers),
            ("restriction_rigidity", &self.restriction_rigidity),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.conditions().iter().all(|(_, c)| c.outcome.passed())
    }
}

/// How many vertices of `restrict`, other than `v` and `w` themselves, are
/// adjacent to exactly one of `v` and `w`.
pub fn distinguisher_count(
    g: &Graph,
    v: usize,
    w: usize,
    restrict: &VertexSet,
) -> Result<usize, CertifyError> {
    if v == w {
        return Err(CertifyError::IdenticalPair { v });
    }
    for x in [v, w] {
        if x >= g.n() {
            return Err(CertifyError::VertexOutOfRange { vertex: x, n: g.n() });
        }
    }
    if restrict.capacity() != g.n() {
        return Err(CertifyError::VertexOutOfRange {
            vertex: restrict.capacity(),
            n: g.n(),
        });
    }
    Ok(restrict
        .iter()
        .filter(|&u| u != v && u != w && g.has_edge(u, v) != g.has_edge(u, w))
        .count())
}

fn check_unit_open(name: &'static str, v: &BigRational, upper: &BigRational) -> Result<(), CertifyError> {
    if v <= &BigRational::zero() || v >= upper {
        return Err(CertifyError::ParameterRange {
            name,
            value: v.to_string(),
        });
    }
    Ok(())
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

fn count_reaches(count: usize, threshold: &BigRational) -> bool {
    &BigRational::from_integer(BigInt::from(count)) >= threshold
}

fn ceil_positive(r: &BigRational) -> usize {
    r.ceil().to_integer().to_usize().expect("threshold fits usize")
}

/// First vertex whose degree leaves `[q0*n, (1-q0)*n]`, scanning in index
/// order.
fn degree_window_outcome(g: &Graph, q0: &BigRational) -> Outcome {
    let n = BigRational::from_integer(BigInt::from(g.n()));
    let lo = q0 * &n;
    let hi = (BigRational::one() - q0) * &n;
    for v in 0..g.n() {
        let d = BigRational::from_integer(BigInt::from(g.degree(v)));
        if d < lo || d > hi {
            return Outcome::Fail {
                witness: Witness::Vertex { v, degree: g.degree(v) },
            };
        }
    }
    Outcome::Pass
}

/// First pair below the distinguisher floor, scanning pairs in
/// lexicographic order. Workers split the outer vertex; the reported pair
/// is the lexicographic minimum over all violations, so the witness does
/// not depend on the worker count.
fn pair_floor_outcome(
    g: &Graph,
    restrict: &VertexSet,
    threshold: &BigRational,
    workers: usize,
) -> Outcome {
    let n = g.n();
    let workers = workers.max(1).min(n.max(1));
    let scan = |start: usize| -> Option<(usize, usize, usize)> {
        let mut best: Option<(usize, usize, usize)> = None;
        let mut v = start;
        while v < n {
            for w in (v + 1)..n {
                let c = restrict
                    .iter()
                    .filter(|&u| u != v && u != w && g.has_edge(u, v) != g.has_edge(u, w))
                    .count();
                if !count_reaches(c, threshold) {
                    best = Some((v, w, c));
                    break;
                }
            }
            if best.is_some() {
                break;
            }
            v += workers;
        }
        best
    };
    let hit = if workers == 1 {
        scan(0)
    } else {
        let mut results: Vec<Option<(usize, usize, usize)>> = Vec::new();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|i| s.spawn(move || scan(i))).collect();
            results = handles.into_iter().map(|h| h.join().expect("scan panic")).collect();
        });
        results.into_iter().flatten().min()
    };
    match hit {
        Some((v, w, distinguishers)) => Outcome::Fail {
            witness: Witness::Pair { v, w, distinguishers },
        },
        None => Outcome::Pass,
    }
}

enum BranchOutcome {
    Clear,
    Found(Witness),
    Exhausted,
    Cancelled,
}

/// Runs independent root branches of a counterexample search, cancelling the
/// rest once one branch finds a witness. With a single worker the branches
/// run in order and the first hit wins; multi-worker runs may surface a
/// different (equally valid) witness, but Pass/Skipped verdicts never depend
/// on the worker count because they require every branch to finish.
fn run_branches(
    count: usize,
    workers: usize,
    run: impl Fn(usize, &AtomicBool) -> BranchOutcome + Sync,
) -> (Option<Witness>, bool) {
    let stop = AtomicBool::new(false);
    let workers = workers.max(1).min(count.max(1));
    let mut results: Vec<BranchOutcome> = Vec::new();
    if workers == 1 {
        for b in 0..count {
            let r = run(b, &stop);
            if let BranchOutcome::Found(_) = r {
                results.push(r);
                break;
            }
            results.push(r);
        }
    } else {
        let mut slots: Vec<Vec<BranchOutcome>> = Vec::new();
        std::thread::scope(|s| {
            let stop = &stop;
            let run = &run;
            let handles: Vec<_> = (0..workers)
                .map(|i| {
                    s.spawn(move || {
                        let mut local = Vec::new();
                        let mut b = i;
                        while b < count {
                            let r = run(b, stop);
                            if let BranchOutcome::Found(_) = r {
                                stop.store(true, AtomicOrdering::Relaxed);
                                local.push(r);
                                break;
                            }
                            local.push(r);
                            b += workers;
                        }
                        local
                    })
                })
                .collect();
            slots = handles.into_iter().map(|h| h.join().expect("branch panic")).collect();
        });
        for slot in slots {
            results.extend(slot);
        }
    }
    let mut exhausted = false;
    let mut found = None;
    for r in results {
        match r {
            BranchOutcome::Found(w) => {
                found = Some(w);
                break;
            }
            BranchOutcome::Exhausted => exhausted = true,
            BranchOutcome::Clear | BranchOutcome::Cancelled => {}
        }
    }
    (found, exhausted)
}

/// Backtracking state for the rigidity searches. `maps` holds the distinct
/// image tables of the canonical rotations and reflections; duplicates are
/// collapsed beforehand so agreement is tracked per function, not per name.
struct RigidityDfs<'a> {
    g: &'a Graph,
    maps: &'a [Vec<usize>],
    nodes_left: u64,
    exhausted: bool,
    stop: &'a AtomicBool,
    assigned: Vec<(usize, usize)>,
    used: u64,
}

impl<'a> RigidityDfs<'a> {
    fn new(g: &'a Graph, maps: &'a [Vec<usize>], nodes: u64, stop: &'a AtomicBool) -> Self {
        RigidityDfs {
            g,
            maps,
            nodes_left: nodes,
            exhausted: false,
            stop,
            assigned: Vec::with_capacity(g.n()),
            used: 0,
        }
    }

    fn charge(&mut self) -> bool {
        if self.nodes_left == 0 {
            self.exhausted = true;
            return false;
        }
        self.nodes_left -= 1;
        !self.stop.load(AtomicOrdering::Relaxed)
    }

    fn consistent(&self, v: usize, y: usize) -> bool {
        self.assigned
            .iter()
            .all(|&(x, fx)| self.g.has_edge(v, x) == self.g.has_edge(y, fx))
    }

    fn witness(&self) -> Witness {
        Witness::Map {
            domain: self.assigned.iter().map(|&(x, _)| x).collect(),
            images: self.assigned.iter().map(|&(_, y)| y).collect(),
        }
    }

    /// Looks for an adjacency-preserving partial injection of size at least
    /// `min_size` that no canonical map extends. `alive` holds the maps
    /// still agreeing with every assignment made so far; a leaf with no
    /// survivors is a counterexample.
    fn escape_search(&mut self, v: usize, alive: &[usize], skips_left: usize) -> Option<Witness> {
        if !self.charge() {
            return None;
        }
        let n = self.g.n();
        if v == n {
            return alive.is_empty().then(|| self.witness());
        }
        for y in 0..n {
            if self.used >> y & 1 == 1 || !self.consistent(v, y) {
                continue;
            }
            let next: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&i| self.maps[i][v] == y)
                .collect();
            self.assigned.push((v, y));
            self.used |= 1 << y;
            let hit = self.escape_search(v + 1, &next, skips_left);
            self.used &= !(1 << y);
            self.assigned.pop();
            if hit.is_some() || self.exhausted {
                return hit;
            }
        }
        if skips_left > 0 {
            return self.escape_search(v + 1, alive, skips_left - 1);
        }
        None
    }

    /// Looks for an adjacency-preserving partial injection of size at least
    /// `min_size` agreeing with every canonical map on fewer than `target`
    /// vertices. Agreement only grows along a branch, so any map already at
    /// the target kills the whole subtree.
    fn low_agreement_search(
        &mut self,
        v: usize,
        agree: &[usize],
        skips_left: usize,
        target: usize,
    ) -> Option<Witness> {
        if !self.charge() {
            return None;
        }
        let n = self.g.n();
        if v == n {
            return agree.iter().all(|&a| a < target).then(|| self.witness());
        }
        for y in 0..n {
            if self.used >> y & 1 == 1 || !self.consistent(v, y) {
                continue;
            }
            let mut next = agree.to_vec();
            let mut dead = false;
            for (i, a) in next.iter_mut().enumerate() {
                if self.maps[i][v] == y {
                    *a += 1;
                    if *a >= target {
                        dead = true;
                    }
                }
            }
            if dead {
                continue;
            }
            self.assigned.push((v, y));
            self.used |= 1 << y;
            let hit = self.low_agreement_search(v + 1, &next, skips_left, target);
            self.used &= !(1 << y);
            self.assigned.pop();
            if hit.is_some() || self.exhausted {
                return hit;
            }
        }
        if skips_left > 0 {
            return self.low_agreement_search(v + 1, agree, skips_left - 1, target);
        }
        None
    }
}

/// Distinct image tables of the canonical maps.
fn distinct_map_tables(host: &CayleyGraph) -> Result<Vec<Vec<usize>>, CertifyError> {
    let mut tables: Vec<Vec<usize>> = Vec::new();
    for m in rotations_reflections(host.group())? {
        if !tables.iter().any(|t| t == m.images()) {
            tables.push(m.images().to_vec());
        }
    }
    Ok(tables)
}

enum RigidityMode {
    /// Counterexample: no canonical map extends the injection.
    Escape,
    /// Counterexample: every canonical map agrees on fewer than `target`.
    LowAgreement { target: usize },
}

/// Shared driver for both rigidity searches. Root branches fix the fate of
/// vertex 0 (each image in turn, then the skip), so the node budget applies
/// per branch and branches parallelize cleanly.
fn rigidity_outcome(
    g: &Graph,
    maps: &[Vec<usize>],
    min_size: usize,
    mode: &RigidityMode,
    budget: &SearchBudget,
) -> (Outcome, bool) {
    let n = g.n();
    let skips = n - min_size.min(n);
    let branches = n + 1;
    let run = |b: usize, stop: &AtomicBool| -> BranchOutcome {
        let mut dfs = RigidityDfs::new(g, maps, budget.nodes, stop);
        let hit = if b < n {
            let y = b;
            dfs.assigned.push((0, y));
            dfs.used = 1 << y;
            match mode {
                RigidityMode::Escape => {
                    let alive: Vec<usize> =
                        (0..maps.len()).filter(|&i| maps[i][0] == y).collect();
                    dfs.escape_search(1, &alive, skips)
                }
                RigidityMode::LowAgreement { target } => {
                    let agree: Vec<usize> =
                        maps.iter().map(|m| usize::from(m[0] == y)).collect();
                    if agree.iter().any(|&a| a >= *target) {
                        None
                    } else {
                        dfs.low_agreement_search(1, &agree, skips, *target)
                    }
                }
            }
        } else if skips > 0 {
            match mode {
                RigidityMode::Escape => {
                    let alive: Vec<usize> = (0..maps.len()).collect();
                    dfs.escape_search(1, &alive, skips - 1)
                }
                RigidityMode::LowAgreement { target } => {
                    let agree = vec![0usize; maps.len()];
                    dfs.low_agreement_search(1, &agree, skips - 1, *target)
                }
            }
        } else {
            None
        };
        match hit {
            Some(w) => BranchOutcome::Found(w),
            None if dfs.exhausted => BranchOutcome::Exhausted,
            None if dfs.stop.load(AtomicOrdering::Relaxed) => BranchOutcome::Cancelled,
            None => BranchOutcome::Clear,
        }
    };
    let (found, exhausted) = run_branches(branches, budget.workers, run);
    match found {
        Some(witness) => (Outcome::Fail { witness }, true),
        None if exhausted => (
            Outcome::Skipped {
                reason: "search budget exhausted".into(),
            },
            false,
        ),
        None => (Outcome::Pass, true),
    }
}

/// Rigidity condition at threshold `(1 - delta) * scale` vertices: every
/// adjacency-preserving injection on a domain at least that large must be a
/// restriction of a canonical map. Exhaustive only up to `RIGIDITY_CAP`.
fn rigidity_condition(
    host: &CayleyGraph,
    delta: &BigRational,
    scale: usize,
    budget: &SearchBudget,
) -> Result<(Outcome, bool), CertifyError> {
    let n = host.order();
    if n > RIGIDITY_CAP {
        return Ok((
            Outcome::Skipped {
                reason: format!("order {n} exceeds the exhaustive-search cap {RIGIDITY_CAP}"),
            },
            false,
        ));
    }
    let threshold = (BigRational::one() - delta) * BigRational::from_integer(BigInt::from(scale));
    if !threshold.is_positive() {
        return Ok((Outcome::Pass, true));
    }
    let min_size = ceil_positive(&threshold);
    if min_size > n {
        return Ok((Outcome::Pass, true));
    }
    let maps = distinct_map_tables(host)?;
    Ok(rigidity_outcome(host.graph(), &maps, min_size, &RigidityMode::Escape, budget))
}

/// Near-rigidity at domain threshold `(1 - delta0) * n` and agreement target
/// `(1 - 2*delta0) * n`: some canonical map must agree on at least the
/// target number of domain vertices.
fn near_rigidity_condition(
    host: &CayleyGraph,
    delta0: &BigRational,
    budget: &SearchBudget,
) -> Result<(Outcome, bool), CertifyError> {
    let n = host.order();
    if n > RIGIDITY_CAP {
        return Ok((
            Outcome::Skipped {
                reason: format!("order {n} exceeds the exhaustive-search cap {RIGIDITY_CAP}"),
            },
            false,
        ));
    }
    let big_n = BigRational::from_integer(BigInt::from(n));
    let domain = (BigRational::one() - delta0) * &big_n;
    let agreement = (BigRational::one() - delta0 * BigRational::from_integer(2.into())) * &big_n;
    if !agreement.is_positive() {
        return Ok((Outcome::Pass, true));
    }
    if !domain.is_positive() {
        return Ok((Outcome::Pass, true));
    }
    let min_size = ceil_positive(&domain);
    if min_size > n {
        return Ok((Outcome::Pass, true));
    }
    let target = ceil_positive(&agreement);
    let maps = distinct_map_tables(host)?;
    Ok(rigidity_outcome(
        host.graph(),
        &maps,
        min_size,
        &RigidityMode::LowAgreement { target },
        budget,
    ))
}

/// Branch-and-bound search for disjoint sets of size `side` that are joined
/// completely (`complete = true`) or not at all. One side grows in ascending
/// vertex order while the candidate pool for the other side shrinks; the
/// search dies as soon as the pool cannot fill the other side.
struct BicliqueDfs<'a> {
    g: &'a Graph,
    side: usize,
    complete: bool,
    nodes_left: u64,
    exhausted: bool,
    stop: &'a AtomicBool,
}

impl<'a> BicliqueDfs<'a> {
    fn search(&mut self, chosen: &mut Vec<usize>, pool: &[usize], next: usize) -> Option<Witness> {
        if self.nodes_left == 0 {
            self.exhausted = true;
            return None;
        }
        self.nodes_left -= 1;
        if self.stop.load(AtomicOrdering::Relaxed) {
            return None;
        }
        if chosen.len() == self.side {
            if pool.len() >= self.side {
                return Some(Witness::SetPair {
                    x: chosen.clone(),
                    y: pool[..self.side].to_vec(),
                    complete: self.complete,
                });
            }
            return None;
        }
        if pool.len() < self.side {
            return None;
        }
        let n = self.g.n();
        let needed = self.side - chosen.len();
        for v in next..n {
            if n - v < needed {
                break;
            }
            let shrunk: Vec<usize> = pool
                .iter()
                .copied()
                .filter(|&u| u != v && self.g.has_edge(u, v) == self.complete)
                .collect();
            chosen.push(v);
            let hit = self.search(chosen, &shrunk, v + 1);
            chosen.pop();
            if hit.is_some() || self.exhausted {
                return hit;
            }
        }
        None
    }
}

fn biclique_outcome(g: &Graph, side: usize, budget: &SearchBudget) -> (Outcome, bool) {
    if 2 * side > g.n() {
        return (Outcome::Pass, true);
    }
    let run = |b: usize, stop: &AtomicBool| -> BranchOutcome {
        let complete = b == 0;
        let mut dfs = BicliqueDfs {
            g,
            side,
            complete,
            nodes_left: budget.nodes,
            exhausted: false,
            stop,
        };
        let pool: Vec<usize> = (0..g.n()).collect();
        match dfs.search(&mut Vec::new(), &pool, 0) {
            Some(w) => BranchOutcome::Found(w),
            None if dfs.exhausted => BranchOutcome::Exhausted,
            None if stop.load(AtomicOrdering::Relaxed) => BranchOutcome::Cancelled,
            None => BranchOutcome::Clear,
        }
    };
    let (found, exhausted) = run_branches(2, budget.workers, run);
    match found {
        Some(witness) => (Outcome::Fail { witness }, true),
        None if exhausted => (
            Outcome::Skipped {
                reason: "search budget exhausted".into(),
            },
            false,
        ),
        None => (Outcome::Pass, true),
    }
}

/// Certifies the host graph's structural conditions at parameters `q0`
/// (degree and distinguisher floors) and `delta0` (rigidity thresholds).
///
/// The degree and pair conditions are always exact. The set-pair condition
/// uses side threshold `ceil(2 * n^(4/5))` and passes vacuously whenever two
/// such sets cannot fit in the graph, which covers every order below 1024;
/// `budget.biclique_side` forces a smaller side to exercise the search. Both
/// rigidity conditions are exhaustive up to `RIGIDITY_CAP` and report
/// `Skipped` beyond it.
pub fn check_typical(
    host: &CayleyGraph,
    q0: &BigRational,
    delta0: &BigRational,
    budget: &SearchBudget,
) -> Result<TypicalityReport, CertifyError> {
    check_unit_open("q0", q0, &half())?;
    check_unit_open("delta0", delta0, &BigRational::one())?;
    let g = host.graph();
    let n = host.order();
    let degree_window = timed(|| (degree_window_outcome(g, q0), true));
    let full = VertexSet::full(n);
    let floor = q0 * BigRational::from_integer(BigInt::from(n));
    let pair_distinguishers =
        timed(|| (pair_floor_outcome(g, &full, &floor, budget.workers), true));
    let side = match budget.biclique_side {
        Some(s) => s,
        None => ceil_scaled_power(n as u64, 4, 5, 2)
            .to_usize()
            .expect("side fits usize"),
    };
    let biclique_free = timed(|| biclique_outcome(g, side, budget));
    let rigidity = rigidity_condition(host, delta0, n, budget)?;
    let restriction_rigidity = timed(|| rigidity);
    let near = near_rigidity_condition(host, delta0, budget)?;
    let near_restriction_rigidity = timed(|| near);
    Ok(TypicalityReport {
        order: n,
        q0: q0.clone(),
        delta0: delta0.clone(),
        degree_window,
        pair_distinguishers,
        biclique_free,
        restriction_rigidity,
        near_restriction_rigidity,
    })
}

/// The near-rigidity condition on its own, with the implication it buys:
/// whenever `2 * delta0 <= q0`, a host passing the pair floor at `q0` and
/// near-rigidity at `delta0` must also pass full rigidity at `delta0`. The
/// implication instance is checked whenever `q0` is supplied and the
/// premise threshold is met.
#[derive(Debug, Clone, Serialize)]
pub struct NearRigidityReport {
    pub order: usize,
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub delta0: BigRational,
    #[serde(
        serialize_with = "crate::report::serialize_rational_option",
        skip_serializing_if = "Option::is_none"
    )]
    pub q0: Option<BigRational>,
    pub near_restriction_rigidity: ConditionReport,
    pub implication: Option<ImplicationReport>,
}

/// Instance check of "pair floor and near-rigidity imply full rigidity".
/// `consistent` is `None` when any part was skipped.
#[derive(Debug, Clone, Serialize)]
pub struct ImplicationReport {
    pub pair_distinguishers: ConditionReport,
    pub restriction_rigidity: ConditionReport,
    pub consistent: Option<bool>,
}

pub fn check_near_rigidity(
    host: &CayleyGraph,
    delta0: &BigRational,
    q0: Option<&BigRational>,
    budget: &SearchBudget,
) -> Result<NearRigidityReport, CertifyError> {
    check_unit_open("delta0", delta0, &BigRational::one())?;
    if let Some(q0) = q0 {
        check_unit_open("q0", q0, &half())?;
    }
    let n = host.order();
    if n > RIGIDITY_CAP {
        return Err(CertifyError::CapacityExceeded {
            order: n,
            cap: RIGIDITY_CAP,
        });
    }
    let near = near_rigidity_condition(host, delta0, budget)?;
    let near_restriction_rigidity = timed(|| near);
    let implication = match q0 {
        Some(q0) if &(delta0 * BigRational::from_integer(2.into())) <= q0 => {
            let g = host.graph();
            let full = VertexSet::full(n);
            let floor = q0 * BigRational::from_integer(BigInt::from(n));
            let pair_distinguishers =
                timed(|| (pair_floor_outcome(g, &full, &floor, budget.workers), true));
            let rigidity = rigidity_condition(host, delta0, n, budget)?;
            let restriction_rigidity = timed(|| rigidity);
            let parts = [
                &pair_distinguishers,
                &near_restriction_rigidity,
                &restriction_rigidity,
            ];
            let consistent = if parts.iter().any(|c| c.outcome.skipped()) {
                None
            } else {
                let premises = pair_distinguishers.outcome.passed()
                    && near_restriction_rigidity.outcome.passed();
                Some(!premises || restriction_rigidity.outcome.passed())
            };
            Some(ImplicationReport {
                pair_distinguishers,
                restriction_rigidity,
                consistent,
            })
        }
        _ => None,
    };
    Ok(NearRigidityReport {
        order: n,
        delta0: delta0.clone(),
        q0: q0.cloned(),
        near_restriction_rigidity,
        implication,
    })
}

/// Certifies an induced subgraph of the host: the subgraph must be prime,
/// every pair of host vertices needs at least `q * k` distinguishers inside
/// the subgraph, and partial maps on the host of size at least
/// `(1 - delta) * k` must restrict canonical maps (`k` the subgraph size).
pub fn check_reasonable(
    host: &CayleyGraph,
    h_vertices: &VertexSet,
    q: &BigRational,
    delta: &BigRational,
    budget: &SearchBudget,
) -> Result<ReasonableReport, CertifyError> {
    check_unit_open("q", q, &half())?;
    check_unit_open("delta", delta, &BigRational::one())?;
    if h_vertices.capacity() != host.order() {
        return Err(CertifyError::VertexOutOfRange {
            vertex: h_vertices.capacity(),
            n: host.order(),
        });
    }
    if h_vertices.is_empty() {
        return Err(CertifyError::EmptySet {
            what: "subgraph vertex set",
        });
    }
    let k = h_vertices.len();
    let (sub, back) = host.graph().induced_subgraph(h_vertices)?;
    let prime = timed(|| {
        let outcome = match sub.primality() {
            Primality::Prime => Outcome::Pass,
            Primality::Module(u) => Outcome::Fail {
                witness: Witness::Module {
                    vertices: u.iter().map(|i| back[i]).collect(),
                },
            },
        };
        (outcome, true)
    });
    let floor = q * BigRational::from_integer(BigInt::from(k));
    let pair_distinguishers = timed(|| {
        (
            pair_floor_outcome(host.graph(), h_vertices, &floor, budget.workers),
            true,
        )
    });
    let rigidity = rigidity_condition(host, delta, k, budget)?;
    let restriction_rigidity = timed(|| rigidity);
    Ok(ReasonableReport {
        host_order: host.order(),
        subgraph_size: k,
        q: q.clone(),
        delta: delta.clone(),
        prime,
        pair_distinguishers,
        restriction_rigidity,
    })
}

/// Re-verifies a stored witness against a host at the same parameters.
/// True exactly when the witness still certifies a failure of the named
/// condition; a witness of the wrong shape never revalidates. Condition
/// names are the keys of `TypicalityReport::conditions`.
pub fn replay_witness(
    host: &CayleyGraph,
    condition: &str,
    witness: &Witness,
    q0: &BigRational,
    delta0: &BigRational,
    biclique_side: Option<usize>,
) -> Result<bool, CertifyError> {
    check_unit_open("q0", q0, &half())?;
    check_unit_open("delta0", delta0, &BigRational::one())?;
    let g = host.graph();
    let n = host.order();
    let big_n = BigRational::from_integer(BigInt::from(n));
    Ok(match (condition, witness) {
        ("degree_window", Witness::Vertex { v, degree }) => {
            let d = BigRational::from_integer(BigInt::from(*degree));
            *v < n
                && g.degree(*v) == *degree
                && (d < q0 * &big_n || d > (BigRational::one() - q0) * &big_n)
        }
        ("pair_distinguishers", Witness::Pair { v, w, distinguishers }) => {
            if *v >= n || *w >= n || v == w {
                false
            } else {
                let c = distinguisher_count(g, *v, *w, &VertexSet::full(n))?;
                c == *distinguishers && !count_reaches(c, &(q0 * &big_n))
            }
        }
        ("biclique_free", Witness::SetPair { x, y, complete }) => {
            let side = match biclique_side {
                Some(s) => s,
                None => ceil_scaled_power(n as u64, 4, 5, 2)
                    .to_usize()
                    .expect("side fits usize"),
            };
            let mut seen = vec![false; n];
            let distinct = x.iter().chain(y).all(|&v| {
                v < n && !std::mem::replace(&mut seen[v], true)
            });
            distinct
                && x.len() >= side
                && y.len() >= side
                && x.iter().all(|&a| y.iter().all(|&b| g.has_edge(a, b) == *complete))
        }
        ("restriction_rigidity", Witness::Map { domain, images }) => {
            let threshold = (BigRational::one() - delta0) * &big_n;
            if !threshold.is_positive() || !replayable_injection(g, domain, images) {
                false
            } else if domain.len() < ceil_positive(&threshold) {
                false
            } else {
                let pairs: Vec<(usize, usize)> =
                    domain.iter().copied().zip(images.iter().copied()).collect();
                let maps = rotations_reflections(host.group())?;
                !maps.iter().any(|m| m.extends(&pairs))
            }
        }
        ("near_restriction_rigidity", Witness::Map { domain, images }) => {
            let min_domain = (BigRational::one() - delta0) * &big_n;
            let agreement =
                (BigRational::one() - delta0 * BigRational::from_integer(2.into())) * &big_n;
            if !agreement.is_positive()
                || !replayable_injection(g, domain, images)
                || domain.len() < ceil_positive(&min_domain)
            {
                false
            } else {
                let target = ceil_positive(&agreement);
                let maps = rotations_reflections(host.group())?;
                maps.iter().all(|m| {
                    let agree = domain
                        .iter()
                        .zip(images)
                        .filter(|&(&x, &y)| m.apply(x) == y)
                        .count();
                    agree < target
                })
            }
        }
        (
            "degree_window" | "pair_distinguishers" | "biclique_free"
            | "restriction_rigidity" | "near_restriction_rigidity",
            _,
        ) => false,
        (name, _) => {
            return Err(CertifyError::UnknownCondition { name: name.to_string() });
        }
    })
}

/// A stored map is replayable when it is an injection between in-range
/// vertices that preserves adjacency and non-adjacency on its domain.
fn replayable_injection(g: &Graph, domain: &[usize], images: &[usize]) -> bool {
    let n = g.n();
    if domain.len() != images.len() || domain.is_empty() {
        return false;
    }
    let mut dom_seen = vec![false; n];
    let mut img_seen = vec![false; n];
    for (&x, &y) in domain.iter().zip(images) {
        if x >= n || y >= n || dom_seen[x] || img_seen[y] {
            return false;
        }
        dom_seen[x] = true;
        img_seen[y] = true;
    }
    (0..domain.len()).all(|i| {
        (i + 1..domain.len())
            .all(|j| g.has_edge(domain[i], domain[j]) == g.has_edge(images[i], images[j]))
    })
}

/// First pair of vertices outside `s` whose neighborhoods agree on `s`,
/// in lexicographic order, or `None` when `s` separates all such pairs.
pub fn signature_violation(
    h: &Graph,
    s: &VertexSet,
) -> Result<Option<(usize, usize)>, CertifyError> {
    if s.capacity() != h.n() {
        return Err(CertifyError::VertexOutOfRange {
            vertex: s.capacity(),
            n: h.n(),
        });
    }
    let outside: Vec<usize> = s.complement().iter().collect();
    for (i, &v) in outside.iter().enumerate() {
        for &w in &outside[i + 1..] {
            if s.iter().all(|u| h.has_edge(u, v) == h.has_edge(u, w)) {
                return Ok(Some((v, w)));
            }
        }
    }
    Ok(None)
}

/// Whether every pair of vertices outside `s` differs in its neighborhood
/// on `s`. The empty set qualifies when at most one vertex lies outside.
pub fn is_signature(h: &Graph, s: &VertexSet) -> Result<bool, CertifyError> {
    Ok(signature_violation(h, s)?.is_none())
}

/// First pair outside `s` whose symmetric neighborhood difference meets `s`
/// in fewer than `r * |s|` vertices. `s` must be non-empty and `r` a ratio
/// in (0, 1).
pub fn super_signature_violation(
    h: &Graph,
    s: &VertexSet,
    r: &BigRational,
) -> Result<Option<(usize, usize)>, CertifyError> {
    check_unit_open("r", r, &BigRational::one())?;
    if s.capacity() != h.n() {
        return Err(CertifyError::VertexOutOfRange {
            vertex: s.capacity(),
            n: h.n(),
        });
    }
    if s.is_empty() {
        return Err(CertifyError::EmptySet {
            what: "super-signature candidate",
        });
    }
    let floor = r * BigRational::from_integer(BigInt::from(s.len()));
    let outside: Vec<usize> = s.complement().iter().collect();
    for (i, &v) in outside.iter().enumerate() {
        for &w in &outside[i + 1..] {
            let c = s
                .iter()
                .filter(|&u| h.has_edge(u, v) != h.has_edge(u, w))
                .count();
            if !count_reaches(c, &floor) {
                return Ok(Some((v, w)));
            }
        }
    }
    Ok(None)
}

pub fn is_super_signature(h: &Graph, s: &VertexSet, r: &BigRational) -> Result<bool, CertifyError> {
    Ok(super_signature_violation(h, s, r)?.is_none())
}

/// Result of a randomized signature search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignatureSearch {
    Found(VertexSet),
    NotFound { trials: u32 },
}

impl SignatureSearch {
    pub fn found(&self) -> Option<&VertexSet> {
        match self {
            SignatureSearch::Found(s) => Some(s),
            SignatureSearch::NotFound { .. } => None,
        }
    }
}

fn sample_pool(x: &VertexSet) -> Vec<usize> {
    x.iter().collect()
}

fn draw_set(pool: &[usize], capacity: usize, t: u64, rng: &mut ChaCha8Rng) -> VertexSet {
    let mut s = VertexSet::new(capacity);
    for _ in 0..t {
        s.insert(pool[rng.gen_range(0..pool.len())]);
    }
    s
}

/// Samples `floor((5/q) * log k)` vertices of `x` uniformly with repetition
/// and keeps the first sampled set that separates all outside pairs, trying
/// up to `trials` times. Under the distinguisher floor at `q` and
/// `|x| >= (1 - q/2) k`, each trial succeeds with probability above 1/2.
pub fn find_signature(
    h: &Graph,
    x: &VertexSet,
    q: &BigRational,
    trials: u32,
    seed: u64,
    base: LogBase,
) -> Result<SignatureSearch, CertifyError> {
    if !q.is_positive() {
        return Err(CertifyError::ParameterRange {
            name: "q",
            value: q.to_string(),
        });
    }
    if x.capacity() != h.n() {
        return Err(CertifyError::VertexOutOfRange {
            vertex: x.capacity(),
            n: h.n(),
        });
    }
    let k = h.n().max(1) as u64;
    let scale = BigRational::from_integer(5.into()) / q;
    let t = floor_log_scaled_rational(k, &scale, base);
    if t > 0 && x.is_empty() {
        return Err(CertifyError::EmptySet { what: "sampling pool" });
    }
    let pool = sample_pool(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials.max(1) {
        let s = if t == 0 {
            VertexSet::new(h.n())
        } else {
            draw_set(&pool, h.n(), t, &mut rng)
        };
        if is_signature(h, &s)? {
            return Ok(SignatureSearch::Found(s));
        }
    }
    Ok(SignatureSearch::NotFound { trials: trials.max(1) })
}

/// Samples `floor((33/q) * log k)` vertices of `x` uniformly with repetition
/// and keeps the first sampled set where every outside pair's symmetric
/// difference covers a `q/4` fraction of the set. Under the same hypotheses
/// as the signature search, each trial succeeds with probability at least
/// 1/4.
pub fn find_super_signature(
    h: &Graph,
    x: &VertexSet,
    q: &BigRational,
    trials: u32,
    seed: u64,
    base: LogBase,
) -> Result<SignatureSearch, CertifyError> {
    if !q.is_positive() {
        return Err(CertifyError::ParameterRange {
            name: "q",
            value: q.to_string(),
        });
    }
    if x.capacity() != h.n() {
        return Err(CertifyError::VertexOutOfRange {
            vertex: x.capacity(),
            n: h.n(),
        });
    }
    let k = h.n().max(1) as u64;
    let scale = BigRational::from_integer(33.into()) / q;
    let t = floor_log_scaled_rational(k, &scale, base);
    if t > 0 && x.is_empty() {
        return Err(CertifyError::EmptySet { what: "sampling pool" });
    }
    let r = q / BigRational::from_integer(4.into());
    let pool = sample_pool(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials.max(1) {
        if t == 0 {
            // The empty set is never a super-signature; the trial fails.
            continue;
        }
        let s = draw_set(&pool, h.n(), t, &mut rng);
        if is_super_signature(h, &s, &r)? {
            return Ok(SignatureSearch::Found(s));
        }
    }
    Ok(SignatureSearch::NotFound { trials: trials.max(1) })
}

/// Parameters an induced subgraph inherits from a certified host: any
/// subgraph on at least `size_floor` vertices of a host passing the
/// typicality conditions at `(q0, delta0)` passes the subgraph conditions
/// at `(q, delta)`. The primality part of that transfer additionally needs
/// `q0 >= 4 * n^(-1/5) + log n / (4n)`, recorded in `margin_floor`; the
/// distinguisher and rigidity parts hold without it.
#[derive(Debug, Clone)]
pub struct InheritedParameters {
    pub q: BigRational,
    pub delta: BigRational,
    pub size_floor: usize,
    pub margin_floor: Verdict,
}

/// Derives `(q, delta)` from `(q0, delta0)` by subtracting a certified
/// upper bound on `log n / (4n)`, and decides the primality margin floor by
/// interval comparison. Returns `None` when the subtraction leaves nothing.
pub fn inherited_parameters(
    q0: &BigRational,
    delta0: &BigRational,
    host_order: usize,
    base: LogBase,
) -> Result<Option<InheritedParameters>, CertifyError> {
    check_unit_open("q0", q0, &half())?;
    check_unit_open("delta0", delta0, &BigRational::one())?;
    if host_order < 2 {
        return Err(CertifyError::ParameterRange {
            name: "host_order",
            value: host_order.to_string(),
        });
    }
    let n = BigRational::from_integer(BigInt::from(host_order));
    let point = RatInterval::point(n.clone());
    let log_n = crate::interval::log_interval(&point, base, 128);
    let slack = log_n.hi().clone() / (BigRational::from_integer(4.into()) * &n);
    let q = q0 - &slack;
    let delta = delta0 - &slack;
    if !q.is_positive() || !delta.is_positive() {
        return Ok(None);
    }
    let budget = crate::cayley::deletion_budget(host_order as u64, base);
    let size_floor = host_order - (budget as usize).min(host_order);
    // q0 >= 4 n^(-1/5) + log n / (4n), decided outward: the floor holds only
    // if q0 clears the upper enclosure, fails only if it misses the lower.
    let margin_floor = {
        let mut verdict = Verdict::Inconclusive;
        for prec in [64u32, 128, 256, 512, 1024] {
            let ln_n = ln_interval(&point, prec);
            let root = crate::interval::exp_interval(
                &ln_n.scale(&BigRational::new(BigInt::from(-1), BigInt::from(5))),
                prec,
            );
            let log_n = crate::interval::log_interval(&point, base, prec);
            let rhs = root
                .scale(&BigRational::from_integer(4.into()))
                .add(&log_n.scale(&BigRational::new(BigInt::one(), BigInt::from(4) * n.numer())));
            let lhs = RatInterval::point(q0.clone());
            match rhs.certainly_le(&lhs) {
                Some(true) => {
                    verdict = Verdict::CertifiedHolds;
                    break;
                }
                Some(false) => {
                    verdict = Verdict::CertifiedFails;
                    break;
                }
                None => {}
            }
        }
        verdict
    };
    Ok(Some(InheritedParameters {
        q,
        delta,
        size_floor,
        margin_floor,
    }))
}
