//! Blow-ups: replace each vertex of a base graph by a non-empty part,
//! complete between parts exactly where the base has an edge. Iterated,
//! balanced blow-ups of a Cayley graph are the extremal constructions this
//! crate studies; this module builds them, counts embeddings into them both
//! in closed form and by part-split, classifies every embedding, and
//! brute-forces the part-size objective.

use crate::cayley::{rotations_reflections, CayleyError, CayleyGraph};
use crate::embed::{self, BigCount, EmbedError, MaxMode};
use crate::graph::{Graph, GraphError, VertexSet};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

/// Largest graph a tree may materialize into.
pub const MATERIALIZE_CAP: usize = 1024;
/// Largest leaf `EmbMaximizer` will search exhaustively.
pub const MAXIMIZER_CAP: usize = crate::enumerate::LABELED_CAP;
/// Full composition enumeration guards.
pub const OPTIMIZE_N_CAP: usize = 20;
pub const OPTIMIZE_KTILDE_CAP: usize = 6;
/// Caps for multiset-reduced enumeration.
pub const REDUCED_N_CAP: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlowupError {
    /// A node's part list does not cover the base vertex set.
    PartCountMismatch { parts: usize, base: usize },
    /// Parts must be non-empty.
    EmptyPart { part: usize },
    /// A node's base differs from the Cayley graph it is counted against.
    BaseMismatch,
    /// Explicit leaf list is shorter than the number of leaves.
    LeafListExhausted { needed: usize, got: usize },
    /// An explicit leaf has the wrong vertex count.
    LeafSizeMismatch { part: usize, expected: usize, got: usize },
    /// Materializing the tree would exceed the direct-count capacity.
    MaterializeCapacity { total: usize, cap: usize },
    /// Composition enumeration out of budget.
    CompositionBudget { n: usize, ktilde: usize },
    /// Multiset reduction requested where the objective is not symmetric.
    ReductionInvalid { k: usize, ktilde: usize },
    /// Fixed per-part graphs cannot follow varying composition sizes.
    ExplicitPolicyInOptimizer,
    Graph(GraphError),
    Embed(EmbedError),
    Cayley(CayleyError),
}

impl fmt::Display for BlowupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowupError::PartCountMismatch { parts, base } => {
                write!(f, "node has {parts} parts for a base on {base} vertices")
            }
            BlowupError::EmptyPart { part } => write!(f, "part {part} is empty"),
            BlowupError::BaseMismatch => {
                write!(f, "tree base differs from the counting base graph")
            }
            BlowupError::LeafListExhausted { needed, got } => {
                write!(f, "explicit leaf list has {got} graphs, needs {needed}")
            }
            BlowupError::LeafSizeMismatch { part, expected, got } => {
                write!(f, "explicit leaf for part {part} has {got} vertices, expected {expected}")
            }
            BlowupError::MaterializeCapacity { total, cap } => {
                write!(f, "blow-up on {total} vertices exceeds the cap of {cap}")
            }
            BlowupError::CompositionBudget { n, ktilde } => {
                write!(
                    f,
                    "composition search over n={n}, parts={ktilde} exceeds the budget"
                )
            }
            BlowupError::ReductionInvalid { k, ktilde } => {
                write!(
                    f,
                    "multiset reduction needs patterns on at least {} of {ktilde} base vertices, got {k}",
                    ktilde - 1
                )
            }
            BlowupError::ExplicitPolicyInOptimizer => {
                write!(f, "the explicit leaf policy is not usable in the optimizer")
            }
            BlowupError::Graph(e) => write!(f, "{e}"),
            BlowupError::Embed(e) => write!(f, "{e}"),
            BlowupError::Cayley(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BlowupError {}

impl From<GraphError> for BlowupError {
    fn from(e: GraphError) -> Self {
        BlowupError::Graph(e)
    }
}

impl From<EmbedError> for BlowupError {
    fn from(e: EmbedError) -> Self {
        BlowupError::Embed(e)
    }
}

impl From<CayleyError> for BlowupError {
    fn from(e: CayleyError) -> Self {
        BlowupError::Cayley(e)
    }
}

/// Recursive description of an iterated blow-up. Graphs serialize as graph6
/// strings, so the JSON schema is `{"kind":"leaf","graph":"Dhc"}` or
/// `{"kind":"node","base":...,"parts":[...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowupTree {
    Leaf { graph: Graph },
    Node { base: Graph, parts: Vec<BlowupTree> },
}

impl BlowupTree {
    pub fn leaf(graph: Graph) -> BlowupTree {
        BlowupTree::Leaf { graph }
    }

    pub fn size(&self) -> usize {
        match self {
            BlowupTree::Leaf { graph } => graph.n(),
            BlowupTree::Node { parts, .. } => parts.iter().map(BlowupTree::size).sum(),
        }
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        match self {
            BlowupTree::Leaf { graph } => vec![graph.n()],
            BlowupTree::Node { parts, .. } => parts.iter().map(BlowupTree::size).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), BlowupError> {
        match self {
            BlowupTree::Leaf { .. } => Ok(()),
            BlowupTree::Node { base, parts } => {
                if parts.len() != base.n() {
                    return Err(BlowupError::PartCountMismatch {
                        parts: parts.len(),
                        base: base.n(),
                    });
                }
                for (i, part) in parts.iter().enumerate() {
                    if part.size() == 0 {
                        return Err(BlowupError::EmptyPart { part: i });
                    }
                    part.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Part sizes differ by at most one at every node.
    pub fn is_balanced(&self) -> bool {
        match self {
            BlowupTree::Leaf { .. } => true,
            BlowupTree::Node { parts, .. } => {
                let sizes: Vec<usize> = parts.iter().map(BlowupTree::size).collect();
                let lo = sizes.iter().min().copied().unwrap_or(0);
                let hi = sizes.iter().max().copied().unwrap_or(0);
                hi - lo <= 1 && parts.iter().all(BlowupTree::is_balanced)
            }
        }
    }

    /// Materializes the tree. Vertices are numbered part by part in part
    /// index order, recursively.
    pub fn build(&self) -> Result<BuiltBlowup, BlowupError> {
        self.validate()?;
        let total = self.size();
        if total > MATERIALIZE_CAP {
            return Err(BlowupError::MaterializeCapacity {
                total,
                cap: MATERIALIZE_CAP,
            });
        }
        let mut g = Graph::empty(total);
        assemble(self, 0, &mut g);
        let (part_of, part_ranges) = match self {
            BlowupTree::Leaf { graph } => (vec![0; graph.n()], vec![0..graph.n()]),
            BlowupTree::Node { parts, .. } => {
                let mut part_of = Vec::with_capacity(total);
                let mut ranges = Vec::with_capacity(parts.len());
                let mut at = 0;
                for (i, part) in parts.iter().enumerate() {
                    let s = part.size();
                    part_of.extend(std::iter::repeat(i).take(s));
                    ranges.push(at..at + s);
                    at += s;
                }
                (part_of, ranges)
            }
        };
        Ok(BuiltBlowup {
            graph: g,
            part_of,
            part_ranges,
        })
    }
}

fn assemble(tree: &BlowupTree, offset: usize, g: &mut Graph) {
    match tree {
        BlowupTree::Leaf { graph } => {
            for v in 0..graph.n() {
                for w in v + 1..graph.n() {
                    if graph.has_edge(v, w) {
                        g.set_edge(offset + v, offset + w);
                    }
                }
            }
        }
        BlowupTree::Node { base, parts } => {
            let mut starts = Vec::with_capacity(parts.len());
            let mut at = offset;
            for part in parts {
                starts.push(at);
                assemble(part, at, g);
                at += part.size();
            }
            for i in 0..parts.len() {
                for j in i + 1..parts.len() {
                    if base.has_edge(i, j) {
                        for v in starts[i]..starts[i] + parts[i].size() {
                            for w in starts[j]..starts[j] + parts[j].size() {
                                g.set_edge(v, w);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// A materialized blow-up with its top-level part structure.
#[derive(Debug, Clone)]
pub struct BuiltBlowup {
    graph: Graph,
    part_of: Vec<usize>,
    part_ranges: Vec<Range<usize>>,
}

impl BuiltBlowup {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn part_of(&self) -> &[usize] {
        &self.part_of
    }

    pub fn part_ranges(&self) -> &[Range<usize>] {
        &self.part_ranges
    }
}

/// What occupies the innermost parts once the recursion bottoms out.
#[derive(Debug, Clone)]
pub enum LeafPolicy {
    EmptyGraph,
    /// Leaves get an exhaustive embedding maximizer for this pattern,
    /// falling back to the empty graph (with a warning) past the cap.
    EmbMaximizer(Graph),
    /// Leaves consume this list left to right; sizes must match.
    Explicit(Vec<Graph>),
}

/// `ceil(n/parts)` repeated `n mod parts` times, then `floor(n/parts)`.
/// Descending, deterministic; zeros appear exactly when n < parts.
pub fn balanced_parts(n: usize, parts: usize) -> Vec<usize> {
    assert!(parts >= 1, "at least one part");
    let q = n / parts;
    let r = n % parts;
    (0..parts).map(|i| if i < r { q + 1 } else { q }).collect()
}

struct LeafSource<'a> {
    policy: &'a LeafPolicy,
    cursor: usize,
    cache: HashMap<usize, Graph>,
    warnings: Vec<String>,
}

impl<'a> LeafSource<'a> {
    fn new(policy: &'a LeafPolicy) -> Self {
        LeafSource {
            policy,
            cursor: 0,
            cache: HashMap::new(),
            warnings: Vec::new(),
        }
    }

    fn next_leaf(&mut self, size: usize) -> Result<Graph, BlowupError> {
        match self.policy {
            LeafPolicy::EmptyGraph => Ok(Graph::empty(size)),
            LeafPolicy::EmbMaximizer(pattern) => {
                if let Some(g) = self.cache.get(&size) {
                    return Ok(g.clone());
                }
                let g = if size <= MAXIMIZER_CAP {
                    let r = embed::emb_max(pattern, size, &MaxMode::Exhaustive, 1)?;
                    r.witnesses.into_iter().next().unwrap_or(Graph::empty(size))
                } else {
                    self.warnings.push(format!(
                        "leaf of size {size} exceeds the maximizer cap {MAXIMIZER_CAP}; using the empty graph"
                    ));
                    Graph::empty(size)
                };
                self.cache.insert(size, g.clone());
                Ok(g)
            }
            LeafPolicy::Explicit(list) => {
                let got = list.len();
                let g = list
                    .get(self.cursor)
                    .ok_or(BlowupError::LeafListExhausted {
                        needed: self.cursor + 1,
                        got,
                    })?;
                if g.n() != size {
                    return Err(BlowupError::LeafSizeMismatch {
                        part: self.cursor,
                        expected: size,
                        got: g.n(),
                    });
                }
                self.cursor += 1;
                Ok(g.clone())
            }
        }
    }
}

/// The balanced iterated blow-up of `base` on `n` vertices: split into
/// near-equal non-empty parts and recurse until fewer than `|V(base)|`
/// vertices remain, where the leaf policy takes over.
pub fn balanced_tree(
    base: &Graph,
    n: usize,
    policy: &LeafPolicy,
) -> Result<(BlowupTree, Vec<String>), BlowupError> {
    assert!(base.n() >= 2, "base needs at least two vertices");
    let mut source = LeafSource::new(policy);
    let tree = balanced_rec(base, n, &mut source)?;
    Ok((tree, source.warnings))
}

fn balanced_rec(
    base: &Graph,
    n: usize,
    source: &mut LeafSource<'_>,
) -> Result<BlowupTree, BlowupError> {
    if n < base.n() {
        return Ok(BlowupTree::Leaf {
            graph: source.next_leaf(n)?,
        });
    }
    let sizes = balanced_parts(n, base.n());
    let mut parts = Vec::with_capacity(sizes.len());
    for s in sizes {
        parts.push(balanced_rec(base, s, source)?);
    }
    Ok(BlowupTree::Node {
        base: base.clone(),
        parts,
    })
}

/// Embedding count of a k-vertex rigid pattern into the m-fold iterated
/// blow-up of its k̃-vertex base, all parts exactly k̃ wide at every level:
/// 2·k̃^m·(k̃^{(k−1)(m−1)} + … + k̃^{k−1} + 1).
pub fn closed_form_blowup_count(ktilde: u64, k: u64, m: u32) -> BigCount {
    assert!(2 <= k && k <= ktilde, "pattern size out of range");
    assert!(m >= 1, "at least one level");
    let kt = BigUint::from(ktilde);
    let step = kt.pow(k as u32 - 1);
    let mut geometric = BigUint::zero();
    let mut pow = BigUint::one();
    for _ in 0..m {
        geometric += &pow;
        pow *= &step;
    }
    BigUint::from(2u32) * kt.pow(m) * geometric
}

/// The ratio closed-form / k̃^{mk}: the embedding density of the m-level
/// construction, an increasing sequence.
pub fn closed_form_density(ktilde: u64, k: u64, m: u32) -> BigRational {
    let num = closed_form_blowup_count(ktilde, k, m).into();
    let den = BigUint::from(ktilde).pow(m * k as u32).into();
    BigRational::new(num, den)
}

/// The limit of `closed_form_density` in m: 2/(k̃^{k−1} − 1).
pub fn limiting_density(ktilde: u64, k: u64) -> BigRational {
    assert!(2 <= k && k <= ktilde);
    let den = BigUint::from(ktilde).pow(k as u32 - 1) - BigUint::one();
    BigRational::new(2.into(), BigInt::from(den))
}

/// The distinct restrictions of the base's rotations and reflections to the
/// pattern vertices, each a tuple indexed like the induced pattern. In
/// groups of exponent two distinct maps can coincide pointwise; the list is
/// deduplicated, sorted.
pub fn distinct_restrictions(
    base: &CayleyGraph,
    pattern_vertices: &VertexSet,
) -> Result<Vec<Vec<usize>>, BlowupError> {
    let maps = rotations_reflections(base.group())?;
    let verts: Vec<usize> = pattern_vertices.iter().collect();
    let mut out: Vec<Vec<usize>> = maps
        .iter()
        .map(|m| verts.iter().map(|&v| m.apply(v)).collect())
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Whether every embedding of the induced pattern into the base is the
/// restriction of a rotation or reflection, plus the facts the split count
/// leans on.
#[derive(Debug, Clone)]
pub struct RigidityCertificate {
    pub holds: bool,
    pub prime: bool,
    pub embedding_count: usize,
    pub restriction_count: usize,
    /// All 2k̃ canonical maps restrict injectively to distinct tuples.
    pub all_forms_distinct: bool,
}

/// Checks the split-count precondition by direct search: the pattern must
/// be prime, span at least two vertices, and its embeddings into the base
/// must be exactly the canonical-map restrictions.
pub fn check_rigidity(
    base: &CayleyGraph,
    pattern_vertices: &VertexSet,
) -> Result<RigidityCertificate, BlowupError> {
    let (pattern, _back) = base.graph().induced_subgraph(pattern_vertices)?;
    let prime = pattern.is_prime();
    let restrictions = distinct_restrictions(base, pattern_vertices)?;
    let mut embeddings: Vec<Vec<usize>> = Vec::new();
    embed::for_each_embedding(&pattern, base.graph(), None, &mut |images| {
        embeddings.push(images.to_vec());
    })?;
    embeddings.sort();
    let holds = prime && pattern.n() >= 2 && embeddings == restrictions;
    Ok(RigidityCertificate {
        holds,
        prime,
        embedding_count: embeddings.len(),
        restriction_count: restrictions.len(),
        all_forms_distinct: restrictions.len() == 2 * base.order(),
    })
}

/// The two-level split of an embedding count into a blow-up.
#[derive(Debug, Clone)]
pub struct BlowupSplit {
    /// Embeddings meeting at least two parts: one term per distinct
    /// canonical restriction, the product of the part sizes it uses.
    pub across: BigCount,
    /// Embeddings inside each part, counted recursively.
    pub within: Vec<BigCount>,
}

#[derive(Debug, Clone)]
pub struct BlowupCount {
    pub total: BigCount,
    /// Present exactly when the rigidity certificate validated the split.
    pub split: Option<BlowupSplit>,
}

/// Counts embeddings of the pattern induced on `pattern_vertices` into the
/// blow-up described by `tree`. With a valid rigidity certificate the count
/// is the part-split sum and never materializes the graph; otherwise it
/// falls back to direct enumeration, subject to the materialize cap.
pub fn count_into_blowup(
    base: &CayleyGraph,
    pattern_vertices: &VertexSet,
    tree: &BlowupTree,
) -> Result<BlowupCount, BlowupError> {
    tree.validate()?;
    let (pattern, _back) = base.graph().induced_subgraph(pattern_vertices)?;
    let cert = check_rigidity(base, pattern_vertices)?;
    if cert.holds {
        let restrictions = distinct_restrictions(base, pattern_vertices)?;
        split_count(base, &pattern, &restrictions, tree)
    } else {
        let built = tree.build()?;
        let total = embed::count_embeddings(&pattern, built.graph(), None)?;
        Ok(BlowupCount { total, split: None })
    }
}

fn split_count(
    base: &CayleyGraph,
    pattern: &Graph,
    restrictions: &[Vec<usize>],
    tree: &BlowupTree,
) -> Result<BlowupCount, BlowupError> {
    let node_parts = match tree {
        BlowupTree::Leaf { graph } => {
            // a bare leaf has no part structure; count directly
            let total = embed::count_embeddings(pattern, graph, None)?;
            return Ok(BlowupCount { total, split: None });
        }
        BlowupTree::Node { base: b, parts } => {
            if b != base.graph() {
                return Err(BlowupError::BaseMismatch);
            }
            parts
        }
    };
    let sizes: Vec<BigUint> = node_parts
        .iter()
        .map(|p| BigUint::from(p.size()))
        .collect();
    let mut across = BigUint::zero();
    for r in restrictions {
        let mut product = BigUint::one();
        for &part in r {
            product *= &sizes[part];
        }
        across += product;
    }
    let mut within = Vec::with_capacity(node_parts.len());
    let mut total = across.clone();
    for part in node_parts {
        let inner = match part {
            BlowupTree::Leaf { graph } => embed::count_embeddings(pattern, graph, None)?,
            BlowupTree::Node { .. } => split_count(base, pattern, restrictions, part)?.total,
        };
        total += &inner;
        within.push(inner);
    }
    Ok(BlowupCount {
        total,
        split: Some(BlowupSplit { across, within }),
    })
}

/// How one embedding into a blow-up relates to the part structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingClass {
    /// Every image lies in this part.
    InPart(usize),
    /// Image parts realize this distinct canonical restriction (by index
    /// into the `distinct_restrictions` list).
    FollowsMap(usize),
    Violation(Violation),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// Two pattern vertices share a part while a third sits elsewhere.
    SharedPart { x: usize, y: usize, part: usize },
    /// Parts are pairwise distinct but match no canonical restriction.
    UnmatchedPattern,
}

/// Classifies one embedding by its part pattern.
pub fn classify_embedding(
    images: &[usize],
    part_of: &[usize],
    restrictions: &[Vec<usize>],
) -> EmbeddingClass {
    let parts: Vec<usize> = images.iter().map(|&v| part_of[v]).collect();
    if parts.iter().all(|&p| p == parts[0]) {
        return EmbeddingClass::InPart(parts[0]);
    }
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (x, &p) in parts.iter().enumerate() {
        if let Some(&y) = seen.get(&p) {
            return EmbeddingClass::Violation(Violation::SharedPart { x: y, y: x, part: p });
        }
        seen.insert(p, x);
    }
    match restrictions.binary_search(&parts) {
        Ok(idx) => EmbeddingClass::FollowsMap(idx),
        Err(_) => EmbeddingClass::Violation(Violation::UnmatchedPattern),
    }
}

/// One offending embedding, kept verbatim as evidence.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationRecord {
    pub images: Vec<usize>,
    pub violation: Violation,
}

/// Tallies of `classify_embedding` over every embedding into the
/// materialized blow-up.
#[derive(Debug, Clone)]
pub struct Classification {
    /// The distinct canonical restrictions, sorted; `follows` aligns.
    pub restrictions: Vec<Vec<usize>>,
    pub in_part: Vec<u64>,
    pub follows: Vec<u64>,
    pub violations: Vec<ViolationRecord>,
    pub violation_total: u64,
    pub total: u64,
}

const VIOLATION_KEEP: usize = 32;

/// Enumerates every embedding of the induced pattern into the materialized
/// tree and classifies each against the top-level parts.
pub fn classify_embeddings(
    base: &CayleyGraph,
    pattern_vertices: &VertexSet,
    tree: &BlowupTree,
) -> Result<Classification, BlowupError> {
    let (pattern, _back) = base.graph().induced_subgraph(pattern_vertices)?;
    let restrictions = distinct_restrictions(base, pattern_vertices)?;
    let built = tree.build()?;
    if let BlowupTree::Node { base: b, .. } = tree {
        if b != base.graph() {
            return Err(BlowupError::BaseMismatch);
        }
    }
    let mut out = Classification {
        restrictions: restrictions.clone(),
        in_part: vec![0; built.part_ranges().len()],
        follows: vec![0; restrictions.len()],
        violations: Vec::new(),
        violation_total: 0,
        total: 0,
    };
    embed::for_each_embedding(&pattern, built.graph(), None, &mut |images| {
        out.total += 1;
        match classify_embedding(images, built.part_of(), &restrictions) {
            EmbeddingClass::InPart(i) => out.in_part[i] += 1,
            EmbeddingClass::FollowsMap(i) => out.follows[i] += 1,
            EmbeddingClass::Violation(v) => {
                out.violation_total += 1;
                if out.violations.len() < VIOLATION_KEEP {
                    out.violations.push(ViolationRecord {
                        images: images.to_vec(),
                        violation: v,
                    });
                }
            }
        }
    })?;
    Ok(out)
}

/// The part-size objective: canonical-restriction products plus the best
/// per-part embedding count under the leaf policy. Zero sizes are allowed;
/// they annihilate every product that uses them.
pub fn objective_t(
    base: &CayleyGraph,
    pattern_vertices: &VertexSet,
    sizes: &[usize],
    policy: &LeafPolicy,
) -> Result<BigCount, BlowupError> {
    if sizes.len() != base.order() {
        return Err(BlowupError::PartCountMismatch {
            parts: sizes.len(),
            base: base.order(),
        });
    }
    let (pattern, _back) = base.graph().induced_subgraph(pattern_vertices)?;
    let restrictions = distinct_restrictions(base, pattern_vertices)?;
    let mut t = crossing_sum(&restrictions, sizes);
    for (j, &s) in sizes.iter().enumerate() {
        t += leaf_count(&pattern, j, s, policy)?;
    }
    Ok(t)
}

/// One term per distinct canonical restriction: the product of the part
/// sizes it uses.
fn crossing_sum(restrictions: &[Vec<usize>], sizes: &[usize]) -> BigUint {
    let big_sizes: Vec<BigUint> = sizes.iter().map(|&s| BigUint::from(s)).collect();
    let mut t = BigUint::zero();
    for r in restrictions {
        let mut product = BigUint::one();
        for &part in r {
            if sizes[part] == 0 {
                product = BigUint::zero();
                break;
            }
            product *= &big_sizes[part];
        }
        t += product;
    }
    t
}

/// Embedding count into the graph the policy places on part `j`.
fn leaf_count(
    pattern: &Graph,
    j: usize,
    size: usize,
    policy: &LeafPolicy,
) -> Result<BigUint, BlowupError> {
    if size < pattern.n() {
        if let LeafPolicy::Explicit(list) = policy {
            check_explicit(list, j, size)?;
        }
        return Ok(BigUint::zero());
    }
    match policy {
        LeafPolicy::EmptyGraph => Ok(embed::count_embeddings(pattern, &Graph::empty(size), None)?),
        LeafPolicy::EmbMaximizer(_) => {
            Ok(embed::emb_max(pattern, size, &MaxMode::Exhaustive, 1)?.value)
        }
        LeafPolicy::Explicit(list) => {
            let g = check_explicit(list, j, size)?;
            Ok(embed::count_embeddings(pattern, g, None)?)
        }
    }
}

fn check_explicit(list: &[Graph], j: usize, size: usize) -> Result<&Graph, BlowupError> {
    let g = list.get(j).ok_or(BlowupError::LeafListExhausted {
        needed: j + 1,
        got: list.len(),
    })?;
    if g.n() != size {
        return Err(BlowupError::LeafSizeMismatch {
            part: j,
            expected: size,
            got: g.n(),
        });
    }
    Ok(g)
}

/// Exhaustive part-size optimization outcome.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub n: usize,
    pub ktilde: usize,
    /// Every maximizing size vector, sorted; with reduction, one descending
    /// representative per multiset class.
    pub maximizers: Vec<Vec<usize>>,
    pub best: BigCount,
    /// max − min ≤ 1 within every maximizer.
    pub all_balanced: bool,
    pub reduced: bool,
}

/// Maximizes the objective over all compositions of n into k̃ non-negative
/// parts. `reduce` collapses compositions to sorted multisets, which is
/// only sound when the base is vertex-transitive (every Cayley graph is)
/// and the pattern misses at most one base vertex. The explicit leaf policy
/// fixes one graph per part and cannot follow varying sizes, so it is
/// rejected here.
pub fn optimize_partition(
    base: &CayleyGraph,
    pattern_vertices: &VertexSet,
    n: usize,
    policy: &LeafPolicy,
    reduce: bool,
    workers: usize,
) -> Result<OptimizeOutcome, BlowupError> {
    let ktilde = base.order();
    let k = pattern_vertices.len();
    if matches!(policy, LeafPolicy::Explicit(_)) {
        return Err(BlowupError::ExplicitPolicyInOptimizer);
    }
    if reduce {
        if k + 1 < ktilde {
            return Err(BlowupError::ReductionInvalid { k, ktilde });
        }
        if n > REDUCED_N_CAP {
            return Err(BlowupError::CompositionBudget { n, ktilde });
        }
    } else if n > OPTIMIZE_N_CAP || ktilde > OPTIMIZE_KTILDE_CAP {
        return Err(BlowupError::CompositionBudget { n, ktilde });
    }
    let (pattern, _back) = base.graph().induced_subgraph(pattern_vertices)?;
    let restrictions = distinct_restrictions(base, pattern_vertices)?;
    // every size in 0..=n occurs in some composition
    let mut by_size: Vec<BigUint> = Vec::with_capacity(n + 1);
    for s in 0..=n {
        by_size.push(leaf_count(&pattern, 0, s, policy)?);
    }
    let candidates = if reduce {
        descending_compositions(n, ktilde)
    } else {
        compositions(n, ktilde)
    };
    let workers = workers.max(1).min(candidates.len().max(1));
    let chunk = candidates.len().div_ceil(workers.max(1)).max(1);
    let results: Vec<(BigUint, Vec<Vec<usize>>)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for slice in candidates.chunks(chunk) {
            let restrictions = &restrictions;
            let by_size = &by_size;
            handles.push(scope.spawn(move || {
                let mut best = BigUint::zero();
                let mut arg: Vec<Vec<usize>> = Vec::new();
                for sizes in slice {
                    let mut t = crossing_sum(restrictions, sizes);
                    for &s in sizes {
                        t += &by_size[s];
                    }
                    if t > best {
                        best = t;
                        arg = vec![sizes.clone()];
                    } else if t == best {
                        arg.push(sizes.clone());
                    }
                }
                (best, arg)
            }));
        }
        handles.into_iter().map(|h| h.join().expect("worker")).collect()
    });
    let mut best = BigUint::zero();
    let mut maximizers: Vec<Vec<usize>> = Vec::new();
    for (local_best, local_args) in results {
        if local_best > best {
            best = local_best;
            maximizers = local_args;
        } else if local_best == best {
            maximizers.extend(local_args);
        }
    }
    maximizers.sort();
    maximizers.dedup();
    let all_balanced = maximizers.iter().all(|sizes| {
        let lo = sizes.iter().min().copied().unwrap_or(0);
        let hi = sizes.iter().max().copied().unwrap_or(0);
        hi - lo <= 1
    });
    Ok(OptimizeOutcome {
        n,
        ktilde,
        maximizers,
        best,
        all_balanced,
        reduced: reduce,
    })
}

/// All vectors of `parts` non-negative integers summing to n.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0; parts];
    fn rec(n: usize, at: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at + 1 == current.len() {
            current[at] = n;
            out.push(current.clone());
            return;
        }
        for v in 0..=n {
            current[at] = v;
            rec(n - v, at + 1, current, out);
        }
    }
    rec(n, 0, &mut current, &mut out);
    out
}

/// One descending representative per multiset of part sizes.
fn descending_compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0; parts];
    fn rec(n: usize, at: usize, cap: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at + 1 == current.len() {
            if n <= cap {
                current[at] = n;
                out.push(current.clone());
            }
            return;
        }
        let remaining_slots = current.len() - at;
        let lo = n.div_ceil(remaining_slots);
        for v in (lo..=n.min(cap)).rev() {
            current[at] = v;
            rec(n - v, at + 1, v, current, out);
        }
    }
    rec(n, 0, n, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::cycle_cayley;

    fn c5() -> CayleyGraph {
        cycle_cayley(5).unwrap()
    }

    fn full(n: usize) -> VertexSet {
        VertexSet::full(n)
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn balanced_part_vectors() {
        assert_eq!(balanced_parts(7, 5), vec![2, 2, 1, 1, 1]);
        assert_eq!(balanced_parts(10, 5), vec![2, 2, 2, 2, 2]);
        assert_eq!(balanced_parts(3, 5), vec![1, 1, 1, 0, 0]);
        assert_eq!(balanced_parts(26, 6), vec![5, 5, 4, 4, 4, 4]);
    }

    #[test]
    fn trivial_blowup_rebuilds_the_base() {
        let parts = vec![BlowupTree::leaf(Graph::empty(1)); 5];
        let tree = BlowupTree::Node {
            base: Graph::cycle(5),
            parts,
        };
        let built = tree.build().unwrap();
        assert_eq!(built.graph(), &Graph::cycle(5));
        assert_eq!(built.part_of(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn doubled_cycle_edge_count() {
        let parts = vec![BlowupTree::leaf(Graph::empty(2)); 5];
        let tree = BlowupTree::Node {
            base: Graph::cycle(5),
            parts,
        };
        let built = tree.build().unwrap();
        assert_eq!(built.graph().n(), 10);
        assert_eq!(built.graph().edge_count(), 20);
    }

    #[test]
    fn structural_validation() {
        let short = BlowupTree::Node {
            base: Graph::cycle(5),
            parts: vec![BlowupTree::leaf(Graph::empty(1)); 4],
        };
        assert_eq!(
            short.validate().unwrap_err(),
            BlowupError::PartCountMismatch { parts: 4, base: 5 }
        );
        let mut parts = vec![BlowupTree::leaf(Graph::empty(1)); 5];
        parts[2] = BlowupTree::leaf(Graph::empty(0));
        let hollow = BlowupTree::Node {
            base: Graph::cycle(5),
            parts,
        };
        assert_eq!(
            hollow.validate().unwrap_err(),
            BlowupError::EmptyPart { part: 2 }
        );
    }

    #[test]
    fn balanced_iterated_shape_on_twenty_six() {
        let (tree, warnings) =
            balanced_tree(&Graph::cycle(6), 26, &LeafPolicy::EmptyGraph).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(tree.size(), 26);
        assert_eq!(tree.part_sizes(), vec![5, 5, 4, 4, 4, 4]);
        assert!(tree.is_balanced());
        tree.validate().unwrap();
    }

    #[test]
    fn tree_json_roundtrip() {
        let (tree, _) = balanced_tree(&Graph::cycle(5), 10, &LeafPolicy::EmptyGraph).unwrap();
        let json = serde_json::to_string(&tree).unwrap();
        assert!(json.contains("\"kind\":\"node\""));
        assert!(json.contains("\"kind\":\"leaf\""));
        let back: BlowupTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn rigidity_certificates() {
        let base = c5();
        let whole = check_rigidity(&base, &full(5)).unwrap();
        assert!(whole.holds && whole.prime && whole.all_forms_distinct);
        assert_eq!(whole.embedding_count, 10);
        assert_eq!(whole.restriction_count, 10);

        let path = VertexSet::from_indices(5, &[0, 1, 2, 3]).unwrap();
        let sub = check_rigidity(&base, &path).unwrap();
        assert!(sub.holds);
        assert_eq!(sub.embedding_count, 10);

        let square = cycle_cayley(4).unwrap();
        let not = check_rigidity(&square, &full(4)).unwrap();
        // every C_4 automorphism is a canonical map, but C_4 is not prime
        assert!(!not.holds && !not.prime);
        assert_eq!(not.embedding_count, 8);
        assert_eq!(not.restriction_count, 8);
    }

    #[test]
    fn split_count_matches_direct_enumeration() {
        let base = c5();
        let (tree, _) = balanced_tree(base.graph(), 10, &LeafPolicy::EmptyGraph).unwrap();
        let split = count_into_blowup(&base, &full(5), &tree).unwrap();
        assert_eq!(split.total, big(320));
        let detail = split.split.unwrap();
        assert_eq!(detail.across, big(320));
        assert!(detail.within.iter().all(|w| w.is_zero()));
        let direct =
            embed::count_embeddings(&Graph::cycle(5), tree.build().unwrap().graph(), None)
                .unwrap();
        assert_eq!(direct, big(320));
    }

    #[test]
    fn trivial_parts_recover_plain_counting() {
        let base = c5();
        let tree = BlowupTree::Node {
            base: Graph::cycle(5),
            parts: vec![BlowupTree::leaf(Graph::empty(1)); 5],
        };
        let path = VertexSet::from_indices(5, &[0, 1, 2, 3]).unwrap();
        let count = count_into_blowup(&base, &path, &tree).unwrap();
        assert_eq!(count.total, big(10));
        assert!(count.split.is_some());
    }

    #[test]
    fn one_loaded_part_splits_in_part_from_crossing() {
        let base = c5();
        let mut parts = vec![BlowupTree::leaf(Graph::empty(1)); 5];
        parts[0] = BlowupTree::leaf(Graph::cycle(5));
        let tree = BlowupTree::Node {
            base: Graph::cycle(5),
            parts,
        };
        let count = count_into_blowup(&base, &full(5), &tree).unwrap();
        assert_eq!(count.total, big(60));
        let detail = count.split.unwrap();
        assert_eq!(detail.across, big(50));
        assert_eq!(detail.within[0], big(10));

        let tally = classify_embeddings(&base, &full(5), &tree).unwrap();
        assert_eq!(tally.total, 60);
        assert_eq!(tally.in_part[0], 10);
        assert_eq!(tally.follows.iter().sum::<u64>(), 50);
        assert_eq!(tally.violation_total, 0);
    }

    #[test]
    fn non_prime_pattern_violates_and_falls_back() {
        let base = cycle_cayley(4).unwrap();
        let mut parts = vec![BlowupTree::leaf(Graph::empty(1)); 4];
        parts[0] = BlowupTree::leaf(Graph::empty(2));
        let tree = BlowupTree::Node {
            base: Graph::cycle(4),
            parts,
        };
        let tally = classify_embeddings(&base, &full(4), &tree).unwrap();
        assert!(tally.violation_total > 0);
        assert!(matches!(
            tally.violations[0].violation,
            Violation::SharedPart { .. }
        ));
        let count = count_into_blowup(&base, &full(4), &tree).unwrap();
        assert!(count.split.is_none());
        let direct =
            embed::count_embeddings(&Graph::cycle(4), tree.build().unwrap().graph(), None)
                .unwrap();
        assert_eq!(count.total, direct);
    }

    #[test]
    fn objective_examples() {
        let base = c5();
        let policy = LeafPolicy::EmbMaximizer(Graph::cycle(5));
        let t = objective_t(&base, &full(5), &[2, 2, 2, 2, 2], &policy).unwrap();
        assert_eq!(t, big(320));

        let t = objective_t(&base, &full(5), &[6, 1, 1, 1, 1], &LeafPolicy::EmptyGraph).unwrap();
        assert_eq!(t, big(60));
        let best6 = embed::emb_max(&Graph::cycle(5), 6, &MaxMode::Exhaustive, 2)
            .unwrap()
            .value;
        let t = objective_t(&base, &full(5), &[6, 1, 1, 1, 1], &policy).unwrap();
        assert_eq!(t, big(60) + best6);

        // a zero size annihilates every crossing product
        let t = objective_t(&base, &full(5), &[6, 2, 1, 1, 0], &LeafPolicy::EmptyGraph).unwrap();
        assert_eq!(t, big(0));
    }

    #[test]
    fn optimizer_finds_the_balanced_split() {
        let base = c5();
        let out =
            optimize_partition(&base, &full(5), 10, &LeafPolicy::EmptyGraph, false, 4).unwrap();
        assert_eq!(out.best, big(320));
        assert_eq!(out.maximizers, vec![vec![2, 2, 2, 2, 2]]);
        assert!(out.all_balanced);

        let reduced =
            optimize_partition(&base, &full(5), 10, &LeafPolicy::EmptyGraph, true, 1).unwrap();
        assert_eq!(reduced.best, big(320));
        assert_eq!(reduced.maximizers, vec![vec![2, 2, 2, 2, 2]]);

        let five = optimize_partition(&base, &full(5), 5, &LeafPolicy::EmptyGraph, false, 2).unwrap();
        assert_eq!(five.best, big(10));
        assert_eq!(five.maximizers, vec![vec![1, 1, 1, 1, 1]]);
        assert!(five.all_balanced);
    }

    #[test]
    fn reduction_requires_a_nearly_spanning_pattern() {
        let base = c5();
        let p3 = VertexSet::from_indices(5, &[0, 1, 2]).unwrap();
        assert_eq!(
            optimize_partition(&base, &p3, 8, &LeafPolicy::EmptyGraph, true, 1).unwrap_err(),
            BlowupError::ReductionInvalid { k: 3, ktilde: 5 }
        );
        assert_eq!(
            optimize_partition(&base, &full(5), 25, &LeafPolicy::EmptyGraph, false, 1)
                .unwrap_err(),
            BlowupError::CompositionBudget { n: 25, ktilde: 5 }
        );
    }

    #[test]
    fn closed_form_small_cases() {
        assert_eq!(closed_form_blowup_count(5, 5, 1), big(10));
        assert_eq!(closed_form_blowup_count(5, 5, 2), big(31300));
        assert_eq!(closed_form_blowup_count(5, 4, 2), big(6300));
        assert_eq!(closed_form_blowup_count(5, 4, 3), big(3_937_750));
    }

    #[test]
    fn closed_form_matches_direct_count_at_two_levels() {
        let base = c5();
        let (tree, _) = balanced_tree(base.graph(), 25, &LeafPolicy::EmptyGraph).unwrap();
        let built = tree.build().unwrap();
        let direct_c5 =
            embed::count_embeddings(&Graph::cycle(5), built.graph(), None).unwrap();
        assert_eq!(direct_c5, closed_form_blowup_count(5, 5, 2));
        let direct_p4 = embed::count_embeddings(&Graph::path(4), built.graph(), None).unwrap();
        assert_eq!(direct_p4, closed_form_blowup_count(5, 4, 2));
        // the split route agrees
        let whole = count_into_blowup(&base, &full(5), &tree).unwrap();
        assert_eq!(whole.total, direct_c5);
        let path = VertexSet::from_indices(5, &[0, 1, 2, 3]).unwrap();
        let sub = count_into_blowup(&base, &path, &tree).unwrap();
        assert_eq!(sub.total, direct_p4);
    }

    #[test]
    fn densities_increase_toward_the_limit() {
        let limit = limiting_density(5, 5);
        assert_eq!(limit, BigRational::new(1.into(), 312.into()));
        let mut last = BigRational::zero();
        for m in 1..=6 {
            let d = closed_form_density(5, 5, m);
            assert!(d > last, "density not increasing at m={m}");
            assert!(d < limit);
            last = d;
        }
        let gap = &limit - &last;
        assert!(gap < BigRational::new(1.into(), 1_000_000.into()));
    }

    #[test]
    fn composition_enumerations() {
        assert_eq!(compositions(10, 5).len(), 1001);
        assert!(compositions(3, 2).contains(&vec![0, 3]));
        let desc = descending_compositions(10, 5);
        assert!(desc.iter().all(|v| v.windows(2).all(|w| w[0] >= w[1])));
        assert_eq!(desc.len(), 30);
        assert!(desc.contains(&vec![2, 2, 2, 2, 2]));
        assert!(desc.contains(&vec![10, 0, 0, 0, 0]));
    }
}
