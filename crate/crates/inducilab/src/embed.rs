//! Exact induced-embedding counting by backtracking over bitset candidate
//! sets, plus maximization over all hosts of a given size.
//!
//! An embedding of a pattern H into a host graph is an injective map that
//! preserves both edges and non-edges. Counts are exact; the exhaustive
//! maximizer partitions the labeled-host stream across worker threads and
//! its result does not depend on the worker count.

use crate::enumerate;
use crate::graph::Graph;
use crate::iso;
use num_bigint::BigUint;
use std::collections::HashMap;
use std::fmt;

/// Exact embedding count. Counts grow like n^k, well past machine words.
pub type BigCount = BigUint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedError {
    PinPatternOutOfRange { vertex: usize, k: usize },
    PinHostOutOfRange { vertex: usize, n: usize },
    PinDuplicatePattern { vertex: usize },
    PinDuplicateHost { vertex: usize },
    /// Exhaustive maximization walks all labeled hosts; capped by size.
    ExhaustiveCapacity { n: usize, cap: usize },
    EmptyPattern,
    EmptyHost,
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::PinPatternOutOfRange { vertex, k } => {
                write!(f, "pinned pattern vertex {vertex} out of range for k={k}")
            }
            EmbedError::PinHostOutOfRange { vertex, n } => {
                write!(f, "pinned host vertex {vertex} out of range for n={n}")
            }
            EmbedError::PinDuplicatePattern { vertex } => {
                write!(f, "pattern vertex {vertex} pinned twice")
            }
            EmbedError::PinDuplicateHost { vertex } => {
                write!(f, "host vertex {vertex} used by two pins")
            }
            EmbedError::ExhaustiveCapacity { n, cap } => {
                write!(f, "exhaustive host search supports up to {cap} vertices, got {n}")
            }
            EmbedError::EmptyPattern => write!(f, "pattern graph has no vertices"),
            EmbedError::EmptyHost => write!(f, "host graph has no vertices"),
        }
    }
}

impl std::error::Error for EmbedError {}

fn validate_pins(
    pattern: &Graph,
    host: &Graph,
    pins: &[(usize, usize)],
) -> Result<(), EmbedError> {
    let mut seen_p = vec![false; pattern.n()];
    let mut seen_h = vec![false; host.n()];
    for &(pv, hv) in pins {
        if pv >= pattern.n() {
            return Err(EmbedError::PinPatternOutOfRange {
                vertex: pv,
                k: pattern.n(),
            });
        }
        if hv >= host.n() {
            return Err(EmbedError::PinHostOutOfRange {
                vertex: hv,
                n: host.n(),
            });
        }
        if seen_p[pv] {
            return Err(EmbedError::PinDuplicatePattern { vertex: pv });
        }
        if seen_h[hv] {
            return Err(EmbedError::PinDuplicateHost { vertex: hv });
        }
        seen_p[pv] = true;
        seen_h[hv] = true;
    }
    Ok(())
}

/// Placement order: pinned vertices first, then greedily the vertex with the
/// most already-placed neighbors (ties: higher degree, then lower index).
fn placement_order(pattern: &Graph, pins: &[(usize, usize)]) -> Vec<usize> {
    let k = pattern.n();
    let mut order: Vec<usize> = pins.iter().map(|&(pv, _)| pv).collect();
    let mut placed = vec![false; k];
    for &v in &order {
        placed[v] = true;
    }
    while order.len() < k {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 0..k {
            if placed[v] {
                continue;
            }
            let back = order.iter().filter(|&&u| pattern.has_edge(u, v)).count();
            let key = (back, pattern.degree(v), k - v);
            if best.map_or(true, |(b, d, i)| key > (b, d, i)) {
                best = Some(key);
            }
        }
        let (_, _, inv) = best.expect("some vertex is unplaced");
        let v = k - inv;
        placed[v] = true;
        order.push(v);
    }
    order
}

struct Walker<'a> {
    pattern: &'a Graph,
    host: &'a Graph,
    order: Vec<usize>,
    fixed: Vec<Option<usize>>,
    images: Vec<usize>,
    used: Vec<u64>,
    scratch: Vec<Vec<u64>>,
    host_mask: Vec<u64>,
}

impl<'a> Walker<'a> {
    fn new(pattern: &'a Graph, host: &'a Graph, pins: &[(usize, usize)]) -> Walker<'a> {
        let words = host.words_per_row();
        let mut host_mask = vec![!0u64; words];
        if host.n() % 64 != 0 {
            if let Some(last) = host_mask.last_mut() {
                *last = (1u64 << (host.n() % 64)) - 1;
            }
        }
        let mut fixed = vec![None; pattern.n()];
        for &(pv, hv) in pins {
            fixed[pv] = Some(hv);
        }
        Walker {
            pattern,
            host,
            order: placement_order(pattern, pins),
            fixed,
            images: vec![usize::MAX; pattern.n()],
            used: vec![0; words],
            scratch: vec![vec![0; words]; pattern.n()],
            host_mask,
        }
    }

    fn walk(&mut self, depth: usize, visitor: &mut dyn FnMut(&[usize])) {
        if depth == self.order.len() {
            visitor(&self.images);
            return;
        }
        let v = self.order[depth];
        let mut cand = std::mem::take(&mut self.scratch[depth]);
        cand.copy_from_slice(&self.host_mask);
        for &u in &self.order[..depth] {
            let iu = self.images[u];
            let row = self.host.row(iu);
            if self.pattern.has_edge(u, v) {
                for (c, r) in cand.iter_mut().zip(row) {
                    *c &= r;
                }
            } else {
                for (c, r) in cand.iter_mut().zip(row) {
                    *c &= !r;
                }
            }
        }
        for (c, u) in cand.iter_mut().zip(&self.used) {
            *c &= !u;
        }
        if let Some(hv) = self.fixed[v] {
            for (w, word) in cand.iter_mut().enumerate() {
                if w == hv / 64 {
                    *word &= 1 << (hv % 64);
                } else {
                    *word = 0;
                }
            }
        }
        for w in 0..cand.len() {
            let mut rest = cand[w];
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let iv = w * 64 + b;
                self.images[v] = iv;
                self.used[w] |= 1 << b;
                self.walk(depth + 1, visitor);
                self.used[w] &= !(1u64 << b);
                self.images[v] = usize::MAX;
            }
        }
        self.scratch[depth] = cand;
    }
}

fn falling_factorial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("degenerate-host count fits u128");
    }
    acc
}

fn is_complete(g: &Graph) -> bool {
    g.n() < 2 || g.edge_count() == g.n() * (g.n() - 1) / 2
}

pub(crate) fn count_embeddings_u128(
    pattern: &Graph,
    host: &Graph,
    pins: Option<&[(usize, usize)]>,
) -> Result<u128, EmbedError> {
    let pins = pins.unwrap_or(&[]);
    validate_pins(pattern, host, pins)?;
    // uniform hosts admit closed forms and defeat backtracking pruning
    if host.edge_count() == 0 {
        return Ok(if pattern.edge_count() == 0 {
            falling_factorial_u128(host.n() - pins.len(), pattern.n() - pins.len())
        } else {
            0
        });
    }
    if is_complete(host) {
        return Ok(if is_complete(pattern) && pattern.n() <= host.n() {
            falling_factorial_u128(host.n() - pins.len(), pattern.n() - pins.len())
        } else {
            0
        });
    }
    let mut count: u128 = 0;
    let mut walker = Walker::new(pattern, host, pins);
    walker.walk(0, &mut |_| count += 1);
    Ok(count)
}

/// Number of embeddings of `pattern` into `host`, optionally forcing the
/// partial map given by `pins` (pattern vertex, host vertex). Pins that are
/// structurally malformed error; pins no embedding extends just count zero.
pub fn count_embeddings(
    pattern: &Graph,
    host: &Graph,
    pins: Option<&[(usize, usize)]>,
) -> Result<BigCount, EmbedError> {
    count_embeddings_u128(pattern, host, pins).map(BigCount::from)
}

/// Calls `visitor` once per embedding with the image array, indexed by
/// pattern vertex. Enumerates even over uniform hosts.
pub fn for_each_embedding(
    pattern: &Graph,
    host: &Graph,
    pins: Option<&[(usize, usize)]>,
    visitor: &mut dyn FnMut(&[usize]),
) -> Result<(), EmbedError> {
    let pins = pins.unwrap_or(&[]);
    validate_pins(pattern, host, pins)?;
    let mut walker = Walker::new(pattern, host, pins);
    walker.walk(0, visitor);
    Ok(())
}

pub fn count_automorphisms(g: &Graph) -> BigCount {
    count_embeddings(g, g, None).expect("no pins, no errors")
}

/// `emb / aut`: the number of induced copies. Exactness of the division is
/// an engine invariant and is checked.
pub fn count_induced_copies(pattern: &Graph, host: &Graph) -> Result<BigCount, EmbedError> {
    use num_integer::Integer;
    let emb = count_embeddings(pattern, host, None)?;
    let aut = count_automorphisms(pattern);
    let (q, r) = emb.div_rem(&aut);
    assert!(
        r == BigCount::from(0u32),
        "embedding count {emb} not divisible by automorphism count {aut}"
    );
    Ok(q)
}

/// For each host vertex `w`, the number of embeddings whose image contains
/// `w`. Their sum is `k` times the total count.
pub fn per_vertex_embedding_counts(
    pattern: &Graph,
    host: &Graph,
) -> Result<Vec<BigCount>, EmbedError> {
    let mut counts = vec![0u128; host.n()];
    for_each_embedding(pattern, host, None, &mut |images| {
        for &iv in images {
            counts[iv] += 1;
        }
    })?;
    Ok(counts.into_iter().map(BigCount::from).collect())
}

/// How `emb_max` searches the host space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaxMode {
    /// All labeled hosts; exact, capped at `enumerate::LABELED_CAP`.
    Exhaustive,
    /// Delete-and-clone hill climbing; a lower bound, never claimed exact.
    LocalSearch { max_steps: u32 },
}

#[derive(Debug, Clone)]
pub struct MaxResult {
    pub value: BigCount,
    /// Canonical representatives of the maximizers, sorted by graph6 order.
    /// For local search: the single final graph.
    pub witnesses: Vec<Graph>,
    pub exact: bool,
}

/// Maximum of `emb(pattern, _)` over hosts on `n` vertices.
pub fn emb_max(
    pattern: &Graph,
    n: usize,
    mode: &MaxMode,
    workers: usize,
) -> Result<MaxResult, EmbedError> {
    match mode {
        MaxMode::Exhaustive => emb_max_exhaustive(pattern, n, workers.max(1)),
        MaxMode::LocalSearch { max_steps } => emb_max_local(pattern, n, *max_steps),
    }
}

fn emb_max_exhaustive(pattern: &Graph, n: usize, workers: usize) -> Result<MaxResult, EmbedError> {
    if n > enumerate::LABELED_CAP {
        return Err(EmbedError::ExhaustiveCapacity {
            n,
            cap: enumerate::LABELED_CAP,
        });
    }
    let total = enumerate::labeled_count(n);
    let workers = workers.min(total.max(1) as usize).max(1);
    let chunk = total.div_ceil(workers as u64);
    let results: Vec<(u128, HashMap<u64, Graph>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = chunk * w as u64;
                let hi = (lo + chunk).min(total);
                scope.spawn(move || {
                    let mut best: u128 = 0;
                    let mut argmax: HashMap<u64, Graph> = HashMap::new();
                    for code in lo..hi {
                        let host = enumerate::graph_from_code(n, code);
                        let c = count_embeddings_u128(pattern, &host, None)
                            .expect("no pins, no errors");
                        if c > best {
                            best = c;
                            argmax.clear();
                        }
                        if c == best {
                            let canon = iso::canonical_graph(&host).expect("n within cap");
                            argmax.entry(iso::pack_pairs(&canon)).or_insert(canon);
                        }
                    }
                    (best, argmax)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let best = results.iter().map(|(b, _)| *b).max().unwrap_or(0);
    let mut merged: HashMap<u64, Graph> = HashMap::new();
    for (b, graphs) in results {
        if b == best {
            merged.extend(graphs);
        }
    }
    let mut keyed: Vec<(u64, Graph)> = merged.into_iter().collect();
    keyed.sort_by_key(|(code, _)| *code);
    Ok(MaxResult {
        value: BigCount::from(best),
        witnesses: keyed.into_iter().map(|(_, g)| g).collect(),
        exact: true,
    })
}

/// Disjoint copies of the pattern, padded with isolated vertices: a start
/// point with a positive count whenever `n >= k`.
fn seed_host(pattern: &Graph, n: usize) -> Graph {
    let k = pattern.n();
    let mut g = Graph::empty(n);
    if k == 0 {
        return g;
    }
    for copy in 0..n / k {
        for x in 0..k {
            for y in 0..x {
                if pattern.has_edge(x, y) {
                    g.set_edge(copy * k + x, copy * k + y);
                }
            }
        }
    }
    g
}

fn emb_max_local(pattern: &Graph, n: usize, max_steps: u32) -> Result<MaxResult, EmbedError> {
    if pattern.n() == 0 {
        return Err(EmbedError::EmptyPattern);
    }
    if n == 0 {
        return Err(EmbedError::EmptyHost);
    }
    let mut current = seed_host(pattern, n);
    for _ in 0..max_steps {
        let step = local_search_step(pattern, &current)?;
        let done = !step.accepted || step.count_after == step.count_before;
        current = step.graph;
        if done {
            break;
        }
    }
    let value = count_embeddings(pattern, &current, None)?;
    Ok(MaxResult {
        value,
        witnesses: vec![current],
        exact: false,
    })
}

#[derive(Debug, Clone)]
pub struct LocalStep {
    /// The accepted graph; the input graph when the move was rejected.
    pub graph: Graph,
    pub count_before: BigCount,
    pub count_after: BigCount,
    pub accepted: bool,
}

/// One hill-climbing move: delete the vertex covered by the fewest
/// embeddings, clone the one covered by the most (as a non-adjacent twin),
/// and accept when the count does not decrease.
pub fn local_search_step(pattern: &Graph, gamma: &Graph) -> Result<LocalStep, EmbedError> {
    if pattern.n() == 0 {
        return Err(EmbedError::EmptyPattern);
    }
    if gamma.n() == 0 {
        return Err(EmbedError::EmptyHost);
    }
    let count_before = count_embeddings(pattern, gamma, None)?;
    let n = gamma.n();
    if n == 1 {
        return Ok(LocalStep {
            graph: gamma.clone(),
            count_after: count_before.clone(),
            count_before,
            accepted: false,
        });
    }
    let per_vertex = per_vertex_embedding_counts(pattern, gamma)?;
    let w_min = (0..n)
        .min_by_key(|&w| (per_vertex[w].clone(), w))
        .expect("n >= 1");
    let w_max = (0..n)
        .filter(|&w| w != w_min)
        .max_by_key(|&w| (per_vertex[w].clone(), std::cmp::Reverse(w)))
        .expect("n >= 2");
    // survivors keep their relative order; the twin takes the last slot
    let survivors: Vec<usize> = (0..n).filter(|&v| v != w_min).collect();
    let mut new_index = vec![usize::MAX; n];
    for (i, &v) in survivors.iter().enumerate() {
        new_index[v] = i;
    }
    let mut candidate = Graph::empty(n);
    for (i, &v) in survivors.iter().enumerate() {
        for &u in survivors.iter().take(i) {
            if gamma.has_edge(v, u) {
                candidate.set_edge(new_index[v], new_index[u]);
            }
        }
    }
    let twin = n - 1;
    for u in gamma.neighbors(w_max).iter() {
        if u != w_min {
            candidate.set_edge(twin, new_index[u]);
        }
    }
    let count_after = count_embeddings(pattern, &candidate, None)?;
    let accepted = count_after >= count_before;
    Ok(LocalStep {
        graph: if accepted { candidate } else { gamma.clone() },
        count_before,
        count_after,
        accepted,
    })
}

/// `emb_max` values for each host size in `m_lo..=m_hi`, exhaustively.
pub fn emb_sequence(
    pattern: &Graph,
    m_lo: usize,
    m_hi: usize,
    workers: usize,
) -> Result<Vec<(usize, BigCount)>, EmbedError> {
    let mut out = Vec::new();
    for m in m_lo..=m_hi {
        let r = emb_max(pattern, m, &MaxMode::Exhaustive, workers)?;
        out.push((m, r.value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigCount {
        BigCount::from(x)
    }

    #[test]
    fn single_vertex_counts() {
        assert_eq!(count_embeddings(&Graph::empty(1), &Graph::cycle(5), None).unwrap(), big(5));
        assert_eq!(count_embeddings(&Graph::empty(1), &Graph::empty(1), None).unwrap(), big(1));
        assert_eq!(count_embeddings(&Graph::empty(0), &Graph::cycle(5), None).unwrap(), big(1));
    }

    #[test]
    fn edge_into_complete_graph() {
        assert_eq!(count_embeddings(&Graph::complete(2), &Graph::complete(4), None).unwrap(), big(12));
        assert_eq!(count_automorphisms(&Graph::complete(2)), big(2));
        assert_eq!(count_induced_copies(&Graph::complete(2), &Graph::complete(4)).unwrap(), big(6));
    }

    #[test]
    fn induced_means_induced() {
        // P_3 has a non-edge, K_3 does not
        assert_eq!(count_embeddings(&Graph::path(3), &Graph::complete(3), None).unwrap(), big(0));
    }

    #[test]
    fn pentagon_in_pentagon() {
        let c5 = Graph::cycle(5);
        assert_eq!(count_embeddings(&c5, &c5, None).unwrap(), big(10));
        assert_eq!(count_automorphisms(&c5), big(10));
        assert_eq!(count_induced_copies(&c5, &c5).unwrap(), big(1));
    }

    #[test]
    fn path_in_pentagon() {
        let c5 = Graph::cycle(5);
        let p4 = Graph::path(4);
        assert_eq!(count_embeddings(&p4, &c5, None).unwrap(), big(10));
        assert_eq!(count_automorphisms(&p4), big(2));
        assert_eq!(count_induced_copies(&p4, &c5).unwrap(), big(5));
    }

    #[test]
    fn classic_automorphism_counts() {
        assert_eq!(count_automorphisms(&Graph::cycle(4)), big(8));
        assert_eq!(count_automorphisms(&Graph::complete(4)), big(24));
        assert_eq!(count_automorphisms(&Graph::empty(4)), big(24));
        assert_eq!(count_automorphisms(&Graph::cycle(6)), big(12));
        assert_eq!(count_automorphisms(&Graph::path(5)), big(2));
    }

    #[test]
    fn uniform_host_shortcuts() {
        assert_eq!(count_embeddings(&Graph::empty(3), &Graph::empty(10), None).unwrap(), big(720));
        assert_eq!(count_embeddings(&Graph::complete(3), &Graph::complete(10), None).unwrap(), big(720));
        assert_eq!(count_embeddings(&Graph::empty(2), &Graph::complete(9), None).unwrap(), big(0));
        assert_eq!(count_embeddings(&Graph::path(3), &Graph::empty(9), None).unwrap(), big(0));
        // large enough that only the closed form answers quickly
        assert_eq!(
            count_embeddings(&Graph::empty(17), &Graph::empty(17), None).unwrap(),
            (1..=17u32).map(BigCount::from).product::<BigCount>()
        );
    }

    #[test]
    fn pins_fix_partial_maps() {
        let c5 = Graph::cycle(5);
        // automorphisms fixing one vertex: identity and one reflection
        assert_eq!(count_embeddings(&c5, &c5, Some(&[(0, 0)])).unwrap(), big(2));
        // adjacent pattern pair onto non-adjacent host pair: nothing extends
        assert_eq!(count_embeddings(&c5, &c5, Some(&[(0, 0), (1, 2)])).unwrap(), big(0));
        assert_eq!(
            count_embeddings(&c5, &c5, Some(&[(0, 0), (1, 1)])).unwrap(),
            big(1)
        );
    }

    #[test]
    fn pin_validation() {
        let c5 = Graph::cycle(5);
        let p4 = Graph::path(4);
        assert_eq!(
            count_embeddings(&p4, &c5, Some(&[(4, 0)])).unwrap_err(),
            EmbedError::PinPatternOutOfRange { vertex: 4, k: 4 }
        );
        assert_eq!(
            count_embeddings(&p4, &c5, Some(&[(0, 5)])).unwrap_err(),
            EmbedError::PinHostOutOfRange { vertex: 5, n: 5 }
        );
        assert_eq!(
            count_embeddings(&p4, &c5, Some(&[(0, 0), (0, 1)])).unwrap_err(),
            EmbedError::PinDuplicatePattern { vertex: 0 }
        );
        assert_eq!(
            count_embeddings(&p4, &c5, Some(&[(0, 1), (2, 1)])).unwrap_err(),
            EmbedError::PinDuplicateHost { vertex: 1 }
        );
    }

    #[test]
    fn per_vertex_counts_sum_to_k_times_total() {
        let c5 = Graph::cycle(5);
        let p4 = Graph::path(4);
        let counts = per_vertex_embedding_counts(&p4, &c5).unwrap();
        assert_eq!(counts, vec![big(8); 5]);
        let total = count_embeddings(&p4, &c5, None).unwrap();
        assert_eq!(counts.iter().sum::<BigCount>(), total * big(4));
        assert_eq!(
            per_vertex_embedding_counts(&c5, &c5).unwrap(),
            vec![big(10); 5]
        );
    }

    #[test]
    fn exhaustive_maximizer_small_cases() {
        let r = emb_max(&Graph::complete(2), 3, &MaxMode::Exhaustive, 1).unwrap();
        assert_eq!(r.value, big(6));
        assert!(r.exact);
        assert_eq!(r.witnesses, vec![Graph::complete(3)]);

        let r = emb_max(&Graph::path(3), 3, &MaxMode::Exhaustive, 1).unwrap();
        assert_eq!(r.value, big(2));
        assert_eq!(r.witnesses.len(), 1);
        assert!(iso::are_isomorphic(&r.witnesses[0], &Graph::path(3)));
    }

    #[test]
    fn exhaustive_maximizer_is_worker_independent() {
        let c5 = Graph::cycle(5);
        let one = emb_max(&c5, 6, &MaxMode::Exhaustive, 1).unwrap();
        let many = emb_max(&c5, 6, &MaxMode::Exhaustive, 5).unwrap();
        assert_eq!(one.value, many.value);
        assert_eq!(one.witnesses, many.witnesses);
        assert_eq!(
            emb_max(&c5, 9, &MaxMode::Exhaustive, 2).unwrap_err(),
            EmbedError::ExhaustiveCapacity { n: 9, cap: 8 }
        );
    }

    #[test]
    fn local_step_clones_a_pentagon_vertex() {
        let c5 = Graph::cycle(5);
        let mut host = Graph::empty(6);
        for x in 0..5 {
            host.set_edge(x, (x + 1) % 5);
        }
        let step = local_search_step(&c5, &host).unwrap();
        assert_eq!(step.count_before, big(10));
        assert_eq!(step.count_after, big(20));
        assert!(step.accepted);
        assert_eq!(count_embeddings(&c5, &step.graph, None).unwrap(), big(20));
    }

    #[test]
    fn local_search_mode_gives_a_lower_bound() {
        let c5 = Graph::cycle(5);
        let exact = emb_max(&c5, 6, &MaxMode::Exhaustive, 2).unwrap();
        let local = emb_max(&c5, 6, &MaxMode::LocalSearch { max_steps: 40 }, 1).unwrap();
        assert!(!local.exact);
        assert!(local.value <= exact.value);
        assert!(local.value >= big(10));
    }

    #[test]
    fn sequence_is_monotone() {
        let p4 = Graph::path(4);
        let seq = emb_sequence(&p4, 4, 6, 2).unwrap();
        assert_eq!(seq[0].0, 4);
        assert_eq!(seq[0].1, big(2));
        assert!(seq.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
