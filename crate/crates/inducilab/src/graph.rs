//! Dense bitset graphs sized for exhaustive search, plus the subset type
//! that certification witnesses are reported in.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    VertexOutOfRange { vertex: usize, n: usize },
    SelfLoop { vertex: usize },
    /// Adjacency queries are defined off the diagonal only.
    DiagonalAdjacency { vertex: usize },
    EmptySubset,
    OverlappingSubsets,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::VertexOutOfRange { vertex, n } => {
                write!(f, "vertex {vertex} out of range for graph on {n} vertices")
            }
            GraphError::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            GraphError::DiagonalAdjacency { vertex } => {
                write!(f, "adjacency at the diagonal entry ({vertex},{vertex})")
            }
            GraphError::EmptySubset => write!(f, "operation needs a non-empty vertex subset"),
            GraphError::OverlappingSubsets => {
                write!(f, "block adjacency needs disjoint vertex subsets")
            }
        }
    }
}

impl std::error::Error for GraphError {}

/// A subset of `0..capacity`, stored as a bitmask. Serializes as the sorted
/// list of members, which is how witnesses appear in reports.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    capacity: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(capacity: usize) -> VertexSet {
        VertexSet {
            capacity,
            words: vec![0; capacity.div_ceil(64)],
        }
    }

    pub fn full(capacity: usize) -> VertexSet {
        let mut s = VertexSet::new(capacity);
        for w in 0..s.words.len() {
            s.words[w] = !0;
        }
        s.trim();
        s
    }

    pub fn from_indices(capacity: usize, indices: &[usize]) -> Result<VertexSet, GraphError> {
        let mut s = VertexSet::new(capacity);
        for &v in indices {
            if v >= capacity {
                return Err(GraphError::VertexOutOfRange {
                    vertex: v,
                    n: capacity,
                });
            }
            s.insert(v);
        }
        Ok(s)
    }

    fn trim(&mut self) {
        let spill = self.capacity % 64;
        if spill != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << spill) - 1;
            }
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.capacity);
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.capacity);
        self.words[v / 64] &= !(1 << (v % 64));
    }

    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.capacity);
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        debug_assert_eq!(self.capacity, other.capacity);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn complement(&self) -> VertexSet {
        let mut out = VertexSet::new(self.capacity);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o = !w;
        }
        out.trim();
        out
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.len()))?;
        for v in self.iter() {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Verdict of a modular-decomposition check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primality {
    Prime,
    /// A module `U` with `2 <= |U| < n`: every outside vertex is adjacent to
    /// all of `U` or to none of it.
    Module(VertexSet),
}

/// An undirected simple graph on `0..n`, one bitset row per vertex.
/// Immutable once built; builders live on the type and in neighboring
/// modules.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        let words = n.div_ceil(64);
        Graph {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for x in 0..n {
            for y in 0..x {
                g.set_edge(x, y);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut g = Graph::empty(n);
        for &(x, y) in edges {
            if x >= n {
                return Err(GraphError::VertexOutOfRange { vertex: x, n });
            }
            if y >= n {
                return Err(GraphError::VertexOutOfRange { vertex: y, n });
            }
            if x == y {
                return Err(GraphError::SelfLoop { vertex: x });
            }
            g.set_edge(x, y);
        }
        Ok(g)
    }

    /// The cycle `0-1-...-(n-1)-0`. Needs `n >= 3`.
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let mut g = Graph::empty(n);
        for x in 0..n {
            g.set_edge(x, (x + 1) % n);
        }
        g
    }

    /// The path `0-1-...-(n-1)`.
    pub fn path(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for x in 1..n {
            g.set_edge(x - 1, x);
        }
        g
    }

    pub(crate) fn set_edge(&mut self, x: usize, y: usize) {
        debug_assert!(x != y && x < self.n && y < self.n);
        self.rows[x * self.words + y / 64] |= 1 << (y % 64);
        self.rows[y * self.words + x / 64] |= 1 << (x % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Checked adjacency: 1 for an edge, 0 for a non-edge. The diagonal is
    /// out of domain.
    pub fn adjacency(&self, x: usize, y: usize) -> Result<u8, GraphError> {
        if x >= self.n {
            return Err(GraphError::VertexOutOfRange { vertex: x, n: self.n });
        }
        if y >= self.n {
            return Err(GraphError::VertexOutOfRange { vertex: y, n: self.n });
        }
        if x == y {
            return Err(GraphError::DiagonalAdjacency { vertex: x });
        }
        Ok(u8::from(self.has_edge(x, y)))
    }

    /// Density between disjoint blocks, rounded: 1 when at least half the
    /// `|X||Y|` cross pairs are edges. On singletons this is `adjacency`.
    pub fn block_adjacency(&self, xs: &VertexSet, ys: &VertexSet) -> Result<u8, GraphError> {
        for s in [xs, ys] {
            if s.capacity() != self.n {
                return Err(GraphError::VertexOutOfRange {
                    vertex: s.capacity(),
                    n: self.n,
                });
            }
            if s.is_empty() {
                return Err(GraphError::EmptySubset);
            }
        }
        if !xs.is_disjoint(ys) {
            return Err(GraphError::OverlappingSubsets);
        }
        let mut edges = 0usize;
        for x in xs.iter() {
            edges += self
                .row(x)
                .iter()
                .zip(&ys.words)
                .map(|(r, y)| (r & y).count_ones() as usize)
                .sum::<usize>();
        }
        Ok(u8::from(2 * edges >= xs.len() * ys.len()))
    }

    /// Unchecked fast path; `x != y` is the caller's invariant.
    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        debug_assert!(x != y && x < self.n && y < self.n);
        self.rows[x * self.words + y / 64] >> (y % 64) & 1 == 1
    }

    pub fn degree(&self, x: usize) -> usize {
        self.row(x).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|x| self.degree(x)).sum::<usize>() / 2
    }

    pub(crate) fn row(&self, x: usize) -> &[u64] {
        &self.rows[x * self.words..(x + 1) * self.words]
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.words
    }

    pub fn neighbors(&self, x: usize) -> VertexSet {
        VertexSet {
            capacity: self.n,
            words: self.row(x).to_vec(),
        }
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        for x in 0..self.n {
            for y in 0..x {
                if !self.has_edge(x, y) {
                    g.set_edge(x, y);
                }
            }
        }
        g
    }

    /// The subgraph induced on `xs`, with a map from new indices back to the
    /// originals (ascending).
    pub fn induced_subgraph(&self, xs: &VertexSet) -> Result<(Graph, Vec<usize>), GraphError> {
        if xs.capacity() != self.n {
            return Err(GraphError::VertexOutOfRange {
                vertex: xs.capacity(),
                n: self.n,
            });
        }
        if xs.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        let back: Vec<usize> = xs.iter().collect();
        let mut g = Graph::empty(back.len());
        for (i, &x) in back.iter().enumerate() {
            for (j, &y) in back.iter().enumerate().take(i) {
                if self.has_edge(x, y) {
                    g.set_edge(i, j);
                }
            }
        }
        Ok((g, back))
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = VertexSet::new(self.n);
        seen.insert(0);
        let mut frontier = vec![0];
        let mut count = 1;
        while let Some(x) = frontier.pop() {
            for y in self.neighbors(x).iter() {
                if !seen.contains(y) {
                    seen.insert(y);
                    count += 1;
                    frontier.push(y);
                }
            }
        }
        count == self.n
    }

    /// Modular-decomposition verdict. Graphs on up to 20 vertices are checked
    /// by exhausting candidate modules; larger ones by closing vertex pairs
    /// to minimal modules.
    pub fn primality(&self) -> Primality {
        if self.n <= 20 {
            self.primality_exhaustive()
        } else {
            self.primality_pair_closure()
        }
    }

    pub fn is_prime(&self) -> bool {
        matches!(self.primality(), Primality::Prime)
    }

    fn primality_exhaustive(&self) -> Primality {
        debug_assert!(self.n <= 20);
        let n = self.n;
        if n < 3 {
            return Primality::Prime;
        }
        let rows: Vec<u64> = (0..n).map(|x| self.row(x)[0]).collect();
        let full = (1u64 << n) - 1;
        for mask in 3..full {
            if mask.count_ones() < 2 {
                continue;
            }
            let mut outside = full & !mask;
            let mut is_module = true;
            while outside != 0 {
                let v = outside.trailing_zeros() as usize;
                outside &= outside - 1;
                let hits = rows[v] & mask;
                if hits != 0 && hits != mask {
                    is_module = false;
                    break;
                }
            }
            if is_module {
                let mut s = VertexSet::new(n);
                let mut m = mask;
                while m != 0 {
                    s.insert(m.trailing_zeros() as usize);
                    m &= m - 1;
                }
                return Primality::Module(s);
            }
        }
        Primality::Prime
    }

    fn primality_pair_closure(&self) -> Primality {
        let n = self.n;
        for u in 0..n {
            for v in u + 1..n {
                let mut set = VertexSet::new(n);
                set.insert(u);
                set.insert(v);
                let mut size = 2;
                let mut changed = true;
                while changed && size < n {
                    changed = false;
                    for w in 0..n {
                        if set.contains(w) {
                            continue;
                        }
                        let mut any = 0u64;
                        let mut missing = false;
                        for (rw, sw) in self.row(w).iter().zip(set.words()) {
                            let hit = rw & sw;
                            any |= hit;
                            if hit != *sw {
                                missing = true;
                            }
                        }
                        // mixed adjacency forces w into any module containing the pair
                        if any != 0 && missing {
                            set.insert(w);
                            size += 1;
                            changed = true;
                        }
                    }
                }
                if size < n {
                    return Primality::Module(set);
                }
            }
        }
        Primality::Prime
    }
}

/// Checks that `u` really is a module of `g`; used by tests and report
/// validation.
pub fn is_module(g: &Graph, u: &VertexSet) -> bool {
    let size = u.len();
    if size < 2 || size >= g.n() || u.capacity() != g.n() {
        return false;
    }
    let members: Vec<usize> = u.iter().collect();
    for v in 0..g.n() {
        if u.contains(v) {
            continue;
        }
        let hits = members.iter().filter(|&&m| g.has_edge(v, m)).count();
        if hits != 0 && hits != size {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_and_degrees() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.adjacency(0, 1).unwrap(), 1);
        assert_eq!(g.adjacency(1, 0).unwrap(), 1);
        assert_eq!(g.adjacency(0, 3).unwrap(), 0);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.degree(3), 1);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn construction_and_query_errors() {
        assert_eq!(
            Graph::from_edges(3, &[(0, 0)]).unwrap_err(),
            GraphError::SelfLoop { vertex: 0 }
        );
        assert_eq!(
            Graph::from_edges(3, &[(1, 3)]).unwrap_err(),
            GraphError::VertexOutOfRange { vertex: 3, n: 3 }
        );
        let g = Graph::path(3);
        assert_eq!(
            g.adjacency(2, 2).unwrap_err(),
            GraphError::DiagonalAdjacency { vertex: 2 }
        );
        assert_eq!(
            g.adjacency(0, 7).unwrap_err(),
            GraphError::VertexOutOfRange { vertex: 7, n: 3 }
        );
    }

    #[test]
    fn named_graphs() {
        let c5 = Graph::cycle(5);
        assert_eq!(c5.edge_count(), 5);
        assert!((0..5).all(|x| c5.degree(x) == 2));
        let p4 = Graph::path(4);
        assert_eq!(p4.edge_count(), 3);
        assert_eq!(Graph::complete(5).edge_count(), 10);
        assert_eq!(Graph::empty(5).edge_count(), 0);
    }

    #[test]
    fn induced_subgraph_keeps_back_map() {
        let c5 = Graph::cycle(5);
        let xs = VertexSet::from_indices(5, &[0, 1, 2]).unwrap();
        let (h, back) = c5.induced_subgraph(&xs).unwrap();
        assert_eq!(back, vec![0, 1, 2]);
        assert_eq!(h.edge_count(), 2);
        assert!(h.has_edge(0, 1) && h.has_edge(1, 2) && !h.has_edge(0, 2));
        assert_eq!(
            c5.induced_subgraph(&VertexSet::new(5)).unwrap_err(),
            GraphError::EmptySubset
        );
    }

    #[test]
    fn connectivity() {
        assert!(Graph::path(4).is_connected());
        assert!(Graph::empty(1).is_connected());
        assert!(!Graph::empty(3).is_connected());
        assert!(!Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(Graph::cycle(6).is_connected());
    }

    #[test]
    fn primality_small_patterns() {
        assert!(Graph::path(4).is_prime());
        assert!(Graph::cycle(5).is_prime());
        for g in [
            Graph::cycle(4),
            Graph::complete(3),
            Graph::path(3),
            Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap(),
            Graph::empty(4),
        ] {
            match g.primality() {
                Primality::Module(u) => assert!(is_module(&g, &u), "bad witness {u}"),
                Primality::Prime => panic!("expected a module"),
            }
        }
    }

    #[test]
    fn primality_paths_and_cycles() {
        for n in 4..9 {
            assert!(Graph::path(n).is_prime(), "P_{n}");
        }
        for n in 5..9 {
            assert!(Graph::cycle(n).is_prime(), "C_{n}");
        }
    }

    #[test]
    fn pair_closure_agrees_with_exhaustive_search() {
        // all labeled graphs on 5 vertices
        for code in 0u64..1 << 10 {
            let mut g = Graph::empty(5);
            let mut bit = 0;
            for y in 1..5 {
                for x in 0..y {
                    if code >> bit & 1 == 1 {
                        g.set_edge(x, y);
                    }
                    bit += 1;
                }
            }
            let a = matches!(g.primality_exhaustive(), Primality::Prime);
            let b = matches!(g.primality_pair_closure(), Primality::Prime);
            assert_eq!(a, b, "code {code}");
            if let Primality::Module(u) = g.primality_pair_closure() {
                assert!(is_module(&g, &u));
            }
        }
    }

    #[test]
    fn vertex_set_basics() {
        let mut s = VertexSet::new(70);
        s.insert(0);
        s.insert(65);
        s.insert(3);
        assert_eq!(s.len(), 3);
        assert!(s.contains(65) && !s.contains(64));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 65]);
        s.remove(3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.complement().len(), 68);
        assert!(VertexSet::from_indices(4, &[5]).is_err());
        assert_eq!(VertexSet::full(70).len(), 70);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0,65]");
    }

    #[test]
    fn disjointness() {
        let a = VertexSet::from_indices(10, &[1, 2]).unwrap();
        let b = VertexSet::from_indices(10, &[3, 4]).unwrap();
        let c = VertexSet::from_indices(10, &[2, 3]).unwrap();
        assert!(a.is_disjoint(&b));
        assert!(!a.is_disjoint(&c));
    }

    #[test]
    fn block_adjacency_rounds_the_density() {
        let c5 = Graph::cycle(5);
        let x = VertexSet::from_indices(5, &[0]).unwrap();
        let y = VertexSet::from_indices(5, &[2]).unwrap();
        assert_eq!(c5.block_adjacency(&x, &y).unwrap(), 0);
        let y = VertexSet::from_indices(5, &[1]).unwrap();
        assert_eq!(c5.block_adjacency(&x, &y).unwrap(), 1);

        // Half the cross pairs present is already "adjacent".
        let g = Graph::from_edges(4, &[(0, 2), (1, 3)]).unwrap();
        let x = VertexSet::from_indices(4, &[0, 1]).unwrap();
        let y = VertexSet::from_indices(4, &[2, 3]).unwrap();
        assert_eq!(g.block_adjacency(&x, &y).unwrap(), 1);

        let k = Graph::complete(6);
        let x = VertexSet::from_indices(6, &[0, 1, 2]).unwrap();
        let y = VertexSet::from_indices(6, &[3, 4]).unwrap();
        assert_eq!(k.block_adjacency(&x, &y).unwrap(), 1);

        let overlap = VertexSet::from_indices(6, &[2, 3]).unwrap();
        assert_eq!(
            k.block_adjacency(&x, &overlap),
            Err(GraphError::OverlappingSubsets)
        );
        let empty = VertexSet::new(6);
        assert_eq!(k.block_adjacency(&x, &empty), Err(GraphError::EmptySubset));
    }
}
