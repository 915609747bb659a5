//! Isomorphism testing and canonical labeling, sized for the small graphs
//! that enumeration and witness reporting deal in.

use crate::graph::Graph;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoError {
    /// Canonical codes pack the upper triangle into one u64, which caps the
    /// vertex count.
    CanonicalCapacity { n: usize, cap: usize },
}

impl fmt::Display for IsoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsoError::CanonicalCapacity { n, cap } => {
                write!(f, "canonical form supports up to {cap} vertices, got {n}")
            }
        }
    }
}

impl std::error::Error for IsoError {}

/// Largest vertex count `canonical_code` accepts: C(11,2) = 55 pair bits.
pub const CANONICAL_CAP: usize = 11;

/// Upper-triangle bits of `g` in column-major pair order
/// `(0,1),(0,2),(1,2),(0,3),...`, packed MSB-first so that integer order on
/// codes is lexicographic order on bit strings (ties broken within one n).
pub fn pack_pairs(g: &Graph) -> u64 {
    debug_assert!(g.n() <= CANONICAL_CAP);
    let mut code = 0u64;
    let mut pos = 0;
    for y in 1..g.n() {
        for x in 0..y {
            if g.has_edge(x, y) {
                code |= 1 << (63 - pos);
            }
            pos += 1;
        }
    }
    code
}

/// The lexicographically least relabeling of `g`, as a packed pair code.
/// Two graphs on the same vertex count are isomorphic iff their codes match.
pub fn canonical_code(g: &Graph) -> Result<u64, IsoError> {
    Ok(pack_pairs(&canonical_graph(g)?))
}

/// The relabeling of `g` that attains the least pair code. Used as the
/// deterministic representative of an isomorphism class.
pub fn canonical_graph(g: &Graph) -> Result<Graph, IsoError> {
    let n = g.n();
    if n > CANONICAL_CAP {
        return Err(IsoError::CanonicalCapacity {
            n,
            cap: CANONICAL_CAP,
        });
    }
    if n <= 1 {
        return Ok(g.clone());
    }
    let mut best: Option<Vec<bool>> = None;
    let mut best_perm = vec![0usize; n];
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut bits: Vec<bool> = Vec::with_capacity(n * (n - 1) / 2);
    search_least(g, &mut perm, &mut used, &mut bits, &mut best, &mut best_perm);
    let mut out = Graph::empty(n);
    // best_perm[i] is the original vertex placed at position i
    for i in 0..n {
        for j in 0..i {
            if g.has_edge(best_perm[i], best_perm[j]) {
                out.set_edge(i, j);
            }
        }
    }
    Ok(out)
}

fn search_least(
    g: &Graph,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    bits: &mut Vec<bool>,
    best: &mut Option<Vec<bool>>,
    best_perm: &mut [usize],
) {
    let n = g.n();
    if perm.len() == n {
        let better = match best {
            None => true,
            Some(b) => bits[..] < b[..],
        };
        if better {
            *best = Some(bits.clone());
            best_perm.copy_from_slice(perm);
        }
        return;
    }
    for v in 0..n {
        if used[v] {
            continue;
        }
        let start = bits.len();
        for &u in perm.iter() {
            bits.push(g.has_edge(u, v));
        }
        // a prefix already worse than the incumbent cannot recover
        let viable = match best {
            None => true,
            Some(b) => bits[..] <= b[..bits.len()],
        };
        if viable {
            used[v] = true;
            perm.push(v);
            search_least(g, perm, used, bits, best, best_perm);
            perm.pop();
            used[v] = false;
        }
        bits.truncate(start);
    }
}

/// Exact isomorphism test by invariant screening plus backtracking.
pub fn are_isomorphic(g: &Graph, h: &Graph) -> bool {
    if g.n() != h.n() {
        return false;
    }
    let n = g.n();
    if n == 0 {
        return true;
    }
    if g.edge_count() != h.edge_count() {
        return false;
    }
    if invariant_profile(g) != invariant_profile(h) {
        return false;
    }
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    // match high-degree vertices first; they constrain the most
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    extend_iso(g, h, &order, 0, &mut image, &mut used)
}

/// Sorted (degree, sorted neighbor degrees) per vertex.
fn invariant_profile(g: &Graph) -> Vec<(usize, Vec<usize>)> {
    let mut profile: Vec<(usize, Vec<usize>)> = (0..g.n())
        .map(|v| {
            let mut nd: Vec<usize> = g.neighbors(v).iter().map(|u| g.degree(u)).collect();
            nd.sort_unstable();
            (g.degree(v), nd)
        })
        .collect();
    profile.sort();
    profile
}

fn extend_iso(
    g: &Graph,
    h: &Graph,
    order: &[usize],
    depth: usize,
    image: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    'candidates: for w in 0..h.n() {
        if used[w] || g.degree(v) != h.degree(w) {
            continue;
        }
        for &p in &order[..depth] {
            if g.has_edge(v, p) != h.has_edge(w, image[p]) {
                continue 'candidates;
            }
        }
        image[v] = w;
        used[w] = true;
        if extend_iso(g, h, order, depth + 1, image, used) {
            return true;
        }
        used[w] = false;
        image[v] = usize::MAX;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn relabel(g: &Graph, perm: &[usize]) -> Graph {
        let mut out = Graph::empty(g.n());
        for x in 0..g.n() {
            for y in 0..x {
                if g.has_edge(x, y) {
                    out.set_edge(perm[x], perm[y]);
                }
            }
        }
        out
    }

    #[test]
    fn relabelings_are_isomorphic_and_share_a_code() {
        let c5 = Graph::cycle(5);
        let shuffled = relabel(&c5, &[2, 0, 4, 1, 3]);
        assert_ne!(c5, shuffled);
        assert!(are_isomorphic(&c5, &shuffled));
        assert_eq!(
            canonical_code(&c5).unwrap(),
            canonical_code(&shuffled).unwrap()
        );
    }

    #[test]
    fn distinguishes_same_degree_sequence() {
        // C_6 and two triangles: both 2-regular on 6 vertices
        let c6 = Graph::cycle(6);
        let triangles =
            Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!are_isomorphic(&c6, &triangles));
        assert_ne!(
            canonical_code(&c6).unwrap(),
            canonical_code(&triangles).unwrap()
        );
    }

    #[test]
    fn distinguishes_path_from_star() {
        let p4 = Graph::path(4);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(!are_isomorphic(&p4, &star));
    }

    #[test]
    fn canonical_graph_is_a_fixed_point() {
        for g in [
            Graph::cycle(5),
            Graph::path(6),
            Graph::complete(4),
            Graph::empty(3),
            Graph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap(),
        ] {
            let c = canonical_graph(&g).unwrap();
            assert!(are_isomorphic(&g, &c));
            assert_eq!(canonical_graph(&c).unwrap(), c);
        }
    }

    #[test]
    fn four_vertex_graphs_fall_into_eleven_classes() {
        let mut codes = std::collections::HashSet::new();
        for code in 0u64..1 << 6 {
            let mut g = Graph::empty(4);
            let mut bit = 0;
            for y in 1..4 {
                for x in 0..y {
                    if code >> bit & 1 == 1 {
                        g.set_edge(x, y);
                    }
                    bit += 1;
                }
            }
            codes.insert(canonical_code(&g).unwrap());
        }
        assert_eq!(codes.len(), 11);
    }

    #[test]
    fn capacity_is_enforced() {
        let g = Graph::empty(12);
        assert_eq!(
            canonical_code(&g).unwrap_err(),
            IsoError::CanonicalCapacity { n: 12, cap: 11 }
        );
    }
}
