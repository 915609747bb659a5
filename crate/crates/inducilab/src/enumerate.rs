//! Exhaustive graph streams: all labeled graphs on n vertices, and one
//! canonical representative per isomorphism class.

use crate::graph::Graph;
use crate::iso;
use std::collections::HashSet;
use std::fmt;

/// Labeled streams walk all 2^C(n,2) edge codes.
pub const LABELED_CAP: usize = 8;
/// Canonical streams additionally canonicalize every extension.
pub const CANONICAL_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnumerateError {
    LabeledCapacity { n: usize, cap: usize },
    CanonicalCapacity { n: usize, cap: usize },
}

impl fmt::Display for EnumerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerateError::LabeledCapacity { n, cap } => {
                write!(f, "labeled enumeration supports up to {cap} vertices, got {n}")
            }
            EnumerateError::CanonicalCapacity { n, cap } => {
                write!(
                    f,
                    "canonical enumeration supports up to {cap} vertices, got {n}"
                )
            }
        }
    }
}

impl std::error::Error for EnumerateError {}

/// Number of labeled graphs on `n` vertices.
pub fn labeled_count(n: usize) -> u64 {
    if n < 2 {
        1
    } else {
        1u64 << (n * (n - 1) / 2)
    }
}

/// Decodes an edge code into a graph: bit `i` of `code` is the pair
/// `(x, y)` at position `i` of the column-major order `(0,1),(0,2),(1,2),...`.
pub fn graph_from_code(n: usize, code: u64) -> Graph {
    let mut g = Graph::empty(n);
    let mut bit = 0;
    for y in 1..n {
        for x in 0..y {
            if code >> bit & 1 == 1 {
                g.set_edge(x, y);
            }
            bit += 1;
        }
    }
    g
}

/// All labeled graphs on `n` vertices, in edge-code order.
pub fn labeled_graphs(n: usize) -> Result<impl Iterator<Item = Graph>, EnumerateError> {
    if n > LABELED_CAP {
        return Err(EnumerateError::LabeledCapacity { n, cap: LABELED_CAP });
    }
    Ok((0..labeled_count(n)).map(move |code| graph_from_code(n, code)))
}

/// One canonical representative per isomorphism class on `n` vertices,
/// sorted by packed pair code. Built by extending the classes one vertex at
/// a time, so it never materializes the labeled stream.
pub fn canonical_representatives(n: usize) -> Result<Vec<Graph>, EnumerateError> {
    if n > CANONICAL_CAP {
        return Err(EnumerateError::CanonicalCapacity {
            n,
            cap: CANONICAL_CAP,
        });
    }
    if n == 0 {
        return Ok(vec![Graph::empty(0)]);
    }
    let mut reps = vec![Graph::empty(1)];
    for m in 1..n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for rep in &reps {
            for nbhd in 0u64..1 << m {
                let mut g = Graph::empty(m + 1);
                for x in 0..m {
                    for y in 0..x {
                        if rep.has_edge(x, y) {
                            g.set_edge(x, y);
                        }
                    }
                    if nbhd >> x & 1 == 1 {
                        g.set_edge(x, m);
                    }
                }
                let canon = iso::canonical_graph(&g).expect("within canonical cap");
                if seen.insert(iso::pack_pairs(&canon)) {
                    next.push(canon);
                }
            }
        }
        next.sort_by_key(iso::pack_pairs);
        reps = next;
    }
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_stream_length_and_cap() {
        assert_eq!(labeled_graphs(3).unwrap().count(), 8);
        assert_eq!(labeled_graphs(5).unwrap().count(), 1024);
        match labeled_graphs(9) {
            Err(e) => assert_eq!(e, EnumerateError::LabeledCapacity { n: 9, cap: 8 }),
            Ok(_) => panic!("expected a capacity error"),
        }
    }

    #[test]
    fn code_roundtrip_covers_every_graph_once() {
        let mut seen = HashSet::new();
        for g in labeled_graphs(4).unwrap() {
            assert!(seen.insert(iso::pack_pairs(&g)));
        }
        assert_eq!(seen.len(), 64);
    }

    #[test]
    fn class_counts_match_the_known_sequence() {
        // graphs on 1..=6 vertices up to isomorphism
        let expected = [1usize, 2, 4, 11, 34, 156];
        for (i, &want) in expected.iter().enumerate() {
            let reps = canonical_representatives(i + 1).unwrap();
            assert_eq!(reps.len(), want, "n = {}", i + 1);
        }
    }

    #[test]
    fn representatives_are_canonical_and_sorted() {
        let reps = canonical_representatives(5).unwrap();
        let mut codes = Vec::new();
        for r in &reps {
            assert_eq!(iso::canonical_graph(r).unwrap(), *r);
            codes.push(iso::pack_pairs(r));
        }
        let mut sorted = codes.clone();
        sorted.sort_unstable();
        assert_eq!(codes, sorted);
    }

    #[test]
    fn canonical_cap_is_enforced() {
        assert_eq!(
            canonical_representatives(10).unwrap_err(),
            EnumerateError::CanonicalCapacity { n: 10, cap: 9 }
        );
    }
}
