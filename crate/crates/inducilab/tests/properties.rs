//! Randomized invariant checks across the library: group combinatorics,
//! Cayley structure, counting identities, and format round trips.

use inducilab::bounds::balanced_product;
use inducilab::cayley::{
    rotations_reflections, sample_connection_set, CayleyGraph, ConnectionSet,
};
use inducilab::certify::is_signature;
use inducilab::embed::{
    count_automorphisms, count_embeddings, count_induced_copies, per_vertex_embedding_counts,
    BigCount,
};
use inducilab::enumerate::graph_from_code;
use inducilab::graph::{Graph, VertexSet};
use inducilab::graph6;
use inducilab::group::AbelianGroup;
use num_rational::BigRational;
use proptest::prelude::*;

/// A labeled graph on 1..=max vertices, uniform over adjacency codes.
fn small_graph(max: usize) -> impl Strategy<Value = Graph> {
    (1..=max).prop_flat_map(|n| {
        let bits = n * (n - 1) / 2;
        (0u64..1u64 << bits).prop_map(move |code| graph_from_code(n, code))
    })
}

/// Cyclic factor lists with product at most 24.
fn small_group() -> impl Strategy<Value = AbelianGroup> {
    prop::collection::vec(2u64..=12, 1..=3)
        .prop_filter("order cap", |fs| fs.iter().product::<u64>() <= 24)
        .prop_map(|fs| AbelianGroup::new(fs).expect("factors are at least 2"))
}

/// A symmetric zero-free connection set: each κ-class joins whole.
fn connection_from_mask(group: &AbelianGroup, mask: u64) -> ConnectionSet {
    let mut members = Vec::new();
    for (i, class) in group.kappa_classes().into_iter().enumerate() {
        if mask >> (i % 64) & 1 == 1 {
            members.extend(class.members().iter().cloned());
        }
    }
    ConnectionSet::new(group.clone(), members).expect("classes are symmetric")
}

fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    let mut edges = Vec::new();
    for x in 0..g.n() {
        for y in 0..x {
            if g.has_edge(x, y) {
                edges.push((perm[x], perm[y]));
            }
        }
    }
    Graph::from_edges(g.n(), &edges).expect("permutation keeps edges simple")
}

proptest! {
    #[test]
    fn kappa_classes_partition_the_nonzero_elements(group in small_group()) {
        let classes = group.kappa_classes();
        let mut seen = vec![0u32; group.order() as usize];
        for class in &classes {
            for g in class.members() {
                prop_assert!(!group.is_identity(g));
                seen[group.index_of(g).unwrap() as usize] += 1;
                // κ(g) and κ(−g) are the same class.
                let neg = group.neg(g).unwrap();
                let direct = group.kappa(g).unwrap();
                let mirrored = group.kappa(&neg).unwrap();
                prop_assert_eq!(direct.representative(), mirrored.representative());
            }
        }
        prop_assert_eq!(seen[0], 0);
        prop_assert!(seen[1..].iter().all(|&c| c == 1));
    }

    #[test]
    fn doubling_solution_counts_are_all_or_nothing(group in small_group(), t in 0u64..24) {
        prop_assume!(t < group.order());
        let base = group.doubling_solutions(&group.identity()).unwrap().len();
        let count = group.doubling_solutions(&group.element(t)).unwrap().len();
        prop_assert!(count == 0 || count == base);
    }

    #[test]
    fn generating_connection_sets_are_exactly_the_connected_ones(
        group in small_group(),
        mask in any::<u64>(),
    ) {
        let connection = connection_from_mask(&group, mask);
        let generating = connection.is_generating();
        let graph = CayleyGraph::build(connection).unwrap();
        prop_assert_eq!(generating, graph.graph().is_connected());
    }

    #[test]
    fn cayley_graphs_are_regular_and_rotation_transitive(
        group in small_group(),
        mask in any::<u64>(),
    ) {
        let connection = connection_from_mask(&group, mask);
        let degree = connection.len();
        let cayley = CayleyGraph::build(connection).unwrap();
        let n = cayley.order();
        for v in 0..n {
            prop_assert_eq!(cayley.graph().degree(v), degree);
        }

        let maps = rotations_reflections(cayley.group()).unwrap();
        prop_assert_eq!(maps.len(), 2 * n);
        // Every map is an automorphism, and rotations act transitively.
        for m in &maps {
            for x in 0..n {
                for y in 0..x {
                    prop_assert_eq!(
                        cayley.graph().has_edge(m.apply(x), m.apply(y)),
                        cayley.graph().has_edge(x, y)
                    );
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                prop_assert!(maps.iter().any(|m| m.apply(x) == y));
            }
        }
    }

    #[test]
    fn connection_sampling_is_deterministic_and_symmetric(
        group in small_group(),
        numer in 1u64..10,
        seed in any::<u64>(),
    ) {
        let p = BigRational::new(numer.into(), 10.into());
        let a = sample_connection_set(&group, &p, seed).unwrap();
        let b = sample_connection_set(&group, &p, seed).unwrap();
        prop_assert_eq!(a.members(), b.members());
        for g in a.members() {
            prop_assert!(!group.is_identity(g));
            let neg = group.neg(g).unwrap();
            prop_assert!(a.members().contains(&neg));
        }
    }

    #[test]
    fn graph6_round_trips(g in small_graph(8)) {
        let line = graph6::encode(&g);
        prop_assert_eq!(graph6::decode(&line).unwrap(), g);
    }

    #[test]
    fn embeddings_factor_through_automorphisms(
        pattern in small_graph(4),
        host in small_graph(6),
    ) {
        let emb = count_embeddings(&pattern, &host, None).unwrap();
        let aut = count_automorphisms(&pattern);
        let ind = count_induced_copies(&pattern, &host).unwrap();
        prop_assert_eq!(emb, aut * ind);
    }

    #[test]
    fn per_vertex_counts_sum_to_k_times_total(
        pattern in small_graph(4),
        host in small_graph(6),
    ) {
        let emb = count_embeddings(&pattern, &host, None).unwrap();
        let per = per_vertex_embedding_counts(&pattern, &host).unwrap();
        let sum: BigCount = per.into_iter().sum();
        prop_assert_eq!(sum, emb * BigCount::from(pattern.n() as u64));
    }

    #[test]
    fn embedding_counts_ignore_host_labels(
        pattern in small_graph(4),
        host in small_graph(6),
        shuffle in any::<u64>(),
    ) {
        // Fisher-Yates driven by the seed bits.
        let n = host.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = shuffle | 1;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let relabeled = permuted(&host, &perm);
        prop_assert_eq!(
            count_embeddings(&pattern, &host, None).unwrap(),
            count_embeddings(&pattern, &relabeled, None).unwrap()
        );
    }

    #[test]
    fn prime_graphs_are_connected_and_twins_never_prime(g in small_graph(6)) {
        if g.n() >= 3 && g.is_prime() {
            prop_assert!(g.is_connected());
        }
        // Duplicate vertex 0 as a non-adjacent twin: {0, n} is a proper
        // module once the doubled graph has at least 3 vertices.
        let n = g.n();
        prop_assume!(n >= 2);
        let mut edges = Vec::new();
        for x in 0..n {
            for y in 0..x {
                if g.has_edge(x, y) {
                    edges.push((x, y));
                }
            }
        }
        for y in 0..n {
            if y != 0 && g.has_edge(0, y) {
                edges.push((n, y));
            }
        }
        let doubled = Graph::from_edges(n + 1, &edges).unwrap();
        prop_assert!(!doubled.is_prime());
    }

    #[test]
    fn block_adjacency_restricts_to_plain_adjacency(g in small_graph(6)) {
        for x in 0..g.n() {
            for y in 0..g.n() {
                if x == y {
                    continue;
                }
                let xs = VertexSet::from_indices(g.n(), &[x]).unwrap();
                let ys = VertexSet::from_indices(g.n(), &[y]).unwrap();
                prop_assert_eq!(
                    g.block_adjacency(&xs, &ys).unwrap(),
                    g.adjacency(x, y).unwrap()
                );
            }
        }
    }

    #[test]
    fn signatures_survive_supersets(g in small_graph(6), mask in any::<u64>(), extra in any::<u64>()) {
        let n = g.n();
        let mut s = VertexSet::new(n);
        for v in 0..n {
            if mask >> v & 1 == 1 {
                s.insert(v);
            }
        }
        prop_assume!(is_signature(&g, &s).unwrap());
        let mut bigger = s.clone();
        for v in 0..n {
            if extra >> v & 1 == 1 {
                bigger.insert(v);
            }
        }
        prop_assert!(is_signature(&g, &bigger).unwrap());
    }

    #[test]
    fn balanced_products_are_monotone_and_exact_on_multiples(
        parts in 1u64..=6,
        total in 0u64..=60,
    ) {
        let here = balanced_product(parts, total);
        prop_assert!(here <= balanced_product(parts, total + 1));
        if total % parts == 0 {
            let even = BigCount::from(total / parts);
            prop_assert_eq!(here, num_traits::pow(even, parts as usize));
        }
    }

    #[test]
    fn balanced_products_are_superadditive(
        l1 in 1u64..=4, l2 in 1u64..=4,
        m1 in 0u64..=30, m2 in 0u64..=30,
    ) {
        let joint = balanced_product(l1 + l2, m1 + m2);
        let split = balanced_product(l1, m1) * balanced_product(l2, m2);
        prop_assert!(joint >= split);
    }
}
