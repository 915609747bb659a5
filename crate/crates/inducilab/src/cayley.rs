//! Cayley graphs of abelian groups: connection-set validation and sampling,
//! the canonical translation and negation maps, and vertex deletion.

use crate::graph::{Graph, GraphError, VertexSet};
use crate::group::{AbelianGroup, GroupElement, GroupError};
use crate::interval::LogBase;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CayleyError {
    Group(GroupError),
    Graph(GraphError),
    /// Connection sets consist of nonzero elements.
    IdentityInConnectionSet,
    /// Connection sets are symmetric: with g they contain -g.
    NotClosedUnderNegation { element: GroupElement },
    /// Sampling probability must satisfy 0 < p < 1.
    ProbabilityOutOfRange,
    /// The group is too large to materialize as a graph.
    OrderExceedsUsize,
}

impl fmt::Display for CayleyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CayleyError::Group(e) => write!(f, "{e}"),
            CayleyError::Graph(e) => write!(f, "{e}"),
            CayleyError::IdentityInConnectionSet => {
                write!(f, "connection set contains the identity")
            }
            CayleyError::NotClosedUnderNegation { element } => {
                write!(f, "connection set misses the negative of {element}")
            }
            CayleyError::ProbabilityOutOfRange => {
                write!(f, "sampling probability must satisfy 0 < p < 1")
            }
            CayleyError::OrderExceedsUsize => write!(f, "group order exceeds addressable size"),
        }
    }
}

impl std::error::Error for CayleyError {}

impl From<GroupError> for CayleyError {
    fn from(e: GroupError) -> Self {
        CayleyError::Group(e)
    }
}

impl From<GraphError> for CayleyError {
    fn from(e: GraphError) -> Self {
        CayleyError::Graph(e)
    }
}

/// A validated connection set: nonzero, negation-closed, sorted by element
/// index, duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionSet {
    group: AbelianGroup,
    members: Vec<GroupElement>,
}

impl ConnectionSet {
    pub fn new(group: AbelianGroup, members: Vec<GroupElement>) -> Result<Self, CayleyError> {
        let mut indices = Vec::with_capacity(members.len());
        for g in &members {
            if group.is_identity(g) {
                return Err(CayleyError::IdentityInConnectionSet);
            }
            indices.push(group.index_of(g)?);
        }
        indices.sort_unstable();
        indices.dedup();
        let members: Vec<GroupElement> = indices.iter().map(|&i| group.element(i)).collect();
        for g in &members {
            let neg = group.neg(g)?;
            let ni = group.index_of(&neg)?;
            if indices.binary_search(&ni).is_err() {
                return Err(CayleyError::NotClosedUnderNegation { element: g.clone() });
            }
        }
        Ok(ConnectionSet { group, members })
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn members(&self) -> &[GroupElement] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether the members generate the whole group; equivalent to the
    /// Cayley graph being connected.
    pub fn is_generating(&self) -> bool {
        self.group
            .is_generating(&self.members)
            .expect("members validated")
    }
}

/// One Bernoulli draw per negation-pair class: class with representative
/// index `r` is included iff the first u64 of ChaCha8(seed, stream = r) is
/// below `floor(p * 2^64)`. Sampling more classes never reshuffles earlier
/// draws.
pub fn sample_connection_set(
    group: &AbelianGroup,
    p: &num_rational::BigRational,
    seed: u64,
) -> Result<ConnectionSet, CayleyError> {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    if p <= &num_rational::BigRational::zero() || p >= &num_rational::BigRational::one() {
        return Err(CayleyError::ProbabilityOutOfRange);
    }
    let threshold: u128 = {
        let scaled: BigInt = p.numer() * (BigInt::one() << 64u32) / p.denom();
        let (_, digits) = scaled.to_u64_digits();
        digits
            .iter()
            .rev()
            .fold(0u128, |acc, &d| (acc << 64) | u128::from(d))
    };
    let mut members = Vec::new();
    for class in group.kappa_classes() {
        let rep_index = group.index_of(class.representative())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep_index);
        if u128::from(rng.next_u64()) < threshold {
            members.extend(class.members().iter().cloned());
        }
    }
    ConnectionSet::new(group.clone(), members)
}

/// A group together with a connection set and the graph they define:
/// vertices are element indices, `x ~ y` iff `x - y` lies in the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyGraph {
    connection: ConnectionSet,
    graph: Graph,
}

impl CayleyGraph {
    pub fn build(connection: ConnectionSet) -> Result<CayleyGraph, CayleyError> {
        let group = connection.group();
        let n = usize::try_from(group.order()).map_err(|_| CayleyError::OrderExceedsUsize)?;
        let mut in_lambda = vec![false; n];
        for g in connection.members() {
            in_lambda[group.index_of(g)? as usize] = true;
        }
        let mut graph = Graph::empty(n);
        for x in 0..n {
            let gx = group.element(x as u64);
            for y in 0..x {
                let gy = group.element(y as u64);
                let diff = group.sub(&gx, &gy)?;
                if in_lambda[group.index_of(&diff)? as usize] {
                    graph.set_edge(x, y);
                }
            }
        }
        Ok(CayleyGraph { connection, graph })
    }

    pub fn group(&self) -> &AbelianGroup {
        self.connection.group()
    }

    pub fn connection(&self) -> &ConnectionSet {
        &self.connection
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn order(&self) -> usize {
        self.graph.n()
    }

    pub fn to_descriptor(&self, p: Option<f64>, seed: Option<u64>) -> CayleyDescriptor {
        CayleyDescriptor {
            group: self.group().clone(),
            lambda: self
                .connection
                .members()
                .iter()
                .map(|g| g.coordinates().to_vec())
                .collect(),
            p,
            seed,
        }
    }

    pub fn from_descriptor(d: &CayleyDescriptor) -> Result<CayleyGraph, CayleyError> {
        let mut members = Vec::with_capacity(d.lambda.len());
        for coords in &d.lambda {
            members.push(d.group.element_from_coordinates(coords)?);
        }
        CayleyGraph::build(ConnectionSet::new(d.group.clone(), members)?)
    }
}

/// JSON form of a Cayley graph: the group, the explicit connection set as
/// coordinate tuples, and the sampling parameters when it was sampled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CayleyDescriptor {
    pub group: AbelianGroup,
    pub lambda: Vec<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// The cycle on n vertices as a Cayley graph of Z/n with connection set
/// {1, n-1}.
pub fn cycle_cayley(n: u64) -> Result<CayleyGraph, CayleyError> {
    let group = AbelianGroup::new(vec![n])?;
    let members = match n {
        1 => vec![],
        2 => vec![group.element(1)],
        _ => vec![group.element(1), group.element(n - 1)],
    };
    CayleyGraph::build(ConnectionSet::new(group, members)?)
}

/// Whether a vertex map is a translation or a negation-translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MapKind {
    /// `x -> x + g`
    Rotation(GroupElement),
    /// `x -> -x + g`
    Reflection(GroupElement),
}

/// One of the group's canonical graph maps, tabulated on vertex indices.
/// Distinct kinds can tabulate to the same function (in groups of exponent
/// two every rotation equals a reflection); equality compares tables.
#[derive(Debug, Clone, Serialize)]
pub struct VertexMap {
    kind: MapKind,
    images: Vec<usize>,
}

impl PartialEq for VertexMap {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Eq for VertexMap {}

impl VertexMap {
    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    /// Whether this map agrees with `f` on f's whole domain.
    pub fn extends(&self, f: &[(usize, usize)]) -> bool {
        f.iter().all(|&(x, y)| self.images[x] == y)
    }
}

fn tabulate(group: &AbelianGroup, kind: MapKind) -> Result<VertexMap, CayleyError> {
    let n = usize::try_from(group.order()).map_err(|_| CayleyError::OrderExceedsUsize)?;
    let mut images = Vec::with_capacity(n);
    for x in 0..n {
        let gx = group.element(x as u64);
        let y = match &kind {
            MapKind::Rotation(g) => group.add(&gx, g)?,
            MapKind::Reflection(g) => group.add(&group.neg(&gx)?, g)?,
        };
        images.push(group.index_of(&y)? as usize);
    }
    Ok(VertexMap { kind, images })
}

/// The 2n canonical maps: all rotations in index order of g, then all
/// reflections in index order of g. Every one is an automorphism of every
/// Cayley graph of the group; the list is a closed composition system but
/// may repeat functions (see `MapKind`).
pub fn rotations_reflections(group: &AbelianGroup) -> Result<Vec<VertexMap>, CayleyError> {
    let mut maps = Vec::with_capacity(2 * group.order() as usize);
    for g in group.elements() {
        maps.push(tabulate(group, MapKind::Rotation(g))?);
    }
    for g in group.elements() {
        maps.push(tabulate(group, MapKind::Reflection(g))?);
    }
    Ok(maps)
}

/// `a` after `b`, computed on kinds; the composite is again canonical.
pub fn compose(
    group: &AbelianGroup,
    a: &VertexMap,
    b: &VertexMap,
) -> Result<VertexMap, CayleyError> {
    let kind = match (&a.kind, &b.kind) {
        (MapKind::Rotation(g), MapKind::Rotation(h)) => MapKind::Rotation(group.add(g, h)?),
        (MapKind::Rotation(g), MapKind::Reflection(h)) => MapKind::Reflection(group.add(g, h)?),
        (MapKind::Reflection(g), MapKind::Rotation(h)) => MapKind::Reflection(group.sub(g, h)?),
        (MapKind::Reflection(g), MapKind::Reflection(h)) => MapKind::Rotation(group.sub(g, h)?),
    };
    tabulate(group, kind)
}

/// Over the full list of 2n canonical maps, how many send some vertex of
/// `h_vertices` to `x`. Counted with the list's multiplicity.
pub fn maps_hitting_vertex(
    group: &AbelianGroup,
    h_vertices: &VertexSet,
    x: usize,
) -> Result<usize, CayleyError> {
    let maps = rotations_reflections(group)?;
    Ok(maps
        .iter()
        .filter(|m| h_vertices.iter().any(|v| m.apply(v) == x))
        .count())
}

/// Result of deleting vertices: the induced graph, the map from new indices
/// to host indices, and whether the deletion stayed within the budget of
/// one quarter of the log of the order.
#[derive(Debug, Clone)]
pub struct Deletion {
    pub graph: Graph,
    pub back_map: Vec<usize>,
    pub within_budget: bool,
    pub budget: u64,
}

/// `floor(log_base(ktilde) / 4)`: how many vertices may be deleted while
/// the certification story still applies.
pub fn deletion_budget(ktilde: u64, base: LogBase) -> u64 {
    assert!(ktilde >= 1);
    crate::interval::floor_log_scaled(ktilde, 1, 4, base)
}

pub fn delete_vertices(
    host: &CayleyGraph,
    deleted: &VertexSet,
    base: LogBase,
) -> Result<Deletion, CayleyError> {
    let keep = deleted.complement();
    let (graph, back_map) = host.graph().induced_subgraph(&keep)?;
    let budget = deletion_budget(host.order() as u64, base);
    Ok(Deletion {
        graph,
        back_map,
        within_budget: deleted.len() as u64 <= budget,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn ratio(n: i32, d: i32) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn pentagon_is_the_five_cycle() {
        let c = cycle_cayley(5).unwrap();
        assert_eq!(*c.graph(), Graph::cycle(5));
        assert_eq!(c.order(), 5);
        let c12 = cycle_cayley(12).unwrap();
        assert_eq!(*c12.graph(), Graph::cycle(12));
    }

    #[test]
    fn connection_set_validation() {
        let group = AbelianGroup::new(vec![5]).unwrap();
        assert_eq!(
            ConnectionSet::new(group.clone(), vec![group.element(0)]).unwrap_err(),
            CayleyError::IdentityInConnectionSet
        );
        assert_eq!(
            ConnectionSet::new(group.clone(), vec![group.element(1)]).unwrap_err(),
            CayleyError::NotClosedUnderNegation {
                element: group.element(1)
            }
        );
        let ok = ConnectionSet::new(
            group.clone(),
            vec![group.element(4), group.element(1), group.element(1)],
        )
        .unwrap();
        // dedup and sort by index
        assert_eq!(ok.members(), &[group.element(1), group.element(4)]);
    }

    #[test]
    fn self_negative_elements_stand_alone() {
        let group = AbelianGroup::new(vec![12]).unwrap();
        let conn = ConnectionSet::new(group.clone(), vec![group.element(6)]).unwrap();
        let g = CayleyGraph::build(conn).unwrap();
        // x ~ x+6: a perfect matching
        assert_eq!(g.graph().edge_count(), 6);
        assert!((0..12).all(|x| g.graph().degree(x) == 1));
    }

    #[test]
    fn sampling_is_deterministic_and_replayable() {
        let group = AbelianGroup::new(vec![12]).unwrap();
        let p = ratio(1, 2);
        let a = sample_connection_set(&group, &p, 7).unwrap();
        let b = sample_connection_set(&group, &p, 7).unwrap();
        assert_eq!(a, b);
        let g = CayleyGraph::build(a.clone()).unwrap();
        let d = g.to_descriptor(Some(0.5), Some(7));
        let replayed = CayleyGraph::from_descriptor(&d).unwrap();
        assert_eq!(replayed, g);
    }

    #[test]
    fn sampling_probability_is_honored() {
        let group = AbelianGroup::new(vec![12]).unwrap();
        let p = ratio(1, 2);
        let mut hits = 0;
        for seed in 0..400 {
            let conn = sample_connection_set(&group, &p, seed).unwrap();
            if conn.members().contains(&group.element(1)) {
                hits += 1;
            }
        }
        // binomial(400, 1/2): far outside these bounds means a broken stream
        assert!((120..=280).contains(&hits), "got {hits}");
        assert!(sample_connection_set(&group, &ratio(0, 1), 1).is_err());
        assert!(sample_connection_set(&group, &ratio(1, 1), 1).is_err());
    }

    #[test]
    fn per_class_draws_are_independent_of_other_classes() {
        // Z/12 and Z/13 share representative indices 1..=6; equal seeds must
        // give equal verdicts on the shared classes regardless of group size
        let z12 = AbelianGroup::new(vec![12]).unwrap();
        let z13 = AbelianGroup::new(vec![13]).unwrap();
        let p = ratio(1, 3);
        for seed in 0..50 {
            let a = sample_connection_set(&z12, &p, seed).unwrap();
            let b = sample_connection_set(&z13, &p, seed).unwrap();
            for rep in 1..=5u64 {
                let in_a = a.members().contains(&z12.element(rep));
                let in_b = b.members().contains(&z13.element(rep));
                assert_eq!(in_a, in_b, "seed {seed} rep {rep}");
            }
        }
    }

    #[test]
    fn canonical_maps_are_automorphisms_and_compose() {
        let group = AbelianGroup::new(vec![5]).unwrap();
        let host = cycle_cayley(5).unwrap();
        let maps = rotations_reflections(&group).unwrap();
        assert_eq!(maps.len(), 10);
        // all distinct as functions in odd order
        let mut tables: Vec<&[usize]> = maps.iter().map(|m| m.images()).collect();
        tables.sort();
        tables.dedup();
        assert_eq!(tables.len(), 10);
        for m in &maps {
            for x in 0..5 {
                for y in 0..x {
                    assert_eq!(
                        host.graph().has_edge(x, y),
                        host.graph().has_edge(m.apply(x), m.apply(y))
                    );
                }
            }
        }
        for a in &maps {
            for b in &maps {
                let c = compose(&group, a, b).unwrap();
                for x in 0..5 {
                    assert_eq!(c.apply(x), a.apply(b.apply(x)));
                }
            }
        }
    }

    #[test]
    fn exponent_two_groups_collapse_rotations_onto_reflections() {
        let group = AbelianGroup::new(vec![2, 2]).unwrap();
        let maps = rotations_reflections(&group).unwrap();
        assert_eq!(maps.len(), 8);
        let mut tables: Vec<&[usize]> = maps.iter().map(|m| m.images()).collect();
        tables.sort();
        tables.dedup();
        assert_eq!(tables.len(), 4);
    }

    #[test]
    fn every_vertex_is_hit_by_two_k_maps() {
        for factors in [vec![5u64], vec![12], vec![2, 2], vec![2, 4]] {
            let group = AbelianGroup::new(factors).unwrap();
            let n = group.order() as usize;
            let h = VertexSet::from_indices(n, &[0, 1, 2]).unwrap();
            for x in 0..n {
                assert_eq!(
                    maps_hitting_vertex(&group, &h, x).unwrap(),
                    6,
                    "order {n} vertex {x}"
                );
            }
        }
    }

    #[test]
    fn deletion_produces_the_path() {
        let host = cycle_cayley(5).unwrap();
        let d = VertexSet::from_indices(5, &[4]).unwrap();
        let del = delete_vertices(&host, &d, LogBase::Natural).unwrap();
        assert_eq!(del.graph, Graph::path(4));
        assert_eq!(del.back_map, vec![0, 1, 2, 3]);
        assert_eq!(del.budget, 0);
        assert!(!del.within_budget);
    }

    #[test]
    fn deletion_budget_boundaries() {
        // ln 54 < 4 < ln 55, so the quarter-log budget crosses 1 there
        assert_eq!(deletion_budget(54, LogBase::Natural), 0);
        assert_eq!(deletion_budget(55, LogBase::Natural), 1);
        assert_eq!(deletion_budget(1, LogBase::Natural), 0);
        // exact powers stay exact
        assert_eq!(deletion_budget(16, LogBase::Two), 1);
        assert_eq!(deletion_budget(256, LogBase::Two), 2);
        assert_eq!(deletion_budget(10_000, LogBase::Ten), 1);
        assert_eq!(deletion_budget(100_000_000, LogBase::Ten), 2);
    }

    #[test]
    fn descriptor_rejects_malformed_input() {
        let good = r#"{"group":{"factors":[5]},"lambda":[[1],[4]]}"#;
        let d: CayleyDescriptor = serde_json::from_str(good).unwrap();
        assert!(CayleyGraph::from_descriptor(&d).is_ok());
        let bad_coord = r#"{"group":{"factors":[5]},"lambda":[[1],[9]]}"#;
        let d: CayleyDescriptor = serde_json::from_str(bad_coord).unwrap();
        assert!(CayleyGraph::from_descriptor(&d).is_err());
        let not_closed = r#"{"group":{"factors":[5]},"lambda":[[2]]}"#;
        let d: CayleyDescriptor = serde_json::from_str(not_closed).unwrap();
        assert!(CayleyGraph::from_descriptor(&d).is_err());
        let has_zero = r#"{"group":{"factors":[5]},"lambda":[[0]]}"#;
        let d: CayleyDescriptor = serde_json::from_str(has_zero).unwrap();
        assert!(CayleyGraph::from_descriptor(&d).is_err());
    }
}
