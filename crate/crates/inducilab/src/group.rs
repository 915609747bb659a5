//! Finite abelian groups presented as products of cyclic factors, with the
//! negation-pairing bookkeeping that connection-set sampling runs on.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Errors from group construction or element arithmetic. Structural problems
/// are reported, never panicked, so callers can surface them verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    /// A group needs at least one cyclic factor.
    EmptyFactorList,
    /// Factor orders must be positive.
    ZeroFactor { position: usize },
    /// The product of the factor orders does not fit in 64 bits.
    OrderOverflow,
    /// Element has the wrong number of coordinates for this group.
    RankMismatch { expected: usize, got: usize },
    /// A coordinate is not reduced modulo its factor order.
    CoordinateOutOfRange {
        position: usize,
        value: u64,
        modulus: u64,
    },
    /// The negation pair of the identity is not defined.
    KappaOfIdentity,
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::EmptyFactorList => write!(f, "group needs at least one cyclic factor"),
            GroupError::ZeroFactor { position } => {
                write!(f, "factor order at position {position} is zero")
            }
            GroupError::OrderOverflow => write!(f, "group order overflows u64"),
            GroupError::RankMismatch { expected, got } => {
                write!(f, "element has {got} coordinates, group has rank {expected}")
            }
            GroupError::CoordinateOutOfRange {
                position,
                value,
                modulus,
            } => write!(
                f,
                "coordinate {value} at position {position} is not reduced modulo {modulus}"
            ),
            GroupError::KappaOfIdentity => {
                write!(f, "negation pair is defined for nonzero elements only")
            }
        }
    }
}

impl std::error::Error for GroupError {}

/// An element, stored as one reduced coordinate per cyclic factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    coordinates: Vec<u64>,
}

impl GroupElement {
    /// The reduced coordinates, one per factor.
    pub fn coordinates(&self) -> &[u64] {
        &self.coordinates
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coordinates.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct GroupDescriptor {
    factors: Vec<u64>,
}

/// The unordered pair `{g, -g}`, a singleton when `g` is its own negative.
/// Members are sorted by mixed-radix index, so the first one is the class
/// representative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KappaClass {
    members: Vec<GroupElement>,
}

impl KappaClass {
    /// One or two elements, ascending by index.
    pub fn members(&self) -> &[GroupElement] {
        &self.members
    }

    /// The smallest-index member.
    pub fn representative(&self) -> &GroupElement {
        &self.members[0]
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// `Z/d_1 x ... x Z/d_r`, given by its factor orders. Elements are indexed
/// `0..order` in mixed radix with the first coordinate most significant, so
/// iteration order is lexicographic on coordinate tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupDescriptor", into = "GroupDescriptor")]
pub struct AbelianGroup {
    factor_orders: Vec<u64>,
    order: u64,
}

impl TryFrom<GroupDescriptor> for AbelianGroup {
    type Error = GroupError;

    fn try_from(d: GroupDescriptor) -> Result<Self, GroupError> {
        AbelianGroup::new(d.factors)
    }
}

impl From<AbelianGroup> for GroupDescriptor {
    fn from(g: AbelianGroup) -> GroupDescriptor {
        GroupDescriptor {
            factors: g.factor_orders,
        }
    }
}

impl AbelianGroup {
    /// Builds the group, rejecting zero factors and orders beyond u64.
    pub fn new(factor_orders: Vec<u64>) -> Result<Self, GroupError> {
        if factor_orders.is_empty() {
            return Err(GroupError::EmptyFactorList);
        }
        let mut order: u64 = 1;
        for (position, &d) in factor_orders.iter().enumerate() {
            if d == 0 {
                return Err(GroupError::ZeroFactor { position });
            }
            order = order.checked_mul(d).ok_or(GroupError::OrderOverflow)?;
        }
        Ok(AbelianGroup {
            factor_orders,
            order,
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn factor_orders(&self) -> &[u64] {
        &self.factor_orders
    }

    pub fn rank(&self) -> usize {
        self.factor_orders.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coordinates: vec![0; self.factor_orders.len()],
        }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        g.coordinates.iter().all(|&c| c == 0)
    }

    /// Decodes a mixed-radix index. Panics if `index >= order`.
    pub fn element(&self, index: u64) -> GroupElement {
        assert!(
            index < self.order,
            "element index {index} out of range for group of order {}",
            self.order
        );
        let mut coordinates = vec![0; self.factor_orders.len()];
        let mut rest = index;
        for (slot, &d) in coordinates.iter_mut().zip(&self.factor_orders).rev() {
            *slot = rest % d;
            rest /= d;
        }
        GroupElement { coordinates }
    }

    /// Builds an element from raw coordinates, validating rank and reduction.
    pub fn element_from_coordinates(&self, coords: &[u64]) -> Result<GroupElement, GroupError> {
        let g = GroupElement {
            coordinates: coords.to_vec(),
        };
        self.validate(&g)?;
        Ok(g)
    }

    /// Encodes an element back to its mixed-radix index.
    pub fn index_of(&self, g: &GroupElement) -> Result<u64, GroupError> {
        self.validate(g)?;
        let mut index = 0u64;
        for (&c, &d) in g.coordinates.iter().zip(&self.factor_orders) {
            index = index * d + c;
        }
        Ok(index)
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| self.element(i))
    }

    fn validate(&self, g: &GroupElement) -> Result<(), GroupError> {
        if g.coordinates.len() != self.factor_orders.len() {
            return Err(GroupError::RankMismatch {
                expected: self.factor_orders.len(),
                got: g.coordinates.len(),
            });
        }
        for (position, (&c, &d)) in g.coordinates.iter().zip(&self.factor_orders).enumerate() {
            if c >= d {
                return Err(GroupError::CoordinateOutOfRange {
                    position,
                    value: c,
                    modulus: d,
                });
            }
        }
        Ok(())
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(g)?;
        self.validate(h)?;
        let coordinates = g
            .coordinates
            .iter()
            .zip(&h.coordinates)
            .zip(&self.factor_orders)
            .map(|((&a, &b), &d)| (a + b) % d)
            .collect();
        Ok(GroupElement { coordinates })
    }

    pub fn neg(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(g)?;
        let coordinates = g
            .coordinates
            .iter()
            .zip(&self.factor_orders)
            .map(|(&a, &d)| if a == 0 { 0 } else { d - a })
            .collect();
        Ok(GroupElement { coordinates })
    }

    pub fn sub(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        let neg_h = self.neg(h)?;
        self.add(g, &neg_h)
    }

    /// The negation pair `{g, -g}` of a nonzero element.
    pub fn kappa(&self, g: &GroupElement) -> Result<KappaClass, GroupError> {
        self.validate(g)?;
        if self.is_identity(g) {
            return Err(GroupError::KappaOfIdentity);
        }
        let n = self.neg(g)?;
        let gi = self.index_of(g)?;
        let ni = self.index_of(&n)?;
        let members = if gi == ni {
            vec![g.clone()]
        } else if gi < ni {
            vec![g.clone(), n]
        } else {
            vec![n, g.clone()]
        };
        Ok(KappaClass { members })
    }

    /// All negation-pair classes of nonzero elements, ascending by
    /// representative index. There are at least `(order - 1) / 2` of them.
    pub fn kappa_classes(&self) -> Vec<KappaClass> {
        let mut classes = Vec::new();
        for index in 1..self.order {
            let g = self.element(index);
            let neg_index = self
                .index_of(&self.neg(&g).expect("decoded element is valid"))
                .expect("negation stays valid");
            if neg_index >= index {
                classes.push(self.kappa(&g).expect("nonzero by construction"));
            }
        }
        classes
    }

    /// All `x` with `x + x = t`, ascending by index. Either empty or a coset
    /// of the 2-torsion subgroup, so its size is the same for every reachable
    /// `t`.
    pub fn doubling_solutions(&self, t: &GroupElement) -> Result<Vec<GroupElement>, GroupError> {
        self.validate(t)?;
        let mut solutions = Vec::new();
        for x in self.elements() {
            if self.add(&x, &x)? == *t {
                solutions.push(x);
            }
        }
        Ok(solutions)
    }

    /// Whether the closure of `generators` under addition is the whole group.
    pub fn is_generating(&self, generators: &[GroupElement]) -> Result<bool, GroupError> {
        let n = usize::try_from(self.order).map_err(|_| GroupError::OrderOverflow)?;
        let gen_indices: Vec<u64> = generators
            .iter()
            .map(|g| self.index_of(g))
            .collect::<Result<_, _>>()?;
        let mut reached = vec![false; n];
        reached[0] = true;
        let mut frontier = vec![0u64];
        let mut count = 1usize;
        while let Some(xi) = frontier.pop() {
            let x = self.element(xi);
            for gi in &gen_indices {
                let g = self.element(*gi);
                let yi = self.index_of(&self.add(&x, &g)?)?;
                if !reached[yi as usize] {
                    reached[yi as usize] = true;
                    count += 1;
                    frontier.push(yi);
                }
            }
        }
        Ok(count == n)
    }
}
