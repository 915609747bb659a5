//! Exact tools for studying how often a small graph appears as an induced
//! subgraph of Cayley graphs of finite abelian groups and of their iterated
//! balanced blow-ups.
//!
//! Everything here is exact or certified: counts are arbitrary-precision
//! integers, thresholds are rationals, and every analytic comparison goes
//! through outward-rounded interval arithmetic that only reports a verdict
//! when the interval is conclusive.

pub mod blowup;
pub mod bounds;
pub mod cayley;
pub mod certify;
pub mod embed;
pub mod enumerate;
pub mod graph;
pub mod graph6;
pub mod group;
pub mod interval;
pub mod iso;
pub mod report;

pub mod guide;

pub use graph::{Graph, VertexSet};
pub use group::{AbelianGroup, GroupElement};
