//! Distance-restricted colorings of finite sets of rationals and of the
//! integers.
//!
//! A `k × m` [`RestrictionArray`] assigns each color `C_j` the distances
//! listed in column `j`; a coloring is valid when no two points at one of
//! those distances both receive `C_j`. The crate provides the exact
//! verifier, a complete finite solver, periodic colorings of ℤ, a
//! constructive colorer for arrays with enough columns, and lower-bound
//! witnesses built from k-distance sets.

pub mod constructive;
pub mod family;
mod graph;
pub mod io;
pub mod model;
pub mod periodic;
pub mod rational;
pub mod solver;
pub mod witnesses;

pub use graph::SearchStats;
pub use model::{
    canonicalize, distinct_restrictions, rho, scale_instance, verify_coloring, Coloring,
    ModelError, PointSet, RestrictionArray, VerifyError, Violation,
};
pub use rational::Rational;
