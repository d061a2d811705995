//! Exact-rational convex feasibility with symmetry folding.
//!
//! The crate is layered bottom-up: rational linear algebra, folding maps, an
//! exact simplex solver, the central-cut ellipsoid method with a folded driver,
//! semidefinite sets with their separation oracle, sum-of-squares refutations
//! over 0/1 polynomial systems, and the graph-isomorphism harness.

pub mod ellipsoid;
pub mod error;
pub mod folding;
pub mod iso;
pub mod json;
pub mod linalg;
pub mod lp;
pub mod par;
pub mod rational;
pub mod sdp;
pub mod sos;
pub mod trace;

pub use error::{Error, Result};
pub use rational::Rat;
