//! Maximization of non-monotone DR-submodular functions over polytopes.
//!
//! The crate provides an offline Frank-Wolfe variant that works on general
//! (not necessarily down-closed) polytopes, online stochastic gradient
//! ascent for down-closed polytopes, the LP and projection oracles both
//! need, seeded generators for quadratic, softmax-extension and revenue
//! objectives, and an experiment harness writing CSV.

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod instances;
pub mod objectives;
pub mod oracles;
pub mod point;
pub mod polytope;
pub mod seed;

pub use error::{Error, Result};
pub use point::Point;
pub use polytope::{tight_upper_bounds, Polytope, PolytopeReport};
