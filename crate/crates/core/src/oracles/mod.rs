//! Geometric subroutines consumed by the algorithms: linear maximization over
//! a polytope and Euclidean projection onto it.

pub mod lp;
pub mod projection;

pub use lp::{lp_solve, LpSolution, LpStatus, Sense};
pub use projection::{
    dykstra_iteration_cap, project_active_set, project_dykstra, project_simplex_iterative, project_simplex_sorted, DYKSTRA_TOL,
};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::polytope::Polytope;

/// A vertex of `polytope` maximizing `⟨direction, v⟩`.
pub fn lmo(polytope: &Polytope, direction: &Point) -> Result<Point> {
    if direction.dim() != polytope.dim() {
        return Err(Error::DimensionMismatch {
            expected: polytope.dim(),
            found: direction.dim(),
        });
    }
    if !direction.is_finite() {
        return Err(Error::InvalidInput("LMO direction must be finite".into()));
    }
    let lower = vec![0.0; polytope.dim()];
    lp_solve(
        polytope.a(),
        polytope.b(),
        &lower,
        polytope.upper(),
        direction.as_slice(),
        Sense::Maximize,
    )?
    .into_point()
}

/// Euclidean projection onto `polytope`.
///
/// Feasible points are returned unchanged. Capped simplices whose box is
/// redundant go through [`project_simplex_sorted`]; everything else is
/// solved exactly by [`project_active_set`].
pub fn project(polytope: &Polytope, x: &Point) -> Result<Point> {
    if x.dim() != polytope.dim() {
        return Err(Error::DimensionMismatch {
            expected: polytope.dim(),
            found: x.dim(),
        });
    }
    if polytope.contains(x, 0.0)? {
        return Ok(x.clone());
    }
    match polytope.simplex_radius() {
        Some(radius) => Ok(project_simplex_sorted(x, radius)),
        None => project_active_set(polytope, x),
    }
}
