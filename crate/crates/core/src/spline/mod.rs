//! B-spline and NURBS evaluation, and the parent -> parameter -> physical chain.

mod knot;
mod patch;

pub use knot::{BasisEval, KnotVector};
pub use patch::{Jacobian, NurbsPatch, Point, RationalBasis};
pub(crate) use patch::{flatten, unflatten};

use crate::error::{IgaError, Result};

/// Affine map from the parent box `[-1, 1]^d` onto the parameter box `bounds`.
///
/// Returns the parameter point and the Jacobian determinant of the map.
pub fn parent_to_param(bounds: &[(f64, f64)], parent: &[f64]) -> Result<(Vec<f64>, f64)> {
    if bounds.len() != parent.len() {
        return Err(IgaError::Argument("parent point and span bounds differ in dimension".into()));
    }
    let mut jac = 1.0;
    let mut pt = Vec::with_capacity(bounds.len());
    for (&(lo, hi), &t) in bounds.iter().zip(parent) {
        if !(hi > lo) {
            return Err(IgaError::DegenerateElement { lo, hi });
        }
        pt.push(0.5 * ((hi - lo) * t + (hi + lo)));
        jac *= 0.5 * (hi - lo);
    }
    Ok((pt, jac))
}
