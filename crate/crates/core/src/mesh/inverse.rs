use nalgebra::{DMatrix, DVector};

use crate::error::{IgaError, Result};
use crate::spline::{NurbsPatch, Point};

pub const INVERSION_MAX_ITERATIONS: usize = 30;

/// Relative residual accepted as converged, scaled by the patch diagonal.
const ACCEPT_TOL: f64 = 1e-10;
/// Newton keeps iterating below the acceptance tolerance until this is reached or it stalls.
const TARGET_TOL: f64 = 1e-14;

/// Parameter point whose image is `x`, by (Gauss-)Newton iteration on `x - V(xi)`
/// starting at `seed`. Iterates are clamped to the knot box.
pub fn inverse_map(patch: &NurbsPatch, x: &Point, seed: &[f64]) -> Result<Vec<f64>> {
    let dp = patch.dim_param();
    let ds = patch.dim_space();
    if seed.len() != dp {
        return Err(IgaError::Argument("seed dimension mismatch".into()));
    }
    let bounds = patch.param_bounds();
    let scale = patch.diagonal().max(f64::MIN_POSITIVE);
    let mut pt: Vec<f64> = seed.iter().zip(&bounds).map(|(&s, &(a, b))| s.clamp(a, b)).collect();
    let mut residual = f64::INFINITY;

    for it in 0..INVERSION_MAX_ITERATIONS {
        let (y, jac) = patch.eval_geometry(&pt)?;
        let r: Vec<f64> = (0..ds).map(|i| x[i] - y[i]).collect();
        residual = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual <= TARGET_TOL * scale {
            return Ok(pt);
        }
        let j = DMatrix::from_fn(ds, dp, |i, k| jac[i][k]);
        let jt = j.transpose();
        let normal = &jt * &j;
        let rhs = &jt * DVector::from_vec(r);
        let jnorm = normal.norm();
        let det_ok = normal.determinant().abs() > 1e-14 * jnorm.powi(dp as i32);
        let step = if det_ok { normal.lu().solve(&rhs) } else { None };
        let Some(step) = step else {
            if residual <= ACCEPT_TOL * scale {
                return Ok(pt);
            }
            return Err(IgaError::Inversion { residual, iterations: it, singular: true });
        };
        let mut moved = 0.0f64;
        for k in 0..dp {
            let next = (pt[k] + step[k]).clamp(bounds[k].0, bounds[k].1);
            moved = moved.max((next - pt[k]).abs() / (bounds[k].1 - bounds[k].0));
            pt[k] = next;
        }
        if moved < 1e-16 {
            // Stalled: either converged to round-off or pinned against the box.
            break;
        }
    }
    let (y, _) = patch.eval_geometry(&pt)?;
    residual = residual.min((0..ds).map(|i| (x[i] - y[i]).powi(2)).sum::<f64>().sqrt());
    if residual <= ACCEPT_TOL * scale {
        Ok(pt)
    } else {
        Err(IgaError::Inversion { residual, iterations: INVERSION_MAX_ITERATIONS, singular: false })
    }
}

/// Inversion from the patch's parametric center, retried from a 3^d grid of seeds
/// when the center does not converge.
pub fn locate_point(patch: &NurbsPatch, x: &Point) -> Result<Vec<f64>> {
    let center = patch.param_center();
    let first = match inverse_map(patch, x, &center) {
        Ok(pt) => return Ok(pt),
        Err(e) => e,
    };
    let bounds = patch.param_bounds();
    let dp = patch.dim_param();
    let fractions = [1.0 / 6.0, 0.5, 5.0 / 6.0];
    for s in 0..3usize.pow(dp as u32) {
        let mut rest = s;
        let seed: Vec<f64> = bounds
            .iter()
            .map(|&(a, b)| {
                let f = fractions[rest % 3];
                rest /= 3;
                a + f * (b - a)
            })
            .collect();
        if let Ok(pt) = inverse_map(patch, x, &seed) {
            return Ok(pt);
        }
    }
    Err(first)
}
