//! Tensor-product NURBS patches: rational basis, geometry map, refinement.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::knot::{BasisEval, KnotVector};
use crate::error::{IgaError, Result};

/// Physical point, padded with zeros beyond the patch's spatial dimension.
pub type Point = [f64; 3];

/// `jac[i][j] = d x_i / d xi_j`; rows beyond `dim_space` and columns beyond
/// `dim_param` are zero.
pub type Jacobian = [[f64; 3]; 3];

/// Non-zero rational basis functions at one parameter point.
///
/// Entries are ordered by local index `a = a0 + (p+1) a1 + (p+1)(q+1) a2`, the same
/// order used by element connectivity.
#[derive(Debug, Clone)]
pub struct RationalBasis {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Parametric first derivatives, `derivs[a][j] = dR_a / d xi_j`.
    pub derivs: Vec<[f64; 3]>,
    pub spans: [usize; 3],
}

/// A NURBS patch with `dim_param` parametric and `dim_space` physical directions.
///
/// Control points are stored lattice-major with the first parametric direction
/// fastest: global index `A = i + n j + n m k` (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NurbsPatch {
    knots: Vec<KnotVector>,
    control_points: Vec<Point>,
    weights: Vec<f64>,
    dim_space: usize,
}

impl NurbsPatch {
    pub fn new(
        knots: Vec<KnotVector>,
        control_points: Vec<Point>,
        weights: Vec<f64>,
        dim_space: usize,
    ) -> Result<Self> {
        if knots.is_empty() || knots.len() > 3 {
            return Err(IgaError::Patch(format!("{} parametric directions", knots.len())));
        }
        if !(2..=3).contains(&dim_space) {
            return Err(IgaError::Patch(format!("spatial dimension {dim_space}")));
        }
        if knots.len() > dim_space {
            return Err(IgaError::Patch("more parametric than spatial directions".into()));
        }
        let count: usize = knots.iter().map(KnotVector::num_basis).product();
        if control_points.len() != count {
            return Err(IgaError::Patch(format!(
                "control net has {} points, knot vectors require {count}",
                control_points.len()
            )));
        }
        if weights.len() != count {
            return Err(IgaError::Patch(format!(
                "{} weights for {count} control points",
                weights.len()
            )));
        }
        if let Some(a) = weights.iter().position(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(IgaError::Patch(format!(
                "weight {} of control point {a} is not positive",
                weights[a]
            )));
        }
        if let Some(a) = control_points
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()) || p[dim_space..].iter().any(|&c| c != 0.0))
        {
            return Err(IgaError::Patch(format!("control point {a} has invalid coordinates")));
        }
        Ok(NurbsPatch { knots, control_points, weights, dim_space })
    }

    /// Axis-aligned block `[lo, hi]` with uniform knots and `elements[d]` spans per
    /// direction. Control points sit at the Greville abscissae, so the geometry map
    /// is affine and weights are one.
    pub fn block(degrees: &[usize], elements: &[usize], lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dp = degrees.len();
        if elements.len() != dp || lo.len() < dp || hi.len() != lo.len() {
            return Err(IgaError::Argument("inconsistent block dimensions".into()));
        }
        let knots = degrees
            .iter()
            .zip(elements)
            .map(|(&p, &e)| KnotVector::uniform(p, e, 0.0, 1.0))
            .collect::<Result<Vec<_>>>()?;
        let greville: Vec<Vec<f64>> = knots.iter().map(KnotVector::greville).collect();
        let counts: Vec<usize> = knots.iter().map(KnotVector::num_basis).collect();
        let total: usize = counts.iter().product();
        let mut cps = Vec::with_capacity(total);
        for a in 0..total {
            let ijk = unflatten(a, &counts);
            let mut x = [0.0; 3];
            for d in 0..lo.len() {
                let t = if d < dp { greville[d][ijk[d]] } else { 0.0 };
                x[d] = lo[d] + t * (hi[d] - lo[d]);
            }
            cps.push(x);
        }
        NurbsPatch::new(knots, cps, vec![1.0; total], lo.len())
    }

    pub fn dim_param(&self) -> usize {
        self.knots.len()
    }

    pub fn dim_space(&self) -> usize {
        self.dim_space
    }

    pub fn knot_vector(&self, dir: usize) -> &KnotVector {
        &self.knots[dir]
    }

    pub fn knot_vectors(&self) -> &[KnotVector] {
        &self.knots
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.knots.iter().map(KnotVector::degree).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.knots.iter().map(KnotVector::degree).max().unwrap_or(0)
    }

    /// Basis function counts per parametric direction.
    pub fn counts(&self) -> Vec<usize> {
        self.knots.iter().map(KnotVector::num_basis).collect()
    }

    pub fn num_control_points(&self) -> usize {
        self.control_points.len()
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Global index of lattice position `ijk`.
    pub fn index(&self, ijk: &[usize]) -> usize {
        flatten(ijk, &self.counts())
    }

    /// Lattice position of global index `a`.
    pub fn lattice(&self, a: usize) -> [usize; 3] {
        unflatten(a, &self.counts())
    }

    pub fn param_bounds(&self) -> Vec<(f64, f64)> {
        self.knots.iter().map(|kv| (kv.first(), kv.last())).collect()
    }

    pub fn param_center(&self) -> Vec<f64> {
        self.param_bounds().iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Bounding box of the control net (contains the patch by the convex hull property).
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.control_points {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    pub fn diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (0..3).map(|d| (hi[d] - lo[d]).powi(2)).sum::<f64>().sqrt()
    }

    fn check_point(&self, pt: &[f64]) -> Result<()> {
        if pt.len() != self.dim_param() {
            return Err(IgaError::Argument(format!(
                "parameter point has {} coordinates, patch has {} directions",
                pt.len(),
                self.dim_param()
            )));
        }
        Ok(())
    }

    /// Knot spans containing `pt`, one per parametric direction.
    pub fn spans_at(&self, pt: &[f64]) -> Result<[usize; 3]> {
        self.check_point(pt)?;
        let mut spans = [0; 3];
        for (d, kv) in self.knots.iter().enumerate() {
            spans[d] = kv.find_span(pt[d])?;
        }
        Ok(spans)
    }

    /// Rational basis values and first parametric derivatives at `pt`.
    pub fn rational_basis(&self, pt: &[f64]) -> Result<RationalBasis> {
        let spans = self.spans_at(pt)?;
        Ok(self.rational_basis_in_spans(&spans, pt))
    }

    /// Rational basis on the given spans; `pt` may lie on their closure.
    pub fn rational_basis_in_spans(&self, spans: &[usize; 3], pt: &[f64]) -> RationalBasis {
        let dp = self.dim_param();
        let uni: Vec<BasisEval> = (0..dp)
            .map(|d| self.knots[d].basis_and_derivs_in_span(spans[d], pt[d], 1))
            .collect();
        let sizes: Vec<usize> = uni.iter().map(|b| b.ders[0].len()).collect();
        let firsts: Vec<usize> = uni.iter().map(BasisEval::first_index).collect();
        let counts = self.counts();
        let n_local: usize = sizes.iter().product();

        let mut indices = Vec::with_capacity(n_local);
        let mut values = Vec::with_capacity(n_local);
        let mut derivs = Vec::with_capacity(n_local);
        let mut w_sum = 0.0;
        let mut dw_sum = [0.0; 3];
        for a in 0..n_local {
            let loc = unflatten(a, &sizes);
            let mut glob = [0; 3];
            for d in 0..dp {
                glob[d] = firsts[d] + loc[d];
            }
            let idx = flatten(&glob[..dp], &counts);
            let w = self.weights[idx];
            let mut n = w;
            let mut dn = [w; 3];
            for d in 0..dp {
                n *= uni[d].ders[0][loc[d]];
                for (j, dnj) in dn.iter_mut().enumerate().take(dp) {
                    *dnj *= if j == d { uni[d].ders[1][loc[d]] } else { uni[d].ders[0][loc[d]] };
                }
            }
            for dnj in dn.iter_mut().skip(dp) {
                *dnj = 0.0;
            }
            w_sum += n;
            for j in 0..3 {
                dw_sum[j] += dn[j];
            }
            indices.push(idx);
            values.push(n);
            derivs.push(dn);
        }
        let inv = 1.0 / w_sum;
        for (v, dv) in values.iter_mut().zip(derivs.iter_mut()) {
            let r = *v * inv;
            for j in 0..3 {
                dv[j] = (dv[j] - r * dw_sum[j]) * inv;
            }
            *v = r;
        }
        RationalBasis { indices, values, derivs, spans: *spans }
    }

    /// Physical point and parametric Jacobian at `pt`.
    pub fn eval_geometry(&self, pt: &[f64]) -> Result<(Point, Jacobian)> {
        let basis = self.rational_basis(pt)?;
        Ok(self.geometry_from_basis(&basis))
    }

    pub fn geometry_from_basis(&self, basis: &RationalBasis) -> (Point, Jacobian) {
        let mut x = [0.0; 3];
        let mut jac = [[0.0; 3]; 3];
        for ((&a, &r), dr) in basis.indices.iter().zip(&basis.values).zip(&basis.derivs) {
            let p = &self.control_points[a];
            for i in 0..self.dim_space {
                x[i] += r * p[i];
                for j in 0..3 {
                    jac[i][j] += dr[j] * p[i];
                }
            }
        }
        (x, jac)
    }

    /// Inserts `value` once into the knot vector of direction `dir` (Boehm's
    /// algorithm on homogeneous coordinates). The geometry is unchanged.
    pub fn insert_knot(&self, dir: usize, value: f64) -> Result<NurbsPatch> {
        let kv = &self.knots[dir];
        if !(value > kv.first() && value < kv.last()) {
            return Err(IgaError::Argument(format!("cannot insert knot {value} at the boundary")));
        }
        let p = kv.degree();
        let u = kv.knots();
        let k = kv.find_span(value)?;
        let new_kv = kv.with_inserted(value)?;

        let counts = self.counts();
        let mut new_counts = counts.clone();
        new_counts[dir] += 1;
        let total_new: usize = new_counts.iter().product();
        let mut hom = vec![[0.0; 4]; total_new];

        let old_hom = |a: usize| -> [f64; 4] {
            let w = self.weights[a];
            let c = self.control_points[a];
            [c[0] * w, c[1] * w, c[2] * w, w]
        };
        for (b, slot) in hom.iter_mut().enumerate() {
            let mut ijk = unflatten(b, &new_counts);
            let i = ijk[dir];
            let q = if i + p <= k {
                old_hom(flatten(&ijk[..counts.len()], &counts))
            } else if i > k {
                ijk[dir] = i - 1;
                old_hom(flatten(&ijk[..counts.len()], &counts))
            } else {
                let alpha = (value - u[i]) / (u[i + p] - u[i]);
                let cur = old_hom(flatten(&ijk[..counts.len()], &counts));
                ijk[dir] = i - 1;
                let prev = old_hom(flatten(&ijk[..counts.len()], &counts));
                let mut out = [0.0; 4];
                for c in 0..4 {
                    out[c] = alpha * cur[c] + (1.0 - alpha) * prev[c];
                }
                out
            };
            *slot = q;
        }
        let mut knots = self.knots.clone();
        knots[dir] = new_kv;
        let (cps, ws) = from_homogeneous(&hom, self.dim_space);
        NurbsPatch::new(knots, cps, ws, self.dim_space)
    }

    /// Raises the degree per direction to `degrees` without changing the geometry.
    ///
    /// Interior knot multiplicities grow with the degree so the old spline space is
    /// contained in the new one; the new homogeneous control net is then recovered
    /// exactly by interpolation at the Greville abscissae of the new space.
    pub fn elevate_to(&self, degrees: &[usize]) -> Result<NurbsPatch> {
        let dp = self.dim_param();
        if degrees.len() != dp {
            return Err(IgaError::Argument(format!(
                "{} target degrees for {dp} directions",
                degrees.len()
            )));
        }
        let mut new_knots = Vec::with_capacity(dp);
        for (kv, &target) in self.knots.iter().zip(degrees) {
            let p = kv.degree();
            if target < p {
                return Err(IgaError::Argument(format!("cannot lower degree {p} to {target}")));
            }
            let t = target - p;
            let mut knots = Vec::new();
            for v in kv.breakpoints() {
                knots.extend(std::iter::repeat_n(v, kv.multiplicity(v) + t));
            }
            new_knots.push(KnotVector::new(knots, target)?);
        }
        if new_knots == self.knots {
            return Ok(self.clone());
        }
        self.reproject(new_knots)
    }

    /// Represents this patch on a spline space that contains the current one.
    fn reproject(&self, new_knots: Vec<KnotVector>) -> Result<NurbsPatch> {
        let dp = self.dim_param();
        let greville: Vec<Vec<f64>> = new_knots.iter().map(KnotVector::greville).collect();
        let new_counts: Vec<usize> = new_knots.iter().map(KnotVector::num_basis).collect();
        let total: usize = new_counts.iter().product();

        // Homogeneous values of the old patch on the Greville grid.
        let mut data = vec![[0.0; 4]; total];
        for (g, slot) in data.iter_mut().enumerate() {
            let ijk = unflatten(g, &new_counts);
            let pt: Vec<f64> = (0..dp).map(|d| greville[d][ijk[d]]).collect();
            let basis = self.rational_basis(&pt)?;
            // R_A * W = N_A w_A; recover W from the weights.
            let w: f64 = 1.0
                / basis
                    .indices
                    .iter()
                    .zip(&basis.values)
                    .map(|(&a, &r)| r / self.weights[a])
                    .sum::<f64>();
            let (x, _) = self.geometry_from_basis(&basis);
            *slot = [x[0] * w, x[1] * w, x[2] * w, w];
        }

        // Invert the collocation matrix one direction at a time.
        for d in 0..dp {
            let n = new_counts[d];
            let mut colloc = DMatrix::zeros(n, n);
            for (r, &g) in greville[d].iter().enumerate() {
                let b = new_knots[d].basis_and_derivs(g, 0)?;
                for (j, v) in b.values().iter().enumerate() {
                    colloc[(r, b.first_index() + j)] = *v;
                }
            }
            let lu = colloc.lu();
            let stride: usize = new_counts[..d].iter().product();
            for base in 0..total {
                if unflatten(base, &new_counts)[d] != 0 {
                    continue;
                }
                for c in 0..4 {
                    let rhs = DVector::from_iterator(n, (0..n).map(|i| data[base + i * stride][c]));
                    let sol = lu.solve(&rhs).ok_or_else(|| {
                        IgaError::Patch("singular collocation matrix during degree elevation".into())
                    })?;
                    for i in 0..n {
                        data[base + i * stride][c] = sol[i];
                    }
                }
            }
        }
        let (cps, ws) = from_homogeneous(&data, self.dim_space);
        NurbsPatch::new(new_knots, cps, ws, self.dim_space)
    }

    /// Splits every non-degenerate span of direction `dir` into `parts` equal spans.
    pub fn subdivide_direction(&self, dir: usize, parts: usize) -> Result<NurbsPatch> {
        if parts == 0 {
            return Err(IgaError::Argument("subdivision count must be positive".into()));
        }
        let mut patch = self.clone();
        for (_, lo, hi) in self.knots[dir].spans() {
            for s in 1..parts {
                patch = patch.insert_knot(dir, lo + (hi - lo) * s as f64 / parts as f64)?;
            }
        }
        Ok(patch)
    }
}

fn from_homogeneous(hom: &[[f64; 4]], dim_space: usize) -> (Vec<Point>, Vec<f64>) {
    let mut cps = Vec::with_capacity(hom.len());
    let mut ws = Vec::with_capacity(hom.len());
    for h in hom {
        let w = h[3];
        let mut x = [0.0; 3];
        for d in 0..dim_space {
            x[d] = h[d] / w;
        }
        cps.push(x);
        ws.push(w);
    }
    (cps, ws)
}

pub(crate) fn flatten(ijk: &[usize], counts: &[usize]) -> usize {
    let mut a = 0;
    let mut stride = 1;
    for (i, n) in ijk.iter().zip(counts) {
        a += i * stride;
        stride *= n;
    }
    a
}

pub(crate) fn unflatten(mut a: usize, counts: &[usize]) -> [usize; 3] {
    let mut out = [0; 3];
    for (d, &n) in counts.iter().enumerate() {
        out[d] = a % n;
        a /= n;
    }
    out
}
