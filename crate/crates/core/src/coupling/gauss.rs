use super::{InterfaceQuadrature, InterfaceSpec};
use crate::elasticity::face_point;
use crate::error::{IgaError, Result};
use crate::mesh::{build_elements, inverse_map, locate_point, trace_of_face, Face, MultiPatchModel, PatchMesh};
use crate::quadrature::TensorRule;
use crate::spline::{parent_to_param, NurbsPatch, Point};

/// One interface quadrature point seen from both patches.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPointPair {
    pub xi1: Vec<f64>,
    pub e1: usize,
    pub xi2: Vec<f64>,
    pub e2: usize,
    pub x: Point,
    /// Unit normal pointing out of patch 1.
    pub normal: [f64; 3],
    /// Quadrature weight times the physical surface measure.
    pub weight: f64,
    /// Physical diameter of the patch-1 trace element holding the point.
    pub h_e: f64,
}

/// Points per direction used when none is requested: `max(p1, p2) + 1`.
pub fn default_gp_count(model: &MultiPatchModel, iface: &InterfaceSpec) -> usize {
    iface.patches.iter().map(|&p| model.patches[p].max_degree()).max().unwrap_or(1) + 1
}

/// Paired Gauss points of interface `index`, integrated on the trace mesh of patch 1.
///
/// With [`InterfaceQuadrature::Merged`] every trace element is first cut along the
/// knot lines of patch 2 so that no quadrature cell straddles a patch-2 element.
pub fn generate_interface_gps(
    model: &MultiPatchModel,
    index: usize,
    ngp: Option<usize>,
) -> Result<Vec<GaussPointPair>> {
    let iface = model
        .interfaces
        .get(index)
        .ok_or_else(|| IgaError::Argument(format!("no interface {index}")))?;
    let ngp = ngp.unwrap_or_else(|| default_gp_count(model, iface));
    if ngp == 0 {
        return Err(IgaError::Argument("interface rule needs at least one point".into()));
    }
    let (id1, id2) = (iface.patches[0], iface.patches[1]);
    let (p1, p2) = (&model.patches[id1], &model.patches[id2]);
    let (f1, f2) = (iface.faces[0], iface.faces[1]);
    let mesh1 = build_elements(p1, id1);
    let mesh2 = build_elements(p2, id2);
    let trace = trace_of_face(p1, &mesh1, f1)?;
    let nf = trace.free_dirs.len();
    let cuts = match iface.quadrature {
        InterfaceQuadrature::Merged => knot_cuts(p1, f1, p2, f2, index)?,
        InterfaceQuadrature::Trace => vec![Vec::new(); nf],
    };
    let rule = TensorRule::new(&vec![ngp; nf]);
    let ctx = Ctx { p1, p2, f1, f2, mesh1: &mesh1, mesh2: &mesh2, rule: &rule, index };

    let work = |te: &crate::mesh::TraceElement| -> Result<Vec<GaussPointPair>> {
        let h_e = diameter(p1, f1, &te.bounds)?;
        let mut out = Vec::new();
        for cell in split_cells(&te.bounds, &cuts) {
            ctx.cell_points(te.element, &cell, h_e, &mut out)?;
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    let chunks: Vec<Vec<GaussPointPair>> = {
        use rayon::prelude::*;
        trace.elements.par_iter().map(work).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Vec<GaussPointPair>> = trace.elements.iter().map(work).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

struct Ctx<'a> {
    p1: &'a NurbsPatch,
    p2: &'a NurbsPatch,
    f1: Face,
    f2: Face,
    mesh1: &'a PatchMesh,
    mesh2: &'a PatchMesh,
    rule: &'a TensorRule,
    index: usize,
}

impl Ctx<'_> {
    fn cell_points(
        &self,
        e1: usize,
        cell: &[(f64, f64)],
        h_e: f64,
        out: &mut Vec<GaussPointPair>,
    ) -> Result<()> {
        let elem1 = &self.mesh1.elements[e1];
        let mut seed: Option<Vec<f64>> = None;
        for (q, parent) in self.rule.points.iter().enumerate() {
            let (fc, jp) = parent_to_param(cell, parent)?;
            let xi1 = self.f1.embed(self.p1, &fc);
            let fp = face_point(self.p1, self.f1, &elem1.spans, &xi1);
            let xi2 = self.invert(&fp.x, seed.as_deref())?;
            let e2 = self.mesh2.locate_element(self.p2, &xi2)?;
            seed = Some(xi2.clone());
            out.push(GaussPointPair {
                xi1,
                e1,
                xi2,
                e2,
                x: fp.x,
                normal: fp.normal,
                weight: self.rule.weights[q] * jp * fp.area_density,
                h_e,
            });
        }
        Ok(())
    }

    /// Parameter point on face 2 of patch 2 whose image is `x`.
    fn invert(&self, x: &Point, seed: Option<&[f64]>) -> Result<Vec<f64>> {
        let mismatch = |reason: String| IgaError::InterfaceMismatch { interface: self.index, point: *x, reason };
        let attempt = match seed {
            Some(s) => inverse_map(self.p2, x, s).or_else(|_| locate_point(self.p2, x)),
            None => locate_point(self.p2, x),
        };
        let mut xi2 = attempt.map_err(|e| mismatch(e.to_string()))?;
        let (lo, hi) = self.p2.param_bounds()[self.f2.dir];
        let on_face = self.f2.value(self.p2);
        if (xi2[self.f2.dir] - on_face).abs() > 1e-8 * (hi - lo) {
            return Err(mismatch(format!("inverse lies off face {}", self.f2)));
        }
        xi2[self.f2.dir] = on_face;
        let (y, _) = self.p2.eval_geometry(&xi2)?;
        let dist = (0..3).map(|d| (x[d] - y[d]).powi(2)).sum::<f64>().sqrt();
        if dist > 1e-8 * self.p2.diagonal() {
            return Err(mismatch(format!("forward evaluation misses by {dist:.3e}")));
        }
        Ok(xi2)
    }
}

/// Largest distance between physical corners of a face cell.
fn diameter(patch: &NurbsPatch, face: Face, bounds: &[(f64, f64)]) -> Result<f64> {
    let nf = bounds.len();
    let corners: Vec<Point> = (0..(1usize << nf))
        .map(|c| {
            let fc: Vec<f64> =
                bounds.iter().enumerate().map(|(k, &(a, b))| if c >> k & 1 == 0 { a } else { b }).collect();
            patch.eval_geometry(&face.embed(patch, &fc)).map(|(x, _)| x)
        })
        .collect::<Result<_>>()?;
    let mut d = 0.0f64;
    for (i, a) in corners.iter().enumerate() {
        for b in &corners[i + 1..] {
            d = d.max((0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt());
        }
    }
    Ok(d)
}

/// Face-1 coordinates of the interior knot lines of face 2, per free direction of face 1.
///
/// Each patch-2 knot line is sampled at two points and inverted onto patch 1; it yields
/// a cut only when one face-1 coordinate stays constant along it. Skewed lines are skipped.
fn knot_cuts(p1: &NurbsPatch, f1: Face, p2: &NurbsPatch, f2: Face, index: usize) -> Result<Vec<Vec<f64>>> {
    let free1 = f1.free_dirs(p1.dim_param());
    let free2 = f2.free_dirs(p2.dim_param());
    let b1 = p1.param_bounds();
    let b2 = p2.param_bounds();
    let mut cuts = vec![Vec::new(); free1.len()];
    for (k2, &d2) in free2.iter().enumerate() {
        let kv = p2.knot_vector(d2);
        let bps = kv.breakpoints();
        for &knot in &bps[1..bps.len() - 1] {
            // Points along the knot line: the other free direction sampled twice.
            let samples: Vec<Vec<f64>> = if free2.len() == 1 {
                vec![vec![knot]]
            } else {
                let other = free2[1 - k2];
                let (a, b) = b2[other];
                [1.0 / 3.0, 2.0 / 3.0]
                    .iter()
                    .map(|t| {
                        let mut fc = vec![0.0; 2];
                        fc[k2] = knot;
                        fc[1 - k2] = a + t * (b - a);
                        fc
                    })
                    .collect()
            };
            let mut images = Vec::new();
            for fc in samples {
                let (x, _) = p2.eval_geometry(&f2.embed(p2, &fc))?;
                let xi = locate_point(p1, &x).map_err(|e| IgaError::InterfaceMismatch {
                    interface: index,
                    point: x,
                    reason: e.to_string(),
                })?;
                images.push(free1.iter().map(|&d| xi[d]).collect::<Vec<f64>>());
            }
            for (k1, &d1) in free1.iter().enumerate() {
                let span = b1[d1].1 - b1[d1].0;
                let v = images[0][k1];
                if images.iter().all(|im| (im[k1] - v).abs() < 1e-9 * span) {
                    cuts[k1].push(v);
                    break;
                }
            }
        }
    }
    for c in &mut cuts {
        c.sort_by(f64::total_cmp);
    }
    Ok(cuts)
}

/// Sub-boxes of `bounds` obtained by cutting at the values strictly inside it.
fn split_cells(bounds: &[(f64, f64)], cuts: &[Vec<f64>]) -> Vec<Vec<(f64, f64)>> {
    let pieces: Vec<Vec<(f64, f64)>> = bounds
        .iter()
        .zip(cuts)
        .map(|(&(a, b), c)| {
            let tol = 1e-12 * (b - a);
            let mut pts = vec![a];
            pts.extend(c.iter().copied().filter(|&v| v > a + tol && v < b - tol));
            pts.push(b);
            pts.windows(2).map(|w| (w[0], w[1])).collect()
        })
        .collect();
    // Later directions vary slowest, giving the x-fastest order used elsewhere.
    let mut cells = vec![Vec::new()];
    for dir in pieces.iter().rev() {
        cells = cells
            .into_iter()
            .flat_map(|cell: Vec<(f64, f64)>| {
                dir.iter().map(move |&piece| {
                    let mut c = Vec::with_capacity(cell.len() + 1);
                    c.push(piece);
                    c.extend_from_slice(&cell);
                    c
                })
            })
            .collect();
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_cells_respects_interior_cuts() {
        let cells = split_cells(&[(0.0, 1.0)], &[vec![0.0, 0.25, 0.5, 1.0]]);
        assert_eq!(cells, vec![vec![(0.0, 0.25)], vec![(0.25, 0.5)], vec![(0.5, 1.0)]]);
        let cells = split_cells(&[(0.0, 1.0), (0.0, 2.0)], &[vec![0.5], vec![]]);
        assert_eq!(cells.len(), 2);
        let area: f64 = cells.iter().map(|c| c.iter().map(|(a, b)| b - a).product::<f64>()).sum();
        assert!((area - 2.0).abs() < 1e-15);
    }
}
