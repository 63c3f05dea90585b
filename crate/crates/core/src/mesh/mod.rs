//! Element connectivity, trace meshes, point inversion and the multi-patch model.

mod inverse;
mod model;
mod trace;

pub use inverse::{inverse_map, locate_point, INVERSION_MAX_ITERATIONS};
pub use model::{BoundaryFunction, DirichletSpec, Monomial, MultiPatchModel, NeumannSpec};
pub use trace::{trace_of_face, Face, Side, TraceElement, TraceMesh};

use crate::error::{IgaError, Result};
use crate::spline::{flatten, unflatten, NurbsPatch};

/// One knot-span product of a patch with non-zero parametric measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub patch: usize,
    /// Knot span index per parametric direction.
    pub spans: [usize; 3],
    /// Position in the element grid per direction.
    pub ord: [usize; 3],
    pub bounds: Vec<(f64, f64)>,
    /// Global basis index for each local basis function, local index
    /// `a = a0 + (p+1) a1 + (p+1)(q+1) a2`.
    pub ien: Vec<usize>,
}

impl Element {
    pub fn param_center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn param_measure(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }
}

/// Element grid of one patch.
#[derive(Debug, Clone)]
pub struct PatchMesh {
    pub patch: usize,
    pub elements: Vec<Element>,
    /// Non-degenerate spans per direction as `(span index, lo, hi)`.
    pub spans: Vec<Vec<(usize, f64, f64)>>,
}

impl PatchMesh {
    /// Elements per direction.
    pub fn grid(&self) -> Vec<usize> {
        self.spans.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element_at(&self, ord: &[usize]) -> usize {
        flatten(ord, &self.grid())
    }

    /// Element whose parameter box contains `pt`. Points on an interior knot go to
    /// the element on the + side; the last knot goes to the last element.
    pub fn locate_element(&self, patch: &NurbsPatch, pt: &[f64]) -> Result<usize> {
        let spans = patch.spans_at(pt)?;
        let mut ord = [0; 3];
        for d in 0..self.spans.len() {
            ord[d] = self.spans[d]
                .binary_search_by_key(&spans[d], |s| s.0)
                .map_err(|_| IgaError::Argument(format!("span {} is degenerate", spans[d])))?;
        }
        Ok(self.element_at(&ord[..self.spans.len()]))
    }
}

/// One element per non-degenerate knot-span product, with IEN connectivity.
pub fn build_elements(patch: &NurbsPatch, patch_id: usize) -> PatchMesh {
    let dp = patch.dim_param();
    let spans: Vec<_> = patch.knot_vectors().iter().map(|kv| kv.spans()).collect();
    let grid: Vec<usize> = spans.iter().map(Vec::len).collect();
    let degrees = patch.degrees();
    let local: Vec<usize> = degrees.iter().map(|p| p + 1).collect();
    let n_local: usize = local.iter().product();
    let counts = patch.counts();
    let n_elem: usize = grid.iter().product();

    let mut elements = Vec::with_capacity(n_elem);
    for e in 0..n_elem {
        let ord = unflatten(e, &grid);
        let mut span_idx = [0; 3];
        let mut bounds = Vec::with_capacity(dp);
        for d in 0..dp {
            let (s, lo, hi) = spans[d][ord[d]];
            span_idx[d] = s;
            bounds.push((lo, hi));
        }
        let ien = (0..n_local)
            .map(|a| {
                let loc = unflatten(a, &local);
                let mut glob = [0; 3];
                for d in 0..dp {
                    glob[d] = span_idx[d] - degrees[d] + loc[d];
                }
                flatten(&glob[..dp], &counts)
            })
            .collect();
        elements.push(Element { patch: patch_id, spans: span_idx, ord, bounds, ien });
    }
    PatchMesh { patch: patch_id, elements, spans }
}

/// Splits every knot span at its midpoint, `times` times.
pub fn refine_bisect(patch: &NurbsPatch, times: usize) -> Result<NurbsPatch> {
    let mut out = patch.clone();
    for _ in 0..times {
        for d in 0..out.dim_param() {
            out = out.subdivide_direction(d, 2)?;
        }
    }
    Ok(out)
}
