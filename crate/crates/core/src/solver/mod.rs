//! Global assembly across patches, constraint elimination, direct solve and
//! solution evaluation.
//!
//! Dofs are numbered patch-major, then by control point, then by component:
//! dof `offsets[m] + A * dim + c` is component `c` of control point `A` of patch `m`.

mod skyline;
mod sparse;

pub use skyline::{reverse_cuthill_mckee, PivotReport, SkylineLdl};
pub use sparse::CsrMatrix;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::coupling::{assemble_coupling, generate_interface_gps, CouplingBlock};
use crate::elasticity::{
    constitutive_matrix, dirichlet_projection, element_stiffness, physical_basis, traction_load, Formulation,
};
use crate::error::{IgaError, Result};
use crate::mesh::{trace_of_face, MultiPatchModel, PatchMesh};
use crate::quadrature::TensorRule;
use crate::spline::Point;

/// Elements evaluated together before being scattered into the matrix.
const ELEMENT_CHUNK: usize = 256;

/// Assembly knobs that do not belong in the model itself.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AssemblyOptions {
    /// Interface Gauss points per direction; `max(p1, p2) + 1` when unset.
    pub interface_gp: Option<usize>,
}

/// Assembled linear system `K a = f` with its Dirichlet data.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub model: Arc<MultiPatchModel>,
    pub dim: usize,
    /// First dof of each patch.
    pub offsets: Vec<usize>,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Prescribed dof values.
    pub constraints: BTreeMap<usize, f64>,
}

impl SparseSystem {
    pub fn num_dofs(&self) -> usize {
        self.rhs.len()
    }
}

/// `K^b + K^n + (K^n)^T + K^s` of every patch and interface, with Neumann and
/// body loads and projected Dirichlet data.
pub fn assemble_global(model: &MultiPatchModel, opts: &AssemblyOptions) -> Result<SparseSystem> {
    model.validate()?;
    assemble_validated(Arc::new(model.clone()), opts)
}

pub(crate) fn assemble_validated(model: Arc<MultiPatchModel>, opts: &AssemblyOptions) -> Result<SparseSystem> {
    let dim = model.dim();
    let meshes = model.meshes();
    let mut offsets = Vec::with_capacity(model.patches.len());
    let mut node_offsets = Vec::with_capacity(model.patches.len());
    let mut nodes = 0;
    for p in &model.patches {
        node_offsets.push(nodes);
        offsets.push(nodes * dim);
        nodes += p.num_control_points();
    }
    let n = nodes * dim;

    let mut coupling: Vec<CouplingBlock> = Vec::new();
    for i in 0..model.interfaces.len() {
        let gps = generate_interface_gps(&model, i, opts.interface_gp)?;
        coupling.extend(assemble_coupling(&model, i, &gps, &offsets)?);
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (m, mesh) in meshes.iter().enumerate() {
        groups.extend(mesh.elements.iter().map(|e| e.ien.iter().map(|&a| node_offsets[m] + a).collect()));
    }
    groups.extend(coupling.iter().map(|b| b.dofs.iter().step_by(dim).map(|&d| d / dim).collect()));
    let mut matrix = CsrMatrix::from_node_groups(nodes, dim, groups.iter().map(Vec::as_slice));
    drop(groups);

    let mut rhs = vec![0.0; n];
    for (m, mesh) in meshes.iter().enumerate() {
        scatter_bulk(&model, m, mesh, offsets[m], &mut matrix, &mut rhs)?;
    }
    for b in &coupling {
        matrix.add_block(&b.dofs, &b.combined());
    }

    for nm in &model.neumann {
        let patch = &model.patches[nm.patch];
        let trace = trace_of_face(patch, &meshes[nm.patch], nm.face)?;
        let f = traction_load(patch, &meshes[nm.patch], &trace, &|x, n| nm.traction.traction(x, n))?;
        for (k, v) in f.into_iter().enumerate() {
            rhs[offsets[nm.patch] + k] += v;
        }
    }

    let mut constraints = BTreeMap::new();
    for d in &model.dirichlet {
        let patch = &model.patches[d.patch];
        let trace = trace_of_face(patch, &meshes[d.patch], d.face)?;
        let values = dirichlet_projection(patch, &meshes[d.patch], &trace, &|x| d.value.displacement(x))?;
        let comps: Vec<usize> = if d.components.is_empty() { (0..dim).collect() } else { d.components.clone() };
        for (a, v) in values {
            for &c in &comps {
                constraints.insert(offsets[d.patch] + a * dim + c, v[c]);
            }
        }
    }

    Ok(SparseSystem { model, dim, offsets, matrix, rhs, constraints })
}

fn scatter_bulk(
    model: &MultiPatchModel,
    m: usize,
    mesh: &PatchMesh,
    offset: usize,
    matrix: &mut CsrMatrix,
    rhs: &mut [f64],
) -> Result<()> {
    let patch = &model.patches[m];
    let mat = model.material_of(m);
    let dim = model.dim();
    let rule = TensorRule::new(&patch.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
    let bf = model.body_forces[m];
    for (c, chunk) in mesh.elements.chunks(ELEMENT_CHUNK).enumerate() {
        let compute = |(k, e): (usize, &crate::mesh::Element)| {
            element_stiffness(patch, c * ELEMENT_CHUNK + k, e, mat, &bf, &rule)
        };
        #[cfg(feature = "parallel")]
        let blocks: Vec<_> = {
            use rayon::prelude::*;
            chunk.par_iter().enumerate().map(compute).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let blocks: Vec<_> = chunk.iter().enumerate().map(compute).collect::<Result<_>>()?;
        for (e, (ke, fe)) in chunk.iter().zip(blocks) {
            let dofs: Vec<usize> =
                e.ien.iter().flat_map(|&a| (0..dim).map(move |i| offset + a * dim + i)).collect();
            matrix.add_block(&dofs, &ke);
            for (&d, v) in dofs.iter().zip(fe) {
                rhs[d] += v;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Fail on the first non-positive pivot instead of only on zero pivots.
    pub spd_check: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { spd_check: true }
    }
}

/// Diagnostics of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub free_dofs: usize,
    pub envelope: usize,
    pub pivots: PivotReport,
    /// `|K a - f| / |f|` over the free dofs.
    pub residual: f64,
}

/// Immutable solved field of a multi-patch model.
#[derive(Debug, Clone)]
pub struct Solution {
    pub model: Arc<MultiPatchModel>,
    /// Control displacements per patch.
    pub control: Vec<Vec<[f64; 3]>>,
    /// `(dof, K a - f)` at every constrained dof.
    pub reactions: Vec<(usize, f64)>,
    /// Total applied load per component (Neumann plus body forces).
    pub applied: [f64; 3],
    pub stats: SolveStats,
}

const RESIDUAL_TOL: f64 = 1e-10;

/// Eliminates constraints symmetrically, factors the free block and solves, with one
/// step of iterative refinement.
pub fn solve(system: &SparseSystem, opts: &SolveOptions) -> Result<Solution> {
    let n = system.num_dofs();
    let mut full = vec![0.0; n];
    let mut free_index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for d in 0..n {
        if let Some(&v) = system.constraints.get(&d) {
            full[d] = v;
        } else {
            free_index[d] = free.len();
            free.push(d);
        }
    }
    let nf = free.len();

    // Reduced matrix and right-hand side f_F - K_FC u_C.
    let mut dense_rows: Vec<(Vec<usize>, Vec<f64>)> = Vec::with_capacity(nf);
    let mut b = Vec::with_capacity(nf);
    for &d in &free {
        let (cols, vals) = system.matrix.row(d);
        let mut rc = Vec::with_capacity(cols.len());
        let mut rv = Vec::with_capacity(cols.len());
        let mut rhs = system.rhs[d];
        for (&j, &v) in cols.iter().zip(vals) {
            if free_index[j] != usize::MAX {
                rc.push(free_index[j]);
                rv.push(v);
            } else {
                rhs -= v * full[j];
            }
        }
        dense_rows.push((rc, rv));
        b.push(rhs);
    }
    let reduced = CsrMatrix::from_rows(nf, dense_rows);

    let mut stats = SolveStats {
        free_dofs: nf,
        envelope: 0,
        pivots: PivotReport { min_pivot: f64::NAN, max_pivot: f64::NAN },
        residual: 0.0,
    };
    if nf > 0 {
        let perm = reverse_cuthill_mckee(&reduced);
        let (ldl, pivots) = SkylineLdl::factor(&reduced, perm, opts.spd_check, &free)?;
        let mut x = ldl.solve(&b);
        let residual = |x: &[f64]| -> Vec<f64> { reduced.mul_vec(x).iter().zip(&b).map(|(k, f)| f - k).collect() };
        let r = residual(&x);
        let dx = ldl.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        let bnorm = norm(&b);
        let rel = if bnorm > 0.0 { norm(&residual(&x)) / bnorm } else { norm(&x) };
        if !(rel < RESIDUAL_TOL) {
            return Err(IgaError::Residual(rel));
        }
        for (&d, v) in free.iter().zip(x) {
            full[d] = v;
        }
        stats = SolveStats { free_dofs: nf, envelope: ldl.envelope_size(), pivots, residual: rel };
    }

    let ka = system.matrix.mul_vec(&full);
    let reactions = system.constraints.keys().map(|&d| (d, ka[d] - system.rhs[d])).collect();
    let dim = system.dim;
    let mut applied = [0.0; 3];
    for (d, f) in system.rhs.iter().enumerate() {
        applied[d % dim] += f;
    }
    let control = system
        .model
        .patches
        .iter()
        .zip(&system.offsets)
        .map(|(p, &off)| {
            (0..p.num_control_points())
                .map(|a| {
                    let mut u = [0.0; 3];
                    u[..dim].copy_from_slice(&full[off + a * dim..off + (a + 1) * dim]);
                    u
                })
                .collect()
        })
        .collect();
    Ok(Solution { model: system.model.clone(), control, reactions, applied, stats })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Displacement, strain and stress at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValue {
    pub x: Point,
    pub u: [f64; 3],
    /// Voigt strain with engineering shear.
    pub strain: Vec<f64>,
    /// Voigt stress `C B a`.
    pub stress: Vec<f64>,
}

impl Solution {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Global displacement vector in dof order.
    pub fn dof_vector(&self) -> Vec<f64> {
        let dim = self.dim();
        self.control.iter().flat_map(|c| c.iter().flat_map(move |u| u[..dim].to_vec())).collect()
    }

    /// `sum reactions + sum applied` per component, relative to the applied load.
    pub fn equilibrium_error(&self) -> f64 {
        let dim = self.dim();
        let mut total = self.applied;
        let mut scale = 0.0f64;
        for &(d, r) in &self.reactions {
            total[d % dim] += r;
            scale = scale.max(r.abs());
        }
        let applied = self.applied.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = scale.max(applied);
        let err = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            err / scale
        } else {
            err
        }
    }
}

/// `u = N a`, `eps = B a` and `sigma = C B a` at parameter `pt` of patch `patch`.
pub fn evaluate_field(sol: &Solution, patch: usize, pt: &[f64]) -> Result<FieldValue> {
    let model = &sol.model;
    let p = model
        .patches
        .get(patch)
        .ok_or_else(|| IgaError::Argument(format!("no patch {patch}")))?;
    if pt.len() != p.dim_param() {
        return Err(IgaError::Argument("parameter point dimension mismatch".into()));
    }
    let spans = p.spans_at(pt)?;
    evaluate_in_spans(sol, patch, &spans, pt)
}

/// [`evaluate_field`] on given knot spans, so that points on element boundaries
/// can be evaluated from either side.
pub fn evaluate_in_spans(sol: &Solution, patch: usize, spans: &[usize; 3], pt: &[f64]) -> Result<FieldValue> {
    let model = &sol.model;
    let p = &model.patches[patch];
    let dim = model.dim();
    let pb = physical_basis(p, spans, pt);
    let u = pb.displacement(&sol.control[patch]);
    let strain = pb.strain(dim, &sol.control[patch]);
    let c = constitutive_matrix(model.material_of(patch))?;
    let stress = (c * DVector::from_column_slice(&strain)).as_slice().to_vec();
    Ok(FieldValue { x: pb.x, u, strain, stress })
}

/// Von Mises equivalent stress of a Voigt stress. In 2D, plane stress takes
/// `sigma_zz = 0` and plane strain `sigma_zz = nu (sigma_xx + sigma_yy)`.
pub fn von_mises(stress: &[f64], formulation: Formulation, nu: f64) -> f64 {
    let (sx, sy, sz, txy, tyz, txz) = if stress.len() == 3 {
        let sz = match formulation {
            Formulation::PlaneStrain => nu * (stress[0] + stress[1]),
            _ => 0.0,
        };
        (stress[0], stress[1], sz, stress[2], 0.0, 0.0)
    } else {
        (stress[0], stress[1], stress[2], stress[3], stress[4], stress[5])
    };
    (0.5 * ((sx - sy).powi(2) + (sy - sz).powi(2) + (sz - sx).powi(2)) + 3.0 * (txy * txy + tyz * tyz + txz * txz))
        .sqrt()
}

/// Dense copy of the constrained (free-dof) block, for small diagnostics.
pub fn free_block_dense(system: &SparseSystem) -> DMatrix<f64> {
    let free: Vec<usize> = (0..system.num_dofs()).filter(|d| !system.constraints.contains_key(d)).collect();
    DMatrix::from_fn(free.len(), free.len(), |i, j| system.matrix.get(free[i], free[j]))
}
