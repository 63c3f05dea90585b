//! Isotropic linear elasticity: constitutive law, strain-displacement operators,
//! bulk stiffness, load vectors and Dirichlet projection.
//!
//! Voigt ordering is `(xx, yy, xy)` in 2D and `(xx, yy, zz, xy, yz, xz)` in 3D.
//! Strain vectors carry engineering shear components (`2 eps_ij`), stress vectors
//! do not.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{IgaError, Result};
use crate::mesh::{Element, Face, PatchMesh, TraceMesh};
use crate::quadrature::TensorRule;
use crate::spline::{parent_to_param, NurbsPatch, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    PlaneStress,
    PlaneStrain,
    Solid3d,
}

impl Formulation {
    pub fn dim(self) -> usize {
        match self {
            Formulation::PlaneStress | Formulation::PlaneStrain => 2,
            Formulation::Solid3d => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    #[serde(rename = "nu")]
    pub poisson_ratio: f64,
    pub formulation: Formulation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lame {
    pub lambda: f64,
    pub mu: f64,
    /// `2 lambda mu / (lambda + 2 mu)`, reported for plane stress only.
    pub lambda_plane_stress: Option<f64>,
}

impl Material {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, formulation: Formulation) -> Result<Self> {
        let m = Material { youngs_modulus, poisson_ratio, formulation };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        if nu == 0.5 {
            return Err(IgaError::Incompressible(nu));
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(IgaError::Material(format!("Young's modulus {e} must be positive")));
        }
        if !(nu > -1.0 && nu < 0.5) {
            return Err(IgaError::Material(format!("Poisson ratio {nu} outside (-1, 0.5)")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.formulation.dim()
    }

    /// The first Lame parameter entering the stiffness for this formulation.
    pub fn effective_lambda(&self) -> Result<f64> {
        let l = lame_constants(self)?;
        Ok(l.lambda_plane_stress.unwrap_or(l.lambda))
    }
}

pub fn lame_constants(mat: &Material) -> Result<Lame> {
    mat.validate()?;
    let (e, nu) = (mat.youngs_modulus, mat.poisson_ratio);
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let lambda_plane_stress = (mat.formulation == Formulation::PlaneStress)
        .then(|| 2.0 * lambda * mu / (lambda + 2.0 * mu));
    Ok(Lame { lambda, mu, lambda_plane_stress })
}

pub fn voigt_size(dim: usize) -> usize {
    if dim == 2 {
        3
    } else {
        6
    }
}

/// Voigt index of the shear pair `(i, j)`, `i != j`.
fn shear_row(dim: usize, i: usize, j: usize) -> usize {
    if dim == 2 {
        return 2;
    }
    match (i.min(j), i.max(j)) {
        (0, 1) => 3,
        (1, 2) => 4,
        (0, 2) => 5,
        _ => unreachable!("not a shear pair"),
    }
}

/// Constitutive matrix in Voigt form.
pub fn constitutive_matrix(mat: &Material) -> Result<DMatrix<f64>> {
    let l = lame_constants(mat)?;
    let lambda = l.lambda_plane_stress.unwrap_or(l.lambda);
    let mu = l.mu;
    let dim = mat.dim();
    let nv = voigt_size(dim);
    let mut c = DMatrix::zeros(nv, nv);
    for i in 0..dim {
        for j in 0..dim {
            c[(i, j)] = lambda;
        }
        c[(i, i)] += 2.0 * mu;
    }
    for r in dim..nv {
        c[(r, r)] = mu;
    }
    Ok(c)
}

/// Shape functions of one element pushed to physical space at one point.
#[derive(Debug, Clone)]
pub struct PhysicalBasis {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Physical gradients `grads[a][i] = dR_a / dx_i`.
    pub grads: Vec<[f64; 3]>,
    pub x: Point,
    /// Determinant of the parametric Jacobian `dx / dxi`.
    pub det_j: f64,
}

/// Determinant and inverse of the leading `dim x dim` block.
fn invert_small(jac: &[[f64; 3]; 3], dim: usize) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    if dim == 2 {
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        inv[0][0] = jac[1][1] / det;
        inv[0][1] = -jac[0][1] / det;
        inv[1][0] = -jac[1][0] / det;
        inv[1][1] = jac[0][0] / det;
        return (det, inv);
    }
    let m = jac;
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    inv[0][0] = c00 / det;
    inv[1][0] = c01 / det;
    inv[2][0] = c02 / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    (det, inv)
}

/// Physical basis on the given spans. Requires `dim_param == dim_space`.
pub fn physical_basis(patch: &NurbsPatch, spans: &[usize; 3], pt: &[f64]) -> PhysicalBasis {
    let dim = patch.dim_space();
    debug_assert_eq!(patch.dim_param(), dim);
    let rb = patch.rational_basis_in_spans(spans, pt);
    let (x, jac) = patch.geometry_from_basis(&rb);
    let (det_j, inv) = invert_small(&jac, dim);
    let grads = rb
        .derivs
        .iter()
        .map(|dr| {
            let mut g = [0.0; 3];
            for (i, gi) in g.iter_mut().enumerate().take(dim) {
                // dR/dx_i = sum_j dR/dxi_j dxi_j/dx_i
                *gi = (0..dim).map(|j| dr[j] * inv[j][i]).sum();
            }
            g
        })
        .collect();
    PhysicalBasis { indices: rb.indices, values: rb.values, grads, x, det_j }
}

impl PhysicalBasis {
    /// Strain-displacement matrix, `voigt x dim * n_en`.
    pub fn b_matrix(&self, dim: usize) -> DMatrix<f64> {
        let n = self.values.len();
        let mut b = DMatrix::zeros(voigt_size(dim), dim * n);
        for (a, g) in self.grads.iter().enumerate() {
            for i in 0..dim {
                b[(i, dim * a + i)] = g[i];
                for j in 0..dim {
                    if j != i {
                        b[(shear_row(dim, i, j), dim * a + i)] = g[j];
                    }
                }
            }
        }
        b
    }

    /// Shape function matrix, `dim x dim * n_en`.
    pub fn n_matrix(&self, dim: usize) -> DMatrix<f64> {
        let n = self.values.len();
        let mut m = DMatrix::zeros(dim, dim * n);
        for (a, &r) in self.values.iter().enumerate() {
            for i in 0..dim {
                m[(i, dim * a + i)] = r;
            }
        }
        m
    }

    /// Voigt strain of the field with control values `u` (indexed by global basis).
    pub fn strain(&self, dim: usize, u: &[[f64; 3]]) -> Vec<f64> {
        let mut eps = vec![0.0; voigt_size(dim)];
        for (&idx, g) in self.indices.iter().zip(&self.grads) {
            let ua = u[idx];
            for i in 0..dim {
                eps[i] += g[i] * ua[i];
                for j in (i + 1)..dim {
                    eps[shear_row(dim, i, j)] += g[j] * ua[i] + g[i] * ua[j];
                }
            }
        }
        eps
    }

    pub fn displacement(&self, u: &[[f64; 3]]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (&idx, &r) in self.indices.iter().zip(&self.values) {
            for c in 0..3 {
                out[c] += r * u[idx][c];
            }
        }
        out
    }
}

/// B, N and quadrature factors of one element at one parameter point.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub b: DMatrix<f64>,
    pub n: DMatrix<f64>,
    pub det_j: f64,
    pub weight: f64,
}

pub fn element_matrices(
    patch: &NurbsPatch,
    element_id: usize,
    element: &Element,
    pt: &[f64],
    mat: &Material,
) -> Result<ElementMatrices> {
    let dim = check_dims(patch, mat)?;
    for (d, &(lo, hi)) in element.bounds.iter().enumerate() {
        if pt[d] < lo || pt[d] > hi {
            return Err(IgaError::Argument(format!(
                "parameter {} outside element bounds [{lo}, {hi}]",
                pt[d]
            )));
        }
    }
    let pb = physical_basis(patch, &element.spans, pt);
    if !(pb.det_j > 0.0) {
        return Err(IgaError::InvertedElement {
            patch: element.patch,
            element: element_id,
            det_j: pb.det_j,
        });
    }
    Ok(ElementMatrices { b: pb.b_matrix(dim), n: pb.n_matrix(dim), det_j: pb.det_j, weight: 1.0 })
}

fn check_dims(patch: &NurbsPatch, mat: &Material) -> Result<usize> {
    let dim = patch.dim_space();
    if patch.dim_param() != dim || mat.dim() != dim {
        return Err(IgaError::Argument(format!(
            "elasticity needs a {0}-parametric patch in {0}D with a matching material",
            mat.dim()
        )));
    }
    Ok(dim)
}

/// Symmetric element stiffness and body-force vector.
///
/// The stiffness uses the isotropic form
/// `K_(a i)(b j) = lambda g_a,i g_b,j + mu (g_a,j g_b,i + delta_ij g_a . g_b)`,
/// which equals `B^T C B` without forming either matrix.
pub(crate) fn element_stiffness(
    patch: &NurbsPatch,
    element_id: usize,
    element: &Element,
    mat: &Material,
    body_force: &[f64; 3],
    rule: &TensorRule,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let dim = patch.dim_space();
    let lambda = mat.effective_lambda()?;
    let mu = lame_constants(mat)?.mu;
    let n_en = element.ien.len();
    let size = dim * n_en;
    let mut ke = DMatrix::zeros(size, size);
    let mut fe = vec![0.0; size];
    let has_body = body_force.iter().any(|&b| b != 0.0);
    for (q, parent) in rule.points.iter().enumerate() {
        let (pt, jp) = parent_to_param(&element.bounds, parent)?;
        let pb = physical_basis(patch, &element.spans, &pt);
        if !(pb.det_j > 0.0) {
            return Err(IgaError::InvertedElement {
                patch: element.patch,
                element: element_id,
                det_j: pb.det_j,
            });
        }
        let w = rule.weights[q] * jp * pb.det_j;
        for a in 0..n_en {
            let ga = pb.grads[a];
            for b in a..n_en {
                let gb = pb.grads[b];
                let dot: f64 = (0..dim).map(|k| ga[k] * gb[k]).sum();
                for i in 0..dim {
                    for j in 0..dim {
                        let mut v = lambda * ga[i] * gb[j] + mu * ga[j] * gb[i];
                        if i == j {
                            v += mu * dot;
                        }
                        ke[(dim * a + i, dim * b + j)] += w * v;
                    }
                }
            }
            if has_body {
                for i in 0..dim {
                    fe[dim * a + i] += w * pb.values[a] * body_force[i];
                }
            }
        }
    }
    for a in 0..n_en {
        for b in (a + 1)..n_en {
            for i in 0..dim {
                for j in 0..dim {
                    ke[(dim * b + j, dim * a + i)] = ke[(dim * a + i, dim * b + j)];
                }
            }
        }
    }
    Ok((ke, fe))
}

/// Local (patch-level) sparse contribution: triplets in patch dof numbering
/// `A * dim + component`, plus the body-force vector.
#[derive(Debug, Clone, Default)]
pub struct PatchContribution {
    pub triplets: Vec<(usize, usize, f64)>,
    pub force: Vec<f64>,
}

/// Bulk stiffness and body force of one patch, assembled with a full
/// `(p+1)`-point Gauss product rule per direction.
pub fn bulk_stiffness(
    patch: &NurbsPatch,
    mesh: &PatchMesh,
    mat: &Material,
    body_force: &[f64; 3],
) -> Result<PatchContribution> {
    let dim = check_dims(patch, mat)?;
    let rule = TensorRule::new(&patch.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
    let compute = |(id, e): (usize, &Element)| element_stiffness(patch, id, e, mat, body_force, &rule);

    #[cfg(feature = "parallel")]
    let blocks: Vec<_> = {
        use rayon::prelude::*;
        mesh.elements.par_iter().enumerate().map(compute).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<_> = mesh.elements.iter().enumerate().map(compute).collect::<Result<Vec<_>>>()?;

    let mut out = PatchContribution {
        triplets: Vec::with_capacity(blocks.iter().map(|(k, _)| k.len()).sum()),
        force: vec![0.0; dim * patch.num_control_points()],
    };
    for (e, (ke, fe)) in mesh.elements.iter().zip(blocks) {
        let dofs: Vec<usize> =
            e.ien.iter().flat_map(|&a| (0..dim).map(move |c| a * dim + c)).collect();
        for (r, &gr) in dofs.iter().enumerate() {
            out.force[gr] += fe[r];
            for (c, &gc) in dofs.iter().enumerate() {
                out.triplets.push((gr, gc, ke[(r, c)]));
            }
        }
    }
    Ok(out)
}

/// Geometry of a point on a patch face.
#[derive(Debug, Clone, Copy)]
pub struct FacePoint {
    pub x: Point,
    /// Unit normal pointing out of the patch.
    pub normal: [f64; 3],
    /// Physical surface measure per unit parametric face measure.
    pub area_density: f64,
    /// Parametric tangents along the face's free directions.
    pub tangents: [[f64; 3]; 2],
}

/// Point, outward normal and surface density at parameter `pt` on `face`.
/// Requires `dim_param == dim_space`.
pub fn face_point(patch: &NurbsPatch, face: Face, spans: &[usize; 3], pt: &[f64]) -> FacePoint {
    let dim = patch.dim_space();
    let rb = patch.rational_basis_in_spans(spans, pt);
    let (x, jac) = patch.geometry_from_basis(&rb);
    let free = face.free_dirs(dim);
    let col = |j: usize| [jac[0][j], jac[1][j], jac[2][j]];
    let t1 = col(free[0]);
    let (t2, mut n) = if dim == 2 {
        ([0.0, 0.0, 1.0], cross(t1, [0.0, 0.0, 1.0]))
    } else {
        let t2 = col(free[1]);
        (t2, cross(t1, t2))
    };
    let len = norm(n);
    for v in n.iter_mut() {
        *v /= len;
    }
    let out = col(face.dir);
    let s: f64 = (0..3).map(|i| out[i] * n[i]).sum::<f64>() * face.outward_sign();
    if s < 0.0 {
        for v in n.iter_mut() {
            *v = -*v;
        }
    }
    FacePoint { x, normal: n, area_density: len, tangents: [t1, t2] }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Consistent load vector of a traction `t(x, n)` applied on a face.
pub fn traction_load(
    patch: &NurbsPatch,
    mesh: &PatchMesh,
    trace: &TraceMesh,
    traction: &dyn Fn(&Point, &[f64; 3]) -> [f64; 3],
) -> Result<Vec<f64>> {
    let dim = patch.dim_space();
    let counts: Vec<usize> =
        trace.free_dirs.iter().map(|&d| patch.knot_vector(d).degree() + 1).collect();
    let rule = TensorRule::new(&counts);
    let mut f = vec![0.0; dim * patch.num_control_points()];
    for te in &trace.elements {
        let elem = &mesh.elements[te.element];
        for (q, parent) in rule.points.iter().enumerate() {
            let (fc, jp) = parent_to_param(&te.bounds, parent)?;
            let pt = trace.face.embed(patch, &fc);
            let fp = face_point(patch, trace.face, &elem.spans, &pt);
            let t = traction(&fp.x, &fp.normal);
            let w = rule.weights[q] * jp * fp.area_density;
            let rb = patch.rational_basis_in_spans(&elem.spans, &pt);
            for (&a, &r) in rb.indices.iter().zip(&rb.values) {
                for i in 0..dim {
                    f[a * dim + i] += w * r * t[i];
                }
            }
        }
    }
    Ok(f)
}

/// Least-squares projection of `g` onto the basis functions supported on a face.
///
/// Returns `(control point index, value)` pairs for the face layer of the control
/// net. The projection minimises `int_face |sum R_A d_A - g|^2 dGamma`.
pub fn dirichlet_projection(
    patch: &NurbsPatch,
    mesh: &PatchMesh,
    trace: &TraceMesh,
    g: &dyn Fn(&Point) -> [f64; 3],
) -> Result<Vec<(usize, [f64; 3])>> {
    let face = trace.face;
    let layer = match face.side {
        crate::mesh::Side::Min => 0,
        crate::mesh::Side::Max => patch.counts()[face.dir] - 1,
    };
    let face_dofs: Vec<usize> =
        (0..patch.num_control_points()).filter(|&a| patch.lattice(a)[face.dir] == layer).collect();
    let local = |a: usize| face_dofs.binary_search(&a).ok();
    let n = face_dofs.len();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, 3);

    let counts: Vec<usize> =
        trace.free_dirs.iter().map(|&d| patch.knot_vector(d).degree() + 2).collect();
    let rule = TensorRule::new(&counts);
    for te in &trace.elements {
        let elem = &mesh.elements[te.element];
        for (q, parent) in rule.points.iter().enumerate() {
            let (fc, jp) = parent_to_param(&te.bounds, parent)?;
            let pt = face.embed(patch, &fc);
            let fp = face_point(patch, face, &elem.spans, &pt);
            let w = rule.weights[q] * jp * fp.area_density;
            let gv = g(&fp.x);
            let rb = patch.rational_basis_in_spans(&elem.spans, &pt);
            let loc: Vec<(usize, f64)> = rb
                .indices
                .iter()
                .zip(&rb.values)
                .filter_map(|(&a, &r)| local(a).map(|l| (l, r)))
                .collect();
            for &(la, ra) in &loc {
                for c in 0..3 {
                    rhs[(la, c)] += w * ra * gv[c];
                }
                for &(lb, rbv) in &loc {
                    gram[(la, lb)] += w * ra * rbv;
                }
            }
        }
    }
    let chol = gram.cholesky().ok_or_else(|| IgaError::Projection {
        patch: trace.patch,
        reason: format!("singular Gram matrix on face {face}"),
    })?;
    let sol = chol.solve(&rhs);
    Ok(face_dofs.iter().enumerate().map(|(l, &a)| (a, [sol[(l, 0)], sol[(l, 1)], sol[(l, 2)]])).collect())
}

/// Dense assembly of a patch contribution, for small checks.
pub fn dense_from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(n, n);
    for &(r, c, v) in triplets {
        k[(r, c)] += v;
    }
    k
}
