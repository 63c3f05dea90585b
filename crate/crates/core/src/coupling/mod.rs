//! Nitsche coupling of two patches across a shared face.
//!
//! With `[[u]] = u1 - u2` and `{sigma} = gamma sigma1 + (1 - gamma) sigma2`, the
//! interface contributes `K^n + (K^n)^T + K^s` to the global matrix, where
//! `K^n` holds the consistency blocks `-/+ N_i^T n C_j B_j` and `K^s` the
//! stabilisation `alpha N_i^T N_j` blocks.

mod gauss;

pub use gauss::{default_gp_count, generate_interface_gps, GaussPointPair};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::elasticity::{constitutive_matrix, lame_constants, physical_basis, voigt_size, Material};
use crate::error::{IgaError, Result};
use crate::mesh::{build_elements, Face, MultiPatchModel};

/// How the stabilisation parameter of an interface is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaPolicy {
    Value(f64),
    /// `(lambda + mu) / 2 * theta / h_e` per trace element; `theta` defaults to [`theta`].
    Estimate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
}

impl Default for AlphaPolicy {
    fn default() -> Self {
        AlphaPolicy::Estimate { theta: None }
    }
}

/// Cells used for interface quadrature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceQuadrature {
    /// Patch-1 trace elements cut along patch-2 knot lines.
    #[default]
    Merged,
    /// Patch-1 trace elements as they are.
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    /// Patch 1 hosts the quadrature; list the finer patch first.
    pub patches: [usize; 2],
    pub faces: [Face; 2],
    #[serde(default = "half")]
    pub gamma: f64,
    #[serde(default)]
    pub alpha: AlphaPolicy,
    #[serde(default)]
    pub quadrature: InterfaceQuadrature,
}

fn half() -> f64 {
    0.5
}

impl InterfaceSpec {
    pub fn new(patches: [usize; 2], faces: [Face; 2]) -> Self {
        InterfaceSpec {
            patches,
            faces,
            gamma: 0.5,
            alpha: AlphaPolicy::default(),
            quadrature: InterfaceQuadrature::default(),
        }
    }

    pub fn with_alpha(mut self, alpha: AlphaPolicy) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// `theta(1) = 12`, `theta(2) = 36`, and `12 p^2` beyond.
pub fn theta(p: usize) -> f64 {
    match p {
        0 | 1 => 12.0,
        2 => 36.0,
        _ => 12.0 * (p * p) as f64,
    }
}

/// `alpha = (lambda + mu) / 2 * theta(p) / h_e` with the three-dimensional `lambda`.
pub fn estimate_alpha(mat: &Material, p: usize, h_e: f64) -> Result<f64> {
    estimate_alpha_with_theta(mat, theta(p), h_e)
}

pub fn estimate_alpha_with_theta(mat: &Material, theta: f64, h_e: f64) -> Result<f64> {
    if !(h_e > 0.0) {
        return Err(IgaError::Argument(format!("element size must be positive, got {h_e}")));
    }
    let l = lame_constants(mat)?;
    Ok(0.5 * (l.lambda + l.mu) * theta / h_e)
}

/// Degree and material that enter the alpha estimate of an interface: the larger
/// degree and the stiffer `(lambda + mu)` of the two sides.
fn estimate_inputs(model: &MultiPatchModel, iface: &InterfaceSpec) -> Result<(usize, Material)> {
    let p = iface.patches.iter().map(|&i| model.patches[i].max_degree()).max().unwrap_or(1);
    let mut best: Option<(f64, Material)> = None;
    for &i in &iface.patches {
        let m = *model.material_of(i);
        let l = lame_constants(&m)?;
        if best.is_none_or(|(s, _)| l.lambda + l.mu > s) {
            best = Some((l.lambda + l.mu, m));
        }
    }
    Ok((p, best.expect("two patches").1))
}

/// Stabilisation parameter of interface `iface` for a trace element of size `h_e`.
pub fn resolve_alpha(model: &MultiPatchModel, iface: &InterfaceSpec, h_e: f64) -> Result<f64> {
    match iface.alpha {
        AlphaPolicy::Value(a) => Ok(a),
        AlphaPolicy::Estimate { theta: t } => {
            let (p, mat) = estimate_inputs(model, iface)?;
            estimate_alpha_with_theta(&mat, t.unwrap_or_else(|| theta(p)), h_e)
        }
    }
}

/// Smallest and largest alpha over the trace elements of an interface.
pub fn alpha_range(model: &MultiPatchModel, index: usize) -> Result<(f64, f64)> {
    let gps = generate_interface_gps(model, index, Some(1))?;
    let iface = &model.interfaces[index];
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for gp in &gps {
        let a = resolve_alpha(model, iface, gp.h_e)?;
        range = (range.0.min(a), range.1.max(a));
    }
    Ok(range)
}

/// `dim x voigt` matrix mapping a Voigt stress to the traction `sigma n`.
pub fn normal_matrix(n: &[f64; 3], dim: usize) -> DMatrix<f64> {
    let [nx, ny, nz] = *n;
    if dim == 2 {
        DMatrix::from_row_slice(2, 3, &[nx, 0.0, ny, 0.0, ny, nx])
    } else {
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(3, 6, &[
            nx, 0.0, 0.0, ny, 0.0, nz,
            0.0, ny, 0.0, nx, nz, 0.0,
            0.0, 0.0, nz, 0.0, ny, nx,
        ]);
        m
    }
}

/// `([[u]], {sigma})` at one point.
pub fn jump_average(u1: &[f64], u2: &[f64], s1: &[f64], s2: &[f64], gamma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(IgaError::Argument(format!("gamma {gamma} outside [0, 1]")));
    }
    if u1.len() != u2.len() || s1.len() != s2.len() {
        return Err(IgaError::Argument("jump/average operands differ in size".into()));
    }
    let jump = u1.iter().zip(u2).map(|(a, b)| a - b).collect();
    let avg = s1.iter().zip(s2).map(|(a, b)| gamma * a + (1.0 - gamma) * b).collect();
    Ok((jump, avg))
}

/// Coupling matrices between one element of each patch, in global dof numbering.
///
/// `dofs` lists the patch-1 element dofs followed by the patch-2 element dofs;
/// both matrices are indexed the same way.
#[derive(Debug, Clone)]
pub struct CouplingBlock {
    pub dofs: Vec<usize>,
    /// Rows of patch 1 then patch 2, consistency terms only.
    pub kn: DMatrix<f64>,
    pub ks: DMatrix<f64>,
}

impl CouplingBlock {
    /// `K^n + (K^n)^T + K^s`.
    pub fn combined(&self) -> DMatrix<f64> {
        &self.kn + self.kn.transpose() + &self.ks
    }
}

/// Nitsche blocks of interface `index` from its Gauss-point pairs.
///
/// `offsets[m]` is the first global dof of patch `m`. Consecutive points sharing an
/// element pair are accumulated into one block.
pub fn assemble_coupling(
    model: &MultiPatchModel,
    index: usize,
    gps: &[GaussPointPair],
    offsets: &[usize],
) -> Result<Vec<CouplingBlock>> {
    let iface = &model.interfaces[index];
    let dim = model.dim();
    let (id1, id2) = (iface.patches[0], iface.patches[1]);
    let (p1, p2) = (&model.patches[id1], &model.patches[id2]);
    let mesh1 = build_elements(p1, id1);
    let mesh2 = build_elements(p2, id2);
    let c1 = constitutive_matrix(model.material_of(id1))?;
    let c2 = constitutive_matrix(model.material_of(id2))?;
    let gamma = iface.gamma;
    let vs = voigt_size(dim);

    let mut groups: Vec<&[GaussPointPair]> = Vec::new();
    let mut start = 0;
    for i in 1..=gps.len() {
        if i == gps.len() || (gps[i].e1, gps[i].e2) != (gps[start].e1, gps[start].e2) {
            if i > start {
                groups.push(&gps[start..i]);
            }
            start = i;
        }
    }

    let work = |group: &&[GaussPointPair]| -> Result<CouplingBlock> {
        let (el1, el2) = (&mesh1.elements[group[0].e1], &mesh2.elements[group[0].e2]);
        let m1 = dim * el1.ien.len();
        let m2 = dim * el2.ien.len();
        let mut kn = DMatrix::zeros(m1 + m2, m1 + m2);
        let mut ks = DMatrix::zeros(m1 + m2, m1 + m2);
        for gp in group.iter() {
            let b1 = physical_basis(p1, &el1.spans, &gp.xi1);
            let b2 = physical_basis(p2, &el2.spans, &gp.xi2);
            let nm = normal_matrix(&gp.normal, dim);
            debug_assert_eq!(nm.ncols(), vs);
            // Traction operators n C B of each side.
            let t1 = &nm * &c1 * b1.b_matrix(dim);
            let t2 = &nm * &c2 * b2.b_matrix(dim);
            let n1 = b1.n_matrix(dim);
            let n2 = b2.n_matrix(dim);
            let alpha = resolve_alpha(model, iface, gp.h_e)?;
            let w = gp.weight;
            // Rows of [[v]] = (N1, -N2), columns of {sigma n} = (gamma T1, (1 - gamma) T2).
            let mut jump = DMatrix::zeros(dim, m1 + m2);
            jump.columns_mut(0, m1).copy_from(&n1);
            jump.columns_mut(m1, m2).copy_from(&(-n2));
            let mut avg = DMatrix::zeros(dim, m1 + m2);
            avg.columns_mut(0, m1).copy_from(&(t1 * gamma));
            avg.columns_mut(m1, m2).copy_from(&(t2 * (1.0 - gamma)));
            kn.gemm_tr(-w, &jump, &avg, 1.0);
            ks.gemm_tr(alpha * w, &jump, &jump, 1.0);
        }
        let dofs = el1
            .ien
            .iter()
            .flat_map(|&a| (0..dim).map(move |c| offsets[id1] + a * dim + c))
            .chain(el2.ien.iter().flat_map(|&a| (0..dim).map(move |c| offsets[id2] + a * dim + c)))
            .collect();
        Ok(CouplingBlock { dofs, kn, ks })
    };

    #[cfg(feature = "parallel")]
    let blocks = {
        use rayon::prelude::*;
        groups.par_iter().map(work).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let blocks = groups.iter().map(work).collect::<Result<Vec<_>>>()?;
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::{dense_from_triplets, Formulation};
    use crate::mesh::Side;
    use crate::spline::NurbsPatch;
    use approx::assert_relative_eq;

    fn steel() -> Material {
        Material::new(3e7, 0.3, Formulation::PlaneStress).unwrap()
    }

    fn pair(nx1: usize, ny1: usize, nx2: usize, ny2: usize, p: usize) -> MultiPatchModel {
        let a = NurbsPatch::block(&[p, p], &[nx1, ny1], &[0., -1.], &[2., 1.]).unwrap();
        let b = NurbsPatch::block(&[p, p], &[nx2, ny2], &[2., -1.], &[5., 1.]).unwrap();
        let mut m = MultiPatchModel::new(vec![a, b], steel());
        m.interfaces.push(InterfaceSpec::new([0, 1], [Face::new(0, Side::Max), Face::new(0, Side::Min)]));
        m
    }

    fn dense_coupling(m: &MultiPatchModel) -> (DMatrix<f64>, DMatrix<f64>) {
        let gps = generate_interface_gps(m, 0, None).unwrap();
        let n0 = 2 * m.patches[0].num_control_points();
        let n = n0 + 2 * m.patches[1].num_control_points();
        let blocks = assemble_coupling(m, 0, &gps, &[0, n0]).unwrap();
        let mut kn = Vec::new();
        let mut ks = Vec::new();
        for b in &blocks {
            for (r, &gr) in b.dofs.iter().enumerate() {
                for (c, &gc) in b.dofs.iter().enumerate() {
                    kn.push((gr, gc, b.kn[(r, c)]));
                    ks.push((gr, gc, b.ks[(r, c)]));
                }
            }
        }
        (dense_from_triplets(n, &kn), dense_from_triplets(n, &ks))
    }

    #[test]
    fn alpha_estimate_examples() {
        // (lambda + mu) / 2 * 12 / 3 with lambda, mu of E = 3e7, nu = 0.3.
        let lambda = 3e7 * 0.3 / (1.3 * 0.4);
        let mu = 3e7 / 2.6;
        let a1 = estimate_alpha(&steel(), 1, 3.0).unwrap();
        assert_relative_eq!(a1, (lambda + mu) * 2.0, max_relative = 1e-14);
        assert_relative_eq!(a1, 5.769e7, max_relative = 1e-4);
        assert_relative_eq!(estimate_alpha(&steel(), 2, 3.0).unwrap() / a1, 3.0, max_relative = 1e-14);
        assert_relative_eq!(estimate_alpha(&steel(), 1, 1.5).unwrap() / a1, 2.0, max_relative = 1e-14);
        assert_eq!(theta(1), 12.0);
        assert_eq!(theta(2), 36.0);
        assert_eq!(theta(3), 108.0);
        assert!(estimate_alpha(&steel(), 1, 0.0).is_err());
    }

    #[test]
    fn normal_matrix_layouts() {
        let n2 = normal_matrix(&[0.6, 0.8, 0.0], 2);
        assert_eq!(n2.as_slice(), DMatrix::from_row_slice(2, 3, &[0.6, 0., 0.8, 0., 0.8, 0.6]).as_slice());
        // Traction of a 3D stress equals sigma . n computed from the full tensor.
        let s = [1.0, 2.0, 3.0, 0.4, 0.5, 0.6];
        let full = [[s[0], s[3], s[5]], [s[3], s[1], s[4]], [s[5], s[4], s[2]]];
        let n = [0.2, -0.3, (1.0f64 - 0.13).sqrt()];
        let t = normal_matrix(&n, 3) * nalgebra::DVector::from_row_slice(&s);
        for i in 0..3 {
            let expect: f64 = (0..3).map(|j| full[i][j] * n[j]).sum();
            assert!((t[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn jump_average_examples() {
        let (j, a) = jump_average(&[1., 2.], &[1., 2.], &[2., 0., 0.], &[0., 0., 0.], 0.5).unwrap();
        assert_eq!(j, vec![0.0, 0.0]);
        assert_eq!(a, vec![1.0, 0.0, 0.0]);
        let (_, a) = jump_average(&[0.], &[0.], &[3., 1.], &[3., 1.], 0.3).unwrap();
        assert_relative_eq!(a[0], 3.0, max_relative = 1e-15);
        assert!(jump_average(&[0.], &[0.], &[0.], &[0.], 1.2).is_err());
    }

    #[test]
    fn interface_weights_sum_to_length() {
        for m in [pair(2, 4, 3, 3, 1), pair(3, 2, 2, 5, 2)] {
            let gps = generate_interface_gps(&m, 0, None).unwrap();
            let total: f64 = gps.iter().map(|g| g.weight).sum();
            assert!((total - 2.0).abs() < 1e-10, "{total}");
            for g in &gps {
                assert!((g.normal[0] - 1.0).abs() < 1e-14 && g.normal[1].abs() < 1e-14);
                let (x2, _) = m.patches[1].eval_geometry(&g.xi2).unwrap();
                assert!((x2[0] - g.x[0]).abs() < 1e-8 && (x2[1] - g.x[1]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn merged_cells_never_straddle_patch_two_elements() {
        let m = pair(2, 3, 2, 4, 1);
        let gps = generate_interface_gps(&m, 0, None).unwrap();
        // Cuts at y = -1/3, 1/3 (patch 1) and -0.5, 0, 0.5 (patch 2): 6 cells, 2 points each.
        assert_eq!(gps.len(), 12);
        let mesh2 = build_elements(&m.patches[1], 1);
        for g in &gps {
            let (lo, hi) = mesh2.elements[g.e2].bounds[1];
            assert!(g.xi2[1] > lo && g.xi2[1] < hi);
        }
    }

    #[test]
    fn conforming_rigid_motion_gives_no_coupling_force() {
        let m = pair(2, 2, 3, 2, 1);
        let (kn, ks) = dense_coupling(&m);
        let k = &kn + kn.transpose() + &ks;
        let n = k.nrows();
        for u in [[1.0, 0.0], [0.0, 1.0]] {
            let a = nalgebra::DVector::from_fn(n, |i, _| u[i % 2]);
            assert!((&k * a).amax() < 1e-6 * k.amax());
        }
    }

    #[test]
    fn stabilisation_is_symmetric_psd_and_nitsche_one_sided() {
        let m = pair(2, 3, 3, 2, 2);
        let (_, ks) = dense_coupling(&m);
        assert!((&ks - ks.transpose()).amax() <= 1e-12 * ks.amax());
        let eig = ks.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > -1e-8 * ks.amax());

        let mut one_sided = m.clone();
        one_sided.interfaces[0].gamma = 1.0;
        let (kn, _) = dense_coupling(&one_sided);
        let n0 = 2 * m.patches[0].num_control_points();
        let cols = kn.columns(n0, kn.ncols() - n0);
        assert_eq!(cols.amax(), 0.0);
    }

    #[test]
    fn alpha_policy_resolution() {
        let mut m = pair(2, 4, 2, 4, 1);
        let (lo, hi) = alpha_range(&m, 0).unwrap();
        assert_relative_eq!(lo, estimate_alpha(&steel(), 1, 0.5).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(hi, lo, max_relative = 1e-12);
        m.interfaces[0].alpha = AlphaPolicy::Value(1e8);
        assert_eq!(alpha_range(&m, 0).unwrap(), (1e8, 1e8));
        m.interfaces[0].alpha = AlphaPolicy::Estimate { theta: Some(24.0) };
        assert_relative_eq!(alpha_range(&m, 0).unwrap().0, 2.0 * lo, max_relative = 1e-12);
    }
}
