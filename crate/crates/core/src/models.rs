//! Ready-made models: the coupled cantilever beam in 2D and 3D and the
//! cross-interface patch tests.

use crate::coupling::{AlphaPolicy, InterfaceSpec};
use crate::elasticity::{Formulation, Material};
use crate::error::Result;
use crate::mesh::{BoundaryFunction, DirichletSpec, Face, Monomial, MultiPatchModel, NeumannSpec, Side};
use crate::spline::NurbsPatch;
use crate::verification::TimoshenkoParams;

/// Axis-aligned box patch of the given degree and element counts.
pub fn box_patch(degree: usize, elements: &[usize], lo: &[f64], hi: &[f64]) -> Result<NurbsPatch> {
    NurbsPatch::block(&vec![degree; elements.len()], elements, lo, hi)
}

fn beam_material(t: &TimoshenkoParams) -> Result<Material> {
    Material::new(t.youngs_modulus, t.poisson_ratio, Formulation::PlaneStress)
}

fn beam_conditions(model: &mut MultiPatchModel, t: &TimoshenkoParams) {
    let last = model.patches.len() - 1;
    model.dirichlet.push(DirichletSpec {
        patch: 0,
        face: Face::new(0, Side::Min),
        components: vec![],
        value: BoundaryFunction::Timoshenko(*t),
    });
    model.neumann.push(NeumannSpec {
        patch: last,
        face: Face::new(0, Side::Max),
        traction: BoundaryFunction::Timoshenko(*t),
    });
}

/// Beam `[0, L] x [-D/2, D/2]` split at `x = L/2` into two patches with the given
/// element counts, clamped with the exact displacement at `x = 0` and loaded by the
/// exact traction at `x = L`.
pub fn timoshenko_two_patch(
    t: &TimoshenkoParams,
    degree: usize,
    left: [usize; 2],
    right: [usize; 2],
    alpha: AlphaPolicy,
) -> Result<MultiPatchModel> {
    let (l, d) = (t.length, t.depth);
    let a = box_patch(degree, &left, &[0.0, -d / 2.0], &[l / 2.0, d / 2.0])?;
    let b = box_patch(degree, &right, &[l / 2.0, -d / 2.0], &[l, d / 2.0])?;
    let mut model = MultiPatchModel::new(vec![a, b], beam_material(t)?);
    model
        .interfaces
        .push(InterfaceSpec::new([0, 1], [Face::new(0, Side::Max), Face::new(0, Side::Min)]).with_alpha(alpha));
    beam_conditions(&mut model, t);
    Ok(model)
}

/// The same beam as a single patch.
pub fn timoshenko_single_patch(t: &TimoshenkoParams, degree: usize, elements: [usize; 2]) -> Result<MultiPatchModel> {
    let (l, d) = (t.length, t.depth);
    let patch = box_patch(degree, &elements, &[0.0, -d / 2.0], &[l, d / 2.0])?;
    let mut model = MultiPatchModel::new(vec![patch], beam_material(t)?);
    beam_conditions(&mut model, t);
    Ok(model)
}

/// Linear displacement field `u_i = c_i + sum_j g_ij x_j`.
pub fn linear_field(c: &[f64], g: &[Vec<f64>]) -> BoundaryFunction {
    BoundaryFunction::Polynomial(
        c.iter()
            .zip(g)
            .map(|(&ci, row)| {
                let mut terms = vec![Monomial { c: ci, pow: [0; 3] }];
                for (j, &gij) in row.iter().enumerate() {
                    let mut pow = [0; 3];
                    pow[j] = 1;
                    terms.push(Monomial { c: gij, pow });
                }
                terms
            })
            .collect(),
    )
}

/// Two unit boxes side by side along x, with every outer face prescribed by `field`.
pub fn patch_test_pair(
    degree: usize,
    left: &[usize],
    right: &[usize],
    material: Material,
    field: BoundaryFunction,
) -> Result<MultiPatchModel> {
    let dim = left.len();
    let lo = vec![0.0; dim];
    let mut mid_lo = vec![0.0; dim];
    mid_lo[0] = 1.0;
    let mut mid_hi = vec![1.0; dim];
    let hi = {
        let mut h = vec![1.0; dim];
        h[0] = 2.0;
        h
    };
    let a = box_patch(degree, left, &lo, &mid_hi)?;
    mid_hi[0] = 2.0;
    let b = box_patch(degree, right, &mid_lo, &hi)?;
    let mut model = MultiPatchModel::new(vec![a, b], material);
    model.interfaces.push(InterfaceSpec::new([0, 1], [Face::new(0, Side::Max), Face::new(0, Side::Min)]));
    for (patch, skip) in [(0, Face::new(0, Side::Max)), (1, Face::new(0, Side::Min))] {
        for dir in 0..dim {
            for side in [Side::Min, Side::Max] {
                let face = Face::new(dir, side);
                if face != skip {
                    model.dirichlet.push(DirichletSpec { patch, face, components: vec![], value: field.clone() });
                }
            }
        }
    }
    Ok(model)
}

/// Solid cantilever `[0, L] x [0, W] x [0, H]` of tri-`degree` patches split along x
/// into halves with the given element counts, clamped at `x = 0` with `u_z = tip`
/// imposed at `x = L`. Passing `None` for `right` gives the monolithic beam with
/// `left` spanning the whole length.
pub fn cantilever_3d(
    material: Material,
    size: [f64; 3],
    degree: usize,
    left: [usize; 3],
    right: Option<[usize; 3]>,
    tip: f64,
) -> Result<MultiPatchModel> {
    let [l, w, h] = size;
    let patches = match right {
        Some(r) => vec![
            box_patch(degree, &left, &[0.0; 3], &[l / 2.0, w, h])?,
            box_patch(degree, &r, &[l / 2.0, 0.0, 0.0], &[l, w, h])?,
        ],
        None => vec![box_patch(degree, &left, &[0.0; 3], &[l, w, h])?],
    };
    let last = patches.len() - 1;
    let mut model = MultiPatchModel::new(patches, material);
    if right.is_some() {
        model.interfaces.push(InterfaceSpec::new([0, 1], [Face::new(0, Side::Max), Face::new(0, Side::Min)]));
    }
    model.dirichlet.push(DirichletSpec {
        patch: 0,
        face: Face::new(0, Side::Min),
        components: vec![],
        value: BoundaryFunction::Constant(vec![0.0; 3]),
    });
    model.dirichlet.push(DirichletSpec {
        patch: last,
        face: Face::new(0, Side::Max),
        components: vec![2],
        value: BoundaryFunction::Constant(vec![0.0, 0.0, tip]),
    });
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_validate() {
        let t = TimoshenkoParams::default();
        let m = timoshenko_two_patch(&t, 1, [20, 8], [20, 4], AlphaPolicy::Value(1e8)).unwrap();
        m.validate().unwrap();
        assert_eq!(m.meshes().iter().map(|m| m.len()).collect::<Vec<_>>(), vec![160, 80]);
        timoshenko_single_patch(&t, 2, [4, 1]).unwrap().validate().unwrap();
        let mat = Material::new(1.0, 0.25, Formulation::Solid3d).unwrap();
        let field = linear_field(&[0.0; 3], &[vec![1.0, 0.0, 0.0], vec![0.0; 3], vec![0.0; 3]]);
        let pt = patch_test_pair(1, &[2, 2, 2], &[3, 3, 3], mat, field).unwrap();
        pt.validate().unwrap();
        assert_eq!(pt.dirichlet.len(), 10);
        let c = cantilever_3d(mat, [10.0, 1.0, 1.0], 1, [4, 2, 2], Some([4, 1, 1]), 1.0).unwrap();
        c.validate().unwrap();
    }
}
