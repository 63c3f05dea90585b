use serde::{Deserialize, Serialize};

use super::{build_elements, locate_point, trace_of_face, Face, PatchMesh};
use crate::coupling::{AlphaPolicy, InterfaceSpec};
use crate::elasticity::Material;
use crate::error::{IgaError, Result};
use crate::spline::{NurbsPatch, Point};
use crate::verification::TimoshenkoParams;

/// One term `c x^i y^j z^k` of a polynomial field component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: f64,
    #[serde(default)]
    pub pow: [u32; 3],
}

/// Prescribed boundary data.
///
/// For displacement conditions the function is evaluated directly; for
/// tractions, `Timoshenko` yields `sigma_exact . n` and the others their value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFunction {
    Constant(Vec<f64>),
    /// One list of monomials per component.
    Polynomial(Vec<Vec<Monomial>>),
    Timoshenko(TimoshenkoParams),
}

impl BoundaryFunction {
    pub fn displacement(&self, x: &Point) -> [f64; 3] {
        match self {
            BoundaryFunction::Timoshenko(t) => {
                let (u, _) = t.exact(x[0], x[1]);
                [u[0], u[1], 0.0]
            }
            _ => self.value(x),
        }
    }

    pub fn traction(&self, x: &Point, n: &[f64; 3]) -> [f64; 3] {
        match self {
            BoundaryFunction::Timoshenko(t) => {
                let (_, s) = t.exact(x[0], x[1]);
                [s[0] * n[0] + s[2] * n[1], s[2] * n[0] + s[1] * n[1], 0.0]
            }
            _ => self.value(x),
        }
    }

    fn value(&self, x: &Point) -> [f64; 3] {
        let mut out = [0.0; 3];
        match self {
            BoundaryFunction::Constant(v) => {
                for (o, c) in out.iter_mut().zip(v) {
                    *o = *c;
                }
            }
            BoundaryFunction::Polynomial(comps) => {
                for (o, terms) in out.iter_mut().zip(comps) {
                    *o = terms
                        .iter()
                        .map(|m| {
                            m.c * x[0].powi(m.pow[0] as i32)
                                * x[1].powi(m.pow[1] as i32)
                                * x[2].powi(m.pow[2] as i32)
                        })
                        .sum();
                }
            }
            BoundaryFunction::Timoshenko(_) => unreachable!(),
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletSpec {
    pub patch: usize,
    pub face: Face,
    /// Constrained displacement components; all when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<usize>,
    pub value: BoundaryFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannSpec {
    pub patch: usize,
    pub face: Face,
    pub traction: BoundaryFunction,
}

/// Patches, materials, boundary conditions and interfaces: a solvable problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPatchModel {
    pub patches: Vec<NurbsPatch>,
    pub materials: Vec<Material>,
    /// Material index of each patch.
    pub patch_materials: Vec<usize>,
    /// Constant body force of each patch.
    pub body_forces: Vec<[f64; 3]>,
    pub dirichlet: Vec<DirichletSpec>,
    pub neumann: Vec<NeumannSpec>,
    pub interfaces: Vec<InterfaceSpec>,
}

/// Absolute tolerance for interface coincidence, relative to the patch diagonal.
const COINCIDENCE_TOL: f64 = 1e-8;

impl MultiPatchModel {
    pub fn new(patches: Vec<NurbsPatch>, material: Material) -> Self {
        let n = patches.len();
        MultiPatchModel {
            patches,
            materials: vec![material],
            patch_materials: vec![0; n],
            body_forces: vec![[0.0; 3]; n],
            dirichlet: Vec::new(),
            neumann: Vec::new(),
            interfaces: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.patches.first().map_or(0, NurbsPatch::dim_space)
    }

    pub fn material_of(&self, patch: usize) -> &Material {
        &self.materials[self.patch_materials[patch]]
    }

    pub fn meshes(&self) -> Vec<PatchMesh> {
        self.patches.iter().enumerate().map(|(i, p)| build_elements(p, i)).collect()
    }

    /// Total number of displacement unknowns.
    pub fn num_dofs(&self) -> usize {
        self.dim() * self.patches.iter().map(NurbsPatch::num_control_points).sum::<usize>()
    }

    /// Every patch refined by `times` midpoint bisections.
    pub fn refined(&self, times: usize) -> Result<MultiPatchModel> {
        let mut out = self.clone();
        out.patches = self
            .patches
            .iter()
            .map(|p| super::refine_bisect(p, times))
            .collect::<Result<_>>()?;
        Ok(out)
    }

    /// Structural checks plus interface coincidence sampling.
    pub fn validate(&self) -> Result<()> {
        if self.patches.is_empty() {
            return Err(IgaError::model("patches", "model has no patches"));
        }
        let dim = self.dim();
        for (i, p) in self.patches.iter().enumerate() {
            if p.dim_space() != dim || p.dim_param() != dim {
                return Err(IgaError::model(
                    format!("patches[{i}]"),
                    format!("expected a {dim}-parametric patch in {dim}D"),
                ));
            }
        }
        if self.patch_materials.len() != self.patches.len() {
            return Err(IgaError::model("patch_materials", "one material index per patch required"));
        }
        if self.body_forces.len() != self.patches.len() {
            return Err(IgaError::model("body_forces", "one body force per patch required"));
        }
        for (i, m) in self.materials.iter().enumerate() {
            m.validate().map_err(|e| IgaError::model(format!("materials[{i}]"), e.to_string()))?;
            if m.dim() != dim {
                return Err(IgaError::model(
                    format!("materials[{i}].formulation"),
                    format!("formulation does not match {dim}D patches"),
                ));
            }
        }
        for (i, &m) in self.patch_materials.iter().enumerate() {
            if m >= self.materials.len() {
                return Err(IgaError::model(format!("patches[{i}].material"), format!("no material {m}")));
            }
        }
        let check_face = |path: String, patch: usize, face: &Face| -> Result<()> {
            let p = self
                .patches
                .get(patch)
                .ok_or_else(|| IgaError::model(path.clone(), format!("no patch {patch}")))?;
            face.check(p).map_err(|e| IgaError::model(path, e.to_string()))
        };
        for (i, d) in self.dirichlet.iter().enumerate() {
            check_face(format!("dirichlet[{i}]"), d.patch, &d.face)?;
            if let Some(&c) = d.components.iter().find(|&&c| c >= dim) {
                return Err(IgaError::model(
                    format!("dirichlet[{i}].components"),
                    format!("component {c} out of range"),
                ));
            }
        }
        for (i, n) in self.neumann.iter().enumerate() {
            check_face(format!("neumann[{i}]"), n.patch, &n.face)?;
        }
        for (i, iface) in self.interfaces.iter().enumerate() {
            let path = format!("interfaces[{i}]");
            for s in 0..2 {
                check_face(format!("{path}.faces[{s}]"), iface.patches[s], &iface.faces[s])?;
            }
            if iface.patches[0] == iface.patches[1] {
                return Err(IgaError::model(path, "interface joins a patch to itself"));
            }
            if !(0.0..=1.0).contains(&iface.gamma) {
                return Err(IgaError::model(format!("{path}.gamma"), format!("{} outside [0, 1]", iface.gamma)));
            }
            match iface.alpha {
                AlphaPolicy::Value(a) if !(a >= 0.0) => {
                    return Err(IgaError::model(format!("{path}.alpha"), "alpha must be non-negative"));
                }
                AlphaPolicy::Estimate { theta: Some(t) } if !(t > 0.0) => {
                    return Err(IgaError::model(format!("{path}.alpha.theta"), "theta must be positive"));
                }
                _ => {}
            }
            self.check_coincidence(i)?;
        }
        Ok(())
    }

    /// Samples points on face 1 of an interface and requires them to be
    /// invertible onto face 2.
    fn check_coincidence(&self, index: usize) -> Result<()> {
        let iface = &self.interfaces[index];
        let (p1, p2) = (&self.patches[iface.patches[0]], &self.patches[iface.patches[1]]);
        let (f1, f2) = (iface.faces[0], iface.faces[1]);
        let mesh1 = build_elements(p1, iface.patches[0]);
        let trace = trace_of_face(p1, &mesh1, f1)?;
        let mismatch = |x: Point, reason: String| IgaError::InterfaceMismatch { interface: index, point: x, reason };
        let samples = [0.0, 0.5, 1.0];
        for te in &trace.elements {
            let nf = te.bounds.len();
            for s in 0..3usize.pow(nf as u32) {
                let mut rest = s;
                let fc: Vec<f64> = te
                    .bounds
                    .iter()
                    .map(|&(a, b)| {
                        let t = samples[rest % 3];
                        rest /= 3;
                        a + t * (b - a)
                    })
                    .collect();
                let pt = f1.embed(p1, &fc);
                let (x, _) = p1.eval_geometry(&pt)?;
                let q = locate_point(p2, &x).map_err(|e| mismatch(x, e.to_string()))?;
                let (lo, hi) = p2.param_bounds()[f2.dir];
                let off = (q[f2.dir] - f2.value(p2)).abs() / (hi - lo);
                let (y, _) = p2.eval_geometry(&q)?;
                let dist = (0..3).map(|d| (x[d] - y[d]).powi(2)).sum::<f64>().sqrt();
                if off > COINCIDENCE_TOL || dist > COINCIDENCE_TOL * p2.diagonal() {
                    return Err(mismatch(x, format!("point does not lie on face {f2} of patch {}", iface.patches[1])));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::Formulation;
    use crate::mesh::Side;

    fn two_blocks(offset: f64) -> MultiPatchModel {
        let a = NurbsPatch::block(&[1, 1], &[2, 2], &[0., 0.], &[1., 1.]).unwrap();
        let b = NurbsPatch::block(&[2, 2], &[3, 1], &[1. + offset, 0.], &[2., 1.]).unwrap();
        let mut m = MultiPatchModel::new(vec![a, b], Material::new(1.0, 0.3, Formulation::PlaneStress).unwrap());
        m.interfaces.push(InterfaceSpec::new([0, 1], [Face::new(0, Side::Max), Face::new(0, Side::Min)]));
        m
    }

    #[test]
    fn coincident_interface_validates() {
        two_blocks(0.0).validate().unwrap();
    }

    #[test]
    fn gap_is_rejected() {
        let err = two_blocks(0.05).validate().unwrap_err();
        assert!(matches!(err, IgaError::InterfaceMismatch { interface: 0, .. }), "{err}");
    }

    #[test]
    fn bad_references_are_rejected() {
        let mut m = two_blocks(0.0);
        m.interfaces[0].gamma = 1.5;
        assert!(m.validate().unwrap_err().to_string().contains("gamma"));
        let mut m = two_blocks(0.0);
        m.dirichlet.push(DirichletSpec {
            patch: 4,
            face: Face::new(0, Side::Min),
            components: vec![],
            value: BoundaryFunction::Constant(vec![0.0]),
        });
        assert!(m.validate().unwrap_err().to_string().contains("dirichlet[0]"));
    }

    #[test]
    fn polynomial_and_constant_values() {
        let f = BoundaryFunction::Polynomial(vec![
            vec![Monomial { c: 2.0, pow: [1, 0, 0] }, Monomial { c: 1.0, pow: [0, 2, 0] }],
            vec![Monomial { c: -1.0, pow: [0, 0, 0] }],
        ]);
        assert_eq!(f.displacement(&[3.0, 2.0, 0.0]), [10.0, -1.0, 0.0]);
        let c = BoundaryFunction::Constant(vec![0.0, 0.0, 1.0]);
        assert_eq!(c.traction(&[0.0; 3], &[1.0, 0.0, 0.0]), [0.0, 0.0, 1.0]);
    }
}
