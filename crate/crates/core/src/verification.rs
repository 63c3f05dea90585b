//! Closed-form reference fields, error norms and convergence-rate fitting.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::elasticity::{constitutive_matrix, physical_basis, Formulation};
use crate::error::{IgaError, Result};
use crate::mesh::{build_elements, MultiPatchModel};
use crate::quadrature::TensorRule;
use crate::solver::{assemble_global, solve, AssemblyOptions, Solution, SolveOptions};
use crate::spline::{parent_to_param, NurbsPatch, Point};

/// End-loaded cantilever of depth `D` and length `L` under a parabolic shear
/// traction of resultant `P`, in plane stress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimoshenkoParams {
    pub length: f64,
    pub depth: f64,
    pub load: f64,
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    #[serde(rename = "nu")]
    pub poisson_ratio: f64,
}

impl Default for TimoshenkoParams {
    fn default() -> Self {
        TimoshenkoParams { length: 48.0, depth: 6.0, load: 1000.0, youngs_modulus: 3e7, poisson_ratio: 0.3 }
    }
}

impl TimoshenkoParams {
    pub fn inertia(&self) -> f64 {
        self.depth.powi(3) / 12.0
    }

    /// `(u, sigma)` with `sigma` in Voigt order `(xx, yy, xy)`.
    pub fn exact(&self, x: f64, y: f64) -> ([f64; 2], [f64; 3]) {
        let TimoshenkoParams { length: l, depth: d, load: p, youngs_modulus: e, poisson_ratio: nu } = *self;
        let i = self.inertia();
        let ux = p * y / (6.0 * e * i) * ((6.0 * l - 3.0 * x) * x + (2.0 + nu) * (y * y - d * d / 4.0));
        let uy = -p / (6.0 * e * i)
            * (3.0 * nu * y * y * (l - x) + (4.0 + 5.0 * nu) * d * d * x / 4.0 + (3.0 * l - x) * x * x);
        let sxx = p * (l - x) * y / i;
        let sxy = -p / (2.0 * i) * (d * d / 4.0 - y * y);
        ([ux, uy], [sxx, 0.0, sxy])
    }

    /// Shear traction on the loaded end `x = L`.
    pub fn end_traction(&self, y: f64) -> f64 {
        -self.load / (2.0 * self.inertia()) * (self.depth * self.depth / 4.0 - y * y)
    }
}

pub fn timoshenko_exact(params: &TimoshenkoParams, x: f64, y: f64) -> ([f64; 2], [f64; 3]) {
    params.exact(x, y)
}

/// A reference field for error measurement.
pub trait ExactSolution: Sync {
    fn displacement(&self, x: &Point) -> [f64; 3];
    /// Voigt strain with engineering shear.
    fn strain(&self, x: &Point) -> Vec<f64>;
}

impl ExactSolution for TimoshenkoParams {
    fn displacement(&self, x: &Point) -> [f64; 3] {
        let (u, _) = self.exact(x[0], x[1]);
        [u[0], u[1], 0.0]
    }

    fn strain(&self, x: &Point) -> Vec<f64> {
        let (_, s) = self.exact(x[0], x[1]);
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        vec![(s[0] - nu * s[1]) / e, (s[1] - nu * s[0]) / e, 2.0 * (1.0 + nu) * s[2] / e]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub displacement: f64,
    pub energy: f64,
}

/// `e_disp = (int |u - u_ex|^2)^1/2` and `e_energy = (1/2 int (eps - eps_ex) . D (eps - eps_ex))^1/2`,
/// integrated with the stiffness rule.
pub fn error_norms(sol: &Solution, exact: &dyn ExactSolution) -> Result<ErrorNorms> {
    let model = &sol.model;
    let dim = model.dim();
    let mut disp = 0.0;
    let mut energy = 0.0;
    for (m, patch) in model.patches.iter().enumerate() {
        let c = constitutive_matrix(model.material_of(m))?;
        let rule = TensorRule::new(&patch.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
        for elem in &build_elements(patch, m).elements {
            for (q, parent) in rule.points.iter().enumerate() {
                let (pt, jp) = parent_to_param(&elem.bounds, parent)?;
                let pb = physical_basis(patch, &elem.spans, &pt);
                let w = rule.weights[q] * jp * pb.det_j;
                let u = pb.displacement(&sol.control[m]);
                let ue = exact.displacement(&pb.x);
                disp += w * (0..dim).map(|i| (u[i] - ue[i]).powi(2)).sum::<f64>();
                let eps = pb.strain(dim, &sol.control[m]);
                let de = DVector::from_iterator(eps.len(), eps.iter().zip(exact.strain(&pb.x)).map(|(a, b)| a - b));
                energy += w * de.dot(&(&c * &de));
            }
        }
    }
    Ok(ErrorNorms { displacement: disp.sqrt(), energy: (0.5 * energy).sqrt() })
}

/// Largest physical distance between corners of any element.
pub fn max_element_diagonal(model: &MultiPatchModel) -> Result<f64> {
    let mut h = 0.0f64;
    for (m, patch) in model.patches.iter().enumerate() {
        for elem in &build_elements(patch, m).elements {
            h = h.max(box_diameter(patch, &elem.bounds)?);
        }
    }
    Ok(h)
}

fn box_diameter(patch: &NurbsPatch, bounds: &[(f64, f64)]) -> Result<f64> {
    let corners: Vec<Point> = (0..(1usize << bounds.len()))
        .map(|c| {
            let pt: Vec<f64> =
                bounds.iter().enumerate().map(|(k, &(a, b))| if c >> k & 1 == 0 { a } else { b }).collect();
            patch.eval_geometry(&pt).map(|(x, _)| x)
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub e_disp: f64,
    pub e_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub displacement: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub levels: Vec<LevelResult>,
    /// Fitted only with at least three levels.
    pub rates: Option<Rates>,
}

impl ErrorReport {
    pub fn from_levels(levels: Vec<LevelResult>) -> Self {
        let rates = (levels.len() >= 3).then(|| {
            let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
            Rates {
                displacement: fit_rate(&h, &levels.iter().map(|l| l.e_disp).collect::<Vec<_>>()),
                energy: fit_rate(&h, &levels.iter().map(|l| l.e_energy).collect::<Vec<_>>()),
            }
        });
        ErrorReport { levels, rates }
    }

    /// `level,h,dofs,e_disp,e_energy` rows and a trailing `#` line with the rates.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,dofs,e_disp,e_energy\n");
        for l in &self.levels {
            let _ = writeln!(s, "{},{:.12e},{},{:.12e},{:.12e}", l.level, l.h, l.dofs, l.e_disp, l.e_energy);
        }
        match self.rates {
            Some(r) => {
                let _ = writeln!(s, "# rates: e_disp={:.6} e_energy={:.6}", r.displacement, r.energy);
            }
            None => s.push_str("# rates: n/a (fewer than 3 levels)\n"),
        }
        s
    }
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_rate(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Solves `template` refined by 0..levels bisections and measures the errors.
///
/// With `degree`, patches below it are first elevated. Estimated interface alphas
/// follow each level's mesh automatically.
pub fn convergence_study(
    template: &MultiPatchModel,
    levels: usize,
    degree: Option<usize>,
    exact: &dyn ExactSolution,
    assembly: &AssemblyOptions,
    solve_opts: &SolveOptions,
) -> Result<ErrorReport> {
    if levels < 3 {
        return Err(IgaError::Argument(format!("a convergence study needs at least 3 levels, got {levels}")));
    }
    let mut base = template.clone();
    if let Some(p) = degree {
        for patch in &mut base.patches {
            let target: Vec<usize> = patch.degrees().iter().map(|&q| q.max(p)).collect();
            *patch = patch.elevate_to(&target)?;
        }
    }
    base.validate()?;
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let model = base.refined(level)?;
        let system = assemble_global(&model, assembly)?;
        let sol = solve(&system, solve_opts)?;
        let norms = error_norms(&sol, exact)?;
        out.push(LevelResult {
            level,
            h: max_element_diagonal(&model)?,
            dofs: system.num_dofs(),
            e_disp: norms.displacement,
            e_energy: norms.energy,
        });
    }
    Ok(ErrorReport::from_levels(out))
}

/// Whether the material matches the plane-stress assumption of the beam solution.
pub fn is_plane_stress(model: &MultiPatchModel) -> bool {
    model.materials.iter().all(|m| m.formulation == Formulation::PlaneStress)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::Material;
    use crate::mesh::{BoundaryFunction, DirichletSpec, Face, Side};
    use crate::solver::{assemble_global, solve};

    #[test]
    fn beam_examples() {
        let t = TimoshenkoParams::default();
        assert_eq!(t.exact(0.0, 0.0).0, [0.0, 0.0]);
        // u_y(L, 0) = -P/(6EI) [(4 + 5 nu) D^2 L / 4 + 2 L^3] = -0.0690...
        let uy = t.exact(48.0, 0.0).0[1];
        let expect = -1000.0 / (6.0 * 3e7 * 18.0) * (5.5 * 36.0 * 48.0 / 4.0 + 2.0 * 48.0f64.powi(3));
        assert!((uy - expect).abs() < 1e-15);
        assert!((uy + 0.0690).abs() < 5e-4, "{uy}");
        for x in [0.0, 10.0, 48.0] {
            assert!((t.exact(x, 0.0).1[2] + 250.0).abs() < 1e-10);
        }
        for y in [-3.0, -1.0, 0.5, 3.0] {
            assert_eq!(t.exact(48.0, y).1[2], t.end_traction(y));
        }
    }

    #[test]
    fn exact_stress_is_divergence_free() {
        let t = TimoshenkoParams::default();
        let h = 1e-4;
        let scale = t.load / t.inertia();
        for &(x, y) in &[(5.0, 1.0), (20.0, -2.5), (40.0, 0.3)] {
            let s = |x: f64, y: f64| t.exact(x, y).1;
            let dx = |k: usize| (s(x + h, y)[k] - s(x - h, y)[k]) / (2.0 * h);
            let dy = |k: usize| (s(x, y + h)[k] - s(x, y - h)[k]) / (2.0 * h);
            assert!((dx(0) + dy(2)).abs() < 1e-6 * scale);
            assert!((dx(2) + dy(1)).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn exact_strain_matches_displacement_gradient() {
        let t = TimoshenkoParams::default();
        let h = 1e-4;
        let (x, y) = (17.0, 1.3);
        let u = |x: f64, y: f64| t.exact(x, y).0;
        let eps = t.strain(&[x, y, 0.0]);
        let exx = (u(x + h, y)[0] - u(x - h, y)[0]) / (2.0 * h);
        let eyy = (u(x, y + h)[1] - u(x, y - h)[1]) / (2.0 * h);
        let gxy = (u(x, y + h)[0] - u(x, y - h)[0] + u(x + h, y)[1] - u(x - h, y)[1]) / (2.0 * h);
        assert!((exx - eps[0]).abs() < 1e-9 && (eyy - eps[1]).abs() < 1e-9 && (gxy - eps[2]).abs() < 1e-9);
    }

    struct Offset(f64);
    impl ExactSolution for Offset {
        fn displacement(&self, _: &Point) -> [f64; 3] {
            [self.0, 0.0, 0.0]
        }
        fn strain(&self, _: &Point) -> Vec<f64> {
            vec![0.0; 3]
        }
    }

    #[test]
    fn constant_offset_norms() {
        let patch = NurbsPatch::block(&[2, 2], &[2, 2], &[0., 0.], &[1., 1.]).unwrap();
        let mut model = MultiPatchModel::new(vec![patch], Material::new(1.0, 0.3, Formulation::PlaneStress).unwrap());
        model.dirichlet.push(DirichletSpec {
            patch: 0,
            face: Face::new(0, Side::Min),
            components: vec![],
            value: BoundaryFunction::Constant(vec![0.0, 0.0]),
        });
        let sol = solve(&assemble_global(&model, &AssemblyOptions::default()).unwrap(), &SolveOptions::default())
            .unwrap();
        let n = error_norms(&sol, &Offset(0.25)).unwrap();
        assert!((n.displacement - 0.25).abs() < 1e-14);
        assert_eq!(n.energy, 0.0);
    }

    #[test]
    fn rate_fit_and_csv() {
        let h = [1.0, 0.5, 0.25, 0.125];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((fit_rate(&h, &e) - 2.0).abs() < 1e-12);
        let levels: Vec<LevelResult> = h
            .iter()
            .enumerate()
            .map(|(i, &h)| LevelResult { level: i, h, dofs: 10 * (i + 1), e_disp: h * h, e_energy: h })
            .collect();
        let report = ErrorReport::from_levels(levels.clone());
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,h,dofs,e_disp,e_energy");
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("# rates: e_disp=2.000000 e_energy=1.000000"));
        assert!(ErrorReport::from_levels(levels[..2].to_vec()).rates.is_none());
    }
}
