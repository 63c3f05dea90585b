//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::time::Instant;

use iga_core::coupling::{generate_interface_gps, AlphaPolicy};
use iga_core::elasticity::{constitutive_matrix, Formulation, Material};
use iga_core::error::IgaError;
use iga_core::io::probe;
use iga_core::mesh::{locate_point, MultiPatchModel};
use iga_core::models::{cantilever_3d, linear_field, patch_test_pair, timoshenko_single_patch, timoshenko_two_patch};
use iga_core::solver::{assemble_global, evaluate_field, solve, AssemblyOptions, Solution, SolveOptions};
use iga_core::spline::{KnotVector, NurbsPatch};
use iga_core::verification::{convergence_study, ErrorReport, TimoshenkoParams};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIP_REFERENCE: f64 = -0.0690;

fn report(id: &str, pass: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn run(model: &MultiPatchModel) -> Solution {
    let system = assemble_global(model, &AssemblyOptions::default()).expect("assembly");
    solve(&system, &SolveOptions::default()).expect("solve")
}

fn field_at(sol: &Solution, x: [f64; 3]) -> iga_core::solver::FieldValue {
    probe(sol, &x).expect("probe").1
}

/// `(x_i, 0)` for 100 points spanning the beam.
fn midline(t: &TimoshenkoParams) -> Vec<[f64; 3]> {
    (0..100).map(|i| [t.length * i as f64 / 99.0, 0.0, 0.0]).collect()
}

fn midline_error(sol: &Solution, t: &TimoshenkoParams) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for x in midline(t) {
        let uy = field_at(sol, x).u[1];
        let ex = t.exact(x[0], x[1]).0[1];
        num += (uy - ex).powi(2);
        den += ex * ex;
    }
    (num / den).sqrt()
}

fn tip(sol: &Solution, t: &TimoshenkoParams) -> f64 {
    field_at(sol, [t.length, 0.0, 0.0]).u[1]
}

fn beam_checks(id: &str, sol: &Solution, t: &TimoshenkoParams, seconds: f64) -> (bool, String) {
    let err = midline_error(sol, t);
    let tip = tip(sol, t);
    let tip_err = ((tip - TIP_REFERENCE) / TIP_REFERENCE).abs();
    let pass = err < 0.02 && tip_err < 0.02 && seconds < 10.0;
    (pass, format!("[{id}] midline L2 rel err {err:.4} (< 0.02), tip {tip:.6} rel err {tip_err:.4} (< 0.02), {seconds:.2}s (< 10s)"))
}

#[test]
fn criterion_1_conforming_beam() {
    let t = TimoshenkoParams::default();
    let start = Instant::now();
    let model = timoshenko_two_patch(&t, 1, [20, 4], [20, 4], AlphaPolicy::Value(1e8)).unwrap();
    let sol = run(&model);
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = beam_checks("conforming 20x4 + 20x4", &sol, &t, secs);
    report("1", pass, detail);
}

fn grid_displacements(sol: &Solution, t: &TimoshenkoParams) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..20 {
        for j in 0..5 {
            let x = t.length * (i as f64 + 0.5) / 20.0;
            let y = t.depth * (j as f64 / 4.0 - 0.5);
            let u = field_at(sol, [x, y, 0.0]).u;
            out.extend([u[0], u[1]]);
        }
    }
    out
}

#[test]
fn criterion_2_nonconforming_beam() {
    let t = TimoshenkoParams::default();
    let start = Instant::now();
    let model = timoshenko_two_patch(&t, 1, [20, 8], [20, 4], AlphaPolicy::Value(1e8)).unwrap();
    let sol = run(&model);
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = beam_checks("non-conforming 20x8 + 20x4", &sol, &t, secs);

    let mono = run(&timoshenko_single_patch(&t, 1, [40, 8]).unwrap());
    let a = DVector::from_vec(grid_displacements(&sol, &t));
    let b = DVector::from_vec(grid_displacements(&mono, &t));
    let diff = (&a - &b).norm() / b.norm();
    report("2", pass && diff < 0.01, format!("{detail}; vs monolithic 40x8 rel L2 {diff:.5} (< 0.01)"));
}

/// Coarse non-nested start meshes of the convergence sequences.
const CONVERGENCE_LEFT: [usize; 2] = [4, 2];
const CONVERGENCE_RIGHT: [usize; 2] = [3, 1];

fn beam_convergence(p: usize) -> ErrorReport {
    let t = TimoshenkoParams::default();
    let template = timoshenko_two_patch(&t, p, CONVERGENCE_LEFT, CONVERGENCE_RIGHT, AlphaPolicy::Estimate { theta: None })
        .unwrap();
    convergence_study(&template, 4, None, &t, &AssemblyOptions::default(), &SolveOptions::default()).unwrap()
}

#[test]
fn criterion_3_convergence_rates() {
    let start = Instant::now();
    let r1 = beam_convergence(1);
    let r2 = beam_convergence(2);
    let secs = start.elapsed().as_secs_f64();
    for (p, r) in [(1, &r1), (2, &r2)] {
        print!("p={p}\n{}", r.to_csv());
    }
    let a = r1.rates.unwrap();
    let b = r2.rates.unwrap();
    let pass = (1.8..=2.2).contains(&a.displacement)
        && (0.85..=1.15).contains(&a.energy)
        && (2.7..=3.3).contains(&b.displacement)
        && (1.8..=2.2).contains(&b.energy)
        && secs < 120.0;
    report(
        "3",
        pass,
        format!(
            "p=1 disp {:.3} in [1.8,2.2], energy {:.3} in [0.85,1.15]; p=2 disp {:.3} in [2.7,3.3], energy {:.3} in [1.8,2.2]; {secs:.1}s (< 120s)",
            a.displacement, a.energy, b.displacement, b.energy
        ),
    );
}

#[test]
fn criterion_4_shear_stress_recovery() {
    let t = TimoshenkoParams::default();
    let finest = timoshenko_two_patch(&t, 2, CONVERGENCE_LEFT, CONVERGENCE_RIGHT, AlphaPolicy::Estimate { theta: None })
        .unwrap()
        .refined(3)
        .unwrap();
    let sol = run(&finest);
    let max = (0..=400)
        .map(|i| field_at(&sol, [t.length * i as f64 / 400.0, 0.0, 0.0]).stress[2].abs())
        .fold(0.0f64, f64::max);
    let err = (max - 250.0).abs() / 250.0;
    report("4", err < 0.02, format!("max |sigma_xy| on midline {max:.3}, rel err {err:.5} (< 0.02)"));
}

fn patch_test_error(model: &MultiPatchModel, g: &[Vec<f64>], samples: usize, seed: u64) -> f64 {
    let sol = run(model);
    let dim = model.dim();
    let mat = model.materials[0];
    let mut eps = vec![0.0; if dim == 2 { 3 } else { 6 }];
    for i in 0..dim {
        eps[i] = g[i][i];
    }
    let shear: &[(usize, usize, usize)] = if dim == 2 { &[(0, 1, 2)] } else { &[(0, 1, 3), (1, 2, 4), (0, 2, 5)] };
    for &(i, j, r) in shear {
        eps[r] = g[i][j] + g[j][i];
    }
    let exact = constitutive_matrix(&mat).unwrap() * DVector::from_vec(eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for m in 0..model.patches.len() {
        for _ in 0..samples {
            let pt: Vec<f64> = model.patches[m].param_bounds().iter().map(|&(a, b)| rng.gen_range(a..=b)).collect();
            let s = DVector::from_vec(evaluate_field(&sol, m, &pt).unwrap().stress);
            worst = worst.max((&s - &exact).norm() / exact.norm());
        }
    }
    worst
}

#[test]
fn criterion_5_cross_interface_patch_test() {
    let g2 = vec![vec![1e-3, 4e-4], vec![-2e-4, -5e-4]];
    let mat2 = Material::new(3e7, 0.3, Formulation::PlaneStress).unwrap();
    let m2 = patch_test_pair(2, &[4, 4], &[3, 5], mat2, linear_field(&[1e-3, -2e-3], &g2)).unwrap();
    let e2 = patch_test_error(&m2, &g2, 200, 1);

    let g3 = vec![vec![1e-3, 2e-4, -3e-4], vec![-1e-4, 5e-4, 2e-4], vec![3e-4, 1e-4, -4e-4]];
    let mat3 = Material::new(1000.0, 0.3, Formulation::Solid3d).unwrap();
    let m3 = patch_test_pair(1, &[2, 2, 2], &[3, 3, 3], mat3, linear_field(&[0.0, 1e-3, 2e-3], &g3)).unwrap();
    let e3 = patch_test_error(&m3, &g3, 200, 2);
    report("5", e2 < 1e-6 && e3 < 1e-6, format!("2D (4x4 | 3x5, p=2) {e2:.2e}, 3D (2x2x2 | 3x3x3, p=1) {e3:.2e} (< 1e-6)"));
}

fn probes_3d() -> Vec<[f64; 3]> {
    let yz = [[0.25, 0.25], [0.75, 0.25], [0.5, 0.5], [0.25, 0.75], [0.75, 0.75]];
    let mut out = Vec::new();
    for i in 0..10 {
        let x = 1.0 + 8.0 * i as f64 / 9.0;
        for p in &yz {
            out.push([x, p[0], p[1]]);
        }
    }
    out
}

#[test]
fn criterion_6_coupled_3d_cantilever() {
    let mat = Material::new(1000.0, 0.3, Formulation::Solid3d).unwrap();
    let size = [10.0, 1.0, 1.0];
    let start = Instant::now();
    let coupled = cantilever_3d(mat, size, 3, [16, 4, 4], Some([16, 1, 2]), 1.0).unwrap();
    let sol = run(&coupled);
    let secs = start.elapsed().as_secs_f64();
    let mono = run(&cantilever_3d(mat, size, 3, [32, 4, 4], None, 1.0).unwrap());
    let probes = probes_3d();
    assert_eq!(probes.len(), 50);
    let a = DVector::from_iterator(50, probes.iter().map(|&x| field_at(&sol, x).stress[0]));
    let b = DVector::from_iterator(50, probes.iter().map(|&x| field_at(&mono, x).stress[0]));
    let err = (&a - &b).norm() / b.norm();
    report("6", err < 0.03 && secs < 180.0, format!(
            "sigma_xx at 50 probes rel L2 {err:.3e} (< 0.03), |sigma_xx| up to {:.3}, coupled solve {secs:.1}s (< 180s)",
            b.amax()
        ));
}

fn min_pivot(model: &MultiPatchModel) -> Result<f64, IgaError> {
    let system = assemble_global(model, &AssemblyOptions::default())?;
    Ok(solve(&system, &SolveOptions { spd_check: true })?.stats.pivots.min_pivot)
}

#[test]
fn criterion_7_stability() {
    let t = TimoshenkoParams::default();
    let est = AlphaPolicy::Estimate { theta: None };
    let mut models = vec![
        ("criterion 1 mesh", timoshenko_two_patch(&t, 1, [20, 4], [20, 4], est).unwrap()),
        ("criterion 2 mesh", timoshenko_two_patch(&t, 1, [20, 8], [20, 4], est).unwrap()),
    ];
    for p in [1, 2] {
        let base = timoshenko_two_patch(&t, p, CONVERGENCE_LEFT, CONVERGENCE_RIGHT, est).unwrap();
        for level in 0..4 {
            models.push((if p == 1 { "criterion 3 p=1" } else { "criterion 3 p=2" }, base.refined(level).unwrap()));
        }
    }
    let mut all_pd = true;
    let mut worst = f64::INFINITY;
    for (name, m) in &models {
        match min_pivot(m) {
            Ok(p) => worst = worst.min(p),
            Err(e) => {
                println!("  {name}: {e}");
                all_pd = false;
            }
        }
    }
    // alpha = 0 on the non-conforming mesh: either outcome is allowed, but the
    // check must run and report a pivot location when it fails.
    let zero = timoshenko_two_patch(&t, 1, [20, 8], [20, 4], AlphaPolicy::Value(0.0)).unwrap();
    let diagnostic = match min_pivot(&zero) {
        Ok(p) => format!("alpha=0 passed the SPD check (min pivot {p:.3e})"),
        Err(IgaError::NotPositiveDefinite { dof, pivot }) => {
            format!("alpha=0 rejected: pivot {pivot:.3e} at dof {dof}")
        }
        Err(e) => panic!("unexpected failure for alpha=0: {e}"),
    };
    report("7", all_pd, format!("{} estimated-alpha systems PD (min pivot {worst:.3e}); {diagnostic}", models.len()));
}

#[test]
fn criterion_8_property_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut lines = Vec::new();
    let mut pass = true;
    let mut check = |name: &str, value: f64, tol: f64| {
        let ok = value < tol;
        pass &= ok;
        lines.push(format!("{name} {value:.2e} (< {tol:.0e})"));
    };

    // Curved rational patch for the spline properties.
    let base = NurbsPatch::block(&[2, 3], &[3, 2], &[0., 0.], &[2., 1.]).unwrap();
    let cps = base.control_points().iter().map(|p| [p[0] + 0.2 * p[1] * p[1], p[1] + 0.1 * p[0] * p[0], 0.]).collect();
    let ws = (0..base.num_control_points()).map(|_| rng.gen_range(0.5..2.0)).collect();
    let patch = NurbsPatch::new(base.knot_vectors().to_vec(), cps, ws, 2).unwrap();

    let mut pou = 0.0f64;
    let mut deriv = 0.0f64;
    let mut inverse = 0.0f64;
    for _ in 0..300 {
        let pt = [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)];
        let rb = patch.rational_basis(&pt).unwrap();
        pou = pou.max((rb.values.iter().sum::<f64>() - 1.0).abs());
        let h = 1e-6;
        for d in 0..2 {
            let mut lo = pt;
            let mut hi = pt;
            lo[d] = (pt[d] - h).max(0.0);
            hi[d] = (pt[d] + h).min(1.0);
            let a = patch.rational_basis_in_spans(&rb.spans, &lo);
            let b = patch.rational_basis_in_spans(&rb.spans, &hi);
            let scale = rb.derivs.iter().map(|g| g[d].abs()).fold(0.0, f64::max);
            for k in 0..rb.values.len() {
                let fd = (b.values[k] - a.values[k]) / (hi[d] - lo[d]);
                deriv = deriv.max((fd - rb.derivs[k][d]).abs() / scale);
            }
        }
        let (x, _) = patch.eval_geometry(&pt).unwrap();
        let back = locate_point(&patch, &x).unwrap();
        inverse = inverse.max((back[0] - pt[0]).abs().max((back[1] - pt[1]).abs()));
    }
    check("partition of unity", pou, 1e-12);
    check("basis derivatives vs finite differences", deriv, 1e-5);
    check("inverse-map round trip", inverse, 1e-9);

    let circle = NurbsPatch::new(
        vec![KnotVector::new(vec![0., 0., 0., 1., 1., 1.], 2).unwrap()],
        vec![[1., 0., 0.], [1., 1., 0.], [0., 1., 0.]],
        vec![1.0, std::f64::consts::FRAC_1_SQRT_2, 1.0],
        2,
    )
    .unwrap();
    let mut circ = 0.0f64;
    for _ in 0..300 {
        let (x, _) = circle.eval_geometry(&[rng.gen_range(0.0..=1.0)]).unwrap();
        circ = circ.max((x[0].hypot(x[1]) - 1.0).abs());
    }
    check("quarter circle on unit circle", circ, 1e-12);

    let t = TimoshenkoParams::default();
    let beam = timoshenko_two_patch(&t, 2, [5, 3], [4, 2], AlphaPolicy::Estimate { theta: None }).unwrap();
    let weights: f64 = generate_interface_gps(&beam, 0, None).unwrap().iter().map(|g| g.weight).sum();
    let mat = Material::new(1.0, 0.3, Formulation::Solid3d).unwrap();
    let solid = cantilever_3d(mat, [4.0, 1.5, 0.5], 2, [2, 3, 2], Some([3, 2, 1]), 1.0).unwrap();
    let area: f64 = generate_interface_gps(&solid, 0, None).unwrap().iter().map(|g| g.weight).sum();
    check("interface weights vs area", (weights - t.depth).abs().max((area - 0.75).abs()), 1e-10);

    let system = assemble_global(&beam, &AssemblyOptions::default()).unwrap();
    check("global matrix symmetry", system.matrix.asymmetry() / system.matrix.max_abs(), 1e-9);
    let sol = solve(&system, &SolveOptions::default()).unwrap();
    check("reaction equilibrium", sol.equilibrium_error(), 1e-8);

    report("8", pass, lines.join("; "));
}
