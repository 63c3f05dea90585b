//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The plain functions (`basis_table`, `beam_run`, `convergence_report`) hold the
//! logic and are tested natively; the `#[wasm_bindgen]` wrappers only convert
//! errors into JS exceptions.

use iga_core::coupling::AlphaPolicy;
use iga_core::io::probe;
use iga_core::models::timoshenko_two_patch;
use iga_core::solver::{assemble_global, solve, AssemblyOptions, SolveOptions};
use iga_core::spline::KnotVector;
use iga_core::verification::{convergence_study, ErrorReport, TimoshenkoParams};
use iga_core::Result;
use wasm_bindgen::prelude::*;

/// Largest element count per direction the page may request.
pub const MAX_ELEMENTS: usize = 64;

/// Basis functions of one knot vector sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTable {
    pub xi: Vec<f64>,
    /// `values[i][s]` is function `i` at sample `s`.
    pub values: Vec<Vec<f64>>,
}

pub fn basis_table(degree: usize, knots: &[f64], samples: usize) -> Result<BasisTable> {
    let kv = KnotVector::new(knots.to_vec(), degree)?;
    let samples = samples.max(2);
    let (a, b) = (kv.first(), kv.last());
    let xi: Vec<f64> = (0..samples).map(|s| a + (b - a) * s as f64 / (samples - 1) as f64).collect();
    let mut values = vec![vec![0.0; samples]; kv.num_basis()];
    for (s, &x) in xi.iter().enumerate() {
        let eval = kv.basis_and_derivs(x, 0)?;
        for (k, v) in eval.values().iter().enumerate() {
            values[eval.first_index() + k][s] = *v;
        }
    }
    Ok(BasisTable { xi, values })
}

/// Coupled two-patch beam solve sampled along the midline.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct BeamRun {
    x: Vec<f64>,
    uy: Vec<f64>,
    uy_exact: Vec<f64>,
    sxy: Vec<f64>,
    tip: f64,
    tip_exact: f64,
    dofs: usize,
    min_pivot: f64,
}

#[wasm_bindgen]
impl BeamRun {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    pub fn uy(&self) -> Vec<f64> {
        self.uy.clone()
    }
    pub fn uy_exact(&self) -> Vec<f64> {
        self.uy_exact.clone()
    }
    pub fn sxy(&self) -> Vec<f64> {
        self.sxy.clone()
    }
    pub fn tip(&self) -> f64 {
        self.tip
    }
    pub fn tip_exact(&self) -> f64 {
        self.tip_exact
    }
    pub fn dofs(&self) -> usize {
        self.dofs
    }
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }
    /// Relative L2 error of the sampled midline deflection.
    pub fn midline_error(&self) -> f64 {
        let (num, den) = self
            .uy
            .iter()
            .zip(&self.uy_exact)
            .fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b) * (a - b), d + b * b));
        (num / den).sqrt()
    }
}

fn check_counts(counts: &[usize]) -> Result<()> {
    if counts.iter().any(|&n| n == 0 || n > MAX_ELEMENTS) {
        return Err(iga_core::IgaError::Argument(format!("element counts must lie in 1..={MAX_ELEMENTS}")));
    }
    Ok(())
}

/// `alpha <= 0` selects the per-element estimate.
pub fn beam_run(degree: usize, left: [usize; 2], right: [usize; 2], alpha: f64, samples: usize) -> Result<BeamRun> {
    check_counts(&[left[0], left[1], right[0], right[1]])?;
    let t = TimoshenkoParams::default();
    let policy = if alpha > 0.0 { AlphaPolicy::Value(alpha) } else { AlphaPolicy::Estimate { theta: None } };
    let model = timoshenko_two_patch(&t, degree, left, right, policy)?;
    let system = assemble_global(&model, &AssemblyOptions::default())?;
    let sol = solve(&system, &SolveOptions::default())?;
    let samples = samples.max(2);
    let mut run = BeamRun {
        x: Vec::with_capacity(samples),
        uy: Vec::with_capacity(samples),
        uy_exact: Vec::with_capacity(samples),
        sxy: Vec::with_capacity(samples),
        tip: 0.0,
        tip_exact: t.exact(t.length, 0.0).0[1],
        dofs: system.num_dofs(),
        min_pivot: sol.stats.pivots.min_pivot,
    };
    for s in 0..samples {
        let x = t.length * s as f64 / (samples - 1) as f64;
        let (_, f) = probe(&sol, &[x, 0.0])?;
        run.x.push(x);
        run.uy.push(f.u[1]);
        run.uy_exact.push(t.exact(x, 0.0).0[1]);
        run.sxy.push(f.stress[2]);
    }
    run.tip = *run.uy.last().unwrap();
    Ok(run)
}

/// Convergence of the coupled beam from a coarse non-matching start mesh.
pub fn convergence_report(degree: usize, levels: usize) -> Result<ErrorReport> {
    if !(3..=5).contains(&levels) {
        return Err(iga_core::IgaError::Argument("levels must lie in 3..=5".into()));
    }
    let t = TimoshenkoParams::default();
    let template = timoshenko_two_patch(&t, degree, [4, 2], [3, 1], AlphaPolicy::Estimate { theta: None })?;
    convergence_study(&template, levels, None, &t, &AssemblyOptions::default(), &SolveOptions::default())
}

fn js(e: iga_core::IgaError) -> JsError {
    JsError::new(&e.to_string())
}

/// Row 0 holds the sample parameters, then one row per basis function.
#[wasm_bindgen]
pub fn basis_functions(degree: usize, knots: Vec<f64>, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    let table = basis_table(degree, &knots, samples).map_err(js)?;
    Ok(table.xi.iter().chain(table.values.iter().flatten()).copied().collect())
}

#[wasm_bindgen]
pub fn solve_beam(
    degree: usize,
    left_x: usize,
    left_y: usize,
    right_x: usize,
    right_y: usize,
    alpha: f64,
    samples: usize,
) -> std::result::Result<BeamRun, JsError> {
    beam_run(degree, [left_x, left_y], [right_x, right_y], alpha, samples).map_err(js)
}

/// CSV table as written by the `converge` command.
#[wasm_bindgen]
pub fn convergence(degree: usize, levels: usize) -> std::result::Result<String, JsError> {
    convergence_report(degree, levels).map(|r| r.to_csv()).map_err(js)
}
