use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{IgaError, Result};
use crate::mesh::build_elements;
use crate::solver::{evaluate_in_spans, von_mises, Solution};
use crate::spline::unflatten;

const VTK_QUAD: u8 = 9;
const VTK_HEXAHEDRON: u8 = 12;

/// Legacy ASCII unstructured grid of the solution, sampled on a lattice of
/// `density` cells per element edge. Point data: `u` (3 components), `sigma`
/// (Voigt components) and `vonMises`.
pub fn vtk_string(sol: &Solution, density: usize) -> Result<String> {
    if density == 0 {
        return Err(IgaError::Argument("VTK density must be positive".into()));
    }
    let model = &sol.model;
    let dim = model.dim();
    let per_edge = density + 1;
    let pts_per_elem = per_edge.pow(dim as u32);
    let cells_per_elem = density.pow(dim as u32);

    let mut points = Vec::new();
    let mut u = Vec::new();
    let mut sigma = Vec::new();
    let mut vm = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for (m, patch) in model.patches.iter().enumerate() {
        let mat = model.material_of(m);
        for elem in &build_elements(patch, m).elements {
            let base = points.len();
            for s in 0..pts_per_elem {
                let ijk = unflatten(s, &vec![per_edge; dim]);
                let pt: Vec<f64> = elem
                    .bounds
                    .iter()
                    .enumerate()
                    .map(|(d, &(a, b))| a + (b - a) * ijk[d] as f64 / density as f64)
                    .collect();
                let f = evaluate_in_spans(sol, m, &elem.spans, &pt)?;
                points.push(f.x);
                u.push(f.u);
                vm.push(von_mises(&f.stress, mat.formulation, mat.poisson_ratio));
                sigma.push(f.stress);
            }
            let corner = |i: usize, j: usize, k: usize| base + i + per_edge * (j + per_edge * k);
            for c in 0..cells_per_elem {
                let [i, j, k] = unflatten(c, &vec![density; dim]);
                let mut cell = vec![corner(i, j, k), corner(i + 1, j, k), corner(i + 1, j + 1, k), corner(i, j + 1, k)];
                if dim == 3 {
                    cell.extend([corner(i, j, k + 1), corner(i + 1, j, k + 1), corner(i + 1, j + 1, k + 1), corner(i, j + 1, k + 1)]);
                }
                cells.push(cell);
            }
        }
    }

    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("iga solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    let nodes = if dim == 3 { 8 } else { 4 };
    let _ = writeln!(s, "CELLS {} {}", cells.len(), cells.len() * (nodes + 1));
    for c in &cells {
        s.push_str(&nodes.to_string());
        for v in c {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", cells.len());
    let ty = if dim == 3 { VTK_HEXAHEDRON } else { VTK_QUAD };
    for _ in &cells {
        let _ = writeln!(s, "{ty}");
    }
    let _ = writeln!(s, "POINT_DATA {}", points.len());
    s.push_str("FIELD FieldData 3\n");
    let _ = writeln!(s, "u 3 {} double", points.len());
    for v in &u {
        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
    }
    let ns = sigma.first().map_or(0, Vec::len);
    let _ = writeln!(s, "sigma {ns} {} double", points.len());
    for v in &sigma {
        let row: Vec<String> = v.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    let _ = writeln!(s, "vonMises 1 {} double", points.len());
    for v in &vm {
        let _ = writeln!(s, "{v}");
    }
    Ok(s)
}

pub fn export_vtk(sol: &Solution, density: usize, path: &Path) -> Result<()> {
    write_atomic(path, vtk_string(sol, density)?.as_bytes())
}
