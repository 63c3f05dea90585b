//! Model documents, VTK export and run summaries.

mod model_file;
mod vtk;

pub use model_file::{
    load_model, load_model_file, write_model, ModelFile, OutputSettings, PatchEntry, Probe, SolverSettings,
    MODEL_VERSION,
};
pub use vtk::{export_vtk, vtk_string};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{IgaError, Result};
use crate::mesh::locate_point;
use crate::solver::{evaluate_field, FieldValue, Solution};

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| IgaError::Argument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Field at a physical point, from the first patch containing it.
pub fn probe(sol: &Solution, x: &[f64]) -> Result<(usize, FieldValue)> {
    let mut pt = [0.0; 3];
    let n = x.len().min(3);
    pt[..n].copy_from_slice(&x[..n]);
    for (m, patch) in sol.model.patches.iter().enumerate() {
        if let Ok(xi) = locate_point(patch, &pt) {
            return Ok((m, evaluate_field(sol, m, &xi)?));
        }
    }
    Err(IgaError::Argument(format!("point {x:?} lies in no patch")))
}

/// `key=value` lines, one per entry.
pub fn summary_string(entries: &[(String, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn write_summary(path: &Path, entries: &[(String, String)]) -> Result<()> {
    write_atomic(path, summary_string(entries).as_bytes())
}
