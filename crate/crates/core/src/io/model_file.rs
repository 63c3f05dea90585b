use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::coupling::InterfaceSpec;
use crate::elasticity::Material;
use crate::error::{IgaError, Result};
use crate::mesh::{refine_bisect, DirichletSpec, MultiPatchModel, NeumannSpec};
use crate::spline::{KnotVector, NurbsPatch};

pub const MODEL_VERSION: &str = "1";

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: String,
    pub materials: Vec<Material>,
    pub patches: Vec<PatchEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dirichlet: Vec<DirichletSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neumann: Vec<NeumannSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interfaces: Vec<InterfaceSpec>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchEntry {
    /// One knot vector per parametric direction.
    pub knots: Vec<KnotVector>,
    /// Rows of 2 or 3 coordinates, first direction fastest.
    pub control_points: Vec<Vec<f64>>,
    /// All ones when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub material: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_force: Option<Vec<f64>>,
    /// Target degree per direction, applied first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevate: Option<Vec<usize>>,
    /// Uniform split of every knot span per direction, applied after elevation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subdivide: Option<Vec<usize>>,
    /// Midpoint bisections, applied last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "yes")]
    pub spd_check: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface_gp: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { spd_check: true, interface_gp: None }
    }
}

fn yes() -> bool {
    true
}

fn default_density() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    /// Samples per element edge in VTK output.
    #[serde(default = "default_density")]
    pub vtk_density: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<Probe>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { vtk_density: default_density(), probes: Vec::new() }
    }
}

/// Named physical point reported in the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub name: String,
    pub point: Vec<f64>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<ModelFile> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ModelFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            IgaError::model(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
        })?;
        if file.version != MODEL_VERSION {
            return Err(IgaError::model("version", format!("unsupported version {:?}", file.version)));
        }
        Ok(file)
    }

    /// Builds and validates the model. `degree` replaces every patch's elevation target.
    pub fn build(&self, degree: Option<usize>) -> Result<MultiPatchModel> {
        let mut patches = Vec::with_capacity(self.patches.len());
        let mut patch_materials = Vec::new();
        let mut body_forces = Vec::new();
        for (i, entry) in self.patches.iter().enumerate() {
            let at = |field: &str| format!("patches[{i}].{field}");
            let wrap = |field: &'static str| move |e: IgaError| IgaError::model(at(field), e.to_string());
            let dim = entry.control_points.first().map_or(0, Vec::len);
            if !(2..=3).contains(&dim) || entry.control_points.iter().any(|p| p.len() != dim) {
                return Err(IgaError::model(at("control_points"), "rows must all have 2 or 3 coordinates"));
            }
            let cps = entry
                .control_points
                .iter()
                .map(|p| {
                    let mut q = [0.0; 3];
                    q[..dim].copy_from_slice(p);
                    q
                })
                .collect();
            let weights = entry.weights.clone().unwrap_or_else(|| vec![1.0; entry.control_points.len()]);
            let mut patch = NurbsPatch::new(entry.knots.clone(), cps, weights, dim).map_err(wrap("control_points"))?;
            let target = match (degree, &entry.elevate) {
                (Some(p), _) => Some(vec![p; patch.dim_param()]),
                (None, Some(t)) => Some(t.clone()),
                (None, None) => None,
            };
            if let Some(t) = target {
                if t.len() != patch.dim_param() {
                    return Err(IgaError::model(at("elevate"), "one degree per direction required"));
                }
                patch = patch.elevate_to(&t).map_err(wrap("elevate"))?;
            }
            if let Some(parts) = &entry.subdivide {
                if parts.len() != patch.dim_param() || parts.contains(&0) {
                    return Err(IgaError::model(at("subdivide"), "one positive count per direction required"));
                }
                for (d, &k) in parts.iter().enumerate() {
                    patch = patch.subdivide_direction(d, k).map_err(wrap("subdivide"))?;
                }
            }
            if let Some(r) = entry.refine {
                patch = refine_bisect(&patch, r).map_err(wrap("refine"))?;
            }
            patches.push(patch);
            patch_materials.push(entry.material);
            let mut bf = [0.0; 3];
            if let Some(b) = &entry.body_force {
                if b.len() > 3 {
                    return Err(IgaError::model(at("body_force"), "at most 3 components"));
                }
                bf[..b.len()].copy_from_slice(b);
            }
            body_forces.push(bf);
        }
        let model = MultiPatchModel {
            patches,
            materials: self.materials.clone(),
            patch_materials,
            body_forces,
            dirichlet: self.dirichlet.clone(),
            neumann: self.neumann.clone(),
            interfaces: self.interfaces.clone(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Document describing `model` with its patches written as they are.
    pub fn from_model(model: &MultiPatchModel) -> ModelFile {
        let patches = model
            .patches
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let dim = p.dim_space();
                let bf = model.body_forces[i];
                PatchEntry {
                    knots: p.knot_vectors().to_vec(),
                    control_points: p.control_points().iter().map(|c| c[..dim].to_vec()).collect(),
                    weights: Some(p.weights().to_vec()),
                    material: model.patch_materials[i],
                    body_force: bf.iter().any(|&v| v != 0.0).then(|| bf[..dim].to_vec()),
                    elevate: None,
                    subdivide: None,
                    refine: None,
                }
            })
            .collect();
        ModelFile {
            version: MODEL_VERSION.to_string(),
            materials: model.materials.clone(),
            patches,
            dirichlet: model.dirichlet.clone(),
            neumann: model.neumann.clone(),
            interfaces: model.interfaces.clone(),
            solver: SolverSettings::default(),
            output: OutputSettings::default(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)?;
    ModelFile::parse(&text)
}

/// Reads and validates a model document.
pub fn load_model(path: &Path) -> Result<MultiPatchModel> {
    load_model_file(path)?.build(None)
}

pub fn write_model(path: &Path, model: &MultiPatchModel) -> Result<()> {
    write_atomic(path, ModelFile::from_model(model).to_json()?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_SQUARE: &str = r#"{
        "version": "1",
        "materials": [{"E": 1.0, "nu": 0.3, "formulation": "plane_stress"}],
        "patches": [{
            "knots": [{"degree": 1, "knots": [0, 0, 1, 1]}, {"degree": 1, "knots": [0, 0, 1, 1]}],
            "control_points": [[0, 0], [1, 0], [0, 1], [1, 1]]
        }]
    }"#;

    #[test]
    fn minimal_model_loads() {
        let m = ModelFile::parse(UNIT_SQUARE).unwrap().build(None).unwrap();
        assert_eq!(m.patches.len(), 1);
        assert!(m.interfaces.is_empty());
    }

    #[test]
    fn schema_errors_carry_the_field_path() {
        let bad = UNIT_SQUARE.replace("\"nu\": 0.3", "\"nu\": \"x\"");
        let err = ModelFile::parse(&bad).unwrap_err();
        match err {
            IgaError::Model { path, .. } => assert_eq!(path, "materials[0].nu"),
            other => panic!("{other}"),
        }
        let bad = UNIT_SQUARE.replace("\"version\": \"1\"", "\"version\": \"2\"");
        assert!(ModelFile::parse(&bad).unwrap_err().to_string().contains("version"));
    }

    #[test]
    fn negative_weight_names_the_control_point() {
        let bad = UNIT_SQUARE.replace("[[0, 0], [1, 0], [0, 1], [1, 1]]", "[[0, 0], [1, 0], [0, 1], [1, 1]], \"weights\": [1, 1, -1, 1]");
        let err = ModelFile::parse(&bad).unwrap().build(None).unwrap_err().to_string();
        assert!(err.contains("patches[0]") && err.contains("control point 2"), "{err}");
    }

    #[test]
    fn refinement_directives() {
        let mut f = ModelFile::parse(UNIT_SQUARE).unwrap();
        f.patches[0].elevate = Some(vec![2, 2]);
        f.patches[0].subdivide = Some(vec![3, 2]);
        f.patches[0].refine = Some(1);
        let m = f.build(None).unwrap();
        assert_eq!(m.patches[0].degrees(), vec![2, 2]);
        assert_eq!(m.meshes()[0].grid(), vec![6, 4]);
        assert_eq!(f.build(Some(3)).unwrap().patches[0].degrees(), vec![3, 3]);
    }
}
