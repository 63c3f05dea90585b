use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PatchMesh;
use crate::error::{IgaError, Result};
use crate::spline::NurbsPatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Min,
    Max,
}

/// A parametric boundary of a patch: direction `dir` held at its first or last knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Face {
    pub dir: usize,
    pub side: Side,
}

const DIR_NAMES: [&str; 3] = ["xi", "eta", "zeta"];

impl Face {
    pub fn new(dir: usize, side: Side) -> Self {
        Face { dir, side }
    }

    /// Parameter value of the fixed direction.
    pub fn value(&self, patch: &NurbsPatch) -> f64 {
        let kv = patch.knot_vector(self.dir);
        match self.side {
            Side::Min => kv.first(),
            Side::Max => kv.last(),
        }
    }

    /// Parametric directions that vary along the face.
    pub fn free_dirs(&self, dim_param: usize) -> Vec<usize> {
        (0..dim_param).filter(|&d| d != self.dir).collect()
    }

    /// +1 when the outward direction increases the fixed parameter.
    pub fn outward_sign(&self) -> f64 {
        match self.side {
            Side::Min => -1.0,
            Side::Max => 1.0,
        }
    }

    /// Full parameter point from coordinates along the free directions.
    pub fn embed(&self, patch: &NurbsPatch, face_coords: &[f64]) -> Vec<f64> {
        let mut pt = Vec::with_capacity(patch.dim_param());
        let mut it = face_coords.iter();
        for d in 0..patch.dim_param() {
            if d == self.dir {
                pt.push(self.value(patch));
            } else {
                pt.push(*it.next().expect("face coordinate count"));
            }
        }
        pt
    }

    pub fn check(&self, patch: &NurbsPatch) -> Result<()> {
        if self.dir >= patch.dim_param() {
            return Err(IgaError::Argument(format!(
                "face {self} is not a boundary of a {}-parametric patch",
                patch.dim_param()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Min => "min",
            Side::Max => "max",
        };
        write!(f, "{}_{}", DIR_NAMES[self.dir], side)
    }
}

impl FromStr for Face {
    type Err = IgaError;
    fn from_str(s: &str) -> Result<Self> {
        let (dir, side) = s
            .split_once('_')
            .ok_or_else(|| IgaError::Argument(format!("bad face name {s:?}")))?;
        let dir = DIR_NAMES
            .iter()
            .position(|&n| n == dir)
            .ok_or_else(|| IgaError::Argument(format!("bad face direction in {s:?}")))?;
        let side = match side {
            "min" => Side::Min,
            "max" => Side::Max,
            _ => return Err(IgaError::Argument(format!("bad face side in {s:?}"))),
        };
        Ok(Face { dir, side })
    }
}

impl TryFrom<String> for Face {
    type Error = IgaError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Face> for String {
    fn from(f: Face) -> String {
        f.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceElement {
    /// Parameter bounds along the face's free directions.
    pub bounds: Vec<(f64, f64)>,
    /// Adjacent element of the owning patch.
    pub element: usize,
}

/// Restriction of a patch's element grid to one of its faces.
#[derive(Debug, Clone)]
pub struct TraceMesh {
    pub patch: usize,
    pub face: Face,
    pub free_dirs: Vec<usize>,
    pub elements: Vec<TraceElement>,
}

pub fn trace_of_face(patch: &NurbsPatch, mesh: &PatchMesh, face: Face) -> Result<TraceMesh> {
    face.check(patch)?;
    let free_dirs = face.free_dirs(patch.dim_param());
    let fixed_ord = match face.side {
        Side::Min => 0,
        Side::Max => mesh.spans[face.dir].len() - 1,
    };
    let elements = mesh
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.ord[face.dir] == fixed_ord)
        .map(|(id, e)| TraceElement {
            bounds: free_dirs.iter().map(|&d| e.bounds[d]).collect(),
            element: id,
        })
        .collect();
    Ok(TraceMesh { patch: mesh.patch, face, free_dirs, elements })
}
