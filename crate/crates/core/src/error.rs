use thiserror::Error;

pub type Result<T, E = IgaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum IgaError {
    #[error("parameter {value} outside knot range [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid knot vector: {0}")]
    KnotVector(String),

    #[error("invalid patch: {0}")]
    Patch(String),

    #[error("degenerate element: zero-length span [{lo}, {hi}]")]
    DegenerateElement { lo: f64, hi: f64 },

    #[error("inverted element {element} of patch {patch}: det J = {det_j:e}")]
    InvertedElement { patch: usize, element: usize, det_j: f64 },

    #[error("incompressible material: nu = {0} (must be < 0.5)")]
    Incompressible(f64),

    #[error("invalid material: {0}")]
    Material(String),

    #[error("point inversion failed{}: residual {residual:e} after {iterations} iterations", if *.singular { " (singular Jacobian)" } else { "" })]
    Inversion { residual: f64, iterations: usize, singular: bool },

    #[error("interface {interface} mismatch at x = {point:?}: {reason}")]
    InterfaceMismatch { interface: usize, point: [f64; 3], reason: String },

    #[error("Dirichlet projection on patch {patch}: {reason}")]
    Projection { patch: usize, reason: String },

    #[error("matrix not positive definite: pivot {pivot:e} at dof {dof}")]
    NotPositiveDefinite { dof: usize, pivot: f64 },

    #[error("singular matrix: zero pivot at dof {dof}")]
    Singular { dof: usize },

    #[error("solver residual {0:e} exceeds tolerance")]
    Residual(f64),

    #[error("model error at {path}: {reason}")]
    Model { path: String, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl IgaError {
    /// Short machine-readable tag, used by the CLI's single-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            IgaError::Domain { .. } => "domain",
            IgaError::Argument(_) => "argument",
            IgaError::KnotVector(_) => "knot_vector",
            IgaError::Patch(_) => "patch",
            IgaError::DegenerateElement { .. } => "degenerate_element",
            IgaError::InvertedElement { .. } => "inverted_element",
            IgaError::Incompressible(_) => "incompressible",
            IgaError::Material(_) => "material",
            IgaError::Inversion { .. } => "inversion",
            IgaError::InterfaceMismatch { .. } => "interface_mismatch",
            IgaError::Projection { .. } => "projection",
            IgaError::NotPositiveDefinite { .. } => "not_positive_definite",
            IgaError::Singular { .. } => "singular",
            IgaError::Residual(_) => "residual",
            IgaError::Model { .. } => "model",
            IgaError::Io(_) => "io",
            IgaError::Json(_) => "json",
        }
    }

    pub(crate) fn model(path: impl Into<String>, reason: impl Into<String>) -> Self {
        IgaError::Model { path: path.into(), reason: reason.into() }
    }
}
