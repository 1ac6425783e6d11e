use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The point is closer to the symmetry axis than the guard radius.
    #[error("axis singularity: r = {r:e} below r_min = {r_min:e}")]
    AxisSingularity { r: f64, r_min: f64 },

    /// The field magnitude profile dropped below its configured floor.
    #[error("field domain error: b({r}, {z}) = {b} below floor {b_min}")]
    Domain { r: f64, z: f64, b: f64, b_min: f64 },

    #[error("sanity guard tripped at step {step}: |dx| = {displacement:e} exceeds h*V_max = {limit:e}")]
    SanityGuard {
        step: usize,
        displacement: f64,
        limit: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("reference run needs {steps} steps, budget is {budget}")]
    BudgetExceeded { steps: u64, budget: u64 },

    #[error("time grids differ at sample {index}: {t_a} vs {t_b}")]
    GridMismatch { index: usize, t_a: f64, t_b: f64 },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AxisSingularity { .. } => "AxisSingularity",
            Error::Domain { .. } => "DomainError",
            Error::SanityGuard { .. } => "SanityGuard",
            Error::Unsupported(_) => "Unsupported",
            Error::InvalidInput(_) => "InvalidInput",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::Schema { .. } => "SchemaError",
            Error::Io(_) => "IoError",
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
