use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular input: {0}")]
    Singular(&'static str),

    #[error("undefined axis: {0}")]
    UndefinedAxis(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "antipodal qubits span no plane; any orthogonal axis with angle pi completes the gate"
    )]
    DegeneratePlane,

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("all panel functionals vanish; probability is undefined")]
    UndefinedProbability,

    #[error("training diverged at iteration {iteration} (cost {cost})")]
    Diverged { iteration: usize, cost: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Singular(_) => "singular",
            Error::UndefinedAxis(_) => "undefined_axis",
            Error::Precondition(_) => "precondition",
            Error::InvalidInput(_) => "invalid_input",
            Error::DegeneratePlane => "degenerate_plane",
            Error::Shape { .. } => "shape",
            Error::UndefinedProbability => "undefined_probability",
            Error::Diverged { .. } => "diverged",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
