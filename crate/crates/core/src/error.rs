use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid collocation order {0}: expected 1 <= m <= 10")]
    InvalidOrder(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("singular system: zero pivot at index {pivot}")]
    SingularSystem { pivot: usize },

    #[error("degenerate mesh: nonpositive mass entry {value:e} at node {node} (t = {t})")]
    DegenerateMesh { node: usize, t: f64, value: f64 },

    #[error("tangled mesh: cell {cell} has nonpositive measure {value:e} at t = {t}")]
    TangledMesh { cell: String, t: f64, value: f64 },

    #[error("degenerate boundary extrapolation at t = {t}: |x1 - xl| = {gap:e}")]
    DegenerateExtrapolation { t: f64, gap: f64 },

    #[error("degenerate domain at t = {t}: width {width:e}")]
    DegenerateDomain { t: f64, width: f64 },

    #[error("step {step} failed: {source}")]
    StepFailure {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
