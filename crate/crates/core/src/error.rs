use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("metric not positive-definite at node {node} (smallest eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { node: usize, eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("time {t} outside schedule interval [{start}, {end}]")]
    OutOfInterval { t: f64, start: f64, end: f64 },

    #[error("stability failure at t = {t}: {message}; try a smaller time step")]
    Stability { t: f64, message: String },

    #[error("flow singularity at t = {t}: {message}")]
    FlowSingularity { t: f64, message: String },

    #[error("ill-conditioned density: {0}")]
    Conditioning(String),

    #[error("no convergence after {iterations} iterations (defect {defect:e})")]
    Convergence {
        iterations: usize,
        defect: f64,
        /// Node values of the last iterate, when one exists.
        last_iterate: Vec<f64>,
    },

    #[error("irregular timestamps: {0}")]
    IrregularTimes(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
