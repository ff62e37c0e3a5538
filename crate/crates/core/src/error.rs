//! Error type shared by every module.

/// Errors raised by graph construction, solvers and experiments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The requested ball covers every vertex, so exit from it is undefined.
    #[error("ball B({center},{radius}) escapes the graph: interior covers all {n} vertices")]
    BallEscapesGraph { center: u32, radius: u32, n: usize },
    #[error("vertices {0} and {1} are not connected")]
    Unreachable(u32, u32),
    #[error("degenerate chain: {0}")]
    DegenerateChain(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("underdetermined boundary data: no value for vertex {0}")]
    Underdetermined(u32),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("runaway trajectory: exceeded {0} steps")]
    Runaway(u64),
    #[error("linear solver failed: {0}")]
    Solver(String),
    #[error("graph format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than internal failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Solver(_) | Error::Io(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
