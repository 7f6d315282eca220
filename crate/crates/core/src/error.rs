use thiserror::Error;

/// Errors raised by state construction, bound evaluation and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("truncation dimension {dim} leaves tail mass {tail:.3e} above tolerance {tol:.1e}")]
    Truncation { dim: usize, tail: f64, tol: f64 },

    #[error("filter removes all appreciable mass (retained {retained:.3e})")]
    DegenerateFilter { retained: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("closed form is singular: {0}")]
    Singular(String),

    #[error("numerical consistency check failed: {0}")]
    Numerical(String),

    #[error("photon number is zero, phase bounds are undefined")]
    NoPhotons,

    #[error("finite-difference estimate unstable: coarse {coarse}, fine {fine}")]
    FiniteDifference { coarse: f64, fine: f64 },

    #[error("{candidates} candidate sets exceed the exhaustive guard of {limit}; use the greedy strategy")]
    CombinatorialBlowup { candidates: u128, limit: u128 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{row}: {source}")]
    Row { row: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attaches a row label to an error raised while computing that row.
    pub fn at_row(self, row: impl Into<String>) -> Error {
        Error::Row { row: row.into(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
