use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluate at root: z = {re}{im:+}i coincides with a stored root")]
    EvaluateAtRoot { re: f64, im: f64 },

    #[error("derivative-degenerate point: S^2 + S' vanishes at z = {re}{im:+}i")]
    DegenerateNewton { re: f64, im: f64 },

    #[error("{what} is limited to degree {max}, got {got}")]
    OracleScope {
        what: &'static str,
        max: usize,
        got: usize,
    },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("contour degenerate, choose different r (min |f| = {min_abs:e} on |z| = {radius})")]
    ContourDegenerate { radius: f64, min_abs: f64 },

    #[error("dense eigenvalue solver failed to converge")]
    EigenFailure,

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
