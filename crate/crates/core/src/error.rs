use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Text input (system, chart or config file) could not be parsed.
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// The query point is outside the domain of the operation, e.g. a
    /// non-characteristic point handed to `characteristic_data`.
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometric multiplicity below algebraic multiplicity (Jordan structure)
    /// where the analysis requires semi-simple characteristic roots.
    #[error("semisimplicity violation at eigenvalue {eigenvalue}: algebraic multiplicity {alg}, geometric {geom}")]
    Semisimplicity { eigenvalue: f64, alg: usize, geom: usize },

    #[error("chart error: {0}")]
    Chart(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Grid too coarse for the Gaussian scale of the mode.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("integration aborted at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("extrapolation did not converge: {0}")]
    Extrapolation(String),
}

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}
