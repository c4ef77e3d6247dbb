use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the range where a model is defined.
    #[error("{quantity} = {value} is outside the valid range [{min}, {max}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    /// A root finder or iteration failed; `bracket` records the last interval.
    #[error("numerical failure: {message} (bracket [{}, {}])", bracket.0, bracket.1)]
    Numeric {
        message: String,
        bracket: (f64, f64),
    },

    #[error("fit failed: {0}")]
    Fit(String),

    /// The requested grating targets cannot be met; `frontier` lists
    /// (length in mm, FWHM in nm) reachable at the requested contrast.
    #[error("grating design infeasible: {message}")]
    Design {
        message: String,
        frontier: Vec<(f64, f64)>,
    },

    #[error("spectrum is empty: {0}")]
    EmptySpectrum(String),

    #[error("no accidental or coincidence counts in histogram")]
    NoCounts,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
