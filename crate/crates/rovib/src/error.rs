//! Crate-wide error type.

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Rejected input: a precondition on arguments or configuration failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed data file, with 1-based line number where known.
    #[error("{path}:{line}: {message}")]
    FileFormat {
        path: String,
        line: usize,
        message: String,
    },

    /// Unit tag not recognized by the converter.
    #[error("unknown unit tag `{0}`")]
    UnknownUnit(String),

    /// A requested vibrational level lies above dissociation.
    #[error("level v={requested} is not bound{}", match .highest_bound {
        Some(v) => format!(" (highest bound level is v={v})"),
        None => " (no bound levels on this grid)".to_string(),
    })]
    NotBound {
        requested: u32,
        highest_bound: Option<u32>,
    },

    /// Eigenvalue iteration did not converge.
    #[error(
        "eigenvalue search for v={v} did not converge after {iterations} iterations \
         (last bracket {lo}..{hi} cm-1)"
    )]
    Convergence {
        v: u32,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    /// Nonlinear least squares failed to converge.
    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),

    /// A frequency grid does not cover the feature being synthesized or fit.
    #[error("grid too narrow: spans {span} {unit}, needs at least {required} {unit}")]
    GridTooNarrow {
        span: f64,
        required: f64,
        unit: &'static str,
    },

    /// Fewer resolved features than free parameters.
    #[error("under-determined fit: {0}")]
    UnderDetermined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for numeric non-convergence (CLI exit code 2); everything else
    /// is treated as a validation error (exit code 1).
    pub fn is_nonconvergence(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::FitNonConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
