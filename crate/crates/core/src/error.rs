use thiserror::Error;

/// Errors raised by the collocation operators, the integrators and the
/// problem factories.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Chebyshev basis matrix could not be factored. Either the nodes are
    /// not distinct or the basis size is too large for `f64`.
    #[error("numerically singular basis matrix (N = {n})")]
    NumericallySingularBasis { n: usize },

    #[error("t = {t} lies outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("domain violation at t = {t}: {reason} (state = {state:?})")]
    DomainViolation {
        t: f64,
        state: Vec<f64>,
        reason: String,
    },

    #[error("no convergence after {iterations} iterations (last correction {last_correction:e}): {hint}")]
    NoConvergence {
        iterations: usize,
        last_correction: f64,
        hint: String,
    },

    #[error("segment {index} starting at t = {t_start}: {source}")]
    Segment {
        index: usize,
        t_start: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("shot with initial slope {guess}: {source}")]
    Shot {
        guess: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("gravity file, line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(t: f64, state: &[f64], reason: impl Into<String>) -> Self {
        Error::DomainViolation {
            t,
            state: state.to_vec(),
            reason: reason.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Innermost error, looking through segment and shot annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Segment { source, .. } | Error::Shot { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_no_convergence(&self) -> bool {
        matches!(self.root(), Error::NoConvergence { .. })
    }

    pub fn is_domain_violation(&self) -> bool {
        matches!(self.root(), Error::DomainViolation { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
