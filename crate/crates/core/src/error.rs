use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A vector or matrix had the wrong size.
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// Non-finite value where a finite one is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is numerically rank deficient (condition estimate {condition:.3e})")]
    Rank { condition: f64 },

    #[error("matrix is not symmetric positive definite (pivot {pivot} = {value:.3e})")]
    NotSpd { pivot: usize, value: f64 },

    /// Position map or model evaluated outside of its admissible domain.
    #[error("evaluation domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Sampled signal queried outside of its record.
    #[error("time {t} outside of sampled range [{start}, {end}]")]
    Range { t: f64, start: f64, end: f64 },

    #[error("integration diverged at t = {t}: {reason}")]
    Divergence { t: f64, reason: String },

    /// Rank error raised while stepping, tagged with the failure time.
    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{label}: {source}")]
    Run {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn dim(what: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            found,
        }
    }

    pub(crate) fn at_time(self, t: f64) -> Self {
        match self {
            e @ (Error::Divergence { .. } | Error::AtTime { .. }) => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn in_run(self, label: impl Into<String>) -> Self {
        Error::Run {
            label: label.into(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
