use core::fmt;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Array shapes, periods or grid parameters disagree.
    Dimension(&'static str),
    /// A parameter is outside its valid range.
    InvalidParameter(&'static str),
    /// `a` has no inverse modulo `m`.
    NoInverse { a: i64, m: i64 },
    /// Chirp slope or grid sizes violate the coprimality requirements.
    InvalidChirp(&'static str),
    /// A metric is undefined for the given input (zero energy, empty set).
    UndefinedMetric(&'static str),
    /// The computation window cut off taps above the tolerance.
    TruncatedSupport { edge_ratio: f64 },
    /// The iterative or direct linear solve failed.
    LinearSolve(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(what) => write!(f, "dimension mismatch: {what}"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NoInverse { a, m } => write!(f, "{a} has no inverse modulo {m}"),
            Error::InvalidChirp(what) => write!(f, "invalid chirp: {what}"),
            Error::UndefinedMetric(what) => write!(f, "undefined metric: {what}"),
            Error::TruncatedSupport { edge_ratio } => write!(
                f,
                "window truncates the channel support (edge/peak = {edge_ratio:.3e})"
            ),
            Error::LinearSolve(what) => write!(f, "linear solve failed: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
