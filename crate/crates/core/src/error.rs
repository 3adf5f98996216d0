use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a permutation of 1..={n}: {detail}")]
    InvalidPermutation { n: usize, detail: String },

    #[error("Lehmer digit X_{j} = {value} is out of range 0..={max}", max = j - 1)]
    InvalidLehmerCode { j: usize, value: usize },

    #[error("sequence contains duplicate entries")]
    DuplicateEntries,

    #[error("threshold M = {m} is outside 0..={max} for n = {n}", max = n.saturating_sub(1))]
    BadThreshold { m: usize, n: usize },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("record probability p_{index} = {value} is outside (0, 1]")]
    BadProbability { index: usize, value: f64 },

    #[error("n = {n} exceeds the enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("argument outside the curve's domain: {0}")]
    Domain(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI's error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidPermutation { .. } => "invalid_permutation",
            Error::InvalidLehmerCode { .. } => "invalid_lehmer_code",
            Error::DuplicateEntries => "duplicate_entries",
            Error::BadThreshold { .. } => "bad_threshold",
            Error::BadParameter(_) => "bad_parameter",
            Error::BadProbability { .. } => "bad_probability",
            Error::TooLarge { .. } => "too_large",
            Error::Domain(_) => "domain_error",
            Error::InvalidWeights(_) => "invalid_weights",
        }
    }
}

pub(crate) fn check_threshold(n: usize, m: usize) -> Result<()> {
    if n == 0 || m >= n {
        return Err(Error::BadThreshold { m, n });
    }
    Ok(())
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::BadParameter(format!("q must be positive and finite, got {q}")));
    }
    Ok(())
}
