use thiserror::Error;

/// Errors raised by the exact-arithmetic layers.
///
/// Invalid mathematics (a representation failing its defining identities) is
/// reported through validation reports, not through this type; variants here
/// cover contract violations, precision limits and exhausted budgets.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime in [2, 65536)")]
    BadModulus(u32),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("degree {0} outside the supported window [-2^20, 2^20]")]
    DegreeWindow(i64),
    #[error("matrices {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("matrix {0} is not nilpotent")]
    NotNilpotent(usize),
    #[error("membership error: {0}")]
    Membership(String),
    #[error("subgroup containment fails: {0}")]
    NotContained(String),
    #[error("subgroup is not tidy: {0}")]
    NotTidy(String),
    #[error("invalid representation: {0}")]
    InvalidRep(String),
    #[error("certificate error: {0}")]
    Certificate(String),
    #[error("window exhausted in {stage}: {detail}")]
    WindowExhausted { stage: String, detail: String },
    #[error("budget exceeded in {stage}: {detail}")]
    Budget { stage: String, detail: String },
    #[error("wrong branch: {0}")]
    Branch(String),
    #[error("inconsistency: {0}")]
    Inconsistent(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn exhausted(stage: &str, detail: impl Into<String>) -> Self {
        Error::WindowExhausted {
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }

    pub(crate) fn budget(stage: &str, detail: impl Into<String>) -> Self {
        Error::Budget {
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }
}
