use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} is outside the unit ball (norm {norm:.3e})")]
    OutsideUnitBall { what: String, norm: f64 },

    #[error("member {label} is not unitary (defect {defect:.3e})")]
    NotUnitary { label: String, defect: f64 },

    #[error("member {label} is not bounded below (smallest singular value {sigma_min:.3e})")]
    NotBoundedBelow { label: String, sigma_min: f64 },

    #[error("net for F_{level} exceeded {cap} points; lower net_depth")]
    NetBudgetExceeded { level: usize, cap: usize },

    #[error("empty family")]
    EmptyFamily,

    #[error("pairwise composition of {size} maps exceeds cap {cap}")]
    CompositionTooLarge { size: usize, cap: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
