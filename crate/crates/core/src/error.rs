use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("curve has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("curve value at node {node} is not finite ({value})")]
    NonFinite { node: usize, value: f64 },

    #[error("curves live on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rate coincidence: {0}")]
    Coincidence(String),

    #[error("invalid moments at node {node}: m2 = {m2} < m1^2 = {m1_sq}")]
    InvalidMoments { node: usize, m2: f64, m1_sq: f64 },

    #[error("cost exponent must be even and at least 2, got {0}")]
    InvalidExponent(u32),

    #[error("root is not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no closed form available: {0}")]
    NoClosedForm(String),

    #[error("unsupported distribution for {context}: {dist}")]
    UnsupportedDistribution { context: &'static str, dist: String },

    #[error("F(0) = {0} but the inverse map requires F(0) = 0")]
    NonzeroStart(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("{0} of {1} input neurons never fired before the horizon cap")]
    CensoringLimit(u64, u64),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics themselves (bracketing, censoring),
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotBracketed { .. } | Error::CensoringLimit(..) | Error::InvalidMoments { .. }
        )
    }
}
