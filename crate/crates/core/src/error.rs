use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero mode forbidden: fields are mean-zero")]
    ZeroMode,

    #[error("duplicate mode index {0}")]
    DuplicateMode(i64),

    #[error("modes {0} and {} are not complex conjugates", -.0)]
    ConjugateMismatch(i64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{what} needs {needed} units of work, budget is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("integer overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("frequency tuple sums to zero; excluded by the mean-zero convention")]
    ZeroSum,

    #[error("vanishing denominator at tuple {0:?}")]
    VanishingDenominator(Vec<i64>),

    #[error("zero mode of u^{power} has imaginary part {imag:e}; Hermitian symmetry is broken")]
    NonRealMean { power: u32, imag: f64 },

    #[error("sample times must be strictly increasing from 0")]
    NonMonotoneTimes,

    #[error("symbol or domain is not invariant under argument permutation at {0:?}")]
    AsymmetricSymbol(Vec<i64>),

    #[error("blow-up guard tripped at t = {time}: H^1 norm {norm:e} (last good time {last_good_time})")]
    BlowUp {
        time: f64,
        last_good_time: f64,
        norm: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
