use alloc::string::String;
use alloc::vec::Vec;

/// Every failure mode of the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("frequency {freq:?} outside the Nyquist band [{lo}, {hi})")]
    FrequencyOutOfBand { freq: Vec<i64>, lo: i64, hi: i64 },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("exponent p = {p} outside [{lo}, {hi}]")]
    ExponentOutOfRange { p: f64, lo: f64, hi: f64 },
    #[error("{what}: tail estimate {estimate:e} exceeds budget {budget:e}")]
    TailBudget {
        what: String,
        estimate: f64,
        budget: f64,
    },
    #[error("grid does not resolve the spectrum: {0}")]
    UnresolvedSpectrum(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("frequency {0:?} is not covered by the partition")]
    UncoveredFrequency(Vec<i64>),
    #[error("Nyquist overflow: {0}")]
    NyquistOverflow(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("symbol undefined at frequency {0:?}")]
    SymbolUndefined(Vec<f64>),
    #[error("support overflow: {0}")]
    SupportOverflow(String),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
