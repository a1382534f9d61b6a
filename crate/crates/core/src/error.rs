use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("derivative order {0} outside 0..=4")]
    DerivativeOrder(u32),
    #[error("Sobolev index {0} outside [0, 4]")]
    SobolevIndex(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("hypothesis not applicable: {0}")]
    NotApplicable(String),
    #[error("blow-up guard tripped at t = {t}: sup norm {sup_norm:e}")]
    BlowUp { t: f64, step: usize, sup_norm: f64 },
    #[error("field is not localized: tail fraction {0:e}")]
    NotLocalized(f64),
    #[error("decay fit: {0}")]
    Fit(String),
    #[error("t = {t} outside the open interval (0, {horizon})")]
    TimeOutOfRange { t: f64, horizon: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
