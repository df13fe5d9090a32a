use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample at index {index} (x = {x})")]
    NonFiniteSample { index: usize, x: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    UnsupportedDerivative(u32),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("Adomian polynomial of order {order} needs {needed} coefficients, got {got}")]
    InsufficientCoefficients {
        order: usize,
        needed: usize,
        got: usize,
    },

    #[error("series coefficient of order {order} is not finite")]
    NonFiniteCoefficient { order: usize },

    #[error("truncation order {requested} exceeds series order {available}")]
    OrderOutOfRange { requested: usize, available: usize },

    #[error("series of order {order} too short for a tail window of {window} (need order >= window >= 3)")]
    SeriesTooShort { order: usize, window: usize },

    #[error("invalid integrator configuration: {0}")]
    InvalidIntegrator(String),

    #[error("numerical blow-up at t = {t}")]
    BlowUp { t: f64 },

    #[error("square-root argument negative at grid index {index} (x = {x}, value = {value})")]
    Domain { index: usize, x: f64, value: f64 },

    #[error("invalid soliton specification: {0}")]
    InvalidSoliton(String),

    #[error("Taylor oracle supports orders 1..=4, got {0}")]
    UnsupportedOracleOrder(usize),

    #[error("reference has no snapshot at t = {0}")]
    MissingTime(f64),
}
