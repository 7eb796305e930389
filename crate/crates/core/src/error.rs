use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("time {t} is outside the tabulated range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("x = {x} lies outside the certified disk |x| <= {half_width}")]
    OutsideDisk { x: f64, half_width: f64 },

    #[error("leading coefficient A vanishes; the eigenvalue equation drops order")]
    DegenerateLeadingCoefficient,

    #[error("non-finite series coefficient at index {index}")]
    NonFinite { index: usize },

    #[error("series did not converge up to order {order} (tail {tail:e})")]
    Unconverged { order: usize, tail: f64 },

    #[error("conjugating element must be x-free (cx = {cx})")]
    NotXFree { cx: String },

    #[error("wave functions live on different grids")]
    GridMismatch,

    #[error("expected {expected} representation, got {got}")]
    RepresentationMismatch { expected: &'static str, got: &'static str },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch { what: &'static str, left: usize, right: usize },

    #[error("state has vanishing norm at instant {index}")]
    VanishingNorm { index: usize },

    #[error("need at least {needed} test states, got {got}")]
    TooFewStates { needed: usize, got: usize },

    #[error("unknown symbol `{0}` in constraint table")]
    UnknownSymbol(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
