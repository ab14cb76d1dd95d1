use thiserror::Error;

/// Errors produced by the spectral, constants, solver and pipeline layers.
#[derive(Error, Debug)]
pub enum Error {
    #[error("the zero mode k = 0 is not allowed in a mean-zero field")]
    ZeroMode,

    #[error("dimension mismatch: expected d = {expected}, found d = {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("invalid Sobolev orders: {0}")]
    InvalidOrders(String),

    #[error("no tabulated constant for (d = {d}, p = {p}, n = {n}, kind = {kind}); available: {available}")]
    ConstantUnavailable {
        d: usize,
        p: f64,
        n: f64,
        kind: String,
        available: String,
    },

    #[error("conflicting coefficients for modes k = {k:?} and -k: not conjugate")]
    ConjugateMismatch { k: Vec<i64> },

    #[error("mode set is not symmetric: {k:?} present without its negative")]
    AsymmetricModeSet { k: Vec<i64> },

    #[error("state carries a mode outside the Galerkin set: k = {k:?}")]
    SupportLeak { k: Vec<i64> },

    #[error("time t = {t} outside the trajectory domain [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("step limit ({max_steps}) exceeded at t = {t}")]
    MaxSteps { t: f64, max_steps: usize },

    #[error("certificate is finite; the decay envelope exists only for global certificates")]
    NotGlobal,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid datum file: {0}")]
    Datum(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
