//! Error type shared by every pricing routine.

use thiserror::Error;

/// Errors raised while validating inputs or running a pricer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    /// A rate ordering constraint such as `r_b >= r` is violated.
    #[error("invalid rate order: {0}")]
    InvalidRateOrder(String),

    /// A haircut lies outside `[0, 1)`.
    #[error("invalid haircut: {name} = {value} (must lie in [0, 1))")]
    InvalidHaircut { name: &'static str, value: f64 },

    #[error("volatility must be positive, got {0}")]
    NonPositiveVol(f64),

    /// Any other malformed numeric input (non-finite values, negative spot, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid portfolio: {0}")]
    InvalidPortfolio(String),

    #[error("bad strikes for strategy: {0}")]
    BadStrikes(String),

    /// The zero-haircut closed form was called with a nonzero haircut.
    #[error("closed-form spread requires zero haircuts (repo {repo}, sec lending {sec})")]
    HaircutNotZero { repo: f64, sec: f64 },

    #[error("price {price} outside no-arbitrage bounds [{lower}, {upper}]")]
    PriceOutOfBounds { price: f64, lower: f64, upper: f64 },

    /// The funding-boundary fixed point did not settle within the iteration budget.
    #[error("funding iteration did not converge at time step {step} after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        step: usize,
        iterations: usize,
        last_change: f64,
    },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("PSOR failed at time step {step} after {sweeps} sweeps")]
    PsorDiverged { step: usize, sweeps: usize },

    #[error("no pricing oracle available: {0}")]
    OracleUnavailable(String),
}

pub type Result<T> = std::result::Result<T, PricingError>;
