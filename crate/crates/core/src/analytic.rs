//! Closed-form prices: Black-Scholes, the funded long-option formula, the
//! zero-haircut bid/ask pair, and implied volatility.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::error::{PricingError, Result};
use crate::funding::{select_financing, HoldingSign};
use crate::market::{FundingConfig, OptionKind};

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsQuote {
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
}

fn check_inputs(s: f64, k: f64, t: f64, sigma: f64) -> Result<()> {
    for (name, v) in [("spot", s), ("strike", k), ("expiry", t), ("sigma", sigma)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(PricingError::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Lognormal price with forward `s * exp(carry * t)` discounted at `discount_rate`.
///
/// Every closed form in this module is this function with a different
/// carry/discount pair.
fn black_quote(kind: OptionKind, s: f64, k: f64, t: f64, carry: f64, discount_rate: f64, sigma: f64) -> BsQuote {
    let growth = (carry * t).exp();
    let df = (-discount_rate * t).exp();
    let forward = s * growth;
    let vol_t = sigma * t.sqrt();
    let d1 = ((forward / k).ln() + 0.5 * vol_t * vol_t) / vol_t;
    let d2 = d1 - vol_t;
    let gamma = df * growth * norm_pdf(d1) / (s * vol_t);
    match kind {
        OptionKind::Call => BsQuote {
            price: df * (forward * norm_cdf(d1) - k * norm_cdf(d2)),
            delta: df * growth * norm_cdf(d1),
            gamma,
        },
        OptionKind::Put => BsQuote {
            price: df * (k * norm_cdf(-d2) - forward * norm_cdf(-d1)),
            delta: -df * growth * norm_cdf(-d1),
            gamma,
        },
    }
}

/// Black-Scholes price, delta and gamma with a continuous dividend yield.
pub fn bs_price(kind: OptionKind, s: f64, k: f64, t: f64, r: f64, q: f64, sigma: f64) -> Result<BsQuote> {
    check_inputs(s, k, t, sigma)?;
    Ok(black_quote(kind, s, k, t, r - q, r, sigma))
}

/// Value of a long vanilla option whose hedge and premium are financed per `config`.
///
/// A long call is hedged by shorting stock (sec lending), a long put by buying
/// stock on repo. Either way the unsecured debt is always positive, so the
/// price is lognormal with carry `h r_b + (1 - h) r_p - q` discounted at `r_b`.
pub fn long_position_price(kind: OptionKind, s: f64, k: f64, t: f64, config: &FundingConfig) -> Result<BsQuote> {
    check_inputs(s, k, t, config.sigma)?;
    let hedge = match kind {
        OptionKind::Call => HoldingSign::Short,
        OptionKind::Put => HoldingSign::Long,
    };
    let sel = select_financing(hedge, config);
    let carry = sel.h_signed * config.r_b + (1.0 - sel.h_signed) * sel.rate - config.q;
    Ok(black_quote(kind, s, k, t, carry, config.r_b, config.sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BidAsk {
    pub bid: f64,
    pub ask: f64,
    pub spread: f64,
}

fn require_zero_haircuts(config: &FundingConfig) -> Result<()> {
    if config.repo_haircut != 0.0 || config.sec_haircut != 0.0 || config.no_repo {
        let full = if config.no_repo { 1.0 } else { 0.0 };
        return Err(PricingError::HaircutNotZero {
            repo: config.repo_haircut.max(full),
            sec: config.sec_haircut.max(full),
        });
    }
    Ok(())
}

/// Cost of a short vanilla option when both haircuts are zero.
///
/// The short side earns `r` on the premium and hedges at the repo rate (call)
/// or the rebate rate (put).
pub fn zero_haircut_ask(kind: OptionKind, s: f64, k: f64, t: f64, config: &FundingConfig) -> Result<BsQuote> {
    require_zero_haircuts(config)?;
    check_inputs(s, k, t, config.sigma)?;
    let rate = match kind {
        OptionKind::Call => config.repo_rate,
        OptionKind::Put => config.rebate_rate,
    };
    Ok(black_quote(kind, s, k, t, rate - config.q, config.r, config.sigma))
}

/// Bid and ask of a vanilla option when both haircuts are zero.
///
/// The long side borrows the premium at `r_b` and hedges at the other
/// secured rate, which is the long-position closed form with `h = 0`.
pub fn zero_haircut_spread(kind: OptionKind, s: f64, k: f64, t: f64, config: &FundingConfig) -> Result<BidAsk> {
    let ask = zero_haircut_ask(kind, s, k, t, config)?.price;
    let bid = long_position_price(kind, s, k, t, config)?.price;
    Ok(BidAsk {
        bid,
        ask,
        spread: ask - bid,
    })
}

const IV_LOWER: f64 = 1e-6;
const IV_UPPER: f64 = 5.0;
const IV_PRICE_TOL: f64 = 1e-12;

/// Volatility that reproduces `target` under Black-Scholes.
///
/// Newton steps seeded from the Brenner-Subrahmanyam approximation, falling
/// back to bisection whenever a step leaves the current bracket.
pub fn implied_vol(kind: OptionKind, s: f64, k: f64, t: f64, r: f64, q: f64, target: f64) -> Result<f64> {
    check_inputs(s, k, t, 1.0)?;
    let disc_s = s * (-q * t).exp();
    let disc_k = k * (-r * t).exp();
    let (lower, upper) = match kind {
        OptionKind::Call => ((disc_s - disc_k).max(0.0), disc_s),
        OptionKind::Put => ((disc_k - disc_s).max(0.0), disc_k),
    };
    let out_of_bounds = || PricingError::PriceOutOfBounds {
        price: target,
        lower,
        upper,
    };
    if !target.is_finite() || target <= lower || target >= upper {
        return Err(out_of_bounds());
    }
    let price = |sigma: f64| black_quote(kind, s, k, t, r - q, r, sigma).price;
    let (mut lo, mut hi) = (IV_LOWER, IV_UPPER);
    if target < price(lo) || target > price(hi) {
        return Err(out_of_bounds());
    }

    let mut sigma = ((2.0 * PI / t).sqrt() * target / disc_s).clamp(0.01, 2.0);
    for _ in 0..200 {
        let diff = price(sigma) - target;
        if diff.abs() < IV_PRICE_TOL {
            return Ok(sigma);
        }
        if diff > 0.0 {
            hi = sigma;
        } else {
            lo = sigma;
        }
        let vol_t = sigma * t.sqrt();
        let d1 = ((disc_s / disc_k).ln() + 0.5 * vol_t * vol_t) / vol_t;
        let vega = disc_s * norm_pdf(d1) * t.sqrt();
        let newton = sigma - diff / vega;
        sigma = if vega > 1e-300 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(sigma)
}
