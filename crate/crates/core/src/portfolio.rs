//! Option strategies and the netting analysis: a book priced as one economy
//! against the sum of its legs priced as separate economies.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PricingError, Result};
use crate::market::{FundingConfig, OptionLeg, Portfolio, Side};
use crate::pde::{self, PdeGrid, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Long call at `low`, short call at `high`.
    Bull { low: f64, high: f64 },
    /// Long call and long put at one strike.
    Straddle { strike: f64 },
    /// Long put at `put`, long call at the higher strike `call`.
    Strangle { put: f64, call: f64 },
    /// Long one call and two puts at one strike.
    Strip { strike: f64 },
}

/// Strategy family without strikes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Bull,
    Straddle,
    Strangle,
    Strip,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [Self::Bull, Self::Straddle, Self::Strangle, Self::Strip];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bull => "bull",
            Self::Straddle => "straddle",
            Self::Strangle => "strangle",
            Self::Strip => "strip",
        }
    }

    /// Strikes are given low to high: `[low, high]` for bull and strangle,
    /// `[strike]` for straddle and strip.
    pub fn with_strikes(self, strikes: &[f64]) -> Result<Strategy> {
        let need = match self {
            Self::Bull | Self::Strangle => 2,
            Self::Straddle | Self::Strip => 1,
        };
        if strikes.len() != need {
            return Err(PricingError::BadStrikes(format!(
                "{} needs {need} strike(s), got {}",
                self.name(),
                strikes.len()
            )));
        }
        Ok(match self {
            Self::Bull => Strategy::Bull {
                low: strikes[0],
                high: strikes[1],
            },
            Self::Straddle => Strategy::Straddle { strike: strikes[0] },
            Self::Strangle => Strategy::Strangle {
                put: strikes[0],
                call: strikes[1],
            },
            Self::Strip => Strategy::Strip { strike: strikes[0] },
        })
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| PricingError::InvalidInput(format!("unknown strategy '{s}'")))
    }
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Self::Bull { .. } => StrategyKind::Bull,
            Self::Straddle { .. } => StrategyKind::Straddle,
            Self::Strangle { .. } => StrategyKind::Strangle,
            Self::Strip { .. } => StrategyKind::Strip,
        }
    }
}

fn check_strike(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(PricingError::BadStrikes(format!("strike must be positive, got {k}")))
    }
}

/// European book for `strategy`.
pub fn build_strategy(strategy: Strategy, expiry: f64) -> Result<Portfolio> {
    let legs = match strategy {
        Strategy::Bull { low, high } => {
            check_strike(low)?;
            check_strike(high)?;
            if low >= high {
                return Err(PricingError::BadStrikes(format!(
                    "bull spread needs low < high, got {low} and {high}"
                )));
            }
            vec![OptionLeg::call(low, 1.0), OptionLeg::call(high, -1.0)]
        }
        Strategy::Straddle { strike } => {
            check_strike(strike)?;
            vec![OptionLeg::call(strike, 1.0), OptionLeg::put(strike, 1.0)]
        }
        Strategy::Strangle { put, call } => {
            check_strike(put)?;
            check_strike(call)?;
            if put >= call {
                return Err(PricingError::BadStrikes(format!(
                    "strangle needs put strike < call strike, got {put} and {call}"
                )));
            }
            vec![OptionLeg::put(put, 1.0), OptionLeg::call(call, 1.0)]
        }
        Strategy::Strip { strike } => {
            check_strike(strike)?;
            vec![OptionLeg::call(strike, 1.0), OptionLeg::put(strike, 2.0)]
        }
    };
    Portfolio::new(legs, expiry)
}

/// Bid/ask of a book priced as one economy (netted) and as the sum of its
/// legs each priced in its own economy (synthetic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NettingReport {
    pub expiry: f64,
    pub netted_bid: f64,
    pub netted_ask: f64,
    pub synthetic_bid: f64,
    pub synthetic_ask: f64,
    pub netted_spread: f64,
    pub synthetic_spread: f64,
    /// `synthetic_spread - netted_spread`.
    pub netting_effect: f64,
}

impl NettingReport {
    pub const CSV_HEADER: &'static str =
        "expiry,netted_bid,netted_ask,synthetic_bid,synthetic_ask,netted_spread,synthetic_spread,netting_effect";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.expiry,
            self.netted_bid,
            self.netted_ask,
            self.synthetic_bid,
            self.synthetic_ask,
            self.netted_spread,
            self.synthetic_spread,
            self.netting_effect
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Netting report for `portfolio` on `grid`.
///
/// Synthetic quotes keep each leg's own sign: on the bid every leg is held as
/// it appears in the book (a short leg is then a short position with its own
/// funding), on the ask every leg is sold. Leg solves run in parallel and are
/// summed in leg order.
pub fn netting_report(
    portfolio: &Portfolio,
    config: &FundingConfig,
    grid: &PdeGrid,
    params: &SolverParams,
) -> Result<NettingReport> {
    let mut jobs: Vec<(Portfolio, Side)> = vec![(portfolio.clone(), Side::Bid), (portfolio.clone(), Side::Ask)];
    for leg in portfolio.split_legs() {
        jobs.push((leg.clone(), Side::Bid));
        jobs.push((leg, Side::Ask));
    }
    let prices = jobs
        .par_iter()
        .map(|(p, side)| pde::price(p, *side, config, grid, params).map(|r| r.price))
        .collect::<Result<Vec<f64>>>()?;

    let (netted_bid, netted_ask) = (prices[0], prices[1]);
    let legs = &prices[2..];
    let synthetic_bid: f64 = legs.iter().step_by(2).sum();
    let synthetic_ask: f64 = legs.iter().skip(1).step_by(2).sum();
    let netted_spread = netted_ask - netted_bid;
    let synthetic_spread = synthetic_ask - synthetic_bid;
    Ok(NettingReport {
        expiry: portfolio.expiry(),
        netted_bid,
        netted_ask,
        synthetic_bid,
        synthetic_ask,
        netted_spread,
        synthetic_spread,
        netting_effect: synthetic_spread - netted_spread,
    })
}
