//! Funding economics of a delta-hedged option position.
//!
//! Everything here works on the signed position value `U` (`+V` long, `-V`
//! short). The hedge holds `-dU/dS` shares. A long stock hedge is financed by
//! repo at `(repo_haircut, repo_rate)`, a short one through securities lending
//! at `(-sec_haircut, rebate_rate)`. The unsecured debt balance is
//! `N = (U - h S dU/dS)^+` and the deposit balance `M = (h S dU/dS - U)^+`.

use crate::market::{FundingConfig, Side};

/// Direction of the hedge's net stock holding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HoldingSign {
    Short,
    Flat,
    Long,
}

impl HoldingSign {
    pub fn of(holding: f64) -> Self {
        if holding > 0.0 {
            HoldingSign::Long
        } else if holding < 0.0 {
            HoldingSign::Short
        } else {
            HoldingSign::Flat
        }
    }

    /// Sign of the holding that hedges a position with slope `dU/dS`.
    pub fn hedging(slope: f64) -> Self {
        Self::of(-slope)
    }
}

/// Haircut and rate that finance the stock hedge, plus the induced nominal stock rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinancingSelection {
    /// Signed haircut: positive for repo, negative for securities lending.
    pub h_signed: f64,
    /// Secured financing rate (repo rate or sec-lending rebate).
    pub rate: f64,
    /// Nominal stock rate `r + (1 - h)(rate - r)`.
    pub r_s: f64,
}

/// Picks repo or sec-lending parameters for a holding direction.
///
/// A flat holding uses repo parameters; every quantity they feed is multiplied
/// by the zero holding.
pub fn select_financing(sign: HoldingSign, config: &FundingConfig) -> FinancingSelection {
    let (h_signed, rate) = match (config.no_repo, sign) {
        (false, HoldingSign::Long | HoldingSign::Flat) => (config.repo_haircut, config.repo_rate),
        (false, HoldingSign::Short) => (-config.sec_haircut, config.rebate_rate),
        // Unsecured stock financing: the whole position value sits in the haircut.
        (true, HoldingSign::Long | HoldingSign::Flat) => (1.0, config.r),
        (true, HoldingSign::Short) => (-1.0, config.r),
    };
    FinancingSelection {
        h_signed,
        rate,
        r_s: config.r + (1.0 - h_signed) * (rate - config.r),
    }
}

/// `U - h S dU/dS`: the unsecured debt when positive, the deposit when negative.
pub fn unsecured_basis(value: f64, slope: f64, s: f64, config: &FundingConfig) -> f64 {
    let h = select_financing(HoldingSign::hedging(slope), config).h_signed;
    value - h * s * slope
}

/// Unsecured funding cost rate `(r_b - r)(U - h S dU/dS)^+` in currency per year.
pub fn funding_term(value: f64, slope: f64, s: f64, config: &FundingConfig) -> f64 {
    config.borrow_spread() * unsecured_basis(value, slope, s, config).max(0.0)
}

/// Drift and discount rate of the PDE linearised on one funding region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRates {
    /// Coefficient of `S dU/dS`.
    pub drift: f64,
    /// Coefficient of `-U`.
    pub discount: f64,
}

/// Rates of the position-value PDE at a node whose hedge direction is `sign`
/// and whose unsecured debt is active when `funded`.
///
/// Expanding `-(r_b - r) I (U - h S U_S)` folds the funding term into the
/// drift and discount: `drift = r_s - q + I (r_b - r) h`, `discount = r + I (r_b - r)`.
pub fn local_rates(sign: HoldingSign, funded: bool, config: &FundingConfig) -> LocalRates {
    let sel = select_financing(sign, config);
    let spread = if funded { config.borrow_spread() } else { 0.0 };
    LocalRates {
        drift: sel.r_s - config.q + spread * sel.h_signed,
        discount: config.r + spread,
    }
}

/// Deposit, unsecured debt and repo balances of a replicating economy with zero wealth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundingAccounts {
    /// Deposit balance `M >= 0`.
    pub deposit: f64,
    /// Unsecured debt `N >= 0`.
    pub debt: f64,
    /// Repo balance `R = (1 - h) holding S`; negative for a sec-lending cash margin.
    pub repo: f64,
}

impl FundingAccounts {
    pub fn for_position(value: f64, slope: f64, s: f64, config: &FundingConfig) -> Self {
        let holding = -slope;
        let sel = select_financing(HoldingSign::of(holding), config);
        let basis = value + sel.h_signed * holding * s;
        Self {
            deposit: (-basis).max(0.0),
            debt: basis.max(0.0),
            repo: (1.0 - sel.h_signed) * holding * s,
        }
    }
}

/// Funding valuation adjustment: `V* - V_b` on the bid, `V_a - V*` on the ask.
///
/// `RiskFree` is treated like a bid.
pub fn fva(side: Side, adjusted_price: f64, risk_free_price: f64) -> f64 {
    match side {
        Side::Bid | Side::RiskFree => risk_free_price - adjusted_price,
        Side::Ask => adjusted_price - risk_free_price,
    }
}
