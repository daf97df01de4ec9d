//! Shared domain types: funding parameters, option legs, portfolios and quote sides.
//!
//! All rates are flat, continuously compounded and quoted per year.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Rates, haircuts and volatility describing the market maker's financing.
///
/// `repo_rate`/`repo_haircut` apply when the hedge holds stock long, and
/// `rebate_rate`/`sec_haircut` when it is short stock through securities lending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundingConfig {
    /// Risk-free deposit rate.
    pub r: f64,
    /// Unsecured borrowing rate.
    pub r_b: f64,
    /// Continuous dividend yield.
    pub q: f64,
    pub sigma: f64,
    /// Rate paid on repo borrowing against long stock.
    pub repo_rate: f64,
    /// Repo haircut in `[0, 1)`.
    pub repo_haircut: f64,
    /// Rebate earned on the cash margin posted when short stock.
    pub rebate_rate: f64,
    /// Securities-lending haircut in `[0, 1)`.
    pub sec_haircut: f64,
    /// Finance the stock hedge entirely with unsecured cash instead of repo or
    /// securities lending. Haircuts and repo/rebate rates are then ignored.
    #[serde(default)]
    pub no_repo: bool,
}

impl FundingConfig {
    /// Classic Black-Scholes economy: every rate equals `r`, no haircuts.
    pub fn risk_free(r: f64, q: f64, sigma: f64) -> Self {
        Self {
            r,
            r_b: r,
            q,
            sigma,
            repo_rate: r,
            repo_haircut: 0.0,
            rebate_rate: r,
            sec_haircut: 0.0,
            no_repo: false,
        }
    }

    /// The risk-free counterpart of this config (same `r`, `q`, `sigma`).
    pub fn risk_free_equivalent(&self) -> Self {
        Self::risk_free(self.r, self.q, self.sigma)
    }

    pub fn with_borrow_spread(mut self, spread: f64) -> Self {
        self.r_b = self.r + spread;
        self
    }

    /// Sets repo and rebate rates symmetrically around `r`: repo at `r + spread`,
    /// rebate at `r - spread`.
    pub fn with_repo_spread(mut self, spread: f64) -> Self {
        self.repo_rate = self.r + spread;
        self.rebate_rate = self.r - spread;
        self
    }

    pub fn with_haircuts(mut self, repo: f64, sec: f64) -> Self {
        self.repo_haircut = repo;
        self.sec_haircut = sec;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_no_repo(mut self, no_repo: bool) -> Self {
        self.no_repo = no_repo;
        self
    }

    /// Unsecured funding spread `r_b - r`.
    pub fn borrow_spread(&self) -> f64 {
        self.r_b - self.r
    }

    /// True when every funding term vanishes and pricing reduces to Black-Scholes.
    pub fn is_degenerate(&self) -> bool {
        self.r_b == self.r && self.repo_rate == self.r && self.rebate_rate == self.r
    }

    /// Checks every config invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r", self.r),
            ("r_b", self.r_b),
            ("q", self.q),
            ("sigma", self.sigma),
            ("repo_rate", self.repo_rate),
            ("repo_haircut", self.repo_haircut),
            ("rebate_rate", self.rebate_rate),
            ("sec_haircut", self.sec_haircut),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(PricingError::InvalidInput(format!("{name} is not finite ({v})")));
        }
        if self.r_b < self.r {
            return Err(PricingError::InvalidRateOrder(format!(
                "borrowing rate r_b = {} is below deposit rate r = {}",
                self.r_b, self.r
            )));
        }
        if self.repo_rate < self.r {
            return Err(PricingError::InvalidRateOrder(format!(
                "repo rate {} is below deposit rate r = {}",
                self.repo_rate, self.r
            )));
        }
        if self.rebate_rate > self.r {
            return Err(PricingError::InvalidRateOrder(format!(
                "rebate rate {} is above deposit rate r = {}",
                self.rebate_rate, self.r
            )));
        }
        for (name, value) in [("repo_haircut", self.repo_haircut), ("sec_haircut", self.sec_haircut)] {
            if !(0.0..1.0).contains(&value) {
                return Err(PricingError::InvalidHaircut { name, value });
            }
        }
        if self.sigma <= 0.0 {
            return Err(PricingError::NonPositiveVol(self.sigma));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn intrinsic(self, strike: f64, s: f64) -> f64 {
        match self {
            OptionKind::Call => (s - strike).max(0.0),
            OptionKind::Put => (strike - s).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExerciseStyle {
    European,
    American,
}

/// One option line in a book. Positive `quantity` means the market maker is long.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionLeg {
    pub kind: OptionKind,
    pub strike: f64,
    pub quantity: f64,
    pub style: ExerciseStyle,
}

impl OptionLeg {
    pub fn new(kind: OptionKind, strike: f64, quantity: f64, style: ExerciseStyle) -> Result<Self> {
        let leg = Self {
            kind,
            strike,
            quantity,
            style,
        };
        leg.validate()?;
        Ok(leg)
    }

    pub fn call(strike: f64, quantity: f64) -> Self {
        Self {
            kind: OptionKind::Call,
            strike,
            quantity,
            style: ExerciseStyle::European,
        }
    }

    pub fn put(strike: f64, quantity: f64) -> Self {
        Self {
            kind: OptionKind::Put,
            strike,
            quantity,
            style: ExerciseStyle::European,
        }
    }

    pub fn american(mut self) -> Self {
        self.style = ExerciseStyle::American;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike.is_finite() && self.strike > 0.0) {
            return Err(PricingError::InvalidPortfolio(format!(
                "strike must be positive, got {}",
                self.strike
            )));
        }
        if !self.quantity.is_finite() || self.quantity == 0.0 {
            return Err(PricingError::InvalidPortfolio(format!(
                "quantity must be finite and nonzero, got {}",
                self.quantity
            )));
        }
        Ok(())
    }

    pub fn payoff(&self, s: f64) -> f64 {
        self.quantity * self.kind.intrinsic(self.strike, s)
    }
}

/// A book of option legs sharing one expiry and one exercise style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PortfolioWire", into = "PortfolioWire")]
pub struct Portfolio {
    legs: Vec<OptionLeg>,
    expiry: f64,
}

impl Portfolio {
    pub fn new(legs: Vec<OptionLeg>, expiry: f64) -> Result<Self> {
        if legs.is_empty() {
            return Err(PricingError::InvalidPortfolio("portfolio has no legs".into()));
        }
        if !(expiry.is_finite() && expiry > 0.0) {
            return Err(PricingError::InvalidPortfolio(format!(
                "expiry must be positive, got {expiry}"
            )));
        }
        for leg in &legs {
            leg.validate()?;
        }
        if legs.iter().any(|l| l.style != legs[0].style) {
            return Err(PricingError::InvalidPortfolio(
                "mixed european/american legs".into(),
            ));
        }
        Ok(Self { legs, expiry })
    }

    pub fn single(leg: OptionLeg, expiry: f64) -> Result<Self> {
        Self::new(vec![leg], expiry)
    }

    pub fn legs(&self) -> &[OptionLeg] {
        &self.legs
    }

    pub fn expiry(&self) -> f64 {
        self.expiry
    }

    pub fn style(&self) -> ExerciseStyle {
        self.legs[0].style
    }

    pub fn max_strike(&self) -> f64 {
        self.legs.iter().map(|l| l.strike).fold(0.0, f64::max)
    }

    /// Same legs with every quantity multiplied by `factor` (must be nonzero).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            legs: self
                .legs
                .iter()
                .map(|l| OptionLeg {
                    quantity: l.quantity * factor,
                    ..*l
                })
                .collect(),
            expiry: self.expiry,
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn with_expiry(&self, expiry: f64) -> Result<Self> {
        Self::new(self.legs.clone(), expiry)
    }

    pub fn with_style(&self, style: ExerciseStyle) -> Self {
        Self {
            legs: self.legs.iter().map(|l| OptionLeg { style, ..*l }).collect(),
            expiry: self.expiry,
        }
    }

    /// Splits the book into one single-leg portfolio per leg.
    pub fn split_legs(&self) -> Vec<Portfolio> {
        self.legs
            .iter()
            .map(|&leg| Portfolio {
                legs: vec![leg],
                expiry: self.expiry,
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PricingError::InvalidPortfolio(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("portfolio serializes")
    }
}

/// Signed payoff of the whole book at expiry: `sum(qty * intrinsic)`.
pub fn terminal_payoff(portfolio: &Portfolio, s: f64) -> f64 {
    portfolio.legs.iter().map(|l| l.payoff(s)).sum()
}

#[derive(Serialize, Deserialize)]
struct LegWire {
    kind: OptionKind,
    strike: f64,
    qty: f64,
}

#[derive(Serialize, Deserialize)]
struct PortfolioWire {
    expiry: f64,
    style: ExerciseStyle,
    legs: Vec<LegWire>,
}

impl TryFrom<PortfolioWire> for Portfolio {
    type Error = PricingError;

    fn try_from(w: PortfolioWire) -> Result<Self> {
        let legs = w
            .legs
            .into_iter()
            .map(|l| OptionLeg {
                kind: l.kind,
                strike: l.strike,
                quantity: l.qty,
                style: w.style,
            })
            .collect();
        Portfolio::new(legs, w.expiry)
    }
}

impl From<Portfolio> for PortfolioWire {
    fn from(p: Portfolio) -> Self {
        PortfolioWire {
            expiry: p.expiry,
            style: p.style(),
            legs: p
                .legs
                .iter()
                .map(|l| LegWire {
                    kind: l.kind,
                    strike: l.strike,
                    qty: l.quantity,
                })
                .collect(),
        }
    }
}

/// Which quote is being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Long the book: position value `+V`.
    Bid,
    /// Short the book: position value `-V`.
    Ask,
    /// Long the book in the classic economy (`r_b = r`, repo = rebate = `r`).
    RiskFree,
}

impl Side {
    /// `+1` for positions that hold the book, `-1` for the short side.
    pub fn position_sign(self) -> f64 {
        match self {
            Side::Bid | Side::RiskFree => 1.0,
            Side::Ask => -1.0,
        }
    }

    /// Config actually used for this side.
    pub fn effective_config(self, config: &FundingConfig) -> FundingConfig {
        match self {
            Side::RiskFree => config.risk_free_equivalent(),
            Side::Bid | Side::Ask => *config,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn funded_config() -> FundingConfig {
        FundingConfig {
            r: 0.10,
            r_b: 0.13,
            q: 0.0,
            sigma: 0.5,
            repo_rate: 0.107,
            repo_haircut: 0.25,
            rebate_rate: 0.095,
            sec_haircut: 0.15,
            no_repo: false,
        }
    }

    #[test]
    fn degenerate_config_is_valid() {
        let cfg = FundingConfig::risk_free(0.10, 0.0, 0.5);
        assert!(cfg.validate().is_ok());
        assert!(cfg.is_degenerate());
    }

    #[test]
    fn funded_config_is_valid() {
        assert!(funded_config().validate().is_ok());
    }

    #[test]
    fn rejects_borrow_below_deposit() {
        let cfg = FundingConfig {
            r_b: 0.07,
            ..FundingConfig::risk_free(0.10, 0.0, 0.5)
        };
        assert!(matches!(cfg.validate(), Err(PricingError::InvalidRateOrder(_))));
    }

    #[test]
    fn rejects_rebate_above_deposit_and_repo_below() {
        let base = funded_config();
        let high_rebate = FundingConfig {
            rebate_rate: 0.11,
            ..base
        };
        let low_repo = FundingConfig {
            repo_rate: 0.09,
            ..base
        };
        assert!(matches!(high_rebate.validate(), Err(PricingError::InvalidRateOrder(_))));
        assert!(matches!(low_repo.validate(), Err(PricingError::InvalidRateOrder(_))));
    }

    #[test]
    fn rejects_bad_haircut_and_vol() {
        let base = funded_config();
        assert!(matches!(
            base.with_haircuts(1.0, 0.0).validate(),
            Err(PricingError::InvalidHaircut { name: "repo_haircut", .. })
        ));
        assert!(matches!(
            base.with_haircuts(0.1, -0.1).validate(),
            Err(PricingError::InvalidHaircut { name: "sec_haircut", .. })
        ));
        assert!(matches!(
            base.with_sigma(0.0).validate(),
            Err(PricingError::NonPositiveVol(_))
        ));
    }

    #[test]
    fn payoff_examples() {
        let call = Portfolio::single(OptionLeg::call(100.0, 1.0), 1.0).unwrap();
        assert_eq!(terminal_payoff(&call, 135.0), 35.0);

        let bull = Portfolio::new(vec![OptionLeg::call(95.0, 1.0), OptionLeg::call(105.0, -1.0)], 1.0).unwrap();
        assert_eq!(terminal_payoff(&bull, 200.0), 10.0);

        let strip = Portfolio::new(vec![OptionLeg::call(100.0, 1.0), OptionLeg::put(100.0, 2.0)], 1.0).unwrap();
        assert_eq!(terminal_payoff(&strip, 90.0), 20.0);
    }

    #[test]
    fn portfolio_rejects_mixed_styles_and_empty() {
        assert!(Portfolio::new(vec![], 1.0).is_err());
        let mixed = vec![OptionLeg::call(100.0, 1.0), OptionLeg::put(100.0, 1.0).american()];
        assert!(Portfolio::new(mixed, 1.0).is_err());
        assert!(Portfolio::single(OptionLeg::call(100.0, 0.0), 1.0).is_err());
        assert!(Portfolio::single(OptionLeg::call(-1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn portfolio_json_schema() {
        let text = r#"{"expiry": 2.0, "style": "european", "legs": [{"kind":"call","strike":95.0,"qty":1.0}, {"kind":"call","strike":105.0,"qty":-1.0}]}"#;
        let p = Portfolio::from_json(text).unwrap();
        assert_eq!(p.legs().len(), 2);
        assert_eq!(p.legs()[1].quantity, -1.0);
        assert_eq!(p.expiry(), 2.0);
        assert_eq!(Portfolio::from_json(&p.to_json()).unwrap(), p);

        let bad = r#"{"expiry": 2.0, "style": "european", "legs": []}"#;
        assert!(Portfolio::from_json(bad).is_err());
    }

    proptest! {
        #[test]
        fn payoff_is_homogeneous(s in 0.0f64..400.0, k1 in 50.0f64..150.0, k2 in 50.0f64..150.0,
                                 q1 in -3.0f64..3.0, q2 in -3.0f64..3.0, factor in 0.1f64..5.0) {
            prop_assume!(q1.abs() > 1e-6 && q2.abs() > 1e-6);
            let p = Portfolio::new(vec![OptionLeg::call(k1, q1), OptionLeg::put(k2, q2)], 1.0).unwrap();
            let lhs = terminal_payoff(&p.scaled(factor), s);
            let rhs = factor * terminal_payoff(&p, s);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn single_leg_payoff_sign_follows_quantity(s in 0.0f64..400.0, k in 1.0f64..300.0,
                                                   qty in -5.0f64..5.0, is_call: bool) {
            prop_assume!(qty != 0.0);
            let leg = if is_call { OptionLeg::call(k, qty) } else { OptionLeg::put(k, qty) };
            let p = Portfolio::single(leg, 1.0).unwrap();
            let v = terminal_payoff(&p, s);
            if qty > 0.0 { prop_assert!(v >= 0.0) } else { prop_assert!(v <= 0.0) }
        }
    }
}
