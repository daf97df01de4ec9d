//! Monte Carlo check of the self-financing hedge.
//!
//! Each path runs the hedged economy of one option position: the position
//! itself, `-dU/dS` shares financed by repo or securities lending, a deposit
//! account `M` at `r` and unsecured debt `N` at `r_b`. Wealth
//! `pi = M - N + holding S + U - R` starts at zero and stays there up to
//! hedging error when `U` is the right price.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{bs_price, long_position_price};
use crate::error::{PricingError, Result};
use crate::funding::{select_financing, HoldingSign};
use crate::market::{ExerciseStyle, FundingConfig, OptionLeg, Portfolio, Side};
use crate::pde::{self, PdeGrid, SolverParams, ValueSurface};

/// Balances of one hedged economy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerState {
    pub t: f64,
    pub s: f64,
    pub stock_holding: f64,
    /// Deposit balance.
    pub m: f64,
    /// Unsecured debt.
    pub n: f64,
    /// Secured stock financing, `(1 - h) holding S`.
    pub r: f64,
    /// Signed position value `U`.
    pub option_value: f64,
    pub pi: f64,
}

impl LedgerState {
    /// `M - N + holding S + U - R` recomputed from the balances.
    pub fn wealth(&self) -> f64 {
        self.m - self.n + self.stock_holding * self.s + self.option_value - self.r
    }
}

/// Ledger that books every cash flow of the hedge.
///
/// Interest and dividends accrue on pre-move balances over the step; shares
/// and the secured loan are then rebalanced at the post-move price, and the
/// net cash is routed to `M` or `N` so that one of them is zero.
#[derive(Debug, Clone)]
pub struct HedgeLedger {
    config: FundingConfig,
    state: LedgerState,
    /// Largest gap between `pi` accumulated from P&L and `pi` from balances.
    identity_error: f64,
}

impl HedgeLedger {
    /// Opens the economy at zero wealth for a position worth `value` with slope `slope`.
    pub fn open(config: &FundingConfig, t: f64, s: f64, value: f64, slope: f64) -> Self {
        let holding = -slope;
        let r = secured_balance(config, holding, s);
        let cash = -value - holding * s + r;
        let state = LedgerState {
            t,
            s,
            stock_holding: holding,
            m: cash.max(0.0),
            n: (-cash).max(0.0),
            r,
            option_value: value,
            pi: 0.0,
        };
        Self {
            config: *config,
            state,
            identity_error: 0.0,
        }
    }

    pub fn state(&self) -> &LedgerState {
        &self.state
    }

    pub fn identity_error(&self) -> f64 {
        self.identity_error
    }

    /// Moves to time `t` and price `s`, marks the position at `value` and
    /// rebalances to the hedge for `slope`.
    pub fn advance(&mut self, t: f64, s: f64, value: f64, slope: f64) {
        let cfg = &self.config;
        let old = self.state;
        let dt = t - old.t;
        let secured_rate = select_financing(HoldingSign::of(old.stock_holding), cfg).rate;

        let deposit_interest = old.m * (cfg.r * dt).exp_m1();
        let debt_interest = old.n * (cfg.r_b * dt).exp_m1();
        let secured_interest = old.r * (secured_rate * dt).exp_m1();
        let dividends = old.stock_holding * old.s * (cfg.q * dt).exp_m1();
        let pnl = deposit_interest - debt_interest - secured_interest
            + dividends
            + old.stock_holding * (s - old.s)
            + (value - old.option_value);

        let holding = -slope;
        let r = secured_balance(cfg, holding, s);
        let cash = old.m + deposit_interest - old.n - debt_interest + dividends
            - (holding - old.stock_holding) * s
            + (r - old.r - secured_interest);
        self.state = LedgerState {
            t,
            s,
            stock_holding: holding,
            m: cash.max(0.0),
            n: (-cash).max(0.0),
            r,
            option_value: value,
            pi: old.pi + pnl,
        };
        let scale = 1.0 + self.state.m + self.state.n + (holding * s).abs() + value.abs() + r.abs();
        self.identity_error = self
            .identity_error
            .max((self.state.pi - self.state.wealth()).abs() / scale);
    }
}

fn secured_balance(config: &FundingConfig, holding: f64, s: f64) -> f64 {
    let h = select_financing(HoldingSign::of(holding), config).h_signed;
    (1.0 - h) * holding * s
}

/// Source of `U(t, S)` and `dU/dS` along the paths.
#[derive(Debug, Clone)]
pub enum PricingOracle {
    /// Black-Scholes in the classic economy.
    BlackScholes { leg: OptionLeg, sign: f64, expiry: f64, config: FundingConfig },
    /// Closed form of a long vanilla position.
    LongClosedForm { leg: OptionLeg, expiry: f64, config: FundingConfig },
    /// Interpolated PDE value surface.
    Surface(ValueSurface),
}

impl PricingOracle {
    /// Picks the cheapest exact oracle for a single-leg position.
    ///
    /// The classic economy and long positions have closed forms; everything
    /// else is solved once on a PDE grid of `pde_nodes` nodes and step `pde_dt`.
    pub fn select(
        leg: OptionLeg,
        expiry: f64,
        spot: f64,
        side: Side,
        config: &FundingConfig,
        pde_nodes: usize,
        pde_dt: f64,
    ) -> Result<Self> {
        if leg.style == ExerciseStyle::American {
            return Err(PricingError::OracleUnavailable(
                "hedge simulation covers european options only".into(),
            ));
        }
        leg.validate()?;
        config.validate()?;
        let effective = side.effective_config(config);
        let sign = side.position_sign();
        if effective.is_degenerate() {
            return Ok(Self::BlackScholes {
                leg,
                sign,
                expiry,
                config: effective,
            });
        }
        if sign * leg.quantity > 0.0 {
            let long = OptionLeg {
                quantity: sign * leg.quantity,
                ..leg
            };
            return Ok(Self::LongClosedForm {
                leg: long,
                expiry,
                config: effective,
            });
        }
        let book = Portfolio::single(leg, expiry)?;
        let grid = PdeGrid::build(&book, spot, effective.sigma, pde_nodes, pde_dt)?;
        let (_, surface) = pde::solve_surface(&book, side, config, &grid, &SolverParams::for_portfolio(&book))?;
        Ok(Self::Surface(surface))
    }

    /// Position value and slope at calendar time `t`.
    pub fn evaluate(&self, t: f64, s: f64) -> Result<(f64, f64)> {
        match self {
            Self::BlackScholes {
                leg,
                sign,
                expiry,
                config,
            } => {
                let scale = sign * leg.quantity;
                let tau = expiry - t;
                if tau <= 0.0 {
                    return Ok(terminal(leg, scale, s));
                }
                let q = bs_price(leg.kind, s, leg.strike, tau, config.r, config.q, config.sigma)?;
                Ok((scale * q.price, scale * q.delta))
            }
            Self::LongClosedForm { leg, expiry, config } => {
                let tau = expiry - t;
                if tau <= 0.0 {
                    return Ok(terminal(leg, leg.quantity, s));
                }
                let q = long_position_price(leg.kind, s, leg.strike, tau, config)?;
                Ok((leg.quantity * q.price, leg.quantity * q.delta))
            }
            Self::Surface(surface) => Ok((surface.value(t, s), surface.slope(t, s))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::BlackScholes { .. } => "black-scholes",
            Self::LongClosedForm { .. } => "long-closed-form",
            Self::Surface(_) => "pde",
        }
    }
}

fn terminal(leg: &OptionLeg, scale: f64, s: f64) -> (f64, f64) {
    let intrinsic = leg.kind.intrinsic(leg.strike, s);
    let slope = match leg.kind {
        crate::market::OptionKind::Call if s > leg.strike => 1.0,
        crate::market::OptionKind::Put if s < leg.strike => -1.0,
        _ => 0.0,
    };
    (scale * intrinsic, scale * slope)
}

/// Inputs of a hedge simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeSimulation {
    pub leg: OptionLeg,
    pub expiry: f64,
    pub spot: f64,
    pub side: Side,
    pub config: FundingConfig,
    pub n_paths: usize,
    /// Rebalancing dates per path.
    pub n_steps: usize,
    /// Real-world drift of the stock.
    pub mu: f64,
    pub seed: u64,
    /// Grid used when the oracle is a PDE surface.
    pub pde_nodes: usize,
    pub pde_dt: f64,
}

impl HedgeSimulation {
    pub fn new(leg: OptionLeg, expiry: f64, spot: f64, side: Side, config: FundingConfig) -> Self {
        Self {
            leg,
            expiry,
            spot,
            side,
            config,
            n_paths: 10_000,
            n_steps: 250,
            mu: 0.0,
            seed: 0,
            pde_nodes: 1000,
            pde_dt: 0.004,
        }
    }
}

/// Distribution of the discounted terminal wealth `exp(-rT) pi_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HedgeSummary {
    pub mean: f64,
    pub std: f64,
    /// `std / sqrt(n_paths)`.
    pub std_error: f64,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub oracle: &'static str,
    /// Largest relative gap between accumulated and recomputed wealth.
    pub max_identity_error: f64,
}

impl HedgeSummary {
    /// Two-sided 95% confidence interval of the mean.
    pub fn mean_ci95(&self) -> (f64, f64) {
        (self.mean - 1.96 * self.std_error, self.mean + 1.96 * self.std_error)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

/// Sum in a fixed binary-tree order, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Runs `sim.n_paths` hedged paths in parallel.
///
/// Path `i` draws from its own ChaCha stream `i` under `sim.seed`, so results
/// do not depend on scheduling.
pub fn simulate_hedge(sim: &HedgeSimulation) -> Result<HedgeSummary> {
    if sim.n_paths < 2 || sim.n_steps == 0 {
        return Err(PricingError::InvalidInput("need at least 2 paths and 1 step".into()));
    }
    for (name, v) in [("spot", sim.spot), ("expiry", sim.expiry)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(PricingError::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    if !sim.mu.is_finite() {
        return Err(PricingError::InvalidInput("mu must be finite".into()));
    }
    let oracle = PricingOracle::select(
        sim.leg,
        sim.expiry,
        sim.spot,
        sim.side,
        &sim.config,
        sim.pde_nodes,
        sim.pde_dt,
    )?;
    let ledger_config = sim.side.effective_config(&sim.config);

    let outcomes = (0..sim.n_paths)
        .into_par_iter()
        .map(|path| run_path(sim, &oracle, &ledger_config, path as u64))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let discount = (-ledger_config.r * sim.expiry).exp();
    let pis: Vec<f64> = outcomes.iter().map(|(pi, _)| discount * pi).collect();

    let n = pis.len() as f64;
    let mean = pairwise_sum(&pis) / n;
    let dev: Vec<f64> = pis.iter().map(|x| (x - mean) * (x - mean)).collect();
    let std = (pairwise_sum(&dev) / (n - 1.0)).sqrt();
    let abs: Vec<f64> = pis.iter().map(|x| x.abs()).collect();
    Ok(HedgeSummary {
        mean,
        std,
        std_error: std / n.sqrt(),
        max_abs: abs.iter().copied().fold(0.0, f64::max),
        mean_abs: pairwise_sum(&abs) / n,
        n_paths: sim.n_paths,
        n_steps: sim.n_steps,
        seed: sim.seed,
        oracle: oracle.name(),
        max_identity_error: outcomes.iter().map(|(_, e)| *e).fold(0.0, f64::max),
    })
}

/// Terminal wealth and identity error of one path.
fn run_path(sim: &HedgeSimulation, oracle: &PricingOracle, config: &FundingConfig, path: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    rng.set_stream(path);
    let dt = sim.expiry / sim.n_steps as f64;
    let sigma = config.sigma;
    let drift = (sim.mu - 0.5 * sigma * sigma) * dt;
    let vol = sigma * dt.sqrt();

    let mut s = sim.spot;
    let (u0, slope0) = oracle.evaluate(0.0, s)?;
    let mut ledger = HedgeLedger::open(config, 0.0, s, u0, slope0);
    for k in 1..=sim.n_steps {
        let z: f64 = rng.sample(StandardNormal);
        s *= (drift + vol * z).exp();
        let t = if k == sim.n_steps { sim.expiry } else { k as f64 * dt };
        let (u, slope) = oracle.evaluate(t, s)?;
        ledger.advance(t, s, u, slope);
    }
    Ok((ledger.state().pi, ledger.identity_error()))
}
