//! Crank-Nicolson solver for the funding-adjusted pricing PDE.
//!
//! The unknown is the signed position value `U` of the book (`+` payoff on the
//! bid, `-` payoff on the ask). Each time step freezes the funding pattern
//! (hedge direction and unsecured-debt indicator per row), solves the
//! resulting linear tridiagonal system, recomputes the pattern from the new
//! profile and repeats until the pattern stops moving. The rows where the
//! indicator flips trace the free funding boundary.

mod grid;
mod operator;
mod tridiag;

use serde::Serialize;

pub use grid::PdeGrid;
pub use operator::{apply_boundary, assemble, funding_pattern, FundingState, SpatialOperator};
pub use tridiag::Tridiagonal;

use crate::error::{PricingError, Result};
use crate::market::{terminal_payoff, ExerciseStyle, FundingConfig, Portfolio, Side};

/// How each American time step enforces the exercise constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExerciseSolver {
    /// Direct solves on the set of rows pinned to the exercise value, refined
    /// until that set stops changing. Stable on every grid.
    #[default]
    ActiveSet,
    /// Projected SOR sweeps. Fails with `PsorDiverged` once the top boundary
    /// row is convection dominated (`drift * s_max * dt / ds` above about 1).
    Psor,
}

/// Iteration controls for the funding fixed point and the exercise constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Sup-norm change in `U` between funding iterations that counts as converged.
    pub funding_iter_tol: f64,
    pub funding_max_iters: usize,
    pub psor_omega: f64,
    pub psor_tol: f64,
    pub psor_max_iters: usize,
    /// Replace the first two Crank-Nicolson steps by four implicit half steps.
    /// Without it the payoff kink on a node leaves undamped oscillations in gamma.
    pub smoothing: bool,
    pub exercise_solver: ExerciseSolver,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            funding_iter_tol: 1e-8,
            funding_max_iters: 50,
            psor_omega: 1.2,
            psor_tol: 1e-8,
            psor_max_iters: 2000,
            smoothing: true,
            exercise_solver: ExerciseSolver::ActiveSet,
        }
    }
}

impl SolverParams {
    /// Defaults with the funding tolerance scaled to the largest strike.
    pub fn for_portfolio(portfolio: &Portfolio) -> Self {
        Self {
            funding_iter_tol: 1e-10 * portfolio.max_strike(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.funding_iter_tol.is_finite() && self.funding_iter_tol > 0.0) {
            return Err(PricingError::InvalidInput("funding_iter_tol must be positive".into()));
        }
        if !(self.psor_omega > 0.0 && self.psor_omega < 2.0) {
            return Err(PricingError::InvalidInput(format!(
                "psor_omega must lie in (0, 2), got {}",
                self.psor_omega
            )));
        }
        if !(self.psor_tol.is_finite() && self.psor_tol > 0.0) || self.funding_max_iters == 0 || self.psor_max_iters == 0 {
            return Err(PricingError::InvalidInput("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// A point where the unsecured-debt indicator switches between adjacent nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundingSwitch {
    /// Calendar time.
    pub t: f64,
    /// Midpoint between the two nodes.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    /// Signed position value `U(S0, 0)`.
    pub value: f64,
    /// Quote per unit of book: `value` on the bid, `-value` on the ask.
    pub price: f64,
    /// `dU/dS` at the spot.
    pub delta: f64,
    /// `d2U/dS2` at the spot.
    pub gamma: f64,
    pub funding_boundary: Vec<FundingSwitch>,
    /// `U(., 0)` on the grid nodes.
    pub profile: Vec<f64>,
    pub ds: f64,
    /// Largest number of funding iterations used by any step.
    pub max_funding_iters: usize,
    /// Rows (summed over assemblies of the final operator) that needed upwinding.
    pub upwind_rows: usize,
}

impl PricingResult {
    /// Delta of the quoted book (sign-adjusted for the ask).
    pub fn quote_delta(&self, side: Side) -> f64 {
        side.position_sign() * self.delta
    }

    pub fn quote_gamma(&self, side: Side) -> f64 {
        side.position_sign() * self.gamma
    }
}

/// Position values on every time slice, for hedging simulations.
#[derive(Debug, Clone)]
pub struct ValueSurface {
    ds: f64,
    dt: f64,
    expiry: f64,
    /// `slices[k]` holds `U` at time-to-expiry `k dt`.
    slices: Vec<Vec<f64>>,
}

impl ValueSurface {
    pub fn expiry(&self) -> f64 {
        self.expiry
    }

    fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let last = self.slices.len() - 1;
        let tau = ((self.expiry - t) / self.dt).clamp(0.0, last as f64);
        let k = (tau.floor() as usize).min(last.saturating_sub(1));
        (k, (k + 1).min(last), tau - k as f64)
    }

    fn interp_node(values: &[f64], s: f64, ds: f64) -> f64 {
        let n = values.len();
        let s_max = (n - 1) as f64 * ds;
        if s > s_max {
            // Zero gamma beyond the grid: extend the last cell linearly.
            return values[n - 1] + (s - s_max) * (values[n - 1] - values[n - 2]) / ds;
        }
        let x = (s / ds).clamp(0.0, (n - 1) as f64);
        let j = (x.floor() as usize).min(n - 2);
        let w = x - j as f64;
        values[j] * (1.0 - w) + values[j + 1] * w
    }

    fn slope_at(values: &[f64], s: f64, ds: f64) -> f64 {
        let n = values.len();
        let x = (s / ds).clamp(0.0, (n - 1) as f64);
        let j = (x.floor() as usize).min(n - 2);
        let w = x - j as f64;
        let node_slope = |i: usize| {
            if i == 0 {
                (values[1] - values[0]) / ds
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / ds
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * ds)
            }
        };
        node_slope(j) * (1.0 - w) + node_slope(j + 1) * w
    }

    /// Position value at calendar time `t` and stock price `s`.
    pub fn value(&self, t: f64, s: f64) -> f64 {
        let (k0, k1, w) = self.bracket(t);
        let a = Self::interp_node(&self.slices[k0], s, self.ds);
        let b = Self::interp_node(&self.slices[k1], s, self.ds);
        a * (1.0 - w) + b * w
    }

    /// `dU/dS` at calendar time `t` and stock price `s`.
    pub fn slope(&self, t: f64, s: f64) -> f64 {
        let (k0, k1, w) = self.bracket(t);
        let a = Self::slope_at(&self.slices[k0], s, self.ds);
        let b = Self::slope_at(&self.slices[k1], s, self.ds);
        a * (1.0 - w) + b * w
    }
}

/// Prices a European book.
pub fn solve(
    portfolio: &Portfolio,
    side: Side,
    config: &FundingConfig,
    grid: &PdeGrid,
    params: &SolverParams,
) -> Result<PricingResult> {
    if portfolio.style() != ExerciseStyle::European {
        return Err(PricingError::InvalidPortfolio("solve expects european legs".into()));
    }
    run(portfolio, side, config, grid, params, |_, _| {})
}

/// Prices an American book, enforcing the exercise constraint each step
/// with [`SolverParams::exercise_solver`].
///
/// The bid holds `U >= payoff`; the ask is marked against optimal exercise by
/// the holder, `-U >= payoff`.
pub fn solve_american(
    portfolio: &Portfolio,
    side: Side,
    config: &FundingConfig,
    grid: &PdeGrid,
    params: &SolverParams,
) -> Result<PricingResult> {
    if portfolio.style() != ExerciseStyle::American {
        return Err(PricingError::InvalidPortfolio("solve_american expects american legs".into()));
    }
    run(portfolio, side, config, grid, params, |_, _| {})
}

/// Dispatches on the portfolio's exercise style.
pub fn price(
    portfolio: &Portfolio,
    side: Side,
    config: &FundingConfig,
    grid: &PdeGrid,
    params: &SolverParams,
) -> Result<PricingResult> {
    run(portfolio, side, config, grid, params, |_, _| {})
}

/// European solve that also keeps every time slice.
pub fn solve_surface(
    portfolio: &Portfolio,
    side: Side,
    config: &FundingConfig,
    grid: &PdeGrid,
    params: &SolverParams,
) -> Result<(PricingResult, ValueSurface)> {
    if portfolio.style() != ExerciseStyle::European {
        return Err(PricingError::InvalidPortfolio("value surfaces need european legs".into()));
    }
    let mut slices = Vec::with_capacity(grid.n_steps() + 1);
    let result = run(portfolio, side, config, grid, params, |_, u| slices.push(u.to_vec()))?;
    let surface = ValueSurface {
        ds: grid.ds(),
        dt: grid.dt(),
        expiry: grid.expiry(),
        slices,
    };
    Ok((result, surface))
}

struct Stepper<'a> {
    config: FundingConfig,
    params: &'a SolverParams,
    ds: f64,
    /// `Some(bounds)` for American books: `sign * U >= payoff`.
    exercise: Option<(Vec<f64>, bool)>,
    upwind_rows: usize,
}

struct StepOutcome {
    u: Vec<f64>,
    pattern: Vec<FundingState>,
    iterations: usize,
}

impl Stepper<'_> {
    fn step(
        &mut self,
        u_old: &[f64],
        pattern_old: &[FundingState],
        theta: f64,
        dt: f64,
        step_index: usize,
    ) -> Result<StepOutcome> {
        let old = assemble(pattern_old, self.ds, &self.config);
        let explicit = old.mass.add_scaled((1.0 - theta) * dt, &old.op);
        let rhs = explicit.apply(u_old);
        let system = |pattern: &[FundingState], rows: &mut usize| {
            let sp = assemble(pattern, self.ds, &self.config);
            *rows = sp.upwind_rows;
            sp.mass.add_scaled(-theta * dt, &sp.op)
        };

        let mut pattern = pattern_old.to_vec();
        let mut previous: Option<Vec<f64>> = None;
        let mut last_change = f64::INFINITY;
        for iteration in 1..=self.params.funding_max_iters {
            let a = system(&pattern, &mut self.upwind_rows);
            let current = match &self.exercise {
                None => a.solve(&rhs),
                Some((bound, upper)) => {
                    let diverged = || PricingError::PsorDiverged {
                        step: step_index,
                        sweeps: self.params.psor_max_iters,
                    };
                    match self.params.exercise_solver {
                        ExerciseSolver::ActiveSet => {
                            a.solve_complementarity(&rhs, bound, *upper, self.params.psor_max_iters)
                                .ok_or_else(diverged)?
                                .0
                        }
                        ExerciseSolver::Psor => {
                            let project = |v: f64, b: f64| if *upper { v.min(b) } else { v.max(b) };
                            let mut x = match &previous {
                                Some(p) => p.clone(),
                                None => a.solve(&rhs).iter().zip(bound).map(|(&v, &b)| project(v, b)).collect(),
                            };
                            a.psor(
                                &rhs,
                                &mut x,
                                bound,
                                *upper,
                                self.params.psor_omega,
                                self.params.psor_tol,
                                self.params.psor_max_iters,
                            )
                            .ok_or_else(diverged)?;
                            x
                        }
                    }
                }
            };
            let next_pattern = funding_pattern(&current, self.ds, &self.config);
            if let Some(prev) = &previous {
                last_change = prev
                    .iter()
                    .zip(&current)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
            }
            if next_pattern == pattern || last_change < self.params.funding_iter_tol {
                return Ok(StepOutcome {
                    u: current,
                    pattern: next_pattern,
                    iterations: iteration,
                });
            }
            pattern = next_pattern;
            previous = Some(current);
        }
        Err(PricingError::NoConvergence {
            step: step_index,
            iterations: self.params.funding_max_iters,
            last_change,
        })
    }
}

fn run(
    portfolio: &Portfolio,
    side: Side,
    config: &FundingConfig,
    grid: &PdeGrid,
    params: &SolverParams,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<PricingResult> {
    config.validate()?;
    params.validate()?;
    if (grid.expiry() - portfolio.expiry()).abs() > 1e-12 * portfolio.expiry() {
        return Err(PricingError::InvalidInput(format!(
            "grid expiry {} does not match portfolio expiry {}",
            grid.expiry(),
            portfolio.expiry()
        )));
    }
    let config = side.effective_config(config);
    let sign = side.position_sign();
    let ds = grid.ds();
    let nodes = grid.s_nodes();
    let payoff: Vec<f64> = nodes.iter().map(|&s| terminal_payoff(portfolio, s)).collect();

    let exercise = (portfolio.style() == ExerciseStyle::American)
        .then(|| (payoff.iter().map(|p| sign * p).collect::<Vec<_>>(), sign < 0.0));
    let mut stepper = Stepper {
        config,
        params,
        ds,
        exercise,
        upwind_rows: 0,
    };

    let mut u: Vec<f64> = payoff.iter().map(|p| sign * p).collect();
    let mut pattern = funding_pattern(&u, ds, &config);
    observe(0, &u);

    let dt = grid.dt();
    let mut boundary = Vec::new();
    let mut max_iters = 0;
    for k in 1..=grid.n_steps() {
        let sub_steps: &[(f64, f64)] = if params.smoothing && k <= 2 {
            &[(1.0, 0.5), (1.0, 0.5)]
        } else {
            &[(0.5, 1.0)]
        };
        for &(theta, frac) in sub_steps {
            let out = stepper.step(&u, &pattern, theta, frac * dt, k)?;
            max_iters = max_iters.max(out.iterations);
            u = out.u;
            pattern = out.pattern;
        }
        let t = grid.expiry() - k as f64 * dt;
        for i in 1..nodes.len() - 2 {
            if pattern[i].funded != pattern[i + 1].funded {
                boundary.push(FundingSwitch {
                    t: t.max(0.0),
                    s: 0.5 * (nodes[i] + nodes[i + 1]),
                });
            }
        }
        observe(k, &u);
    }

    let i0 = grid.spot_index();
    let value = u[i0];
    Ok(PricingResult {
        value,
        price: sign * value,
        delta: (u[i0 + 1] - u[i0 - 1]) / (2.0 * ds),
        gamma: (u[i0 + 1] - 2.0 * u[i0] + u[i0 - 1]) / (ds * ds),
        funding_boundary: boundary,
        profile: u,
        ds,
        max_funding_iters: max_iters,
        upwind_rows: stepper.upwind_rows,
    })
}
