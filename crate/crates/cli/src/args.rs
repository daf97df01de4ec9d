use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fva_core::pde::ExerciseSolver;
use fva_core::{ExerciseStyle, FundingConfig, OptionKind, PricingError, Side};

use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "fva-pricer", version, about = "Option bid/ask pricing with funding costs")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Flat `key = value` file of flag defaults; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price one option on one side, with the other quotes for reference.
    Price(PriceArgs),
    /// FVA of a long option against the unsecured funding spread.
    FvaCurve(CurveArgs),
    /// Netted versus synthetic bid/ask spreads of option strategies across expiries.
    Netting(NettingArgs),
    /// Finite-difference solver against Black-Scholes on the calibration case.
    Table1(Table1Args),
    /// Monte Carlo run of the self-financing hedge.
    Simulate(SimulateArgs),
    /// Bid/ask spreads for the bundled listed-option sample.
    Table2(Table2Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Call,
    Put,
}

impl From<KindArg> for OptionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Call => OptionKind::Call,
            KindArg::Put => OptionKind::Put,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Bid,
    Ask,
    Riskfree,
}

impl SideArg {
    pub fn name(self) -> &'static str {
        match self {
            SideArg::Bid => "bid",
            SideArg::Ask => "ask",
            SideArg::Riskfree => "riskfree",
        }
    }
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Bid => Side::Bid,
            SideArg::Ask => Side::Ask,
            SideArg::Riskfree => Side::RiskFree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analytic,
    Pde,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Pde => "pde",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    European,
    American,
}

impl From<StyleArg> for ExerciseStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::European => ExerciseStyle::European,
            StyleArg::American => ExerciseStyle::American,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExerciseArg {
    ActiveSet,
    Psor,
}

impl From<ExerciseArg> for ExerciseSolver {
    fn from(e: ExerciseArg) -> Self {
        match e {
            ExerciseArg::ActiveSet => ExerciseSolver::ActiveSet,
            ExerciseArg::Psor => ExerciseSolver::Psor,
        }
    }
}

/// Spot, deposit rate, dividend yield and volatility.
#[derive(Debug, Clone, Args)]
pub struct MarketArgs {
    #[arg(long, default_value_t = 100.0)]
    pub spot: f64,
    /// Risk-free deposit rate.
    #[arg(long, default_value_t = 0.10, allow_negative_numbers = true)]
    pub rate: f64,
    /// Continuous dividend yield.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub div: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub vol: f64,
}

impl MarketArgs {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("--spot", self.spot)?;
        if !self.rate.is_finite() {
            return Err(CliError::usage("--rate", format!("must be finite, got {}", self.rate)));
        }
        if !self.div.is_finite() {
            return Err(CliError::usage("--div", format!("must be finite, got {}", self.div)));
        }
        if !(self.vol.is_finite() && self.vol > 0.0) {
            return Err(CliError::pricing_at("--vol", PricingError::NonPositiveVol(self.vol)));
        }
        Ok(())
    }

    pub fn risk_free(&self) -> FundingConfig {
        FundingConfig::risk_free(self.rate, self.div, self.vol)
    }
}

/// Unsecured borrowing, repo and securities-lending terms.
#[derive(Debug, Clone, Args)]
pub struct FundingArgs {
    /// Unsecured borrowing rate.
    #[arg(long, conflicts_with = "borrow_spread", allow_negative_numbers = true)]
    pub borrow_rate: Option<f64>,
    /// Borrowing rate as a spread over --rate [default: 0.03].
    #[arg(long, allow_negative_numbers = true)]
    pub borrow_spread: Option<f64>,
    /// Repo rate paid when the hedge is long stock.
    #[arg(long, conflicts_with = "repo_spread", allow_negative_numbers = true)]
    pub repo_rate: Option<f64>,
    /// Repo rate as a spread over --rate [default: 0.007].
    #[arg(long, allow_negative_numbers = true)]
    pub repo_spread: Option<f64>,
    /// Rebate earned when the hedge is short stock.
    #[arg(long, conflicts_with = "rebate_spread", allow_negative_numbers = true)]
    pub rebate_rate: Option<f64>,
    /// Rebate as a spread below --rate, so the rebate is rate - spread [default: 0.005].
    #[arg(long, allow_negative_numbers = true)]
    pub rebate_spread: Option<f64>,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    pub repo_haircut: f64,
    #[arg(long, default_value_t = 0.15, allow_negative_numbers = true)]
    pub sec_haircut: f64,
    /// Fund the stock hedge unsecured instead of through repo or securities lending.
    #[arg(long)]
    pub no_repo: bool,
}

impl FundingArgs {
    fn borrow_flag(&self) -> &'static str {
        if self.borrow_rate.is_some() { "--borrow-rate" } else { "--borrow-spread" }
    }

    fn repo_flag(&self) -> &'static str {
        if self.repo_rate.is_some() { "--repo-rate" } else { "--repo-spread" }
    }

    fn rebate_flag(&self) -> &'static str {
        if self.rebate_rate.is_some() { "--rebate-rate" } else { "--rebate-spread" }
    }

    /// Full config, validated, with errors attributed to the flag that caused them.
    pub fn config(&self, market: &MarketArgs) -> Result<FundingConfig, CliError> {
        market.validate()?;
        let r = market.rate;
        let config = FundingConfig {
            r,
            r_b: self.borrow_rate.unwrap_or(r + self.borrow_spread.unwrap_or(0.03)),
            q: market.div,
            sigma: market.vol,
            repo_rate: self.repo_rate.unwrap_or(r + self.repo_spread.unwrap_or(0.007)),
            repo_haircut: self.repo_haircut,
            rebate_rate: self.rebate_rate.unwrap_or(r - self.rebate_spread.unwrap_or(0.005)),
            sec_haircut: self.sec_haircut,
            no_repo: self.no_repo,
        };
        config.validate().map_err(|e| {
            let flag = match &e {
                PricingError::InvalidRateOrder(msg) if msg.starts_with("borrowing") => self.borrow_flag(),
                PricingError::InvalidRateOrder(msg) if msg.starts_with("repo") => self.repo_flag(),
                PricingError::InvalidRateOrder(_) => self.rebate_flag(),
                PricingError::InvalidHaircut { name: "repo_haircut", .. } => "--repo-haircut",
                PricingError::InvalidHaircut { .. } => "--sec-haircut",
                PricingError::InvalidInput(msg) if msg.starts_with("r_b") => self.borrow_flag(),
                PricingError::InvalidInput(msg) if msg.starts_with("repo_rate") => self.repo_flag(),
                PricingError::InvalidInput(msg) if msg.starts_with("rebate_rate") => self.rebate_flag(),
                PricingError::InvalidInput(msg) if msg.starts_with("repo_haircut") => "--repo-haircut",
                PricingError::InvalidInput(msg) if msg.starts_with("sec_haircut") => "--sec-haircut",
                _ => "--rate",
            };
            CliError::pricing_at(flag, e)
        })?;
        Ok(config)
    }
}

/// Finite-difference grid and solver switches.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Stock grid nodes.
    #[arg(long, default_value_t = 2000)]
    pub nodes: usize,
    /// Time step in years.
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    /// Plain Crank-Nicolson from the first step (no implicit start-up steps).
    #[arg(long)]
    pub no_smoothing: bool,
    /// Solver for the early-exercise constraint.
    #[arg(long, value_enum, default_value_t = ExerciseArg::ActiveSet)]
    pub exercise_solver: ExerciseArg,
}

impl GridArgs {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.nodes < 3 {
            return Err(CliError::usage("--nodes", format!("need at least 3 nodes, got {}", self.nodes)));
        }
        positive("--dt", self.dt)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub funding: FundingArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    /// Years to expiry.
    #[arg(long, default_value_t = 2.0)]
    pub expiry: f64,
    #[arg(long, value_enum, default_value_t = SideArg::Bid)]
    pub side: SideArg,
    #[arg(long, value_enum, default_value_t = Engine::Pde)]
    pub engine: Engine,
    #[arg(long, value_enum, default_value_t = StyleArg::European)]
    pub style: StyleArg,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = KindArg::Put)]
    pub kind: KindArg,
    /// Strike [default: the spot].
    #[arg(long)]
    pub strike: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub expiry: f64,
    #[arg(long, default_value_t = 0.0)]
    pub spread_min: f64,
    #[arg(long, default_value_t = 0.04)]
    pub spread_max: f64,
    #[arg(long, default_value_t = 0.0025)]
    pub spread_step: f64,
    #[arg(long, value_enum, default_value_t = Engine::Analytic)]
    pub engine: Engine,
}

#[derive(Debug, Clone, Args)]
pub struct NettingArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub funding: FundingArgs,
    /// Strategy name, or `all`.
    #[arg(long, default_value = "all")]
    pub strategy: String,
    /// Comma-separated strikes, low to high; only with a single strategy.
    #[arg(long, value_delimiter = ',')]
    pub strikes: Option<Vec<f64>>,
    /// Comma-separated expiries in years.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2,3")]
    pub expiries: Vec<f64>,
    #[arg(long, default_value_t = 800)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    #[arg(long, default_value_t = 2.0)]
    pub expiry: f64,
    /// Also solve on the grid with half the spacing and half the time step and
    /// report how much the price error shrinks.
    #[arg(long)]
    pub convergence: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub funding: FundingArgs,
    #[arg(long, value_enum, default_value_t = KindArg::Call)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    #[arg(long, default_value_t = 1.0)]
    pub expiry: f64,
    #[arg(long, value_enum, default_value_t = SideArg::Bid)]
    pub side: SideArg,
    /// Simulate in the classic economy (every rate equal to --rate).
    #[arg(long)]
    pub risk_free: bool,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Rebalancing dates per path.
    #[arg(long, default_value_t = 250)]
    pub steps: usize,
    /// Real-world stock drift.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, required = true)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub pde_nodes: usize,
    #[arg(long, default_value_t = 0.004)]
    pub pde_dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Table2Args {
    /// JSON sample to use instead of the bundled one.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

pub fn positive(flag: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::usage(flag, format!("must be positive, got {v}")))
    }
}
