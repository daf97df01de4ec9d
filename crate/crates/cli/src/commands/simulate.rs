use fva_core::replication::{simulate_hedge, HedgeSimulation};
use fva_core::{ExerciseStyle, OptionLeg};

use super::Outcome;
use crate::args::{positive, SimulateArgs};
use crate::error::CliError;
use crate::output::Table;

pub const COLUMNS: [&str; 12] = [
    "mean",
    "std",
    "std_error",
    "ci95_low",
    "ci95_high",
    "max_abs",
    "mean_abs",
    "n_paths",
    "n_steps",
    "seed",
    "oracle",
    "max_identity_error",
];

pub fn run(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let config = if a.risk_free {
        a.market.validate()?;
        a.market.risk_free()
    } else {
        a.funding.config(&a.market)?
    };
    positive("--strike", a.strike)?;
    positive("--expiry", a.expiry)?;
    if a.paths < 2 {
        return Err(CliError::usage("--paths", format!("need at least 2 paths, got {}", a.paths)));
    }
    if a.steps == 0 {
        return Err(CliError::usage("--steps", "need at least one step"));
    }
    if !a.mu.is_finite() {
        return Err(CliError::usage("--mu", "must be finite"));
    }
    positive("--pde-dt", a.pde_dt)?;

    let leg = OptionLeg::new(a.kind.into(), a.strike, 1.0, ExerciseStyle::European)
        .map_err(|e| CliError::pricing_at("--strike", e))?;
    let sim = HedgeSimulation {
        n_paths: a.paths,
        n_steps: a.steps,
        mu: a.mu,
        seed: a.seed,
        pde_nodes: a.pde_nodes,
        pde_dt: a.pde_dt,
        ..HedgeSimulation::new(leg, a.expiry, a.market.spot, a.side.into(), config)
    };
    let s = simulate_hedge(&sim)?;
    let (lo, hi) = s.mean_ci95();

    let mut table = Table::new("simulate", &COLUMNS).single();
    table.push(vec![
        s.mean.into(),
        s.std.into(),
        s.std_error.into(),
        lo.into(),
        hi.into(),
        s.max_abs.into(),
        s.mean_abs.into(),
        s.n_paths.into(),
        s.n_steps.into(),
        s.seed.into(),
        s.oracle.into(),
        s.max_identity_error.into(),
    ]);
    Ok(table.into())
}
