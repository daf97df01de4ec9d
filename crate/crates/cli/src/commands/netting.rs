use std::str::FromStr;

use fva_core::pde::SolverParams;
use fva_core::portfolio::{build_strategy, netting_report, NettingReport, StrategyKind};
use rayon::prelude::*;

use super::{grid_for, Outcome};
use crate::args::{positive, NettingArgs};
use crate::error::CliError;
use crate::output::Table;

pub const COLUMNS: [&str; 10] = [
    "strategy",
    "strikes",
    "expiry",
    "netted_bid",
    "netted_ask",
    "synthetic_bid",
    "synthetic_ask",
    "netted_spread",
    "synthetic_spread",
    "netting_effect",
];

fn default_strikes(kind: StrategyKind) -> &'static [f64] {
    match kind {
        StrategyKind::Bull | StrategyKind::Strangle => &[95.0, 105.0],
        StrategyKind::Straddle | StrategyKind::Strip => &[100.0],
    }
}

pub fn run(a: &NettingArgs) -> Result<Outcome, CliError> {
    let config = a.funding.config(&a.market)?;
    if a.nodes < 3 {
        return Err(CliError::usage("--nodes", format!("need at least 3 nodes, got {}", a.nodes)));
    }
    positive("--dt", a.dt)?;
    if a.expiries.is_empty() {
        return Err(CliError::usage("--expiries", "no expiries given"));
    }
    for &t in &a.expiries {
        positive("--expiries", t)?;
    }

    let kinds: Vec<StrategyKind> = if a.strategy.eq_ignore_ascii_case("all") {
        if a.strikes.is_some() {
            return Err(CliError::usage("--strikes", "needs a single --strategy"));
        }
        StrategyKind::ALL.to_vec()
    } else {
        vec![StrategyKind::from_str(&a.strategy).map_err(|e| CliError::pricing_at("--strategy", e))?]
    };

    let mut jobs = Vec::new();
    for &kind in &kinds {
        let strikes = a.strikes.as_deref().unwrap_or(default_strikes(kind));
        let strategy = kind.with_strikes(strikes).map_err(|e| CliError::pricing_at("--strikes", e))?;
        let label = strikes.iter().map(f64::to_string).collect::<Vec<_>>().join("/");
        for &t in &a.expiries {
            let book = build_strategy(strategy, t).map_err(|e| CliError::pricing_at("--strikes", e))?;
            let grid = grid_for(&book, a.market.spot, config.sigma, a.nodes, a.dt)?;
            jobs.push((kind, label.clone(), book, grid));
        }
    }

    let reports = jobs
        .par_iter()
        .map(|(_, _, book, grid)| netting_report(book, &config, grid, &SolverParams::for_portfolio(book)))
        .collect::<Result<Vec<NettingReport>, _>>()?;

    let mut table = Table::new("netting", &COLUMNS);
    for ((kind, label, _, _), r) in jobs.iter().zip(reports) {
        table.push(vec![
            kind.name().into(),
            label.as_str().into(),
            r.expiry.into(),
            r.netted_bid.into(),
            r.netted_ask.into(),
            r.synthetic_bid.into(),
            r.synthetic_ask.into(),
            r.netted_spread.into(),
            r.synthetic_spread.into(),
            r.netting_effect.into(),
        ]);
    }
    Ok(table.into())
}
