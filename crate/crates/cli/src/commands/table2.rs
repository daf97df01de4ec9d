//! Funding-cost spreads for a small listed-option sample, next to the quoted
//! market spreads. Volatility is implied per option from its mid price.

use fva_core::analytic::implied_vol;
use fva_core::{pde, ExerciseStyle, FundingConfig, OptionKind, OptionLeg, Portfolio, Side};
use rayon::prelude::*;
use serde::Deserialize;

use super::{grid_for, Outcome};
use crate::args::{positive, Table2Args};
use crate::error::CliError;
use crate::output::Table;

const BUNDLED: &str = include_str!("../../fixtures/table2.json");

pub const COLUMNS: [&str; 11] = [
    "strike",
    "mid_call",
    "mid_put",
    "call_vol",
    "put_vol",
    "market_call_spread",
    "market_put_spread",
    "call_spread",
    "put_spread",
    "reference_call_spread",
    "reference_put_spread",
];

#[derive(Debug, Deserialize)]
struct Fixture {
    assumptions: Assumptions,
    rows: Vec<Row>,
}

#[derive(Debug, Deserialize)]
struct Assumptions {
    spot: f64,
    rate: f64,
    div: f64,
    expiry: f64,
    borrow_spread: f64,
    repo_spread: f64,
    haircut: f64,
}

#[derive(Debug, Deserialize)]
struct Row {
    strike: f64,
    mid_call: f64,
    mid_put: f64,
    market_call_spread: f64,
    market_put_spread: f64,
    reference_call_spread: f64,
    reference_put_spread: f64,
}

pub fn run(a: &Table2Args) -> Result<Outcome, CliError> {
    if a.nodes < 3 {
        return Err(CliError::usage("--nodes", format!("need at least 3 nodes, got {}", a.nodes)));
    }
    positive("--dt", a.dt)?;
    let text = match &a.fixture {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::usage("--fixture", format!("cannot read {}: {e}", path.display())))?,
        None => BUNDLED.to_string(),
    };
    let fx: Fixture =
        serde_json::from_str(&text).map_err(|e| CliError::usage("--fixture", format!("invalid sample: {e}")))?;
    let m = &fx.assumptions;

    let jobs: Vec<(OptionKind, f64, f64)> = fx
        .rows
        .iter()
        .flat_map(|r| [(OptionKind::Call, r.strike, r.mid_call), (OptionKind::Put, r.strike, r.mid_put)])
        .collect();
    let solved = jobs
        .par_iter()
        .map(|&(kind, strike, mid)| {
            let vol = implied_vol(kind, m.spot, strike, m.expiry, m.rate, m.div, mid)?;
            let config = FundingConfig::risk_free(m.rate, m.div, vol)
                .with_borrow_spread(m.borrow_spread)
                .with_repo_spread(m.repo_spread)
                .with_haircuts(m.haircut, m.haircut);
            config.validate()?;
            let book = Portfolio::single(OptionLeg::new(kind, strike, 1.0, ExerciseStyle::European)?, m.expiry)?;
            let grid = grid_for(&book, m.spot, vol, a.nodes, a.dt)?;
            let params = fva_core::pde::SolverParams::for_portfolio(&book);
            let bid = pde::price(&book, Side::Bid, &config, &grid, &params)?.price;
            let ask = pde::price(&book, Side::Ask, &config, &grid, &params)?.price;
            Ok((vol, ask - bid))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new("table2", &COLUMNS);
    for (r, pair) in fx.rows.iter().zip(solved.chunks(2)) {
        let ((call_vol, call_spread), (put_vol, put_spread)) = (pair[0], pair[1]);
        table.push(vec![
            r.strike.into(),
            r.mid_call.into(),
            r.mid_put.into(),
            call_vol.into(),
            put_vol.into(),
            r.market_call_spread.into(),
            r.market_put_spread.into(),
            call_spread.into(),
            put_spread.into(),
            r.reference_call_spread.into(),
            r.reference_put_spread.into(),
        ]);
    }
    Ok(table.into())
}
