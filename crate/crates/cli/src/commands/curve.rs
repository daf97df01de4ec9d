use fva_core::analytic::long_position_price;
use fva_core::{pde, ExerciseStyle, FundingConfig, OptionKind, OptionLeg, Portfolio, Side};
use rayon::prelude::*;

use super::{grid_for, solver_params, Outcome};
use crate::args::{positive, CurveArgs, Engine};
use crate::error::CliError;
use crate::output::Table;

pub const COLUMNS: [&str; 5] = ["case", "spread", "bid", "mid_reference", "fva_percent"];

/// Financing cases swept: name, repo spread over `r`, haircut (`None` = no repo).
pub const CASES: [(&str, f64, Option<f64>); 4] = [
    ("no_repo", 0.0, None),
    ("h0_50bp", 0.005, Some(0.0)),
    ("h35_50bp", 0.005, Some(0.35)),
    ("h35_150bp", 0.015, Some(0.35)),
];

fn case_config(base: FundingConfig, spread: f64, repo_spread: f64, haircut: Option<f64>) -> FundingConfig {
    let cfg = base.with_borrow_spread(spread);
    match haircut {
        None => cfg.with_no_repo(true),
        Some(h) => cfg.with_repo_spread(repo_spread).with_haircuts(h, h),
    }
}

/// Spreads `min, min + step, ...` up to `max`, built from an integer index and
/// rounded to 1e-12 so printed values stay short.
fn spreads(a: &CurveArgs) -> Result<Vec<f64>, CliError> {
    positive("--spread-step", a.spread_step)?;
    if !(a.spread_min.is_finite() && a.spread_min >= 0.0) {
        return Err(CliError::usage("--spread-min", format!("must be non-negative, got {}", a.spread_min)));
    }
    if !(a.spread_max.is_finite() && a.spread_max >= a.spread_min) {
        return Err(CliError::usage("--spread-max", "must not be below --spread-min"));
    }
    let n = ((a.spread_max - a.spread_min) / a.spread_step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((a.spread_min + i as f64 * a.spread_step) * 1e12).round() / 1e12)
        .collect())
}

pub fn run(a: &CurveArgs) -> Result<Outcome, CliError> {
    a.market.validate()?;
    positive("--expiry", a.expiry)?;
    let strike = a.strike.unwrap_or(a.market.spot);
    positive("--strike", strike)?;
    let kind: OptionKind = a.kind.into();
    let base = a.market.risk_free();

    let sweep = spreads(a)?;
    let jobs: Vec<(&str, f64, FundingConfig)> = CASES
        .iter()
        .flat_map(|&(name, repo, h)| sweep.iter().map(move |&s| (name, s, case_config(base, s, repo, h))))
        .collect();

    let rows = match a.engine {
        Engine::Analytic => {
            let rf = long_position_price(kind, a.market.spot, strike, a.expiry, &base)?.price;
            jobs.iter()
                .map(|(_, _, cfg)| Ok((long_position_price(kind, a.market.spot, strike, a.expiry, cfg)?.price, rf)))
                .collect::<Result<Vec<_>, CliError>>()?
        }
        Engine::Pde => {
            a.grid.validate()?;
            let book = Portfolio::single(OptionLeg::new(kind, strike, 1.0, ExerciseStyle::European)?, a.expiry)?;
            let grid = grid_for(&book, a.market.spot, a.market.vol, a.grid.nodes, a.grid.dt)?;
            let params = solver_params(&book, &a.grid);
            let rf = pde::price(&book, Side::RiskFree, &base, &grid, &params)?.price;
            jobs.par_iter()
                .map(|(_, _, cfg)| pde::price(&book, Side::Bid, cfg, &grid, &params).map(|r| (r.price, rf)))
                .collect::<Result<Vec<_>, _>>()?
        }
    };

    let mut table = Table::new("fva-curve", &COLUMNS);
    for ((name, spread, _), (bid, rf)) in jobs.iter().zip(rows) {
        table.push(vec![
            (*name).into(),
            (*spread).into(),
            bid.into(),
            rf.into(),
            (100.0 * (rf - bid) / rf).into(),
        ]);
    }
    Ok(table.into())
}
