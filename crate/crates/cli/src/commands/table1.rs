use fva_core::analytic::bs_price;
use fva_core::pde::{self, PdeGrid};
use fva_core::{ExerciseStyle, OptionKind, OptionLeg, Portfolio, Side};
use rayon::prelude::*;

use super::{grid_for, solver_params, Outcome};
use crate::args::{positive, Table1Args};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const COLUMNS: [&str; 7] = ["kind", "quantity", "analytic", "fd", "abs_diff", "tolerance", "pass"];

pub const PRICE_TOL: f64 = 5e-3;
pub const DELTA_TOL: f64 = 5e-4;
pub const GAMMA_TOL: f64 = 1e-4;
/// Required error reduction when both steps are halved.
pub const MIN_CONVERGENCE_RATIO: f64 = 3.0;

fn kind_name(kind: OptionKind) -> &'static str {
    match kind {
        OptionKind::Call => "call",
        OptionKind::Put => "put",
    }
}

pub fn run(a: &Table1Args) -> Result<Outcome, CliError> {
    a.market.validate()?;
    a.grid.validate()?;
    positive("--strike", a.strike)?;
    positive("--expiry", a.expiry)?;
    let config = a.market.risk_free();
    let m = &a.market;

    let mut jobs = Vec::new();
    for kind in [OptionKind::Call, OptionKind::Put] {
        let book = Portfolio::single(OptionLeg::new(kind, a.strike, 1.0, ExerciseStyle::European)?, a.expiry)?;
        let grid = grid_for(&book, m.spot, m.vol, a.grid.nodes, a.grid.dt)?;
        if a.convergence {
            let fine = grid.refined()?;
            jobs.push((kind, book.clone(), fine, true));
        }
        jobs.push((kind, book, grid, false));
    }
    let solved = jobs
        .par_iter()
        .map(|(_, book, grid, _): &(OptionKind, Portfolio, PdeGrid, bool)| {
            pde::solve(book, Side::RiskFree, &config, grid, &solver_params(book, &a.grid))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new("table1", &COLUMNS);
    let mut breaches = Vec::new();
    let mut check = |kind, quantity: &str, analytic: Cell, fd: f64, diff: Option<f64>, tol: f64, ok: bool| {
        if !ok {
            let seen = diff.unwrap_or(fd);
            breaches.push(format!("{} {quantity} {seen:e} against {tol:e}", kind_name(kind)));
        }
        table.push(vec![kind_name(kind).into(), quantity.into(), analytic, fd.into(), diff.into(), tol.into(), ok.into()]);
    };

    for kind in [OptionKind::Call, OptionKind::Put] {
        let exact = bs_price(kind, m.spot, a.strike, a.expiry, m.rate, m.div, m.vol)?;
        let find = |fine: bool| {
            jobs.iter()
                .zip(&solved)
                .find(|((k, _, _, f), _)| *k == kind && *f == fine)
                .map(|(_, r)| r)
        };
        let fd = find(false).expect("base grid solved");
        for (quantity, analytic, numeric, tol) in [
            ("price", exact.price, fd.price, PRICE_TOL),
            ("delta", exact.delta, fd.delta, DELTA_TOL),
            ("gamma", exact.gamma, fd.gamma, GAMMA_TOL),
        ] {
            let diff = (numeric - analytic).abs();
            check(kind, quantity, analytic.into(), numeric, Some(diff), tol, diff <= tol);
        }
        if let Some(fine) = find(true) {
            let coarse_err = (fd.price - exact.price).abs();
            let fine_err = (fine.price - exact.price).abs();
            let ratio = coarse_err / fine_err;
            let ok = ratio >= MIN_CONVERGENCE_RATIO;
            check(kind, "convergence_ratio", Cell::Null, ratio, None, MIN_CONVERGENCE_RATIO, ok);
        }
    }

    Ok(Outcome {
        table,
        breach: (!breaches.is_empty()).then(|| breaches.join("; ")),
    })
}
