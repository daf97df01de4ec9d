use fva_core::analytic::{bs_price, long_position_price, zero_haircut_ask, BsQuote};
use fva_core::funding::fva;
use fva_core::{pde, ExerciseStyle, FundingConfig, OptionKind, OptionLeg, Portfolio, Side};
use rayon::prelude::*;

use super::{grid_for, solver_params, Outcome};
use crate::args::{positive, Engine, PriceArgs};
use crate::error::CliError;
use crate::output::Table;

pub const COLUMNS: [&str; 10] = [
    "side", "engine", "price", "bid", "ask", "mid_reference", "f_b", "f_a", "delta", "gamma",
];

/// Quote of one side: price with the sensitivities of the quoted book.
#[derive(Debug, Clone, Copy)]
struct Quote {
    price: f64,
    delta: f64,
    gamma: f64,
}

impl From<BsQuote> for Quote {
    fn from(q: BsQuote) -> Self {
        Self {
            price: q.price,
            delta: q.delta,
            gamma: q.gamma,
        }
    }
}

/// Risk-free, bid and ask quotes; `None` where the engine has no answer.
type Quotes = [Option<Quote>; 3];

const SIDES: [Side; 3] = [Side::RiskFree, Side::Bid, Side::Ask];

pub fn run(a: &PriceArgs) -> Result<Outcome, CliError> {
    let config = a.funding.config(&a.market)?;
    positive("--strike", a.strike)?;
    positive("--expiry", a.expiry)?;
    let kind: OptionKind = a.kind.into();
    let side: Side = a.side.into();

    let quotes = match a.engine {
        Engine::Analytic => analytic_quotes(a, kind, side, &config)?,
        Engine::Pde => pde_quotes(a, kind, &config)?,
    };
    let pick = |s: Side| quotes[SIDES.iter().position(|&x| x == s).expect("side listed")];
    let rf = pick(Side::RiskFree).map(|q| q.price);
    let bid = pick(Side::Bid).map(|q| q.price);
    let ask = pick(Side::Ask).map(|q| q.price);
    let chosen = pick(side).expect("requested side is always priced");

    let mut table = Table::new("price", &COLUMNS).single();
    table.push(vec![
        a.side.name().into(),
        a.engine.name().into(),
        chosen.price.into(),
        bid.into(),
        ask.into(),
        rf.into(),
        rf.zip(bid).map(|(rf, b)| fva(Side::Bid, b, rf)).into(),
        rf.zip(ask).map(|(rf, x)| fva(Side::Ask, x, rf)).into(),
        chosen.delta.into(),
        chosen.gamma.into(),
    ]);
    Ok(table.into())
}

fn analytic_quotes(a: &PriceArgs, kind: OptionKind, side: Side, config: &FundingConfig) -> Result<Quotes, CliError> {
    if ExerciseStyle::from(a.style) == ExerciseStyle::American {
        return Err(CliError::usage("--engine", "no closed form for american exercise; use --engine pde"));
    }
    let (s, k, t) = (a.market.spot, a.strike, a.expiry);
    let rf = bs_price(kind, s, k, t, config.r, config.q, config.sigma)?;
    let bid = long_position_price(kind, s, k, t, config)?;
    let ask = match zero_haircut_ask(kind, s, k, t, config) {
        Ok(q) => Some(q.into()),
        Err(e) if side == Side::Ask => {
            return Err(CliError::pricing_at("--engine", e));
        }
        Err(_) => None,
    };
    Ok([Some(rf.into()), Some(bid.into()), ask])
}

fn pde_quotes(a: &PriceArgs, kind: OptionKind, config: &FundingConfig) -> Result<Quotes, CliError> {
    a.grid.validate()?;
    let leg = OptionLeg::new(kind, a.strike, 1.0, a.style.into()).map_err(|e| CliError::pricing_at("--strike", e))?;
    let book = Portfolio::single(leg, a.expiry).map_err(|e| CliError::pricing_at("--expiry", e))?;
    let grid = grid_for(&book, a.market.spot, config.sigma, a.grid.nodes, a.grid.dt)?;
    let params = solver_params(&book, &a.grid);
    let results = SIDES
        .par_iter()
        .map(|&side| {
            pde::price(&book, side, config, &grid, &params).map(|r| Quote {
                price: r.price,
                delta: r.quote_delta(side),
                gamma: r.quote_gamma(side),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok([Some(results[0]), Some(results[1]), Some(results[2])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::Cli;
    use crate::args::Command;
    use crate::output::Format;
    use clap::Parser;

    fn price_args(extra: &[&str]) -> PriceArgs {
        let mut argv = vec!["fva-pricer", "price"];
        argv.extend_from_slice(extra);
        match Cli::parse_from(argv).command {
            Command::Price(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn analytic_ask_needs_zero_haircuts() {
        let a = price_args(&["--kind", "call", "--engine", "analytic", "--side", "ask"]);
        let err = run(&a).err().expect("haircuts are nonzero by default");
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().starts_with("--engine"));

        let a = price_args(&["--kind", "call", "--engine", "analytic", "--side", "bid"]);
        let text = run(&a).unwrap().table.render(Format::Csv);
        let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row[4], "", "ask is blank without a closed form");
    }

    #[test]
    fn borrow_error_names_the_flag() {
        let a = price_args(&["--kind", "put", "--borrow-rate", "0.05"]);
        let err = run(&a).err().unwrap();
        assert!(err.to_string().starts_with("--borrow-rate"), "{err}");
        let a = price_args(&["--kind", "put", "--sec-haircut", "1.2"]);
        assert!(run(&a).err().unwrap().to_string().starts_with("--sec-haircut"));
    }
}
