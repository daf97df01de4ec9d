pub mod curve;
pub mod netting;
pub mod price;
pub mod simulate;
pub mod table1;
pub mod table2;

use fva_core::pde::{PdeGrid, SolverParams};
use fva_core::Portfolio;

use crate::args::GridArgs;
use crate::error::CliError;
use crate::output::Table;

/// A rendered result plus an optional tolerance breach to report after it.
pub struct Outcome {
    pub table: Table,
    pub breach: Option<String>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, breach: None }
    }
}

pub fn grid_for(portfolio: &Portfolio, spot: f64, sigma: f64, nodes: usize, dt: f64) -> Result<PdeGrid, CliError> {
    PdeGrid::build(portfolio, spot, sigma, nodes, dt).map_err(|e| CliError::pricing_at("--nodes", e))
}

pub fn solver_params(portfolio: &Portfolio, grid: &GridArgs) -> SolverParams {
    SolverParams {
        smoothing: !grid.no_smoothing,
        exercise_solver: grid.exercise_solver.into(),
        ..SolverParams::for_portfolio(portfolio)
    }
}
