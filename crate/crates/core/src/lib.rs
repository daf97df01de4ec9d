//! Option pricing for a market maker who funds premiums and stock hedges at
//! asymmetric rates.
//!
//! The bid of a book is its value as a long position and the ask its cost as a
//! short position, each computed in its own self-financing hedged economy with
//! unsecured borrowing at `r_b`, deposits at `r`, repo and securities-lending
//! haircuts. The modules are:
//!
//! * [`market`]: funding parameters, legs, portfolios, quote sides
//! * [`analytic`]: Black-Scholes and the closed forms for long and zero-haircut quotes
//! * [`funding`]: financing selection, funding accounts, FVA
//! * [`pde`]: Crank-Nicolson solver with a free funding boundary and PSOR exercise
//! * [`portfolio`]: strategy builders and netting analysis
//! * [`replication`]: Monte Carlo check of the self-financing hedge

pub mod analytic;
pub mod error;
pub mod funding;
pub mod market;
pub mod pde;
pub mod portfolio;
pub mod replication;

pub use error::{PricingError, Result};
pub use market::{terminal_payoff, ExerciseStyle, FundingConfig, OptionKind, OptionLeg, Portfolio, Side};
