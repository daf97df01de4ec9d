//! Spatial discretisation of the position-value PDE
//!
//! `U_t + drift S U_S + 1/2 sigma^2 S^2 U_SS - discount U = 0`
//!
//! where `drift` and `discount` are localised per row from the funding
//! pattern (hedge direction and whether unsecured debt is active).

use crate::funding::{local_rates, unsecured_basis, HoldingSign, LocalRates};
use crate::market::FundingConfig;

use super::tridiag::Tridiagonal;

/// Funding state of one grid row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FundingState {
    pub hedge: HoldingSign,
    /// Unsecured debt `N > 0` at this row.
    pub funded: bool,
}

/// Value, slope and stock level a row's equation is written at.
///
/// Interior rows sit on their node with a central slope. The first and last
/// rows sit on the half node next to the boundary, with the average value and
/// the one-sided slope across that cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RowPoint {
    pub s: f64,
    pub value: f64,
    pub slope: f64,
}

pub(crate) fn row_points(u: &[f64], ds: f64) -> impl Iterator<Item = RowPoint> + '_ {
    let n = u.len();
    (0..n).map(move |i| {
        if i == 0 {
            RowPoint {
                s: 0.5 * ds,
                value: 0.5 * (u[0] + u[1]),
                slope: (u[1] - u[0]) / ds,
            }
        } else if i == n - 1 {
            RowPoint {
                s: (i as f64 - 0.5) * ds,
                value: 0.5 * (u[n - 2] + u[n - 1]),
                slope: (u[n - 1] - u[n - 2]) / ds,
            }
        } else {
            RowPoint {
                s: i as f64 * ds,
                value: u[i],
                slope: (u[i + 1] - u[i - 1]) / (2.0 * ds),
            }
        }
    })
}

/// Funding state of every row for the profile `u`.
pub fn funding_pattern(u: &[f64], ds: f64, config: &FundingConfig) -> Vec<FundingState> {
    row_points(u, ds)
        .map(|p| FundingState {
            hedge: HoldingSign::hedging(p.slope),
            funded: unsecured_basis(p.value, p.slope, p.s, config) > 0.0,
        })
        .collect()
}

/// Spatial operator `L` and the mass matrix `B` such that the semi-discrete
/// system reads `B dU/dtau = L U`. `B` is the identity except on the two
/// boundary rows.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    pub op: Tridiagonal,
    pub mass: Tridiagonal,
    /// Rows where the convection stencil switched to upwind.
    pub upwind_rows: usize,
}

pub fn assemble(pattern: &[FundingState], ds: f64, config: &FundingConfig) -> SpatialOperator {
    let n = pattern.len();
    assert!(n >= 3, "operator needs at least 3 rows");
    let rates: Vec<LocalRates> = pattern
        .iter()
        .map(|st| local_rates(st.hedge, st.funded, config))
        .collect();
    let half_var = 0.5 * config.sigma * config.sigma;
    let mut op = Tridiagonal::zeros(n);
    let mut upwind_rows = 0;

    for (i, rate) in rates.iter().enumerate().take(n - 1).skip(1) {
        let s = i as f64 * ds;
        let a = rate.drift * s;
        let b = half_var * s * s;
        let c = rate.discount;
        let diff = b / (ds * ds);
        if a.abs() * ds > 2.0 * b {
            upwind_rows += 1;
            if a >= 0.0 {
                op.lower[i] = diff;
                op.diag[i] = -2.0 * diff - a / ds - c;
                op.upper[i] = diff + a / ds;
            } else {
                op.lower[i] = diff - a / ds;
                op.diag[i] = -2.0 * diff + a / ds - c;
                op.upper[i] = diff;
            }
        } else {
            op.lower[i] = diff - a / (2.0 * ds);
            op.diag[i] = -2.0 * diff - c;
            op.upper[i] = diff + a / (2.0 * ds);
        }
    }

    let mut mass = Tridiagonal::identity(n);
    apply_boundary(&mut op, &mut mass, rates[0], rates[n - 1], ds);
    SpatialOperator {
        op,
        mass,
        upwind_rows,
    }
}

/// Writes the zero-gamma boundary rows.
///
/// With `U_SS = 0` the PDE at the half node next to each boundary only
/// involves convection and discounting. Using the cell average for `U` and
/// the one-sided difference for `U_S`, each boundary row couples just the
/// boundary node and its neighbour, so the system stays tridiagonal.
pub fn apply_boundary(op: &mut Tridiagonal, mass: &mut Tridiagonal, low: LocalRates, high: LocalRates, ds: f64) {
    let n = op.len();

    let a = low.drift * 0.5 * ds;
    op.lower[0] = 0.0;
    op.diag[0] = -a / ds - 0.5 * low.discount;
    op.upper[0] = a / ds - 0.5 * low.discount;
    mass.diag[0] = 0.5;
    mass.upper[0] = 0.5;

    let a = high.drift * (n as f64 - 1.5) * ds;
    op.lower[n - 1] = -a / ds - 0.5 * high.discount;
    op.diag[n - 1] = a / ds - 0.5 * high.discount;
    op.upper[n - 1] = 0.0;
    mass.lower[n - 1] = 0.5;
    mass.diag[n - 1] = 0.5;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classic() -> FundingConfig {
        FundingConfig::risk_free(0.1, 0.0, 0.5)
    }

    fn flat_pattern(n: usize) -> Vec<FundingState> {
        vec![
            FundingState {
                hedge: HoldingSign::Long,
                funded: false
            };
            n
        ]
    }

    #[test]
    fn operator_annihilates_forward_contract() {
        // U = S - K exp(-r tau) solves the classic PDE: L U = dU/dtau = r K exp(-r tau).
        let (n, ds, k) = (50, 2.0, 40.0);
        let cfg = classic();
        let sp = assemble(&flat_pattern(n), ds, &cfg);
        let u: Vec<f64> = (0..n).map(|i| i as f64 * ds - k).collect();
        let lu = sp.op.apply(&u);
        let du: Vec<f64> = sp.mass.apply(&vec![cfg.r * k; n]);
        for i in 0..n {
            assert!((lu[i] - du[i]).abs() < 1e-10, "row {i}: {} vs {}", lu[i], du[i]);
        }
    }

    #[test]
    fn boundary_rows_are_two_point() {
        let sp = assemble(&flat_pattern(10), 1.0, &classic());
        assert_eq!(sp.op.lower[0], 0.0);
        assert_eq!(sp.op.upper[9], 0.0);
        assert_eq!(sp.mass.diag[0], 0.5);
        assert_eq!(sp.mass.upper[0], 0.5);
        assert_eq!(sp.mass.diag[5], 1.0);
    }

    #[test]
    fn upwind_switch_only_near_zero() {
        let cfg = FundingConfig::risk_free(0.1, 0.0, 0.05);
        let sp = assemble(&flat_pattern(200), 1.0, &cfg);
        // |r| ds > sigma^2 S  <=>  S < 40
        assert_eq!(sp.upwind_rows, 39);
        let sp = assemble(&flat_pattern(200), 1.0, &classic());
        assert_eq!(sp.upwind_rows, 0);
    }

    #[test]
    fn pattern_of_long_put_is_repo_and_funded() {
        let cfg = classic().with_borrow_spread(0.02).with_haircuts(0.3, 0.1);
        let ds = 1.0;
        let u: Vec<f64> = (0..100).map(|i| (60.0 - i as f64).max(0.0) + 1.0).collect();
        let pat = funding_pattern(&u, ds, &cfg);
        assert_eq!(pat[10].hedge, HoldingSign::Long);
        assert!(pat[10].funded);
        let short: Vec<f64> = u.iter().map(|v| -v).collect();
        let pat = funding_pattern(&short, ds, &cfg);
        assert_eq!(pat[10].hedge, HoldingSign::Short);
        assert!(!pat[10].funded);
    }
}
