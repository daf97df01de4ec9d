mod common;

use fva_core::analytic::{bs_price, long_position_price};
use fva_core::pde::{price, solve, solve_american, PdeGrid, PricingResult, SolverParams};
use fva_core::{FundingConfig, OptionKind, OptionLeg, Portfolio, Side};

fn classic() -> FundingConfig {
    FundingConfig::risk_free(0.10, 0.0, 0.5)
}

fn vanilla(kind: OptionKind) -> Portfolio {
    let leg = match kind {
        OptionKind::Call => OptionLeg::call(100.0, 1.0),
        OptionKind::Put => OptionLeg::put(100.0, 1.0),
    };
    Portfolio::single(leg, 2.0).unwrap()
}

fn on_grid(p: &Portfolio, side: Side, cfg: &FundingConfig, grid: &PdeGrid) -> PricingResult {
    price(p, side, cfg, grid, &SolverParams::for_portfolio(p)).unwrap()
}

fn table_grid(p: &Portfolio) -> PdeGrid {
    PdeGrid::build(p, 100.0, 0.5, 2000, 0.02).unwrap()
}

#[test]
fn table_one_fd_matches_black_scholes() {
    for kind in [OptionKind::Call, OptionKind::Put] {
        let p = vanilla(kind);
        let fd = on_grid(&p, Side::RiskFree, &classic(), &table_grid(&p));
        let bs = bs_price(kind, 100.0, 100.0, 2.0, 0.10, 0.0, 0.5).unwrap();
        assert!((fd.price - bs.price).abs() <= 5e-3, "{kind:?} price {} vs {}", fd.price, bs.price);
        assert!((fd.delta - bs.delta).abs() <= 5e-4, "{kind:?} delta {} vs {}", fd.delta, bs.delta);
        assert!((fd.gamma - bs.gamma).abs() <= 1e-4, "{kind:?} gamma {} vs {}", fd.gamma, bs.gamma);
    }
}

#[test]
fn halving_both_steps_cuts_the_error_by_three() {
    for kind in [OptionKind::Call, OptionKind::Put] {
        let p = vanilla(kind);
        let exact = bs_price(kind, 100.0, 100.0, 2.0, 0.10, 0.0, 0.5).unwrap().price;
        let coarse = PdeGrid::build(&p, 100.0, 0.5, 500, 0.08).unwrap();
        let fine = coarse.refined().unwrap();
        let e0 = (on_grid(&p, Side::RiskFree, &classic(), &coarse).price - exact).abs();
        let e1 = (on_grid(&p, Side::RiskFree, &classic(), &fine).price - exact).abs();
        assert!(e0 / e1 >= 3.0, "{kind:?}: {e0} -> {e1}");
    }
}

#[test]
fn grid_greeks_match_bump_and_reprice() {
    for kind in [OptionKind::Call, OptionKind::Put] {
        let p = vanilla(kind);
        let g = table_grid(&p);
        let base = on_grid(&p, Side::RiskFree, &classic(), &g);
        let h = 2.0 * g.ds();
        let at = |spot: f64| {
            let grid = PdeGrid::uniform(g.ds(), g.len(), g.dt(), 2.0, spot).unwrap();
            on_grid(&p, Side::RiskFree, &classic(), &grid).price
        };
        let (up, down) = (at(100.0 + h), at(100.0 - h));
        let delta = (up - down) / (2.0 * h);
        let gamma = (up - 2.0 * base.price + down) / (h * h);
        assert!(((delta - base.delta) / base.delta).abs() < 1e-3, "{kind:?} delta {delta} vs {}", base.delta);
        assert!(((gamma - base.gamma) / base.gamma).abs() < 1e-3, "{kind:?} gamma {gamma} vs {}", base.gamma);
    }
}

#[test]
fn straddle_is_call_plus_put() {
    let straddle = Portfolio::new(vec![OptionLeg::call(100.0, 1.0), OptionLeg::put(100.0, 1.0)], 2.0).unwrap();
    let g = PdeGrid::build(&straddle, 100.0, 0.5, 1000, 0.02).unwrap();
    let total = on_grid(&straddle, Side::RiskFree, &classic(), &g).price;
    let call = on_grid(&vanilla(OptionKind::Call), Side::RiskFree, &classic(), &g).price;
    let put = on_grid(&vanilla(OptionKind::Put), Side::RiskFree, &classic(), &g).price;
    assert!((total - call - put).abs() < 1e-9);
    let exact = 35.145_221_927_159_425 + 17.018_297_234_957_61;
    assert!((total - exact).abs() < 1e-2);
}

#[test]
fn american_put_matches_binomial_tree() {
    let p = vanilla(OptionKind::Put).with_style(fva_core::ExerciseStyle::American);
    let g = table_grid(&p);
    let fd = solve_american(&p, Side::RiskFree, &classic(), &g, &SolverParams::for_portfolio(&p)).unwrap();
    let tree = common::crr(false, true, 100.0, 100.0, 2.0, 0.10, 0.5, 2000);
    assert!(((fd.price - tree) / tree).abs() < 5e-4, "{} vs {tree}", fd.price);
    let euro = on_grid(&vanilla(OptionKind::Put), Side::RiskFree, &classic(), &g).price;
    assert!(fd.price > euro + 1.0);
}

#[test]
fn american_call_without_dividends_is_european() {
    let euro = vanilla(OptionKind::Call);
    let amer = euro.with_style(fva_core::ExerciseStyle::American);
    let g = table_grid(&euro);
    let params = SolverParams::for_portfolio(&euro);
    let a = solve_american(&amer, Side::RiskFree, &classic(), &g, &params).unwrap();
    let e = solve(&euro, Side::RiskFree, &classic(), &g, &params).unwrap();
    assert!((a.price - e.price).abs() < 1e-8, "{} vs {}", a.price, e.price);
}

#[test]
fn funded_american_bid_below_ask() {
    let cfg = classic()
        .with_borrow_spread(0.03)
        .with_repo_spread(0.007)
        .with_haircuts(0.25, 0.15);
    for kind in [OptionKind::Call, OptionKind::Put] {
        let p = vanilla(kind).with_style(fva_core::ExerciseStyle::American);
        let g = PdeGrid::build(&p, 100.0, 0.5, 1000, 0.02).unwrap();
        let params = SolverParams::for_portfolio(&p);
        let bid = solve_american(&p, Side::Bid, &cfg, &g, &params).unwrap().price;
        let ask = solve_american(&p, Side::Ask, &cfg, &g, &params).unwrap().price;
        let mid = solve_american(&p, Side::RiskFree, &cfg, &g, &params).unwrap().price;
        assert!(bid <= mid && mid <= ask, "{kind:?}: {bid} {mid} {ask}");
    }
}

#[test]
fn long_positions_follow_the_shifted_rate_closed_form() {
    for h in [0.0, 0.25, 0.35] {
        let cfg = classic()
            .with_borrow_spread(0.03)
            .with_repo_spread(0.005)
            .with_haircuts(h, h);
        for kind in [OptionKind::Call, OptionKind::Put] {
            let p = vanilla(kind);
            let fd = on_grid(&p, Side::Bid, &cfg, &table_grid(&p)).price;
            let exact = long_position_price(kind, 100.0, 100.0, 2.0, &cfg).unwrap().price;
            assert!((fd - exact).abs() < 1e-2, "h {h} {kind:?}: {fd} vs {exact}");
        }
    }
}

#[test]
fn haircut_is_irrelevant_when_repo_costs_the_unsecured_rate() {
    let p = vanilla(OptionKind::Put);
    let g = table_grid(&p);
    let mid = on_grid(&p, Side::RiskFree, &classic(), &g).price;
    let fva = |h: f64| {
        let cfg = classic()
            .with_borrow_spread(0.005)
            .with_repo_spread(0.005)
            .with_haircuts(h, 0.0);
        mid - on_grid(&p, Side::Bid, &cfg, &g).price
    };
    let (f0, f35) = (fva(0.0), fva(0.35));
    assert!(f0 > 0.0);
    assert!(((f0 - f35) / f0).abs() < 1e-4, "{f0} vs {f35}");
}

#[test]
fn quotes_widen_with_the_borrow_spread() {
    let p = Portfolio::new(vec![OptionLeg::call(100.0, 1.0), OptionLeg::put(90.0, -1.0)], 1.0).unwrap();
    let g = PdeGrid::build(&p, 100.0, 0.5, 600, 0.02).unwrap();
    let mut last: Option<(f64, f64)> = None;
    for spread in [0.0, 0.01, 0.02, 0.04] {
        let cfg = classic()
            .with_borrow_spread(spread)
            .with_repo_spread(0.005)
            .with_haircuts(0.2, 0.1);
        let bid = on_grid(&p, Side::Bid, &cfg, &g).price;
        let ask = on_grid(&p, Side::Ask, &cfg, &g).price;
        assert!(bid <= ask);
        if let Some((b, a)) = last {
            assert!(bid <= b + 1e-12 && ask >= a - 1e-12, "spread {spread}");
        }
        last = Some((bid, ask));
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn classic_solver_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            prop_assume!(a.abs() > 0.05 && b.abs() > 0.05);
            let p1 = Portfolio::single(OptionLeg::call(100.0, 1.0), 1.0).unwrap();
            let p2 = Portfolio::single(OptionLeg::put(80.0, 1.0), 1.0).unwrap();
            let both = Portfolio::new(vec![OptionLeg::call(100.0, a), OptionLeg::put(80.0, b)], 1.0).unwrap();
            let g = PdeGrid::build(&both, 100.0, 0.5, 200, 0.05).unwrap();
            let v = |p: &Portfolio| on_grid(p, Side::RiskFree, &classic(), &g).value;
            let combo = a * v(&p1) + b * v(&p2);
            prop_assert!((v(&both) - combo).abs() < 1e-10 * (1.0 + combo.abs()));
        }

        #[test]
        fn quotes_bracket_the_classic_value(
            spread in 0.0f64..0.05,
            repo in 0.0f64..0.02,
            h_repo in 0.0f64..0.5,
            h_sec in 0.0f64..0.5,
            call_qty in -2.0f64..2.0,
            put_qty in -2.0f64..2.0,
        ) {
            prop_assume!(call_qty.abs() > 0.05 && put_qty.abs() > 0.05);
            let cfg = classic().with_borrow_spread(spread).with_repo_spread(repo).with_haircuts(h_repo, h_sec);
            let p = Portfolio::new(vec![OptionLeg::call(110.0, call_qty), OptionLeg::put(90.0, put_qty)], 1.0).unwrap();
            let g = PdeGrid::build(&p, 100.0, 0.5, 200, 0.05).unwrap();
            let bid = on_grid(&p, Side::Bid, &cfg, &g).price;
            let ask = on_grid(&p, Side::Ask, &cfg, &g).price;
            let mid = on_grid(&p, Side::RiskFree, &cfg, &g).price;
            prop_assert!(bid <= mid + 1e-10 && mid <= ask + 1e-10, "{} {} {}", bid, mid, ask);
        }
    }
}
