use fva_core::replication::{simulate_hedge, HedgeSimulation, HedgeSummary};
use fva_core::{FundingConfig, OptionLeg, Side};

fn classic() -> FundingConfig {
    FundingConfig::risk_free(0.10, 0.0, 0.5)
}

fn funded() -> FundingConfig {
    classic()
        .with_borrow_spread(0.03)
        .with_repo_spread(0.007)
        .with_haircuts(0.25, 0.15)
}

fn run(leg: OptionLeg, side: Side, cfg: FundingConfig, paths: usize, steps: usize, mu: f64) -> HedgeSummary {
    let mut sim = HedgeSimulation::new(leg, 2.0, 100.0, side, cfg);
    sim.n_paths = paths;
    sim.n_steps = steps;
    sim.mu = mu;
    sim.seed = 20_240_601;
    simulate_hedge(&sim).unwrap()
}

#[test]
fn classic_hedge_is_unbiased() {
    let s = run(OptionLeg::call(100.0, 1.0), Side::Ask, classic(), 10_000, 250, 0.0);
    assert_eq!(s.oracle, "black-scholes");
    assert!(s.mean.abs() < 3.0 * s.std_error, "{s:?}");
    assert!(s.max_identity_error < 1e-10);
}

#[test]
fn hedging_error_scales_with_root_dt() {
    let coarse = run(OptionLeg::put(100.0, 1.0), Side::Ask, classic(), 10_000, 250, 0.0);
    let fine = run(OptionLeg::put(100.0, 1.0), Side::Ask, classic(), 10_000, 500, 0.0);
    let ratio = coarse.std / fine.std;
    assert!((1.2..=1.7).contains(&ratio), "{ratio}");
}

#[test]
fn stock_drift_does_not_matter() {
    let runs: Vec<HedgeSummary> = [0.0, 0.10, 0.25]
        .iter()
        .map(|&mu| run(OptionLeg::call(100.0, 1.0), Side::Ask, classic(), 10_000, 250, mu))
        .collect();
    for a in &runs {
        for b in &runs {
            let (lo_a, hi_a) = a.mean_ci95();
            let (lo_b, hi_b) = b.mean_ci95();
            assert!(lo_a <= hi_b && lo_b <= hi_a, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn deterministic_stock_replicates_exactly() {
    let cfg = classic().with_sigma(1e-8);
    let s = run(OptionLeg::call(60.0, 1.0), Side::Ask, cfg, 50, 100, 0.07);
    assert!(s.max_abs < 1e-9, "{s:?}");
}

#[test]
fn funded_hedge_error_shrinks_with_rebalancing() {
    for (leg, side) in [(OptionLeg::put(100.0, 1.0), Side::Ask), (OptionLeg::call(100.0, 1.0), Side::Bid)] {
        let errs: Vec<f64> = [125, 250, 500]
            .iter()
            .map(|&n| run(leg, side, funded(), 4_000, n, 0.05).mean_abs)
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{side:?}: {errs:?}");
    }
}

#[test]
fn funded_short_hedge_is_unbiased_under_the_pde_price() {
    let s = run(OptionLeg::put(100.0, 1.0), Side::Ask, funded(), 10_000, 250, 0.0);
    assert_eq!(s.oracle, "pde");
    assert!(s.mean.abs() < 3.0 * s.std_error, "{s:?}");
}
