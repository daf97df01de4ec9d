//! Reference pricers written independently of the library.
#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

/// Black-Scholes with dividend yield, via statrs' normal CDF.
pub fn bs(call: bool, s: f64, k: f64, t: f64, r: f64, q: f64, sigma: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let vt = sigma * t.sqrt();
    let d1 = ((s / k).ln() + (r - q + 0.5 * sigma * sigma) * t) / vt;
    let d2 = d1 - vt;
    if call {
        s * (-q * t).exp() * n.cdf(d1) - k * (-r * t).exp() * n.cdf(d2)
    } else {
        k * (-r * t).exp() * n.cdf(-d2) - s * (-q * t).exp() * n.cdf(-d1)
    }
}

/// Cox-Ross-Rubinstein tree with `steps` periods.
#[allow(clippy::too_many_arguments)]
pub fn crr(call: bool, american: bool, s: f64, k: f64, t: f64, r: f64, sigma: f64, steps: usize) -> f64 {
    let dt = t / steps as f64;
    let up = (sigma * dt.sqrt()).exp();
    let down = 1.0 / up;
    let p = ((r * dt).exp() - down) / (up - down);
    let disc = (-r * dt).exp();
    let payoff = |st: f64| if call { (st - k).max(0.0) } else { (k - st).max(0.0) };
    let price_at = |i: usize, j: usize| s * up.powi(j as i32) * down.powi((i - j) as i32);
    let mut v: Vec<f64> = (0..=steps).map(|j| payoff(price_at(steps, j))).collect();
    for i in (0..steps).rev() {
        for j in 0..=i {
            let cont = disc * (p * v[j + 1] + (1.0 - p) * v[j]);
            v[j] = if american { cont.max(payoff(price_at(i, j))) } else { cont };
        }
    }
    v[0]
}

#[test]
fn european_tree_converges_to_black_scholes() {
    let tree = crr(false, false, 100.0, 100.0, 2.0, 0.1, 0.5, 2000);
    let exact = bs(false, 100.0, 100.0, 2.0, 0.1, 0.0, 0.5);
    assert!((tree - exact).abs() < 5e-3, "{tree} vs {exact}");
}
