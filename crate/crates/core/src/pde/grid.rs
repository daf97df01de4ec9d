use crate::error::{PricingError, Result};
use crate::market::Portfolio;

/// Uniform grid in stock price on `[0, s_max]` plus a uniform time step.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeGrid {
    s_nodes: Vec<f64>,
    ds: f64,
    dt: f64,
    n_steps: usize,
    expiry: f64,
    spot: f64,
    spot_index: usize,
}

/// Resolution used to detect a common spacing of spot and strikes.
const SNAP_UNIT: f64 = 1e-4;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Largest spacing (in `SNAP_UNIT`s) dividing every level, if all levels are
/// whole multiples of `SNAP_UNIT`.
fn common_unit(levels: &[f64]) -> Option<f64> {
    let mut acc = 0u64;
    for &x in levels {
        let scaled = x / SNAP_UNIT;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 || !(1.0..=1e15).contains(&rounded) {
            return None;
        }
        acc = gcd(acc, rounded as u64);
    }
    Some(acc as f64 * SNAP_UNIT)
}

impl PdeGrid {
    /// Builds a grid of `nodes` points reaching at least
    /// `max(4 K_max, S0 exp(4 sigma sqrt(T)))`.
    ///
    /// The spacing is stretched just enough that the spot, and where possible
    /// every strike, falls exactly on a node.
    pub fn build(portfolio: &Portfolio, spot: f64, sigma: f64, nodes: usize, dt: f64) -> Result<Self> {
        if !(spot.is_finite() && spot > 0.0) {
            return Err(PricingError::InvalidInput(format!("spot must be positive, got {spot}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(PricingError::NonPositiveVol(sigma));
        }
        if nodes < 3 {
            return Err(PricingError::GridTooCoarse(format!("need at least 3 nodes, got {nodes}")));
        }
        let expiry = portfolio.expiry();
        let s_max = (4.0 * portfolio.max_strike()).max(spot * (4.0 * sigma * expiry.sqrt()).exp());
        let ds_min = s_max / (nodes - 1) as f64;

        let mut levels = vec![spot];
        levels.extend(portfolio.legs().iter().map(|l| l.strike));
        let snap = |unit: f64| {
            let k = (unit / ds_min).floor();
            (k >= 1.0).then(|| unit / k)
        };
        let ds = common_unit(&levels)
            .and_then(snap)
            .or_else(|| snap(spot))
            .ok_or_else(|| {
                PricingError::GridTooCoarse(format!(
                    "{nodes} nodes give spacing {ds_min:.4} above the spot {spot}"
                ))
            })?;
        Self::uniform(ds, nodes, dt, expiry, spot)
    }

    /// Grid with explicit spacing. `spot` must sit on an interior node.
    pub fn uniform(ds: f64, nodes: usize, dt: f64, expiry: f64, spot: f64) -> Result<Self> {
        if !(ds.is_finite() && ds > 0.0) {
            return Err(PricingError::InvalidInput(format!("spacing must be positive, got {ds}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PricingError::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if !(expiry.is_finite() && expiry > 0.0) {
            return Err(PricingError::InvalidInput(format!("expiry must be positive, got {expiry}")));
        }
        if nodes < 3 {
            return Err(PricingError::GridTooCoarse(format!("need at least 3 nodes, got {nodes}")));
        }
        let pos = spot / ds;
        let spot_index = pos.round();
        if (pos - spot_index).abs() > 1e-8 * pos.max(1.0) {
            return Err(PricingError::GridTooCoarse(format!(
                "spot {spot} is not on a node of spacing {ds}"
            )));
        }
        let spot_index = spot_index as usize;
        if spot_index < 1 || spot_index + 1 >= nodes {
            return Err(PricingError::GridTooCoarse(format!(
                "spot {spot} is not an interior node (index {spot_index} of {nodes})"
            )));
        }
        let n_steps = ((expiry / dt) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self {
            s_nodes: (0..nodes).map(|i| i as f64 * ds).collect(),
            ds,
            dt: expiry / n_steps as f64,
            n_steps,
            expiry,
            spot,
            spot_index,
        })
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn len(&self) -> usize {
        self.s_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_nodes.is_empty()
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    /// Effective time step `T / n_steps`.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn expiry(&self) -> f64 {
        self.expiry
    }

    pub fn s_max(&self) -> f64 {
        *self.s_nodes.last().expect("grid has nodes")
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn spot_index(&self) -> usize {
        self.spot_index
    }

    /// Same domain with half the spacing and half the time step.
    pub fn refined(&self) -> Result<Self> {
        Self::uniform(self.ds / 2.0, 2 * self.len() - 1, self.dt / 2.0, self.expiry, self.spot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::OptionLeg;

    #[test]
    fn table_one_grid_snaps_spot_and_strike() {
        let p = Portfolio::single(OptionLeg::call(100.0, 1.0), 2.0).unwrap();
        let g = PdeGrid::build(&p, 100.0, 0.5, 2000, 0.02).unwrap();
        assert_eq!(g.len(), 2000);
        assert_eq!(g.n_steps(), 100);
        assert!((g.s_nodes()[g.spot_index()] - 100.0).abs() < 1e-9);
        assert!(g.s_max() >= 100.0 * (4.0 * 0.5 * 2f64.sqrt()).exp());
        assert!(g.s_nodes().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.s_nodes()[0], 0.0);
    }

    #[test]
    fn multi_strike_grid_puts_every_strike_on_a_node() {
        let p = Portfolio::new(vec![OptionLeg::call(95.0, 1.0), OptionLeg::call(105.0, -1.0)], 1.0).unwrap();
        let g = PdeGrid::build(&p, 100.0, 0.5, 1500, 0.01).unwrap();
        for k in [95.0, 100.0, 105.0] {
            let pos = k / g.ds();
            assert!((pos - pos.round()).abs() < 1e-8, "strike {k} off grid");
        }
    }

    #[test]
    fn too_few_nodes_is_rejected() {
        let p = Portfolio::single(OptionLeg::put(100.0, 1.0), 2.0).unwrap();
        assert!(matches!(
            PdeGrid::build(&p, 100.0, 0.5, 3, 0.02),
            Err(PricingError::GridTooCoarse(_))
        ));
        assert!(matches!(
            PdeGrid::build(&p, 100.0, 0.5, 2, 0.02),
            Err(PricingError::GridTooCoarse(_))
        ));
    }

    #[test]
    fn refined_grid_halves_steps() {
        let p = Portfolio::single(OptionLeg::put(100.0, 1.0), 2.0).unwrap();
        let g = PdeGrid::build(&p, 100.0, 0.5, 500, 0.08).unwrap();
        let f = g.refined().unwrap();
        assert_eq!(f.len(), 999);
        assert_eq!(f.n_steps(), 2 * g.n_steps());
        assert!((f.s_max() - g.s_max()).abs() < 1e-9);
        assert_eq!(f.spot_index(), 2 * g.spot_index());
    }
}
