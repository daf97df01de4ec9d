//! Tridiagonal matrices: Thomas solve, products, and projected SOR.

/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![1.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Tridiagonal) -> Tridiagonal {
        let combine = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + factor * y).collect();
        Tridiagonal {
            lower: combine(&self.lower, &other.lower),
            diag: combine(&self.diag, &other.diag),
            upper: combine(&self.upper, &other.upper),
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solves `A x = rhs` by the Thomas algorithm.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = self.upper[0] / self.diag[0];
        d[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let m = self.diag[i] - self.lower[i] * c[i - 1];
            c[i] = if i + 1 < n { self.upper[i] / m } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }

    /// Projected SOR for `A x = rhs` subject to `x[i] >= obstacle[i]` (or
    /// `x[i] <= obstacle[i]` when `upper_bound` is set), starting from `x`.
    ///
    /// Stops once a full sweep moves no entry by more than `tol`. Returns the
    /// sweep count, or `None` if `max_sweeps` is exhausted or the iterate
    /// blows up.
    #[allow(clippy::too_many_arguments)]
    pub fn psor(
        &self,
        rhs: &[f64],
        x: &mut [f64],
        obstacle: &[f64],
        upper_bound: bool,
        omega: f64,
        tol: f64,
        max_sweeps: usize,
    ) -> Option<usize> {
        let n = self.len();
        let project = |v: f64, bound: f64| if upper_bound { v.min(bound) } else { v.max(bound) };
        for sweep in 1..=max_sweeps {
            let mut max_move = 0.0f64;
            for i in 0..n {
                let mut resid = rhs[i];
                if i > 0 {
                    resid -= self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    resid -= self.upper[i] * x[i + 1];
                }
                let gs = resid / self.diag[i];
                let next = project(x[i] + omega * (gs - x[i]), obstacle[i]);
                max_move = max_move.max((next - x[i]).abs());
                x[i] = next;
            }
            if !max_move.is_finite() {
                return None;
            }
            if max_move < tol {
                return Some(sweep);
            }
        }
        None
    }

    /// Solves the complementarity problem behind [`Tridiagonal::psor`]
    /// exactly, by iterating on the set of rows pinned to the obstacle.
    ///
    /// Each pass pins the rows where the obstacle gap is smaller than the
    /// equation residual and solves the remaining system directly, so it
    /// stays stable on rows without diagonal dominance. Returns the solution
    /// and the number of passes, or `None` if the pinned set keeps changing.
    pub fn solve_complementarity(
        &self,
        rhs: &[f64],
        obstacle: &[f64],
        upper_bound: bool,
        max_passes: usize,
    ) -> Option<(Vec<f64>, usize)> {
        let n = self.len();
        // Work with x >= obstacle; the upper-bound case is the mirror image.
        let flip = if upper_bound { -1.0 } else { 1.0 };
        let mut pinned = vec![false; n];
        let mut flips = vec![0u8; n];
        let mut x = self.solve(rhs);
        for pass in 1..=max_passes {
            let ax = self.apply(&x);
            let mut next: Vec<bool> = (0..n)
                .map(|i| {
                    let gap = flip * (x[i] - obstacle[i]);
                    let resid = flip * (ax[i] - rhs[i]);
                    // Hysteresis keeps roundoff-level ties from flipping back and forth.
                    let slack = 1e-12 * (1.0 + obstacle[i].abs() + rhs[i].abs());
                    if pinned[i] {
                        gap <= resid + slack
                    } else {
                        gap < resid - slack
                    }
                })
                .collect();
            // Rows without diagonal dominance can cycle at roundoff level;
            // after a few flips they stay on the obstacle.
            for i in 0..n {
                if next[i] != pinned[i] {
                    flips[i] = flips[i].saturating_add(1);
                }
                if flips[i] >= 4 {
                    next[i] = true;
                }
            }
            if pass > 1 && next == pinned {
                return x.iter().all(|v| v.is_finite()).then_some((x, pass - 1));
            }
            pinned = next;
            let mut sys = self.clone();
            let mut b = rhs.to_vec();
            for i in (0..n).filter(|&i| pinned[i]) {
                sys.lower[i] = 0.0;
                sys.diag[i] = 1.0;
                sys.upper[i] = 0.0;
                b[i] = obstacle[i];
            }
            x = sys.solve(&b);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tridiagonal {
        Tridiagonal {
            lower: vec![0.0, -1.0, -1.0, -1.0],
            diag: vec![4.0, 4.0, 4.0, 4.0],
            upper: vec![-1.0, -1.0, -1.0, 0.0],
        }
    }

    #[test]
    fn thomas_inverts_apply() {
        let a = sample();
        let x = vec![1.0, -2.0, 3.5, 0.25];
        let back = a.solve(&a.apply(&x));
        for (u, v) in x.iter().zip(&back) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn psor_without_active_constraint_matches_thomas() {
        let a = sample();
        let rhs = vec![1.0, 2.0, 3.0, 4.0];
        let exact = a.solve(&rhs);
        let mut x = vec![0.0; 4];
        let sweeps = a.psor(&rhs, &mut x, &[-1e9; 4], false, 1.2, 1e-14, 500).unwrap();
        assert!(sweeps > 1);
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn psor_respects_obstacle() {
        let a = sample();
        let rhs = vec![0.0; 4];
        let floor = vec![0.5, 0.0, 0.0, 0.7];
        let mut x = vec![1.0; 4];
        a.psor(&rhs, &mut x, &floor, false, 1.0, 1e-13, 1000).unwrap();
        for (v, f) in x.iter().zip(&floor) {
            assert!(*v >= *f);
        }
        // Complementarity: where the constraint is slack the row residual vanishes.
        let resid: Vec<f64> = a.apply(&x).iter().zip(&rhs).map(|(ax, b)| ax - b).collect();
        for i in 0..4 {
            assert!(resid[i] >= -1e-10);
            if x[i] > floor[i] + 1e-10 {
                assert!(resid[i].abs() < 1e-10);
            }
        }
        let mut y = vec![-1.0; 4];
        let ceiling = vec![-0.5, 0.0, 0.0, -0.7];
        a.psor(&rhs, &mut y, &ceiling, true, 1.0, 1e-13, 1000).unwrap();
        for (v, c) in y.iter().zip(&ceiling) {
            assert!(*v <= *c);
        }
    }

    #[test]
    fn complementarity_solve_matches_psor() {
        let a = sample();
        let rhs = vec![0.2, -1.0, 0.5, 0.1];
        let floor = vec![0.3, 0.0, 0.0, -1.0];
        let (x, passes) = a.solve_complementarity(&rhs, &floor, false, 50).unwrap();
        assert!(passes >= 1);
        let mut y = floor.clone();
        a.psor(&rhs, &mut y, &floor, false, 1.2, 1e-14, 1000).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
        let ceiling: Vec<f64> = floor.iter().map(|f| -f).collect();
        let neg: Vec<f64> = rhs.iter().map(|b| -b).collect();
        let (z, _) = a.solve_complementarity(&neg, &ceiling, true, 50).unwrap();
        for (u, v) in x.iter().zip(&z) {
            assert!((u + v).abs() < 1e-12);
        }
    }
}
