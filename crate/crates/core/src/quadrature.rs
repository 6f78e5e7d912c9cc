//! Adaptive Gauss-Legendre quadrature on finite intervals.
//!
//! Each panel is integrated with a fixed-order rule and compared with the sum
//! over its two halves. Panels are bisected until the difference falls below
//! the relative tolerance (with an absolute floor, so integrals near zero do
//! not loop forever).

use alloc::vec::Vec;

use crate::{Error, Result};

/// A Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `n` nodes, found by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Apply the rule on `[a, b]`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

/// Value of `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Target relative error.
    pub relative: f64,
    /// Absolute floor under which a panel is accepted regardless.
    pub absolute: f64,
    /// Maximum bisection depth.
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { relative: 1e-8, absolute: 1e-15, max_depth: 40 }
    }
}

/// Integrate `f` over `[a, b]` adaptively with a 10-point rule.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    let rule = rule10();
    integrate_with(&rule, f, a, b, tol)
}

/// As [`integrate`], with a caller-supplied rule.
pub fn integrate_with<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(crate::error::domain("integration bounds must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    let whole = rule.apply(&mut f, a, b);
    // the global target is fixed from the first estimate; panels get a share
    // proportional to their width
    let target = (tol.relative * whole.abs()).max(tol.absolute);
    let mut total = 0.0;
    let mut worst = 0.0_f64;
    let mut stack: Vec<(f64, f64, f64, u32)> = alloc::vec![(a, b, whole, 0)];
    let width = b - a;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.apply(&mut f, lo, mid);
        let right = rule.apply(&mut f, mid, hi);
        let refined = left + right;
        let err = (refined - est).abs();
        let share = target * (hi - lo) / width;
        if err <= share || err <= tol.absolute {
            total += refined;
        } else if depth >= tol.max_depth {
            worst = worst.max(err);
            total += refined;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if worst > 0.0 {
        return Err(Error::Quadrature { residual: worst });
    }
    if !total.is_finite() {
        return Err(Error::Quadrature { residual: f64::INFINITY });
    }
    Ok(total)
}

fn rule10() -> GaussLegendre {
    GaussLegendre::new(10)
}
