//! Fair-share LP for N-connection tie-breaking.
//!
//! Each tie set `h` (two or more connections sharing the top MCS) has an
//! expected rate `R^h` that must be divided among its members in proportions
//! `alpha_n^h` summing to 1, so that every connection ends with the fair share
//! `R* = (sum over all h of R^h) / N`. The equality system is relaxed to
//! inequalities and solved as a maximization; the original system is feasible
//! exactly when every tie set's proportions can be filled to 1.

use alloc::vec::Vec;

use super::{check, tie_throughput_unchecked, ConnectionProfile};
use crate::{Error, Result};

/// Optimum of a standard-form LP.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Optimal point.
    pub x: Vec<f64>,
    /// Optimal objective value.
    pub objective: f64,
}

const EPS: f64 = 1e-9;

/// Maximize `c.x` subject to `A x <= b`, `x >= 0`, with `b >= 0`.
///
/// Dense tableau simplex starting from the slack basis, Bland's rule for both
/// the entering and the leaving variable.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(crate::error::domain("constraint matrix shape mismatch"));
    }
    if b.iter().any(|v| !(*v >= 0.0)) {
        return Err(crate::error::domain("right-hand side must be nonnegative"));
    }
    let width = n + m + 1;
    // row-major tableau; last row is the objective in "z - c.x = 0" form
    let mut t = alloc::vec![0.0; (m + 1) * width];
    for i in 0..m {
        t[i * width..i * width + n].copy_from_slice(&a[i]);
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = b[i];
    }
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_iter = 50 * (n + m) + 1000;
    for _ in 0..max_iter {
        let obj = &t[m * width..m * width + width - 1];
        let Some(enter) = obj.iter().position(|&v| v < -EPS) else {
            let mut x = alloc::vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i * width + width - 1];
                }
            }
            return Ok(LpSolution { x, objective: t[m * width + width - 1] });
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + enter];
            if aij > EPS {
                let ratio = t[i * width + width - 1] / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(crate::error::domain("LP is unbounded"));
        };
        pivot(&mut t, width, m, row, enter);
        basis[row] = enter;
    }
    Err(Error::DegenerateBasis { pivot: 0.0 })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f == 0.0 {
            continue;
        }
        for j in 0..width {
            let d = f * t[row * width + j];
            t[i * width + j] -= d;
        }
        t[i * width + col] = 0.0;
    }
}

/// Default largest connection count for the LP.
pub const LP_CAP: usize = 10;

/// Result of the fair-share LP.
#[derive(Debug, Clone, PartialEq)]
pub struct TieLpOutcome {
    /// Equal throughputs are reachable without losing aggregate throughput.
    pub feasible: bool,
    /// Relaxed optimum.
    pub objective: f64,
    /// Value the optimum must reach, `2^N - N - 1`.
    pub target: f64,
    /// Fair share per connection.
    pub r_star: f64,
    /// Strict-win rate `R^{e_n}` per connection.
    pub strict: Vec<f64>,
    /// For each tie set (bit mask), the members' proportions.
    pub shares: Vec<(u64, Vec<(usize, f64)>)>,
    /// Throughput per connection under the solved proportions.
    pub throughputs: Vec<f64>,
}

/// Solve the relaxed fair-share LP for `profiles`.
pub fn solve_tie_lp(profiles: &[ConnectionProfile], rates: &[f64], cap: usize) -> Result<TieLpOutcome> {
    check(profiles, rates)?;
    let n = profiles.len();
    if n > cap || n >= 63 {
        return Err(Error::CapExceeded { what: "tie LP connections", size: n, cap });
    }
    let full = 1u64 << n;
    let mut rh = alloc::vec![0.0; full as usize];
    for h in 1..full {
        rh[h as usize] = tie_throughput_unchecked(h, profiles, rates);
    }
    let total: f64 = rh.iter().sum();
    let r_star = total / n as f64;
    let strict: Vec<f64> = (0..n).map(|i| rh[1usize << i]).collect();
    let target = (full - n as u64 - 1) as f64;
    let ties: Vec<u64> = (1..full).filter(|h| h.count_ones() >= 2).collect();
    // variable layout: for each tie set in order, one variable per member
    let mut var_of: Vec<(u64, usize)> = Vec::new();
    for &h in &ties {
        for i in 0..n {
            if h >> i & 1 == 1 {
                var_of.push((h, i));
            }
        }
    }
    let nv = var_of.len();
    let demand: Vec<f64> = strict.iter().map(|s| r_star - s).collect();
    if demand.iter().any(|d| *d < -1e-12) {
        return Ok(infeasible(target, r_star, strict));
    }
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(n + ties.len());
    for i in 0..n {
        let mut row = alloc::vec![0.0; nv];
        for (v, &(h, j)) in var_of.iter().enumerate() {
            if j == i {
                row[v] = rh[h as usize];
            }
        }
        a.push(row);
    }
    let mut bvec: Vec<f64> = demand.iter().map(|d| d.max(0.0)).collect();
    for &h in &ties {
        let mut row = alloc::vec![0.0; nv];
        for (v, &(hv, _)) in var_of.iter().enumerate() {
            if hv == h {
                row[v] = 1.0;
            }
        }
        a.push(row);
        bvec.push(1.0);
    }
    let sol = maximize(&alloc::vec![1.0; nv], &a, &bvec)?;
    let feasible = (sol.objective - target).abs() <= 1e-6;
    let mut shares = Vec::with_capacity(ties.len());
    let mut throughputs = strict.clone();
    let mut v = 0;
    for &h in &ties {
        let mut members = Vec::new();
        for i in 0..n {
            if h >> i & 1 == 1 {
                members.push((i, sol.x[v]));
                throughputs[i] += sol.x[v] * rh[h as usize];
                v += 1;
            }
        }
        shares.push((h, members));
    }
    Ok(TieLpOutcome { feasible, objective: sol.objective, target, r_star, strict, shares, throughputs })
}

fn infeasible(target: f64, r_star: f64, strict: Vec<f64>) -> TieLpOutcome {
    TieLpOutcome {
        feasible: false,
        objective: f64::NAN,
        target,
        r_star,
        throughputs: strict.clone(),
        strict,
        shares: Vec::new(),
    }
}
