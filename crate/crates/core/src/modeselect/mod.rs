//! D2D mode selection over a mode interval.
//!
//! Every D2D pair picks one of three modes: inband underlay (reusing the
//! cellular band), inband overlay (a reserved slice of it) or outband (WiFi).
//! Cellular users keep mode 0. A [`UtilityModel`] scores an assignment; the
//! physical model lives in [`scenario`]. The search routines here only see the
//! trait, so they work unchanged on synthetic models.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

pub mod scenario;

pub use scenario::{
    build_interference, InterferenceMatrix, LinkParams, ModeScenario, Pathloss, ScenarioShape, Tolerances,
    UtilityParams,
};

/// Transmission mode of a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Through the base station (cellular users only).
    Cellular = 0,
    /// Inband, reusing the cellular band.
    Underlay = 1,
    /// Inband, on the reserved overlay slice.
    Overlay = 2,
    /// Outband, on WiFi.
    Outband = 3,
}

impl Mode {
    /// Modes a D2D pair may take, in scan order.
    pub const D2D: [Mode; 3] = [Mode::Underlay, Mode::Overlay, Mode::Outband];

    /// Numeric label 0..=3.
    pub fn number(self) -> u8 {
        self as u8
    }
}

/// One violated constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// Constraint family, 1..=5: one outgoing link per user, one incoming
    /// link per user, underlay interference at cellular receivers, total
    /// inband interference at underlay receivers, overlay interference at
    /// overlay receivers.
    pub constraint: u8,
    /// Node or pair where it is violated.
    pub at: usize,
}

/// Feasibility verdict.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Feasibility {
    /// Every violation found.
    pub violations: Vec<Violation>,
}

impl Feasibility {
    /// True when nothing is violated.
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Utilities of one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Utility of each D2D pair.
    pub pairs: Vec<f64>,
    /// Sum over every connection, cellular included.
    pub total: f64,
}

/// Scores mode assignments of `n_pairs()` D2D pairs.
pub trait UtilityModel {
    /// Number of D2D pairs.
    fn n_pairs(&self) -> usize;
    /// Utilities of an assignment.
    fn evaluate(&self, modes: &[Mode]) -> Evaluation;
    /// Constraint check of an assignment.
    fn feasibility(&self, modes: &[Mode]) -> Feasibility;
    /// Utility pair `pair` would get in `mode` if it were the only pair.
    fn isolated_utility(&self, pair: usize, mode: Mode) -> f64;
    /// Shortcut for [`Feasibility::is_feasible`].
    fn feasible(&self, modes: &[Mode]) -> bool {
        self.feasibility(modes).is_feasible()
    }
}

/// A model whose utilities are all multiplied by a positive constant.
pub struct Scaled<'a, M: ?Sized>(pub &'a M, pub f64);

impl<M: UtilityModel + ?Sized> UtilityModel for Scaled<'_, M> {
    fn n_pairs(&self) -> usize {
        self.0.n_pairs()
    }
    fn evaluate(&self, modes: &[Mode]) -> Evaluation {
        let e = self.0.evaluate(modes);
        Evaluation { pairs: e.pairs.iter().map(|u| u * self.1).collect(), total: e.total * self.1 }
    }
    fn feasibility(&self, modes: &[Mode]) -> Feasibility {
        self.0.feasibility(modes)
    }
    fn isolated_utility(&self, pair: usize, mode: Mode) -> f64 {
        self.0.isolated_utility(pair, mode) * self.1
    }
}

/// Base-3 index of a D2D assignment (pair 0 is the least significant digit).
pub fn assignment_index(modes: &[Mode]) -> u64 {
    modes.iter().rev().fold(0u64, |acc, m| acc * 3 + (m.number() as u64 - 1))
}

/// Largest pair count for exhaustive search.
pub const BRUTE_FORCE_CAP: usize = 10;

/// Result of a mode-selection routine.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    /// Chosen mode per pair.
    pub modes: Vec<Mode>,
    /// Aggregate utility.
    pub utility: f64,
    /// Passes over the pair list, the final confirming pass included.
    pub iterations: usize,
    /// Aggregate utility after each accepted decision, starting value first.
    pub trace: Vec<f64>,
}

/// Exhaustive optimum. Among equal optima the first in lexicographic order
/// (pair 0 as the leading digit, underlay < overlay < outband) wins.
pub fn brute_force_optimal<M: UtilityModel + ?Sized>(model: &M, cap: usize) -> Result<SelectionOutcome> {
    let n = model.n_pairs();
    if n > cap {
        return Err(Error::CapExceeded { what: "brute-force pairs", size: n, cap });
    }
    let mut modes = alloc::vec![Mode::Underlay; n];
    let mut best: Option<(Vec<Mode>, f64)> = None;
    let total = 3u64.pow(n as u32);
    for _ in 0..total {
        if model.feasible(&modes) {
            let u = model.evaluate(&modes).total;
            if best.as_ref().is_none_or(|b| u > b.1) {
                best = Some((modes.clone(), u));
            }
        }
        // lexicographic increment, last pair fastest
        for i in (0..n).rev() {
            let next = match modes[i] {
                Mode::Underlay => Some(Mode::Overlay),
                Mode::Overlay => Some(Mode::Outband),
                _ => None,
            };
            match next {
                Some(m) => {
                    modes[i] = m;
                    break;
                }
                None => modes[i] = Mode::Underlay,
            }
        }
    }
    let (modes, utility) = best.ok_or(Error::NoFeasibleAssignment)?;
    Ok(SelectionOutcome { modes, utility, iterations: 1, trace: alloc::vec![utility] })
}

/// Random visiting order for the heuristics.
pub fn random_order<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = alloc::vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || core::mem::replace(&mut seen[i], true)) {
        return Err(crate::error::domain("order must be a permutation of the pairs"));
    }
    Ok(())
}

/// Social heuristic: every pair in turn takes the mode that maximizes the
/// aggregate utility given the others, starting from all-outband, until a
/// pass changes nothing.
pub fn heuristic_social<M: UtilityModel + ?Sized>(model: &M, order: &[usize]) -> Result<SelectionOutcome> {
    let n = model.n_pairs();
    check_order(order, n)?;
    let mut modes = alloc::vec![Mode::Outband; n];
    let mut current = score(model, &modes);
    let mut trace = alloc::vec![current];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for &i in order {
            let keep = modes[i];
            let mut best = (keep, current);
            for m in Mode::D2D {
                if m == keep {
                    continue;
                }
                modes[i] = m;
                let u = score(model, &modes);
                if u > best.1 {
                    best = (m, u);
                }
            }
            modes[i] = best.0;
            if best.0 != keep {
                changed = true;
                current = best.1;
                trace.push(current);
            }
        }
        if !changed {
            break;
        }
    }
    Ok(SelectionOutcome { utility: model.evaluate(&modes).total, modes, iterations, trace })
}

/// Aggregate utility, or minus infinity when infeasible.
fn score<M: UtilityModel + ?Sized>(model: &M, modes: &[Mode]) -> f64 {
    if model.feasible(modes) {
        model.evaluate(modes).total
    } else {
        f64::NEG_INFINITY
    }
}

fn own_score<M: UtilityModel + ?Sized>(model: &M, modes: &[Mode], pair: usize) -> f64 {
    if model.feasible(modes) {
        model.evaluate(modes).pairs[pair]
    } else {
        f64::NEG_INFINITY
    }
}

/// Greedy heuristic: every pair in turn takes the mode that maximizes its own
/// utility given the others. Stops when a pass ends on an assignment seen
/// before (the start counts as seen), which also catches oscillation.
pub fn heuristic_greedy<M: UtilityModel + ?Sized>(model: &M, order: &[usize]) -> Result<SelectionOutcome> {
    let start = alloc::vec![Mode::Outband; model.n_pairs()];
    greedy_from(model, order, start)
}

fn greedy_from<M: UtilityModel + ?Sized>(model: &M, order: &[usize], mut modes: Vec<Mode>) -> Result<SelectionOutcome> {
    check_order(order, model.n_pairs())?;
    let mut seen = BTreeSet::new();
    seen.insert(assignment_index(&modes));
    let mut trace = alloc::vec![score(model, &modes)];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for &i in order {
            let keep = modes[i];
            let mut best = (keep, own_score(model, &modes, i));
            for m in Mode::D2D {
                if m == keep {
                    continue;
                }
                modes[i] = m;
                let u = own_score(model, &modes, i);
                if u > best.1 {
                    best = (m, u);
                }
            }
            modes[i] = best.0;
            if best.0 != keep {
                trace.push(score(model, &modes));
            }
        }
        if !seen.insert(assignment_index(&modes)) {
            break;
        }
    }
    Ok(SelectionOutcome { utility: model.evaluate(&modes).total, modes, iterations, trace })
}

/// Ranked heuristic. Pairs are ranked by their best isolated utility, each
/// takes (in rank order) its best isolated mode that keeps the assignment
/// feasible, then Greedy runs over the ranked order from there.
pub fn heuristic_ranked<M: UtilityModel + ?Sized>(model: &M) -> Result<SelectionOutcome> {
    let n = model.n_pairs();
    let mut ranked: Vec<(usize, Vec<(Mode, f64)>)> = (0..n)
        .map(|i| {
            let mut opts: Vec<(Mode, f64)> = Mode::D2D.iter().map(|&m| (m, model.isolated_utility(i, m))).collect();
            // best first; the scan order breaks ties
            opts.sort_by(|a, b| b.1.total_cmp(&a.1));
            (i, opts)
        })
        .collect();
    ranked.sort_by(|a, b| b.1[0].1.total_cmp(&a.1[0].1).then(a.0.cmp(&b.0)));
    let order: Vec<usize> = ranked.iter().map(|r| r.0).collect();
    let mut modes = alloc::vec![Mode::Outband; n];
    for (i, opts) in &ranked {
        for &(m, _) in opts {
            modes[*i] = m;
            if model.feasible(&modes) {
                break;
            }
            modes[*i] = Mode::Outband;
        }
    }
    greedy_from(model, &order, modes)
}
