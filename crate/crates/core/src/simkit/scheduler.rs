//! Per-frame connection selection.
//!
//! A connection is one cluster of the partition; its instantaneous rate is
//! the rate of its best member. With a singleton partition every scheduler
//! degenerates to the usual per-user scheduler.

use alloc::vec::Vec;
use core::cmp::Ordering;
use rand::Rng;

use crate::tiebreak::pick_weighted;

/// Which scheduler serves the frame.
#[derive(Debug, Clone, PartialEq)]
pub enum SchedulerKind {
    /// Round robin over connections.
    EqualTime,
    /// Proportional fair with an exponential average.
    ProportionalFair {
        /// Averaging time constant in frames.
        time_constant: f64,
    },
    /// Highest MCS, ties uniform at random.
    MaxRate,
    /// Highest MCS, ties broken with probabilities proportional to weights.
    MaxRateWrr {
        /// One nonnegative weight per connection.
        weights: Vec<f64>,
    },
    /// Deterministic weighted rotation over clusters, weight = cluster size.
    ClusterWrr,
    /// The cluster holding the best single SNR in the cell.
    ClusterMaxRate,
}

impl SchedulerKind {
    /// Short stable name.
    pub fn name(&self) -> &'static str {
        match self {
            SchedulerKind::EqualTime => "et",
            SchedulerKind::ProportionalFair { .. } => "pf",
            SchedulerKind::MaxRate => "mr",
            SchedulerKind::MaxRateWrr { .. } => "mr-wrr",
            SchedulerKind::ClusterWrr => "clwrr",
            SchedulerKind::ClusterMaxRate => "clmr",
        }
    }
}

/// What the scheduler sees in one frame, per connection.
#[derive(Debug, Clone, Copy)]
pub struct FrameView<'a> {
    /// MCS level of the best member (0 = outage).
    pub levels: &'a [usize],
    /// SNR of the best member (linear).
    pub best_snr: &'a [f64],
    /// Bits the connection could carry with the whole frame.
    pub frame_bits: &'a [f64],
    /// Connections with data to send.
    pub eligible: &'a [bool],
}

#[derive(Debug, Clone)]
enum State {
    Rotation { next: usize },
    Pf { beta: f64, avg: Vec<f64>, metric: Vec<f64> },
    Mr,
    Wrr { weights: Vec<f64> },
    Credit { weight: Vec<f64>, credit: Vec<f64> },
    BestSnr,
}

/// Scheduler state carried across frames.
#[derive(Debug, Clone)]
pub struct Scheduler {
    state: State,
    tied: Vec<usize>,
}

impl Scheduler {
    /// Fresh state. `sizes` are the connection sizes (CL(WRR) weights) and
    /// `mean_bits` the expected per-frame bits of each connection (PF seed).
    pub fn new(kind: &SchedulerKind, sizes: &[usize], mean_bits: &[f64]) -> Self {
        let n = sizes.len();
        let state = match kind {
            SchedulerKind::EqualTime => State::Rotation { next: 0 },
            SchedulerKind::ProportionalFair { time_constant } => State::Pf {
                beta: 1.0 / time_constant,
                avg: mean_bits.iter().map(|m| m.max(f64::MIN_POSITIVE)).collect(),
                metric: alloc::vec![0.0; n],
            },
            SchedulerKind::MaxRate => State::Mr,
            SchedulerKind::MaxRateWrr { weights } => State::Wrr { weights: weights.clone() },
            SchedulerKind::ClusterWrr => {
                let total: usize = sizes.iter().sum();
                State::Credit {
                    weight: sizes.iter().map(|&s| s as f64 / total as f64).collect(),
                    credit: alloc::vec![0.0; n],
                }
            }
            SchedulerKind::ClusterMaxRate => State::BestSnr,
        };
        Self { state, tied: Vec::with_capacity(n) }
    }

    /// Connection served this frame, or `None` when nothing is eligible.
    pub fn select<R: Rng + ?Sized>(&mut self, v: &FrameView<'_>, rng: &mut R) -> Option<usize> {
        let n = v.eligible.len();
        if !v.eligible.iter().any(|e| *e) {
            return None;
        }
        let pick = match &mut self.state {
            State::Rotation { next } => {
                let c = (0..n).map(|i| (*next + i) % n).find(|&c| v.eligible[c]).expect("some eligible");
                *next = (c + 1) % n;
                c
            }
            State::Pf { avg, metric, .. } => {
                for c in 0..n {
                    metric[c] = if v.frame_bits[c] > 0.0 { v.frame_bits[c] / avg[c] } else { 0.0 };
                }
                argmax(n, v.eligible, |c| metric[c])
            }
            State::Mr | State::Wrr { .. } => {
                let top = (0..n).filter(|&c| v.eligible[c]).map(|c| v.levels[c]).max().expect("some eligible");
                self.tied.clear();
                self.tied.extend((0..n).filter(|&c| v.eligible[c] && v.levels[c] == top));
                match &self.state {
                    State::Wrr { weights } => pick_weighted(weights, &self.tied, rng),
                    _ if self.tied.len() == 1 => self.tied[0],
                    _ => self.tied[rng.random_range(0..self.tied.len())],
                }
            }
            State::Credit { weight, credit } => {
                let mut active = 0.0;
                for c in 0..n {
                    if v.eligible[c] {
                        credit[c] += weight[c];
                        active += weight[c];
                    }
                }
                let c = argmax(n, v.eligible, |c| credit[c]);
                credit[c] -= active;
                c
            }
            State::BestSnr => argmax(n, v.eligible, |c| v.best_snr[c]),
        };
        Some(pick)
    }

    /// Eligible connections other than `first`, in the order leftover frame
    /// capacity is offered to them.
    pub fn leftover_order(&self, v: &FrameView<'_>, first: usize) -> Vec<usize> {
        let n = v.eligible.len();
        let mut rest: Vec<usize> = (0..n).filter(|&c| c != first && v.eligible[c]).collect();
        let by_key = |key: &dyn Fn(usize) -> f64, rest: &mut Vec<usize>| {
            rest.sort_by(|&a, &b| key(b).partial_cmp(&key(a)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        };
        match &self.state {
            State::Rotation { .. } => rest.sort_by_key(|&c| (c + n - first) % n),
            State::Pf { metric, .. } => by_key(&|c| metric[c], &mut rest),
            State::Credit { credit, .. } => by_key(&|c| credit[c], &mut rest),
            State::Mr | State::Wrr { .. } | State::BestSnr => by_key(&|c| v.best_snr[c], &mut rest),
        }
        rest
    }

    /// Feed back the bits every connection carried this frame.
    pub fn observe(&mut self, served_bits: &[f64]) {
        if let State::Pf { beta, avg, .. } = &mut self.state {
            for (a, s) in avg.iter_mut().zip(served_bits) {
                *a = (1.0 - *beta) * *a + *beta * s;
            }
        }
    }
}

/// Eligible index with the largest key; lowest index on ties.
fn argmax<F: Fn(usize) -> f64>(n: usize, eligible: &[bool], key: F) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for c in (0..n).filter(|&c| eligible[c]) {
        let k = key(c);
        if best.map_or(true, |(_, b)| k > b) {
            best = Some((c, k));
        }
    }
    best.expect("some eligible").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    fn view<'a>(levels: &'a [usize], snr: &'a [f64], bits: &'a [f64], el: &'a [bool]) -> FrameView<'a> {
        FrameView { levels, best_snr: snr, frame_bits: bits, eligible: el }
    }

    #[test]
    fn rotation_skips_idle() {
        let mut s = Scheduler::new(&SchedulerKind::EqualTime, &[1, 1, 1], &[1.0; 3]);
        let mut rng = from_seed(0);
        let el = [true, false, true];
        let v = view(&[1, 1, 1], &[1.0; 3], &[1.0; 3], &el);
        let picks: Vec<_> = (0..4).map(|_| s.select(&v, &mut rng).unwrap()).collect();
        assert_eq!(picks, alloc::vec![0, 2, 0, 2]);
        assert_eq!(s.leftover_order(&v, 2), alloc::vec![0]);
    }

    #[test]
    fn credit_rotation_is_exact() {
        let mut s = Scheduler::new(&SchedulerKind::ClusterWrr, &[1, 3], &[1.0; 2]);
        let mut rng = from_seed(0);
        let el = [true, true];
        let v = view(&[1, 1], &[1.0; 2], &[1.0; 2], &el);
        let mut count = [0; 2];
        for _ in 0..4000 {
            count[s.select(&v, &mut rng).unwrap()] += 1;
        }
        assert_eq!(count, [1000, 3000]);
    }

    #[test]
    fn nothing_eligible() {
        let mut s = Scheduler::new(&SchedulerKind::MaxRate, &[1, 1], &[1.0; 2]);
        let v = view(&[1, 1], &[1.0; 2], &[1.0; 2], &[false, false]);
        assert_eq!(s.select(&v, &mut from_seed(0)), None);
    }

    #[test]
    fn pf_prefers_relative_peak() {
        let mut s = Scheduler::new(&SchedulerKind::ProportionalFair { time_constant: 1000.0 }, &[1, 1], &[10.0, 1.0]);
        let v = view(&[5, 1], &[9.0, 1.0], &[12.0, 2.0], &[true, true]);
        assert_eq!(s.select(&v, &mut from_seed(0)), Some(1));
    }
}
