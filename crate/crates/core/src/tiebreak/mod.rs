//! Tie-breaking for MaxRate scheduling.
//!
//! MaxRate serves, in each frame, a connection with the highest current MCS.
//! When several connections share that MCS the frame is a tie, and how ties
//! are broken decides fairness without touching the aggregate throughput.
//!
//! A connection is described by its MCS distribution ([`ConnectionProfile`]).
//! The expected rate earned in ties of a given set of connections is
//! [`tie_throughput`]. From these the module builds the exact two-connection
//! rule ([`maxfair_alpha`]), the N-connection fair-share LP ([`lp`]), WRR
//! tie-breaking and its heuristic weights ([`heuristics`]).

use alloc::vec::Vec;
use rand::Rng;

use crate::error::domain;
use crate::{Error, Result};

pub mod heuristics;
pub mod lp;

pub use heuristics::{
    alternating_order, belf_weights, exhaustive_best_order, fish_weights, lexicographic_order, pike_weights,
    wolf_weights, ClassCounts, TreeShape,
};
pub use lp::{maximize, solve_tie_lp, LpSolution, TieLpOutcome, LP_CAP};

/// MCS distribution of a connection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionProfile {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl ConnectionProfile {
    /// Build from level probabilities (0-based, one per MCS level).
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(domain("profile needs at least one level"));
        }
        if !p.iter().all(|x| *x >= 0.0 && x.is_finite()) {
            return Err(domain("probabilities must be nonnegative"));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(domain("probabilities must sum to 1"));
        }
        let mut q = Vec::with_capacity(p.len() + 1);
        let mut acc = 0.0;
        q.push(0.0);
        for &x in &p[..p.len() - 1] {
            acc += x;
            q.push(acc.min(1.0));
        }
        q.push(1.0);
        Ok(Self { p, q })
    }

    /// `p_k`, probability of level `k`.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// `Q_k`, probability of a level strictly below `k`; length `K + 1`.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Number of levels.
    pub fn levels(&self) -> usize {
        self.p.len()
    }

    /// Expected rate `sum_k p_k r_k`.
    pub fn mean_rate(&self, rates: &[f64]) -> f64 {
        self.p.iter().zip(rates).map(|(p, r)| p * r).sum()
    }

    /// Distribution of the best level among several connections.
    pub fn best_of(profiles: &[&ConnectionProfile]) -> Result<Self> {
        let k = profiles.first().ok_or_else(|| domain("no profiles"))?.levels();
        let q: Vec<f64> = (0..=k).map(|l| profiles.iter().map(|c| c.q[l]).product()).collect();
        Self::new(q.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect())
    }
}

fn check(profiles: &[ConnectionProfile], rates: &[f64]) -> Result<()> {
    if profiles.is_empty() {
        return Err(domain("no connections"));
    }
    if profiles.iter().any(|c| c.levels() != rates.len()) {
        return Err(domain("profile and rate vectors differ in length"));
    }
    Ok(())
}

/// Expected rates of a two-connection system split by who holds the top MCS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRates {
    /// Connection 1 strictly best.
    pub r1: f64,
    /// Connection 2 strictly best.
    pub r2: f64,
    /// Both tied.
    pub rx: f64,
}

/// Split a pair's MaxRate throughput into strict wins and ties.
pub fn pair_rates(a: &ConnectionProfile, b: &ConnectionProfile, rates: &[f64]) -> Result<PairRates> {
    if a.levels() != rates.len() || b.levels() != rates.len() {
        return Err(domain("profile and rate vectors differ in length"));
    }
    let mut out = PairRates { r1: 0.0, r2: 0.0, rx: 0.0 };
    for (k, &r) in rates.iter().enumerate() {
        out.r1 += r * a.p[k] * b.q[k];
        out.r2 += r * b.p[k] * a.q[k];
        out.rx += r * a.p[k] * b.p[k];
    }
    Ok(out)
}

/// The fair tie probability of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxFair {
    /// Probability of serving connection 1 in a tie.
    pub alpha: f64,
    /// True when equal throughputs are reachable, i.e. `|R1 - R2| <= RX`.
    pub achievable: bool,
}

/// Tie probability that equalizes a pair's throughputs, cut to `[0, 1]`.
pub fn maxfair_alpha(r: PairRates) -> MaxFair {
    if !(r.rx > 0.0) {
        return if r.r1 == r.r2 {
            MaxFair { alpha: 0.5, achievable: true }
        } else {
            MaxFair { alpha: if r.r1 > r.r2 { 0.0 } else { 1.0 }, achievable: false }
        };
    }
    let raw = 0.5 + (r.r2 - r.r1) / (2.0 * r.rx);
    MaxFair { alpha: raw.clamp(0.0, 1.0), achievable: (r.r1 - r.r2).abs() <= r.rx }
}

/// Per-connection throughputs of a pair when connection 1 wins ties with
/// probability `alpha`.
pub fn pair_throughputs(r: PairRates, alpha: f64) -> (f64, f64) {
    (r.r1 + alpha * r.rx, r.r2 + (1.0 - alpha) * r.rx)
}

/// Expected rate of frames whose top-MCS set is exactly `tie` (bit `n` set
/// for connection `n`).
pub fn tie_throughput(tie: u64, profiles: &[ConnectionProfile], rates: &[f64]) -> Result<f64> {
    check(profiles, rates)?;
    if tie == 0 || (profiles.len() < 64 && tie >> profiles.len() != 0) {
        return Err(domain("tie vector must be a non-empty subset of the connections"));
    }
    Ok(tie_throughput_unchecked(tie, profiles, rates))
}

pub(crate) fn tie_throughput_unchecked(tie: u64, profiles: &[ConnectionProfile], rates: &[f64]) -> f64 {
    let mut s = 0.0;
    for (k, &r) in rates.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let mut x = r;
        for (n, c) in profiles.iter().enumerate() {
            x *= if tie >> n & 1 == 1 { c.p[k] } else { c.q[k] };
        }
        s += x;
    }
    s
}

/// Expected MaxRate throughput of the system (rate units).
pub fn system_maxrate_throughput(profiles: &[ConnectionProfile], rates: &[f64]) -> Result<f64> {
    check(profiles, rates)?;
    let mut s = 0.0;
    for (k, &r) in rates.iter().enumerate() {
        let hi: f64 = profiles.iter().map(|c| c.q[k + 1]).product();
        let lo: f64 = profiles.iter().map(|c| c.q[k]).product();
        s += r * (hi - lo);
    }
    Ok(s)
}

/// Who produced a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    /// Exact two-connection rule.
    ExactPair,
    /// Fair-share LP.
    Lp,
    /// Best-leaf tree heuristic.
    Belf,
    /// Worst-leaf tree heuristic.
    Wolf,
    /// Fair individual share, always shifted.
    Fish,
    /// Fair individual share, shifted only if negative.
    Pike,
    /// All equal.
    Uniform,
}

/// WRR tie-breaking weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TieBreakWeights {
    /// Nonnegative weight per connection.
    pub alpha: Vec<f64>,
    /// Construction method.
    pub source: WeightSource,
    /// Connections whose weight was forced to zero (no tie mass).
    pub flagged: Vec<bool>,
}

impl TieBreakWeights {
    /// Equal weights.
    pub fn uniform(n: usize) -> Self {
        Self { alpha: alloc::vec![1.0; n], source: WeightSource::Uniform, flagged: alloc::vec![false; n] }
    }

    /// Pick a connection among the tied set `tie` with probability
    /// proportional to weight. All-zero weights inside the set fall back to a
    /// uniform pick.
    pub fn pick<R: Rng + ?Sized>(&self, tie: &[usize], rng: &mut R) -> usize {
        pick_weighted(&self.alpha, tie, rng)
    }
}

pub(crate) fn pick_weighted<R: Rng + ?Sized>(alpha: &[f64], tie: &[usize], rng: &mut R) -> usize {
    debug_assert!(!tie.is_empty());
    if tie.len() == 1 {
        return tie[0];
    }
    let total: f64 = tie.iter().map(|&n| alpha[n]).sum();
    if !(total > 0.0) {
        return tie[rng.random_range(0..tie.len())];
    }
    let mut u = rng.random::<f64>() * total;
    for &n in tie {
        u -= alpha[n];
        if u < 0.0 {
            return n;
        }
    }
    // rounding left a sliver: return the last positive-weight member
    *tie.iter().rev().find(|&&n| alpha[n] > 0.0).unwrap_or(&tie[tie.len() - 1])
}

/// Largest connection count for the exact WRR sum.
pub const WRR_EXACT_CAP: usize = 15;

/// Expected per-connection throughput under WRR tie-breaking.
#[derive(Debug, Clone, PartialEq)]
pub struct WrrThroughput {
    /// One value per connection (rate units).
    pub values: Vec<f64>,
    /// False when estimated by Monte-Carlo.
    pub exact: bool,
}

fn tie_share(alpha: &[f64], tie: u64, n: usize, count: usize) -> f64 {
    let total: f64 = (0..alpha.len()).filter(|m| tie >> m & 1 == 1).map(|m| alpha[m]).sum();
    if total > 0.0 {
        alpha[n] / total
    } else {
        1.0 / count as f64
    }
}

/// Expected throughput of each connection when ties are broken with
/// probabilities proportional to `weights`.
///
/// Sums over every tie set up to [`WRR_EXACT_CAP`] connections; above it,
/// estimates with `mc_frames` simulated frames drawn from `rng`.
pub fn wrr_expected_throughput<R: Rng + ?Sized>(
    weights: &[f64],
    profiles: &[ConnectionProfile],
    rates: &[f64],
    mc_frames: u64,
    rng: &mut R,
) -> Result<WrrThroughput> {
    check(profiles, rates)?;
    let n = profiles.len();
    if weights.len() != n || !weights.iter().all(|w| *w >= 0.0 && w.is_finite()) {
        return Err(domain("need one nonnegative weight per connection"));
    }
    if n <= WRR_EXACT_CAP {
        let mut values = alloc::vec![0.0; n];
        for tie in 1u64..(1u64 << n) {
            let rh = tie_throughput_unchecked(tie, profiles, rates);
            if rh == 0.0 {
                continue;
            }
            let count = tie.count_ones() as usize;
            for (m, v) in values.iter_mut().enumerate() {
                if tie >> m & 1 == 1 {
                    *v += tie_share(weights, tie, m, count) * rh;
                }
            }
        }
        return Ok(WrrThroughput { values, exact: true });
    }
    if mc_frames == 0 {
        return Err(Error::CapExceeded { what: "exact WRR sum", size: n, cap: WRR_EXACT_CAP });
    }
    let mut values = alloc::vec![0.0; n];
    let mut level = alloc::vec![0usize; n];
    let mut tied = Vec::with_capacity(n);
    for _ in 0..mc_frames {
        for (l, c) in level.iter_mut().zip(profiles) {
            *l = draw_level(c, rng);
        }
        let best = *level.iter().max().expect("non-empty");
        tied.clear();
        tied.extend((0..n).filter(|&m| level[m] == best));
        let who = pick_weighted(weights, &tied, rng);
        values[who] += rates[best];
    }
    for v in &mut values {
        *v /= mc_frames as f64;
    }
    Ok(WrrThroughput { values, exact: false })
}

/// Draw a level from a profile.
pub fn draw_level<R: Rng + ?Sized>(c: &ConnectionProfile, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    // q is the CDF shifted by one: level k iff q[k] <= u < q[k+1]
    let k = c.q.partition_point(|&x| x <= u);
    k.saturating_sub(1).min(c.levels() - 1)
}

/// Jain's fairness index `(sum x)^2 / (n sum x^2)`; 1 for all-zero input.
pub fn jain_index(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(domain("Jain index of an empty set"));
    }
    let s: f64 = values.iter().sum();
    let s2: f64 = values.iter().map(|x| x * x).sum();
    if s2 == 0.0 {
        return Ok(1.0);
    }
    Ok(s * s / (values.len() as f64 * s2))
}
