//! Coalitional cluster formation.
//!
//! A coalition of users is worth the sum of its members' energy efficiencies
//! when it is a valid cluster, and nothing otherwise. Valid means its diameter
//! fits the D2D range and no member is worse off than without clustering.
//! [`merge_split`] grows and breaks coalitions until no merge or split raises
//! the total value. The payoff rules divide a coalition's value.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::analytics::{Cell, ClusterScheduler, FrameBudget};
use crate::channel::{ClusterPartition, McsTable};
use crate::error::domain;
use crate::power::{member_report, PowerParams};
use crate::{Error, Result};

/// A transferable-utility game over players `0..n`.
pub trait CoalitionGame {
    /// Value of a coalition given as a sorted list of players.
    fn value(&self, group: &[usize]) -> f64;
}

/// Wrap a closure as a game.
pub struct FnGame<F>(pub F);

impl<F: Fn(&[usize]) -> f64> CoalitionGame for FnGame<F> {
    fn value(&self, group: &[usize]) -> f64 {
        (self.0)(group)
    }
}

/// What a valid coalition is worth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueMetric {
    /// Sum of member energy efficiencies (bits/J).
    #[default]
    EnergyEfficiency,
    /// Sum of member throughputs (bits/s).
    Throughput,
}

/// A coalition's value and why it is zero, if it is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalitionValue {
    /// The value, `>= 0`.
    pub value: f64,
    /// Largest pairwise distance (m), 0 without positions.
    pub diameter: f64,
    /// True when the diameter exceeds the limit.
    pub too_wide: bool,
    /// True when some member would lose efficiency.
    pub member_worse_off: bool,
}

/// The clustering game of a cell.
#[derive(Debug, Clone)]
pub struct ClusterGame {
    /// Mean SNR per user (linear).
    pub gammas: Vec<f64>,
    /// Positions in meters, required when `d_max` is finite.
    pub positions: Option<Vec<(f64, f64)>>,
    /// Largest allowed cluster diameter (m).
    pub d_max: f64,
    /// Each user's efficiency without clustering (bits/J).
    pub baseline_etas: Vec<f64>,
    /// MCS table.
    pub table: McsTable,
    /// Frame budget.
    pub budget: FrameBudget,
    /// Power model.
    pub params: PowerParams,
    /// Scheduler serving the clusters.
    pub scheduler: ClusterScheduler,
    /// Value metric.
    pub metric: ValueMetric,
}

impl ClusterGame {
    /// Evaluate a non-empty coalition of user indices.
    pub fn coalition_value(&self, group: &[usize]) -> Result<CoalitionValue> {
        if group.is_empty() {
            return Err(domain("coalition must be non-empty"));
        }
        let n = self.gammas.len();
        if let Some(&u) = group.iter().find(|&&u| u >= n) {
            return Err(Error::UnknownUser(u));
        }
        let diameter = self.diameter(group)?;
        let too_wide = diameter > self.d_max;
        // the partition snapshot: the group as one cluster, everyone else alone
        let mut clusters = alloc::vec![group.to_vec()];
        clusters.extend((0..n).filter(|u| !group.contains(u)).map(|u| alloc::vec![u]));
        let cell = Cell::new(self.gammas.clone(), ClusterPartition::new(clusters, n)?, self.table.clone(), self.budget)?;
        let cluster_t = match self.scheduler {
            ClusterScheduler::ClWrr => cell.clwrr_cluster_throughput(0)?,
            ClusterScheduler::ClMr => cell.clmr_cluster_throughput(0)?,
        };
        let share = cluster_t / group.len() as f64;
        let t: Vec<f64> = alloc::vec![share; group.len()];
        let mut relay = Vec::with_capacity(group.len());
        let mut head = Vec::with_capacity(group.len());
        for &u in group {
            match self.scheduler {
                ClusterScheduler::ClWrr => {
                    relay.push(cell.lte_relay_rate_clwrr(u)?);
                    head.push(cell.clwrr_head_probability(u)?);
                }
                ClusterScheduler::ClMr => {
                    relay.push(cell.lte_relay_rate_clmr(u)?);
                    head.push(cell.clmr_head_probability(u)?);
                }
            }
        }
        let mut value = 0.0;
        let mut worse = false;
        for (i, &u) in group.iter().enumerate() {
            let rep = member_report(i, head[i], &t, &relay, &self.params)?;
            if group.len() > 1 && rep.eta < self.baseline_etas[u] {
                worse = true;
            }
            value += match self.metric {
                ValueMetric::EnergyEfficiency => rep.eta,
                ValueMetric::Throughput => share,
            };
        }
        let valid = group.len() == 1 || (!too_wide && !worse);
        Ok(CoalitionValue { value: if valid { value } else { 0.0 }, diameter, too_wide, member_worse_off: worse })
    }

    fn diameter(&self, group: &[usize]) -> Result<f64> {
        if group.len() < 2 {
            return Ok(0.0);
        }
        let Some(pos) = &self.positions else {
            return if self.d_max.is_finite() { Err(Error::MissingPosition(group[0])) } else { Ok(0.0) };
        };
        let mut d: f64 = 0.0;
        for (i, &a) in group.iter().enumerate() {
            let pa = *pos.get(a).ok_or(Error::MissingPosition(a))?;
            for &b in &group[i + 1..] {
                let pb = *pos.get(b).ok_or(Error::MissingPosition(b))?;
                d = d.max(libm::hypot(pa.0 - pb.0, pa.1 - pb.1));
            }
        }
        Ok(d)
    }
}

/// Memoizing adapter turning a [`ClusterGame`] into a [`CoalitionGame`].
///
/// A coalition whose evaluation fails is worth 0; the first error is kept.
pub struct CachedGame<'a> {
    game: &'a ClusterGame,
    cache: RefCell<BTreeMap<Vec<usize>, f64>>,
    error: RefCell<Option<Error>>,
}

impl<'a> CachedGame<'a> {
    /// Wrap a game.
    pub fn new(game: &'a ClusterGame) -> Self {
        Self { game, cache: RefCell::new(BTreeMap::new()), error: RefCell::new(None) }
    }

    /// First evaluation error, if any.
    pub fn take_error(&self) -> Option<Error> {
        self.error.borrow_mut().take()
    }
}

impl CoalitionGame for CachedGame<'_> {
    fn value(&self, group: &[usize]) -> f64 {
        if let Some(v) = self.cache.borrow().get(group) {
            return *v;
        }
        let v = match self.game.coalition_value(group) {
            Ok(cv) => cv.value,
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        self.cache.borrow_mut().insert(group.to_vec(), v);
        v
    }
}

/// Sort members and order coalitions by their smallest member.
pub fn normalize(partition: &mut Vec<Vec<usize>>) {
    partition.retain(|c| !c.is_empty());
    for c in partition.iter_mut() {
        c.sort_unstable();
    }
    partition.sort_by_key(|c| c[0]);
}

fn improves(parts: f64, whole: f64) -> bool {
    // strict, with a tolerance scaled to the magnitudes so float noise
    // cannot make the procedure cycle
    whole - parts > 1e-12 * parts.abs().max(whole.abs()).max(1e-300)
}

/// Largest coalition whose two-part splits are enumerated.
pub const SPLIT_CAP: usize = 20;

/// Apply merge and split rules from `initial` until neither fires.
///
/// Merges are tried over pairs of coalitions in ascending index order; the
/// first improving merge is taken and the scan restarts. When no merge
/// improves, every two-part split of every coalition is tried in the same
/// way. Both rules require a strict gain.
pub fn merge_split<G: CoalitionGame + ?Sized>(initial: &[Vec<usize>], game: &G) -> Vec<Vec<usize>> {
    let mut part: Vec<Vec<usize>> = initial.to_vec();
    normalize(&mut part);
    'outer: loop {
        for a in 0..part.len() {
            for b in a + 1..part.len() {
                let mut union = part[a].clone();
                union.extend_from_slice(&part[b]);
                union.sort_unstable();
                if improves(game.value(&part[a]) + game.value(&part[b]), game.value(&union)) {
                    part[a] = union;
                    part.remove(b);
                    normalize(&mut part);
                    continue 'outer;
                }
            }
        }
        for c in 0..part.len() {
            if let Some((p, q)) = best_split(&part[c], game) {
                part[c] = p;
                part.push(q);
                normalize(&mut part);
                continue 'outer;
            }
        }
        return part;
    }
}

/// First two-part split of `s` whose parts are worth strictly more than `s`.
fn best_split<G: CoalitionGame + ?Sized>(s: &[usize], game: &G) -> Option<(Vec<usize>, Vec<usize>)> {
    let m = s.len();
    if !(2..=SPLIT_CAP).contains(&m) {
        return None;
    }
    let whole = game.value(s);
    // the last member always stays in the second part, so each split is seen once
    for mask in 1u32..(1u32 << (m - 1)) {
        let (p, q): (Vec<usize>, Vec<usize>) = split_by_mask(s, mask);
        if improves(whole, game.value(&p) + game.value(&q)) {
            return Some((p, q));
        }
    }
    None
}

fn split_by_mask(s: &[usize], mask: u32) -> (Vec<usize>, Vec<usize>) {
    let mut p = Vec::new();
    let mut q = Vec::new();
    for (i, &u) in s.iter().enumerate() {
        if mask >> i & 1 == 1 {
            p.push(u);
        } else {
            q.push(u);
        }
    }
    (p, q)
}

/// True when no single merge or split of `partition` strictly gains.
pub fn is_stable<G: CoalitionGame + ?Sized>(partition: &[Vec<usize>], game: &G) -> bool {
    let mut part = partition.to_vec();
    normalize(&mut part);
    for a in 0..part.len() {
        for b in a + 1..part.len() {
            let mut union = part[a].clone();
            union.extend_from_slice(&part[b]);
            union.sort_unstable();
            if improves(game.value(&part[a]) + game.value(&part[b]), game.value(&union)) {
                return false;
            }
        }
    }
    part.iter().all(|c| best_split(c, game).is_none())
}

/// Total value of a partition.
pub fn partition_value<G: CoalitionGame + ?Sized>(partition: &[Vec<usize>], game: &G) -> f64 {
    partition.iter().map(|c| game.value(c)).sum()
}

/// Surplus split in equal parts on top of each member's singleton value.
pub fn payoff_equal_share(group_value: f64, singleton_values: &[f64]) -> Result<Vec<f64>> {
    if singleton_values.is_empty() {
        return Err(domain("coalition must be non-empty"));
    }
    let surplus = group_value - singleton_values.iter().sum::<f64>();
    let each = surplus / singleton_values.len() as f64;
    Ok(singleton_values.iter().map(|v| v + each).collect())
}

/// Surplus split in proportion to positive weights.
pub fn payoff_weighted_share(group_value: f64, singleton_values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if singleton_values.is_empty() || weights.len() != singleton_values.len() {
        return Err(domain("need one weight per member"));
    }
    if !weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
        return Err(domain("weights must be positive"));
    }
    let surplus = group_value - singleton_values.iter().sum::<f64>();
    let wsum: f64 = weights.iter().sum();
    Ok(singleton_values.iter().zip(weights).map(|(v, w)| v + w / wsum * surplus).collect())
}

/// Default largest coalition for the Shapley value.
pub const SHAPLEY_CAP: usize = 12;

/// Shapley value of each member of `group` in `game`, with `v(empty) = 0`.
pub fn payoff_shapley<G: CoalitionGame + ?Sized>(group: &[usize], game: &G, cap: usize) -> Result<Vec<f64>> {
    let n = group.len();
    if n == 0 {
        return Err(domain("coalition must be non-empty"));
    }
    if n > cap {
        return Err(Error::CapExceeded { what: "shapley coalition", size: n, cap });
    }
    let full = 1usize << n;
    let mut v = alloc::vec![0.0; full];
    let mut members = Vec::with_capacity(n);
    for (mask, slot) in v.iter_mut().enumerate().skip(1) {
        members.clear();
        members.extend((0..n).filter(|i| mask >> i & 1 == 1).map(|i| group[i]));
        members.sort_unstable();
        *slot = game.value(&members);
    }
    // weight of a coalition of size s that excludes the player: s!(n-s-1)!/n!
    let mut weight = alloc::vec![0.0; n];
    for (s, w) in weight.iter_mut().enumerate() {
        let mut x = 1.0;
        for k in 1..=s {
            x *= k as f64;
        }
        for k in 1..n - s {
            x *= k as f64;
        }
        let mut nf = 1.0;
        for k in 1..=n {
            nf *= k as f64;
        }
        *w = x / nf;
    }
    let mut phi = alloc::vec![0.0; n];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in 0..full {
            if mask & bit == 0 {
                acc += weight[mask.count_ones() as usize] * (v[mask | bit] - v[mask]);
            }
        }
        *p = acc;
    }
    Ok(phi)
}
