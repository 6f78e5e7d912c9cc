//! Heuristic WRR tie-breaking weights and leaf orderings.
//!
//! FISH treats each connection against "everyone else" as a two-connection
//! system and solves for the weight that would give it `1/N` of the total.
//! PIKe is FISH that only shifts weights when one is negative. BeLF and WoLF
//! descend a binary tree over the connections, applying the exact pair rule at
//! every node to the best (BeLF) or worst (WoLF) representative of each side.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{check, maxfair_alpha, pair_rates, ConnectionProfile, TieBreakWeights, WeightSource};
use crate::error::domain;
use crate::Result;

/// Raw fair-individual-share weights and zero-denominator flags.
fn fish_raw(profiles: &[ConnectionProfile], rates: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    check(profiles, rates)?;
    let n = profiles.len();
    let k = rates.len();
    let nf = n as f64;
    let mut alpha = alloc::vec![0.0; n];
    let mut flagged = alloc::vec![false; n];
    for i in 0..n {
        // best level among the others
        let q_rest: Vec<f64> = (0..=k)
            .map(|l| profiles.iter().enumerate().filter(|(m, _)| *m != i).map(|(_, c)| c.q()[l]).product())
            .collect();
        let me = &profiles[i];
        let mut others_win = 0.0;
        let mut me_win = 0.0;
        let mut tie = 0.0;
        for l in 0..k {
            let p_rest = q_rest[l + 1] - q_rest[l];
            others_win += rates[l] * p_rest * me.q()[l];
            me_win += rates[l] * me.p()[l] * q_rest[l];
            tie += rates[l] * me.p()[l] * p_rest;
        }
        if tie > 0.0 {
            alpha[i] = 1.0 / nf + (others_win - (nf - 1.0) * me_win) / (nf * tie);
        } else {
            flagged[i] = true;
        }
    }
    Ok((alpha, flagged))
}

fn min_unflagged(alpha: &[f64], flagged: &[bool]) -> Option<f64> {
    alpha.iter().zip(flagged).filter(|(_, f)| !**f).map(|(a, _)| *a).reduce(f64::min)
}

/// FISH weights: raw weights shifted so the smallest is zero.
pub fn fish_weights(profiles: &[ConnectionProfile], rates: &[f64]) -> Result<TieBreakWeights> {
    let (mut alpha, flagged) = fish_raw(profiles, rates)?;
    if let Some(m) = min_unflagged(&alpha, &flagged) {
        for (a, f) in alpha.iter_mut().zip(&flagged) {
            if !*f {
                *a -= m;
            }
        }
    }
    Ok(TieBreakWeights { alpha, source: WeightSource::Fish, flagged })
}

/// PIKe weights: raw weights, shifted only when one is negative.
pub fn pike_weights(profiles: &[ConnectionProfile], rates: &[f64]) -> Result<TieBreakWeights> {
    let (mut alpha, flagged) = fish_raw(profiles, rates)?;
    if let Some(m) = min_unflagged(&alpha, &flagged) {
        if m < 0.0 {
            for (a, f) in alpha.iter_mut().zip(&flagged) {
                if !*f {
                    *a -= m;
                }
            }
        }
    }
    Ok(TieBreakWeights { alpha, source: WeightSource::Pike, flagged })
}

/// Raw FISH weights before any shift, exposed for order checks.
pub fn fish_unshifted(profiles: &[ConnectionProfile], rates: &[f64]) -> Result<Vec<f64>> {
    Ok(fish_raw(profiles, rates)?.0)
}

/// Shape of the BeLF/WoLF tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeShape {
    /// Every internal node splits off its first leaf from the rest.
    #[default]
    LeftSpine,
    /// Every internal node splits its leaves in halves (first half larger).
    Balanced,
}

fn tree_weights<F>(profiles: &[ConnectionProfile], rates: &[f64], order: &[usize], shape: TreeShape, repr: F) -> Result<Vec<f64>>
where
    F: Fn(&[usize]) -> Result<ConnectionProfile>,
{
    check(profiles, rates)?;
    let n = profiles.len();
    let mut seen = alloc::vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || core::mem::replace(&mut seen[i], true)) {
        return Err(domain("leaf order must be a permutation of the connections"));
    }
    let mut alpha = alloc::vec![0.0; n];
    let mut stack: Vec<(&[usize], f64)> = alloc::vec![(order, 1.0)];
    while let Some((group, mass)) = stack.pop() {
        if group.len() == 1 {
            alpha[group[0]] = mass;
            continue;
        }
        let cut = match shape {
            TreeShape::LeftSpine => 1,
            TreeShape::Balanced => group.len().div_ceil(2),
        };
        let (left, right) = group.split_at(cut);
        let beta = maxfair_alpha(pair_rates(&repr(left)?, &repr(right)?, rates)?).alpha;
        stack.push((right, mass * (1.0 - beta)));
        stack.push((left, mass * beta));
    }
    Ok(alpha)
}

/// BeLF weights: each subtree is represented by the best of its leaves.
pub fn belf_weights(profiles: &[ConnectionProfile], rates: &[f64], order: &[usize], shape: TreeShape) -> Result<TieBreakWeights> {
    let alpha = tree_weights(profiles, rates, order, shape, |g| {
        let refs: Vec<&ConnectionProfile> = g.iter().map(|&i| &profiles[i]).collect();
        ConnectionProfile::best_of(&refs)
    })?;
    Ok(TieBreakWeights { flagged: alloc::vec![false; alpha.len()], alpha, source: WeightSource::Belf })
}

/// WoLF weights: each subtree is represented by its worst leaf, the one with
/// the lowest expected rate (lowest index on ties).
pub fn wolf_weights(profiles: &[ConnectionProfile], rates: &[f64], order: &[usize], shape: TreeShape) -> Result<TieBreakWeights> {
    let alpha = tree_weights(profiles, rates, order, shape, |g| {
        let worst = g
            .iter()
            .copied()
            .min_by(|&a, &b| {
                profiles[a].mean_rate(rates).total_cmp(&profiles[b].mean_rate(rates)).then(a.cmp(&b))
            })
            .expect("non-empty group");
        Ok(profiles[worst].clone())
    })?;
    Ok(TieBreakWeights { flagged: alloc::vec![false; alpha.len()], alpha, source: WeightSource::Wolf })
}

/// Member counts per SNR class of a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    /// Good members.
    pub good: usize,
    /// Average members.
    pub average: usize,
    /// Poor members.
    pub poor: usize,
}

impl ClassCounts {
    /// Better-first comparison: more good members, then more average ones,
    /// then fewer poor ones.
    pub fn better_first(&self, other: &Self) -> Ordering {
        other.good.cmp(&self.good).then(other.average.cmp(&self.average)).then(self.poor.cmp(&other.poor))
    }
}

/// Connections from best to worst; stable on equal goodness.
pub fn lexicographic_order(goodness: &[ClassCounts]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..goodness.len()).collect();
    idx.sort_by(|&a, &b| goodness[a].better_first(&goodness[b]));
    idx
}

/// Best, worst, second best, second worst, and so on.
pub fn alternating_order(goodness: &[ClassCounts]) -> Vec<usize> {
    interleave(&lexicographic_order(goodness))
}

/// Interleave a best-first ranking from both ends.
pub fn interleave(ranked: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(ranked.len());
    let (mut lo, mut hi) = (0usize, ranked.len());
    while lo < hi {
        out.push(ranked[lo]);
        lo += 1;
        if lo < hi {
            hi -= 1;
            out.push(ranked[hi]);
        }
    }
    out
}

/// Largest connection count for the exhaustive order search.
pub const PERMUTATION_CAP: usize = 8;

/// The leaf order maximizing `score`, over all permutations of `0..n`.
///
/// Earlier permutations in lexicographic order win ties.
pub fn exhaustive_best_order<F: FnMut(&[usize]) -> f64>(n: usize, mut score: F) -> Result<(Vec<usize>, f64)> {
    if n == 0 {
        return Err(domain("no connections"));
    }
    if n > PERMUTATION_CAP {
        return Err(crate::Error::CapExceeded { what: "permutation search", size: n, cap: PERMUTATION_CAP });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (perm.clone(), score(&perm));
    while next_permutation(&mut perm) {
        let s = score(&perm);
        if s > best.1 {
            best = (perm.clone(), s);
        }
    }
    Ok(best)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
