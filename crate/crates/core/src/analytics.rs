//! Expected throughput and head-selection probabilities of D2D clusters.
//!
//! Two cluster schedulers are modeled. CL(WRR) serves cluster `n` in a fixed
//! share `w_n = N_n / N` of frames. CL(MR) serves the cluster holding the user
//! with the best instantaneous SNR in the whole cell. In both cases the served
//! cluster is reached through its best member (the head), which relays to the
//! rest over the D2D link, and the frame's bits are shared equally.
//!
//! Head probabilities and relay rates need `P(max X > max Y | MCS(max X) = k)`
//! for two independent user groups. That is evaluated per MCS bucket with the
//! adaptive rule in [`crate::quadrature`].

use alloc::vec::Vec;

use crate::channel::{cdf_unchecked, cluster_cdf_diff, cluster_cdf_unchecked, tail_unchecked, ClusterPartition, McsTable};
use crate::error::{domain, invalid};
use crate::quadrature::{integrate, Tolerance};
use crate::{Error, Result};

/// Symbols available per frame and the frame length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBudget {
    /// Data symbols per frame.
    pub symbols_per_frame: f64,
    /// Frame duration in seconds.
    pub frame_duration: f64,
}

impl FrameBudget {
    /// Validated budget.
    pub fn new(symbols_per_frame: f64, frame_duration: f64) -> Result<Self> {
        if !(symbols_per_frame > 0.0 && symbols_per_frame.is_finite()) {
            return Err(invalid("symbols_per_frame", "must be positive"));
        }
        if !(frame_duration > 0.0 && frame_duration.is_finite()) {
            return Err(invalid("frame_duration", "must be positive"));
        }
        Ok(Self { symbols_per_frame, frame_duration })
    }

    /// Symbols per second.
    pub fn symbol_rate(&self) -> f64 {
        self.symbols_per_frame / self.frame_duration
    }
}

impl Default for FrameBudget {
    /// 16 800 symbols in a 1 ms frame: 80.64 Mb/s at 4.8 bits/symbol.
    fn default() -> Self {
        Self { symbols_per_frame: 16_800.0, frame_duration: 1e-3 }
    }
}

/// Which cluster scheduler an analysis refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClusterScheduler {
    /// Weighted round robin over clusters, weights `N_n / N`.
    ClWrr,
    /// Serve the cluster of the system-best user.
    ClMr,
}

/// A cell: per-user mean SNRs, their clustering, the MCS table and budget.
#[derive(Debug, Clone)]
pub struct Cell {
    gammas: Vec<f64>,
    partition: ClusterPartition,
    table: McsTable,
    budget: FrameBudget,
}

/// Per-cluster and per-user results for one scheduler.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAnalytics {
    /// Scheduler analysed.
    pub scheduler: ClusterScheduler,
    /// Expected throughput per cluster (bits/s).
    pub cluster_throughput: Vec<f64>,
    /// Expected throughput per user (bits/s).
    pub user_throughput: Vec<f64>,
    /// Probability that the user is the serving head in a frame.
    pub head_probability: Vec<f64>,
    /// Cellular rate the user carries as head, for itself and others (bits/s).
    pub relay_rate: Vec<f64>,
}

impl Cell {
    /// Build a cell. `gammas[u]` is user `u`'s linear mean SNR.
    pub fn new(gammas: Vec<f64>, partition: ClusterPartition, table: McsTable, budget: FrameBudget) -> Result<Self> {
        if gammas.len() != partition.n_users() {
            return Err(Error::InvalidPartition(alloc::format!(
                "partition covers {} users but {} SNRs were given",
                partition.n_users(),
                gammas.len()
            )));
        }
        if gammas.is_empty() {
            return Err(domain("cell has no users"));
        }
        if !gammas.iter().all(|g| *g > 0.0 && g.is_finite()) {
            return Err(domain("mean SNR must be positive and finite"));
        }
        Ok(Self { gammas, partition, table, budget })
    }

    /// Mean SNRs.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// The clustering.
    pub fn partition(&self) -> &ClusterPartition {
        &self.partition
    }

    /// The MCS table.
    pub fn table(&self) -> &McsTable {
        &self.table
    }

    /// The frame budget.
    pub fn budget(&self) -> &FrameBudget {
        &self.budget
    }

    /// Same users and table with a different clustering.
    pub fn with_partition(&self, partition: ClusterPartition) -> Result<Self> {
        Self::new(self.gammas.clone(), partition, self.table.clone(), self.budget)
    }

    fn members(&self, cluster: usize) -> Result<Vec<f64>> {
        Ok(self.partition.cluster(cluster)?.iter().map(|&u| self.gammas[u]).collect())
    }

    fn outsiders(&self, cluster: usize) -> Result<Vec<f64>> {
        let c = self.partition.cluster(cluster)?;
        Ok((0..self.gammas.len()).filter(|u| !c.contains(u)).map(|u| self.gammas[u]).collect())
    }

    fn cluster_mates(&self, user: usize) -> Result<Vec<f64>> {
        let c = self.partition.cluster_of(user)?;
        Ok(self.partition.clusters()[c].iter().filter(|&&u| u != user).map(|&u| self.gammas[u]).collect())
    }

    fn everyone_but(&self, user: usize) -> Result<Vec<f64>> {
        if user >= self.gammas.len() {
            return Err(Error::UnknownUser(user));
        }
        Ok((0..self.gammas.len()).filter(|&u| u != user).map(|u| self.gammas[u]).collect())
    }

    /// Mean bits per symbol of the best member of `gammas`.
    fn mean_rate(&self, gammas: &[f64]) -> f64 {
        let pi = group_level_probabilities(gammas, &self.table);
        pi.iter().zip(self.table.entries()).map(|(p, e)| p * e.bits_per_symbol).sum()
    }

    /// Expected throughput of a cluster under CL(WRR), bits/s.
    pub fn clwrr_cluster_throughput(&self, cluster: usize) -> Result<f64> {
        let w = self.partition.weight(cluster)?;
        Ok(w * self.budget.symbol_rate() * self.mean_rate(&self.members(cluster)?))
    }

    /// Expected throughput of a user under CL(WRR), bits/s.
    pub fn clwrr_user_throughput(&self, user: usize) -> Result<f64> {
        let c = self.partition.cluster_of(user)?;
        Ok(self.clwrr_cluster_throughput(c)? / self.partition.clusters()[c].len() as f64)
    }

    /// Probability that `user` is head in a frame under CL(WRR).
    pub fn clwrr_head_probability(&self, user: usize) -> Result<f64> {
        let c = self.partition.cluster_of(user)?;
        let w = self.partition.weight(c)?;
        let mates = self.cluster_mates(user)?;
        Ok(w * head_mass(self.gammas[user], &mates, &self.table, |_| 1.0)?)
    }

    /// Cellular rate carried by `user` as head under CL(WRR), bits/s.
    pub fn lte_relay_rate_clwrr(&self, user: usize) -> Result<f64> {
        let c = self.partition.cluster_of(user)?;
        let w = self.partition.weight(c)?;
        let mates = self.cluster_mates(user)?;
        let t = &self.table;
        Ok(w * self.budget.symbol_rate() * head_mass(self.gammas[user], &mates, t, |k| t.rate(k))?)
    }

    /// Expected throughput of a cluster under CL(MR), bits/s.
    pub fn clmr_cluster_throughput(&self, cluster: usize) -> Result<f64> {
        let x = self.members(cluster)?;
        let y = self.outsiders(cluster)?;
        let pi = group_level_probabilities(&x, &self.table);
        let mut s = 0.0;
        for (k, &p) in pi.iter().enumerate() {
            let r = self.table.rate(k);
            if p == 0.0 || r == 0.0 {
                continue;
            }
            s += p * r * win_given_level(&x, &y, k, &self.table)?;
        }
        Ok(self.budget.symbol_rate() * s)
    }

    /// Expected throughput of a user under CL(MR), bits/s.
    pub fn clmr_user_throughput(&self, user: usize) -> Result<f64> {
        let c = self.partition.cluster_of(user)?;
        Ok(self.clmr_cluster_throughput(c)? / self.partition.clusters()[c].len() as f64)
    }

    /// Probability that `user` has the best SNR in the cell.
    pub fn clmr_head_probability(&self, user: usize) -> Result<f64> {
        let others = self.everyone_but(user)?;
        head_mass(self.gammas[user], &others, &self.table, |_| 1.0)
    }

    /// Cellular rate carried by `user` as head under CL(MR), bits/s.
    pub fn lte_relay_rate_clmr(&self, user: usize) -> Result<f64> {
        let others = self.everyone_but(user)?;
        let t = &self.table;
        Ok(self.budget.symbol_rate() * head_mass(self.gammas[user], &others, t, |k| t.rate(k))?)
    }

    /// Throughput of plain MaxRate over all users, bits/s.
    pub fn system_maxrate_throughput(&self) -> f64 {
        self.budget.symbol_rate() * self.mean_rate(&self.gammas)
    }

    /// Throughput one user would get from the full budget, bits/s.
    pub fn standalone_rate(&self, user: usize) -> Result<f64> {
        let g = *self.gammas.get(user).ok_or(Error::UnknownUser(user))?;
        Ok(self.budget.symbol_rate() * self.mean_rate(&[g]))
    }

    /// All quantities for one scheduler.
    pub fn analyse(&self, scheduler: ClusterScheduler) -> Result<ClusterAnalytics> {
        let n = self.gammas.len();
        let nc = self.partition.len();
        let mut out = ClusterAnalytics {
            scheduler,
            cluster_throughput: Vec::with_capacity(nc),
            user_throughput: Vec::with_capacity(n),
            head_probability: Vec::with_capacity(n),
            relay_rate: Vec::with_capacity(n),
        };
        for c in 0..nc {
            out.cluster_throughput.push(match scheduler {
                ClusterScheduler::ClWrr => self.clwrr_cluster_throughput(c)?,
                ClusterScheduler::ClMr => self.clmr_cluster_throughput(c)?,
            });
        }
        for u in 0..n {
            let c = self.partition.cluster_of(u)?;
            out.user_throughput.push(out.cluster_throughput[c] / self.partition.clusters()[c].len() as f64);
            match scheduler {
                ClusterScheduler::ClWrr => {
                    out.head_probability.push(self.clwrr_head_probability(u)?);
                    out.relay_rate.push(self.lte_relay_rate_clwrr(u)?);
                }
                ClusterScheduler::ClMr => {
                    out.head_probability.push(self.clmr_head_probability(u)?);
                    out.relay_rate.push(self.lte_relay_rate_clmr(u)?);
                }
            }
        }
        Ok(out)
    }
}

/// MCS probabilities for the best of a group; a single user when `gammas`
/// has one entry. Inputs are assumed validated.
fn group_level_probabilities(gammas: &[f64], table: &McsTable) -> Vec<f64> {
    (0..table.len()).map(|i| cluster_cdf_diff(gammas, table.lower(i), table.lower(i + 1))).collect()
}

/// `sum_k p_k(gamma) g(k) P(C > max Y | MCS(C) = k)` for one user.
fn head_mass<G: Fn(usize) -> f64>(gamma: f64, competitors: &[f64], table: &McsTable, g: G) -> Result<f64> {
    let p = group_level_probabilities(&[gamma], table);
    let mut s = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        let weight = g(k);
        if pk == 0.0 || weight == 0.0 {
            continue;
        }
        s += pk * weight * win_given_level(&[gamma], competitors, k, table)?;
    }
    Ok(s)
}

/// `[F_X(min(z, c_{k+1})) - F_X(c_k)] / pi_k` for the best of group `x`.
///
/// Errors when level `k` (0-based) has zero probability.
pub fn conditional_group_cdf(x: &[f64], z: f64, k: usize, table: &McsTable) -> Result<f64> {
    if x.is_empty() || !x.iter().all(|g| *g > 0.0 && g.is_finite()) {
        return Err(domain("group needs positive mean SNRs"));
    }
    if k >= table.len() {
        return Err(domain("MCS level out of range"));
    }
    let lo = table.lower(k);
    let hi = table.lower(k + 1);
    if !(z >= lo) {
        return Err(domain("argument below the level's lower threshold"));
    }
    let pi = cluster_cdf_diff(x, lo, hi);
    if pi <= 0.0 {
        return Err(Error::DegenerateMcs { level: k + 1 });
    }
    if z >= hi {
        return Ok(1.0);
    }
    Ok((cluster_cdf_diff(x, lo, z) / pi).clamp(0.0, 1.0))
}

/// CDF of one user's SNR given that its MCS level (0-based) is `k`.
pub fn conditional_snr_cdf(gamma: f64, z: f64, k: usize, table: &McsTable) -> Result<f64> {
    conditional_group_cdf(&[gamma], z, k, table)
}

/// Density of the max of exponentials with means `y` at `z`:
/// `sum_j f_j prod_{l != j} F_l`, with prefix and suffix products.
fn max_density(y: &[f64], z: f64) -> f64 {
    let mut suffix = alloc::vec![1.0; y.len() + 1];
    for j in (0..y.len()).rev() {
        suffix[j] = suffix[j + 1] * cdf_unchecked(y[j], z);
    }
    let mut prefix = 1.0;
    let mut total = 0.0;
    for (j, &g) in y.iter().enumerate() {
        total += prefix * tail_unchecked(g, z) / g * suffix[j + 1];
        prefix *= cdf_unchecked(g, z);
    }
    total
}

/// `P(max X > max Y | MCS(max X) = k)` for independent groups `x` and `y`.
///
/// Conditioning on the level confines `max X` to `[c_k, c_{k+1})`, so the
/// probability splits into `F_Y(c_k)` (Y already below the bucket) plus the
/// integral over the bucket of `[1 - F_X(z | k)] dF_Y(z)`. The top bucket is
/// cut where `F_Y` exceeds `1 - 1e-12`.
pub fn win_given_level(x: &[f64], y: &[f64], k: usize, table: &McsTable) -> Result<f64> {
    if y.is_empty() {
        // still validate the bucket
        conditional_group_cdf(x, table.lower(k), k, table)?;
        return Ok(1.0);
    }
    let lo = table.lower(k);
    let hi = table.lower(k + 1);
    let pi = cluster_cdf_diff(x, lo, hi);
    if pi <= 0.0 {
        return Err(Error::DegenerateMcs { level: k + 1 });
    }
    let below = cluster_cdf_unchecked(y, lo);
    let gmax = y.iter().copied().fold(0.0, f64::max);
    let cut = gmax * libm::log(y.len() as f64 * 1e12);
    let upper = hi.min(cut);
    if upper <= lo {
        return Ok(below.min(1.0));
    }
    let integrand = |z: f64| (cluster_cdf_diff(x, z, hi) / pi).clamp(0.0, 1.0) * max_density(y, z);
    let part = integrate(integrand, lo, upper, Tolerance::default())?;
    Ok((below + part).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{db_to_linear, mcs_probabilities, SnrClass};

    fn cell(gammas: Vec<f64>, sizes: &[usize]) -> Cell {
        Cell::new(gammas, ClusterPartition::from_sizes(sizes).unwrap(), McsTable::lte(), FrameBudget::default()).unwrap()
    }

    #[test]
    fn budget_matches_capacity() {
        let b = FrameBudget::default();
        assert!((b.symbol_rate() * 4.8 - 80.64e6).abs() < 1e-3);
        assert!(FrameBudget::new(0.0, 1e-3).is_err());
    }

    #[test]
    fn singleton_cluster_is_always_head() {
        let g = db_to_linear(16.0);
        let c = cell(alloc::vec![g, 2.0 * g, 3.0 * g], &[1, 2]);
        let w = 1.0 / 3.0;
        assert!((c.clwrr_head_probability(0).unwrap() - w).abs() < 1e-12);
        let t = c.clwrr_cluster_throughput(0).unwrap();
        assert!((c.lte_relay_rate_clwrr(0).unwrap() - t).abs() < 1e-6 * t);
        let p = mcs_probabilities(g, &McsTable::lte()).unwrap();
        let mean: f64 = p.iter().zip(McsTable::lte().rates()).map(|(a, b)| a * b).sum();
        assert!((t - w * 16.8e6 * mean).abs() < 1e-6);
    }

    #[test]
    fn identical_pair_splits_head_role() {
        let g = db_to_linear(16.0);
        let c = cell(alloc::vec![g, g], &[2]);
        assert!((c.clwrr_head_probability(0).unwrap() - 0.5).abs() < 1e-8);
        assert!((c.clwrr_head_probability(1).unwrap() - 0.5).abs() < 1e-8);
        let t = c.clwrr_cluster_throughput(0).unwrap();
        assert!((c.lte_relay_rate_clwrr(0).unwrap() - t / 2.0).abs() < 1e-7 * t);
    }

    #[test]
    fn one_big_cluster_has_no_competitor() {
        let gs: Vec<f64> = SnrClass::ALL.iter().map(|c| c.gamma()).collect();
        let c = cell(gs, &[3]);
        let a = c.clmr_cluster_throughput(0).unwrap();
        let b = c.clwrr_cluster_throughput(0).unwrap();
        assert!((a - b).abs() < 1e-9 * b);
        assert!((a - c.system_maxrate_throughput()).abs() < 1e-9 * a);
    }

    #[test]
    fn identical_singletons_halve_maxrate() {
        let g = db_to_linear(12.0);
        let c = cell(alloc::vec![g, g], &[1, 1]);
        let sys = c.system_maxrate_throughput();
        assert!((c.clmr_cluster_throughput(0).unwrap() - sys / 2.0).abs() < 1e-7 * sys);
    }

    #[test]
    fn conditional_cdf_edges() {
        let t = McsTable::lte();
        let g = db_to_linear(16.0);
        let k = 8;
        assert_eq!(conditional_snr_cdf(g, t.lower(k), k, &t).unwrap(), 0.0);
        assert_eq!(conditional_snr_cdf(g, t.lower(k + 1), k, &t).unwrap(), 1.0);
        assert!(conditional_snr_cdf(g, 0.5 * t.lower(k), k, &t).is_err());
        // the top level of a very poor user underflows to zero mass
        assert!(matches!(
            conditional_snr_cdf(1e-4, t.lower(15), 15, &t),
            Err(Error::DegenerateMcs { level: 16 })
        ));
    }

    #[test]
    fn unknown_ids() {
        let c = cell(alloc::vec![1.0, 2.0], &[2]);
        assert!(matches!(c.clwrr_cluster_throughput(3), Err(Error::UnknownCluster(3))));
        assert!(matches!(c.clmr_head_probability(9), Err(Error::UnknownUser(9))));
    }
}
