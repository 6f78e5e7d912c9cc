//! Rayleigh-fading SNR model and MCS link adaptation.
//!
//! Instantaneous SNR of a user with mean `gamma` is exponential, so its CDF is
//! `1 - exp(-z/gamma)`. The SNR of a cluster is the max over its members. An
//! [`McsTable`] maps an SNR to the highest level whose threshold it reaches.
//!
//! All SNR values here are linear. Use [`db_to_linear`] at the boundary.

use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{domain, invalid};
use crate::{Error, Result};

/// Convert decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Convert a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

/// One row of an MCS table.
#[derive(Debug, Clone, PartialEq)]
pub struct McsEntry {
    /// 1-based level. Level 1 is outage.
    pub index: usize,
    /// Modulation and code rate, e.g. `"16QAM 1/2"`.
    pub label: String,
    /// Lower SNR bound (linear). Zero for the outage level.
    pub threshold: f64,
    /// Net rate in bits per symbol.
    pub bits_per_symbol: f64,
}

impl McsEntry {
    /// Threshold in dB, or `None` for the outage level whose threshold is 0.
    pub fn threshold_db(&self) -> Option<f64> {
        (self.threshold > 0.0).then(|| linear_to_db(self.threshold))
    }
}

const LTE_ROWS: [(&str, f64, f64); 15] = [
    ("QPSK 1/8", -2.6, 0.25),
    ("QPSK 1/5", -0.4, 0.4),
    ("QPSK 1/4", 0.8, 0.5),
    ("QPSK 1/3", 1.5, 0.67),
    ("QPSK 1/2", 4.5, 1.0),
    ("QPSK 2/3", 6.8, 1.3),
    ("QPSK 3/4", 8.0, 1.5),
    ("QPSK 4/5", 8.7, 1.6),
    ("16QAM 1/2", 10.9, 2.0),
    ("16QAM 2/3", 14.3, 2.66),
    ("16QAM 3/4", 15.2, 3.0),
    ("16QAM 4/5", 15.8, 3.2),
    ("64QAM 2/3", 19.3, 4.0),
    ("64QAM 3/4", 21.5, 4.5),
    ("64QAM 4/5", 22.6, 4.8),
];

/// Ordered MCS levels. Level `k` covers SNRs in `[c_k, c_{k+1})`, with
/// `c_1 = 0` and an implied `c_{K+1} = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    /// The default 16-level LTE table: outage plus 15 QPSK/16QAM/64QAM rows,
    /// thresholds including the implementation margin.
    pub fn lte() -> Self {
        let mut entries = Vec::with_capacity(16);
        entries.push(McsEntry {
            index: 1,
            label: String::from("outage"),
            threshold: 0.0,
            bits_per_symbol: 0.0,
        });
        for (i, (label, db, bps)) in LTE_ROWS.iter().enumerate() {
            entries.push(McsEntry {
                index: i + 2,
                label: String::from(*label),
                threshold: db_to_linear(*db),
                bits_per_symbol: *bps,
            });
        }
        Self { entries }
    }

    /// Build a custom table, validating the level invariants.
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(invalid("mcs_table", "needs at least two levels"));
        }
        if entries[0].threshold != 0.0 || entries[0].bits_per_symbol != 0.0 {
            return Err(invalid("mcs_table", "level 1 must be outage (threshold 0, rate 0)"));
        }
        for (i, w) in entries.windows(2).enumerate() {
            if !(w[1].threshold > w[0].threshold) || !(w[1].bits_per_symbol > w[0].bits_per_symbol) {
                return Err(invalid("mcs_table", "thresholds and rates must strictly increase"));
            }
            if w[1].index != i + 2 {
                return Err(invalid("mcs_table", "indices must be 1..K in order"));
            }
        }
        if !entries.iter().all(|e| e.threshold.is_finite() && e.bits_per_symbol.is_finite()) {
            return Err(invalid("mcs_table", "non-finite entry"));
        }
        Ok(Self { entries })
    }

    /// Number of levels `K`, outage included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; a valid table has at least two levels.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The rows.
    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    /// Lower bound of 0-based level `k`; `+inf` for `k == K`.
    pub fn lower(&self, k: usize) -> f64 {
        self.entries.get(k).map_or(f64::INFINITY, |e| e.threshold)
    }

    /// Rate of 0-based level `k`.
    pub fn rate(&self, k: usize) -> f64 {
        self.entries[k].bits_per_symbol
    }

    /// Rates of all levels, 0-based.
    pub fn rates(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.bits_per_symbol).collect()
    }

    /// Rate of the top level.
    pub fn top_rate(&self) -> f64 {
        self.entries[self.entries.len() - 1].bits_per_symbol
    }

    /// 0-based level for an SNR. Negative or NaN input maps to outage.
    pub fn level_of(&self, snr: f64) -> usize {
        // upper bound search: count thresholds <= snr, minus one
        let n = self.entries.partition_point(|e| e.threshold <= snr);
        n.saturating_sub(1)
    }

    /// 1-based MCS index for an SNR.
    pub fn mcs_for_snr(&self, snr: f64) -> usize {
        self.level_of(snr) + 1
    }
}

impl Default for McsTable {
    fn default() -> Self {
        Self::lte()
    }
}

/// The three SNR classes used in the cluster studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SnrClass {
    /// 7 dB mean SNR.
    Poor,
    /// 16 dB mean SNR.
    Average,
    /// 23 dB mean SNR.
    Good,
}

impl SnrClass {
    /// All classes from worst to best.
    pub const ALL: [SnrClass; 3] = [SnrClass::Poor, SnrClass::Average, SnrClass::Good];

    /// Mean SNR in dB.
    pub fn mean_db(self) -> f64 {
        match self {
            SnrClass::Poor => 7.0,
            SnrClass::Average => 16.0,
            SnrClass::Good => 23.0,
        }
    }

    /// Mean SNR, linear.
    pub fn gamma(self) -> f64 {
        db_to_linear(self.mean_db())
    }
}

/// A user's long-term channel.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    /// Opaque identifier used in reports.
    pub user_id: usize,
    /// Mean SNR, linear.
    pub gamma: f64,
    /// Optional position in meters.
    pub position: Option<(f64, f64)>,
}

impl UserChannel {
    /// A user with the given id and linear mean SNR.
    pub fn new(user_id: usize, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { user_id, gamma, position: None })
    }

    /// Attach a position.
    pub fn at(mut self, x: f64, y: f64) -> Self {
        self.position = Some((x, y));
        self
    }
}

/// A partition of users `0..n` into non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    clusters: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl ClusterPartition {
    /// Validate that `clusters` partitions `0..n_users`.
    pub fn new(clusters: Vec<Vec<usize>>, n_users: usize) -> Result<Self> {
        let mut owner = alloc::vec![usize::MAX; n_users];
        for (c, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidPartition(alloc::format!("cluster {c} is empty")));
            }
            for &u in members {
                if u >= n_users {
                    return Err(Error::UnknownUser(u));
                }
                if owner[u] != usize::MAX {
                    return Err(Error::InvalidPartition(alloc::format!("user {u} appears twice")));
                }
                owner[u] = c;
            }
        }
        if let Some(u) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPartition(alloc::format!("user {u} is not covered")));
        }
        Ok(Self { clusters, owner })
    }

    /// Every user alone.
    pub fn singletons(n_users: usize) -> Self {
        Self {
            clusters: (0..n_users).map(|u| alloc::vec![u]).collect(),
            owner: (0..n_users).collect(),
        }
    }

    /// Consecutive clusters of the given sizes over users `0..sum(sizes)`.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut clusters = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &s in sizes {
            clusters.push((next..next + s).collect());
            next += s;
        }
        Self::new(clusters, next)
    }

    /// The clusters.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Members of cluster `c`.
    pub fn cluster(&self, c: usize) -> Result<&[usize]> {
        self.clusters.get(c).map(|v| v.as_slice()).ok_or(Error::UnknownCluster(c))
    }

    /// Cluster that contains user `u`.
    pub fn cluster_of(&self, u: usize) -> Result<usize> {
        self.owner.get(u).copied().ok_or(Error::UnknownUser(u))
    }

    /// Number of clusters.
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    /// True when there are no clusters (zero users).
    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Number of users.
    pub fn n_users(&self) -> usize {
        self.owner.len()
    }

    /// Weight `N_n / N` of cluster `c`.
    pub fn weight(&self, c: usize) -> Result<f64> {
        Ok(self.cluster(c)?.len() as f64 / self.n_users() as f64)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(domain("mean SNR must be positive and finite"))
    }
}

/// `P(C <= z)` for an exponential SNR with mean `gamma`.
pub fn snr_cdf(gamma: f64, z: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(z >= 0.0) {
        return Err(domain("SNR argument must be nonnegative"));
    }
    Ok(cdf_unchecked(gamma, z))
}

#[inline]
pub(crate) fn cdf_unchecked(gamma: f64, z: f64) -> f64 {
    if z == f64::INFINITY {
        1.0
    } else {
        -libm::expm1(-z / gamma)
    }
}

#[inline]
pub(crate) fn tail_unchecked(gamma: f64, z: f64) -> f64 {
    if z == f64::INFINITY {
        0.0
    } else {
        libm::exp(-z / gamma)
    }
}

/// Probability of each MCS level for a single user, 0-based.
///
/// `p_k = exp(-c_k/gamma) - exp(-c_{k+1}/gamma)`.
pub fn mcs_probabilities(gamma: f64, table: &McsTable) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    let k = table.len();
    Ok((0..k)
        .map(|i| tail_unchecked(gamma, table.lower(i)) - tail_unchecked(gamma, table.lower(i + 1)))
        .collect())
}

/// CDF of the max SNR across a set of users.
pub fn cluster_snr_cdf(gammas: &[f64], z: f64) -> Result<f64> {
    if gammas.is_empty() {
        return Err(domain("cluster has no members"));
    }
    for &g in gammas {
        check_gamma(g)?;
    }
    if !(z >= 0.0) {
        return Err(domain("SNR argument must be nonnegative"));
    }
    Ok(cluster_cdf_unchecked(gammas, z))
}

#[inline]
pub(crate) fn cluster_cdf_unchecked(gammas: &[f64], z: f64) -> f64 {
    gammas.iter().map(|&g| cdf_unchecked(g, z)).product()
}

/// `F(b) - F(a)` for the max over `gammas`, `a <= b`, without cancellation:
/// the product difference telescopes into nonnegative terms
/// `prod_{l<j} F_l(a) (F_j(b) - F_j(a)) prod_{l>j} F_l(b)`.
pub(crate) fn cluster_cdf_diff(gammas: &[f64], a: f64, b: f64) -> f64 {
    let mut prefix = 1.0;
    let mut total = 0.0;
    for (j, &g) in gammas.iter().enumerate() {
        let d = if b == f64::INFINITY {
            tail_unchecked(g, a)
        } else {
            tail_unchecked(g, a) * -libm::expm1(-(b - a) / g)
        };
        let suffix: f64 = gammas[j + 1..].iter().map(|&l| cdf_unchecked(l, b)).product();
        total += prefix * d * suffix;
        prefix *= cdf_unchecked(g, a);
    }
    total
}

/// Probability of each MCS level for the best member of a cluster.
pub fn cluster_mcs_probabilities(gammas: &[f64], table: &McsTable) -> Result<Vec<f64>> {
    cluster_snr_cdf(gammas, 0.0)?;
    let k = table.len();
    Ok((0..k).map(|i| cluster_cdf_diff(gammas, table.lower(i), table.lower(i + 1))).collect())
}

/// Inverse-CDF exponential draw: the SNR whose tail probability is `u`.
pub fn snr_from_uniform(gamma: f64, u: f64) -> f64 {
    -gamma * libm::log(u)
}

/// Draw an instantaneous SNR with mean `gamma`.
pub fn sample_snr<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    snr_from_uniform(gamma, crate::rng::uniform_open0(rng))
}
