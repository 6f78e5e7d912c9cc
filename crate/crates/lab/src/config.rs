//! TOML experiment configuration.
//!
//! Units at this boundary: SNR in dB, powers in mW, rates in Mb/s, times in
//! ms, energies per packet in µJ. Everything is converted to SI when the core
//! types are built.

use std::fmt;
use std::path::Path;

use d2d_core::analytics::{ClusterScheduler, FrameBudget};
use d2d_core::channel::{db_to_linear, ClusterPartition, McsTable, SnrClass};
use d2d_core::coalition::ValueMetric;
use d2d_core::modeselect::{LinkParams, ScenarioShape, Tolerances, UtilityParams};
use d2d_core::power::PowerParams;
use d2d_core::simkit::{DoreConfig, RelayModel, ScenarioConfig, SchedulerKind, Traffic};
use d2d_core::tiebreak::TreeShape;
use serde::{Deserialize, Serialize};

/// One offending key and what is wrong with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    /// Dotted key, e.g. `simulate.load_mbps`.
    pub key: String,
    /// What is wrong.
    pub message: String,
}

/// Every field-level problem found in a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", e.key, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    /// True if some error names `key`.
    pub fn mentions(&self, key: &str) -> bool {
        self.0.iter().any(|e| e.key == key)
    }
}

fn field(key: &str, message: impl Into<String>) -> FieldError {
    FieldError { key: key.to_string(), message: message.into() }
}

/// Whole configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LabConfig {
    pub run: RunSection,
    pub cell: CellSection,
    pub simulate: SimulateSection,
    pub power: PowerSection,
    pub coalition: CoalitionSection,
    pub tiebreak: TiebreakSection,
    pub modeselect: ModeselectSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub replications: usize,
    pub frames: u64,
    pub trace: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 1, replications: 1, frames: 10_000, trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    /// Mean SNR per user. Empty means `users` users cycling 7/16/23 dB.
    pub snr_db: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    pub cluster_sizes: Vec<usize>,
    /// Explicit clusters; overrides `cluster_sizes` when non-empty.
    pub clusters: Vec<Vec<usize>>,
    pub symbols_per_frame: f64,
    pub frame_ms: f64,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            snr_db: Vec::new(),
            users: None,
            cluster_sizes: vec![2, 4, 6, 8],
            clusters: Vec::new(),
            symbols_per_frame: 16_800.0,
            frame_ms: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// Any of et, pf, mr, mr-wrr, clwrr, clmr.
    pub schedulers: Vec<String>,
    pub pf_time_constant: f64,
    /// Tie weights per connection for mr-wrr; empty means equal.
    pub mr_wrr_weights: Vec<f64>,
    /// Run et/pf/mr/mr-wrr over single-user connections.
    pub unclustered_baselines: bool,
    /// `full` or `poisson`.
    pub traffic: String,
    pub load_mbps: f64,
    /// Relative per-user share of the load; empty splits it equally.
    pub load_weights: Vec<f64>,
    pub buffer_packets: usize,
    pub packet_bits: f64,
    pub relay_delay_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relay_rate_mbps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dore_threshold_ms: Option<f64>,
    pub dore_smoothing: f64,
    pub energy: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            schedulers: vec!["clwrr".into(), "clmr".into(), "et".into(), "pf".into(), "mr".into()],
            pf_time_constant: 1000.0,
            mr_wrr_weights: Vec::new(),
            unclustered_baselines: true,
            traffic: "full".into(),
            load_mbps: 50.0,
            load_weights: Vec::new(),
            buffer_packets: 500,
            packet_bits: 12_000.0,
            relay_delay_ms: 0.0,
            relay_rate_mbps: None,
            dore_threshold_ms: None,
            dore_smoothing: 0.1,
            energy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerSection {
    pub beta_lte_mw: f64,
    pub beta_lte_idle_mw: f64,
    /// Receive cost in mW per Mb/s.
    pub alpha_rx_mw_per_mbps: f64,
    pub beta_wifi_mw: f64,
    pub beta_wifi_idle_mw: f64,
    pub zeta_tx_mw: f64,
    pub zeta_rx_mw: f64,
    pub kappa_tx_uj: f64,
    pub kappa_rx_uj: f64,
    pub packet_bits: f64,
    pub wifi_rate_mbps: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        let p = PowerParams::default();
        Self {
            beta_lte_mw: p.beta_lte * 1e3,
            beta_lte_idle_mw: p.beta_lte_idle * 1e3,
            alpha_rx_mw_per_mbps: p.alpha_rx * 1e3 * 1e6,
            beta_wifi_mw: p.beta_wifi * 1e3,
            beta_wifi_idle_mw: p.beta_wifi_idle * 1e3,
            zeta_tx_mw: p.zeta_tx * 1e3,
            zeta_rx_mw: p.zeta_rx * 1e3,
            kappa_tx_uj: p.kappa_tx * 1e6,
            kappa_rx_uj: p.kappa_rx * 1e6,
            packet_bits: p.packet_len,
            wifi_rate_mbps: p.r_wifi / 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoalitionSection {
    /// Run merge-and-split inside the analytics experiment.
    pub enabled: bool,
    /// `energy` or `throughput`.
    pub metric: String,
    /// `clwrr` or `clmr`.
    pub scheduler: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max_m: Option<f64>,
    /// Users are dropped uniformly in a disc of this radius.
    pub radius_m: f64,
    /// `pf-sim` or `rr-analytic`.
    pub baseline: String,
    pub baseline_frames: u64,
}

impl Default for CoalitionSection {
    fn default() -> Self {
        Self {
            enabled: false,
            metric: "energy".into(),
            scheduler: "clwrr".into(),
            d_max_m: Some(50.0),
            radius_m: 100.0,
            baseline: "pf-sim".into(),
            baseline_frames: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TiebreakSection {
    pub instances: usize,
    pub connections_min: usize,
    pub connections_max: usize,
    pub members_min: usize,
    pub members_max: usize,
    /// Member classes are drawn uniformly from these means.
    pub classes_db: Vec<f64>,
    pub lp: bool,
    /// `left-spine` or `balanced`.
    pub tree: String,
    /// Monte-Carlo frames beyond the exact-sum cap.
    pub mc_frames: u64,
}

impl Default for TiebreakSection {
    fn default() -> Self {
        Self {
            instances: 100,
            connections_min: 2,
            connections_max: 6,
            members_min: 1,
            members_max: 10,
            classes_db: vec![7.0, 16.0, 23.0],
            lp: true,
            tree: "left-spine".into(),
            mc_frames: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeselectSection {
    pub instances: usize,
    pub pairs: usize,
    pub cellular: usize,
    pub radius_m: f64,
    pub d2d_max_m: f64,
    pub shadowing_db: f64,
    pub overlay_fraction: f64,
    pub alpha: f64,
    pub interval_s: f64,
    pub enb_tolerance_dbm: f64,
    pub cellular_tolerance_dbm: f64,
    pub d2d_tolerance_dbm: f64,
}

impl Default for ModeselectSection {
    fn default() -> Self {
        let s = ScenarioShape::default();
        let u = UtilityParams::default();
        Self {
            instances: 50,
            pairs: s.pairs,
            cellular: s.cellular,
            radius_m: s.radius,
            d2d_max_m: s.d2d_max,
            shadowing_db: s.shadowing_db,
            overlay_fraction: u.overlay_fraction,
            alpha: u.alpha,
            interval_s: u.interval,
            enb_tolerance_dbm: -90.0,
            cellular_tolerance_dbm: -90.0,
            d2d_tolerance_dbm: -70.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `users`, `load`, `overlay` or `alpha`.
    pub axis: String,
    pub values: Vec<f64>,
    /// Cluster size used when sweeping the user count.
    #[serde(default = "default_cluster_size")]
    pub cluster_size: usize,
}

fn default_cluster_size() -> usize {
    4
}

/// What a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Users,
    Load,
    Overlay,
    Alpha,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Users => "users",
            SweepAxis::Load => "load",
            SweepAxis::Overlay => "overlay",
            SweepAxis::Alpha => "alpha",
        }
    }
}

fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn positive(errs: &mut Vec<FieldError>, key: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(field(key, format!("must be positive, got {v}")));
    }
}

fn nonnegative(errs: &mut Vec<FieldError>, key: &str, v: f64) {
    if !(v >= 0.0 && v.is_finite()) {
        errs.push(field(key, format!("must be nonnegative, got {v}")));
    }
}

/// Scheduler name to kind; `connections` sizes the mr-wrr weights.
pub fn parse_scheduler(name: &str, sim: &SimulateSection, connections: usize) -> Option<SchedulerKind> {
    Some(match name {
        "et" => SchedulerKind::EqualTime,
        "pf" => SchedulerKind::ProportionalFair { time_constant: sim.pf_time_constant },
        "mr" => SchedulerKind::MaxRate,
        "mr-wrr" => SchedulerKind::MaxRateWrr {
            weights: if sim.mr_wrr_weights.is_empty() { vec![1.0; connections] } else { sim.mr_wrr_weights.clone() },
        },
        "clwrr" => SchedulerKind::ClusterWrr,
        "clmr" => SchedulerKind::ClusterMaxRate,
        _ => return None,
    })
}

fn is_cluster_scheduler(name: &str) -> bool {
    name == "clwrr" || name == "clmr"
}

impl LabConfig {
    /// Parse TOML text and validate it.
    pub fn from_toml(text: &str) -> Result<Self, ConfigErrors> {
        let cfg: LabConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // toml names the unknown or mistyped key in its message; pull it out for the key slot
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<file>")
                .to_string();
            let at = e.span().map(|s| format!(" (byte {})", s.start)).unwrap_or_default();
            ConfigErrors(vec![field(&key, format!("{msg}{at}"))])
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read, parse and validate a file.
    pub fn load(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigErrors(vec![field("<file>", format!("{}: {e}", path.display()))]))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML form; parsing it gives back `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Every field-level problem at once.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut e = Vec::new();
        if self.run.seed > i64::MAX as u64 {
            e.push(field("run.seed", format!("must be at most {} to fit a TOML integer", i64::MAX)));
        }
        if self.run.replications < 1 {
            e.push(field("run.replications", "must be at least 1"));
        }
        if self.run.frames < 1 {
            e.push(field("run.frames", "must be at least 1"));
        }

        let c = &self.cell;
        for (i, d) in c.snr_db.iter().enumerate() {
            if !d.is_finite() {
                e.push(field("cell.snr_db", format!("entry {i} is not finite")));
            }
        }
        if let Some(u) = c.users {
            if !c.snr_db.is_empty() && u != c.snr_db.len() {
                e.push(field("cell.users", format!("{u} does not match the {} entries of cell.snr_db", c.snr_db.len())));
            }
            if u == 0 {
                e.push(field("cell.users", "must be at least 1"));
            }
        }
        positive(&mut e, "cell.symbols_per_frame", c.symbols_per_frame);
        positive(&mut e, "cell.frame_ms", c.frame_ms);
        let n = self.n_users();
        if n > 0 {
            if c.clusters.is_empty() {
                let total: usize = c.cluster_sizes.iter().sum();
                if c.cluster_sizes.contains(&0) || total != n {
                    e.push(field("cell.cluster_sizes", format!("positive sizes summing to {n} users required, got {:?}", c.cluster_sizes)));
                }
            } else if let Err(err) = ClusterPartition::new(c.clusters.clone(), n) {
                e.push(field("cell.clusters", err.to_string()));
            }
        }

        let s = &self.simulate;
        if s.schedulers.is_empty() {
            e.push(field("simulate.schedulers", "at least one scheduler required"));
        }
        for name in &s.schedulers {
            if parse_scheduler(name, s, 1).is_none() {
                e.push(field("simulate.schedulers", format!("unknown scheduler {name:?} (et, pf, mr, mr-wrr, clwrr, clmr)")));
            }
        }
        positive(&mut e, "simulate.pf_time_constant", s.pf_time_constant);
        if s.mr_wrr_weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            e.push(field("simulate.mr_wrr_weights", "weights must be nonnegative"));
        }
        if s.traffic != "full" && s.traffic != "poisson" {
            e.push(field("simulate.traffic", format!("expected \"full\" or \"poisson\", got {:?}", s.traffic)));
        }
        nonnegative(&mut e, "simulate.load_mbps", s.load_mbps);
        if !s.load_weights.is_empty() {
            if s.load_weights.len() != n {
                e.push(field("simulate.load_weights", format!("need {n} entries, got {}", s.load_weights.len())));
            }
            if s.load_weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || s.load_weights.iter().sum::<f64>() <= 0.0 {
                e.push(field("simulate.load_weights", "weights must be nonnegative with a positive sum"));
            }
        }
        if s.buffer_packets < 1 {
            e.push(field("simulate.buffer_packets", "must be at least 1"));
        }
        positive(&mut e, "simulate.packet_bits", s.packet_bits);
        nonnegative(&mut e, "simulate.relay_delay_ms", s.relay_delay_ms);
        if let Some(r) = s.relay_rate_mbps {
            positive(&mut e, "simulate.relay_rate_mbps", r);
        }
        if let Some(t) = s.dore_threshold_ms {
            if !(t >= 0.0) {
                e.push(field("simulate.dore_threshold_ms", "must be nonnegative"));
            }
        }
        if !(s.dore_smoothing > 0.0 && s.dore_smoothing <= 1.0) {
            e.push(field("simulate.dore_smoothing", "must lie in (0, 1]"));
        }

        if let Err(err) = self.power_params().validate() {
            e.push(field("power", err.to_string()));
        }

        let co = &self.coalition;
        if co.metric != "energy" && co.metric != "throughput" {
            e.push(field("coalition.metric", "expected \"energy\" or \"throughput\""));
        }
        if !is_cluster_scheduler(&co.scheduler) {
            e.push(field("coalition.scheduler", "expected \"clwrr\" or \"clmr\""));
        }
        if let Some(d) = co.d_max_m {
            positive(&mut e, "coalition.d_max_m", d);
        }
        positive(&mut e, "coalition.radius_m", co.radius_m);
        if co.baseline != "pf-sim" && co.baseline != "rr-analytic" {
            e.push(field("coalition.baseline", "expected \"pf-sim\" or \"rr-analytic\""));
        }
        if co.baseline_frames < 1 {
            e.push(field("coalition.baseline_frames", "must be at least 1"));
        }

        let t = &self.tiebreak;
        if t.connections_min < 2 || t.connections_min > t.connections_max {
            e.push(field("tiebreak.connections_min", "need 2 <= connections_min <= connections_max"));
        }
        if t.connections_max > 20 {
            e.push(field("tiebreak.connections_max", "at most 20 connections"));
        }
        if t.members_min < 1 || t.members_min > t.members_max {
            e.push(field("tiebreak.members_min", "need 1 <= members_min <= members_max"));
        }
        if t.classes_db.is_empty() || t.classes_db.iter().any(|d| !d.is_finite()) {
            e.push(field("tiebreak.classes_db", "at least one finite class mean required"));
        }
        if t.tree != "left-spine" && t.tree != "balanced" {
            e.push(field("tiebreak.tree", "expected \"left-spine\" or \"balanced\""));
        }

        let m = &self.modeselect;
        if m.pairs < 1 {
            e.push(field("modeselect.pairs", "must be at least 1"));
        }
        positive(&mut e, "modeselect.radius_m", m.radius_m);
        positive(&mut e, "modeselect.d2d_max_m", m.d2d_max_m);
        nonnegative(&mut e, "modeselect.shadowing_db", m.shadowing_db);
        if !(0.0..1.0).contains(&m.overlay_fraction) {
            e.push(field("modeselect.overlay_fraction", "must lie in [0, 1)"));
        }
        nonnegative(&mut e, "modeselect.alpha", m.alpha);
        positive(&mut e, "modeselect.interval_s", m.interval_s);

        if let Some(sw) = &self.sweep {
            if self.sweep_axis().is_none() {
                e.push(field("sweep.axis", format!("expected users, load, overlay or alpha, got {:?}", sw.axis)));
            }
            if sw.values.is_empty() {
                e.push(field("sweep.values", "at least one value required"));
            }
            if sw.cluster_size < 1 {
                e.push(field("sweep.cluster_size", "must be at least 1"));
            }
            for v in &sw.values {
                let bad = match self.sweep_axis() {
                    Some(SweepAxis::Users) => !(*v >= 1.0 && v.fract() == 0.0),
                    Some(SweepAxis::Load) | Some(SweepAxis::Alpha) => !(*v >= 0.0 && v.is_finite()),
                    Some(SweepAxis::Overlay) => !(0.0..1.0).contains(v),
                    None => false,
                };
                if bad {
                    e.push(field("sweep.values", format!("{v} is out of range for this axis")));
                }
            }
        }

        if e.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(e))
        }
    }

    /// Check the parts a sweep needs.
    pub fn require_sweep(&self) -> Result<&SweepSection, ConfigErrors> {
        self.sweep.as_ref().ok_or_else(|| ConfigErrors(vec![field("sweep.axis", "missing: the sweep experiment needs a [sweep] section")]))
    }

    pub fn sweep_axis(&self) -> Option<SweepAxis> {
        Some(match self.sweep.as_ref()?.axis.as_str() {
            "users" => SweepAxis::Users,
            "load" => SweepAxis::Load,
            "overlay" => SweepAxis::Overlay,
            "alpha" => SweepAxis::Alpha,
            _ => return None,
        })
    }

    pub fn n_users(&self) -> usize {
        if self.cell.snr_db.is_empty() {
            self.cell.users.unwrap_or(20)
        } else {
            self.cell.snr_db.len()
        }
    }

    /// Mean SNR per user in dB.
    pub fn snr_db(&self) -> Vec<f64> {
        if self.cell.snr_db.is_empty() {
            class_cycle_db(self.n_users())
        } else {
            self.cell.snr_db.clone()
        }
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.snr_db().iter().map(|d| db_to_linear(*d)).collect()
    }

    pub fn partition(&self) -> ClusterPartition {
        if self.cell.clusters.is_empty() {
            ClusterPartition::from_sizes(&self.cell.cluster_sizes).expect("validated sizes")
        } else {
            ClusterPartition::new(self.cell.clusters.clone(), self.n_users()).expect("validated clusters")
        }
    }

    pub fn budget(&self) -> FrameBudget {
        FrameBudget::new(self.cell.symbols_per_frame, self.cell.frame_ms * 1e-3).expect("validated budget")
    }

    pub fn power_params(&self) -> PowerParams {
        let p = &self.power;
        PowerParams {
            beta_lte: p.beta_lte_mw * 1e-3,
            beta_lte_idle: p.beta_lte_idle_mw * 1e-3,
            alpha_rx: p.alpha_rx_mw_per_mbps * 1e-3 / 1e6,
            beta_wifi: p.beta_wifi_mw * 1e-3,
            beta_wifi_idle: p.beta_wifi_idle_mw * 1e-3,
            zeta_tx: p.zeta_tx_mw * 1e-3,
            zeta_rx: p.zeta_rx_mw * 1e-3,
            kappa_tx: p.kappa_tx_uj * 1e-6,
            kappa_rx: p.kappa_rx_uj * 1e-6,
            packet_len: p.packet_bits,
            r_wifi: p.wifi_rate_mbps * 1e6,
        }
    }

    pub fn coalition_scheduler(&self) -> ClusterScheduler {
        if self.coalition.scheduler == "clmr" {
            ClusterScheduler::ClMr
        } else {
            ClusterScheduler::ClWrr
        }
    }

    pub fn coalition_metric(&self) -> ValueMetric {
        if self.coalition.metric == "throughput" {
            ValueMetric::Throughput
        } else {
            ValueMetric::EnergyEfficiency
        }
    }

    pub fn tree_shape(&self) -> TreeShape {
        if self.tiebreak.tree == "balanced" {
            TreeShape::Balanced
        } else {
            TreeShape::LeftSpine
        }
    }

    /// Simulator input for one named scheduler on the configured cell.
    pub fn scenario(&self, scheduler: &str) -> ScenarioConfig {
        self.scenario_for(self.gammas(), self.partition(), scheduler, self.simulate.load_mbps)
    }

    /// Simulator input for given users, clustering and aggregate load.
    pub fn scenario_for(&self, gammas: Vec<f64>, partition: ClusterPartition, scheduler: &str, load_mbps: f64) -> ScenarioConfig {
        let s = &self.simulate;
        let n = gammas.len();
        let partition =
            if s.unclustered_baselines && !is_cluster_scheduler(scheduler) { ClusterPartition::singletons(n) } else { partition };
        let mut cfg = ScenarioConfig::new(gammas, partition);
        cfg.scheduler = parse_scheduler(scheduler, s, cfg.partition.len()).expect("validated scheduler");
        cfg.frames = self.run.frames;
        cfg.seed = self.run.seed;
        cfg.trace = self.run.trace;
        cfg.buffer_packets = s.buffer_packets;
        cfg.packet_bits = s.packet_bits;
        cfg.budget = self.budget();
        cfg.table = McsTable::lte();
        cfg.relay = RelayModel { base_delay: s.relay_delay_ms * 1e-3, rate: s.relay_rate_mbps.map(|r| r * 1e6) };
        cfg.dore = s.dore_threshold_ms.map(|t| DoreConfig { thresholds: vec![t * 1e-3; n], smoothing: s.dore_smoothing });
        if s.traffic == "poisson" {
            let w: Vec<f64> = if s.load_weights.len() == n { s.load_weights.clone() } else { vec![1.0; n] };
            let total: f64 = w.iter().sum();
            cfg.traffic = Traffic::Poisson { rates: w.iter().map(|x| load_mbps * 1e6 * x / total).collect() };
        }
        if s.energy {
            cfg.power = Some(self.power_params());
        }
        cfg
    }

    pub fn mode_shape(&self) -> ScenarioShape {
        let m = &self.modeselect;
        ScenarioShape { cellular: m.cellular, pairs: m.pairs, radius: m.radius_m, d2d_max: m.d2d_max_m, shadowing_db: m.shadowing_db }
    }

    pub fn utility_params(&self) -> UtilityParams {
        let m = &self.modeselect;
        UtilityParams { alpha: m.alpha, interval: m.interval_s, overlay_fraction: m.overlay_fraction, ..UtilityParams::default() }
    }

    pub fn tolerances(&self) -> Tolerances {
        let m = &self.modeselect;
        Tolerances {
            enb: dbm_to_w(m.enb_tolerance_dbm),
            cellular: dbm_to_w(m.cellular_tolerance_dbm),
            d2d: dbm_to_w(m.d2d_tolerance_dbm),
        }
    }

    pub fn link_params(&self) -> LinkParams {
        LinkParams::default()
    }
}

/// `n` users cycling through the poor, average and good classes.
pub fn class_cycle_db(n: usize) -> Vec<f64> {
    (0..n).map(|u| SnrClass::ALL[u % 3].mean_db()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        let c = LabConfig::from_toml("").unwrap();
        assert_eq!(c, LabConfig::default());
        assert_eq!(c.n_users(), 20);
    }

    #[test]
    fn several_errors_are_reported_together() {
        let e = LabConfig::from_toml("[run]\nreplications = 0\n[simulate]\ntraffic = \"bursty\"\n").unwrap_err();
        assert!(e.mentions("run.replications"));
        assert!(e.mentions("simulate.traffic"));
    }

    #[test]
    fn mw_are_converted() {
        let c = LabConfig::from_toml("[power]\nbeta_lte_mw = 1000.0\nwifi_rate_mbps = 11.0").unwrap();
        let p = c.power_params();
        assert_eq!(p.beta_lte, 1.0);
        assert_eq!(p.r_wifi, 11e6);
    }

    #[test]
    fn tolerances_in_dbm() {
        assert!((dbm_to_w(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_w(-90.0) - 1e-12).abs() < 1e-26);
    }
}
