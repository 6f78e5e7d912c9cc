//! Frame-level Monte-Carlo simulator of a clustered cell.
//!
//! Each frame draws every user's SNR, lets the scheduler pick a connection
//! (cluster), and moves bits through the queues. The cluster head, the member
//! with the highest SNR, receives the frame at its MCS and relays to the other
//! members over D2D.
//!
//! Channel draws, scheduler decisions and traffic arrivals use separate
//! generator streams derived from the seed, so two runs that differ only in
//! the scheduler see the same channel realization.

pub mod measure;
pub mod scheduler;

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::analytics::FrameBudget;
use crate::channel::{cluster_mcs_probabilities, ClusterPartition, McsTable};
use crate::error::invalid;
use crate::power::{member_report, PowerParams, UserEnergyReport};
use crate::rng::{substream, uniform_open0, SimRng};
use crate::tiebreak::jain_index;
use crate::{Error, Result};

pub use measure::{percentile, summarize, wald_interval, DelayHistogram, Interval, Summary, Z95};
pub use scheduler::{FrameView, Scheduler, SchedulerKind};

/// Offered traffic.
#[derive(Debug, Clone, PartialEq)]
pub enum Traffic {
    /// Every queue always holds data; service is fluid.
    FullBuffer,
    /// Poisson packet arrivals, one rate (bits/s) per user.
    Poisson {
        /// Mean offered load per user (bits/s).
        rates: Vec<f64>,
    },
}

/// D2D relay hop between the head and the destination member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayModel {
    /// Fixed delay added to every relayed packet (s).
    pub base_delay: f64,
    /// Optional relay capacity (bits/s); relayed packets then queue FIFO.
    pub rate: Option<f64>,
}

impl Default for RelayModel {
    fn default() -> Self {
        Self { base_delay: 0.0, rate: None }
    }
}

/// Delay-aware relay use.
#[derive(Debug, Clone, PartialEq)]
pub struct DoreConfig {
    /// Per-user hop-delay threshold (s); infinity means always relay.
    pub thresholds: Vec<f64>,
    /// EWMA smoothing of the hop-delay estimate.
    pub smoothing: f64,
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Mean SNR per user (linear).
    pub gammas: Vec<f64>,
    /// Optional user positions (m), carried for reporting.
    pub positions: Option<Vec<(f64, f64)>>,
    /// Clusters; each is one scheduled connection.
    pub partition: ClusterPartition,
    /// Scheduler.
    pub scheduler: SchedulerKind,
    /// Offered traffic.
    pub traffic: Traffic,
    /// Frames to simulate.
    pub frames: u64,
    /// Generator seed.
    pub seed: u64,
    /// Queue capacity per user (packets).
    pub buffer_packets: usize,
    /// Packet length (bits).
    pub packet_bits: f64,
    /// D2D hop.
    pub relay: RelayModel,
    /// Delay-aware relay use; `None` always relays.
    pub dore: Option<DoreConfig>,
    /// MCS table.
    pub table: McsTable,
    /// Symbols and duration of a frame.
    pub budget: FrameBudget,
    /// Record one trace line per frame.
    pub trace: bool,
    /// Power constants for the energy summary; `None` skips it.
    pub power: Option<PowerParams>,
}

impl ScenarioConfig {
    /// Fully backlogged CL(WRR) run with default constants.
    pub fn new(gammas: Vec<f64>, partition: ClusterPartition) -> Self {
        Self {
            gammas,
            positions: None,
            partition,
            scheduler: SchedulerKind::ClusterWrr,
            traffic: Traffic::FullBuffer,
            frames: 10_000,
            seed: 0,
            buffer_packets: 500,
            packet_bits: 12_000.0,
            relay: RelayModel::default(),
            dore: None,
            table: McsTable::lte(),
            budget: FrameBudget::default(),
            trace: false,
            power: None,
        }
    }

    /// Check every field.
    pub fn validate(&self) -> Result<()> {
        let n = self.gammas.len();
        if n == 0 {
            return Err(invalid("users", "at least one user"));
        }
        if self.gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(invalid("users", "mean SNR must be positive and finite"));
        }
        if self.partition.n_users() != n {
            return Err(invalid("partition", "must cover exactly the configured users"));
        }
        if self.frames == 0 {
            return Err(invalid("frames", "must be at least 1"));
        }
        if self.buffer_packets == 0 {
            return Err(invalid("buffer_packets", "must be at least 1"));
        }
        if !(self.packet_bits.is_finite() && self.packet_bits > 0.0) {
            return Err(invalid("packet_bits", "must be positive"));
        }
        if let Some(p) = &self.positions {
            if p.len() != n {
                return Err(invalid("positions", "one position per user"));
            }
        }
        match &self.scheduler {
            SchedulerKind::ProportionalFair { time_constant } if !(*time_constant >= 1.0) => {
                return Err(invalid("time_constant", "must be at least 1 frame"));
            }
            SchedulerKind::MaxRateWrr { weights }
                if weights.len() != self.partition.len() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) =>
            {
                return Err(invalid("weights", "one nonnegative weight per connection"));
            }
            _ => {}
        }
        if let Traffic::Poisson { rates } = &self.traffic {
            if rates.len() != n || rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                return Err(invalid("rates", "one nonnegative finite rate per user"));
            }
        }
        if !(self.relay.base_delay.is_finite() && self.relay.base_delay >= 0.0) {
            return Err(invalid("relay.base_delay", "must be nonnegative"));
        }
        if let Some(r) = self.relay.rate {
            if !(r.is_finite() && r > 0.0) {
                return Err(invalid("relay.rate", "must be positive"));
            }
        }
        if let Some(d) = &self.dore {
            if d.thresholds.len() != n || d.thresholds.iter().any(|t| !(*t >= 0.0)) {
                return Err(invalid("thresholds", "one nonnegative threshold per user"));
            }
            if !(d.smoothing > 0.0 && d.smoothing <= 1.0) {
                return Err(invalid("smoothing", "must lie in (0, 1]"));
            }
        }
        if let Some(p) = &self.power {
            p.validate()?;
        }
        Ok(())
    }
}

/// One frame of the optional trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// Frame index.
    pub frame: u64,
    /// Connection picked first, if any.
    pub served: Option<usize>,
    /// Its MCS level.
    pub level: usize,
    /// Packets queued at the end of the frame.
    pub queued: u64,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    /// Frames simulated.
    pub frames: u64,
    /// Simulated time (s).
    pub duration: f64,
    /// Delivered bits/s per user.
    pub user_throughput: Vec<f64>,
    /// Delivered bits/s per cluster.
    pub cluster_throughput: Vec<f64>,
    /// Frames each connection was picked first.
    pub served_frames: Vec<u64>,
    /// Frames each user was head of the first-picked cluster.
    pub head_frames: Vec<u64>,
    /// Cellular bits/s each user received as head, own traffic included.
    pub relay_rate: Vec<f64>,
    /// Bits/s each user received over D2D.
    pub d2d_rate: Vec<f64>,
    /// Packets offered per user.
    pub offered_packets: Vec<u64>,
    /// Packets delivered per user.
    pub delivered_packets: Vec<u64>,
    /// Packets dropped at a full buffer per user.
    pub dropped_packets: Vec<u64>,
    /// Packets still queued at the end per user.
    pub queued_packets: Vec<u64>,
    /// Delivered packet delays.
    pub delays: DelayHistogram,
    /// Packets that crossed the D2D hop.
    pub relayed_packets: u64,
    /// Summed D2D hop delay of those packets (s).
    pub relay_delay_sum: f64,
    /// Frames each user spent on its own link because of the delay rule.
    pub fallback_frames: Vec<u64>,
    /// Energy per user from the measured rates.
    pub energy: Option<Vec<UserEnergyReport>>,
    /// Per-frame records when tracing.
    pub trace: Vec<TraceRecord>,
}

impl SimReport {
    /// Sum of user throughputs (bits/s).
    pub fn aggregate_throughput(&self) -> f64 {
        self.user_throughput.iter().sum()
    }

    /// Delivered over offered packets; 1 when nothing was offered.
    pub fn delivery_ratio(&self) -> f64 {
        let offered: u64 = self.offered_packets.iter().sum();
        if offered == 0 {
            return 1.0;
        }
        self.delivered_packets.iter().sum::<u64>() as f64 / offered as f64
    }

    /// Fraction of frames `user` was head.
    pub fn head_frequency(&self, user: usize) -> f64 {
        self.head_frames[user] as f64 / self.frames as f64
    }

    /// Jain index over users.
    pub fn jain_users(&self) -> f64 {
        jain_index(&self.user_throughput).unwrap_or(1.0)
    }

    /// Jain index over clusters.
    pub fn jain_clusters(&self) -> f64 {
        jain_index(&self.cluster_throughput).unwrap_or(1.0)
    }

    /// Mean D2D hop delay of relayed packets (s).
    pub fn mean_relay_delay(&self) -> Option<f64> {
        (self.relayed_packets > 0).then(|| self.relay_delay_sum / self.relayed_packets as f64)
    }

    /// offered = delivered + queued + dropped, per user.
    pub fn is_conserved(&self) -> bool {
        (0..self.offered_packets.len()).all(|u| {
            self.offered_packets[u] == self.delivered_packets[u] + self.queued_packets[u] + self.dropped_packets[u]
        })
    }
}

struct Queue {
    arrivals: VecDeque<u64>,
    head_left: f64,
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    members: Vec<Vec<usize>>,
    scheduler: Scheduler,
    decide: SimRng,
    arrive: SimRng,
    poisson: Vec<Option<Poisson<f64>>>,
    queues: Vec<Queue>,
    // frame scratch
    head: Vec<usize>,
    best: Vec<f64>,
    levels: Vec<usize>,
    frame_bits: Vec<f64>,
    eligible: Vec<bool>,
    served: Vec<f64>,
    // delay rule
    estimate: Vec<f64>,
    relay_free: Vec<f64>,
    // tallies
    delivered_bits: Vec<f64>,
    served_frames: Vec<u64>,
    head_frames: Vec<u64>,
    head_bits: Vec<f64>,
    d2d_bits: Vec<f64>,
    offered: Vec<u64>,
    delivered: Vec<u64>,
    dropped: Vec<u64>,
    delays: DelayHistogram,
    relayed: u64,
    relay_delay_sum: f64,
    fallback: Vec<u64>,
    trace: Vec<TraceRecord>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a ScenarioConfig, kind: &SchedulerKind) -> Result<Self> {
        let n = cfg.gammas.len();
        let members: Vec<Vec<usize>> = cfg.partition.clusters().to_vec();
        let nc = members.len();
        let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
        let symbols = cfg.budget.symbols_per_frame;
        let mut mean_bits = Vec::with_capacity(nc);
        for m in &members {
            let g: Vec<f64> = m.iter().map(|&u| cfg.gammas[u]).collect();
            let pi = cluster_mcs_probabilities(&g, &cfg.table)?;
            mean_bits.push(symbols * pi.iter().enumerate().map(|(k, p)| p * cfg.table.rate(k)).sum::<f64>());
        }
        let poisson = match &cfg.traffic {
            Traffic::FullBuffer => alloc::vec![None; n],
            Traffic::Poisson { rates } => rates
                .iter()
                .map(|r| {
                    let lambda = r * cfg.budget.frame_duration / cfg.packet_bits;
                    if lambda > 0.0 {
                        Poisson::new(lambda).map(Some).map_err(|_| invalid("rates", "too large for the arrival sampler"))
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let hop0 = cfg.relay.base_delay + cfg.relay.rate.map_or(0.0, |r| cfg.packet_bits / r);
        Ok(Self {
            cfg,
            scheduler: Scheduler::new(kind, &sizes, &mean_bits),
            members,
            decide: substream(cfg.seed, 1),
            arrive: substream(cfg.seed, 2),
            poisson,
            queues: (0..n).map(|_| Queue { arrivals: VecDeque::new(), head_left: cfg.packet_bits }).collect(),
            head: alloc::vec![0; nc],
            best: alloc::vec![0.0; nc],
            levels: alloc::vec![0; nc],
            frame_bits: alloc::vec![0.0; nc],
            eligible: alloc::vec![true; nc],
            served: alloc::vec![0.0; nc],
            estimate: alloc::vec![hop0; nc],
            relay_free: alloc::vec![0.0; nc],
            delivered_bits: alloc::vec![0.0; n],
            served_frames: alloc::vec![0; nc],
            head_frames: alloc::vec![0; n],
            head_bits: alloc::vec![0.0; n],
            d2d_bits: alloc::vec![0.0; n],
            offered: alloc::vec![0; n],
            delivered: alloc::vec![0; n],
            dropped: alloc::vec![0; n],
            delays: DelayHistogram::default(),
            relayed: 0,
            relay_delay_sum: 0.0,
            fallback: alloc::vec![0; n],
            trace: Vec::new(),
        })
    }

    fn step(&mut self, frame: u64, snr: &[f64]) {
        let cfg = self.cfg;
        let full = matches!(cfg.traffic, Traffic::FullBuffer);
        let symbols = cfg.budget.symbols_per_frame;
        for (c, m) in self.members.iter().enumerate() {
            let mut h = m[0];
            for &u in &m[1..] {
                if snr[u] > snr[h] {
                    h = u;
                }
            }
            self.head[c] = h;
            self.best[c] = snr[h];
            self.levels[c] = cfg.table.level_of(snr[h]);
            self.frame_bits[c] = symbols * cfg.table.rate(self.levels[c]);
        }
        if !full {
            self.arrivals(frame);
            for (c, m) in self.members.iter().enumerate() {
                self.eligible[c] = m.iter().any(|&u| !self.queues[u].arrivals.is_empty());
            }
            self.update_estimates(frame);
        }
        self.served.iter_mut().for_each(|s| *s = 0.0);
        let view = FrameView { levels: &self.levels, best_snr: &self.best, frame_bits: &self.frame_bits, eligible: &self.eligible };
        let pick = self.scheduler.select(&view, &mut self.decide);
        if let Some(c) = pick {
            self.served_frames[c] += 1;
            self.head_frames[self.head[c]] += 1;
            if full {
                self.serve_fluid(c);
            } else {
                let order = self.scheduler.leftover_order(&view, c);
                let mut left = symbols;
                for c in core::iter::once(c).chain(order) {
                    if left <= 0.0 {
                        break;
                    }
                    left = self.serve_packets(frame, c, left, snr);
                }
            }
        }
        self.scheduler.observe(&self.served);
        if cfg.trace {
            self.trace.push(TraceRecord {
                frame,
                served: pick,
                level: pick.map_or(0, |c| self.levels[c]),
                queued: self.queues.iter().map(|q| q.arrivals.len() as u64).sum(),
            });
        }
    }

    fn serve_fluid(&mut self, c: usize) {
        let bits = self.frame_bits[c];
        let h = self.head[c];
        let share = bits / self.members[c].len() as f64;
        for &u in &self.members[c] {
            self.delivered_bits[u] += share;
            if u != h {
                self.d2d_bits[u] += share;
            }
        }
        self.head_bits[h] += bits;
        self.served[c] = bits;
    }

    fn arrivals(&mut self, frame: u64) {
        let cap = self.cfg.buffer_packets;
        for u in 0..self.queues.len() {
            let Some(p) = &self.poisson[u] else { continue };
            let k = p.sample(&mut self.arrive) as u64;
            self.offered[u] += k;
            let q = &mut self.queues[u];
            for _ in 0..k {
                if q.arrivals.len() < cap {
                    q.arrivals.push_back(frame);
                } else {
                    self.dropped[u] += 1;
                }
            }
        }
    }

    fn update_estimates(&mut self, frame: u64) {
        let Some(d) = &self.cfg.dore else { return };
        let now = frame as f64 * self.cfg.budget.frame_duration;
        let relay = self.cfg.relay;
        for c in 0..self.members.len() {
            let wait = relay.rate.map_or(0.0, |r| (self.relay_free[c] - now).max(0.0) + self.cfg.packet_bits / r);
            let inst = relay.base_delay + wait;
            self.estimate[c] = (1.0 - d.smoothing) * self.estimate[c] + d.smoothing * inst;
        }
    }

    fn uses_d2d(&self, c: usize, u: usize) -> bool {
        match &self.cfg.dore {
            None => true,
            Some(d) => self.estimate[c] <= d.thresholds[u],
        }
    }

    /// Serve cluster `c` packet by packet, oldest head-of-line first, with
    /// `left` symbols; returns the symbols still unused.
    fn serve_packets(&mut self, frame: u64, c: usize, mut left: f64, snr: &[f64]) -> f64 {
        let cfg = self.cfg;
        let h = self.head[c];
        let head_rate = cfg.table.rate(self.levels[c]);
        let mut route: Vec<(usize, f64, bool)> = Vec::with_capacity(self.members[c].len());
        for &u in &self.members[c] {
            if u == h {
                route.push((u, head_rate, false));
            } else if self.uses_d2d(c, u) {
                route.push((u, head_rate, true));
            } else {
                self.fallback[u] += 1;
                route.push((u, cfg.table.rate(cfg.table.level_of(snr[u])), false));
            }
        }
        let frame_end = (frame + 1) as f64 * cfg.budget.frame_duration;
        while left > 0.0 {
            let next = route
                .iter()
                .filter(|(u, r, _)| *r > 0.0 && !self.queues[*u].arrivals.is_empty())
                .min_by_key(|(u, _, _)| (self.queues[*u].arrivals[0], *u))
                .copied();
            let Some((u, rate, relayed)) = next else { break };
            let q = &mut self.queues[u];
            let need = q.head_left / rate;
            if need > left {
                q.head_left -= left * rate;
                self.served[c] += left * rate;
                self.head_bits[h] += left * rate;
                left = 0.0;
                break;
            }
            left -= need;
            self.served[c] += q.head_left;
            self.head_bits[h] += q.head_left;
            q.head_left = cfg.packet_bits;
            let arrived = q.arrivals.pop_front().expect("non-empty");
            self.delivered[u] += 1;
            self.delivered_bits[u] += cfg.packet_bits;
            let mut delay = (frame - arrived + 1) as f64 * cfg.budget.frame_duration;
            if relayed {
                let mut hop = cfg.relay.base_delay;
                if let Some(r) = cfg.relay.rate {
                    let done = self.relay_free[c].max(frame_end) + cfg.packet_bits / r;
                    hop += done - frame_end;
                    self.relay_free[c] = done;
                }
                delay += hop;
                self.relayed += 1;
                self.relay_delay_sum += hop;
                self.d2d_bits[u] += cfg.packet_bits;
            }
            self.delays.record(delay);
        }
        left
    }

    fn finish(self) -> Result<SimReport> {
        let cfg = self.cfg;
        let duration = cfg.frames as f64 * cfg.budget.frame_duration;
        let user_throughput: Vec<f64> = self.delivered_bits.iter().map(|b| b / duration).collect();
        let cluster_throughput: Vec<f64> =
            self.members.iter().map(|m| m.iter().map(|&u| user_throughput[u]).sum()).collect();
        let relay_rate: Vec<f64> = self.head_bits.iter().map(|b| b / duration).collect();
        let energy = match &cfg.power {
            None => None,
            Some(p) => {
                let mut out = alloc::vec![None; user_throughput.len()];
                for m in &self.members {
                    let t: Vec<f64> = m.iter().map(|&u| user_throughput[u]).collect();
                    let r: Vec<f64> = m.iter().map(|&u| relay_rate[u]).collect();
                    for (i, &u) in m.iter().enumerate() {
                        let hp = self.head_frames[u] as f64 / cfg.frames as f64;
                        out[u] = Some(member_report(i, hp, &t, &r, p)?);
                    }
                }
                Some(out.into_iter().map(|r| r.expect("partition covers every user")).collect())
            }
        };
        let full = matches!(cfg.traffic, Traffic::FullBuffer);
        Ok(SimReport {
            frames: cfg.frames,
            duration,
            user_throughput,
            cluster_throughput,
            served_frames: self.served_frames,
            head_frames: self.head_frames,
            relay_rate,
            d2d_rate: self.d2d_bits.iter().map(|b| b / duration).collect(),
            queued_packets: if full { alloc::vec![0; self.queues.len()] } else { self.queues.iter().map(|q| q.arrivals.len() as u64).collect() },
            offered_packets: self.offered,
            delivered_packets: self.delivered,
            dropped_packets: self.dropped,
            delays: self.delays,
            relayed_packets: self.relayed,
            relay_delay_sum: self.relay_delay_sum,
            fallback_frames: self.fallback,
            energy,
            trace: self.trace,
        })
    }
}

fn draw_snr(gammas: &[f64], rng: &mut SimRng, out: &mut [f64]) {
    for (s, g) in out.iter_mut().zip(gammas) {
        *s = -g * libm::log(uniform_open0(rng));
    }
}

/// Simulate `cfg`; bit-identical for identical `cfg`.
pub fn run(cfg: &ScenarioConfig) -> Result<SimReport> {
    Ok(compare(cfg, core::slice::from_ref(&cfg.scheduler))?.pop().expect("one scheduler"))
}

/// Simulate `cfg` once per scheduler in `kinds`, sharing one channel
/// realization. Each report equals `run` with that scheduler substituted.
pub fn compare(cfg: &ScenarioConfig, kinds: &[SchedulerKind]) -> Result<Vec<SimReport>> {
    cfg.validate()?;
    for k in kinds {
        let mut c = cfg.clone();
        c.scheduler = k.clone();
        c.validate()?;
    }
    if kinds.is_empty() {
        return Err(Error::Domain("no scheduler given".into()));
    }
    let mut engines = kinds.iter().map(|k| Engine::new(cfg, k)).collect::<Result<Vec<_>>>()?;
    let mut channel = substream(cfg.seed, 0);
    let mut snr = alloc::vec![0.0; cfg.gammas.len()];
    for frame in 0..cfg.frames {
        draw_snr(&cfg.gammas, &mut channel, &mut snr);
        for e in &mut engines {
            e.step(frame, &snr);
        }
    }
    engines.into_iter().map(Engine::finish).collect()
}

/// Draw one frame's SNR vector from an explicit generator, as the simulator
/// does.
pub fn sample_frame<R: Rng + ?Sized>(gammas: &[f64], rng: &mut R) -> Vec<f64> {
    gammas.iter().map(|g| crate::channel::sample_snr(*g, rng)).collect()
}
