//! Physical model behind mode selection: geometry, pathloss, SINR, RB shares
//! and the energy of each mode over one mode interval.
//!
//! Nodes are numbered cellular users first, then each D2D pair as
//! (transmitter, receiver), then the base station last. Cellular users
//! transmit uplink to the base station.
//!
//! - Cellular users split the cellular band equally over the interval and see
//!   interference from every underlay transmitter at the base station.
//! - An underlay pair reuses the whole cellular band; it sees the strongest
//!   single cellular transmitter plus every other underlay transmitter.
//! - An overlay pair uses the whole overlay slice, shared spatially with the
//!   other overlay pairs, whose transmitters interfere.
//! - The overlay slice returns to the cellular band when no pair uses it.
//! - An outband pair gets the WiFi rate divided by the number of outband pairs
//!   within WiFi range of its transmitter (itself included).

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Evaluation, Feasibility, Mode, UtilityModel, Violation};
use crate::channel::{db_to_linear, McsTable};
use crate::error::invalid;
use crate::Result;

/// Log-distance pathloss `PL(d) = pl0 + 10 n log10(d / d0)` in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pathloss {
    /// Loss at the reference distance (dB).
    pub pl0_db: f64,
    /// Pathloss exponent.
    pub exponent: f64,
    /// Reference distance (m); shorter distances are clamped to it.
    pub d0: f64,
}

impl Default for Pathloss {
    fn default() -> Self {
        Self { pl0_db: 34.0, exponent: 3.5, d0: 1.0 }
    }
}

impl Pathloss {
    /// Loss in dB at distance `d` meters.
    pub fn loss_db(&self, d: f64) -> f64 {
        self.pl0_db + 10.0 * self.exponent * libm::log10(d.max(self.d0) / self.d0)
    }
}

/// Received power from each transmitter at each receiver, in W.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl InterferenceMatrix {
    /// From a row-major `n x n` table (transmitter row, receiver column).
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid("interference", "table must be n x n"));
        }
        if data.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("interference", "entries must be nonnegative"));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(invalid("interference", "diagonal must be zero"));
            }
        }
        Ok(Self { n, data })
    }

    /// Received power at `rx` from `tx`.
    pub fn get(&self, tx: usize, rx: usize) -> f64 {
        self.data[tx * self.n + rx]
    }

    /// Node count.
    pub fn len(&self) -> usize {
        self.n
    }

    /// True for an empty matrix.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// `I[n][m] = P_n 10^(-PL(d_nm)/10) 10^(X/10)` with `X ~ N(0, sigma_db^2)`
/// drawn independently per ordered pair.
pub fn build_interference<R: Rng + ?Sized>(
    positions: &[(f64, f64)],
    tx_power_w: &[f64],
    pathloss: &Pathloss,
    sigma_db: f64,
    rng: &mut R,
) -> Result<InterferenceMatrix> {
    let n = positions.len();
    if tx_power_w.len() != n {
        return Err(invalid("tx_power", "one power per node"));
    }
    let shadow = Normal::new(0.0, sigma_db.max(0.0)).map_err(|_| invalid("shadowing_db", "must be finite"))?;
    let mut data = alloc::vec![0.0; n * n];
    for tx in 0..n {
        for rx in 0..n {
            if tx == rx {
                continue;
            }
            let d = libm::hypot(positions[tx].0 - positions[rx].0, positions[tx].1 - positions[rx].1);
            let x = if sigma_db > 0.0 { shadow.sample(rng) } else { 0.0 };
            data[tx * n + rx] = tx_power_w[tx] * db_to_linear(-pathloss.loss_db(d) + x);
        }
    }
    InterferenceMatrix::from_rows(n, data)
}

/// Radio constants of the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Resource blocks in the band.
    pub resource_blocks: f64,
    /// Data symbols per RB per subframe.
    pub symbols_per_rb: f64,
    /// Subframe length (s).
    pub subframe: f64,
    /// Noise power over the band (W).
    pub noise_w: f64,
    /// Cellular user transmit power (W).
    pub cellular_tx_w: f64,
    /// Inband D2D transmit power (W).
    pub d2d_tx_w: f64,
    /// Base station transmit power (W).
    pub enb_tx_w: f64,
    /// WiFi range (m).
    pub wifi_range: f64,
    /// Nominal WiFi rate (bits/s).
    pub r_wifi: f64,
}

fn dbm_to_w(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            resource_blocks: 100.0,
            symbols_per_rb: 168.0,
            subframe: 1e-3,
            noise_w: dbm_to_w(-174.0 + 10.0 * libm::log10(20e6)),
            cellular_tx_w: dbm_to_w(24.0),
            d2d_tx_w: dbm_to_w(10.0),
            enb_tx_w: dbm_to_w(44.0),
            wifi_range: 150.0,
            r_wifi: 54e6,
        }
    }
}

/// Energy and utility constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    /// Relative cost of energy (bits/J).
    pub alpha: f64,
    /// Mode interval (s).
    pub interval: f64,
    /// Fraction of RBs reserved for overlay.
    pub overlay_fraction: f64,
    /// Cellular radio baseline (W).
    pub beta_lte: f64,
    /// WiFi idle baseline (W).
    pub beta_wifi_idle: f64,
    /// WiFi active baseline (W).
    pub beta_wifi_active: f64,
    /// Cellular transmit power draw (W).
    pub p_cellular_tx: f64,
    /// Inband D2D transmit power draw (W).
    pub p_d2d_tx: f64,
    /// Inband D2D receive power draw (W).
    pub p_d2d_rx: f64,
    /// WiFi transmit energy (J/bit).
    pub e_wifi_tx: f64,
    /// WiFi receive energy (J/bit).
    pub e_wifi_rx: f64,
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            interval: 2.0,
            overlay_fraction: 0.3,
            beta_lte: 1.288_04,
            beta_wifi_idle: 0.077_2,
            beta_wifi_active: 0.132_86,
            p_cellular_tx: 1.0,
            p_d2d_tx: 0.8,
            p_d2d_rx: 0.5,
            e_wifi_tx: 1.0e-8,
            e_wifi_rx: 5.0e-9,
        }
    }
}

impl UtilityParams {
    /// Check ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(invalid("alpha", "must be nonnegative"));
        }
        if !(self.interval > 0.0) {
            return Err(invalid("interval", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.overlay_fraction) {
            return Err(invalid("overlay_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Interference limits (W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// At the base station.
    pub enb: f64,
    /// At each cellular user.
    pub cellular: f64,
    /// At each inband D2D receiver.
    pub d2d: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { enb: dbm_to_w(-90.0), cellular: dbm_to_w(-90.0), d2d: dbm_to_w(-70.0) }
    }
}

/// Random-geometry settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioShape {
    /// Cellular users.
    pub cellular: usize,
    /// D2D pairs.
    pub pairs: usize,
    /// Cell radius (m).
    pub radius: f64,
    /// Largest transmitter-receiver distance of a pair (m).
    pub d2d_max: f64,
    /// Shadowing standard deviation (dB).
    pub shadowing_db: f64,
}

impl Default for ScenarioShape {
    fn default() -> Self {
        Self { cellular: 6, pairs: 4, radius: 250.0, d2d_max: 20.0, shadowing_db: 6.0 }
    }
}

/// Per-connection breakdown of an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    /// Bits per interval, cellular users.
    pub cellular_bits: Vec<f64>,
    /// Energy per interval, cellular users (J).
    pub cellular_energy: Vec<f64>,
    /// Bits per interval, D2D pairs.
    pub pair_bits: Vec<f64>,
    /// Energy per interval, D2D pairs (J).
    pub pair_energy: Vec<f64>,
}

/// A concrete mode-selection instance.
#[derive(Debug, Clone)]
pub struct ModeScenario {
    n_cellular: usize,
    n_pairs: usize,
    positions: Vec<(f64, f64)>,
    interference: InterferenceMatrix,
    /// Radio constants.
    pub link: LinkParams,
    /// Energy and utility constants.
    pub utility: UtilityParams,
    /// Interference limits.
    pub tolerances: Tolerances,
    /// MCS table used for SINR to rate.
    pub table: McsTable,
}

impl ModeScenario {
    /// Instance from explicit positions (base station last) and interference.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_cellular: usize,
        n_pairs: usize,
        positions: Vec<(f64, f64)>,
        interference: InterferenceMatrix,
        link: LinkParams,
        utility: UtilityParams,
        tolerances: Tolerances,
        table: McsTable,
    ) -> Result<Self> {
        let n = n_cellular + 2 * n_pairs + 1;
        if positions.len() != n || interference.len() != n {
            return Err(invalid("scenario", "positions and interference must cover every node"));
        }
        utility.validate()?;
        Ok(Self { n_cellular, n_pairs, positions, interference, link, utility, tolerances, table })
    }

    /// Random instance: users uniform in the disc, base station at the
    /// center, each receiver uniform within `d2d_max` of its transmitter.
    pub fn random<R: Rng + ?Sized>(
        shape: &ScenarioShape,
        link: LinkParams,
        utility: UtilityParams,
        tolerances: Tolerances,
        pathloss: &Pathloss,
        rng: &mut R,
    ) -> Result<Self> {
        let mut positions = Vec::with_capacity(shape.cellular + 2 * shape.pairs + 1);
        for _ in 0..shape.cellular {
            positions.push(in_disc(shape.radius, rng));
        }
        for _ in 0..shape.pairs {
            let tx = in_disc(shape.radius, rng);
            let off = in_disc(shape.d2d_max, rng);
            positions.push(tx);
            positions.push((tx.0 + off.0, tx.1 + off.1));
        }
        positions.push((0.0, 0.0));
        let mut power = alloc::vec![link.cellular_tx_w; shape.cellular];
        for _ in 0..shape.pairs {
            power.push(link.d2d_tx_w);
            power.push(link.d2d_tx_w);
        }
        power.push(link.enb_tx_w);
        let interference = build_interference(&positions, &power, pathloss, shape.shadowing_db, rng)?;
        Self::new(shape.cellular, shape.pairs, positions, interference, link, utility, tolerances, McsTable::lte())
    }

    /// Number of cellular users.
    pub fn n_cellular(&self) -> usize {
        self.n_cellular
    }

    /// Node positions, base station last.
    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    /// The interference table.
    pub fn interference(&self) -> &InterferenceMatrix {
        &self.interference
    }

    /// Node index of pair `i`'s transmitter.
    pub fn tx(&self, i: usize) -> usize {
        self.n_cellular + 2 * i
    }

    /// Node index of pair `i`'s receiver.
    pub fn rx(&self, i: usize) -> usize {
        self.n_cellular + 2 * i + 1
    }

    /// Node index of the base station.
    pub fn enb(&self) -> usize {
        self.n_cellular + 2 * self.n_pairs
    }

    fn bits_per_rb(&self, sinr: f64) -> f64 {
        self.table.rate(self.table.level_of(sinr)) * self.link.symbols_per_rb
    }

    /// Throughput and energy of every connection. `active[i] == false` hides
    /// pair `i` entirely (no interference, zero bits, zero energy).
    pub fn breakdown(&self, modes: &[Mode], active: &[bool]) -> Breakdown {
        let u = &self.utility;
        let l = &self.link;
        let on = |i: usize, m: Mode| active[i] && modes[i] == m;
        let subframes = u.interval / l.subframe;
        let overlay_used = (0..self.n_pairs).any(|i| on(i, Mode::Overlay));
        let overlay_rbs = l.resource_blocks * u.overlay_fraction;
        let cellular_rbs = if overlay_used { l.resource_blocks - overlay_rbs } else { l.resource_blocks };
        let underlay: Vec<usize> = (0..self.n_pairs).filter(|&i| on(i, Mode::Underlay)).collect();
        let overlay: Vec<usize> = (0..self.n_pairs).filter(|&i| on(i, Mode::Overlay)).collect();
        let enb = self.enb();
        let i_at = |tx: usize, rx: usize| self.interference.get(tx, rx);

        let mut cellular_bits = Vec::with_capacity(self.n_cellular);
        let mut cellular_energy = Vec::with_capacity(self.n_cellular);
        let share = if self.n_cellular > 0 { 1.0 / self.n_cellular as f64 } else { 0.0 };
        let at_enb: f64 = underlay.iter().map(|&j| i_at(self.tx(j), enb)).sum();
        for c in 0..self.n_cellular {
            let sinr = i_at(c, enb) / (l.noise_w + at_enb);
            cellular_bits.push(cellular_rbs * subframes * share * self.bits_per_rb(sinr));
            cellular_energy.push(u.beta_lte * u.interval + u.p_cellular_tx * u.interval * share);
        }

        let mut pair_bits = alloc::vec![0.0; self.n_pairs];
        let mut pair_energy = alloc::vec![0.0; self.n_pairs];
        let inband_base = 2.0 * (u.beta_lte + u.beta_wifi_idle) * u.interval;
        for i in 0..self.n_pairs {
            if !active[i] {
                continue;
            }
            let (tx, rx) = (self.tx(i), self.rx(i));
            let signal = i_at(tx, rx);
            match modes[i] {
                Mode::Underlay | Mode::Cellular => {
                    let worst_cell = (0..self.n_cellular).map(|c| i_at(c, rx)).fold(0.0, f64::max);
                    let others: f64 = underlay.iter().filter(|&&j| j != i).map(|&j| i_at(self.tx(j), rx)).sum();
                    let sinr = signal / (l.noise_w + worst_cell + others);
                    let rbs = cellular_rbs * subframes;
                    pair_bits[i] = rbs * self.bits_per_rb(sinr);
                    let busy = if rbs > 0.0 { u.interval } else { 0.0 };
                    pair_energy[i] = inband_base + (u.p_d2d_tx + u.p_d2d_rx) * busy;
                }
                Mode::Overlay => {
                    let others: f64 = overlay.iter().filter(|&&j| j != i).map(|&j| i_at(self.tx(j), rx)).sum();
                    let sinr = signal / (l.noise_w + others);
                    let rbs = overlay_rbs * subframes;
                    pair_bits[i] = rbs * self.bits_per_rb(sinr);
                    let busy = if rbs > 0.0 { u.interval } else { 0.0 };
                    pair_energy[i] = inband_base + (u.p_d2d_tx + u.p_d2d_rx) * busy;
                }
                Mode::Outband => {
                    let p = self.positions[tx];
                    let contenders = (0..self.n_pairs)
                        .filter(|&j| on(j, Mode::Outband))
                        .filter(|&j| {
                            let q = self.positions[self.tx(j)];
                            libm::hypot(p.0 - q.0, p.1 - q.1) <= l.wifi_range
                        })
                        .count()
                        .max(1);
                    let bits = u.interval * l.r_wifi / contenders as f64;
                    pair_bits[i] = bits;
                    pair_energy[i] = 2.0 * (u.beta_lte + u.beta_wifi_active) * u.interval + (u.e_wifi_tx + u.e_wifi_rx) * bits;
                }
            }
        }
        Breakdown { cellular_bits, cellular_energy, pair_bits, pair_energy }
    }

    /// Constraint check with a chosen subset of active pairs.
    pub fn feasibility_masked(&self, modes: &[Mode], active: &[bool]) -> Feasibility {
        let mut v = Vec::new();
        let on = |i: usize, m: Mode| active[i] && modes[i] == m;
        // each node sources and sinks at most one connection
        let mut out_deg = alloc::vec![0u32; self.enb() + 1];
        let mut in_deg = alloc::vec![0u32; self.enb() + 1];
        for c in 0..self.n_cellular {
            out_deg[c] += 1;
        }
        for i in (0..self.n_pairs).filter(|&i| active[i]) {
            out_deg[self.tx(i)] += 1;
            in_deg[self.rx(i)] += 1;
            if modes[i] == Mode::Cellular {
                v.push(Violation { constraint: 1, at: self.tx(i) });
            }
        }
        for (node, &d) in out_deg.iter().enumerate().take(self.enb()) {
            if d > 1 {
                v.push(Violation { constraint: 1, at: node });
            }
        }
        for (node, &d) in in_deg.iter().enumerate().take(self.enb()) {
            if d > 1 {
                v.push(Violation { constraint: 2, at: node });
            }
        }
        let underlay: Vec<usize> = (0..self.n_pairs).filter(|&i| on(i, Mode::Underlay)).collect();
        let overlay: Vec<usize> = (0..self.n_pairs).filter(|&i| on(i, Mode::Overlay)).collect();
        let sum_at = |set: &[usize], rx: usize, skip: usize| -> f64 {
            set.iter().filter(|&&j| j != skip).map(|&j| self.interference.get(self.tx(j), rx)).sum()
        };
        for x in (0..self.n_cellular).chain(core::iter::once(self.enb())) {
            let limit = if x == self.enb() { self.tolerances.enb } else { self.tolerances.cellular };
            if sum_at(&underlay, x, usize::MAX) > limit {
                v.push(Violation { constraint: 3, at: x });
            }
        }
        for &i in &underlay {
            let rx = self.rx(i);
            let cell: f64 = (0..self.n_cellular).map(|c| self.interference.get(c, rx)).sum();
            if cell + sum_at(&underlay, rx, i) > self.tolerances.d2d {
                v.push(Violation { constraint: 4, at: i });
            }
        }
        for &i in &overlay {
            if sum_at(&overlay, self.rx(i), i) > self.tolerances.d2d {
                v.push(Violation { constraint: 5, at: i });
            }
        }
        Feasibility { violations: v }
    }

    fn utilities(&self, modes: &[Mode], active: &[bool]) -> Evaluation {
        let b = self.breakdown(modes, active);
        let a = self.utility.alpha;
        let pairs: Vec<f64> = b
            .pair_bits
            .iter()
            .zip(&b.pair_energy)
            .zip(active)
            .map(|((t, e), on)| if *on { t - a * e } else { 0.0 })
            .collect();
        let cell: f64 = b.cellular_bits.iter().zip(&b.cellular_energy).map(|(t, e)| t - a * e).sum();
        Evaluation { total: cell + pairs.iter().sum::<f64>(), pairs }
    }
}

impl UtilityModel for ModeScenario {
    fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    fn evaluate(&self, modes: &[Mode]) -> Evaluation {
        self.utilities(modes, &alloc::vec![true; self.n_pairs])
    }

    fn feasibility(&self, modes: &[Mode]) -> Feasibility {
        self.feasibility_masked(modes, &alloc::vec![true; self.n_pairs])
    }

    fn isolated_utility(&self, pair: usize, mode: Mode) -> f64 {
        let mut active = alloc::vec![false; self.n_pairs];
        active[pair] = true;
        let mut modes = alloc::vec![Mode::Outband; self.n_pairs];
        modes[pair] = mode;
        self.utilities(&modes, &active).pairs[pair]
    }
}

fn in_disc<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> (f64, f64) {
    let r = radius * libm::sqrt(rng.random::<f64>());
    let t = 2.0 * core::f64::consts::PI * rng.random::<f64>();
    (r * libm::cos(t), r * libm::sin(t))
}
