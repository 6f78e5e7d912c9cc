//! Power draw of dual-radio cluster members and their energy efficiency.
//!
//! A member's cellular radio costs `beta_lte` while it is the frame's head and
//! `beta_lte_idle` otherwise, plus `alpha_rx` per received bit/s. Its WiFi
//! radio costs `beta_wifi` while active and `beta_wifi_idle` otherwise, plus
//! an airtime term (`zeta`) and a per-packet term (`kappa`) for the traffic
//! it forwards to, or receives from, the head.
//!
//! Units are SI throughout: W, bits/s, bits, J/packet.

use alloc::vec::Vec;

use crate::analytics::{Cell, ClusterScheduler};
use crate::error::invalid;
use crate::Result;

/// Power model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    /// Cellular radio power while head (W).
    pub beta_lte: f64,
    /// Cellular radio power otherwise (W).
    pub beta_lte_idle: f64,
    /// Receive cost, W per bit/s.
    pub alpha_rx: f64,
    /// WiFi radio power while active (W).
    pub beta_wifi: f64,
    /// WiFi radio power while idle (W).
    pub beta_wifi_idle: f64,
    /// WiFi transmit power at full airtime (W).
    pub zeta_tx: f64,
    /// WiFi receive power at full airtime (W).
    pub zeta_rx: f64,
    /// Energy per transmitted WiFi packet (J).
    pub kappa_tx: f64,
    /// Energy per received WiFi packet (J).
    pub kappa_rx: f64,
    /// Packet length (bits).
    pub packet_len: f64,
    /// Nominal WiFi rate (bits/s).
    pub r_wifi: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            beta_lte: 1.288_04,
            beta_lte_idle: 0.031_6,
            alpha_rx: 51.97e-3 / 1e6,
            beta_wifi: 0.132_86,
            beta_wifi_idle: 0.077_2,
            zeta_tx: 0.25,
            zeta_rx: 0.12,
            kappa_tx: 2.0e-5,
            kappa_rx: 1.0e-5,
            packet_len: 12_000.0,
            r_wifi: 54e6,
        }
    }
}

impl PowerParams {
    /// Check the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta_lte", self.beta_lte),
            ("beta_lte_idle", self.beta_lte_idle),
            ("alpha_rx", self.alpha_rx),
            ("beta_wifi", self.beta_wifi),
            ("beta_wifi_idle", self.beta_wifi_idle),
            ("zeta_tx", self.zeta_tx),
            ("zeta_rx", self.zeta_rx),
            ("kappa_tx", self.kappa_tx),
            ("kappa_rx", self.kappa_rx),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be nonnegative and finite"));
            }
        }
        if self.beta_lte < self.beta_lte_idle {
            return Err(invalid("beta_lte", "must be at least beta_lte_idle"));
        }
        if self.beta_wifi < self.beta_wifi_idle {
            return Err(invalid("beta_wifi", "must be at least beta_wifi_idle"));
        }
        if !(self.packet_len > 0.0 && self.packet_len.is_finite()) {
            return Err(invalid("packet_len", "must be positive"));
        }
        if !(self.r_wifi > 0.0 && self.r_wifi.is_finite()) {
            return Err(invalid("r_wifi", "must be positive"));
        }
        Ok(())
    }
}

/// Cellular radio power.
pub fn lte_power(head_prob: f64, relay_rate: f64, params: &PowerParams) -> f64 {
    head_prob * params.beta_lte + (1.0 - head_prob) * params.beta_lte_idle + params.alpha_rx * relay_rate
}

/// WiFi traffic of one cluster member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WifiRates {
    /// Rate forwarded to the other members while head (bits/s).
    pub tx: f64,
    /// Rate received from other heads (bits/s).
    pub rx: f64,
    /// The member's share of the cluster throughput.
    pub delta: f64,
    /// True when the cluster throughput is zero and the shares are undefined.
    pub degenerate: bool,
}

/// WiFi rates of member `idx` given every member's throughput and relay rate.
///
/// `tx = (1 - delta) R_i` and `rx = delta * sum_{j != i} R_j`, where
/// `delta = E[T_i] / E[T_cluster]`.
pub fn wifi_rates(idx: usize, throughputs: &[f64], relay_rates: &[f64]) -> Result<WifiRates> {
    if idx >= throughputs.len() || throughputs.len() != relay_rates.len() {
        return Err(crate::error::domain("member index or rate vectors inconsistent"));
    }
    let total: f64 = throughputs.iter().sum();
    if !(total > 0.0) {
        return Ok(WifiRates { tx: 0.0, rx: 0.0, delta: 0.0, degenerate: true });
    }
    let delta = throughputs[idx] / total;
    let others: f64 = relay_rates.iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, r)| r).sum();
    Ok(WifiRates { tx: (1.0 - delta) * relay_rates[idx], rx: delta * others, delta, degenerate: false })
}

/// Probability that the WiFi radio is active, with a clamp flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveProbability {
    /// Clamped value in `[0, 1]`.
    pub value: f64,
    /// Unclamped value.
    pub raw: f64,
    /// True when the raw value left `[0, 1]`.
    pub clamped: bool,
}

/// `[E[T_i] + (1 - 2 delta) R_i] / r_wifi`, clamped to `[0, 1]`.
pub fn wifi_active_probability(throughput: f64, delta: f64, relay_rate: f64, r_wifi: f64) -> ActiveProbability {
    let raw = (throughput + (1.0 - 2.0 * delta) * relay_rate) / r_wifi;
    let value = raw.clamp(0.0, 1.0);
    ActiveProbability { value, raw, clamped: value != raw }
}

/// WiFi radio power.
pub fn wifi_power(rates: &WifiRates, active: f64, params: &PowerParams) -> f64 {
    let tau_tx = rates.tx / params.r_wifi;
    let tau_rx = rates.rx / params.r_wifi;
    let lambda_tx = rates.tx / params.packet_len;
    let lambda_rx = rates.rx / params.packet_len;
    active * params.beta_wifi
        + (1.0 - active) * params.beta_wifi_idle
        + params.zeta_tx * tau_tx
        + params.zeta_rx * tau_rx
        + params.kappa_tx * lambda_tx
        + params.kappa_rx * lambda_rx
}

/// Inputs to the closed-form total power of one member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberLoad {
    /// Head probability.
    pub head_prob: f64,
    /// Own expected throughput `E[T_i]` (bits/s).
    pub throughput: f64,
    /// Own relay rate `R_i` (bits/s).
    pub relay_rate: f64,
    /// Cluster throughput `E[T_cluster]` (bits/s).
    pub cluster_throughput: f64,
    /// Sum of the other members' relay rates (bits/s).
    pub others_relay: f64,
}

/// Total power of a member, written out in one expression.
///
/// Algebraically equal to `lte_power + wifi_power` fed by [`wifi_rates`] and
/// [`wifi_active_probability`].
pub fn total_power(load: &MemberLoad, params: &PowerParams) -> f64 {
    let delta = if load.cluster_throughput > 0.0 { load.throughput / load.cluster_throughput } else { 0.0 };
    let (tx, rx) = if load.cluster_throughput > 0.0 {
        ((1.0 - delta) * load.relay_rate, delta * load.others_relay)
    } else {
        (0.0, 0.0)
    };
    let pa = wifi_active_probability(load.throughput, delta, load.relay_rate, params.r_wifi).value;
    let pa = if load.cluster_throughput > 0.0 { pa } else { 0.0 };
    load.head_prob * params.beta_lte
        + (1.0 - load.head_prob) * params.beta_lte_idle
        + params.alpha_rx * load.relay_rate
        + pa * params.beta_wifi
        + (1.0 - pa) * params.beta_wifi_idle
        + (params.zeta_tx / params.r_wifi + params.kappa_tx / params.packet_len) * tx
        + (params.zeta_rx / params.r_wifi + params.kappa_rx / params.packet_len) * rx
}

/// Bits per joule. Zero power gives zero efficiency.
pub fn energy_efficiency(throughput: f64, total_power: f64) -> f64 {
    if total_power > 0.0 {
        throughput / total_power
    } else {
        0.0
    }
}

/// Energy picture of one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserEnergyReport {
    /// Cellular radio power (W).
    pub w_lte: f64,
    /// WiFi radio power (W).
    pub w_wifi: f64,
    /// Total power (W).
    pub w_total: f64,
    /// Energy efficiency (bits/J).
    pub eta: f64,
    /// Share of the cluster throughput.
    pub delta: f64,
    /// Cellular relay rate (bits/s).
    pub relay_rate: f64,
    /// WiFi forward rate (bits/s).
    pub wifi_tx: f64,
    /// WiFi receive rate (bits/s).
    pub wifi_rx: f64,
    /// WiFi active probability after clamping.
    pub active_probability: f64,
    /// True if the active probability had to be clamped.
    pub clamped: bool,
}

/// Energy report of a user from its scheduling statistics and cluster mates.
///
/// `throughputs` and `relay_rates` list every member of the user's cluster;
/// `idx` locates the user among them.
pub fn member_report(
    idx: usize,
    head_prob: f64,
    throughputs: &[f64],
    relay_rates: &[f64],
    params: &PowerParams,
) -> Result<UserEnergyReport> {
    let rates = wifi_rates(idx, throughputs, relay_rates)?;
    let t = throughputs[idx];
    let r = relay_rates[idx];
    let active = if rates.degenerate {
        ActiveProbability { value: 0.0, raw: 0.0, clamped: false }
    } else {
        wifi_active_probability(t, rates.delta, r, params.r_wifi)
    };
    let w_lte = lte_power(head_prob, r, params);
    let w_wifi = wifi_power(&rates, active.value, params);
    let w_total = w_lte + w_wifi;
    Ok(UserEnergyReport {
        w_lte,
        w_wifi,
        w_total,
        eta: energy_efficiency(t, w_total),
        delta: rates.delta,
        relay_rate: r,
        wifi_tx: rates.tx,
        wifi_rx: rates.rx,
        active_probability: active.value,
        clamped: active.clamped,
    })
}

/// Energy report of a user that is not clustered: it carries only its own
/// traffic and keeps WiFi idle.
pub fn standalone_report(throughput: f64, head_prob: f64, params: &PowerParams) -> UserEnergyReport {
    let w_lte = lte_power(head_prob, throughput, params);
    let w_wifi = params.beta_wifi_idle;
    let w_total = w_lte + w_wifi;
    UserEnergyReport {
        w_lte,
        w_wifi,
        w_total,
        eta: energy_efficiency(throughput, w_total),
        delta: 1.0,
        relay_rate: throughput,
        wifi_tx: 0.0,
        wifi_rx: 0.0,
        active_probability: 0.0,
        clamped: false,
    }
}

/// Energy reports for every user of a cell under a cluster scheduler.
pub fn cell_energy(cell: &Cell, scheduler: ClusterScheduler, params: &PowerParams) -> Result<Vec<UserEnergyReport>> {
    params.validate()?;
    let a = cell.analyse(scheduler)?;
    let mut out = alloc::vec![None; cell.gammas().len()];
    for members in cell.partition().clusters() {
        let t: Vec<f64> = members.iter().map(|&u| a.user_throughput[u]).collect();
        let r: Vec<f64> = members.iter().map(|&u| a.relay_rate[u]).collect();
        for (i, &u) in members.iter().enumerate() {
            out[u] = Some(member_report(i, a.head_probability[u], &t, &r, params)?);
        }
    }
    Ok(out.into_iter().map(|r| r.expect("partition covers every user")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lte_corners() {
        let p = PowerParams::default();
        assert_eq!(lte_power(0.0, 0.0, &p), p.beta_lte_idle);
        assert_eq!(lte_power(1.0, 0.0, &p), p.beta_lte);
        let v = lte_power(0.3, 10e6, &p);
        let hand = 0.3 * 1.288_04 + 0.7 * 0.031_6 + 51.97e-3 * 10.0;
        assert!((v - hand).abs() < 1e-12);
    }

    #[test]
    fn singleton_uses_no_wifi() {
        let p = PowerParams::default();
        let r = member_report(0, 1.0, &[5e6], &[5e6], &p).unwrap();
        assert_eq!(r.delta, 1.0);
        assert_eq!(r.wifi_tx, 0.0);
        assert_eq!(r.wifi_rx, 0.0);
        assert_eq!(r.active_probability, 0.0);
        assert!((r.w_wifi - p.beta_wifi_idle).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair() {
        let w = wifi_rates(0, &[3e6, 3e6], &[3e6, 3e6]).unwrap();
        assert_eq!(w.delta, 0.5);
        assert!((w.tx - w.rx).abs() < 1e-9);
        let a = wifi_active_probability(3e6, 0.5, 7e6, 54e6);
        assert!((a.value - 3e6 / 54e6).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_clamp() {
        let w = wifi_rates(1, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(w.degenerate);
        let a = wifi_active_probability(100e6, 0.0, 10e6, 54e6);
        assert!(a.clamped && a.value == 1.0);
        assert!(wifi_rates(3, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn idle_isolated_user() {
        let p = PowerParams::default();
        let load = MemberLoad { head_prob: 0.0, throughput: 0.0, relay_rate: 0.0, cluster_throughput: 0.0, others_relay: 0.0 };
        assert!((total_power(&load, &p) - (p.beta_lte_idle + p.beta_wifi_idle)).abs() < 1e-15);
        assert_eq!(energy_efficiency(0.0, 1.0), 0.0);
        assert_eq!(energy_efficiency(2.0, 1.0), 2.0 * energy_efficiency(1.0, 1.0));
    }

    #[test]
    fn validation() {
        let mut p = PowerParams::default();
        assert!(p.validate().is_ok());
        p.beta_lte_idle = 2.0;
        assert!(p.validate().is_err());
        let p = PowerParams { r_wifi: 0.0, ..PowerParams::default() };
        assert!(p.validate().is_err());
    }
}
