//! Replication statistics and delay distributions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::domain;
use crate::Result;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A symmetric confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    /// Center.
    pub mean: f64,
    /// Half width.
    pub half_width: f64,
}

impl Interval {
    /// Lower end.
    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    /// Upper end.
    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Mean of replications and, from two replications on, its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    /// Replication count.
    pub n: usize,
    /// Sample mean.
    pub mean: f64,
    /// Normal-approximation interval; `None` for a single replication.
    pub ci: Option<Interval>,
}

/// Summarize replication values.
pub fn summarize(samples: &[f64]) -> Result<Summary> {
    let n = samples.len();
    if n == 0 {
        return Err(domain("no replications"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok(Summary { n, mean, ci: None });
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let half_width = Z95 * libm::sqrt(var / n as f64);
    Ok(Summary { n, mean, ci: Some(Interval { mean, half_width }) })
}

/// Wald interval `p +- z sqrt(p(1-p)/n)` for a Bernoulli proportion.
pub fn wald_interval(successes: u64, trials: u64) -> Result<Interval> {
    if trials == 0 || successes > trials {
        return Err(domain("need 0 <= successes <= trials, trials > 0"));
    }
    let p = successes as f64 / trials as f64;
    Ok(Interval { mean: p, half_width: Z95 * libm::sqrt(p * (1.0 - p) / trials as f64) })
}

/// Linear-interpolation percentile, `q` in [0, 1].
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return Err(domain("percentile needs data and q in [0, 1]"));
    }
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(v.len() - 1);
    Ok(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

/// Packet delays binned to the microsecond.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DelayHistogram {
    bins: BTreeMap<u64, u64>,
    count: u64,
}

impl DelayHistogram {
    /// Add one delay given in seconds.
    pub fn record(&mut self, seconds: f64) {
        let us = libm::round(seconds.max(0.0) * 1e6) as u64;
        *self.bins.entry(us).or_insert(0) += 1;
        self.count += 1;
    }

    /// Merge another histogram.
    pub fn merge(&mut self, other: &Self) {
        for (k, v) in &other.bins {
            *self.bins.entry(*k).or_insert(0) += v;
        }
        self.count += other.count;
    }

    /// Recorded packets.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Fraction of packets with delay at most `seconds`; 1 when empty.
    pub fn cdf(&self, seconds: f64) -> f64 {
        if self.count == 0 {
            return 1.0;
        }
        let cut = libm::round(seconds * 1e6) as u64;
        let below: u64 = self.bins.range(..=cut).map(|(_, v)| v).sum();
        below as f64 / self.count as f64
    }

    /// Smallest delay (s) whose cdf reaches `q`; `None` when empty.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        let need = libm::ceil(q.clamp(0.0, 1.0) * self.count as f64).max(1.0) as u64;
        let mut acc = 0;
        for (k, v) in &self.bins {
            acc += v;
            if acc >= need {
                return Some(*k as f64 * 1e-6);
            }
        }
        self.bins.keys().next_back().map(|k| *k as f64 * 1e-6)
    }

    /// Mean delay (s); `None` when empty.
    pub fn mean(&self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        let s: f64 = self.bins.iter().map(|(k, v)| *k as f64 * *v as f64).sum();
        Some(s * 1e-6 / self.count as f64)
    }

    /// `(delay in s, count)` pairs in increasing delay.
    pub fn iter(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.bins.iter().map(|(k, v)| (*k as f64 * 1e-6, *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_zero_width() {
        let s = summarize(&[3.0; 7]).unwrap();
        assert_eq!(s.ci.unwrap().half_width, 0.0);
        assert!(summarize(&[1.0]).unwrap().ci.is_none());
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn wald_closed_form() {
        let w = wald_interval(30, 100).unwrap();
        assert!((w.half_width - 1.959_963_984_540_054 * (0.21f64 / 100.0).sqrt()).abs() < 1e-15);
        assert!(wald_interval(3, 2).is_err());
    }

    #[test]
    fn histogram_cdf_and_quantile() {
        let mut h = DelayHistogram::default();
        for d in [0.001, 0.001, 0.002, 0.010] {
            h.record(d);
        }
        assert_eq!(h.cdf(0.001), 0.5);
        assert_eq!(h.cdf(0.0099), 0.75);
        assert_eq!(h.quantile(0.75), Some(0.002));
        assert!((h.mean().unwrap() - 0.0035).abs() < 1e-12);
        assert_eq!(DelayHistogram::default().cdf(0.0), 1.0);
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.5);
        assert_eq!(percentile(&[4.0], 0.9).unwrap(), 4.0);
    }
}
