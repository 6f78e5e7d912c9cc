//! Models and algorithms for opportunistic device-to-device scheduling in a
//! single LTE-like cell.
//!
//! The crate is `no_std` (it needs `alloc`). Every stochastic routine takes an
//! explicit generator, so results are reproducible bit for bit from a seed.
//!
//! - [`channel`]: Rayleigh SNR model, MCS table, MCS probability vectors.
//! - [`analytics`]: expected cluster throughput and head probabilities.
//! - [`power`]: dual-radio power model and energy efficiency.
//! - [`coalition`]: coalition values, merge-and-split, payoff rules.
//! - [`tiebreak`]: MaxRate tie decomposition, the fair-share LP, WRR heuristics.
//! - [`modeselect`]: D2D mode selection utilities, brute force and heuristics.
//! - [`simkit`]: frame-level simulator and replication statistics.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod analytics;
pub mod channel;
pub mod coalition;
mod error;
pub mod modeselect;
pub mod power;
pub mod quadrature;
pub mod rng;
pub mod simkit;
pub mod tiebreak;

pub use error::{Error, Result};
