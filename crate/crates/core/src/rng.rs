//! The portable generator used everywhere in the crate.
//!
//! Xoshiro256++ seeded through SplitMix64. Its output sequence is fixed by the
//! algorithm, so a seed reproduces the same run on every platform.

use rand::{Rng, SeedableRng};

/// The crate's generator.
pub type SimRng = rand_xoshiro::Xoshiro256PlusPlus;

/// Build a generator from a 64-bit seed.
pub fn from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Derive an independent stream, e.g. for replication `index` of a run.
pub fn substream(seed: u64, index: u64) -> SimRng {
    // golden-ratio increment keeps nearby indices far apart in seed space
    from_seed(seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Uniform draw in the open-closed interval (0, 1].
///
/// Used for inverse-CDF sampling where `ln(0)` must be avoided.
pub fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
