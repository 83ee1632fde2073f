//! Seed derivation and per-phase random substreams.
//!
//! Every simulation round owns a handful of independent generators, one per
//! phase of the model. Each is seeded from a stable 64-bit mix of the master
//! seed, the scenario identity and the round index, so the draws consumed by
//! one phase never shift the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed. Order matters.
pub fn combine(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C909, |acc, &w| mix64(acc ^ mix64(w)))
}

/// 64-bit FNV-1a, used to turn scenario identifiers into seed material.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Model phases that draw random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Phase {
    Landscape = 1,
    Population = 2,
    Initial = 3,
    Formation = 4,
    Coordination = 5,
    Learning = 6,
}

/// Seed for one round of one scenario.
pub fn round_seed(master_seed: u64, scenario_key: u64, round: u64) -> u64 {
    combine(&[master_seed, scenario_key, round])
}

/// Independent generator for one phase of a round.
pub fn substream(round_seed: u64, phase: Phase) -> SimRng {
    SimRng::seed_from_u64(combine(&[round_seed, phase as u64]))
}
