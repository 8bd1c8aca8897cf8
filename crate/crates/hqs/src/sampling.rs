//! Seeded randomness with a pinned, portable output contract.
//!
//! Every seeded feature promises byte-identical results across
//! platforms and releases, so the generator (ChaCha8 keyed through
//! `seed_from_u64`) and the derivations below are part of the library's
//! compatibility contract. Tests freeze their exact output sequences.

use rand_core::RngCore;

/// Unbiased integer in `[0, bound)` by widening-multiply rejection.
/// `bound` must be nonzero.
pub(crate) fn bounded(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let mut x = rng.next_u64();
    let mut m = (x as u128) * (bound as u128);
    let mut low = m as u64;
    if low < bound {
        // 2^64 mod bound, computed without touching u128 division.
        let threshold = bound.wrapping_neg() % bound;
        while low < threshold {
            x = rng.next_u64();
            m = (x as u128) * (bound as u128);
            low = m as u64;
        }
    }
    (m >> 64) as u64
}

/// Standard normal deviate by the Box-Muller transform.
///
/// Each uniform is built from the top 53 bits of one generator word,
/// shifted into `(0, 1]` so the logarithm never sees zero.
pub(crate) fn std_normal(rng: &mut impl RngCore) -> f64 {
    const SCALE: f64 = 1.0 / 9007199254740992.0; // 2^-53
    let u1 = (((rng.next_u64() >> 11) as f64) + 1.0) * SCALE;
    let u2 = (((rng.next_u64() >> 11) as f64) + 1.0) * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
