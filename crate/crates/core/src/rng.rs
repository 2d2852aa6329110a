//! Deterministic seed derivation and substreams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose key
//! is derived by mixing a `(domain, seed, indices...)` tuple, so results are
//! independent of scheduling order and replay byte-identically. Within a
//! lattice, per-level substreams use the ChaCha stream id, which lets coupled
//! runs (same seed, different `p` or `q`) consume the same underlying
//! uniforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Domain separation tags for the different consumers of randomness.
pub const DOMAIN_FIELD: u64 = 0xC1;
pub const DOMAIN_LATTICE: u64 = 0xC2;
pub const DOMAIN_DEFECTS: u64 = 0xC3;
pub const DOMAIN_COUPLING: u64 = 0xC4;
pub const DOMAIN_HARNESS: u64 = 0xC5;

/// SplitMix64 finalizer; the standard 64-bit mixer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Fold a tuple of indices into a 256-bit ChaCha key.
pub fn derive_key(parts: &[u64]) -> [u8; 32] {
    let mut state = 0x243F_6A88_85A3_08D3u64;
    for &p in parts {
        state = mix64(state ^ mix64(p));
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        state = mix64(state.wrapping_add(0xA076_1D64_78BD_642F ^ i as u64));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// A ChaCha8 stream keyed by the given tuple.
pub fn stream(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(parts))
}

/// Uniform f64 in [0, 1) with 53 random bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fixed-point acceptance threshold for Bernoulli(p): a draw `u: u64` is a
/// success iff `(u as u128) < threshold`. Monotone in `p`, exact at 0 and 1.
pub fn bernoulli_threshold(p: f64) -> u128 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        1u128 << 64
    } else {
        (p * (1u128 << 64) as f64) as u128
    }
}

#[inline]
pub fn accept(u: u64, threshold: u128) -> bool {
    (u as u128) < threshold
}

/// Sample one word of 64 i.i.d. Bernoulli(threshold / 2^64) bits by comparing
/// bit-planes of per-site uniforms against the threshold, most significant
/// plane first. Sites whose comparison is undecided stop consuming planes as
/// soon as `undecided` empties, which costs ~8 draws per word instead of 64.
/// The law is identical to `accept` applied per site; the realization is not.
pub fn bernoulli_word(rng: &mut impl RngCore, threshold: u128) -> u64 {
    if threshold == 0 {
        return 0;
    }
    if threshold >= 1u128 << 64 {
        return !0u64;
    }
    let t = threshold as u64;
    let mut open = 0u64;
    let mut undecided = !0u64;
    for bit in (0..64).rev() {
        let r = rng.next_u64();
        if (t >> bit) & 1 == 1 {
            open |= undecided & !r;
            undecided &= r;
        } else {
            undecided &= !r;
        }
        if undecided == 0 {
            break;
        }
    }
    // leftover undecided sites have u == t exactly: closed under strict less
    open
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_key_is_deterministic_and_sensitive() {
        assert_eq!(derive_key(&[1, 2, 3]), derive_key(&[1, 2, 3]));
        assert_ne!(derive_key(&[1, 2, 3]), derive_key(&[1, 2, 4]));
        assert_ne!(derive_key(&[1, 2]), derive_key(&[2, 1]));
    }

    #[test]
    fn unit_f64_in_range() {
        let mut rng = stream(&[7]);
        for _ in 0..1000 {
            let u = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn threshold_endpoints_exact() {
        let mut rng = stream(&[11]);
        let t0 = bernoulli_threshold(0.0);
        let t1 = bernoulli_threshold(1.0);
        for _ in 0..100 {
            let u = rng.next_u64();
            assert!(!accept(u, t0));
            assert!(accept(u, t1));
        }
        assert_eq!(bernoulli_word(&mut rng, t0), 0);
        assert_eq!(bernoulli_word(&mut rng, t1), !0u64);
    }

    #[test]
    fn bernoulli_word_matches_law() {
        // mean of bit counts over many words should approximate p
        let p = 0.7055;
        let t = bernoulli_threshold(p);
        let mut rng = stream(&[13]);
        let words = 4000;
        let mut ones = 0u64;
        for _ in 0..words {
            ones += bernoulli_word(&mut rng, t).count_ones() as u64;
        }
        let mean = ones as f64 / (64.0 * words as f64);
        let sigma = (p * (1.0 - p) / (64.0 * words as f64)).sqrt();
        assert!(
            (mean - p).abs() < 5.0 * sigma,
            "mean {mean} too far from {p}"
        );
    }
}
