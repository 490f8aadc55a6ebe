//! Derived RNG streams.
//!
//! Every randomized component draws from its own `ChaCha8Rng` keyed by
//! `(master seed, purpose tag, entity index)`. Toggling one generator
//! feature therefore never shifts the draws seen by an unrelated entity,
//! which is what keeps e.g. subscriber traffic byte-identical when SIM
//! migration is switched on and off.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; decorrelates nearby (seed, tag, idx) triples.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, tag: u64, idx: u64) -> ChaCha8Rng {
    let key = mix(mix(seed ^ mix(tag)) ^ idx);
    ChaCha8Rng::seed_from_u64(key)
}
