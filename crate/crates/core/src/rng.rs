//! Deterministic derivation of per-purpose random streams from one root seed.
//!
//! Every random draw in the lab comes from a [`ChaCha8Rng`] built by
//! [`stream`], keyed by the root seed, a purpose label and a path of indices
//! (repeat index, node id, ...). Two consumers that use different labels never
//! share randomness, so an attacked run and its baseline can agree on every
//! stream the attack does not touch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    h
}

/// Mixes a root seed, a label and an index path into a 64-bit key.
pub fn derive_key(root: u64, label: &str, path: &[u64]) -> u64 {
    let mut state = root ^ fnv1a(label.as_bytes()).rotate_left(17);
    let mut key = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(GOLDEN) ^ key;
        key = splitmix64(&mut state);
    }
    key
}

/// Returns the random stream named by `(root, label, path)`.
pub fn stream(root: u64, label: &str, path: &[u64]) -> ChaCha8Rng {
    let mut state = derive_key(root, label, path);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
