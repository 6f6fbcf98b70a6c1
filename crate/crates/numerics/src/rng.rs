//! Deterministic RNG substreams.
//!
//! A stream is addressed by a master seed plus a path of integers (for
//! example grid cell and replication). Mixing the path through splitmix64
//! gives each address an independent ChaCha seed, so results never depend on
//! the order in which work items are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit seed for the stream at `path` under `seed`.
pub fn stream_seed(seed: u64, path: &[u64]) -> [u8; 32] {
    let mut h = splitmix64(seed);
    for (depth, p) in path.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(p.wrapping_add((depth as u64 + 1) << 56)));
    }
    let mut out = [0u8; 32];
    let mut s = h;
    for chunk in out.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::from_seed(stream_seed(seed, path))
}
