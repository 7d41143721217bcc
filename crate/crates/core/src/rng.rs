//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit [`SimRng`]. A run derives one
//! independent stream per (stage name, channel index) from its master seed:
//!
//! * the ChaCha8 key comes from the master seed via `seed_from_u64`;
//! * the ChaCha stream id is the 64-bit FNV-1a hash of the UTF-8 stage name,
//!   followed by the little-endian bytes of the channel index.
//!
//! Streams that share a key but differ in stream id never overlap, so drawing
//! more or fewer numbers in one stage never shifts another stage's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: impl IntoIterator<Item = u8>, mut hash: u64) -> u64 {
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Stream id for a (stage, channel) pair.
pub fn stream_id(stage: &str, channel: u32) -> u64 {
    let h = fnv1a(stage.bytes(), FNV_OFFSET);
    fnv1a(channel.to_le_bytes(), h)
}

/// Plain seeded generator, for callers that manage a single stream.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for `stage`/`channel` under `master_seed`.
pub fn stage_stream(master_seed: u64, stage: &str, channel: u32) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id(stage, channel));
    rng
}
