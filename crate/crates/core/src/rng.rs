//! Per-sentence random streams.
//!
//! Every random decision for a sentence is drawn from a generator keyed by
//! `(seed, pair_id, stage)`, so outputs never depend on scheduling or on how
//! many workers process the corpus.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Chunk,
    Combine,
}

impl Stage {
    fn salt(self) -> u64 {
        match self {
            Stage::Chunk => 0x63_68_75_6e_6b,
            Stage::Combine => 0x63_6f_6d_62_69_6e_65,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn stream(seed: u64, pair_id: u64, stage: Stage) -> StageRng {
    let key = splitmix64(splitmix64(seed ^ stage.salt()) ^ pair_id);
    ChaCha8Rng::seed_from_u64(key)
}
