//! Deterministic random-stream derivation.
//!
//! Every stochastic operation in the crate takes a [`SeedSpec`] and derives
//! its generator through [`derive_stream`]. The derivation is a fixed,
//! versioned pure function: equal specs produce bit-identical streams on any
//! platform, and distinct `stream_index` values produce independent streams,
//! so experiments can fan out trials by indexing.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator type handed out by [`derive_stream`].
pub type RandomStream = ChaCha8Rng;

/// Stream index reserved for bootstrap resampling inside the sweep harness.
/// Trial streams count up from zero, so the reserved index never collides at
/// any realistic sweep size.
pub const BOOTSTRAP_STREAM_INDEX: u64 = u64::MAX;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    /// The same master seed with a different stream index.
    pub fn with_stream(self, stream_index: u64) -> Self {
        SeedSpec {
            master_seed: self.master_seed,
            stream_index,
        }
    }

    /// Shorthand for `derive_stream(self)`.
    pub fn stream(self) -> RandomStream {
        derive_stream(self)
    }
}

// Derivation version 1: splitmix64 key schedule feeding ChaCha8.
//
// The 256-bit ChaCha key is the first four outputs of a splitmix64 sequence
// whose initial state absorbs the stream index via an odd multiplier, so the
// map (master_seed, stream_index) -> state is injective in each argument.
// These constants are part of the output contract; changing any of them
// changes every derived stream and would invalidate recorded results.
const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_MULTIPLIER: u64 = 0xA24B_AED4_963E_E407;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the random stream named by `seed`.
pub fn derive_stream(seed: SeedSpec) -> RandomStream {
    let mut state = seed
        .master_seed
        .wrapping_add(seed.stream_index.wrapping_mul(STREAM_MULTIPLIER));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
