// SPDX-License-Identifier: Apache-2.0
//! Deterministic per-shot random streams.
//!
//! Every shot of an ensemble draws from its own ChaCha8 stream keyed by
//! `(seed, domain)` and selected by the shot index, so results never depend on
//! how shots are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains used by the library; keeps unrelated ensembles decorrelated.
pub mod domain {
    pub const EUR_INFO: u64 = 1;
    pub const EUR_JOINT: u64 = 2;
    pub const EUR_REFERENCE: u64 = 3;
    pub const WEAK_VALUE: u64 = 4;
    pub const TOMOGRAPHY: u64 = 5;
    pub const FEEDBACK: u64 = 6;
    pub const PRIOR: u64 = 7;
    pub const CLASSICAL: u64 = 8;
    pub const BINNING: u64 = 9;
    pub const GRID: u64 = 10;
    pub const TLS_SYNTHETIC: u64 = 11;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Factory handing out independent streams for `(seed, domain, index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamFactory {
    key: [u8; 32],
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self::with_domain(seed, 0)
    }

    pub fn with_domain(seed: u64, domain: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = splitmix64(seed) ^ splitmix64(domain.wrapping_add(0x5851_F42D_4C95_7F2D));
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { key, seed }
    }

    /// Factory for a sub-domain of this one.
    pub fn derive(&self, domain: u64) -> Self {
        let mut f = Self::with_domain(self.seed, domain);
        for (a, b) in f.key.iter_mut().zip(self.key.iter()) {
            *a ^= *b;
        }
        f
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for shot `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
