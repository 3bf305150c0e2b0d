// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Splittable, seedable random streams.
//!
//! Every random decision in the crate is drawn from a [`StreamKey`]. A key is
//! a 128-bit label; [`StreamKey::child`] derives an independent label for a
//! sub-task (trial index, tree child, phase tag) so that results never depend
//! on scheduling order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Concrete generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A position in the tree of random streams. Serializes as a 32-digit hex
/// string so that JSON consumers without 128-bit integers keep every bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct StreamKey(pub u128);

impl From<StreamKey> for String {
    fn from(k: StreamKey) -> String {
        format!("{:032x}", k.0)
    }
}

impl TryFrom<String> for StreamKey {
    type Error = std::num::ParseIntError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        u128::from_str_radix(&s, 16).map(StreamKey)
    }
}

impl StreamKey {
    /// Root key for a user-facing seed.
    pub fn from_seed(seed: u64) -> Self {
        let lo = mix64(seed ^ GOLDEN);
        let hi = mix64(lo.wrapping_add(seed).wrapping_add(GOLDEN.rotate_left(17)));
        StreamKey(((hi as u128) << 64) | lo as u128)
    }

    /// Derives the key of the `index`-th child stream.
    pub fn child(self, index: u64) -> Self {
        let lo = self.0 as u64;
        let hi = (self.0 >> 64) as u64;
        let t = mix64(index.wrapping_mul(GOLDEN) ^ 0x5851_f42d_4c95_7f2d);
        let nlo = mix64(lo ^ t);
        let nhi = mix64(hi.wrapping_add(nlo).wrapping_add(t.rotate_left(29)));
        StreamKey(((nhi as u128) << 64) | nlo as u128)
    }

    /// Instantiates the generator for this key.
    pub fn rng(self) -> StreamRng {
        let lo = self.0 as u64;
        let hi = (self.0 >> 64) as u64;
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&lo.to_le_bytes());
        seed[8..16].copy_from_slice(&hi.to_le_bytes());
        seed[16..24].copy_from_slice(&mix64(lo ^ hi).to_le_bytes());
        seed[24..].copy_from_slice(&mix64(hi.wrapping_add(GOLDEN)).to_le_bytes());
        ChaCha8Rng::from_seed(seed)
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_le_bytes()
    }

    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        StreamKey(u128::from_le_bytes(bytes))
    }
}

/// Phase tags used when splitting a master key.
pub(crate) mod tag {
    pub const GATE: u64 = 0x6761_7465;
    pub const MONTE_CARLO: u64 = 0x6d63;
    pub const RCA_RUNS: u64 = 0x7263_61;
    pub const HASH_TABLE: u64 = 0x6861_7368;
    pub const ESTIMATOR: u64 = 0x6573_74;
    pub const REGATE: u64 = 0x7265_6761_7465;
}
