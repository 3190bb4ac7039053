//! Deterministic randomness for experiments.
//!
//! Every random deck in this crate comes from xoshiro256** seeded through
//! SplitMix64 (`rand_xoshiro::Xoshiro256StarStar::seed_from_u64`). Shuffles
//! are Fisher–Yates as implemented by `rand` 0.9's `SliceRandom::shuffle`,
//! which draws bounded indices through 32-bit arithmetic and therefore gives
//! the same deck for the same seed on every platform.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

pub type Prng = Xoshiro256StarStar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> Prng {
        Prng::seed_from_u64(self.0)
    }

    /// Child seed for the `index`-th independent sub-experiment.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(
            self.0 ^ splitmix64(index.wrapping_add(0x6A09_E667_F3BC_C909)),
        ))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Seed {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(Seed)
    }
}

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
