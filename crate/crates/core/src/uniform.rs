//! Uniform 64-bit bit streams feeding the samplers.
//!
//! Samplers are generic over [`UniformSource`], so any generator can be
//! plugged in. The default is xoshiro256++.

use std::time::{SystemTime, UNIX_EPOCH};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::SourceError;

/// Environment variable that overrides automatic seeding.
pub const SEED_ENV: &str = "ZIGFAST_SEED";

/// Largest number of low bits a sampler may take from a word as an index.
pub const MAX_INDEX_BITS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorId {
    Xoshiro256PlusPlus,
    SplitMix64,
}

/// A seeded stream of uniformly distributed 64-bit words. Cloning forks the
/// stream at its current position.
pub trait UniformSource: Clone {
    fn next_u64(&mut self) -> u64;

    fn generator_id(&self) -> GeneratorId;

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform on `(0, 1]`, safe to take the logarithm of.
    #[inline]
    fn next_f64_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Top 53 bits of `u` as a float in `[0, 1)`.
#[inline]
pub fn unit_f64(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Splits the low `bits` bits off `u` as an index. The word is returned
/// unmodified: those bits fall below the mantissa once the word is scaled to
/// a float, so the same word still serves as the uniform.
#[inline]
pub fn split_index(u: u64, bits: u32) -> Result<(usize, u64), SourceError> {
    if bits == 0 || bits > MAX_INDEX_BITS {
        return Err(SourceError::BitBudgetExceeded(bits));
    }
    Ok(((u & ((1u64 << bits) - 1)) as usize, u))
}

/// The SplitMix64 output mix; also used to hash seed material.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// xoshiro256++ seeded through SplitMix64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xoshiro256pp(Xoshiro256PlusPlus);

impl Xoshiro256pp {
    pub fn from_seed(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Seeded from `ZIGFAST_SEED` when set, otherwise from the clock and
    /// process ids.
    pub fn seed_auto() -> Self {
        Self::from_seed(auto_seed())
    }
}

impl UniformSource for Xoshiro256pp {
    #[inline(always)]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn generator_id(&self) -> GeneratorId {
        GeneratorId::Xoshiro256PlusPlus
    }
}

/// SplitMix64: tiny and fast, kept as an alternative source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn from_seed(seed: u64) -> Self {
        Self { state: seed }
    }
}

impl UniformSource for SplitMix64 {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }

    fn generator_id(&self) -> GeneratorId {
        GeneratorId::SplitMix64
    }
}

/// Parses `ZIGFAST_SEED` if present.
pub fn seed_from_env() -> Result<Option<u64>, SourceError> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| SourceError::BadSeedVariable(raw)),
        Err(_) => Ok(None),
    }
}

/// Hash of wall-clock time, process id and parent process id.
pub fn entropy_seed() -> u64 {
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    let pid = std::process::id() as u64;
    let ppid = parent_pid().unwrap_or(0x5851_f42d);
    mix64(mix64(mix64(nanos) ^ pid.rotate_left(32)) ^ ppid)
}

/// `ZIGFAST_SEED` when it parses, otherwise [`entropy_seed`].
pub fn auto_seed() -> u64 {
    seed_from_env().ok().flatten().unwrap_or_else(entropy_seed)
}

#[cfg(unix)]
fn parent_pid() -> Option<u64> {
    Some(std::os::unix::process::parent_id() as u64)
}

#[cfg(not(unix))]
fn parent_pid() -> Option<u64> {
    None
}
