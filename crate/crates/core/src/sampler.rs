//! Run-time selection of distribution and algorithm, and the paired
//! exponential/normal generator used by bulk front ends.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::density::DensityKind;
use crate::exp::ExpSampler;
use crate::normal::NormalSampler;
use crate::traditional::{TraditionalExp, TraditionalNormal};
use crate::ziggurat::PathCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Exponential,
    Normal,
}

impl Distribution {
    pub const ALL: [Distribution; 2] = [Distribution::Exponential, Distribution::Normal];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Exponential => "exponential",
            Distribution::Normal => "normal",
        }
    }

    /// The one-sided density the ziggurat is built over.
    pub fn density_kind(self) -> DensityKind {
        match self {
            Distribution::Exponential => DensityKind::Exponential,
            Distribution::Normal => DensityKind::HalfNormal,
        }
    }

    /// `E[X^k]`: `k!` for the unit exponential, `(k-1)!!` for even `k` and
    /// zero for odd `k` for the standard normal.
    pub fn raw_moment(self, k: u32) -> f64 {
        match self {
            Distribution::Exponential => (1..=k).map(f64::from).product(),
            Distribution::Normal if k % 2 == 1 => 0.0,
            Distribution::Normal => (1..k).step_by(2).map(f64::from).product(),
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Distribution::Exponential if x <= 0.0 => 0.0,
            Distribution::Exponential => -(-x).exp_m1(),
            Distribution::Normal => 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exp" | "exponential" => Ok(Distribution::Exponential),
            "normal" | "gaussian" => Ok(Distribution::Normal),
            other => Err(format!(
                "unknown distribution `{other}` (expected exp or normal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Layers beneath the density, alias-selected overhangs.
    Modified,
    /// Covering layers with a ratio test on every draw.
    Traditional,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Modified => "modified",
            Algorithm::Traditional => "traditional",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "modified" | "mod" => Ok(Algorithm::Modified),
            "traditional" | "trad" => Ok(Algorithm::Traditional),
            other => Err(format!(
                "unknown algorithm `{other}` (expected modified or traditional)"
            )),
        }
    }
}

/// Any of the four samplers behind one type. Dispatch happens once per call,
/// so bulk methods keep their inner loops monomorphic.
#[derive(Debug, Clone)]
pub enum Generator {
    ModifiedExp(ExpSampler),
    ModifiedNormal(NormalSampler),
    TraditionalExp(TraditionalExp),
    TraditionalNormal(TraditionalNormal),
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $body:expr) => {
        match $self {
            Generator::ModifiedExp($s) => $body,
            Generator::ModifiedNormal($s) => $body,
            Generator::TraditionalExp($s) => $body,
            Generator::TraditionalNormal($s) => $body,
        }
    };
}

impl Generator {
    pub fn new(distribution: Distribution, algorithm: Algorithm, seed: u64) -> Self {
        match (algorithm, distribution) {
            (Algorithm::Modified, Distribution::Exponential) => {
                Generator::ModifiedExp(ExpSampler::from_seed(seed))
            }
            (Algorithm::Modified, Distribution::Normal) => {
                Generator::ModifiedNormal(NormalSampler::from_seed(seed))
            }
            (Algorithm::Traditional, Distribution::Exponential) => {
                Generator::TraditionalExp(TraditionalExp::from_seed(seed))
            }
            (Algorithm::Traditional, Distribution::Normal) => {
                Generator::TraditionalNormal(TraditionalNormal::from_seed(seed))
            }
        }
    }

    pub fn distribution(&self) -> Distribution {
        match self {
            Generator::ModifiedExp(_) | Generator::TraditionalExp(_) => Distribution::Exponential,
            Generator::ModifiedNormal(_) | Generator::TraditionalNormal(_) => Distribution::Normal,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Generator::ModifiedExp(_) | Generator::ModifiedNormal(_) => Algorithm::Modified,
            Generator::TraditionalExp(_) | Generator::TraditionalNormal(_) => {
                Algorithm::Traditional
            }
        }
    }

    pub fn sample(&mut self) -> f64 {
        dispatch!(self, s => s.sample())
    }

    pub fn sample_tracked(&mut self, counts: &mut PathCounts) -> f64 {
        dispatch!(self, s => s.sample_tracked(counts))
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        dispatch!(self, s => s.fill(out))
    }

    pub fn sum_of(&mut self, n: u64) -> f64 {
        dispatch!(self, s => s.sum_of(n))
    }
}

/// An exponential and a normal sampler sharing one seed. Each owns its own
/// source seeded with that value, so either stream equals a standalone
/// sampler built from the same seed.
#[derive(Debug, Clone)]
pub struct SamplerPair {
    exp: ExpSampler,
    normal: NormalSampler,
}

impl SamplerPair {
    pub fn new(seed: u64) -> Self {
        Self {
            exp: ExpSampler::from_seed(seed),
            normal: NormalSampler::from_seed(seed),
        }
    }

    pub fn seed_auto() -> Self {
        Self::new(crate::uniform::auto_seed())
    }

    /// Restarts both streams.
    pub fn seed(&mut self, seed: u64) {
        *self = Self::new(seed);
    }

    pub fn fill_exponential(&mut self, out: &mut [f64]) {
        self.exp.fill(out);
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        self.normal.fill(out);
    }

    pub fn exponential(&mut self, size: usize) -> Vec<f64> {
        let mut out = vec![0.0; size];
        self.exp.fill(&mut out);
        out
    }

    pub fn normal(&mut self, size: usize) -> Vec<f64> {
        let mut out = vec![0.0; size];
        self.normal.fill(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_moments() {
        let e: Vec<f64> = (1..=5)
            .map(|k| Distribution::Exponential.raw_moment(k))
            .collect();
        assert_eq!(e, [1.0, 2.0, 6.0, 24.0, 120.0]);
        let n: Vec<f64> = (1..=10)
            .map(|k| Distribution::Normal.raw_moment(k))
            .collect();
        assert_eq!(n, [0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0, 0.0, 945.0]);
        assert_eq!(Distribution::Exponential.raw_moment(10), 3_628_800.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!("exp".parse(), Ok(Distribution::Exponential));
        assert_eq!("normal".parse(), Ok(Distribution::Normal));
        assert!("cauchy".parse::<Distribution>().is_err());
        assert_eq!("trad".parse(), Ok(Algorithm::Traditional));
    }

    #[test]
    fn cdf_values() {
        assert_eq!(Distribution::Exponential.cdf(-1.0), 0.0);
        assert!((Distribution::Exponential.cdf(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-16);
        assert!((Distribution::Normal.cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((Distribution::Normal.cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-14);
    }

    #[test]
    fn pair_streams_match_standalone_samplers() {
        let mut pair = SamplerPair::new(7);
        let e = pair.exponential(100);
        let n = pair.normal(100);
        let mut exp = ExpSampler::from_seed(7);
        let mut normal = NormalSampler::from_seed(7);
        for i in 0..100 {
            assert_eq!(e[i].to_bits(), exp.sample().to_bits());
            assert_eq!(n[i].to_bits(), normal.sample().to_bits());
        }
        pair.seed(7);
        assert_eq!(pair.exponential(100), e);
        assert!(pair.exponential(0).is_empty());
    }

    #[test]
    fn generator_bulk_and_scalar_agree() {
        for d in Distribution::ALL {
            for a in [Algorithm::Modified, Algorithm::Traditional] {
                let mut g = Generator::new(d, a, 11);
                let mut h = Generator::new(d, a, 11);
                assert_eq!((g.distribution(), g.algorithm()), (d, a));
                let mut buf = vec![0.0; 257];
                g.fill(&mut buf);
                let total: f64 = buf.iter().sum();
                let mut scalar = 0.0;
                for v in &buf {
                    let w = h.sample();
                    assert_eq!(v.to_bits(), w.to_bits());
                    scalar += w;
                }
                assert_eq!(total, scalar);
                let mut g2 = Generator::new(d, a, 11);
                assert_eq!(g2.sum_of(257), scalar);
                assert_eq!(g2.sample().to_bits(), h.sample().to_bits());
            }
        }
    }
}
