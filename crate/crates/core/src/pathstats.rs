//! Branch-frequency runs: how often draws leave through the fast path, the
//! overhangs, the band test and the tail, next to the frequencies the tables
//! predict.

use serde::Serialize;

use crate::sampler::{Algorithm, Distribution, Generator};
use crate::traditional::TraditionalTables;
use crate::ziggurat::{PathCounts, Ziggurat};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathReport {
    pub distribution: Distribution,
    pub algorithm: Algorithm,
    pub n: u64,
    pub seed: u64,
    pub counts: PathCounts,
    /// Fast exits over passes through the first test.
    pub common_fraction: f64,
    pub expected_common_fraction: f64,
    /// Tail exits per draw.
    pub tail_fraction: f64,
    pub expected_tail_fraction: Option<f64>,
    /// Overhang points settled without evaluating the density.
    pub fast_accept_fraction: f64,
    /// Overhang points that needed the density.
    pub band_fraction: f64,
    pub expected_band_fraction: Option<f64>,
}

/// Probability that one pass exits through the first test.
pub fn expected_common_fraction(distribution: Distribution, algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::Modified => {
            let zig = ziggurat(distribution);
            zig.l_max() as f64 / zig.i_max() as f64
        }
        Algorithm::Traditional => traditional_tables(distribution).fast_accept_probability(),
    }
}

/// Share of overhang points that land in the band of the triangle split.
/// Points are uniform over the lower triangle, and the band
/// `{0 <= s - v < ε}` covers `2ε - ε²` of it. Plain rejection (ε = 0 tables)
/// evaluates every point.
pub fn expected_band_fraction(epsilon: f64) -> f64 {
    if epsilon > 0.0 {
        2.0 * epsilon - epsilon * epsilon
    } else {
        1.0
    }
}

fn ziggurat(distribution: Distribution) -> std::sync::Arc<Ziggurat> {
    match distribution {
        Distribution::Exponential => Ziggurat::exponential(),
        Distribution::Normal => Ziggurat::half_normal(),
    }
}

fn traditional_tables(distribution: Distribution) -> TraditionalTables {
    match Generator::new(distribution, Algorithm::Traditional, 0) {
        Generator::TraditionalExp(s) => s.tables().clone(),
        Generator::TraditionalNormal(s) => s.tables().clone(),
        _ => unreachable!("traditional generator"),
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn run_pathstats(
    distribution: Distribution,
    algorithm: Algorithm,
    n: u64,
    seed: u64,
) -> PathReport {
    let mut generator = Generator::new(distribution, algorithm, seed);
    let mut counts = PathCounts::default();
    for _ in 0..n {
        generator.sample_tracked(&mut counts);
    }
    let passes = counts.common + counts.exceptional;
    let attempts = counts.overhang_attempts();
    let (expected_tail_fraction, expected_band_fraction) = match algorithm {
        Algorithm::Modified => {
            let zig = ziggurat(distribution);
            // Each exceptional draw ends in the tail with the tail's share of
            // the overhang mass.
            let tail_share = zig.tables().a()[0];
            (
                Some(tail_share * ratio(counts.exceptional, counts.draws)),
                Some(expected_band_fraction(zig.epsilon())),
            )
        }
        Algorithm::Traditional => (None, None),
    };
    PathReport {
        distribution,
        algorithm,
        n,
        seed,
        common_fraction: ratio(counts.common, passes),
        expected_common_fraction: expected_common_fraction(distribution, algorithm),
        tail_fraction: ratio(counts.tail, counts.draws),
        expected_tail_fraction,
        fast_accept_fraction: ratio(counts.fast_accepts, attempts),
        band_fraction: ratio(counts.band_evaluations, attempts),
        expected_band_fraction,
        counts,
    }
}
