//! Raw-moment quality runs: draw `n` variates, compare the first five sample
//! raw moments with their exact values in units of the analytic standard
//! error.

use std::fmt;

use serde::Serialize;

use crate::sampler::{Algorithm, Distribution, Generator};
use crate::stats::{analytic_standard_error, MomentAccumulator, MOMENTS};
use crate::uniform::mix64;

/// A run passes when every moment is within this many standard errors.
pub const Z_LIMIT: f64 = 6.0;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub distribution: Distribution,
    pub algorithm: Algorithm,
    pub n: u64,
    pub seed: u64,
    pub jobs: usize,
    pub moments: [f64; MOMENTS],
    pub expected: [f64; MOMENTS],
    pub standard_errors: [f64; MOMENTS],
    pub z_scores: [f64; MOMENTS],
    pub pass: bool,
}

impl QualityReport {
    pub fn from_accumulator(
        distribution: Distribution,
        algorithm: Algorithm,
        seed: u64,
        jobs: usize,
        acc: &MomentAccumulator,
    ) -> Self {
        let n = acc.n();
        let moments = acc.raw_moments();
        let expected = std::array::from_fn(|k| distribution.raw_moment(k as u32 + 1));
        let standard_errors =
            std::array::from_fn(|k| analytic_standard_error(distribution, k as u32 + 1, n));
        let z_scores: [f64; MOMENTS] =
            std::array::from_fn(|k| (moments[k] - expected[k]) / standard_errors[k]);
        let pass = n > 0 && z_scores.iter().all(|z| z.abs() <= Z_LIMIT);
        Self {
            distribution,
            algorithm,
            n,
            seed,
            jobs,
            moments,
            expected,
            standard_errors,
            z_scores,
            pass,
        }
    }

    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} {} n={} seed={} jobs={}",
            self.algorithm, self.distribution, self.n, self.seed, self.jobs
        )?;
        writeln!(
            f,
            "{:>3} {:>22} {:>10} {:>12} {:>8}",
            "k", "moment", "expected", "std err", "z"
        )?;
        for k in 0..MOMENTS {
            writeln!(
                f,
                "X{:<2} {:>22.12} {:>10} {:>12.3e} {:>8.3}",
                k + 1,
                self.moments[k],
                self.expected[k],
                self.standard_errors[k],
                self.z_scores[k]
            )?;
        }
        write!(
            f,
            "{} (|z| <= {Z_LIMIT})",
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Seed for shard `index` of a sharded run. Shard 0 keeps the run seed, so
/// a one-job run draws exactly the stream of that seed.
pub fn shard_seed(seed: u64, index: usize) -> u64 {
    if index == 0 {
        seed
    } else {
        mix64(seed ^ mix64(index as u64))
    }
}

/// Moments of `n` draws from one generator seeded with `seed`.
pub fn accumulate(
    distribution: Distribution,
    algorithm: Algorithm,
    n: u64,
    seed: u64,
) -> MomentAccumulator {
    let mut generator = Generator::new(distribution, algorithm, seed);
    let mut acc = MomentAccumulator::new();
    let mut buf = vec![0.0; CHUNK];
    let mut left = n;
    while left > 0 {
        let take = left.min(CHUNK as u64) as usize;
        generator.fill(&mut buf[..take]);
        acc.extend_from_slice(&buf[..take]);
        left -= take as u64;
    }
    acc
}

/// Splits `n` across `jobs` threads with independent seeds and merges the
/// moment sums.
pub fn run_quality(
    distribution: Distribution,
    algorithm: Algorithm,
    n: u64,
    seed: u64,
    jobs: usize,
) -> QualityReport {
    let jobs = jobs.max(1);
    let per = n / jobs as u64;
    let extra = n % jobs as u64;
    let shards: Vec<MomentAccumulator> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|i| {
                let count = per + u64::from((i as u64) < extra);
                scope.spawn(move || accumulate(distribution, algorithm, count, shard_seed(seed, i)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("quality shard panicked"))
            .collect()
    });
    let mut total = MomentAccumulator::new();
    for shard in &shards {
        total.merge(shard);
    }
    QualityReport::from_accumulator(distribution, algorithm, seed, jobs, &total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_job_uses_the_seed_stream() {
        let acc = accumulate(Distribution::Exponential, Algorithm::Modified, 10_000, 3);
        let report = run_quality(Distribution::Exponential, Algorithm::Modified, 10_000, 3, 1);
        assert_eq!(report.moments, acc.raw_moments());
        assert_eq!(report.n, 10_000);
    }

    #[test]
    fn sharded_runs_cover_n_and_pass() {
        for d in Distribution::ALL {
            let r = run_quality(d, Algorithm::Modified, 200_001, 9, 3);
            assert_eq!(r.n, 200_001);
            assert!(r.pass, "{r}");
            assert_eq!(
                r.expected,
                std::array::from_fn(|k| d.raw_moment(k as u32 + 1))
            );
        }
    }

    #[test]
    fn biased_moments_fail() {
        let mut acc = MomentAccumulator::new();
        for i in 0..100_000 {
            acc.push(1.05 * (-(1.0 - (i as f64 + 0.5) / 100_000.0).ln()));
        }
        let r = QualityReport::from_accumulator(
            Distribution::Exponential,
            Algorithm::Modified,
            0,
            1,
            &acc,
        );
        assert!(!r.pass);
        assert!(r.max_abs_z() > Z_LIMIT);
    }

    #[test]
    fn empty_run_does_not_pass() {
        let r = run_quality(Distribution::Normal, Algorithm::Modified, 0, 1, 2);
        assert!(!r.pass);
        assert_eq!(r.n, 0);
    }

    #[test]
    fn shard_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..64).map(|i| shard_seed(5, i)).collect();
        assert_eq!(seeds.len(), 64);
        assert_eq!(shard_seed(5, 0), 5);
    }
}
