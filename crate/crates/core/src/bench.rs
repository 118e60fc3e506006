//! Generate-and-aggregate timing: each trial sums `n` fresh draws, so the
//! optimizer cannot drop the work, and reports keep the median of the trials.

use std::time::Instant;

use serde::Serialize;

use crate::sampler::{Algorithm, Distribution, Generator};

/// Fewest trials a report may be based on.
pub const MIN_TRIALS: usize = 3;

/// Speedups of the modified sampler over an optimized external C ziggurat,
/// carried in reports as targets. The in-repo baseline shares the generator
/// and integer tricks, so its gap is smaller.
pub fn target_speedup(distribution: Distribution) -> f64 {
    match distribution {
        Distribution::Exponential => 1.65,
        Distribution::Normal => 1.83,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub algorithm: Algorithm,
    pub distribution: Distribution,
    pub n: u64,
    pub trials: usize,
    pub seconds: Vec<f64>,
    pub median_seconds: f64,
    /// Draws per second at the median.
    pub throughput: f64,
    /// Traditional median over this median; present when the traditional
    /// baseline ran in the same session.
    pub speedup_vs_baseline: Option<f64>,
    pub target_speedup: Option<f64>,
    /// Sum from the last trial, printed so the work is observable.
    pub checksum: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.is_empty() {
        f64::NAN
    } else if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// One timed trial: builds the generator outside the clock, then sums `n`
/// draws. Returns `(seconds, sum)`.
pub fn time_trial(
    distribution: Distribution,
    algorithm: Algorithm,
    n: u64,
    seed: u64,
) -> (f64, f64) {
    let mut generator = Generator::new(distribution, algorithm, seed);
    // Touch the shared tables so their one-time construction is not timed.
    std::hint::black_box(generator.sample());
    let start = Instant::now();
    let sum = std::hint::black_box(generator.sum_of(std::hint::black_box(n)));
    (start.elapsed().as_secs_f64(), sum)
}

/// Times every algorithm in `algorithms` for `trials` rounds, interleaving
/// algorithms within each round so slow drift in machine speed hits all of
/// them alike.
pub fn run_bench(
    distribution: Distribution,
    algorithms: &[Algorithm],
    n: u64,
    trials: usize,
    seed: u64,
) -> Result<Vec<BenchReport>, String> {
    if trials < MIN_TRIALS {
        return Err(format!("need at least {MIN_TRIALS} trials, got {trials}"));
    }
    if algorithms.is_empty() {
        return Err("no algorithms selected".into());
    }
    let mut seconds = vec![Vec::with_capacity(trials); algorithms.len()];
    let mut checksums = vec![0.0; algorithms.len()];
    for trial in 0..trials {
        for (slot, &algorithm) in algorithms.iter().enumerate() {
            let (t, sum) = time_trial(distribution, algorithm, n, seed.wrapping_add(trial as u64));
            seconds[slot].push(t);
            checksums[slot] = sum;
        }
    }
    let medians: Vec<f64> = seconds.iter().map(|s| median(s)).collect();
    let baseline = algorithms
        .iter()
        .position(|&a| a == Algorithm::Traditional)
        .map(|i| medians[i]);
    Ok(algorithms
        .iter()
        .enumerate()
        .map(|(i, &algorithm)| BenchReport {
            algorithm,
            distribution,
            n,
            trials,
            seconds: seconds[i].clone(),
            median_seconds: medians[i],
            throughput: n as f64 / medians[i],
            speedup_vs_baseline: baseline.map(|b| b / medians[i]),
            target_speedup: (algorithm == Algorithm::Modified)
                .then(|| target_speedup(distribution)),
            checksum: checksums[i],
        })
        .collect())
}
