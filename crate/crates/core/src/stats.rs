//! Statistics used by the quality runs and the test suites: compensated raw
//! moments, Kolmogorov–Smirnov tests, chi-square and binomial checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::numeric::CompensatedSum;
use crate::sampler::Distribution;

/// Number of raw moments tracked.
pub const MOMENTS: usize = 5;

/// Running sums of `x, x², …, x⁵` with compensated summation. Merging two
/// accumulators is exact up to the compensation of the final sums.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    n: u64,
    sums: [CompensatedSum; MOMENTS],
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let mut power = x;
        for sum in &mut self.sums {
            sum.add(power);
            power *= x;
        }
    }

    pub fn extend_from_slice(&mut self, xs: &[f64]) {
        for &x in xs {
            self.push(x);
        }
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.n += other.n;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `[mean of x, mean of x², …]`; NaN when empty.
    pub fn raw_moments(&self) -> [f64; MOMENTS] {
        let n = self.n as f64;
        std::array::from_fn(|k| self.sums[k].value() / n)
    }
}

/// Standard error of the `k`-th sample raw moment at sample size `n`, from
/// the exact moments: `sqrt((E[X^2k] - E[X^k]^2) / n)`.
pub fn analytic_standard_error(distribution: Distribution, k: u32, n: u64) -> f64 {
    let m = distribution.raw_moment(k);
    ((distribution.raw_moment(2 * k) - m * m) / n as f64).sqrt()
}

/// Kolmogorov distribution survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Small-λ series converges fast where the alternating one does not.
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let t = -pi2 / (8.0 * lambda * lambda);
        let series: f64 = (1..=6)
            .map(|j| {
                let odd = (2 * j - 1) as f64;
                (odd * odd * t).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * series).clamp(0.0, 1.0);
    }
    let mut total = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        total += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * total).clamp(0.0, 1.0)
}

/// Asymptotic KS p-value for statistic `d` with effective size `n`, using
/// the usual small-sample correction of the scale factor.
fn ks_p_value(d: f64, n: f64) -> f64 {
    let root = n.sqrt();
    kolmogorov_sf((root + 0.12 + 0.11 / root) * d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test against `cdf`. Sorts `sample` in place.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> KsResult {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let statistic = sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    KsResult {
        statistic,
        p_value: ks_p_value(statistic, n),
    }
}

/// Two-sample KS test. Sorts both slices in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> KsResult {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut statistic: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        statistic = statistic.max((i as f64 / na - j as f64 / nb).abs());
    }
    KsResult {
        statistic,
        p_value: ks_p_value(statistic, na * nb / (na + nb)),
    }
}

/// Pearson chi-square of observed counts against expected probabilities.
/// Returns `(statistic, p_value)` with `len - 1` degrees of freedom.
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), probabilities.len());
    let total: u64 = observed.iter().sum();
    let statistic: f64 = observed
        .iter()
        .zip(probabilities)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .count()
        .saturating_sub(1);
    let p_value = ChiSquared::new(dof.max(1) as f64)
        .map(|c| c.sf(statistic))
        .unwrap_or(f64::NAN);
    (statistic, p_value)
}

/// z-score of `successes` out of `trials` against success probability `p`.
pub fn binomial_z(successes: u64, trials: u64, p: f64) -> f64 {
    let n = trials as f64;
    (successes as f64 - n * p) / (n * p * (1.0 - p)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniform::{UniformSource, Xoshiro256pp};
    use proptest::prelude::*;

    #[test]
    fn moments_of_known_values() {
        let mut acc = MomentAccumulator::new();
        acc.extend_from_slice(&[1.0, 2.0, 3.0]);
        let m = acc.raw_moments();
        assert_eq!(m[0], 2.0);
        assert!((m[1] - 14.0 / 3.0).abs() < 1e-15);
        assert_eq!(m[4], (1.0 + 32.0 + 243.0) / 3.0);
        assert!(MomentAccumulator::new().raw_moments()[0].is_nan());
    }

    proptest! {
        #[test]
        fn merge_matches_single_pass(xs in prop::collection::vec(-10.0f64..10.0, 0..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let mut whole = MomentAccumulator::new();
            whole.extend_from_slice(&xs);
            let mut left = MomentAccumulator::new();
            left.extend_from_slice(&xs[..split]);
            let mut right = MomentAccumulator::new();
            right.extend_from_slice(&xs[split..]);
            left.merge(&right);
            prop_assert_eq!(left.n(), whole.n());
            if !xs.is_empty() {
                for (a, b) in left.raw_moments().iter().zip(whole.raw_moments()) {
                    prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn standard_errors() {
        // Var(X) = 1 for both at k = 1.
        assert_eq!(
            analytic_standard_error(Distribution::Exponential, 1, 100),
            0.1
        );
        assert_eq!(analytic_standard_error(Distribution::Normal, 1, 100), 0.1);
        // Var(X²) for the normal is 3 - 1 = 2.
        assert!((analytic_standard_error(Distribution::Normal, 2, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // P(K > 1.3581) = 0.05 and P(K > 1.9495) = 0.001.
        assert!((kolmogorov_sf(1.358_099_9) - 0.05).abs() < 1e-6);
        assert!((kolmogorov_sf(1.949_5) - 0.001).abs() < 1e-5);
        // Both series agree where they meet.
        let below = kolmogorov_sf(1.18 - 1e-12);
        let above = kolmogorov_sf(1.18);
        assert!((below - above).abs() < 1e-10);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(10.0) < 1e-80);
    }

    #[test]
    fn ks_accepts_uniforms_and_rejects_shift() {
        let mut src = Xoshiro256pp::from_seed(4);
        let mut xs: Vec<f64> = (0..20_000).map(|_| src.next_f64()).collect();
        let r = ks_one_sample(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(r.p_value > 0.001, "{r:?}");
        let mut shifted: Vec<f64> = xs.iter().map(|x| x * 0.97).collect();
        assert!(ks_one_sample(&mut shifted, |x| x.clamp(0.0, 1.0)).p_value < 1e-6);

        let mut ys: Vec<f64> = (0..20_000).map(|_| src.next_f64()).collect();
        assert!(ks_two_sample(&mut xs, &mut ys).p_value > 0.001);
        let mut zs: Vec<f64> = (0..20_000).map(|_| src.next_f64().powf(1.2)).collect();
        assert!(ks_two_sample(&mut xs, &mut zs).p_value < 1e-6);
    }

    #[test]
    fn two_sample_statistic_on_small_case() {
        let mut a = [1.0, 2.0, 3.0];
        let mut b = [2.5, 3.5, 4.5, 5.5];
        let r = ks_two_sample(&mut a, &mut b);
        assert!((r.statistic - 0.75).abs() < 1e-15);
    }

    #[test]
    fn chi_square_and_binomial() {
        let (stat, p) = chi_square(&[50, 50], &[0.5, 0.5]);
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, p) = chi_square(&[90, 10], &[0.5, 0.5]);
        assert!(p < 1e-10);
        assert_eq!(binomial_z(50, 100, 0.5), 0.0);
        assert!((binomial_z(60, 100, 0.5) - 2.0).abs() < 1e-12);
    }
}
