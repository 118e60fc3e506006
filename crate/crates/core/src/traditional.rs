//! The traditional ziggurat as a baseline: equal-area layers whose lower
//! right corners sit on the density, so they cover it, plus a base layer that
//! also owns the tail. Draws share the uniform source and the integer-domain
//! tricks of the modified samplers, so comparisons isolate the layer scheme.

use crate::density::{Density, DensityKind};
use crate::error::TableError;
use crate::uniform::{UniformSource, Xoshiro256pp};
use crate::ziggurat::{PathCounts, PathRecorder};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TraditionalTables {
    kind: DensityKind,
    i_max: usize,
    /// Base abscissa where the tail begins.
    r: f64,
    /// Common layer area.
    v: f64,
    /// `X[0] = v / P(r)`, `X[1] = r`, …, `X[i_max] = 0`.
    x: Vec<f64>,
    /// `F[i] = P(X[i])` for `i ≥ 1`, `F[0] = 0`, `F[i_max] = P(0)`.
    f: Vec<f64>,
    /// `k_i = X[i+1] / X[i]`.
    k: Vec<f64>,
}

impl TraditionalTables {
    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn layer_area(&self) -> f64 {
        self.v
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Area of layer `i`: the base strip plus tail for `i = 0`, otherwise the
    /// box `[0, X[i]] × [F[i], F[i+1]]`.
    pub fn area(&self, i: usize) -> f64 {
        if i == 0 {
            self.r * self.kind.density(self.r) + self.kind.cdf_complement(self.r)
        } else {
            self.x[i] * (self.f[i + 1] - self.f[i])
        }
    }

    /// Probability that one pass exits through the `U_1 < k_i` test.
    pub fn fast_accept_probability(&self) -> f64 {
        self.k.iter().sum::<f64>() / self.i_max as f64
    }
}

/// Stacks layers from a trial base `r`. `Err(())` means the stack reached
/// `P(0)` early, i.e. `r` is too small.
fn stack(kind: DensityKind, i_max: usize, r: f64) -> Result<(f64, Vec<f64>, f64), ()> {
    let v = r * kind.density(r) + kind.cdf_complement(r);
    let mut x = Vec::with_capacity(i_max + 1);
    x.push(v / kind.density(r));
    x.push(r);
    for i in 1..i_max - 1 {
        let y = kind.density(x[i]) + v / x[i];
        if y >= 1.0 {
            return Err(());
        }
        x.push(kind.inverse_density(y));
    }
    let overshoot = kind.density(x[i_max - 1]) + v / x[i_max - 1] - 1.0;
    Ok((v, x, overshoot))
}

/// Bisects on the base abscissa `r` so that `i_max` equal-area layers reach
/// exactly `P(0)`.
pub fn solve_traditional(
    kind: DensityKind,
    i_max: usize,
    tol: f64,
) -> Result<TraditionalTables, TableError> {
    if !(4..=crate::tables::MAX_IMAX).contains(&i_max) || !i_max.is_power_of_two() {
        return Err(TableError::InvalidImax(i_max));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(TableError::InvalidTolerance(tol));
    }
    let valid = |r: f64| matches!(stack(kind, i_max, r), Ok((_, _, h)) if h <= 0.0);

    let mut hi = 1.0_f64;
    let mut expansions = 0;
    while !valid(hi) {
        hi *= 1.5;
        expansions += 1;
        if expansions > 200 {
            return Err(TableError::NonConvergence("no valid base abscissa".into()));
        }
    }
    let mut lo = hi / 1.5;
    if valid(lo) {
        return Err(TableError::NonConvergence(
            "base abscissa not bracketed".into(),
        ));
    }
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if valid(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let r = hi;
    let (v, mut x, _) = stack(kind, i_max, r).expect("hi is valid");
    x.push(0.0);
    let mut f: Vec<f64> = x.iter().map(|&xi| kind.density(xi)).collect();
    f[0] = 0.0;
    let k = (0..i_max).map(|i| x[i + 1] / x[i]).collect();
    let tables = TraditionalTables {
        kind,
        i_max,
        r,
        v,
        x,
        f,
        k,
    };
    // Layers below the top are equal by construction. The top layer absorbs
    // the residual of a one-ulp bracket on r, amplified through the stack.
    for i in 0..i_max {
        let area = tables.area(i);
        let bound = if i + 1 == i_max {
            1e-11 * v
        } else {
            64.0 * f64::EPSILON * v
        };
        if (area - v).abs() > tol.max(bound) {
            return Err(TableError::NonConvergence(format!(
                "traditional layer {i} area {area:e} != {v:e}"
            )));
        }
    }
    Ok(tables)
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    scaled_x: f64,
    threshold: u64,
    f_lo: f64,
    f_hi: f64,
}

#[derive(Debug, Clone)]
struct Prepared {
    tables: TraditionalTables,
    layers: Box<[Layer]>,
    mask: u64,
}

impl Prepared {
    fn new(tables: TraditionalTables) -> Self {
        // Exponential compares the unsigned word against k·2^64, the normal
        // compares the magnitude of the signed word against k·2^63. Both
        // convert a 63-bit signed integer to the abscissa.
        let scale = match tables.kind {
            DensityKind::Exponential => 1.0,
            DensityKind::HalfNormal => 0.5,
        };
        let layers = (0..tables.i_max)
            .map(|i| Layer {
                scaled_x: tables.x[i] * 2.0 / TWO_POW_64,
                threshold: (tables.k[i] * scale * TWO_POW_64) as u64,
                f_lo: tables.f[i],
                f_hi: tables.f[i + 1],
            })
            .collect();
        Self {
            mask: tables.i_max as u64 - 1,
            tables,
            layers,
        }
    }

    fn build(kind: DensityKind) -> Self {
        Self::new(
            solve_traditional(kind, 256, crate::tables::DEFAULT_TOLERANCE)
                .expect("built-in traditional tables solve"),
        )
    }
}

fn shared(kind: DensityKind) -> std::sync::Arc<Prepared> {
    use std::sync::{Arc, OnceLock};
    static EXP: OnceLock<Arc<Prepared>> = OnceLock::new();
    static NORMAL: OnceLock<Arc<Prepared>> = OnceLock::new();
    let cell = match kind {
        DensityKind::Exponential => &EXP,
        DensityKind::HalfNormal => &NORMAL,
    };
    cell.get_or_init(|| Arc::new(Prepared::build(kind))).clone()
}

/// Traditional ziggurat exponential sampler.
#[derive(Debug, Clone)]
pub struct TraditionalExp<S = Xoshiro256pp> {
    zig: std::sync::Arc<Prepared>,
    source: S,
}

impl TraditionalExp<Xoshiro256pp> {
    pub fn from_seed(seed: u64) -> Self {
        Self::new(Xoshiro256pp::from_seed(seed))
    }
}

impl<S: UniformSource> TraditionalExp<S> {
    pub fn new(source: S) -> Self {
        Self {
            zig: shared(DensityKind::Exponential),
            source,
        }
    }

    pub fn tables(&self) -> &TraditionalTables {
        &self.zig.tables
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        Self::draw(&self.zig, &mut self.source, &mut ())
    }

    pub fn sample_tracked(&mut self, counts: &mut PathCounts) -> f64 {
        counts.draws += 1;
        Self::draw(&self.zig, &mut self.source, counts)
    }

    /// Sum of the next `n` draws; the stream advances as if sampled `n` times.
    pub fn sum_of(&mut self, n: u64) -> f64 {
        let mut src = self.source.clone();
        let mut total = 0.0;
        for _ in 0..n {
            total += Self::draw(&self.zig, &mut src, &mut ());
        }
        self.source = src;
        total
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        let mut src = self.source.clone();
        for slot in out {
            *slot = Self::draw(&self.zig, &mut src, &mut ());
        }
        self.source = src;
    }

    #[inline(always)]
    fn draw<R: PathRecorder>(zig: &Prepared, source: &mut S, rec: &mut R) -> f64 {
        loop {
            let u = source.next_u64();
            let i = (u & zig.mask) as usize;
            let layer = zig.layers[i];
            let x = ((u >> 1) as i64) as f64 * layer.scaled_x;
            if u < layer.threshold {
                rec.common();
                return x;
            }
            rec.exceptional();
            let (accepted, next) = Self::slow(zig, source.clone(), i, x, rec);
            *source = next;
            if let Some(x) = accepted {
                return x;
            }
        }
    }

    /// Source passed by value, matching the modified samplers.
    #[inline(never)]
    fn slow<R: PathRecorder>(
        zig: &Prepared,
        mut source: S,
        i: usize,
        x: f64,
        rec: &mut R,
    ) -> (Option<f64>, S) {
        let accepted = Self::retry(zig, &mut source, i, x, rec);
        (accepted, source)
    }

    #[inline(always)]
    fn retry<R: PathRecorder>(
        zig: &Prepared,
        source: &mut S,
        i: usize,
        x: f64,
        rec: &mut R,
    ) -> Option<f64> {
        if i == 0 {
            rec.tail();
            return Some(zig.tables.r - source.next_f64_open0().ln());
        }
        let layer = zig.layers[i];
        rec.band_evaluation();
        let y = layer.f_lo + source.next_f64() * (layer.f_hi - layer.f_lo);
        if y < (-x).exp() {
            rec.band_accept();
            Some(x)
        } else {
            rec.reject();
            None
        }
    }
}

/// Traditional ziggurat standard-normal sampler.
#[derive(Debug, Clone)]
pub struct TraditionalNormal<S = Xoshiro256pp> {
    zig: std::sync::Arc<Prepared>,
    source: S,
}

impl TraditionalNormal<Xoshiro256pp> {
    pub fn from_seed(seed: u64) -> Self {
        Self::new(Xoshiro256pp::from_seed(seed))
    }
}

impl<S: UniformSource> TraditionalNormal<S> {
    pub fn new(source: S) -> Self {
        Self {
            zig: shared(DensityKind::HalfNormal),
            source,
        }
    }

    pub fn tables(&self) -> &TraditionalTables {
        &self.zig.tables
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        Self::draw(&self.zig, &mut self.source, &mut ())
    }

    pub fn sample_tracked(&mut self, counts: &mut PathCounts) -> f64 {
        counts.draws += 1;
        Self::draw(&self.zig, &mut self.source, counts)
    }

    /// Sum of the next `n` draws; the stream advances as if sampled `n` times.
    pub fn sum_of(&mut self, n: u64) -> f64 {
        let mut src = self.source.clone();
        let mut total = 0.0;
        for _ in 0..n {
            total += Self::draw(&self.zig, &mut src, &mut ());
        }
        self.source = src;
        total
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        let mut src = self.source.clone();
        for slot in out {
            *slot = Self::draw(&self.zig, &mut src, &mut ());
        }
        self.source = src;
    }

    #[inline(always)]
    fn draw<R: PathRecorder>(zig: &Prepared, source: &mut S, rec: &mut R) -> f64 {
        loop {
            let u = source.next_u64() as i64;
            let i = (u as u64 & zig.mask) as usize;
            let layer = zig.layers[i];
            let x = u as f64 * layer.scaled_x;
            if u.unsigned_abs() < layer.threshold {
                rec.common();
                return x;
            }
            rec.exceptional();
            let (accepted, next) = Self::slow(zig, source.clone(), i, x, u < 0, rec);
            *source = next;
            if let Some(x) = accepted {
                return x;
            }
        }
    }

    #[inline(never)]
    fn slow<R: PathRecorder>(
        zig: &Prepared,
        mut source: S,
        i: usize,
        x: f64,
        negative: bool,
        rec: &mut R,
    ) -> (Option<f64>, S) {
        let accepted = Self::retry(zig, &mut source, i, x, negative, rec);
        (accepted, source)
    }

    #[inline(always)]
    fn retry<R: PathRecorder>(
        zig: &Prepared,
        source: &mut S,
        i: usize,
        x: f64,
        negative: bool,
        rec: &mut R,
    ) -> Option<f64> {
        if i == 0 {
            rec.tail();
            let r = zig.tables.r;
            let magnitude = loop {
                let t = -source.next_f64_open0().ln() / r;
                let e = -source.next_f64_open0().ln();
                if 2.0 * e > t * t {
                    break r + t;
                }
            };
            return Some(if negative { -magnitude } else { magnitude });
        }
        let layer = zig.layers[i];
        rec.band_evaluation();
        let y = layer.f_lo + source.next_f64() * (layer.f_hi - layer.f_lo);
        if y < (-0.5 * x * x).exp() {
            rec.band_accept();
            Some(x)
        } else {
            rec.reject();
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_base_matches_published_construction() {
        let t = solve_traditional(DensityKind::Exponential, 256, 1e-15).unwrap();
        // Every layer, the base included, has the same area.
        for i in 0..256 {
            assert!((t.area(i) - t.layer_area()).abs() < 1e-15, "layer {i}");
        }
        assert!((t.r() - 7.697_117_470_131_05).abs() < 1e-12, "{}", t.r());
        assert!((t.fast_accept_probability() - 0.977_779_655_325_431).abs() < 1e-12);
    }

    #[test]
    fn normal_base_matches_published_construction() {
        let t = solve_traditional(DensityKind::HalfNormal, 256, 1e-15).unwrap();
        assert!((t.r() - 3.654_152_885_361_009).abs() < 1e-12, "{}", t.r());
        for i in 0..255 {
            assert!((t.area(i) - t.layer_area()).abs() < 1e-15, "layer {i}");
        }
        assert!((t.area(255) - t.layer_area()).abs() < 1e-11 * t.layer_area());
    }

    #[test]
    fn ratios_in_unit_interval_and_layers_cover_density() {
        for kind in [DensityKind::Exponential, DensityKind::HalfNormal] {
            let t = solve_traditional(kind, 256, 1e-15).unwrap();
            assert!(t.k().iter().all(|k| (0.0..1.0).contains(k)));
            assert_eq!(t.k()[255], 0.0);
            for i in 1..256 {
                // Lower-right corner on the curve, so the curve over the
                // layer's height stays left of X[i].
                assert!((kind.density(t.x()[i]) - t.f()[i]).abs() < 1e-15);
                assert!(t.x()[i + 1] < t.x()[i]);
            }
        }
    }

    #[test]
    fn deterministic() {
        let mut a = TraditionalExp::from_seed(5);
        let mut b = TraditionalExp::from_seed(5);
        let mut c = TraditionalNormal::from_seed(5);
        let mut d = TraditionalNormal::from_seed(5);
        for _ in 0..10_000 {
            assert_eq!(a.sample().to_bits(), b.sample().to_bits());
            assert_eq!(c.sample().to_bits(), d.sample().to_bits());
        }
    }

    #[test]
    fn rejects_bad_imax() {
        assert_eq!(
            solve_traditional(DensityKind::Exponential, 2, 1e-15),
            Err(TableError::InvalidImax(2))
        );
    }
}
