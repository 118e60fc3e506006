//! Standard normal variates: the modified ziggurat over the half-normal
//! `e^{-x²/2}`, with the sign taken from the same word read as signed.
//!
//! The half-normal changes curvature at `x = 1`, so its overhang boxes use
//! plain rejection. The tail past `r = X[1]` uses the exponential-based
//! transform: `x = E₁ / r`, accept when `2·E₂ > x²`, return `r + x`.

use std::sync::Arc;

use crate::density::DensityKind;
use crate::error::SamplerError;
use crate::exp;
use crate::uniform::{UniformSource, Xoshiro256pp};
use crate::ziggurat::{PathCounts, PathRecorder, Ziggurat};

#[inline(always)]
pub(crate) fn draw<S: UniformSource, R: PathRecorder>(
    zig: &Ziggurat,
    exp_zig: &Ziggurat,
    src: &mut S,
    rec: &mut R,
) -> f64 {
    let u = src.next_u64();
    if let Some(scale) = zig.fast_scale(u) {
        rec.common();
        return (u as i64) as f64 * scale;
    }
    let (magnitude, next) = exceptional(zig, exp_zig, src.clone(), rec);
    *src = next;
    if (u as i64) < 0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Magnitude from one alias-selected slot, retrying that slot until it yields.
/// The source moves in and out by value, as in the exponential sampler.
#[inline(never)]
pub(crate) fn exceptional<S: UniformSource, R: PathRecorder>(
    zig: &Ziggurat,
    exp_zig: &Ziggurat,
    mut src: S,
    rec: &mut R,
) -> (f64, S) {
    rec.exceptional();
    let j = zig.draw_slot(&mut src);
    rec.slot(j);
    if j == 0 {
        rec.tail();
        return (tail(zig.tail_start(), exp_zig, &mut src), src);
    }
    let x = loop {
        if let Some(x) = overhang(zig, &mut src, j, rec) {
            break x;
        }
    };
    (x, src)
}

pub(crate) fn overhang<S: UniformSource, R: PathRecorder>(
    zig: &Ziggurat,
    src: &mut S,
    j: usize,
    rec: &mut R,
) -> Option<f64> {
    let b = zig.overhang_box(j);
    let x = b.x_right - src.next_f64() * b.width();
    let y = b.y_bottom + src.next_f64() * b.height();
    rec.band_evaluation();
    if y < (-0.5 * x * x).exp() {
        rec.band_accept();
        Some(x)
    } else {
        rec.reject();
        None
    }
}

/// Half-normal tail past `r`, from pairs of unit exponentials.
pub(crate) fn tail<S: UniformSource>(r: f64, exp_zig: &Ziggurat, src: &mut S) -> f64 {
    loop {
        if let Some(x) = tail_attempt(r, exp_zig, src) {
            return x;
        }
    }
}

#[inline]
pub(crate) fn tail_attempt<S: UniformSource>(
    r: f64,
    exp_zig: &Ziggurat,
    src: &mut S,
) -> Option<f64> {
    let x = exp::draw(exp_zig, src, &mut ()) / r;
    let e = exp::draw(exp_zig, src, &mut ());
    (2.0 * e > x * x).then_some(r + x)
}

/// Standard normal sampler.
#[derive(Debug, Clone)]
pub struct NormalSampler<S = Xoshiro256pp> {
    zig: Arc<Ziggurat>,
    exp_zig: Arc<Ziggurat>,
    source: S,
}

impl NormalSampler<Xoshiro256pp> {
    pub fn from_seed(seed: u64) -> Self {
        Self::new(Xoshiro256pp::from_seed(seed))
    }

    pub fn seed_auto() -> Self {
        Self::new(Xoshiro256pp::seed_auto())
    }
}

impl<S: UniformSource> NormalSampler<S> {
    pub fn new(source: S) -> Self {
        Self {
            zig: Ziggurat::half_normal(),
            exp_zig: Ziggurat::exponential(),
            source,
        }
    }

    /// Custom half-normal tables; the tail start follows their `X[1]`.
    pub fn with_tables(zig: Arc<Ziggurat>, source: S) -> Result<Self, SamplerError> {
        if zig.kind() != DensityKind::HalfNormal {
            return Err(SamplerError::WrongDistribution {
                expected: DensityKind::HalfNormal.name(),
                found: zig.kind().name(),
            });
        }
        Ok(Self {
            zig,
            exp_zig: Ziggurat::exponential(),
            source,
        })
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        draw(&self.zig, &self.exp_zig, &mut self.source, &mut ())
    }

    pub fn sample_tracked(&mut self, counts: &mut PathCounts) -> f64 {
        counts.draws += 1;
        draw(&self.zig, &self.exp_zig, &mut self.source, counts)
    }

    /// Positive magnitude from the exceptional path alone.
    pub fn sample_exceptional(&mut self) -> f64 {
        let (x, next) = exceptional(&self.zig, &self.exp_zig, self.source.clone(), &mut ());
        self.source = next;
        x
    }

    /// One plain-rejection attempt in bounded slot `j`.
    pub fn overhang_sample(&mut self, j: usize) -> Option<f64> {
        overhang(&self.zig, &mut self.source, j, &mut ())
    }

    /// Positive draw from the tail past `X[1]`.
    pub fn tail_sample(&mut self) -> f64 {
        tail(self.zig.tail_start(), &self.exp_zig, &mut self.source)
    }

    /// One pass of the tail loop; `None` when the pair of exponentials is
    /// rejected.
    pub fn tail_attempt(&mut self) -> Option<f64> {
        tail_attempt(self.zig.tail_start(), &self.exp_zig, &mut self.source)
    }

    /// Equal to repeated [`sample`](Self::sample) calls.
    /// Sum of the next `n` draws; the stream advances as if sampled `n` times.
    pub fn sum_of(&mut self, n: u64) -> f64 {
        let mut src = self.source.clone();
        let mut total = 0.0;
        for _ in 0..n {
            total += draw(&self.zig, &self.exp_zig, &mut src, &mut ());
        }
        self.source = src;
        total
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        let mut src = self.source.clone();
        for slot in out {
            *slot = draw(&self.zig, &self.exp_zig, &mut src, &mut ());
        }
        self.source = src;
    }

    pub fn ziggurat(&self) -> &Ziggurat {
        &self.zig
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn into_source(self) -> S {
        self.source
    }
}
