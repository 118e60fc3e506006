//! Exponential variates from the modified ziggurat.
//!
//! One word per draw on the common path: its low byte picks a layer, the full
//! word scaled by `X · 2^-64` is the variate. Bytes at or past `L_max` fall
//! through to an alias-selected slot: the tail restarts the whole sampler
//! shifted by `X[1]`, and bounded boxes use the triangle split.

use std::sync::Arc;

use crate::density::DensityKind;
use crate::error::SamplerError;
use crate::tables::OverhangBox;
use crate::uniform::{UniformSource, Xoshiro256pp};
use crate::ziggurat::{PathCounts, PathRecorder, Ziggurat};

/// What the triangle split decided for one point in a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverhangOutcome {
    /// Below chord − ε: inside the density without evaluating it.
    FastAccept(f64),
    /// Inside the band and under the density.
    BandAccept(f64),
    Reject,
}

impl OverhangOutcome {
    pub fn value(self) -> Option<f64> {
        match self {
            OverhangOutcome::FastAccept(x) | OverhangOutcome::BandAccept(x) => Some(x),
            OverhangOutcome::Reject => None,
        }
    }
}

/// Classifies a point of box `b` given in unit coordinates: `s` is the
/// distance from the right edge, `v` the height above the floor, both as box
/// fractions. The chord from the top-left to the bottom-right corner is
/// `v = s`; the caller must already have reflected points above it.
#[inline]
pub fn classify_point(b: &OverhangBox, epsilon: f64, s: f64, v: f64) -> OverhangOutcome {
    debug_assert!(v <= s, "point above the chord must be reflected first");
    let x = b.x_right - s * b.width();
    if s - v >= epsilon {
        debug_assert!(
            b.y_bottom + v * b.height() <= (-x).exp() * (1.0 + 1e-12),
            "fast accept above the density at x = {x}"
        );
        return OverhangOutcome::FastAccept(x);
    }
    let y = b.y_bottom + v * b.height();
    if y < (-x).exp() {
        OverhangOutcome::BandAccept(x)
    } else {
        OverhangOutcome::Reject
    }
}

#[inline(always)]
pub(crate) fn draw<S: UniformSource, R: PathRecorder>(
    zig: &Ziggurat,
    src: &mut S,
    rec: &mut R,
) -> f64 {
    let u = src.next_u64();
    if let Some(scale) = zig.fast_scale(u) {
        rec.common();
        return ((u >> 1) as i64) as f64 * scale;
    }
    let (x, next) = exceptional(zig, src.clone(), rec);
    *src = next;
    x
}

/// Takes the source by value and hands it back, so the caller's copy never
/// has its address taken and can stay in registers across the fast path.
#[inline(never)]
pub(crate) fn exceptional<S: UniformSource, R: PathRecorder>(
    zig: &Ziggurat,
    mut src: S,
    rec: &mut R,
) -> (f64, S) {
    rec.exceptional();
    let j = zig.draw_slot(&mut src);
    rec.slot(j);
    if j == 0 {
        rec.tail();
        let x = tail(zig, &mut src);
        return (x, src);
    }
    // Retry inside the chosen box: the slot was picked by mass, so the
    // accepted point must come from that box whatever its acceptance rate.
    loop {
        if let Some(x) = overhang(zig, &mut src, j, rec).value() {
            return (x, src);
        }
    }
}

/// The tail past `X[1]` is itself exponential, so recurse.
pub(crate) fn tail<S: UniformSource>(zig: &Ziggurat, src: &mut S) -> f64 {
    zig.tail_start() + draw(zig, src, &mut ())
}

pub(crate) fn overhang<S: UniformSource, R: PathRecorder>(
    zig: &Ziggurat,
    src: &mut S,
    j: usize,
    rec: &mut R,
) -> OverhangOutcome {
    let mut s = src.next_f64();
    let mut v = src.next_f64();
    // Above the chord nothing is ever accepted; reflect across it instead of
    // rejecting, so every attempt lands in the lower triangle.
    if v > s {
        std::mem::swap(&mut s, &mut v);
    }
    let outcome = classify_point(zig.overhang_box(j), zig.epsilon(), s, v);
    match outcome {
        OverhangOutcome::FastAccept(_) => rec.fast_accept(),
        OverhangOutcome::BandAccept(_) => {
            rec.band_evaluation();
            rec.band_accept();
        }
        OverhangOutcome::Reject => {
            rec.band_evaluation();
            rec.reject();
        }
    }
    outcome
}

/// Unit-rate exponential sampler.
#[derive(Debug, Clone)]
pub struct ExpSampler<S = Xoshiro256pp> {
    zig: Arc<Ziggurat>,
    source: S,
}

impl ExpSampler<Xoshiro256pp> {
    pub fn from_seed(seed: u64) -> Self {
        Self::new(Xoshiro256pp::from_seed(seed))
    }

    pub fn seed_auto() -> Self {
        Self::new(Xoshiro256pp::seed_auto())
    }
}

impl<S: UniformSource> ExpSampler<S> {
    /// Uses the shared `i_max = 256` tables.
    pub fn new(source: S) -> Self {
        Self {
            zig: Ziggurat::exponential(),
            source,
        }
    }

    pub fn with_tables(zig: Arc<Ziggurat>, source: S) -> Result<Self, SamplerError> {
        if zig.kind() != DensityKind::Exponential {
            return Err(SamplerError::WrongDistribution {
                expected: DensityKind::Exponential.name(),
                found: zig.kind().name(),
            });
        }
        if zig.epsilon().is_nan() || zig.epsilon() <= 0.0 {
            return Err(SamplerError::Table(
                crate::error::TableError::InvalidDensity(
                    "exponential tables need a positive band width".into(),
                ),
            ));
        }
        Ok(Self { zig, source })
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        draw(&self.zig, &mut self.source, &mut ())
    }

    /// Same stream as [`sample`](Self::sample), with branch counts.
    pub fn sample_tracked(&mut self, counts: &mut PathCounts) -> f64 {
        counts.draws += 1;
        draw(&self.zig, &mut self.source, counts)
    }

    /// The exceptional path on its own, as if the layer byte had missed.
    pub fn sample_exceptional(&mut self) -> f64 {
        self.sample_exceptional_tracked(&mut PathCounts::default())
    }

    pub fn sample_exceptional_tracked(&mut self, counts: &mut PathCounts) -> f64 {
        let (x, next) = exceptional(&self.zig, self.source.clone(), counts);
        self.source = next;
        x
    }

    /// One attempt in bounded slot `j`; `None` means the point was rejected.
    pub fn overhang_sample(&mut self, j: usize) -> Option<f64> {
        overhang(&self.zig, &mut self.source, j, &mut ()).value()
    }

    pub fn overhang_attempt(&mut self, j: usize) -> OverhangOutcome {
        overhang(&self.zig, &mut self.source, j, &mut ())
    }

    pub fn tail_sample(&mut self) -> f64 {
        tail(&self.zig, &mut self.source)
    }

    /// Equal to repeated [`sample`](Self::sample) calls. Works on a local
    /// copy of the source so its state can stay in registers.
    /// Sum of the next `n` draws; the stream advances as if sampled `n` times.
    pub fn sum_of(&mut self, n: u64) -> f64 {
        let mut src = self.source.clone();
        let mut total = 0.0;
        for _ in 0..n {
            total += draw(&self.zig, &mut src, &mut ());
        }
        self.source = src;
        total
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        let mut src = self.source.clone();
        for slot in out {
            *slot = draw(&self.zig, &mut src, &mut ());
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
