//! Sampling-ready form of [`ZigguratTables`]: pre-scaled layer lengths, the
//! slot alias table and per-slot box geometry.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::alias::AliasTable;
use crate::density::DensityKind;
use crate::error::SamplerError;
use crate::tables::{solve_layers, OverhangBox, ZigguratTables, DEFAULT_TOLERANCE};
use crate::uniform::UniformSource;

/// Layer-selection range used by the default samplers.
pub const DEFAULT_IMAX: usize = 256;

const TWO_POW_M63: f64 = 1.0 / 9_223_372_036_854_775_808.0;

#[derive(Debug, Clone)]
pub struct Ziggurat {
    tables: ZigguratTables,
    alias: AliasTable,
    /// `X[i + 1] · 2^-64` (exponential) or `· 2^-63` (half-normal) for layer
    /// byte `i < L_max`; its length is `L_max`, so one bounds test routes
    /// between the fast path and the exceptional path.
    scaled_x: Box<[f64]>,
    index_mask: u64,
    boxes: Box<[OverhangBox]>,
}

impl Ziggurat {
    pub fn new(tables: ZigguratTables) -> Result<Self, SamplerError> {
        let l_max = tables.l_max();
        if l_max == 0 {
            return Err(SamplerError::NoLayers);
        }
        // Both samplers convert a 63-bit signed integer: the exponential
        // shifts its word right by one, the normal reads it as signed.
        let scaled_x = tables.x()[1..].iter().map(|x| x * TWO_POW_M63).collect();
        let alias = AliasTable::new(tables.a())?;
        let mut boxes = Vec::with_capacity(l_max + 1);
        // Slot 0 is the tail; keep a placeholder so boxes[j] lines up with j.
        boxes.push(OverhangBox {
            slot: 0,
            x_left: tables.tail_start(),
            x_right: f64::INFINITY,
            y_bottom: 0.0,
            y_top: tables.f()[1],
        });
        boxes.extend((1..=l_max).map(|j| tables.overhang_box(j)));
        Ok(Self {
            index_mask: tables.i_max() as u64 - 1,
            tables,
            alias,
            scaled_x,
            boxes: boxes.into_boxed_slice(),
        })
    }

    /// Shared exponential tables for `i_max = 256`, built on first use.
    pub fn exponential() -> Arc<Ziggurat> {
        static CELL: OnceLock<Arc<Ziggurat>> = OnceLock::new();
        CELL.get_or_init(|| Arc::new(Self::build(DensityKind::Exponential)))
            .clone()
    }

    /// Shared half-normal tables for `i_max = 256`, built on first use.
    pub fn half_normal() -> Arc<Ziggurat> {
        static CELL: OnceLock<Arc<Ziggurat>> = OnceLock::new();
        CELL.get_or_init(|| Arc::new(Self::build(DensityKind::HalfNormal)))
            .clone()
    }

    fn build(kind: DensityKind) -> Ziggurat {
        let tables = solve_layers(kind, DEFAULT_IMAX, DEFAULT_TOLERANCE)
            .expect("built-in density tables always solve");
        Ziggurat::new(tables).expect("built-in tables have layers")
    }

    pub fn tables(&self) -> &ZigguratTables {
        &self.tables
    }

    pub fn kind(&self) -> DensityKind {
        self.tables.kind()
    }

    pub fn alias(&self) -> &AliasTable {
        &self.alias
    }

    pub fn l_max(&self) -> usize {
        self.scaled_x.len()
    }

    pub fn i_max(&self) -> usize {
        self.tables.i_max()
    }

    pub fn tail_start(&self) -> f64 {
        self.tables.tail_start()
    }

    pub fn epsilon(&self) -> f64 {
        self.tables.epsilon_max()
    }

    /// Geometry of bounded slot `j` (`1..=L_max`).
    pub fn overhang_box(&self, j: usize) -> &OverhangBox {
        assert!(j >= 1, "slot 0 is the tail, not a box");
        &self.boxes[j]
    }

    /// Layer byte and fast-path scale for a raw word, or `None` when the
    /// byte routes to the exceptional path.
    #[inline(always)]
    pub(crate) fn fast_scale(&self, u: u64) -> Option<f64> {
        self.scaled_x.get((u & self.index_mask) as usize).copied()
    }

    #[inline]
    pub(crate) fn draw_slot<S: UniformSource>(&self, src: &mut S) -> usize {
        let index_word = src.next_u64();
        let coin_word = src.next_u64();
        self.alias.sample(index_word, coin_word)
    }
}

/// Hooks for counting which branch each draw takes. The unit type records
/// nothing and compiles away.
pub trait PathRecorder {
    #[inline(always)]
    fn common(&mut self) {}
    #[inline(always)]
    fn exceptional(&mut self) {}
    #[inline(always)]
    fn slot(&mut self, _j: usize) {}
    #[inline(always)]
    fn tail(&mut self) {}
    #[inline(always)]
    fn fast_accept(&mut self) {}
    #[inline(always)]
    fn band_evaluation(&mut self) {}
    #[inline(always)]
    fn band_accept(&mut self) {}
    #[inline(always)]
    fn reject(&mut self) {}
}

impl PathRecorder for () {}

/// Branch counts for one run. Only top-level draws are counted; the variate
/// drawn inside a tail restart is not.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PathCounts {
    pub draws: u64,
    /// Exits through the layer fast path (or, for the traditional sampler,
    /// through the `U_1 < k_i` test).
    pub common: u64,
    pub exceptional: u64,
    pub tail: u64,
    /// Overhang points accepted without evaluating the density.
    pub fast_accepts: u64,
    /// Overhang points that needed the density.
    pub band_evaluations: u64,
    pub band_accepts: u64,
    pub rejects: u64,
    /// Alias draws per slot, one per exceptional draw.
    pub slot_draws: Vec<u64>,
}

impl PathCounts {
    pub fn overhang_attempts(&self) -> u64 {
        self.fast_accepts + self.band_evaluations
    }

    pub fn merge(&mut self, other: &PathCounts) {
        self.draws += other.draws;
        self.common += other.common;
        self.exceptional += other.exceptional;
        self.tail += other.tail;
        self.fast_accepts += other.fast_accepts;
        self.band_evaluations += other.band_evaluations;
        self.band_accepts += other.band_accepts;
        self.rejects += other.rejects;
        if self.slot_draws.len() < other.slot_draws.len() {
            self.slot_draws.resize(other.slot_draws.len(), 0);
        }
        for (a, b) in self.slot_draws.iter_mut().zip(&other.slot_draws) {
            *a += b;
        }
    }
}

impl PathRecorder for PathCounts {
    fn common(&mut self) {
        self.common += 1;
    }
    fn exceptional(&mut self) {
        self.exceptional += 1;
    }
    fn slot(&mut self, j: usize) {
        if self.slot_draws.len() <= j {
            self.slot_draws.resize(j + 1, 0);
        }
        self.slot_draws[j] += 1;
    }
    fn tail(&mut self) {
        self.tail += 1;
    }
    fn fast_accept(&mut self) {
        self.fast_accepts += 1;
    }
    fn band_evaluation(&mut self) {
        self.band_evaluations += 1;
    }
    fn band_accept(&mut self) {
        self.band_accepts += 1;
    }
    fn reject(&mut self) {
        self.rejects += 1;
    }
}
