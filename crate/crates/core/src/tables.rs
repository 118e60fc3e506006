//! Layer geometry for the modified ziggurat.
//!
//! Every layer `k` is the rectangle `[0, X[k]] × [F[k-1], F[k]]` whose upper
//! right corner sits on the density, so the whole layer lies beneath `P` and
//! has area exactly `total_mass / i_max`. Layers are solved bottom-up from the
//! origin until the next one no longer fits.
//!
//! The mass that the layers miss is split into `L_max + 1` slots:
//!
//! * slot 0 is the unbounded tail right of `X[1]`,
//! * slot `j` in `1..L_max` is the overhang box right of layer `j + 1`, spanning
//!   `[X[j+1], X[j]] × [F[j], F[j+1]]`,
//! * slot `L_max` is the cap above the top layer, `[0, X[L_max]] × [F[L_max], P(0)]`.
//!
//! `X[0]` is a finite sentinel standing in for `+∞`; no bounded box reads it.

use crate::density::{Density, DensityKind};
use crate::error::TableError;
use crate::numeric::{bisect, golden_max, integrate, CompensatedSum};

/// Stand-in for the conceptual `X[0] = +∞`.
pub const SENTINEL_X: f64 = f64::MAX;

/// Default absolute tolerance for layer areas and quadrature.
pub const DEFAULT_TOLERANCE: f64 = 1e-15;

/// Largest layer-selection range; index bits beyond 12 would reach into the
/// mantissa bits that survive the integer-to-float conversion.
pub const MAX_IMAX: usize = 1 << 12;

/// One bounded overhang region, in data coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverhangBox {
    pub slot: usize,
    pub x_left: f64,
    pub x_right: f64,
    pub y_bottom: f64,
    pub y_top: f64,
}

impl OverhangBox {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn height(&self) -> f64 {
        self.y_top - self.y_bottom
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// The curve in unit coordinates: `u` runs left to right, the result is
    /// the normalized height of `P` above the box floor.
    pub fn unit_curve<D: Density + ?Sized>(&self, density: &D, u: f64) -> f64 {
        (density.density(self.x_left + u * self.width()) - self.y_bottom) / self.height()
    }

    /// Vertical distance from the chord `1 - u` down to the curve.
    pub fn chord_gap<D: Density + ?Sized>(&self, density: &D, u: f64) -> f64 {
        (1.0 - u) - self.unit_curve(density, u)
    }
}

/// Solved layer corners, before areas and the band width are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGeometry {
    pub i_max: usize,
    pub total_mass: f64,
    /// `X[0..=L_max]`, `X[0]` is [`SENTINEL_X`].
    pub x: Vec<f64>,
    /// `F[0..=L_max]`, `F[0] = 0`.
    pub f: Vec<f64>,
}

impl LayerGeometry {
    pub fn l_max(&self) -> usize {
        self.x.len() - 1
    }

    pub fn slot_area(&self) -> f64 {
        self.total_mass / self.i_max as f64
    }

    /// Left edge of the tail; 0 when no layer fits.
    pub fn tail_start(&self) -> f64 {
        tail_start(&self.x)
    }

    pub fn overhang_box(&self, slot: usize) -> OverhangBox {
        overhang_box(&self.x, &self.f, slot)
    }
}

fn tail_start(x: &[f64]) -> f64 {
    if x.len() > 1 {
        x[1]
    } else {
        0.0
    }
}

fn overhang_box(x: &[f64], f: &[f64], slot: usize) -> OverhangBox {
    let l_max = x.len() - 1;
    assert!(
        (1..=l_max).contains(&slot),
        "bounded overhang slots are 1..={l_max}, got {slot}"
    );
    let (x_left, y_top) = if slot == l_max {
        (0.0, 1.0)
    } else {
        (x[slot + 1], f[slot + 1])
    };
    OverhangBox {
        slot,
        x_left,
        x_right: x[slot],
        y_bottom: f[slot],
        y_top,
    }
}

fn check_imax(i_max: usize) -> Result<(), TableError> {
    if !(2..=MAX_IMAX).contains(&i_max) || !i_max.is_power_of_two() {
        return Err(TableError::InvalidImax(i_max));
    }
    Ok(())
}

fn check_monotone<D: Density + ?Sized>(density: &D) -> Result<(), TableError> {
    let p0 = density.density(0.0);
    if (p0 - 1.0).abs() > 1e-15 {
        return Err(TableError::InvalidDensity(format!(
            "P(0) = {p0}, expected 1"
        )));
    }
    let q0 = density.cdf_complement(0.0);
    let mass = density.total_mass();
    if !(mass > 0.0 && mass.is_finite()) || (q0 - mass).abs() > 1e-12 * mass {
        return Err(TableError::InvalidDensity(format!(
            "cdf_complement(0) = {q0} disagrees with total mass {mass}"
        )));
    }
    let mut prev = p0;
    for k in 0..=80 {
        let x = (k as f64 / 4.0 - 10.0).exp2();
        let p = density.density(x);
        if !(p.is_finite() && p >= 0.0) {
            return Err(TableError::InvalidDensity(format!("P({x}) = {p}")));
        }
        if p > prev || (p == prev && p > 0.0) {
            return Err(TableError::InvalidDensity(format!(
                "P is not strictly decreasing near x = {x}"
            )));
        }
        prev = p;
    }
    Ok(())
}

/// Solves the layer corners for `density` with `i_max` equal-area slots.
pub fn solve_geometry<D: Density + ?Sized>(
    density: &D,
    i_max: usize,
    tol: f64,
) -> Result<LayerGeometry, TableError> {
    check_imax(i_max)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(TableError::InvalidTolerance(tol));
    }
    check_monotone(density)?;

    let total_mass = density.total_mass();
    let slot = total_mass / i_max as f64;
    let mut x = vec![SENTINEL_X];
    let mut f = vec![0.0];

    loop {
        let floor = *f.last().unwrap();
        let excess = |t: f64| t * (density.density(t) - floor) - slot;

        let upper = if x.len() == 1 {
            // Bottom layer: the right edge is unbounded, so expand until the
            // bracket sits past the peak of t·P(t) and below the slot area.
            let mut hi = 1.0_f64;
            let mut expansions = 0;
            while excess(hi) >= 0.0 || excess(hi) >= excess(0.5 * hi) {
                hi *= 2.0;
                expansions += 1;
                if expansions > 1100 || !hi.is_finite() {
                    return Err(TableError::NonConvergence(
                        "could not bracket the bottom layer".into(),
                    ));
                }
            }
            hi
        } else {
            *x.last().unwrap()
        };

        let (peak, best) = golden_max(excess, 0.0, upper);
        if best < 0.0 {
            break;
        }
        // The right root keeps layers long and thin.
        let root = bisect(excess, peak, upper)?;
        if !(root > 0.0 && root < upper) {
            return Err(TableError::NonConvergence(format!(
                "layer {} root {root} escaped its bracket (0, {upper})",
                x.len()
            )));
        }
        x.push(root);
        f.push(density.density(root));
        if x.len() > i_max {
            return Err(TableError::NonConvergence(
                "more layers than slots; density is not normalized as declared".into(),
            ));
        }
    }

    for k in 1..x.len() {
        let area = x[k] * (f[k] - f[k - 1]);
        if (area - slot).abs() > tol {
            return Err(TableError::NonConvergence(format!(
                "layer {k} area {area:e} misses {slot:e} by more than {tol:e}"
            )));
        }
        if f[k] <= f[k - 1] || (k > 1 && x[k] >= x[k - 1]) {
            return Err(TableError::InvalidDensity(format!(
                "layer {k} breaks monotone geometry"
            )));
        }
    }

    Ok(LayerGeometry {
        i_max,
        total_mass,
        x,
        f,
    })
}

/// Unnormalized slot masses: the tail, then the bounded boxes, then the cap.
pub fn overhang_areas<D: Density + ?Sized>(
    density: &D,
    geometry: &LayerGeometry,
    tol: f64,
) -> Result<Vec<f64>, TableError> {
    let l_max = geometry.l_max();
    let mut masses = Vec::with_capacity(l_max + 1);
    masses.push(density.cdf_complement(geometry.tail_start()));
    for slot in 1..=l_max {
        let b = geometry.overhang_box(slot);
        let floor = b.y_bottom;
        let (mass, _) = integrate(
            |t| (density.density(t) - floor).max(0.0),
            b.x_left,
            b.x_right,
            tol,
        )?;
        masses.push(mass);
    }
    Ok(masses)
}

/// Widest chord-to-curve gap of one box, in box-normalized units.
pub fn box_epsilon<D: Density + ?Sized>(density: &D, b: &OverhangBox) -> Result<f64, TableError> {
    const PROBES: usize = 256;
    for k in 1..PROBES {
        let gap = b.chord_gap(density, k as f64 / PROBES as f64);
        if gap < -1e-12 {
            return Err(TableError::CurvatureViolation { slot: b.slot, gap });
        }
    }
    let (_, widest) = golden_max(|u| b.chord_gap(density, u), 0.0, 1.0);
    Ok(widest.max(0.0))
}

/// Single band width shared by every bounded box.
pub fn compute_epsilon<D: Density + ?Sized>(
    density: &D,
    geometry: &LayerGeometry,
) -> Result<f64, TableError> {
    let mut widest = 0.0_f64;
    for slot in 1..=geometry.l_max() {
        widest = widest.max(box_epsilon(density, &geometry.overhang_box(slot))?);
    }
    Ok(widest)
}

/// Complete tables for one of the built-in densities.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigguratTables {
    kind: DensityKind,
    i_max: usize,
    x: Vec<f64>,
    f: Vec<f64>,
    a: Vec<f64>,
    epsilon_max: f64,
}

/// Builds the full table set for `kind`: corners, normalized slot masses and,
/// for the exponential, the band width.
pub fn solve_layers(
    kind: DensityKind,
    i_max: usize,
    tol: f64,
) -> Result<ZigguratTables, TableError> {
    let geometry = solve_geometry(&kind, i_max, tol)?;
    let masses = overhang_areas(&kind, &geometry, tol)?;
    let epsilon_max = if kind.globally_convex() {
        compute_epsilon(&kind, &geometry)?
    } else {
        0.0
    };
    let total: CompensatedSum = masses.iter().copied().collect();
    let total = total.value();
    let a = masses.iter().map(|m| m / total).collect();
    Ok(ZigguratTables {
        kind,
        i_max,
        x: geometry.x,
        f: geometry.f,
        a,
        epsilon_max,
    })
}

impl ZigguratTables {
    /// Reassembles tables from stored arrays. Shapes are checked here; the
    /// numerical invariants are checked by [`verify_tables`].
    pub fn from_parts(
        kind: DensityKind,
        i_max: usize,
        x: Vec<f64>,
        f: Vec<f64>,
        a: Vec<f64>,
        epsilon_max: f64,
    ) -> Result<Self, String> {
        check_imax(i_max).map_err(|e| e.to_string())?;
        if x.is_empty() || x.len() != f.len() || x.len() != a.len() {
            return Err(format!(
                "array lengths disagree: X {}, F {}, A {}",
                x.len(),
                f.len(),
                a.len()
            ));
        }
        if x.len() > i_max {
            return Err(format!("L_max {} exceeds i_max {i_max}", x.len() - 1));
        }
        Ok(Self {
            kind,
            i_max,
            x,
            f,
            a,
            epsilon_max,
        })
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn l_max(&self) -> usize {
        self.x.len() - 1
    }

    /// Layer lengths `X[0..=L_max]`; `X[0]` is the sentinel.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Layer heights `F[0..=L_max]`; `F[0] = 0`.
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Slot masses normalized to sum to one.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn epsilon_max(&self) -> f64 {
        self.epsilon_max
    }

    pub fn tail_start(&self) -> f64 {
        tail_start(&self.x)
    }

    pub fn slot_area(&self) -> f64 {
        self.kind.total_mass() / self.i_max as f64
    }

    /// Total mass outside the layers, `total_mass · (i_max − L_max) / i_max`.
    pub fn overhang_mass(&self) -> f64 {
        self.slot_area() * (self.i_max - self.l_max()) as f64
    }

    pub fn overhang_box(&self, slot: usize) -> OverhangBox {
        overhang_box(&self.x, &self.f, slot)
    }

    pub fn geometry(&self) -> LayerGeometry {
        LayerGeometry {
            i_max: self.i_max,
            total_mass: self.kind.total_mass(),
            x: self.x.clone(),
            f: self.f.clone(),
        }
    }
}

/// `∫ (P − floor)` over a box from the complementary CDF, with an absolute
/// rounding bound.
fn closed_form_mass(kind: DensityKind, b: &OverhangBox) -> (f64, f64) {
    let w = b.width();
    match kind {
        DensityKind::Exponential => {
            // e^{-xl}(1 − e^{-w}) − e^{-xr}·w, with expm1 for the short span.
            let head = (-b.x_left).exp() * -(-w).exp_m1();
            let floor = b.y_bottom * w;
            (head - floor, 8.0 * f64::EPSILON * (head + floor))
        }
        DensityKind::HalfNormal => {
            let (ql, qr) = (
                kind.cdf_complement(b.x_left),
                kind.cdf_complement(b.x_right),
            );
            let floor = b.y_bottom * w;
            (ql - qr - floor, 8.0 * f64::EPSILON * (ql + qr + floor))
        }
    }
}

/// Re-derives every invariant with closed-form masses and dense grids and
/// lists the violations. An empty list means the tables are sound.
pub fn verify_tables(tables: &ZigguratTables, tol: f64) -> Vec<String> {
    let mut violations = Vec::new();
    let kind = tables.kind;
    let x = &tables.x;
    let f = &tables.f;
    let l_max = tables.l_max();
    let slot = tables.slot_area();

    if x[0] != SENTINEL_X || f[0] != 0.0 {
        violations.push("X[0]/F[0] sentinels are not (SENTINEL_X, 0)".to_string());
    }
    for k in 1..=l_max {
        let area = x[k] * (f[k] - f[k - 1]);
        if (area - slot).abs() > tol {
            violations.push(format!("layer {k}: area {area:e} != {slot:e}"));
        }
        let p = kind.density(x[k]);
        if (f[k] - p).abs() > 4.0 * f64::EPSILON * p {
            violations.push(format!("layer {k}: F = {} but P(X) = {p}", f[k]));
        }
        if f[k] <= f[k - 1] {
            violations.push(format!("layer {k}: F not strictly increasing"));
        }
        if k > 1 && x[k] >= x[k - 1] {
            violations.push(format!("layer {k}: X not strictly decreasing"));
        }
    }
    if l_max > 0 && f[l_max] >= 1.0 {
        violations.push("top layer reaches P(0)".to_string());
    }

    // Closed-form slot masses, each with a rounding bound for its cancellation.
    let mut closed = Vec::with_capacity(l_max + 1);
    closed.push((kind.cdf_complement(tables.tail_start()), 0.0));
    for j in 1..=l_max {
        closed.push(closed_form_mass(kind, &tables.overhang_box(j)));
    }
    if closed.iter().any(|(m, _)| *m < 0.0) {
        violations.push("negative slot mass".to_string());
    }
    let overhang: CompensatedSum = closed.iter().map(|(m, _)| *m).collect();
    let overhang = overhang.value();
    let total = kind.total_mass();
    let conserved = slot * l_max as f64 + overhang;
    if ((conserved - total) / total).abs() > 1e-12 {
        violations.push(format!(
            "mass conservation: layers + overhangs = {conserved}, total {total}"
        ));
    }
    for (j, (stored, (m, bound))) in tables.a.iter().zip(&closed).enumerate() {
        let expected = m / overhang;
        if (stored - expected).abs() > bound / overhang + 1e-12 * expected {
            violations.push(format!("A[{j}] = {stored:e}, closed form {expected:e}"));
        }
    }

    if kind.globally_convex() && l_max > 0 {
        let eps = tables.epsilon_max;
        let mut widest = 0.0_f64;
        for j in 1..=l_max {
            let b = tables.overhang_box(j);
            const GRID: usize = 4096;
            for k in 0..=GRID {
                let u = k as f64 / GRID as f64;
                let gap = b.chord_gap(&kind, u);
                widest = widest.max(gap);
                if gap > eps + 1e-12 {
                    violations.push(format!(
                        "box {j}: chord − ε rises above P at u = {u} (gap {gap:e} > ε {eps:e})"
                    ));
                    break;
                }
            }
        }
        if !(eps > 0.0 && eps < 1.0) {
            violations.push(format!("epsilon_max {eps} outside (0, 1)"));
        }
        if eps - widest > 1e-6 {
            violations.push(format!(
                "epsilon_max {eps} well above grid maximum {widest}"
            ));
        }
    }
    violations
}
