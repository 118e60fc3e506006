//! Scalar numerics used by table construction: bracketed bisection,
//! golden-section maximization, adaptive Gauss–Kronrod quadrature and
//! compensated summation.

use crate::error::TableError;

/// Bisection on a sign change between `lo` and `hi`, run until the bracket
/// collapses to adjacent floats. Returns the endpoint with the smaller
/// residual.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64, TableError> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(TableError::NonConvergence(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo:e}, {f_hi:e})"
        )));
    }
    let mut f_hi = f_hi;
    // 64 exponent halvings plus 53 mantissa halvings suffice; leave headroom.
    for _ in 0..2200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Err(TableError::NonConvergence(format!(
        "bisection did not collapse on [{lo}, {hi}]"
    )))
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..400 {
        if hi - lo <= 4.0 * f64::EPSILON * (lo.abs() + hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        }
    }
    let candidates = [(lo, f(lo)), (a, fa), (b, fb), (hi, f(hi))];
    candidates.into_iter().fold(
        (lo, f64::NEG_INFINITY),
        |best, c| if c.1 > best.1 { c } else { best },
    )
}

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut kronrod = GK_WEIGHTS[7] * f_center;
    let mut gauss = G_WEIGHTS[3] * f_center;
    for k in 0..7 {
        let dx = half * GK_NODES[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += GK_WEIGHTS[k] * pair;
        if k % 2 == 1 {
            gauss += G_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[lo, hi]` to an
/// absolute error `tol`. Returns `(value, error_estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), TableError> {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        lo: f64,
        hi: f64,
        tol: f64,
        depth: u32,
        total: &mut CompensatedSum,
    ) -> f64 {
        let (value, err) = gauss_kronrod_15(f, lo, hi);
        let mid = 0.5 * (lo + hi);
        if err <= tol || depth >= 48 || mid <= lo || mid >= hi {
            total.add(value);
            return err;
        }
        recurse(f, lo, mid, 0.5 * tol, depth + 1, total)
            + recurse(f, mid, hi, 0.5 * tol, depth + 1, total)
    }

    if lo == hi {
        return Ok((0.0, 0.0));
    }
    let mut total = CompensatedSum::new();
    let err = recurse(&f, lo, hi, tol, 0, &mut total);
    if err > tol || !err.is_finite() {
        return Err(TableError::QuadratureFailure {
            lo,
            hi,
            estimate: err,
            tol,
        });
    }
    Ok((total.value(), err))
}
