//! Adaptive Gauss-Kronrod quadrature and Filon moments for piecewise-linear
//! functions against `cos`/`exp(iθ)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// One application of the 15-point Kronrod rule. Returns (integral, error).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let err = ((kronrod - gauss) * half).abs();
    (kronrod * half, err)
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive integration over the panels delimited by `breaks`
/// (sorted, at least two entries). The panel with the largest error estimate
/// is bisected until the total error meets the tolerance.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], opts: QuadOptions) -> QuadResult {
    debug_assert!(breaks.len() >= 2);
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut finished: Vec<Interval> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = kronrod15(&f, w[0], w[1]);
            heap.push(Interval { a: w[0], b: w[1], value, error });
        }
    }
    let total = |heap: &BinaryHeap<Interval>, done: &[Interval]| -> (f64, f64) {
        heap.iter().chain(done.iter()).fold((0.0, 0.0), |(v, e), iv| (v + iv.value, e + iv.error))
    };
    let (mut value, mut error) = total(&heap, &finished);
    let mut count = heap.len();
    let mut converged = true;
    while error > opts.abs_tol.max(opts.rel_tol * value.abs()) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if count >= opts.max_intervals {
            heap.push(worst);
            converged = false;
            break;
        }
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            finished.push(worst);
            continue;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
        if count % 64 == 0 {
            // refresh running sums to avoid drift
            (value, error) = total(&heap, &finished);
        }
    }
    // Fixed-order reduction: sum by position, independent of refinement order.
    let mut all: Vec<Interval> = heap.into_vec();
    all.extend(finished);
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = all.iter().map(|iv| iv.value).sum();
    let error: f64 = all.iter().map(|iv| iv.error).sum();
    if error > opts.abs_tol.max(opts.rel_tol * f64::abs(value)) * 10.0 {
        converged = false;
    }
    QuadResult { value, error, converged }
}

/// `∫_0^a ω^α F(ω) dω` for `α > −1` and `F` regular at the origin, via
/// `ω = a u^{1/(α+1)}` which makes the integrand smooth in `u`.
pub(crate) fn integrate_power_singular<F: Fn(f64) -> f64>(
    regular: F,
    alpha: f64,
    a: f64,
    opts: QuadOptions,
) -> QuadResult {
    let p = 1.0 / (alpha + 1.0);
    let scale = a.powf(alpha + 1.0) / (alpha + 1.0);
    let inner = integrate(
        |u: f64| regular(a * u.powf(p)),
        &[0.0, 0.5, 1.0],
        QuadOptions { abs_tol: opts.abs_tol / scale, ..opts },
    );
    QuadResult { value: inner.value * scale, error: inner.error * scale, converged: inner.converged }
}

/// Panel boundaries on `[a, b]` no wider than `max_width`.
pub(crate) fn panels(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let n = (((b - a) / max_width).ceil() as usize).clamp(1, 200_000);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `E0(θ) = ∫_0^1 e^{iθv} dv` and `E1(θ) = ∫_0^1 v e^{iθv} dv`.
///
/// Below |θ| = 0.5 a Taylor series replaces the closed forms, which cancel.
pub(crate) fn filon_moments(theta: f64) -> (Complex64, Complex64) {
    if theta.abs() < 0.5 {
        let it = Complex64::new(0.0, theta);
        let mut power = Complex64::new(1.0, 0.0); // (iθ)^n / n!
        let mut e0 = Complex64::new(0.0, 0.0);
        let mut e1 = Complex64::new(0.0, 0.0);
        for n in 0..40 {
            let nf = n as f64;
            e0 += power / (nf + 1.0);
            e1 += power / (nf + 2.0);
            power = power * it / (nf + 1.0);
            if power.norm() < 1e-18 {
                break;
            }
        }
        (e0, e1)
    } else {
        let e = Complex64::new(theta.cos(), theta.sin());
        let it = Complex64::new(0.0, theta);
        let e0 = (e - 1.0) / it;
        let e1 = e / it + (e - 1.0) / (theta * theta);
        (e0, e1)
    }
}

/// Exact `∫_{x0}^{x1} L(x) e^{iωx} dx` for the linear `L` through
/// `(x0, y0)` and `(x1, y1)`.
pub(crate) fn filon_segment(x0: f64, x1: f64, y0: Complex64, y1: Complex64, omega: f64) -> Complex64 {
    let h = x1 - x0;
    let (e0, e1) = filon_moments(omega * h);
    let phase = Complex64::new((omega * x0).cos(), (omega * x0).sin());
    phase * h * (y0 * (e0 - e1) + y1 * e1)
}

/// Exact `∫ L(x) cos(ωx) dx` for the piecewise-linear interpolant of
/// `(xs, ys)`, summed left to right.
pub(crate) fn filon_cos(xs: &[f64], ys: &[f64], omega: f64) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| filon_segment(x[0], x[1], Complex64::new(y[0], 0.0), Complex64::new(y[1], 0.0), omega).re)
        .sum()
}

pub(crate) fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}
