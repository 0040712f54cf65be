//! Line-shape function, optical spectra, quantum noise spectrum and the
//! classical-limit check.
//!
//! With `K(ω) = ω J(ω)`, `x = ħβω` and energies as `E/ħ`,
//!
//! ```text
//! g(t) = −iλt + i∫K sin(ωt)/ω dω + 2∫K n(ω)(1 − cos ωt)/ω dω + ∫K (1 − cos ωt)/ω dω
//! ```
//!
//! with `n = 1/(e^x − 1)`. The last three integrals are the sine, thermal and
//! zero-point components of [`LineShapeSeries`]. For the sub-Ohmic family the
//! whole expression has a closed form in terms of the Hurwitz zeta function.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{subohmic_stokes, SubOhmicParams};
use crate::error::{domain, ensure_finite, Error, Result};
use crate::par_map;
use crate::quad::{filon_segment, integrate, integrate_power_singular, panels, QuadOptions};
use crate::specfun::{gamma_unchecked, hurwitz_zeta};
use crate::transforms::TabulatedSpectralFunction;
use crate::units::PhysicalContext;

/// The three integral components of `g(t)`; `g = −iλt + i·sine + thermal + zero_point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineShapeComponents {
    pub sine: Vec<f64>,
    pub thermal: Vec<f64>,
    pub zero_point: Vec<f64>,
}

/// `g(t)` on a time grid with the context that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineShapeSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub context: PhysicalContext,
    /// Reorganization energy `λ/ħ` used in the `−iλt` term (rad/ps).
    pub lambda: f64,
    /// Present for the quadrature path only.
    pub components: Option<LineShapeComponents>,
}

fn validate_times(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::InvalidData("empty time grid".into()));
    }
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(domain("times must be finite and >= 0"));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidData("time grid must increase strictly".into()));
    }
    Ok(())
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `x / (e^x − 1)`, equal to 1 at `x = 0`.
fn bose_weight(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x / x.exp_m1()
    }
}

/// `(x/2) / tanh(x/2)`, equal to 1 at `x = 0`.
fn coth_weight(x: f64) -> f64 {
    let h = 0.5 * x;
    if h.abs() < 1e-8 {
        1.0
    } else {
        h / h.tanh()
    }
}

/// `∫₀^∞ K(ω) f(ω) dω` for a kernel `f` regular at the origin that
/// oscillates on the scale `1/t_scale`.
fn subohmic_k_integral(p: &SubOhmicParams, t_scale: f64, rel_tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let cutoff = p.integration_cutoff();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol, max_intervals: 20_000 };
    let head_end = if t_scale > 0.0 { (0.5 * PI / t_scale).min(cutoff) } else { cutoff };
    let head = integrate_power_singular(|w| p.k_regular(w) * f(w), p.k_exponent(), head_end, opts).value;
    if head_end >= cutoff {
        return head;
    }
    let breaks = panels(head_end, cutoff, PI / t_scale);
    let opts = QuadOptions { max_intervals: 4 * breaks.len() + 20_000, ..opts };
    head + integrate(|w| p.k_value(w) * f(w), &breaks, opts).value
}

/// Kernels of the sine, thermal and zero-point components at time `t`,
/// written with `sinc` so that they stay accurate as `ωt → 0`.
fn kernels(w: f64, t: f64, hbar_beta: f64) -> (f64, f64, f64) {
    let half = sinc(0.5 * w * t);
    let one_minus_cos_over_w = 0.5 * w * t * t * half * half;
    let sine = t * sinc(w * t);
    let thermal = if w == 0.0 { t * t / hbar_beta } else { 2.0 * one_minus_cos_over_w / (hbar_beta * w).exp_m1() };
    (sine, thermal, one_minus_cos_over_w)
}

/// `g(t)` for the sub-Ohmic density by adaptive quadrature of each component.
pub fn g_numeric(p: &SubOhmicParams, ctx: &PhysicalContext, t_grid: &[f64]) -> Result<LineShapeSeries> {
    validate_times(t_grid)?;
    let hbar_beta = ctx.hbar_beta()?;
    let lambda = p.reorganization_energy();
    let rows = par_map(t_grid, |&t| {
        if t == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let rel = 1e-13;
        (
            subohmic_k_integral(p, t, rel, |w| kernels(w, t, hbar_beta).0),
            subohmic_k_integral(p, t, rel, |w| kernels(w, t, hbar_beta).1),
            subohmic_k_integral(p, t, rel, |w| kernels(w, t, hbar_beta).2),
        )
    });
    Ok(assemble(t_grid, rows, lambda, *ctx))
}

/// `g(t)` from a tabulated `K(ω)`, linearly interpolated between grid points
/// and taken as zero outside the grid.
pub fn g_numeric_tabulated(
    j: &TabulatedSpectralFunction,
    ctx: &PhysicalContext,
    t_grid: &[f64],
) -> Result<LineShapeSeries> {
    validate_times(t_grid)?;
    let hbar_beta = ctx.hbar_beta()?;
    let omegas = j.omegas();
    let ks = j.k_values();
    if omegas.len() < 2 {
        return Err(Error::Resolution("need at least 2 frequencies".into()));
    }
    let t_max = *t_grid.last().unwrap();
    let max_step = omegas.windows(2).map(|w| w[1] - w[0]).fold(omegas[0], f64::max);
    if max_step * t_max >= PI / 4.0 {
        return Err(Error::Resolution(format!(
            "frequency grid (largest gap {max_step} rad/ps, including [0, omega_min]) is too coarse for t_max = {t_max} ps"
        )));
    }
    let lambda = j.grid_lambda();
    let interp = |w: f64| {
        let i = omegas.partition_point(|&x| x <= w).saturating_sub(1).min(omegas.len() - 2);
        let u = (w - omegas[i]) / (omegas[i + 1] - omegas[i]);
        ks[i] * (1.0 - u) + ks[i + 1] * u
    };
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-12, max_intervals: 4 * omegas.len() + 10_000 };
    let rows = par_map(t_grid, |&t| {
        if t == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let part = |pick: fn((f64, f64, f64)) -> f64| {
            integrate(|w| interp(w) * pick(kernels(w, t, hbar_beta)), omegas, opts).value
        };
        (part(|k| k.0), part(|k| k.1), part(|k| k.2))
    });
    Ok(assemble(t_grid, rows, lambda, *ctx))
}

fn assemble(t_grid: &[f64], rows: Vec<(f64, f64, f64)>, lambda: f64, context: PhysicalContext) -> LineShapeSeries {
    let mut values = Vec::with_capacity(rows.len());
    let mut comps = LineShapeComponents { sine: vec![], thermal: vec![], zero_point: vec![] };
    for (&t, (sine, thermal, zero_point)) in t_grid.iter().zip(rows) {
        values.push(Complex64::new(thermal + zero_point, sine - lambda * t));
        comps.sine.push(sine);
        comps.thermal.push(thermal);
        comps.zero_point.push(zero_point);
    }
    LineShapeSeries { times: t_grid.to_vec(), values, context, lambda, components: Some(comps) }
}

/// Closed form of `g(t)` for `0 < s < 1`:
///
/// ```text
/// g = −iλt + 2δ_s Γ(s−1)(ω_c/ω_ph)^{s−1} { 1 − (1 + iω_c t)^{1−s} + 2κ^{s−1} ζ(s−1, 1+κ)
///            − κ^{s−1} [ζ(s−1, 1+κ+it/ħβ) + ζ(s−1, 1+κ−it/ħβ)] },   κ = 1/(ħβω_c)
/// ```
pub fn g_subohmic_closed(p: &SubOhmicParams, ctx: &PhysicalContext, t_grid: &[f64]) -> Result<LineShapeSeries> {
    validate_times(t_grid)?;
    let s = p.s();
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("the closed form needs 0 < s < 1, got s = {s}")));
    }
    let hbar_beta = ctx.hbar_beta()?;
    let wc = p.omega_c();
    let kappa = 1.0 / (hbar_beta * wc);
    let prefactor = 2.0 * p.delta_s() * gamma_unchecked(s - 1.0) * (wc / p.omega_ph()).powf(s - 1.0);
    let kpow = kappa.powf(s - 1.0);
    let lambda = p.reorganization_energy();
    let z0 = hurwitz_zeta(s - 1.0, Complex64::new(1.0 + kappa, 0.0))?.re;
    let rows = par_map(t_grid, |&t| -> Result<Complex64> {
        if t == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let q = Complex64::new(1.0 + kappa, t / hbar_beta);
        // ζ(z, q̄) = conj ζ(z, q), so the pair sums to 2 Re ζ(z, q).
        let pair = 2.0 * hurwitz_zeta(s - 1.0, q)?.re;
        let power = Complex64::new(1.0, wc * t).powf(1.0 - s);
        let bracket = Complex64::new(1.0 + 2.0 * kpow * z0 - kpow * pair, 0.0) - power;
        Ok(prefactor * bracket - Complex64::new(0.0, lambda * t))
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(LineShapeSeries { times: t_grid.to_vec(), values, context: *ctx, lambda, components: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    Absorption,
    Fluorescence,
}

impl FromStr for SpectrumKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absorption" => Ok(Self::Absorption),
            "fluorescence" => Ok(Self::Fluorescence),
            other => Err(domain(format!("unknown spectrum kind '{other}' (absorption|fluorescence)"))),
        }
    }
}

/// A line shape normalized to unit peak on the sampled frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub kind: SpectrumKind,
    pub omega_eg: f64,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    /// `|e^{−g(t_max)}|`, the size of the integrand where the window cuts it.
    pub truncation_estimate: f64,
    pub peak_omega: f64,
}

/// Default bound on `|e^{−g(t_max)}|` accepted by [`spectrum_from_g`].
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-3;

/// One-sided transform of `e^{−g(t)}` on the window of `g`:
///
/// ```text
/// absorption:    Re ∫₀^{t_max} e^{i(ω−ω_eg)t} e^{−g(t)} dt
/// fluorescence:  Re ∫₀^{t_max} e^{i(ω−ω_eg+2λ)t} e^{−g*(t)} dt
/// ```
///
/// `e^{−g}` is interpolated linearly between the samples of `g` and each
/// segment is integrated exactly. A window on which `|e^{−g}|` has not decayed
/// below `truncation_tolerance` is rejected; pass `f64::INFINITY` to accept
/// any window.
pub fn spectrum_from_g(
    g: &LineShapeSeries,
    omega_eg: f64,
    kind: SpectrumKind,
    omegas: &[f64],
    truncation_tolerance: f64,
) -> Result<Spectrum> {
    ensure_finite("omega_eg", omega_eg)?;
    if g.times.len() < 2 || g.times[0] != 0.0 {
        return Err(Error::InvalidData("g must be sampled on at least 2 times starting at 0".into()));
    }
    if omegas.is_empty() || omegas.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidData("frequency grid must be non-empty and finite".into()));
    }
    let tail = (-g.values.last().unwrap().re).exp();
    if !(tail <= truncation_tolerance) {
        return Err(Error::Truncation { estimate: tail, tolerance: truncation_tolerance });
    }
    let (shift, samples): (f64, Vec<Complex64>) = match kind {
        SpectrumKind::Absorption => (0.0, g.values.iter().map(|v| (-v).exp()).collect()),
        SpectrumKind::Fluorescence => (2.0 * g.lambda, g.values.iter().map(|v| (-v.conj()).exp()).collect()),
    };
    let raw = par_map(omegas, |&w| {
        let nu = w - omega_eg + shift;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..g.times.len() - 1 {
            acc += filon_segment(g.times[i], g.times[i + 1], samples[i], samples[i + 1], nu);
        }
        acc.re
    });
    let (peak_idx, peak) =
        raw.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if !(peak > 0.0) {
        return Err(Error::InvalidData("spectrum has no positive peak on the frequency grid".into()));
    }
    Ok(Spectrum {
        kind,
        omega_eg,
        omegas: omegas.to_vec(),
        values: raw.iter().map(|v| v / peak).collect(),
        truncation_estimate: tail,
        peak_omega: omegas[peak_idx],
    })
}

/// `½ħω + ħω/(e^{ħω/k_BT} − 1)` in rad/ps; `½ħω` at zero temperature and
/// `k_BT` at `ω = 0`.
pub fn fdt_bracket(omega: f64, ctx: &PhysicalContext) -> f64 {
    let kt = ctx.thermal_energy();
    if kt == 0.0 {
        return 0.5 * omega;
    }
    0.5 * omega + kt * bose_weight(omega / kt)
}

/// Symmetrized quantum noise `S(ω) = 2[½ħω + ħω n(ω)] Re Y(ω)`.
pub fn fdt_noise_spectrum(re_y: &[f64], omegas: &[f64], ctx: &PhysicalContext) -> Result<Vec<f64>> {
    if re_y.len() != omegas.len() {
        return Err(Error::InvalidData(format!(
            "{} susceptibility values for {} frequencies",
            re_y.len(),
            omegas.len()
        )));
    }
    if omegas.iter().chain(re_y).any(|v| !v.is_finite()) {
        return Err(domain("susceptibility and frequencies must be finite"));
    }
    if omegas.iter().any(|&w| w < 0.0) {
        return Err(domain("frequencies must be >= 0"));
    }
    Ok(omegas.iter().zip(re_y).map(|(&w, &y)| 2.0 * fdt_bracket(w, ctx) * y).collect())
}

/// `∫ω²J coth(ħβω/2) cos ωt dω`, normalized to 1 at `t = 0`.
pub fn symmetrized_correlation(p: &SubOhmicParams, ctx: &PhysicalContext, t_grid: &[f64]) -> Result<Vec<f64>> {
    validate_times(t_grid)?;
    let hbar_beta = ctx.hbar_beta()?;
    let weight = |w: f64| coth_weight(hbar_beta * w);
    let norm = subohmic_k_integral(p, 0.0, 1e-13, weight);
    Ok(par_map(t_grid, |&t| subohmic_k_integral(p, t, 1e-13, |w| weight(w) * (w * t).cos()) / norm))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub temperatures_k: Vec<f64>,
    /// `sup_t |C_sym(t)/C_sym(0) − S(t)|` at each temperature.
    pub deviations: Vec<f64>,
    /// Deviations decrease strictly with temperature.
    pub monotone: bool,
}

/// Deviation of the normalized symmetrized quantum correlation from the
/// classical response `S(t)` at `T`, `10T` and `100T`.
pub fn classical_regression_check(
    p: &SubOhmicParams,
    ctx: &PhysicalContext,
    t_grid: &[f64],
) -> Result<RegressionReport> {
    ctx.require_positive()?;
    let temperatures_k: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|f| f * ctx.temperature_k()).collect();
    let mut deviations = Vec::new();
    for &temp in &temperatures_k {
        let c = symmetrized_correlation(p, &PhysicalContext::new(temp)?, t_grid)?;
        let dev = t_grid
            .iter()
            .zip(&c)
            .map(|(&t, &ci)| (ci - subohmic_stokes(p.omega_c(), p.s(), t)).abs())
            .fold(0.0, f64::max);
        deviations.push(dev);
    }
    let monotone = deviations.windows(2).all(|w| w[1] < w[0]);
    Ok(RegressionReport { temperatures_k, deviations, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::linear_grid;

    fn ctx(temp: f64) -> PhysicalContext {
        PhysicalContext::new(temp).unwrap()
    }

    #[test]
    fn g_vanishes_at_zero() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
        let ts = [0.0, 0.1];
        assert_eq!(g_numeric(&p, &ctx(300.0), &ts).unwrap().values[0], Complex64::new(0.0, 0.0));
        assert_eq!(g_subohmic_closed(&p, &ctx(300.0), &ts).unwrap().values[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
        let ts = linear_grid(0.0, 2.0, 21);
        let a = g_subohmic_closed(&p, &ctx(300.0), &ts).unwrap();
        let b = g_numeric(&p, &ctx(300.0), &ts).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() <= 1e-6 * x.norm().max(1e-8), "{x} vs {y}");
        }
    }

    #[test]
    fn stokes_function_is_inside_g() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
        let lambda = p.reorganization_energy();
        let h = 2e-4;
        for t in [0.05, 0.3, 1.0, 1.9] {
            let g = g_numeric(&p, &ctx(300.0), &[t - h, t + h]).unwrap();
            let derivative = (g.values[1].im - g.values[0].im) / (2.0 * h);
            let want = lambda * (p.stokes(t).unwrap() - 1.0);
            assert!((derivative - want).abs() < 1e-5, "t={t}: {derivative} vs {want}");
        }
    }

    #[test]
    fn real_part_starts_quadratically() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
        let ts = [1e-4, 2e-4, 4e-4];
        let g = g_numeric(&p, &ctx(300.0), &ts).unwrap();
        let slope = (g.values[2].re / g.values[0].re).ln() / (4.0f64).ln();
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn temperature_dependence() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
        let ts = linear_grid(0.0, 2.0, 6);
        let series: Vec<_> = [77.0, 300.0, 1000.0].iter().map(|&t| g_numeric(&p, &ctx(t), &ts).unwrap()).collect();
        for i in 0..ts.len() {
            assert!(series[0].values[i].re <= series[1].values[i].re);
            assert!(series[1].values[i].re <= series[2].values[i].re);
            assert!(series[0].values[i].re >= 0.0);
            assert!(
                (series[0].values[i].im - series[2].values[i].im).abs()
                    <= 1e-10 * series[0].values[i].im.abs().max(1.0)
            );
        }
    }

    #[test]
    fn closed_form_rejects_outside_subohmic_range() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 1.0).unwrap();
        assert!(g_subohmic_closed(&p, &ctx(300.0), &[0.0, 1.0]).is_err());
        let q = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
        assert!(g_subohmic_closed(&q, &ctx(0.0), &[0.0, 1.0]).is_err());
        assert!(g_numeric(&q, &ctx(0.0), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn closed_form_is_continuous_under_step_halving() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.3).unwrap();
        let coarse = g_subohmic_closed(&p, &ctx(300.0), &linear_grid(0.0, 2.0, 101)).unwrap();
        let fine = g_subohmic_closed(&p, &ctx(300.0), &linear_grid(0.0, 2.0, 201)).unwrap();
        let max_jump = |v: &[Complex64]| v.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
        let (a, b) = (max_jump(&coarse.values), max_jump(&fine.values));
        assert!(b < 0.6 * a, "{a} -> {b}");
        for i in 0..coarse.values.len() {
            assert_eq!(coarse.values[i], fine.values[2 * i]);
        }
    }

    #[test]
    fn tabulated_path_matches_analytic() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 1.5).unwrap();
        // logarithmic head resolves the √ω onset of K
        let mut grid = crate::transforms::log_grid(1e-7, 0.05, 300);
        grid.pop();
        grid.extend(linear_grid(0.05, 350.0, 40_000));
        let j = TabulatedSpectralFunction::from_subohmic(&p, grid).unwrap();
        let ts = linear_grid(0.0, 2.0, 5);
        let a = g_numeric(&p, &ctx(300.0), &ts).unwrap();
        let b = g_numeric_tabulated(&j, &ctx(300.0), &ts).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() <= 1e-4 * x.norm().max(1e-8), "{x} vs {y}");
        }
        let coarse = TabulatedSpectralFunction::from_subohmic(&p, linear_grid(1.0, 350.0, 100)).unwrap();
        assert!(matches!(g_numeric_tabulated(&coarse, &ctx(300.0), &ts), Err(Error::Resolution(_))));
    }

    #[test]
    fn zero_broadening_gives_sinc() {
        let ts = linear_grid(0.0, 10.0, 1001);
        let g = LineShapeSeries {
            times: ts,
            values: vec![Complex64::new(0.0, 0.0); 1001],
            context: ctx(300.0),
            lambda: 0.0,
            components: None,
        };
        let omegas = linear_grid(90.0, 110.0, 401);
        assert!(matches!(
            spectrum_from_g(&g, 100.0, SpectrumKind::Absorption, &omegas, DEFAULT_TRUNCATION_TOLERANCE),
            Err(Error::Truncation { .. })
        ));
        let spec = spectrum_from_g(&g, 100.0, SpectrumKind::Absorption, &omegas, f64::INFINITY).unwrap();
        assert!((spec.peak_omega - 100.0).abs() < 1e-9);
        for (w, v) in omegas.iter().zip(&spec.values) {
            let want = sinc((w - 100.0) * 10.0);
            assert!((v - want).abs() < 1e-10, "{w}: {v} vs {want}");
        }
    }

    #[test]
    fn broad_line_is_gaussian_with_stokes_shift() {
        let p = SubOhmicParams::new(2.0, 1.0, 5.0, 0.5).unwrap();
        let c = ctx(300.0);
        let lambda = p.reorganization_energy();
        let ts = linear_grid(0.0, 1.5, 1501);
        let g = g_subohmic_closed(&p, &c, &ts).unwrap();
        let omegas = linear_grid(-150.0, 150.0, 3001);
        let abs = spectrum_from_g(&g, 0.0, SpectrumKind::Absorption, &omegas, DEFAULT_TRUNCATION_TOLERANCE).unwrap();
        let flu = spectrum_from_g(&g, 0.0, SpectrumKind::Fluorescence, &omegas, DEFAULT_TRUNCATION_TOLERANCE).unwrap();
        let dw = omegas[1] - omegas[0];
        assert!(
            ((abs.peak_omega - flu.peak_omega) - 2.0 * lambda).abs() <= 0.05 * 2.0 * lambda + dw,
            "{} {} {lambda}",
            abs.peak_omega,
            flu.peak_omega
        );

        // variance of the absorption line versus the t² coefficient of Re g
        let norm: f64 = abs.values.iter().sum();
        let mean = omegas.iter().zip(&abs.values).map(|(w, v)| w * v).sum::<f64>() / norm;
        let var = omegas.iter().zip(&abs.values).map(|(w, v)| (w - mean).powi(2) * v).sum::<f64>() / norm;
        let small = g_numeric(&p, &c, &[1e-4]).unwrap();
        let c2 = small.values[0].re / 1e-8;
        assert!((var / (2.0 * c2) - 1.0).abs() < 0.05, "var {var} vs {}", 2.0 * c2);
    }

    #[test]
    fn fdt_limits() {
        let hot = ctx(300.0);
        let kt = hot.thermal_energy();
        assert_eq!(fdt_bracket(3.0, &ctx(0.0)), 1.5);
        let w = 1e-6 * kt;
        assert!((2.0 * fdt_bracket(w, &hot) / (2.0 * kt) - 1.0).abs() < 1e-5);
        // 50-digit reference: ½ + 1/(e − 1)
        assert!((fdt_bracket(kt, &hot) / kt - 1.081_976_706_869_326_4).abs() < 1e-15);
        let s = fdt_noise_spectrum(&[1.0, 1.0], &[2.0, 5.0], &ctx(0.0)).unwrap();
        assert_eq!(s, vec![2.0, 5.0]);
        assert!(fdt_noise_spectrum(&[1.0], &[2.0, 5.0], &hot).is_err());
    }

    #[test]
    fn classical_limit() {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
        let ts = linear_grid(0.0, 10.0 / 5.0, 41);
        // k_B T = ħω_c
        let base = PhysicalContext::from_thermal_energy(5.0).unwrap();
        let report = classical_regression_check(&p, &base, &ts).unwrap();
        assert!(report.monotone, "{:?}", report.deviations);
        assert!(report.deviations[2] < 1e-3, "{:?}", report.deviations);
        let c = symmetrized_correlation(&p, &base, &[0.0]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15);
    }
}
