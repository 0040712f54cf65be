//! Forward (`J → S`) and inverse (`S → J`) cosine transforms on sampled data.
//!
//! Everything is expressed through `K(ω) = ω J(ω)`, which stays finite or
//! integrable at `ω → 0`:
//!
//! ```text
//! S(t) = (1/λ) ∫₀^∞ K(ω) cos ωt dω        K(ω) = (2λ/π) ∫₀^∞ S(t) cos ωt dt
//! ```
//!
//! Sampled functions are treated as piecewise linear and integrated exactly
//! against the cosine (Filon), so nonuniform grids need no resampling. Data
//! beyond the last sample are replaced by an explicit [`TailModel`].

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{subohmic_stokes, subohmic_stokes_derivatives, GaussBiexpParams, SubOhmicParams};
use crate::error::{domain, ensure_finite, Error, Result};
use crate::lm::{minimize, ClosureProblem, LmSettings};
use crate::par_map;
use crate::quad::{filon_cos, integrate, integrate_power_singular, panels, trapezoid, QuadOptions};

/// Default floor below which `J = K/ω` is reported as not evaluable (rad/ps).
pub const DEFAULT_OMEGA_FLOOR: f64 = 1e-4;

/// Value of `S(t_max)` above which a tail model is mandatory.
pub const TAIL_REQUIRED_ABOVE: f64 = 0.05;

/// A measured or synthetic Stokes-shift response on a time grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledResponse {
    times: Vec<f64>,
    values: Vec<f64>,
    sigma: Option<Vec<f64>>,
    label: String,
    warnings: Vec<String>,
}

impl SampledResponse {
    /// `times` must start at 0 and increase strictly; `sigma`, if given,
    /// must be finite and positive.
    pub fn new(times: Vec<f64>, values: Vec<f64>, sigma: Option<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidData(format!("need at least 2 samples, got {}", times.len())));
        }
        if values.len() != times.len() {
            return Err(Error::InvalidData(format!("{} times but {} values", times.len(), values.len())));
        }
        if let Some((i, _)) = times.iter().zip(&values).enumerate().find(|(_, (t, v))| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::InvalidData(format!("non-finite entry at row {i}")));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidData(format!("time grid must start at 0, starts at {}", times[0])));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidData(format!(
                "times must increase strictly (row {}: {} after {})",
                i + 1,
                times[i + 1],
                times[i]
            )));
        }
        if let Some(sig) = &sigma {
            if sig.len() != times.len() {
                return Err(Error::InvalidData(format!("{} times but {} sigma values", times.len(), sig.len())));
            }
            if let Some(i) = sig.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::InvalidData(format!(
                    "sigma must be finite and > 0 (row {i}: {}); zero weights are undefined",
                    sig[i]
                )));
            }
        }
        let mut warnings = Vec::new();
        if !(0.9..=1.1).contains(&values[0]) {
            warnings.push(format!("S(0) = {} lies outside [0.9, 1.1]; data may not be normalized", values[0]));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(Self { times, values, sigma, label: label.into(), warnings })
    }

    /// Sorts rows by time first; duplicate times are rejected.
    pub fn from_unsorted(
        times: Vec<f64>,
        values: Vec<f64>,
        sigma: Option<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != times.len() || sigma.as_ref().is_some_and(|s| s.len() != times.len()) {
            return Err(Error::InvalidData("column lengths differ".into()));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        if let Some(w) = order.windows(2).find(|w| times[w[0]] == times[w[1]]) {
            return Err(Error::InvalidData(format!("duplicate time {} (rows {} and {})", times[w[0]], w[0], w[1])));
        }
        let pick = |col: &[f64]| order.iter().map(|&i| col[i]).collect::<Vec<_>>();
        Self::new(pick(&times), pick(&values), sigma.as_deref().map(pick), label)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn sigma(&self) -> Option<&[f64]> {
        self.sigma.as_deref()
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }
    pub fn last_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Piecewise-linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        if !(0.0..=self.t_max()).contains(&t) {
            return None;
        }
        let i = self.times.partition_point(|&x| x <= t).saturating_sub(1).min(self.len() - 2);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        Some(self.values[i] * (1.0 - w) + self.values[i + 1] * w)
    }
}

/// `K(ω) = ω J(ω)` tabulated on a positive, increasing frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedSpectralFunction {
    omegas: Vec<f64>,
    k_values: Vec<f64>,
    lambda: f64,
    normalization_defect: f64,
    negative_lobes: bool,
    omega_floor: f64,
}

impl TabulatedSpectralFunction {
    /// `lambda` is the reorganization energy (`λ/ħ`, rad/ps) the table is
    /// meant to carry; the relative mismatch with `∫K dω` over the grid is
    /// recorded as the normalization defect.
    pub fn new(omegas: Vec<f64>, k_values: Vec<f64>, lambda: f64) -> Result<Self> {
        validate_omega_grid(&omegas)?;
        if k_values.len() != omegas.len() {
            return Err(Error::InvalidData(format!("{} frequencies but {} K values", omegas.len(), k_values.len())));
        }
        if k_values.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidData("K values must be finite".into()));
        }
        ensure_finite("lambda", lambda)?;
        if lambda <= 0.0 {
            return Err(domain(format!("lambda must be > 0, got {lambda}")));
        }
        let normalization_defect = (trapezoid(&omegas, &k_values) - lambda).abs() / lambda;
        let negative_lobes = k_values.iter().any(|&k| k < 0.0);
        if negative_lobes {
            log::warn!("K(omega) has negative lobes; the inversion is noise dominated there");
        }
        Ok(Self { omegas, k_values, lambda, normalization_defect, negative_lobes, omega_floor: DEFAULT_OMEGA_FLOOR })
    }

    pub fn from_fn(omegas: Vec<f64>, k: impl Fn(f64) -> f64, lambda: f64) -> Result<Self> {
        let k_values = omegas.iter().map(|&w| k(w)).collect();
        Self::new(omegas, k_values, lambda)
    }

    pub fn from_subohmic(p: &SubOhmicParams, omegas: Vec<f64>) -> Result<Self> {
        Self::from_fn(omegas, |w| p.k_value(w), p.reorganization_energy())
    }

    /// The Gaussian+biexponential density normalized to `lambda`.
    pub fn from_gauss_biexp(g: &GaussBiexpParams, omegas: Vec<f64>, lambda: f64) -> Result<Self> {
        let scale = 2.0 * lambda / g.amplitude_sum();
        Self::from_fn(omegas, |w| scale * g.k_shape(w), lambda)
    }

    pub fn with_omega_floor(mut self, floor: f64) -> Result<Self> {
        ensure_finite("omega floor", floor)?;
        if floor < 0.0 {
            return Err(domain("omega floor must be >= 0"));
        }
        self.omega_floor = floor;
        Ok(self)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }
    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    /// `|∫K dω − λ| / λ` with the integral taken over the grid.
    pub fn normalization_defect(&self) -> f64 {
        self.normalization_defect
    }
    pub fn has_negative_lobes(&self) -> bool {
        self.negative_lobes
    }
    pub fn omega_floor(&self) -> f64 {
        self.omega_floor
    }

    /// `∫ K dω` over the grid (trapezoid).
    pub fn grid_lambda(&self) -> f64 {
        trapezoid(&self.omegas, &self.k_values)
    }

    /// `J(ω) = K(ω)/ω` at the grid points; `None` below the frequency floor.
    pub fn j_values(&self) -> Vec<Option<f64>> {
        self.omegas.iter().zip(&self.k_values).map(|(&w, &k)| (w >= self.omega_floor).then(|| k / w)).collect()
    }
}

fn validate_omega_grid(omegas: &[f64]) -> Result<()> {
    if omegas.is_empty() {
        return Err(Error::InvalidData("empty frequency grid".into()));
    }
    if omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(domain("frequencies must be finite and > 0"));
    }
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidData("frequency grid must increase strictly".into()));
    }
    Ok(())
}

fn validate_time_grid(ts: &[f64]) -> Result<()> {
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

/// `n` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `n` uniformly spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// 400 log-spaced points on `[ω_c/100, 20 ω_c]`, or on `[0.01, 100]/t_max`
/// when no cutoff is known.
pub fn default_omega_grid(omega_c: Option<f64>, t_max: f64) -> Vec<f64> {
    match omega_c {
        Some(wc) => log_grid(wc / 100.0, 20.0 * wc, 400),
        None => log_grid(0.01 / t_max, 100.0 / t_max, 400),
    }
}

/// Output of a forward transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardStokes {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-point error estimate (quadrature estimate or grid-coarsening difference).
    pub error_estimates: Vec<f64>,
    /// `∫K dω` as evaluated by the same quadrature, used for normalization.
    pub lambda: f64,
}

impl ForwardStokes {
    /// Requires the time grid to start at 0.
    pub fn to_response(&self, label: impl Into<String>) -> Result<SampledResponse> {
        SampledResponse::new(self.times.clone(), self.values.clone(), None, label)
    }
}

/// `S(t)` for the analytic sub-Ohmic density by adaptive quadrature of
/// `K(ω) cos ωt`, with the `ω^{s−1}` endpoint behaviour removed by substitution.
pub fn forward_stokes_subohmic(p: &SubOhmicParams, t_grid: &[f64]) -> Result<ForwardStokes> {
    validate_time_grid(t_grid)?;
    let scale = p.reorganization_energy();
    let norm = subohmic_cosine_integral(p, 0.0, scale);
    let rows = par_map(t_grid, |&t| subohmic_cosine_integral(p, t, scale));
    let mut values = Vec::with_capacity(rows.len());
    let mut errors = Vec::with_capacity(rows.len());
    for (v, e) in rows {
        let s = v / norm.0;
        values.push(s);
        errors.push((e + s.abs() * norm.1) / norm.0);
    }
    Ok(ForwardStokes { times: t_grid.to_vec(), values, error_estimates: errors, lambda: norm.0 })
}

/// `(∫₀^∞ K cos ωt dω, error)`
fn subohmic_cosine_integral(p: &SubOhmicParams, t: f64, scale: f64) -> (f64, f64) {
    let cutoff = p.integration_cutoff();
    let opts = QuadOptions { abs_tol: 1e-14 * scale, rel_tol: 1e-12, max_intervals: 20_000 };
    let head_end = if t > 0.0 { (0.5 * PI / t).min(cutoff) } else { cutoff };
    let head = integrate_power_singular(|w| p.k_regular(w) * (w * t).cos(), p.k_exponent(), head_end, opts);
    if head_end >= cutoff {
        return (head.value, head.error);
    }
    let breaks = panels(head_end, cutoff, PI / t);
    let opts = QuadOptions { max_intervals: 4 * breaks.len() + 20_000, ..opts };
    let body = integrate(|w| p.k_value(w) * (w * t).cos(), &breaks, opts);
    (head.value + body.value, head.error + body.error)
}

/// `S(t) = ∫K cos ωt dω / ∫K dω` over the tabulated grid (Filon on the
/// piecewise-linear `K`). The error estimate is the change when every other
/// grid point is dropped.
pub fn forward_stokes(j: &TabulatedSpectralFunction, t_grid: &[f64]) -> Result<ForwardStokes> {
    validate_time_grid(t_grid)?;
    let omegas = j.omegas();
    if omegas.len() < 3 {
        return Err(Error::Resolution("need at least 3 frequencies".into()));
    }
    let t_max = *t_grid.last().unwrap();
    let max_step = omegas.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if max_step * t_max >= PI / 4.0 {
        return Err(Error::Resolution(format!(
            "largest frequency step {max_step} rad/ps is too coarse for t_max = {t_max} ps (need step * t_max < pi/4)"
        )));
    }
    let (coarse_w, coarse_k) = every_other(omegas, j.k_values());
    let norm = trapezoid(omegas, j.k_values());
    let norm_coarse = trapezoid(&coarse_w, &coarse_k);
    if !(norm > 0.0) {
        return Err(domain("tabulated K integrates to a non-positive value"));
    }
    let rows = par_map(t_grid, |&t| {
        let fine = filon_cos(omegas, j.k_values(), t) / norm;
        let coarse = filon_cos(&coarse_w, &coarse_k, t) / norm_coarse;
        (fine, (fine - coarse).abs())
    });
    let (values, error_estimates) = rows.into_iter().unzip();
    Ok(ForwardStokes { times: t_grid.to_vec(), values, error_estimates, lambda: norm })
}

fn every_other(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..xs.len()).step_by(2).collect();
    if *idx.last().unwrap() != xs.len() - 1 {
        idx.push(xs.len() - 1);
    }
    (idx.iter().map(|&i| xs[i]).collect(), idx.iter().map(|&i| ys[i]).collect())
}

/// Functional form of a tail model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailKind {
    None,
    /// `amplitude · S_sub(t; s, ω_c)`, which decays as `t^{−s}`.
    Algebraic {
        s: f64,
        omega_c: f64,
        amplitude: f64,
    },
    /// `amplitude · e^{−rate·t}`
    Exponential {
        rate: f64,
        amplitude: f64,
    },
}

/// Tail family requested from [`fit_tail`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailFamily {
    /// Zero tail if the data have reached zero, otherwise the better of the
    /// algebraic and exponential fits.
    Auto,
    Algebraic,
    Exponential,
    None,
}

impl FromStr for TailFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "algebraic" => Ok(Self::Algebraic),
            "exponential" => Ok(Self::Exponential),
            "none" => Ok(Self::None),
            other => Err(domain(format!("unknown tail family '{other}' (auto|algebraic|exponential|none)"))),
        }
    }
}

/// Extrapolation of `S(t)` beyond `t_splice`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub kind: TailKind,
    pub t_splice: f64,
    /// RMS misfit of the tail fit; widens the splice continuity check.
    #[serde(default)]
    pub fit_rms: f64,
}

impl TailModel {
    pub fn new(kind: TailKind, t_splice: f64) -> Result<Self> {
        ensure_finite("t_splice", t_splice)?;
        if t_splice < 0.0 {
            return Err(domain("t_splice must be >= 0"));
        }
        match kind {
            TailKind::None => {}
            TailKind::Algebraic { s, omega_c, amplitude } => {
                for (name, v) in [("s", s), ("omega_c", omega_c)] {
                    ensure_finite(name, v)?;
                    if v <= 0.0 {
                        return Err(domain(format!("tail {name} must be > 0")));
                    }
                }
                ensure_finite("amplitude", amplitude)?;
            }
            TailKind::Exponential { rate, amplitude } => {
                ensure_finite("rate", rate)?;
                if rate <= 0.0 {
                    return Err(domain("tail rate must be > 0"));
                }
                ensure_finite("amplitude", amplitude)?;
            }
        }
        Ok(Self { kind, t_splice, fit_rms: 0.0 })
    }

    pub fn none(t_splice: f64) -> Result<Self> {
        Self::new(TailKind::None, t_splice)
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            TailKind::None => 0.0,
            TailKind::Algebraic { s, omega_c, amplitude } => amplitude * subohmic_stokes(omega_c, s, t),
            TailKind::Exponential { rate, amplitude } => amplitude * (-rate * t).exp(),
        }
    }

    /// `∫_{t_splice}^∞ tail(t) cos ωt dt` for `ω > 0`.
    pub fn cosine_integral(&self, omega: f64) -> f64 {
        let big_t = self.t_splice;
        match self.kind {
            TailKind::None => 0.0,
            TailKind::Exponential { rate, amplitude } => {
                let (sin, cos) = (omega * big_t).sin_cos();
                amplitude * (-rate * big_t).exp() * (rate * cos - omega * sin) / (rate * rate + omega * omega)
            }
            TailKind::Algebraic { s, omega_c, amplitude } => {
                amplitude * algebraic_tail_integral(s, omega_c, big_t, omega)
            }
        }
    }
}

/// `∫_T^∞ S_sub(t) cos ωt dt` for `ω > 0`.
///
/// `S_sub` is the real part of `(1 + iω_c t)^{−s}` and both that function and
/// its conjugate continue analytically into `Im t > 0` from `Re t = T > 0`,
/// so the ray is rotated to `t = T + iu`, where `e^{iωt}` decays like `e^{−ωu}`.
fn algebraic_tail_integral(s: f64, omega_c: f64, big_t: f64, omega: f64) -> f64 {
    let g = |v: f64| {
        let t = Complex64::new(big_t, v / omega);
        let a = (Complex64::new(1.0, 0.0) + Complex64::i() * omega_c * t).powf(-s);
        let b = (Complex64::new(1.0, 0.0) - Complex64::i() * omega_c * t).powf(-s);
        0.5 * (a + b) * (-v).exp()
    };
    // G(T + iu) is closest to its branch point near u = 1/ω_c, at distance T.
    let v0 = omega / omega_c;
    let width = omega * big_t;
    let mut breaks = vec![0.0, v0 - width, v0, v0 + width, 1e-3, 1e-2, 0.1, 1.0, 5.0, 15.0, 40.0, 60.0];
    breaks.retain(|&b| (0.0..=60.0).contains(&b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 5000 };
    let re = integrate(|v| g(v).re, &breaks, opts).value;
    let im = integrate(|v| g(v).im, &breaks, opts).value;
    let (sin, cos) = (omega * big_t).sin_cos();
    (-sin * re - cos * im) / omega
}

/// `K(ω) = ω J(ω)` from sampled `S(t)`: Filon over the data up to the splice
/// point plus the closed-form cosine integral of the tail.
pub fn invert_density(
    data: &SampledResponse,
    lambda: f64,
    omega_grid: &[f64],
    tail: &TailModel,
) -> Result<TabulatedSpectralFunction> {
    ensure_finite("lambda", lambda)?;
    if lambda <= 0.0 {
        return Err(domain(format!("lambda must be > 0, got {lambda}")));
    }
    validate_omega_grid(omega_grid)?;
    let t_splice = tail.t_splice;
    let Some(s_splice) = data.interpolate(t_splice) else {
        return Err(domain(format!("tail splice {t_splice} ps lies outside the data range [0, {}]", data.t_max())));
    };
    if t_splice <= 0.0 {
        return Err(domain("tail splice must be > 0"));
    }
    if data.last_value() >= 0.5 {
        log::warn!("S(t_max) = {} >= 0.5: the data cover less than one characteristic decay", data.last_value());
    }
    match tail.kind {
        TailKind::None => {
            if s_splice.abs() > TAIL_REQUIRED_ABOVE {
                return Err(Error::TailNeeded { last_value: s_splice, threshold: TAIL_REQUIRED_ABOVE });
            }
        }
        _ => {
            let mismatch = (tail.value(t_splice) - s_splice).abs();
            let tolerance = 0.02 * s_splice.abs().max(TAIL_REQUIRED_ABOVE) + 3.0 * tail.fit_rms;
            if mismatch > tolerance {
                return Err(Error::Fit(format!(
                    "tail value {} at t = {t_splice} ps does not continue the data value {s_splice}",
                    tail.value(t_splice)
                )));
            }
        }
    }
    let n_head = data.times().partition_point(|&t| t < t_splice);
    let mut ts = data.times()[..n_head].to_vec();
    let mut ss = data.values()[..n_head].to_vec();
    ts.push(t_splice);
    ss.push(s_splice);
    let prefactor = 2.0 * lambda / PI;
    let k_values = par_map(omega_grid, |&w| prefactor * (filon_cos(&ts, &ss, w) + tail.cosine_integral(w)));
    TabulatedSpectralFunction::new(omega_grid.to_vec(), k_values, lambda)
}

/// Fits a tail of the requested family to the final 20% of the samples
/// (at least five) and splices it at the last sample.
pub fn fit_tail(data: &SampledResponse, family: TailFamily) -> Result<TailModel> {
    let t_max = data.t_max();
    let in_last_decade = data.times().iter().filter(|&&t| t >= 0.1 * t_max).count();
    if in_last_decade < 5 {
        return Err(Error::Precondition(format!(
            "need at least 5 samples in the final decade of the time grid, got {in_last_decade}"
        )));
    }
    let n = data.len();
    let start = n - ((n as f64 * 0.2).ceil() as usize).max(5).min(n);
    let ts = &data.times()[start..];
    let vs = &data.values()[start..];

    let zero_run = data.values().iter().rev().take_while(|v| v.abs() <= 1e-12).count();
    match family {
        TailFamily::None => {
            let t0 = if zero_run > 0 { data.times()[n - zero_run] } else { t_max };
            TailModel::none(t0.max(data.times()[1]))
        }
        TailFamily::Auto if zero_run >= 5.min(n - 1) => {
            TailModel::none(data.times()[n - zero_run].max(data.times()[1]))
        }
        TailFamily::Auto => {
            let algebraic = fit_algebraic_tail(ts, vs);
            let exponential = fit_exponential_tail(ts, vs);
            let best = match (algebraic, exponential) {
                (Ok(a), Ok(e)) => {
                    if e.fit_rms < a.fit_rms {
                        e
                    } else {
                        a
                    }
                }
                (Ok(a), Err(_)) => a,
                (Err(_), Ok(e)) => e,
                (Err(e), Err(_)) => return Err(e),
            };
            check_splice(best, data.last_value())
        }
        TailFamily::Algebraic => check_splice(fit_algebraic_tail(ts, vs)?, data.last_value()),
        TailFamily::Exponential => check_splice(fit_exponential_tail(ts, vs)?, data.last_value()),
    }
}

fn check_splice(model: TailModel, last: f64) -> Result<TailModel> {
    let mismatch = (model.value(model.t_splice) - last).abs();
    let tolerance = 0.02 * last.abs().max(TAIL_REQUIRED_ABOVE) + 3.0 * model.fit_rms;
    if mismatch > tolerance {
        return Err(Error::Fit(format!("tail fit misses the last sample by {mismatch}")));
    }
    Ok(model)
}

/// Least-squares line `y = a + b x`.
fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn positive_points(ts: &[f64], vs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (pt, pv): (Vec<f64>, Vec<f64>) =
        ts.iter().zip(vs).filter(|(t, v)| **t > 0.0 && **v > 0.0).map(|(t, v)| (*t, *v)).unzip();
    if pt.len() < 3 {
        return Err(Error::Fit("fewer than 3 positive samples in the tail window".into()));
    }
    Ok((pt, pv))
}

fn fit_exponential_tail(ts: &[f64], vs: &[f64]) -> Result<TailModel> {
    let (pt, pv) = positive_points(ts, vs)?;
    let logs: Vec<f64> = pv.iter().map(|v| v.ln()).collect();
    let (a, b) = linear_regression(&pt, &logs);
    if !(b < 0.0) {
        return Err(Error::Fit(format!("tail data do not decay (log slope {b})")));
    }
    // Refine on the linear scale, x = (ln A, ln r).
    let problem = ClosureProblem {
        n: 2,
        f: |x: &[f64], jac: bool| {
            let (amp, rate) = (x[0].exp(), x[1].exp());
            let r = DVector::from_iterator(ts.len(), ts.iter().zip(vs).map(|(t, v)| amp * (-rate * t).exp() - v));
            let j = jac.then(|| {
                DMatrix::from_fn(ts.len(), 2, |i, c| {
                    let m = amp * (-rate * ts[i]).exp();
                    if c == 0 {
                        m
                    } else {
                        -m * rate * ts[i]
                    }
                })
            });
            Some((r, j))
        },
    };
    let out = minimize(&problem, &[a, (-b).ln()], LmSettings::default())
        .ok_or_else(|| Error::Fit("exponential tail fit failed".into()))?;
    let kind = TailKind::Exponential { rate: out.x[1].exp(), amplitude: out.x[0].exp() };
    let mut model = TailModel::new(kind, *ts.last().unwrap())?;
    model.fit_rms = (2.0 * out.cost / ts.len() as f64).sqrt();
    Ok(model)
}

fn fit_algebraic_tail(ts: &[f64], vs: &[f64]) -> Result<TailModel> {
    let (pt, pv) = positive_points(ts, vs)?;
    let lt: Vec<f64> = pt.iter().map(|t| t.ln()).collect();
    let lv: Vec<f64> = pv.iter().map(|v| v.ln()).collect();
    let (_, slope) = linear_regression(&lt, &lv);
    if !(slope < 0.0) {
        return Err(Error::Fit(format!("tail data do not decay (log-log slope {slope})")));
    }
    let s0 = (-slope).clamp(1e-3, 3.0);
    let t_mid = pt[pt.len() / 2];
    let v_mid = pv[pv.len() / 2];
    // x = (ln A, ln s, ln ω_c)
    let problem = ClosureProblem {
        n: 3,
        f: |x: &[f64], jac: bool| {
            let (amp, s, wc) = (x[0].exp(), x[1].exp(), x[2].exp());
            if !(amp.is_finite() && s.is_finite() && wc.is_finite()) {
                return None;
            }
            let mut r = DVector::zeros(ts.len());
            let mut j = jac.then(|| DMatrix::zeros(ts.len(), 3));
            for (i, (&t, &v)) in ts.iter().zip(vs).enumerate() {
                let (st, d_wc, d_s) = subohmic_stokes_derivatives(wc, s, t);
                r[i] = amp * st - v;
                if let Some(j) = j.as_mut() {
                    j[(i, 0)] = amp * st;
                    j[(i, 1)] = amp * s * d_s;
                    j[(i, 2)] = amp * wc * d_wc;
                }
            }
            Some((r, j))
        },
    };
    let mut best: Option<crate::lm::LmOutcome> = None;
    for factor in [1.0, 10.0, 100.0] {
        let wc0 = factor / t_mid;
        let amp0 = v_mid / subohmic_stokes(wc0, s0, t_mid);
        if !(amp0.is_finite() && amp0 > 0.0) {
            continue;
        }
        if let Some(out) = minimize(&problem, &[amp0.ln(), s0.ln(), wc0.ln()], LmSettings::default()) {
            if best.as_ref().is_none_or(|b| out.cost < b.cost) {
                best = Some(out);
            }
        }
    }
    let out = best.ok_or_else(|| Error::Fit("algebraic tail fit failed".into()))?;
    let kind = TailKind::Algebraic { s: out.x[1].exp(), omega_c: out.x[2].exp(), amplitude: out.x[0].exp() };
    let mut model = TailModel::new(kind, *ts.last().unwrap())?;
    model.fit_rms = (2.0 * out.cost / ts.len() as f64).sqrt();
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;

    fn response_from(f: impl Fn(f64) -> f64, ts: Vec<f64>) -> SampledResponse {
        let vs = ts.iter().map(|&t| f(t)).collect();
        SampledResponse::new(ts, vs, None, "test").unwrap()
    }

    /// Dense near the origin, coarser later: `n` points on `[0, t_max]`.
    fn stretched_grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * (i as f64 / (n - 1) as f64).powi(2)).collect()
    }

    #[test]
    fn response_validation() {
        assert!(SampledResponse::new(vec![0.0], vec![1.0], None, "").is_err());
        assert!(SampledResponse::new(vec![0.1, 0.2], vec![1.0, 0.5], None, "").is_err());
        assert!(SampledResponse::new(vec![0.0, 0.2, 0.2], vec![1.0, 0.5, 0.4], None, "").is_err());
        assert!(SampledResponse::new(vec![0.0, 0.2], vec![1.0, f64::NAN], None, "").is_err());
        assert!(SampledResponse::new(vec![0.0, 0.2], vec![1.0, 0.5], Some(vec![0.1, 0.0]), "").is_err());
        let ok = SampledResponse::new(vec![0.0, 0.2], vec![1.3, 0.5], None, "x").unwrap();
        assert_eq!(ok.warnings().len(), 1);
        let sorted =
            SampledResponse::from_unsorted(vec![0.2, 0.0, 0.1], vec![0.5, 1.0, 0.7], Some(vec![1.0, 2.0, 3.0]), "")
                .unwrap();
        assert_eq!(sorted.times(), &[0.0, 0.1, 0.2]);
        assert_eq!(sorted.values(), &[1.0, 0.7, 0.5]);
        assert_eq!(sorted.sigma().unwrap(), &[2.0, 3.0, 1.0]);
        assert!(SampledResponse::from_unsorted(vec![0.2, 0.0, 0.2], vec![0.5, 1.0, 0.7], None, "").is_err());
        assert_eq!(sorted.interpolate(0.15), Some(0.6));
        assert_eq!(sorted.interpolate(0.3), None);
    }

    #[test]
    fn analytic_forward_matches_closed_form() {
        for (wc, s) in [(6.25846, 0.785158), (0.3, 0.1), (120.0, 0.95), (2.0, 1.0), (5.0, 1.8)] {
            let p = SubOhmicParams::new(0.4, 3.0, wc, s).unwrap();
            let ts = linear_grid(0.0, 20.0 / wc, 81);
            let out = forward_stokes_subohmic(&p, &ts).unwrap();
            assert_eq!(out.values[0], 1.0);
            for (t, v) in ts.iter().zip(&out.values) {
                assert!((v - p.stokes(*t).unwrap()).abs() < 1e-9, "wc={wc} s={s} t={t}: {v}");
            }
            assert!((out.lambda - p.reorganization_energy()).abs() < 1e-9 * out.lambda);
        }
    }

    #[test]
    fn coumarin_forward_on_three_picoseconds() {
        let p = SubOhmicParams::new(1.0, 1.0, 6.25846, 0.785158).unwrap();
        let ts = linear_grid(0.0, 3.0, 61);
        let out = forward_stokes_subohmic(&p, &ts).unwrap();
        for (t, v) in ts.iter().zip(&out.values) {
            assert!((v - p.stokes(*t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn tabulated_forward_converges_under_refinement() {
        let p = SubOhmicParams::shape_only(2.0, 1.6).unwrap();
        let ts = linear_grid(0.0, 5.0, 26);
        let coarse = TabulatedSpectralFunction::from_subohmic(&p, linear_grid(1e-6, 80.0, 4001)).unwrap();
        let fine = TabulatedSpectralFunction::from_subohmic(&p, linear_grid(1e-6, 80.0, 8001)).unwrap();
        let a = forward_stokes(&coarse, &ts).unwrap();
        let b = forward_stokes(&fine, &ts).unwrap();
        assert!((a.values[0] - 1.0).abs() < 1e-12);
        for (i, &t) in ts.iter().enumerate() {
            assert!((a.values[i] - b.values[i]).abs() <= a.error_estimates[i] + 1e-15, "t={t}");
            assert!((b.values[i] - p.stokes(t).unwrap()).abs() <= b.error_estimates[i]);
        }
    }

    #[test]
    fn coarse_grid_is_a_resolution_error() {
        let p = SubOhmicParams::shape_only(2.0, 0.5).unwrap();
        let j = TabulatedSpectralFunction::from_subohmic(&p, default_omega_grid(Some(2.0), 10.0)).unwrap();
        assert!(matches!(forward_stokes(&j, &[0.0, 10.0]), Err(Error::Resolution(_))));
        assert!(matches!(forward_stokes(&j, &[]), Err(Error::InvalidData(_))));
    }

    #[test]
    fn gauss_biexp_density_reproduces_its_stokes_function() {
        let g = GaussBiexpParams::new(0.48, 38.5, 0.20, 0.126, 0.35, 0.880).unwrap();
        let j = TabulatedSpectralFunction::from_gauss_biexp(&g, linear_grid(1e-4, 10_000.0, 200_001), 1.0).unwrap();
        let ts = linear_grid(0.0, 2.0, 41);
        let out = forward_stokes(&j, &ts).unwrap();
        let s0 = g.amplitude_sum();
        for (t, v) in ts.iter().zip(&out.values) {
            let want = g.stokes(*t).unwrap() / s0;
            assert!((v - want).abs() < 1e-3, "t={t}: {v} vs {want}");
        }
    }

    #[test]
    fn algebraic_tail_integral_matches_direct_quadrature() {
        for (s, wc, big_t, w) in
            [(0.785158, 6.25846, 3.0, 0.5), (0.3, 1.0, 20.0, 0.05), (0.9, 10.0, 2.0, 40.0), (1.4, 2.0, 5.0, 2.0)]
        {
            let got = algebraic_tail_integral(s, wc, big_t, w);
            // ∫₀^∞ S cos = (π/2) ω^{s−1} e^{−ω/ω_c} / (Γ(s) ω_c^s)
            let full = 0.5 * PI * w.powf(s - 1.0) * (-w / wc).exp() / (gamma(s).unwrap() * wc.powf(s));
            let breaks = panels(0.0, big_t, (PI / w).min(0.05 / wc * 20.0));
            let head = integrate(|t| subohmic_stokes(wc, s, t) * (w * t).cos(), &breaks, QuadOptions::default()).value;
            assert!(
                (got - (full - head)).abs() < 1e-10 * full.abs().max(1.0),
                "{s} {wc} {big_t} {w}: {got} vs {}",
                full - head
            );
        }
    }

    #[test]
    fn exponential_tail_integral_matches_direct_quadrature() {
        let tail = TailModel::new(TailKind::Exponential { rate: 0.7, amplitude: 2.0 }, 1.5).unwrap();
        for w in [0.1, 1.0, 9.0] {
            let breaks = panels(1.5, 80.0, PI / w);
            let direct = integrate(|t| tail.value(t) * (w * t).cos(), &breaks, QuadOptions::default()).value;
            assert!((tail.cosine_integral(w) - direct).abs() < 1e-12);
        }
    }

    fn subohmic_inversion_case(wc: f64, s: f64) -> (SubOhmicParams, SampledResponse, TabulatedSpectralFunction) {
        let p = SubOhmicParams::shape_only(wc, s).unwrap();
        let data = response_from(|t| p.stokes(t).unwrap(), stretched_grid(20.0 / wc, 3000));
        let tail = fit_tail(&data, TailFamily::Algebraic).unwrap();
        let mut omegas = log_grid(1e-5 * wc, 0.1 * wc, 200);
        omegas.pop();
        omegas.extend(linear_grid(0.1 * wc, 30.0 * wc, 1496));
        let j = invert_density(&data, p.reorganization_energy(), &omegas, &tail).unwrap();
        (p, data, j)
    }

    #[test]
    fn inversion_recovers_subohmic_density() {
        for (wc, s) in [(6.25846, 0.785158), (1.0, 0.3), (50.0, 0.6)] {
            let (p, _, j) = subohmic_inversion_case(wc, s);
            for (w, k) in j.omegas().iter().zip(j.k_values()) {
                if (0.1 * wc..=5.0 * wc).contains(w) {
                    let want = p.k_value(*w);
                    assert!((k - want).abs() <= 0.01 * want, "wc={wc} s={s} ω={w}: {k} vs {want}");
                }
            }
        }
    }

    #[test]
    fn inversion_round_trip_and_parseval() {
        let (_, data, j) = subohmic_inversion_case(6.25846, 0.785158);
        assert!(j.normalization_defect() < 0.005, "defect {}", j.normalization_defect());
        let back = forward_stokes(&j, data.times()).unwrap();
        for (a, b) in back.values.iter().zip(data.values()) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn inversion_of_exponential_is_lorentzian() {
        let wc = 3.0;
        let data = response_from(|t| (-wc * t).exp(), linear_grid(0.0, 3.0, 3001));
        let tail = fit_tail(&data, TailFamily::Exponential).unwrap();
        let omegas = log_grid(0.01, 100.0, 200);
        let lambda = 2.5;
        let j = invert_density(&data, lambda, &omegas, &tail).unwrap();
        for (w, k) in omegas.iter().zip(j.k_values()) {
            let want = 2.0 * lambda / PI * wc / (wc * wc + w * w);
            // piecewise-linear data: relative error ≈ (ω_c² + ω²) h² / 12
            let h = 1e-3;
            let tol = (wc * wc + w * w) * h * h / 6.0;
            assert!((k - want).abs() < tol * want, "ω={w}: {k} vs {want}");
        }
    }

    #[test]
    fn inversion_is_linear() {
        let ts = linear_grid(0.0, 12.0, 1201);
        let s1 = response_from(|t| (-t).exp(), ts.clone());
        let s2 = response_from(|t| (-0.5 * 9.0 * t * t).exp(), ts.clone());
        let alpha = 0.3;
        let mix = response_from(|t| alpha * (-t).exp() + (1.0 - alpha) * (-4.5 * t * t).exp(), ts);
        let omegas = log_grid(0.05, 20.0, 50);
        let tail = TailModel::none(12.0).unwrap();
        let j1 = invert_density(&s1, 1.0, &omegas, &tail).unwrap();
        let j2 = invert_density(&s2, 1.0, &omegas, &tail).unwrap();
        let jm = invert_density(&mix, 1.0, &omegas, &tail).unwrap();
        for i in 0..omegas.len() {
            let want = alpha * j1.k_values()[i] + (1.0 - alpha) * j2.k_values()[i];
            assert!((jm.k_values()[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_errors() {
        let data = response_from(|t| (-t).exp(), linear_grid(0.0, 1.0, 50));
        let omegas = log_grid(0.1, 10.0, 20);
        let none = TailModel::none(1.0).unwrap();
        assert!(matches!(invert_density(&data, 1.0, &omegas, &none), Err(Error::TailNeeded { .. })));
        let tail = fit_tail(&data, TailFamily::Exponential).unwrap();
        assert!(invert_density(&data, -1.0, &omegas, &tail).is_err());
        assert!(invert_density(&data, 1.0, &[0.0, 1.0], &tail).is_err());
        let bad = TailModel::new(TailKind::Exponential { rate: 1.0, amplitude: 2.0 }, 1.0).unwrap();
        assert!(matches!(invert_density(&data, 1.0, &omegas, &bad), Err(Error::Fit(_))));
    }

    #[test]
    fn j_floor_and_negative_lobes() {
        let j = TabulatedSpectralFunction::new(vec![1e-5, 1e-3, 1.0], vec![1.0, -0.5, 2.0], 1.0).unwrap();
        assert!(j.has_negative_lobes());
        let jv = j.j_values();
        assert_eq!(jv[0], None);
        assert_eq!(jv[2], Some(2.0));
        let j = j.with_omega_floor(0.0).unwrap();
        assert_eq!(j.j_values()[0], Some(1.0 / 1e-5));
    }

    #[test]
    fn tail_fits() {
        let p = SubOhmicParams::shape_only(6.25846, 0.785158).unwrap();
        let data = response_from(|t| p.stokes(t).unwrap(), linear_grid(0.0, 30.0, 600));
        let TailKind::Algebraic { s, .. } = fit_tail(&data, TailFamily::Algebraic).unwrap().kind else { panic!() };
        assert!((s - 0.785158).abs() < 0.05 * 0.785158, "s = {s}");

        let data = response_from(|t| 0.8 * (-1.7 * t).exp(), linear_grid(0.0, 4.0, 200));
        let TailKind::Exponential { rate, amplitude } = fit_tail(&data, TailFamily::Exponential).unwrap().kind else {
            panic!()
        };
        assert!((rate - 1.7).abs() < 0.02 * 1.7 && (amplitude - 0.8).abs() < 1e-6);

        let data = response_from(|t| if t < 2.0 { 1.0 - 0.5 * t } else { 0.0 }, linear_grid(0.0, 5.0, 51));
        let tail = fit_tail(&data, TailFamily::Auto).unwrap();
        assert_eq!(tail.kind, TailKind::None);
        assert!((tail.t_splice - 2.0).abs() < 1e-12);
        assert_eq!(fit_tail(&data, TailFamily::None).unwrap().t_splice, tail.t_splice);

        let rising = response_from(|t| 1.0 + 0.1 * t, linear_grid(0.0, 4.0, 40));
        assert!(matches!(fit_tail(&rising, TailFamily::Algebraic), Err(Error::Fit(_))));
        assert!(matches!(fit_tail(&rising, TailFamily::Exponential), Err(Error::Fit(_))));

        let sparse = response_from(|t| (-t).exp(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(fit_tail(&sparse, TailFamily::Exponential), Err(Error::Precondition(_))));
    }
}
