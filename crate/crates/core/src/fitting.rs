//! Bounded nonlinear least-squares fits of the Stokes-function models.
//!
//! Bounds are removed by smooth reparameterization (bounded log for `ω_c`,
//! logistic for `s`, squares for nonnegative amplitudes, logs for rates) and
//! the unconstrained problem is solved by Levenberg-Marquardt from a fixed
//! grid of starts. Solutions that press against a bound are reported as
//! boundary-active instead of being silently clamped.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::density::{subohmic_stokes_derivatives, GaussBiexpParams, SubOhmicParams};
use crate::error::{domain, Error, Result};
use crate::lm::{minimize, LeastSquares, LmOutcome, LmSettings};
use crate::par_map;
use crate::transforms::SampledResponse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Subohmic,
    SubohmicBaseline,
    GaussBiexp,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Subohmic => "subohmic",
            ModelKind::SubohmicBaseline => "subohmic-baseline",
            ModelKind::GaussBiexp => "gauss-biexp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subohmic" => Ok(Self::Subohmic),
            "subohmic-baseline" => Ok(Self::SubohmicBaseline),
            "gauss-biexp" => Ok(Self::GaussBiexp),
            other => Err(domain(format!("unknown model '{other}' (subohmic|subohmic-baseline|gauss-biexp)"))),
        }
    }
}

/// Fit settings. Every field has a default, so a partial JSON document is a
/// valid options file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative cost reduction that ends a run.
    pub ftol: f64,
    /// Relative step size that ends a run.
    pub xtol: f64,
    /// Scaled gradient that ends a run.
    pub gtol: f64,
    /// Bounds on the cutoff frequency, rad/ps.
    pub omega_c_min: f64,
    pub omega_c_max: f64,
    /// Divide the data by their `t = 0` value before fitting models that are
    /// normalized by construction (all but the unconstrained Gauss+biexp).
    pub normalize_initial: bool,
    /// Impose `a_g + a_1 + a_2 = 1` on the Gauss+biexp model.
    pub constrain_amplitudes: bool,
    /// Restrict the fit to `t ∈ [window[0], window[1]]` (ps).
    pub window: Option<[f64; 2]>,
    /// Use the full start grid; otherwise a single central start.
    pub multistart: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-15,
            xtol: 1e-15,
            gtol: 1e-12,
            omega_c_min: 1e-3,
            omega_c_max: 1e4,
            normalize_initial: true,
            constrain_amplitudes: false,
            window: None,
            multistart: true,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.omega_c_min > 0.0 && self.omega_c_max > self.omega_c_min && self.omega_c_max.is_finite()) {
            return Err(domain("omega_c bounds must satisfy 0 < min < max < inf"));
        }
        for (name, v) in [("ftol", self.ftol), ("xtol", self.xtol), ("gtol", self.gtol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be finite and >= 0")));
            }
        }
        if let Some([a, b]) = self.window {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(domain("window must be [t_min, t_max] with t_min < t_max"));
            }
        }
        Ok(())
    }

    fn lm(&self) -> LmSettings {
        LmSettings { max_iterations: self.max_iterations, ftol: self.ftol, xtol: self.xtol, gtol: self.gtol }
    }
}

/// Outcome of a fit. Parameters are listed in model order under
/// `param_names`; uncertainties are one standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    pub uncertainties: Vec<f64>,
    /// Unweighted RMS misfit in the units of the input data.
    pub residual_rms: f64,
    /// `½ Σ r²` of the weighted, possibly normalized residuals.
    pub weighted_cost: f64,
    pub iterations: usize,
    /// The optimizer met its stopping test and no parameter sits at a bound.
    pub converged: bool,
    pub boundary_active: Vec<String>,
    /// Parameters within 1% of a bound (in their natural scale) without
    /// being at it.
    pub near_boundary: Vec<String>,
    pub gradient_norm: f64,
    /// Index of the winning start in the start grid.
    pub winning_start: usize,
    pub starts: usize,
    pub converged_starts: usize,
    pub n_points: usize,
    /// Time window actually fitted, ps.
    pub window: [f64; 2],
    /// Factor the data were divided by before fitting (1 if not normalized).
    pub data_scale: f64,
    pub ill_conditioned: bool,
    pub warnings: Vec<String>,
    /// Cost after each accepted step of the winning start.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.param_names.iter().position(|n| n == name).map(|i| self.params[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.param_names.iter().position(|n| n == name).map(|i| self.uncertainties[i])
    }

    /// Shape-only sub-Ohmic parameters (`δ_s = 1`, `ω_ph = ω_c`) for the
    /// sub-Ohmic models.
    pub fn subohmic(&self) -> Option<SubOhmicParams> {
        match self.model {
            ModelKind::Subohmic | ModelKind::SubohmicBaseline => {
                SubOhmicParams::shape_only(self.param("omega_c")?, self.param("s")?).ok()
            }
            ModelKind::GaussBiexp => None,
        }
    }

    pub fn gauss_biexp(&self) -> Option<GaussBiexpParams> {
        if self.model != ModelKind::GaussBiexp {
            return None;
        }
        let p = &self.params;
        GaussBiexpParams::new(p[0], p[1], p[2], p[3], p[4], p[5]).ok()
    }

    /// Model prediction in the units of the input data.
    pub fn predict(&self, t: f64) -> f64 {
        self.data_scale * model_value(self.model, &self.params, t)
    }
}

fn model_value(kind: ModelKind, p: &[f64], t: f64) -> f64 {
    let mut grad = [0.0; 6];
    eval_model(kind, p, t, &mut grad)
}

/// Value and gradient with respect to the model parameters.
fn eval_model(kind: ModelKind, p: &[f64], t: f64, grad: &mut [f64]) -> f64 {
    match kind {
        ModelKind::Subohmic => {
            let (v, d_wc, d_s) = subohmic_stokes_derivatives(p[0], p[1], t);
            grad[0] = d_wc;
            grad[1] = d_s;
            v
        }
        ModelKind::SubohmicBaseline => {
            let (v, d_wc, d_s) = subohmic_stokes_derivatives(p[0], p[1], t);
            let b = p[2];
            let inv = 1.0 / (1.0 + b);
            grad[0] = d_wc * inv;
            grad[1] = d_s * inv;
            grad[2] = (1.0 - v) * inv * inv;
            (v + b) * inv
        }
        ModelKind::GaussBiexp => {
            let (a_g, w_d, a_1, tau_1, a_2, tau_2) = (p[0], p[1], p[2], p[3], p[4], p[5]);
            let e_g = (-0.5 * w_d * t * t).exp();
            let e_1 = (-t / tau_1).exp();
            let e_2 = (-t / tau_2).exp();
            grad[0] = e_g;
            grad[1] = -0.5 * a_g * t * t * e_g;
            grad[2] = e_1;
            grad[3] = a_1 * e_1 * t / (tau_1 * tau_1);
            grad[4] = e_2;
            grad[5] = a_2 * e_2 * t / (tau_2 * tau_2);
            a_g * e_g + a_1 * e_1 + a_2 * e_2
        }
    }
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Mapping between unconstrained coordinates and model parameters.
#[derive(Debug, Clone, Copy)]
struct Parameterization {
    kind: ModelKind,
    constrained: bool,
    ln_wc_min: f64,
    ln_wc_max: f64,
}

impl Parameterization {
    fn names(&self) -> &'static [&'static str] {
        match self.kind {
            ModelKind::Subohmic => &["omega_c", "s"],
            ModelKind::SubohmicBaseline => &["omega_c", "s", "b0"],
            ModelKind::GaussBiexp => &["a_g", "omega_d", "a_1", "tau_1", "a_2", "tau_2"],
        }
    }

    fn n_external(&self) -> usize {
        self.names().len()
    }

    fn n_internal(&self) -> usize {
        match (self.kind, self.constrained) {
            (ModelKind::GaussBiexp, true) => 5,
            _ => self.n_external(),
        }
    }

    /// Parameters and `∂p/∂x` (`n_external × n_internal`).
    fn external(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let mut d = DMatrix::zeros(self.n_external(), self.n_internal());
        let span = self.ln_wc_max - self.ln_wc_min;
        let p = match self.kind {
            ModelKind::Subohmic | ModelKind::SubohmicBaseline => {
                let sw = sigmoid(x[0]);
                let wc = (self.ln_wc_min + span * sw).exp();
                let s = sigmoid(x[1]);
                d[(0, 0)] = wc * span * sw * (1.0 - sw);
                d[(1, 1)] = s * (1.0 - s);
                let mut p = vec![wc, s];
                if self.kind == ModelKind::SubohmicBaseline {
                    p.push(x[2] * x[2]);
                    d[(2, 2)] = 2.0 * x[2];
                }
                p
            }
            ModelKind::GaussBiexp if self.constrained => {
                let (s1, c1) = x[0].sin_cos();
                let (s2, c2) = x[1].sin_cos();
                let (sin2_1, sin2_2) = ((2.0 * x[0]).sin(), (2.0 * x[1]).sin());
                let (w_d, tau_1, tau_2) = (x[2].exp(), x[3].exp(), x[4].exp());
                d[(0, 0)] = -sin2_1;
                d[(2, 0)] = sin2_1 * c2 * c2;
                d[(4, 0)] = sin2_1 * s2 * s2;
                d[(2, 1)] = -s1 * s1 * sin2_2;
                d[(4, 1)] = s1 * s1 * sin2_2;
                d[(1, 2)] = w_d;
                d[(3, 3)] = tau_1;
                d[(5, 4)] = tau_2;
                vec![c1 * c1, w_d, s1 * s1 * c2 * c2, tau_1, s1 * s1 * s2 * s2, tau_2]
            }
            ModelKind::GaussBiexp => {
                let p = vec![x[0] * x[0], x[1].exp(), x[2] * x[2], x[3].exp(), x[4] * x[4], x[5].exp()];
                d[(0, 0)] = 2.0 * x[0];
                d[(1, 1)] = p[1];
                d[(2, 2)] = 2.0 * x[2];
                d[(3, 3)] = p[3];
                d[(4, 4)] = 2.0 * x[4];
                d[(5, 5)] = p[5];
                p
            }
        };
        (p, d)
    }

    /// Inverse of [`external`](Self::external) for interior parameters.
    fn internal(&self, p: &[f64]) -> Vec<f64> {
        match self.kind {
            ModelKind::Subohmic | ModelKind::SubohmicBaseline => {
                let span = self.ln_wc_max - self.ln_wc_min;
                let frac = ((p[0].ln() - self.ln_wc_min) / span).clamp(1e-9, 1.0 - 1e-9);
                let mut x = vec![logit(frac), logit(p[1].clamp(1e-9, 1.0 - 1e-9))];
                if self.kind == ModelKind::SubohmicBaseline {
                    x.push(p[2].max(0.0).sqrt());
                }
                x
            }
            ModelKind::GaussBiexp if self.constrained => {
                let total = p[0] + p[2] + p[4];
                let (a_g, a_1) = (p[0] / total, p[2] / total);
                let phi1 = a_g.sqrt().clamp(0.0, 1.0).acos();
                let rest = 1.0 - a_g;
                let phi2 = if rest > 0.0 { (a_1 / rest).sqrt().clamp(0.0, 1.0).acos() } else { 0.0 };
                vec![phi1, phi2, p[1].ln(), p[3].ln(), p[5].ln()]
            }
            ModelKind::GaussBiexp => vec![p[0].sqrt(), p[1].ln(), p[2].sqrt(), p[3].ln(), p[4].sqrt(), p[5].ln()],
        }
    }

    /// Parameters within relative distance `margin` of a bound; amplitudes
    /// and `b0` use `margin²` as an absolute floor.
    fn at_bounds(&self, p: &[f64], wc_bounds: (f64, f64), margin: f64) -> Vec<String> {
        let mut out = Vec::new();
        match self.kind {
            ModelKind::Subohmic | ModelKind::SubohmicBaseline => {
                if p[0] <= wc_bounds.0 * (1.0 + margin) || p[0] >= wc_bounds.1 * (1.0 - margin) {
                    out.push("omega_c".to_string());
                }
                if p[1] <= margin || p[1] >= 1.0 - margin {
                    out.push("s".to_string());
                }
                if self.kind == ModelKind::SubohmicBaseline && p[2] <= margin * margin {
                    out.push("b0".to_string());
                }
            }
            ModelKind::GaussBiexp => {
                for (i, name) in [(0, "a_g"), (2, "a_1"), (4, "a_2")] {
                    if p[i] <= margin * margin {
                        out.push(name.to_string());
                    }
                }
            }
        }
        out
    }
}

/// Weighted residuals of one model against prepared data.
struct Problem<'a> {
    param: Parameterization,
    ts: &'a [f64],
    ys: &'a [f64],
    weights: &'a [f64],
}

impl LeastSquares for Problem<'_> {
    fn n_params(&self) -> usize {
        self.param.n_internal()
    }

    fn evaluate(&self, x: &[f64], jacobian: bool) -> Option<(DVector<f64>, Option<DMatrix<f64>>)> {
        let (p, dpdx) = self.param.external(x);
        if p.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let n = self.ts.len();
        let mut r = DVector::zeros(n);
        let mut jext = jacobian.then(|| DMatrix::zeros(n, self.param.n_external()));
        let mut grad = [0.0; 6];
        for i in 0..n {
            let v = eval_model(self.param.kind, &p, self.ts[i], &mut grad);
            r[i] = self.weights[i] * (v - self.ys[i]);
            if let Some(j) = jext.as_mut() {
                for k in 0..self.param.n_external() {
                    j[(i, k)] = self.weights[i] * grad[k];
                }
            }
        }
        if r.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((r, jext.map(|j| j * dpdx)))
    }
}

struct Prepared {
    ts: Vec<f64>,
    ys: Vec<f64>,
    weights: Vec<f64>,
    raw: Vec<f64>,
    scale: f64,
    has_sigma: bool,
    window: [f64; 2],
}

fn prepare(data: &SampledResponse, options: &FitOptions, normalize: bool, min_points: usize) -> Result<Prepared> {
    let [lo, hi] = options.window.unwrap_or([0.0, data.t_max()]);
    let mut ts = Vec::new();
    let mut raw = Vec::new();
    let mut sig = Vec::new();
    for i in 0..data.len() {
        let t = data.times()[i];
        if t >= lo && t <= hi {
            ts.push(t);
            raw.push(data.values()[i]);
            sig.push(data.sigma().map_or(1.0, |s| s[i]));
        }
    }
    if ts.len() < min_points {
        return Err(Error::Precondition(format!(
            "need at least {min_points} data points in the fit window, got {}",
            ts.len()
        )));
    }
    if let Some(v) = raw.iter().find(|v| !(-0.2..=1.2).contains(*v)) {
        return Err(Error::Precondition(format!("data value {v} outside [-0.2, 1.2]; is the response normalized?")));
    }
    let (min, max) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if max - min <= 1e-12 * max.abs().max(min.abs()).max(1e-300) {
        return Err(Error::RankDeficient("data are constant; no decay parameters can be determined".into()));
    }
    let scale = if normalize {
        let s0 = data.values()[0];
        if !(s0 > 0.0) {
            return Err(Error::Precondition(format!("cannot normalize by S(0) = {s0}")));
        }
        s0
    } else {
        1.0
    };
    let ys = raw.iter().map(|v| v / scale).collect();
    let weights = sig.iter().map(|s| scale / s).collect();
    Ok(Prepared { ts, ys, weights, raw, scale, has_sigma: data.sigma().is_some(), window: [lo, hi] })
}

/// Time at which the data first fall to half of their initial value.
fn half_time(p: &Prepared) -> f64 {
    let target = 0.5 * (p.ys[0] + p.ys.iter().cloned().fold(f64::INFINITY, f64::min));
    for i in 1..p.ts.len() {
        if p.ys[i] <= target {
            let (t0, t1, y0, y1) = (p.ts[i - 1], p.ts[i], p.ys[i - 1], p.ys[i]);
            let t = if y1 != y0 { t0 + (target - y0) * (t1 - t0) / (y1 - y0) } else { t1 };
            if t > 0.0 {
                return t;
            }
        }
    }
    *p.ts.last().unwrap()
}

const START_SCALES: [f64; 5] = [0.1, 0.316_227_766_016_837_94, 1.0, 3.162_277_660_168_379_5, 10.0];
const START_EXPONENTS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn starts(param: &Parameterization, data: &Prepared, multistart: bool, wc_bounds: (f64, f64)) -> Vec<Vec<f64>> {
    let t_half = half_time(data);
    let clamp_wc = |w: f64| w.clamp(wc_bounds.0 * 1.01, wc_bounds.1 * 0.99);
    match param.kind {
        ModelKind::Subohmic | ModelKind::SubohmicBaseline => {
            let last = *data.ys.last().unwrap();
            let b0 = if last > 0.0 && last < 0.95 { (last / (1.0 - last)).clamp(0.01, 10.0) } else { 0.1 };
            let grid: Vec<(f64, f64)> = if multistart {
                START_SCALES.iter().flat_map(|&k| START_EXPONENTS.iter().map(move |&s| (k, s))).collect()
            } else {
                vec![(1.0, 0.5)]
            };
            grid.into_iter()
                .map(|(k, s)| {
                    let mut p = vec![clamp_wc(k / t_half), s];
                    if param.kind == ModelKind::SubohmicBaseline {
                        p.push(b0);
                    }
                    param.internal(&p)
                })
                .collect()
        }
        ModelKind::GaussBiexp => {
            let amp = data.ys[0].max(1e-3) / 3.0;
            let mut out = Vec::new();
            let wd_grid: &[f64] = if multistart { &[0.3, 3.0, 30.0] } else { &[3.0] };
            let t1_grid: &[f64] = if multistart { &[0.1, 0.3, 1.0] } else { &[0.3] };
            let t2_grid: &[f64] = if multistart { &[2.0, 5.0, 20.0] } else { &[5.0] };
            for &wd in wd_grid {
                for &k1 in t1_grid {
                    for &k2 in t2_grid {
                        let p = [amp, wd / (t_half * t_half), amp, k1 * t_half, amp, k2 * t_half];
                        out.push(param.internal(&p));
                    }
                }
            }
            out
        }
    }
}

fn run_fit(kind: ModelKind, data: &SampledResponse, options: &FitOptions) -> Result<FitResult> {
    options.validate()?;
    let constrained = kind == ModelKind::GaussBiexp && options.constrain_amplitudes;
    let normalize = options.normalize_initial && (kind != ModelKind::GaussBiexp || constrained);
    let min_points = if kind == ModelKind::GaussBiexp { 12 } else { 8 };
    let prepared = prepare(data, options, normalize, min_points)?;
    let wc_bounds = (options.omega_c_min, options.omega_c_max);
    let param = Parameterization { kind, constrained, ln_wc_min: wc_bounds.0.ln(), ln_wc_max: wc_bounds.1.ln() };
    let problem = Problem { param, ts: &prepared.ts, ys: &prepared.ys, weights: &prepared.weights };
    let start_points = starts(&param, &prepared, options.multistart, wc_bounds);
    let settings = options.lm();
    let outcomes: Vec<Option<LmOutcome>> = par_map(&start_points, |x0| minimize(&problem, x0, settings));

    let n_starts = outcomes.len();
    let converged_starts = outcomes.iter().flatten().filter(|o| o.converged).count();
    let mut best: Option<(usize, &LmOutcome)> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if let Some(o) = o {
            if best.is_none_or(|(_, b)| o.cost < b.cost) {
                best = Some((i, o));
            }
        }
    }
    let Some((winning_start, outcome)) = best else {
        return Err(Error::NonConvergence { starts: n_starts, best_cost: f64::INFINITY });
    };
    if converged_starts == 0 {
        return Err(Error::NonConvergence { starts: n_starts, best_cost: outcome.cost });
    }
    // Among converged starts the lowest cost wins; an unconverged start only
    // wins if nothing converged, which is rejected above.
    let (winning_start, outcome) = if outcome.converged {
        (winning_start, outcome)
    } else {
        outcomes
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.as_ref().filter(|o| o.converged).map(|o| (i, o)))
            .fold(None::<(usize, &LmOutcome)>, |acc, (i, o)| match acc {
                Some((_, b)) if b.cost <= o.cost => acc,
                _ => Some((i, o)),
            })
            .unwrap()
    };

    let (mut params, dpdx) = param.external(&outcome.x);
    let (_, jac) =
        problem.evaluate(&outcome.x, true).ok_or_else(|| Error::Fit("model not evaluable at the solution".into()))?;
    let jac = jac.unwrap();
    let dof = prepared.ts.len().saturating_sub(param.n_internal()).max(1) as f64;
    let variance_scale = if prepared.has_sigma { 1.0 } else { 2.0 * outcome.cost / dof };
    let cov_int = pseudo_inverse(&(jac.transpose() * &jac));
    let cov_ext = &dpdx * cov_int * dpdx.transpose();
    let mut uncertainties: Vec<f64> =
        (0..params.len()).map(|i| (variance_scale * cov_ext[(i, i)].max(0.0)).sqrt()).collect();

    let mut ill_conditioned = false;
    let mut warnings = Vec::new();
    if kind == ModelKind::GaussBiexp {
        if params[3] > params[5] {
            params.swap(2, 4);
            params.swap(3, 5);
            uncertainties.swap(2, 4);
            uncertainties.swap(3, 5);
        }
        if params[5] / params[3] < 1.05 {
            ill_conditioned = true;
            warnings.push(format!(
                "tau_1 = {} and tau_2 = {} nearly coincide; amplitudes a_1, a_2 are not separately determined",
                params[3], params[5]
            ));
        }
    }
    let svd = jac.clone().svd(false, false);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if smin <= 1e-10 * smax {
        ill_conditioned = true;
        warnings.push("the Jacobian is numerically rank deficient at the solution".into());
    }

    let boundary_active = param.at_bounds(&params, wc_bounds, 1e-4);
    let near_boundary: Vec<String> =
        param.at_bounds(&params, wc_bounds, 1e-2).into_iter().filter(|n| !boundary_active.contains(n)).collect();
    let rss: f64 = prepared
        .ts
        .iter()
        .zip(&prepared.raw)
        .map(|(&t, &y)| {
            let m = prepared.scale * model_value(kind, &params, t);
            (m - y) * (m - y)
        })
        .sum();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(FitResult {
        model: kind,
        param_names: param.names().iter().map(|s| s.to_string()).collect(),
        params,
        uncertainties,
        residual_rms: (rss / prepared.ts.len() as f64).sqrt(),
        weighted_cost: outcome.cost,
        iterations: outcome.iterations,
        converged: outcome.converged && boundary_active.is_empty(),
        boundary_active,
        near_boundary,
        gradient_norm: outcome.gradient_norm,
        winning_start,
        starts: n_starts,
        converged_starts,
        n_points: prepared.ts.len(),
        window: prepared.window,
        data_scale: prepared.scale,
        ill_conditioned,
        warnings,
        cost_history: outcome.history.clone(),
    })
}

/// Moore-Penrose pseudo-inverse of a symmetric positive semidefinite matrix.
fn pseudo_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.amax();
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l > 1e-12 * max {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / l;
        }
    }
    out
}

/// Fits `S(t) = (1 + ω_c²t²)^{−s/2} cos(s·arctan ω_c t)` over `(ω_c, s)`.
pub fn fit_subohmic(data: &SampledResponse, options: &FitOptions) -> Result<FitResult> {
    run_fit(ModelKind::Subohmic, data, options)
}

/// Fits `[S(t) + b0]/(1 + b0)` over `(ω_c, s, b0)` with `b0 ≥ 0`.
pub fn fit_subohmic_baseline(data: &SampledResponse, options: &FitOptions) -> Result<FitResult> {
    run_fit(ModelKind::SubohmicBaseline, data, options)
}

/// Fits the Gaussian+biexponential model; `τ_1 < τ_2` in the result.
pub fn fit_gauss_biexp(data: &SampledResponse, options: &FitOptions) -> Result<FitResult> {
    run_fit(ModelKind::GaussBiexp, data, options)
}

pub fn fit_model(kind: ModelKind, data: &SampledResponse, options: &FitOptions) -> Result<FitResult> {
    run_fit(kind, data, options)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub model: ModelKind,
    pub n_params: usize,
    pub residual_rms: f64,
    /// Small-sample corrected Akaike criterion; lower is better.
    pub aicc: f64,
    pub boundary_active: Vec<String>,
    pub near_boundary: Vec<String>,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    /// Sorted by AICc, ties broken by parameter count.
    pub entries: Vec<ComparisonEntry>,
    pub best_by_residual: ModelKind,
}

impl ModelComparison {
    pub fn best(&self) -> ModelKind {
        self.entries[0].model
    }

    pub fn entry(&self, kind: ModelKind) -> Option<&ComparisonEntry> {
        self.entries.iter().find(|e| e.model == kind)
    }
}

/// Fits the two-parameter sub-Ohmic and the six-parameter Gauss+biexp
/// models and ranks them by AICc.
pub fn compare_models(data: &SampledResponse, options: &FitOptions) -> Result<ModelComparison> {
    let mut entries = Vec::new();
    for kind in [ModelKind::Subohmic, ModelKind::GaussBiexp] {
        let fit = run_fit(kind, data, options)?;
        let n = fit.n_points as f64;
        let k = match kind {
            ModelKind::GaussBiexp if options.constrain_amplitudes => 5,
            _ => fit.params.len(),
        };
        let rss = (fit.residual_rms * fit.residual_rms * n).max(1e-300);
        let kf = k as f64;
        let aicc = n * (rss / n).ln() + 2.0 * kf + 2.0 * kf * (kf + 1.0) / (n - kf - 1.0).max(1.0);
        entries.push(ComparisonEntry {
            model: kind,
            n_params: k,
            residual_rms: fit.residual_rms,
            aicc,
            boundary_active: fit.boundary_active.clone(),
            near_boundary: fit.near_boundary.clone(),
            fit,
        });
    }
    let best_by_residual = entries
        .iter()
        .min_by(|a, b| a.residual_rms.total_cmp(&b.residual_rms).then(a.n_params.cmp(&b.n_params)))
        .unwrap()
        .model;
    entries.sort_by(|a, b| a.aicc.total_cmp(&b.aicc).then(a.n_params.cmp(&b.n_params)));
    Ok(ModelComparison { entries, best_by_residual })
}
