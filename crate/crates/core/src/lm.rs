//! Levenberg-Marquardt for small dense problems.
//!
//! Marquardt diagonal scaling makes the iteration invariant under rescaling
//! of individual parameters; the damping follows Nielsen's update.

use nalgebra::{DMatrix, DVector};

pub(crate) trait LeastSquares {
    fn n_params(&self) -> usize;
    /// Residuals at `x`, and the Jacobian `∂r/∂x` when requested.
    /// `None` marks a point where the model cannot be evaluated.
    fn evaluate(&self, x: &[f64], jacobian: bool) -> Option<(DVector<f64>, Option<DMatrix<f64>>)>;
}

/// A problem given by a closure `(x, want_jacobian) -> (r, J)`.
pub(crate) struct ClosureProblem<F> {
    pub n: usize,
    pub f: F,
}

impl<F> LeastSquares for ClosureProblem<F>
where
    F: Fn(&[f64], bool) -> Option<(DVector<f64>, Option<DMatrix<f64>>)>,
{
    fn n_params(&self) -> usize {
        self.n
    }
    fn evaluate(&self, x: &[f64], jacobian: bool) -> Option<(DVector<f64>, Option<DMatrix<f64>>)> {
        (self.f)(x, jacobian)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmSettings {
    pub max_iterations: usize,
    /// Relative cost reduction below which an accepted step ends the run.
    pub ftol: f64,
    /// Relative step size below which the run ends.
    pub xtol: f64,
    /// Largest cosine between the residual vector and a Jacobian column
    /// below which the run ends.
    pub gtol: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self { max_iterations: 500, ftol: 1e-15, xtol: 1e-15, gtol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
    /// `½ Σ r²`
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Scaled gradient measure compared against `gtol`.
    pub gradient_norm: f64,
    /// Cost after the start and after every accepted step.
    pub history: Vec<f64>,
}

pub(crate) fn minimize<P: LeastSquares + ?Sized>(problem: &P, x0: &[f64], settings: LmSettings) -> Option<LmOutcome> {
    let n = problem.n_params();
    let mut x = DVector::from_column_slice(x0);
    let (mut r, jac) = problem.evaluate(x.as_slice(), true)?;
    let mut jac = jac?;
    let mut cost = 0.5 * r.norm_squared();
    if !cost.is_finite() {
        return None;
    }
    let mut history = vec![cost];
    let mut a = jac.transpose() * &jac;
    let mut g = jac.transpose() * &r;
    let mut scale = DVector::from_fn(n, |i, _| a[(i, i)].max(f64::MIN_POSITIVE));
    let mut mu = 1e-3;
    let mut nu = 2.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        if cost == 0.0 || scaled_gradient(&g, &a, cost) <= settings.gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut damped = a.clone();
        for i in 0..n {
            damped[(i, i)] += mu * scale[i];
        }
        let Some(chol) = damped.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let h = chol.solve(&(-&g));
        if h.norm() <= settings.xtol * (x.norm() + settings.xtol) {
            converged = true;
            break;
        }
        let x_new = &x + &h;
        let trial = problem.evaluate(x_new.as_slice(), false);
        let cost_new = trial.as_ref().map(|(r, _)| 0.5 * r.norm_squared()).unwrap_or(f64::INFINITY);
        let predicted = 0.5 * h.dot(&(mu * scale.component_mul(&h) - &g));
        let rho = if cost_new.is_finite() && predicted > 0.0 { (cost - cost_new) / predicted } else { -1.0 };
        if rho > 0.0 {
            let reduction = cost - cost_new;
            x = x_new;
            let Some((r_new, Some(j_new))) = problem.evaluate(x.as_slice(), true) else {
                return None;
            };
            r = r_new;
            jac = j_new;
            cost = 0.5 * r.norm_squared();
            history.push(cost);
            a = jac.transpose() * &jac;
            g = jac.transpose() * &r;
            for i in 0..n {
                scale[i] = scale[i].max(a[(i, i)]);
            }
            mu *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
            nu = 2.0;
            if reduction <= settings.ftol * cost && predicted <= settings.ftol * cost {
                converged = true;
                break;
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() {
                break;
            }
        }
    }
    Some(LmOutcome {
        x: x.as_slice().to_vec(),
        cost,
        iterations,
        converged,
        gradient_norm: scaled_gradient(&g, &a, cost),
        history,
    })
}

/// `max_i |g_i| / (‖J_i‖ ‖r‖)`; invariant under rescaling of residuals and parameters.
fn scaled_gradient(g: &DVector<f64>, a: &DMatrix<f64>, cost: f64) -> f64 {
    let rnorm = (2.0 * cost).sqrt();
    (0..g.len()).filter(|&i| a[(i, i)] > 0.0).map(|i| g[i].abs() / (a[(i, i)].sqrt() * rnorm)).fold(0.0, f64::max)
}
