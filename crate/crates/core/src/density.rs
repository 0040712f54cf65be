//! Closed-form spectral-density models.
//!
//! [`SubOhmicParams`] is the three-parameter family
//! `J(ω) = 2 δ_s ω_ph^{1−s} ω^{s−2} e^{−ω/ω_c}` whose Stokes function
//! `S(t) = (1 + ω_c²t²)^{−s/2} cos(s·arctan ω_c t)` depends on only two time
//! scales. [`GaussBiexpParams`] is the empirical Gaussian plus two
//! exponentials description of a Stokes function and its implied density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Error, Result};
use crate::specfun::gamma_unchecked;

/// Spectral regime selected by the exponent `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SubOhmic,
    Ohmic,
    SuperOhmic,
}

/// Huang-Rhys factor, which only exists for `s > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HuangRhys {
    Finite(f64),
    /// The defining integral diverges at low frequency (`0 < s ≤ 1`;
    /// logarithmically at `s = 1`).
    InfraredDivergent,
}

impl std::fmt::Display for HuangRhys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HuangRhys::Finite(v) => write!(f, "Finite({v})"),
            HuangRhys::InfraredDivergent => write!(f, "InfraredDivergent"),
        }
    }
}

/// Parameters of the sub-Ohmic family (also valid in the Ohmic and
/// super-Ohmic regimes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSubOhmic")]
pub struct SubOhmicParams {
    delta_s: f64,
    omega_ph: f64,
    omega_c: f64,
    s: f64,
}

#[derive(Deserialize)]
struct RawSubOhmic {
    delta_s: f64,
    omega_ph: f64,
    omega_c: f64,
    s: f64,
}

impl TryFrom<RawSubOhmic> for SubOhmicParams {
    type Error = Error;
    fn try_from(raw: RawSubOhmic) -> Result<Self> {
        Self::new(raw.delta_s, raw.omega_ph, raw.omega_c, raw.s)
    }
}

impl SubOhmicParams {
    pub fn new(delta_s: f64, omega_ph: f64, omega_c: f64, s: f64) -> Result<Self> {
        for (name, v) in [("delta_s", delta_s), ("omega_ph", omega_ph), ("omega_c", omega_c), ("s", s)] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { delta_s, omega_ph, omega_c, s })
    }

    /// Parameters fixed only by the shape of `S(t)`: `δ_s = 1`, `ω_ph = ω_c`.
    /// The coupling prefactor is not constrained by Stokes-shift data.
    pub fn shape_only(omega_c: f64, s: f64) -> Result<Self> {
        Self::new(1.0, omega_c, omega_c, s)
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_s
    }
    pub fn omega_ph(&self) -> f64 {
        self.omega_ph
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn regime(&self) -> Regime {
        if self.s < 1.0 {
            Regime::SubOhmic
        } else if self.s == 1.0 {
            Regime::Ohmic
        } else {
            Regime::SuperOhmic
        }
    }

    /// `J(ω)` in 1/(rad/ps). Undefined at `ω ≤ 0`; integrate `ω J(ω)` instead.
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(domain(format!("spectral density requires omega > 0, got {omega}")));
        }
        Ok(self.prefactor() * omega.powf(self.s - 2.0) * (-omega / self.omega_c).exp())
    }

    /// `2 δ_s ω_ph^{1−s}`
    fn prefactor(&self) -> f64 {
        2.0 * self.delta_s * self.omega_ph.powf(1.0 - self.s)
    }

    /// `K(ω) = ω J(ω)`, the singularity-free object that is integrated.
    pub fn k_value(&self, omega: f64) -> f64 {
        omega.powf(self.k_exponent()) * self.k_regular(omega)
    }

    /// Exponent `α = s − 1` of the low-frequency behaviour `K(ω) ~ ω^α`.
    pub(crate) fn k_exponent(&self) -> f64 {
        self.s - 1.0
    }

    /// `K(ω) / ω^{s−1}`, finite at `ω = 0`.
    pub(crate) fn k_regular(&self, omega: f64) -> f64 {
        self.prefactor() * (-omega / self.omega_c).exp()
    }

    /// Frequency beyond which `K` is below `e^{−60}` of its scale.
    pub(crate) fn integration_cutoff(&self) -> f64 {
        (60.0 + 2.0 * self.s) * self.omega_c
    }

    /// Normalized Stokes-shift response `S(t)`; independent of `δ_s` and `ω_ph`.
    pub fn stokes(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(subohmic_stokes(self.omega_c, self.s, t))
    }

    /// Short-time expansion `1 − s(1+s)(ω_c t)²/2`.
    pub fn stokes_short_time(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let x = self.omega_c * t;
        Ok(1.0 - 0.5 * self.s * (1.0 + self.s) * x * x)
    }

    /// Long-time law `cos(πs/2) (ω_c t)^{−s}`, valid for `ω_c t ≥ 1` only.
    pub fn stokes_long_time(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let x = self.omega_c * t;
        if x < 1.0 {
            return Err(Error::Precondition(format!("long-time law needs omega_c * t >= 1, got {x}")));
        }
        Ok((0.5 * PI * self.s).cos() * x.powf(-self.s))
    }

    /// `S_b0(t) = [S(t) + b0] / (1 + b0)` with a dimensionless baseline.
    pub fn stokes_with_baseline(&self, b0: f64, t: f64) -> Result<f64> {
        ensure_finite("b0", b0)?;
        if b0 == -1.0 {
            return Err(domain("baseline b0 = -1 makes S_b0 undefined"));
        }
        Ok((self.stokes(t)? + b0) / (1.0 + b0))
    }

    /// Reorganization energy `λ/ħ = 2 δ_s Γ(s) (ω_c/ω_ph)^{s−1} ω_c` in rad/ps.
    pub fn reorganization_energy(&self) -> f64 {
        2.0 * self.delta_s * gamma_unchecked(self.s) * (self.omega_c / self.omega_ph).powf(self.s - 1.0) * self.omega_c
    }

    /// `2 δ_s Γ(s−1) (ω_c/ω_ph)^{s−1}` for `s > 1`, divergent otherwise.
    pub fn huang_rhys(&self) -> HuangRhys {
        if self.s <= 1.0 {
            HuangRhys::InfraredDivergent
        } else {
            HuangRhys::Finite(
                2.0 * self.delta_s * gamma_unchecked(self.s - 1.0) * (self.omega_c / self.omega_ph).powf(self.s - 1.0),
            )
        }
    }
}

pub(crate) fn subohmic_stokes(omega_c: f64, s: f64, t: f64) -> f64 {
    let x = omega_c * t;
    (1.0 + x * x).powf(-0.5 * s) * (s * x.atan()).cos()
}

/// `(S, ∂S/∂ω_c, ∂S/∂s)` of the sub-Ohmic Stokes function.
pub(crate) fn subohmic_stokes_derivatives(omega_c: f64, s: f64, t: f64) -> (f64, f64, f64) {
    let x = omega_c * t;
    let r = 1.0 + x * x;
    let theta = x.atan();
    let envelope = r.powf(-0.5 * s);
    let (sin, cos) = (s * theta).sin_cos();
    let value = envelope * cos;
    let d_x = -s * envelope / r * (x * cos + sin);
    let d_s = -0.5 * r.ln() * value - theta * envelope * sin;
    (value, t * d_x, d_s)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("time must be finite and >= 0, got {t}")))
    }
}

/// Gaussian plus biexponential Stokes function
/// `a_g e^{−ω_d t²/2} + a_1 e^{−t/τ_1} + a_2 e^{−t/τ_2}`.
///
/// `omega_d` is stored in 1/ps², the only reading under which `ω_d t²` is
/// dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussBiexp")]
pub struct GaussBiexpParams {
    a_g: f64,
    omega_d: f64,
    a_1: f64,
    tau_1: f64,
    a_2: f64,
    tau_2: f64,
}

#[derive(Deserialize)]
struct RawGaussBiexp {
    a_g: f64,
    omega_d: f64,
    a_1: f64,
    tau_1: f64,
    a_2: f64,
    tau_2: f64,
}

impl TryFrom<RawGaussBiexp> for GaussBiexpParams {
    type Error = Error;
    fn try_from(r: RawGaussBiexp) -> Result<Self> {
        Self::new(r.a_g, r.omega_d, r.a_1, r.tau_1, r.a_2, r.tau_2)
    }
}

/// Tolerance on `a_g + a_1 + a_2 = 1` for normalized models.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

impl GaussBiexpParams {
    pub fn new(a_g: f64, omega_d: f64, a_1: f64, tau_1: f64, a_2: f64, tau_2: f64) -> Result<Self> {
        for (name, v) in [("a_g", a_g), ("a_1", a_1), ("a_2", a_2)] {
            ensure_finite(name, v)?;
            if v < 0.0 {
                return Err(domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("omega_d", omega_d), ("tau_1", tau_1), ("tau_2", tau_2)] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(domain(format!("{name} must be > 0, got {v}")));
            }
        }
        let p = Self { a_g, omega_d, a_1, tau_1, a_2, tau_2 };
        if !p.is_normalized() {
            log::warn!("amplitudes sum to {} (S(0) != 1); the model is not normalized", p.amplitude_sum());
        }
        Ok(p)
    }

    /// Like [`new`](Self::new) but requires `a_g + a_1 + a_2 = 1`.
    pub fn normalized(a_g: f64, omega_d: f64, a_1: f64, tau_1: f64, a_2: f64, tau_2: f64) -> Result<Self> {
        let p = Self::new(a_g, omega_d, a_1, tau_1, a_2, tau_2)?;
        if !p.is_normalized() {
            return Err(domain(format!("amplitudes sum to {}, expected 1", p.amplitude_sum())));
        }
        Ok(p)
    }

    pub fn a_g(&self) -> f64 {
        self.a_g
    }
    pub fn omega_d(&self) -> f64 {
        self.omega_d
    }
    pub fn a_1(&self) -> f64 {
        self.a_1
    }
    pub fn tau_1(&self) -> f64 {
        self.tau_1
    }
    pub fn a_2(&self) -> f64 {
        self.a_2
    }
    pub fn tau_2(&self) -> f64 {
        self.tau_2
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a_g, self.omega_d, self.a_1, self.tau_1, self.a_2, self.tau_2]
    }

    pub fn amplitude_sum(&self) -> f64 {
        self.a_g + self.a_1 + self.a_2
    }

    pub fn is_normalized(&self) -> bool {
        (self.amplitude_sum() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub fn stokes(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.a_g * (-0.5 * self.omega_d * t * t).exp()
            + self.a_1 * (-t / self.tau_1).exp()
            + self.a_2 * (-t / self.tau_2).exp())
    }

    /// The implied density up to a constant factor:
    /// `√(1/2πω_d) (a_g/ω) e^{−ω²/2ω_d} + Σ_i a_i τ_i / [π ω (1 + τ_i² ω²)]`.
    pub fn density_shape(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(domain(format!("spectral density requires omega > 0, got {omega}")));
        }
        Ok(self.k_shape(omega) / omega)
    }

    /// `ω` times [`density_shape`](Self::density_shape); finite at `ω = 0`.
    pub fn k_shape(&self, omega: f64) -> f64 {
        let gauss = (1.0 / (2.0 * PI * self.omega_d)).sqrt() * self.a_g * (-omega * omega / (2.0 * self.omega_d)).exp();
        let lorentz = |a: f64, tau: f64| a * tau / (PI * (1.0 + tau * tau * omega * omega));
        gauss + lorentz(self.a_1, self.tau_1) + lorentz(self.a_2, self.tau_2)
    }

    /// `J(ω)` scaled so that `∫ ω J dω = λ` (energies as `E/ħ`).
    ///
    /// The shape integrates to `S(0)/2`, hence the factor `2λ/S(0)`.
    pub fn spectral_density(&self, omega: f64, lambda: f64) -> Result<f64> {
        Ok(2.0 * lambda / self.amplitude_sum() * self.density_shape(omega)?)
    }
}
