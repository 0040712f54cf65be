//! Physical constants and the unit convention used throughout the crate.
//!
//! Frequencies are angular frequencies in rad/ps and times are in ps.
//! Energies are carried as `E/ħ` in rad/ps, so `ħ = 1` in every formula and
//! the reorganization energy `λ` is numerically `λ/ħ`. Conversions to
//! wavenumbers (cm⁻¹) are always explicit.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact SI derived value).
pub const HBAR_J_S: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;
/// Speed of light in vacuum, cm/s (exact).
pub const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;

const PS_PER_S: f64 = 1e12;

/// `k_B/ħ` in rad/ps per kelvin.
pub fn kb_over_hbar() -> f64 {
    BOLTZMANN_J_PER_K / HBAR_J_S / PS_PER_S
}

/// Angular frequency (rad/ps) corresponding to one wavenumber (1 cm⁻¹).
pub fn radps_per_wavenumber() -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_S / PS_PER_S
}

pub fn wavenumber_to_radps(wavenumber: f64) -> f64 {
    wavenumber * radps_per_wavenumber()
}

pub fn radps_to_wavenumber(omega: f64) -> f64 {
    omega / radps_per_wavenumber()
}

/// Thermodynamic context of a calculation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalContext {
    temperature_k: f64,
}

impl PhysicalContext {
    /// `temperature_k = 0` is accepted; routines that need a finite `β`
    /// reject it themselves.
    pub fn new(temperature_k: f64) -> Result<Self> {
        if !temperature_k.is_finite() || temperature_k < 0.0 {
            return Err(domain(format!("temperature must be finite and >= 0 K, got {temperature_k}")));
        }
        Ok(Self { temperature_k })
    }

    /// Context whose thermal energy equals `kt` (rad/ps).
    pub fn from_thermal_energy(kt: f64) -> Result<Self> {
        Self::new(kt / kb_over_hbar())
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    /// `k_B T/ħ` in rad/ps.
    pub fn thermal_energy(&self) -> f64 {
        self.temperature_k * kb_over_hbar()
    }

    /// `ħβ = ħ/(k_B T)` in ps. Fails at zero temperature.
    pub fn hbar_beta(&self) -> Result<f64> {
        self.require_positive()?;
        Ok(1.0 / self.thermal_energy())
    }

    pub fn require_positive(&self) -> Result<()> {
        if self.temperature_k > 0.0 {
            Ok(())
        } else {
            Err(domain("a strictly positive temperature is required"))
        }
    }
}
