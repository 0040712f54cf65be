//! Registry of published Stokes-shift parameter sets.
//!
//! Values are stored verbatim with frequencies read as rad/ps. Fits of the
//! normalized response fix only `ω_c` and `s`; the coupling prefactor of
//! those entries defaults to `δ_s = 1`, `ω_ph = ω_c` and is flagged as
//! unconstrained by data.

use serde::{Deserialize, Serialize};

use crate::density::{subohmic_stokes, GaussBiexpParams, SubOhmicParams};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PresetModel {
    Subohmic {
        omega_c: f64,
        s: f64,
        delta_s: f64,
        omega_ph: f64,
        prefactor_unconstrained: bool,
    },
    /// `[S(t) + b0]/(1 + b0)`. The source quotes `b0` in cm⁻¹, which cannot
    /// enter that expression; `b0` stays empty until a dimensionless value is
    /// supplied.
    SubohmicBaseline {
        omega_c: f64,
        s: f64,
        delta_s: f64,
        omega_ph: f64,
        prefactor_unconstrained: bool,
        b0_quoted_wavenumber: f64,
        b0: Option<f64>,
    },
    GaussBiexp {
        a_g: f64,
        omega_d: f64,
        a_1: f64,
        tau_1: f64,
        a_2: f64,
        tau_2: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetEntry {
    pub name: String,
    pub system: String,
    pub model: PresetModel,
    pub provenance: String,
    pub notes: Vec<String>,
}

impl PresetEntry {
    /// Sub-Ohmic parameters of the two sub-Ohmic kinds.
    pub fn subohmic(&self) -> Option<SubOhmicParams> {
        match self.model {
            PresetModel::Subohmic { omega_c, s, delta_s, omega_ph, .. }
            | PresetModel::SubohmicBaseline { omega_c, s, delta_s, omega_ph, .. } => {
                SubOhmicParams::new(delta_s, omega_ph, omega_c, s).ok()
            }
            PresetModel::GaussBiexp { .. } => None,
        }
    }

    pub fn gauss_biexp(&self) -> Option<GaussBiexpParams> {
        match self.model {
            PresetModel::GaussBiexp { a_g, omega_d, a_1, tau_1, a_2, tau_2 } => {
                GaussBiexpParams::new(a_g, omega_d, a_1, tau_1, a_2, tau_2).ok()
            }
            _ => None,
        }
    }

    /// The stored dimensionless baseline, or `None` for entries without one.
    pub fn baseline(&self) -> Option<Option<f64>> {
        match self.model {
            PresetModel::SubohmicBaseline { b0, .. } => Some(b0),
            _ => None,
        }
    }

    /// `S(t)` of the entry. Baseline entries need a dimensionless `b0`,
    /// taken from `b0_override` first and the stored value second.
    pub fn stokes(&self, t: f64, b0_override: Option<f64>) -> Result<f64> {
        match &self.model {
            PresetModel::Subohmic { omega_c, s, .. } => {
                if t < 0.0 || !t.is_finite() {
                    return Err(domain(format!("t must be finite and >= 0, got {t}")));
                }
                Ok(subohmic_stokes(*omega_c, *s, t))
            }
            PresetModel::SubohmicBaseline { b0, .. } => {
                let b0 = b0_override.or(*b0).ok_or_else(|| {
                    Error::Precondition(format!(
                        "preset '{}' quotes b0 only in cm^-1; supply a dimensionless b0",
                        self.name
                    ))
                })?;
                self.subohmic().expect("registry entries are valid").stokes_with_baseline(b0, t)
            }
            PresetModel::GaussBiexp { .. } => self.gauss_biexp().expect("registry entries are valid").stokes(t),
        }
    }
}

const FITTED_PREFACTOR: &str =
    "delta_s and omega_ph are not fixed by the normalized response; defaults delta_s = 1, omega_ph = omega_c";

fn subohmic(name: &str, system: &str, omega_c: f64, s: f64, provenance: &str) -> PresetEntry {
    PresetEntry {
        name: name.into(),
        system: system.into(),
        model: PresetModel::Subohmic { omega_c, s, delta_s: 1.0, omega_ph: omega_c, prefactor_unconstrained: true },
        provenance: provenance.into(),
        notes: vec![FITTED_PREFACTOR.into()],
    }
}

fn mplum(name: &str, ph: &str, omega_c: f64, s: f64, b0_wavenumber: f64) -> PresetEntry {
    PresetEntry {
        name: name.into(),
        system: format!("mPlum (GFP variant), pH {ph}"),
        model: PresetModel::SubohmicBaseline {
            omega_c,
            s,
            delta_s: 1.0,
            omega_ph: omega_c,
            prefactor_unconstrained: true,
            b0_quoted_wavenumber: b0_wavenumber,
            b0: None,
        },
        provenance: format!("sub-Ohmic fit with baseline to the mPlum dynamic Stokes shift at pH {ph}"),
        notes: vec![
            FITTED_PREFACTOR.into(),
            "b0 is quoted in cm^-1 but enters [S + b0]/(1 + b0) as a pure number; no dimensionless value is stored"
                .into(),
        ],
    }
}

/// All registry entries in a fixed order.
pub fn registry() -> Vec<PresetEntry> {
    let rhodopsin = |nm: u32, omega_c: f64, s: f64| {
        subohmic(
            &format!("rhodopsin-{nm}nm"),
            &format!("bovine rhodopsin, {nm} nm excitation"),
            omega_c,
            s,
            &format!("sub-Ohmic fit to the bovine rhodopsin dynamic Stokes shift at {nm} nm"),
        )
    };
    let gb1 = |site: &str, label: &str, omega_c: f64, s: f64| {
        subohmic(
            &format!("gb1-{site}"),
            &format!("protein GB1, Aladan probe at {label}"),
            omega_c,
            s,
            &format!("sub-Ohmic fit to the Aladan fluorescence Stokes shift of GB1 at {label}"),
        )
    };
    vec![
        PresetEntry {
            name: "coumarin343-gb".into(),
            system: "coumarin 343 in water".into(),
            model: PresetModel::GaussBiexp {
                a_g: 0.48,
                omega_d: 38.5,
                a_1: 0.20,
                tau_1: 0.126,
                a_2: 0.35,
                tau_2: 0.880,
            },
            provenance: "Gaussian plus biexponential representation of the measured coumarin 343 response in water"
                .into(),
            notes: vec![
                "amplitudes sum to 1.03, so S(0) = 1.03".into(),
                "omega_d is quoted in ps^-1; it multiplies t^2 and is used as ps^-2".into(),
            ],
        },
        subohmic(
            "coumarin343-subohmic",
            "coumarin 343 in water",
            6.25846,
            0.785158,
            "sub-Ohmic fit to the Gaussian plus biexponential coumarin 343 response",
        ),
        gb1("phe30", "Phe30", 1.59407, 0.003447),
        gb1("leu7", "Leu7", 5.8407, 0.00433494),
        gb1("trp43", "Trp43", 2.32145, 0.00735004),
        rhodopsin(530, 14.661, 0.736),
        rhodopsin(580, 17.878, 0.554),
        rhodopsin(630, 7.926, 0.489),
        rhodopsin(680, 5.677, 0.529),
        rhodopsin(730, 5.382, 0.594),
        rhodopsin(780, 7.985, 0.643),
        mplum("mplum-ph7", "7", 143.90, 0.467, 17.493e3),
        mplum("mplum-ph11", "11", 202.04, 0.5296, 22.722e3),
        subohmic(
            "mrfp",
            "mRFP (GFP variant), pH 7 buffer",
            0.1995,
            0.0011,
            "sub-Ohmic fit to the mRFP dynamic Stokes shift, no baseline",
        ),
        subohmic(
            "mraspberry",
            "mRaspberry (GFP variant), pH 7 buffer",
            0.1967,
            0.0011,
            "sub-Ohmic fit to the mRaspberry dynamic Stokes shift, no baseline",
        ),
    ]
}

pub fn names() -> Vec<String> {
    registry().into_iter().map(|p| p.name).collect()
}

pub fn find(name: &str) -> Result<PresetEntry> {
    registry()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset { name: name.into(), available: names() })
}
