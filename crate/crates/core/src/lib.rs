//! Spectral densities from fluorescence Stokes-shift response functions.
//!
//! The crate connects a measured, normalized Stokes-shift response `S(t)` with
//! the spectral density `J(ω)` of the solvent/protein environment through
//! the cosine-transform pair
//!
//! ```text
//! S(t) = (1/λ) ∫₀^∞ dω ω J(ω) cos ωt,      ω J(ω) = (2λ/π) ∫₀^∞ dt S(t) cos ωt,
//! ```
//!
//! and provides the three-parameter sub-Ohmic family
//! `J(ω) = 2 δ_s ω_ph^{1−s} ω^{s−2} e^{−ω/ω_c}` together with the downstream
//! quantities built from it: reorganization energy, Huang-Rhys factor,
//! line-shape function, optical spectra and the quantum noise spectrum.
//!
//! Units: see [`units`]. Frequencies are rad/ps, times ps, energies `E/ħ`.
//!
//! Modules:
//! - [`density`]: closed-form sub-Ohmic and Gaussian+biexponential models.
//! - [`specfun`]: gamma and Hurwitz zeta functions.
//! - [`transforms`]: forward `J → S` and inverse `S → J` transforms on sampled data.
//! - [`fitting`]: bounded Levenberg-Marquardt fits of the response models.
//! - [`lineshape`]: line-shape function, spectra, noise spectrum, classical limit.
//! - [`presets`]: published parameter sets.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod fitting;
pub mod lineshape;
mod lm;
pub mod presets;
pub(crate) mod quad;
pub mod specfun;
pub mod transforms;
pub mod units;

pub use density::{GaussBiexpParams, HuangRhys, Regime, SubOhmicParams};
pub use error::{Error, Result};
pub use fitting::{
    compare_models, fit_gauss_biexp, fit_model, fit_subohmic, fit_subohmic_baseline, FitOptions, FitResult,
    ModelComparison, ModelKind,
};
pub use lineshape::{LineShapeSeries, Spectrum, SpectrumKind};
pub use presets::{PresetEntry, PresetModel};
pub use transforms::{SampledResponse, TabulatedSpectralFunction, TailFamily, TailKind, TailModel};
pub use units::PhysicalContext;

/// Map over a slice, in parallel when the `parallel` feature is enabled.
/// Output order always follows input order.
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
