//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string. The plain functions in [`demo`] do
//! the work and are tested natively; the `#[wasm_bindgen]` wrappers only
//! convert errors.

use wasm_bindgen::prelude::*;

pub mod demo {
    use serde::Serialize;
    use specdens::lineshape::{g_subohmic_closed, spectrum_from_g, DEFAULT_TRUNCATION_TOLERANCE};
    use specdens::presets::registry;
    use specdens::transforms::{fit_tail, invert_density, linear_grid, log_grid};
    use specdens::{PhysicalContext, SampledResponse, SpectrumKind, SubOhmicParams, TailFamily};

    type Out = Result<String, String>;

    fn to_json<T: Serialize>(v: &T) -> Out {
        serde_json::to_string(v).map_err(|e| e.to_string())
    }

    fn err(e: specdens::Error) -> String {
        e.to_string()
    }

    pub fn presets_json() -> Out {
        to_json(&registry())
    }

    #[derive(Serialize)]
    struct Curves {
        times: Vec<f64>,
        stokes: Vec<f64>,
        omegas: Vec<f64>,
        density: Vec<f64>,
        reorganization_energy: f64,
        huang_rhys: Option<f64>,
    }

    /// `S(t)` on `[0, t_max]` and `J(ω)` on `(0, ω_max]`, shape-only
    /// normalization (`δ_s = 1`, `ω_ph = ω_c`).
    pub fn curves(omega_c: f64, s: f64, b0: f64, t_max: f64, omega_max: f64, n: usize) -> Out {
        let p = SubOhmicParams::shape_only(omega_c, s).map_err(err)?;
        let n = n.clamp(2, 20_000);
        let times = linear_grid(0.0, t_max, n);
        let stokes =
            times.iter().map(|&t| p.stokes_with_baseline(b0, t)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let omegas = linear_grid(omega_max / n as f64, omega_max, n);
        let density = omegas.iter().map(|&w| p.spectral_density(w)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let huang_rhys = match p.huang_rhys() {
            specdens::HuangRhys::Finite(v) => Some(v),
            specdens::HuangRhys::InfraredDivergent => None,
        };
        to_json(&Curves {
            times,
            stokes,
            omegas,
            density,
            reorganization_energy: p.reorganization_energy(),
            huang_rhys,
        })
    }

    #[derive(Serialize)]
    struct Inversion {
        omegas: Vec<f64>,
        recovered: Vec<f64>,
        exact: Vec<f64>,
        tail: String,
        normalization_defect: f64,
    }

    /// Samples the sub-Ohmic `S(t)` on `[0, t_max]`, adds deterministic
    /// pseudo-random noise of amplitude `noise`, and inverts it with a fitted
    /// tail. Returns `K(ω) = ωJ(ω)` recovered and exact.
    pub fn inversion(omega_c: f64, s: f64, t_max: f64, noise: f64, seed: u64) -> Out {
        let p = SubOhmicParams::shape_only(omega_c, s).map_err(err)?;
        let n = 2000;
        let times: Vec<f64> = (0..n).map(|i| t_max * (i as f64 / (n - 1) as f64).powi(2)).collect();
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut uniform = move || {
            // xorshift64*, enough for a visual demo
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let values: Vec<f64> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| p.stokes(t).unwrap() + if i == 0 { 0.0 } else { 2.0 * noise * uniform() })
            .collect();
        let data = SampledResponse::new(times, values, None, "demo").map_err(err)?;
        let tail = fit_tail(&data, TailFamily::Auto).map_err(err)?;
        let mut omegas = log_grid(1e-3 * omega_c, 0.1 * omega_c, 60);
        omegas.pop();
        omegas.extend(linear_grid(0.1 * omega_c, 10.0 * omega_c, 400));
        let lambda = p.reorganization_energy();
        let j = invert_density(&data, lambda, &omegas, &tail).map_err(err)?;
        let exact = omegas.iter().map(|&w| p.k_value(w)).collect();
        to_json(&Inversion {
            recovered: j.k_values().to_vec(),
            omegas,
            exact,
            tail: serde_json::to_string(&tail.kind).map_err(|e| e.to_string())?,
            normalization_defect: j.normalization_defect(),
        })
    }

    #[derive(Serialize)]
    struct Spectra {
        omegas: Vec<f64>,
        absorption: Vec<f64>,
        fluorescence: Vec<f64>,
        reorganization_energy: f64,
    }

    /// Absorption and fluorescence lines about `ω_eg = 0` for `0 < s < 1`.
    pub fn spectra(omega_c: f64, s: f64, delta_s: f64, temperature_k: f64, t_max: f64) -> Out {
        let p = SubOhmicParams::new(delta_s, omega_c, omega_c, s).map_err(err)?;
        let ctx = PhysicalContext::new(temperature_k).map_err(err)?;
        let g = g_subohmic_closed(&p, &ctx, &linear_grid(0.0, t_max, 2001)).map_err(err)?;
        let lambda = p.reorganization_energy();
        let width = (2.0 * g.values[1].re).sqrt() / g.times[1];
        let pad = 8.0 * width + 40.0 / t_max;
        let omegas = linear_grid(-3.0 * lambda - pad, lambda + pad, 801);
        let abs =
            spectrum_from_g(&g, 0.0, SpectrumKind::Absorption, &omegas, DEFAULT_TRUNCATION_TOLERANCE).map_err(err)?;
        let flu =
            spectrum_from_g(&g, 0.0, SpectrumKind::Fluorescence, &omegas, DEFAULT_TRUNCATION_TOLERANCE).map_err(err)?;
        to_json(&Spectra { omegas, absorption: abs.values, fluorescence: flu.values, reorganization_energy: lambda })
    }
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn presets_json() -> Result<String, JsValue> {
    js(demo::presets_json())
}

#[wasm_bindgen]
pub fn curves(omega_c: f64, s: f64, b0: f64, t_max: f64, omega_max: f64, n: usize) -> Result<String, JsValue> {
    js(demo::curves(omega_c, s, b0, t_max, omega_max, n))
}

#[wasm_bindgen]
pub fn inversion(omega_c: f64, s: f64, t_max: f64, noise: f64, seed: u32) -> Result<String, JsValue> {
    js(demo::inversion(omega_c, s, t_max, noise, u64::from(seed)))
}

#[wasm_bindgen]
pub fn spectra(omega_c: f64, s: f64, delta_s: f64, temperature_k: f64, t_max: f64) -> Result<String, JsValue> {
    js(demo::spectra(omega_c, s, delta_s, temperature_k, t_max))
}
