//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specdens::lineshape::{classical_regression_check, fdt_bracket, g_numeric, g_subohmic_closed};
use specdens::presets::{registry, PresetModel};
use specdens::specfun::{gamma, hurwitz_zeta};
use specdens::transforms::{fit_tail, forward_stokes_subohmic, invert_density, linear_grid, log_grid};
use specdens::{
    fit_subohmic, fit_subohmic_baseline, FitOptions, HuangRhys, PhysicalContext, SampledResponse, SubOhmicParams,
    TailFamily,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sampled(ts: Vec<f64>, f: impl Fn(f64) -> f64) -> SampledResponse {
    let vs = ts.iter().map(|&t| f(t)).collect();
    SampledResponse::new(ts, vs, None, "acceptance").unwrap()
}

fn closed_form_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let wc = 10f64.powf(rng.random_range(-0.5..1.7));
        let s = rng.random_range(0.05..2.0);
        let p = SubOhmicParams::new(rng.random_range(0.05..2.0), rng.random_range(0.5..5.0), wc, s).unwrap();
        let ts = linear_grid(0.0, 20.0 / wc, 101);
        let fw = forward_stokes_subohmic(&p, &ts).map_err(|e| e.to_string())?;
        for (&t, v) in ts.iter().zip(&fw.values) {
            let err = (v - p.stokes(t).unwrap()).abs();
            worst = worst.max(err);
            check(err <= 1e-6, || format!("ω_c={wc} s={s} t={t}: error {err:e}"))?;
        }
    }
    Ok(format!("max abs error {worst:.1e} over 20 draws"))
}

fn inversion_fidelity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (wc, s) in [(6.25846, 0.785158), (1.0, 0.3), (50.0, 0.6)] {
        let p = SubOhmicParams::shape_only(wc, s).unwrap();
        let n = 3000;
        let ts = (0..n).map(|i| 20.0 / wc * (i as f64 / (n - 1) as f64).powi(2)).collect();
        let data = sampled(ts, |t| p.stokes(t).unwrap());
        let tail = fit_tail(&data, TailFamily::Algebraic).map_err(|e| e.to_string())?;
        let mut omegas = log_grid(1e-5 * wc, 0.1 * wc, 200);
        omegas.pop();
        omegas.extend(linear_grid(0.1 * wc, 30.0 * wc, 1496));
        let j = invert_density(&data, p.reorganization_energy(), &omegas, &tail).map_err(|e| e.to_string())?;
        for (&w, &k) in j.omegas().iter().zip(j.k_values()) {
            if (0.1 * wc..=5.0 * wc).contains(&w) {
                let want = p.k_value(w);
                let rel = (k - want).abs() / want;
                worst = worst.max(rel);
                check(rel <= 0.01, || format!("ω_c={wc} s={s} ω={w}: relative error {rel:e}"))?;
            }
        }
    }
    Ok(format!("max relative error {worst:.1e} on [0.1, 5] ω_c, 3 parameter sets"))
}

fn coumarin_fit() -> Outcome {
    let preset = registry().into_iter().find(|p| p.name == "coumarin343-gb").unwrap();
    let data = sampled(linear_grid(0.0, 3.0, 200), |t| preset.stokes(t, None).unwrap());
    let fit = fit_subohmic(&data, &FitOptions::default()).map_err(|e| e.to_string())?;
    let (wc, s) = (fit.param("omega_c").unwrap(), fit.param("s").unwrap());
    let (dwc, ds) = (wc / 6.25846 - 1.0, s / 0.785158 - 1.0);
    check(dwc.abs() <= 0.05 && ds.abs() <= 0.05, || format!("ω_c={wc} ({dwc:+.3}) s={s} ({ds:+.3})"))?;
    Ok(format!("ω_c={wc:.5} ({:+.1}%), s={s:.5} ({:+.1}%)", 100.0 * dwc, 100.0 * ds))
}

fn self_fit_recovery() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for preset in registry() {
        let (wc, s, b0) = match preset.model {
            PresetModel::Subohmic { omega_c, s, .. } => (omega_c, s, None),
            PresetModel::SubohmicBaseline { omega_c, s, .. } => (omega_c, s, Some(0.5)),
            PresetModel::GaussBiexp { .. } => continue,
        };
        count += 1;
        let data = sampled(linear_grid(0.0, 20.0 / wc, 200), |t| preset.stokes(t, b0).unwrap());
        let opts = FitOptions::default();
        let fit = match b0 {
            None => fit_subohmic(&data, &opts),
            Some(_) => fit_subohmic_baseline(&data, &opts),
        }
        .map_err(|e| format!("{}: {e}", preset.name))?;
        let mut pairs = vec![("omega_c", wc), ("s", s)];
        if let Some(b) = b0 {
            pairs.push(("b0", b));
        }
        for (name, want) in pairs {
            let got = fit.param(name).unwrap();
            let rel = (got / want - 1.0).abs();
            worst = worst.max(rel);
            check(rel <= 1e-3, || format!("{}: {name} = {got}, generator {want}", preset.name))?;
        }
    }
    check(count == 14, || format!("{count} sub-Ohmic presets, expected 14"))?;
    Ok(format!("{count} presets, max relative error {worst:.1e}"))
}

fn lineshape_cross_validation() -> Outcome {
    let ts = linear_grid(0.0, 2.0, 21);
    let mut worst: f64 = 0.0;
    for s in [0.25, 0.5, 0.75] {
        for wc in [1.0, 6.25846, 25.0] {
            for temp in [77.0, 300.0, 1000.0] {
                let p = SubOhmicParams::new(0.3, 2.0, wc, s).unwrap();
                let ctx = PhysicalContext::new(temp).unwrap();
                let a = g_subohmic_closed(&p, &ctx, &ts).map_err(|e| e.to_string())?;
                let b = g_numeric(&p, &ctx, &ts).map_err(|e| e.to_string())?;
                for ((&t, x), y) in ts.iter().zip(&a.values).zip(&b.values) {
                    if t == 0.0 {
                        check(*x == Complex64::new(0.0, 0.0) && *y == Complex64::new(0.0, 0.0), || "g(0) != 0".into())?;
                        continue;
                    }
                    let rel = (x - y).norm() / x.norm();
                    worst = worst.max(rel);
                    check(rel <= 1e-6, || format!("s={s} ω_c={wc} T={temp} t={t}: {x} vs {y}"))?;
                }
            }
        }
    }
    Ok(format!("27 parameter sets, max relative difference {worst:.1e}"))
}

fn stokes_identity() -> Outcome {
    let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
    let ctx = PhysicalContext::new(300.0).unwrap();
    let lambda = p.reorganization_energy();
    let h = 2e-4;
    let mut worst: f64 = 0.0;
    for t in linear_grid(0.05, 2.0, 14) {
        let g = g_numeric(&p, &ctx, &[t - h, t + h]).map_err(|e| e.to_string())?;
        let derivative = (g.values[1].im - g.values[0].im) / (2.0 * h);
        let err = (derivative - lambda * (p.stokes(t).unwrap() - 1.0)).abs();
        worst = worst.max(err);
        check(err <= 1e-5, || format!("t={t}: error {err:e}"))?;
    }
    Ok(format!("max abs error {worst:.1e}"))
}

fn huang_rhys_classification() -> Outcome {
    let mut worst: f64 = 0.0;
    for (delta, wph, wc, s) in
        [(0.3, 1.0, 5.0, 1.5), (1.0, 2.0, 0.7, 2.0), (0.05, 10.0, 30.0, 2.5), (2.0, 0.5, 3.0, 3.7)]
    {
        let p = SubOhmicParams::new(delta, wph, wc, s).unwrap();
        let HuangRhys::Finite(hr) = p.huang_rhys() else {
            return Err(format!("s={s} classified as divergent"));
        };
        let closed = 2.0 * delta * gamma(s - 1.0).unwrap() * (wc / wph).powf(s - 1.0);
        // ∫ J dω with ω = ω_c e^y, trapezoid in y
        let dy = 2e-3;
        let quad: f64 = (0..=120_000)
            .map(|i| {
                let w = wc * (-200.0 + i as f64 * dy).exp();
                let weight = if i == 0 || i == 120_000 { 0.5 } else { 1.0 };
                weight * w * p.spectral_density(w).unwrap()
            })
            .sum::<f64>()
            * dy;
        for reference in [closed, quad] {
            let rel = (hr / reference - 1.0).abs();
            worst = worst.max(rel);
            check(rel <= 1e-8, || format!("s={s}: {hr} vs {reference}"))?;
        }
    }
    for s in [0.1, 0.5, 0.9, 1.0] {
        let p = SubOhmicParams::new(0.3, 1.0, 5.0, s).unwrap();
        check(p.huang_rhys() == HuangRhys::InfraredDivergent, || format!("s={s} not divergent"))?;
    }
    Ok(format!("finite cases within {worst:.1e}; s in {{0.1, 0.5, 0.9, 1.0}} divergent"))
}

fn special_functions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_zeta: f64 = 0.0;
    for _ in 0..1000 {
        let z = rng.random_range(-3.0..0.99);
        let q = Complex64::new(rng.random_range(0.1..50.0), rng.random_range(-1e4..1e4));
        let a = hurwitz_zeta(z, q).map_err(|e| e.to_string())?;
        let b = hurwitz_zeta(z, q + 1.0).map_err(|e| e.to_string())?;
        let rhs = q.powf(-z);
        let residual = (a - b - rhs).norm() / rhs.norm().max(a.norm());
        worst_zeta = worst_zeta.max(residual);
        check(residual < 1e-10, || format!("ζ({z}, {q}) recurrence residual {residual:e}"))?;
    }
    for q in
        [Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.0), Complex64::new(2.5, -7.0), Complex64::new(40.0, 300.0)]
    {
        let want = -0.5 * (q * q - q + 1.0 / 6.0);
        let got = hurwitz_zeta(-1.0, q).map_err(|e| e.to_string())?;
        check((got - want).norm() <= 1e-12 * want.norm().max(1.0), || format!("ζ(-1, {q}) = {got}, want {want}"))?;
    }
    let mut worst_gamma: f64 = 0.0;
    for _ in 0..1000 {
        let x: f64 = rng.random_range(0.01..20.0);
        let rel = (gamma(x + 1.0).unwrap() / (x * gamma(x).unwrap()) - 1.0).abs();
        worst_gamma = worst_gamma.max(rel);
        check(rel < 1e-12, || format!("Γ recurrence at {x}: {rel:e}"))?;
    }
    Ok(format!("zeta recurrence {worst_zeta:.1e}, gamma recurrence {worst_gamma:.1e}"))
}

fn fdt_limits() -> Outcome {
    let cold = PhysicalContext::new(0.0).unwrap();
    for w in [1e-3, 0.7, 13.0, 4e4] {
        check(fdt_bracket(w, &cold) == 0.5 * w, || format!("T=0 bracket at ω={w}"))?;
    }
    let hot = PhysicalContext::new(300.0).unwrap();
    let kt = hot.thermal_energy();
    let rel = (2.0 * fdt_bracket(1e-6 * kt, &hot) / (2.0 * kt) - 1.0).abs();
    check(rel <= 1e-5, || format!("classical limit off by {rel:e}"))?;
    let unit = fdt_bracket(kt, &hot) / kt;
    check((unit - 1.081_976_706_869_326_4).abs() < 1e-14, || format!("bracket at ħω = k_BT: {unit}"))?;
    Ok(format!("Nyquist limit within {rel:.1e}"))
}

fn classical_regression() -> Outcome {
    let p = SubOhmicParams::new(0.3, 1.0, 5.0, 0.5).unwrap();
    let ts = linear_grid(0.0, 10.0 / 5.0, 101);
    let base = PhysicalContext::from_thermal_energy(5.0).unwrap();
    let report = classical_regression_check(&p, &base, &ts).map_err(|e| e.to_string())?;
    let d = &report.deviations;
    check(report.monotone, || format!("deviations not decreasing: {d:?}"))?;
    check(d[2] < 1e-3, || format!("deviation {:e} at k_BT = 100 ħω_c", d[2]))?;
    Ok(format!("deviations {:.1e}, {:.1e}, {:.1e} at k_BT/ħω_c = 1, 10, 100", d[0], d[1], d[2]))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form consistency of the forward transform", closed_form_consistency, Some(10)),
        ("inversion fidelity with algebraic tail", inversion_fidelity, Some(10)),
        ("coumarin sub-Ohmic fit reproduction", coumarin_fit, Some(5)),
        ("self-fit recovery of the 14 sub-Ohmic presets", self_fit_recovery, Some(30)),
        ("line-shape closed form versus quadrature", lineshape_cross_validation, Some(60)),
        ("Stokes identity inside g", stokes_identity, None),
        ("Huang-Rhys classification", huang_rhys_classification, None),
        ("special functions", special_functions, None),
        ("FDT limits", fdt_limits, None),
        ("classical regression", classical_regression, None),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(secs)) if elapsed > Duration::from_secs(*secs) => {
                Err(format!("took {:.2} s, limit {secs} s", elapsed.as_secs_f64()))
            }
            (other, _) => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why} [{:.2} s]", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
