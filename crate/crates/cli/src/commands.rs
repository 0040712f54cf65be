//! Implementation of the subcommands.

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Map, Value};

use specdens::lineshape::{g_numeric, g_numeric_tabulated, g_subohmic_closed, spectrum_from_g};
use specdens::presets::{self, PresetEntry, PresetModel};
use specdens::transforms::{fit_tail, forward_stokes, forward_stokes_subohmic, invert_density, linear_grid, log_grid};
use specdens::{
    compare_models, fit_model, FitOptions, FitResult, GaussBiexpParams, HuangRhys, LineShapeSeries, PhysicalContext,
    SubOhmicParams, TabulatedSpectralFunction,
};

use crate::args::{Command, FitArgs, Method, ModelArgs, ModelChoice, OmegaArgs, Spacing};
use crate::error::{CliError, CliResult};
use crate::io::{emit, format_csv, ingest_csv, parse_table};
use crate::SCHEMA_VERSION;

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Presets { json, output } => presets_cmd(json, output.as_deref()),
        Command::Synth { model, tmax_ps, npoints, noise, seed, output } => {
            let text = synth(&resolve(&model)?, tmax_ps, npoints, noise, seed)?;
            emit(output.as_deref(), &text)
        }
        Command::Fit { input, model, fit, output } => {
            let data = ingest_csv(&input)?;
            let result = fit_model(model.into(), &data, &fit_options(&fit)?)?;
            emit(output.as_deref(), &pretty(&fit_document(data.label(), &result)))
        }
        Command::Invert { input, lambda, lambda_arb: _, tail, omega, output } => {
            let data = ingest_csv(&input)?;
            let lambda = lambda.unwrap_or(1.0);
            let t_max = data.t_max();
            let omegas = omega_grid(&omega, (0.01 / t_max, 100.0 / t_max), 400, true)?;
            let tail = fit_tail(&data, tail.into())?;
            let j = invert_density(&data, lambda, &omegas, &tail)?;
            let rows =
                j.omegas().iter().zip(j.k_values()).zip(j.j_values()).map(|((&w, &k), jv)| vec![Some(w), Some(k), jv]);
            emit(output.as_deref(), &format_csv(&["omega_radps", "K", "J"], rows))
        }
        Command::Forward { model, input, tmax_ps, npoints, output } => {
            let ts = time_grid(tmax_ps, npoints)?;
            let values = match input {
                Some(path) => forward_stokes(&read_density(&path)?, &ts)?.values,
                None => match resolve(&model)? {
                    Model::Subohmic { p, .. } => forward_stokes_subohmic(&p, &ts)?.values,
                    Model::GaussBiexp(g) => forward_stokes(&gauss_biexp_table(&g, tmax_ps)?, &ts)?.values,
                },
            };
            let rows = ts.iter().zip(&values).map(|(&t, &v)| vec![Some(t), Some(v)]);
            emit(output.as_deref(), &format_csv(&["t_ps", "S"], rows))
        }
        Command::Lineshape { model, input, temperature_k, tmax_ps, npoints, method, output } => {
            let ctx = PhysicalContext::new(temperature_k)?;
            let g = lineshape(&model, input.as_deref(), &ctx, &time_grid(tmax_ps, npoints)?, method)?;
            let rows = g.times.iter().zip(&g.values).map(|(&t, v)| vec![Some(t), Some(v.re), Some(v.im)]);
            emit(output.as_deref(), &format_csv(&["t_ps", "re_g", "im_g"], rows))
        }
        Command::Spectrum {
            model,
            input,
            temperature_k,
            tmax_ps,
            npoints,
            kind,
            omega_eg,
            omega,
            truncation_tol,
            output,
        } => {
            let ctx = PhysicalContext::new(temperature_k)?;
            let g = lineshape(&model, input.as_deref(), &ctx, &time_grid(tmax_ps, npoints)?, Method::Auto)?;
            let omegas = omega_grid(&omega, default_spectrum_window(&g, omega_eg), 1001, false)?;
            let spec = spectrum_from_g(&g, omega_eg, kind.into(), &omegas, truncation_tol)?;
            let rows = spec.omegas.iter().zip(&spec.values).map(|(&w, &v)| vec![Some(w), Some(v)]);
            emit(output.as_deref(), &format_csv(&["omega_radps", "intensity"], rows))
        }
        Command::Hr { model, json } => hr(&model, json),
        Command::Compare { input, fit, output } => {
            let data = ingest_csv(&input)?;
            let cmp = compare_models(&data, &fit_options(&fit)?)?;
            let entries: Vec<Value> = cmp
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "model": e.model,
                        "n_params": e.n_params,
                        "aicc": e.aicc,
                        "residual_rms": e.residual_rms,
                        "converged": e.fit.converged,
                        "boundary_active": e.boundary_active,
                        "near_boundary": e.near_boundary,
                        "params": named(&e.fit.param_names, &e.fit.params),
                    })
                })
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "input": data.label(),
                "best": cmp.best(),
                "best_by_residual": cmp.best_by_residual,
                "entries": entries,
            });
            emit(output.as_deref(), &pretty(&doc))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn named(names: &[String], values: &[f64]) -> Value {
    Value::Object(names.iter().zip(values).map(|(n, &v)| (n.clone(), json!(v))).collect::<Map<_, _>>())
}

/// JSON document for a fit; see the README for the schema.
pub fn fit_document(input: &str, r: &FitResult) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "input": input,
        "model": r.model,
        "params": named(&r.param_names, &r.params),
        "uncertainties": named(&r.param_names, &r.uncertainties),
        "residual_rms": r.residual_rms,
        "converged": r.converged,
        "window": r.window,
        "diagnostics": {
            "weighted_cost": r.weighted_cost,
            "iterations": r.iterations,
            "gradient_norm": r.gradient_norm,
            "boundary_active": r.boundary_active,
            "near_boundary": r.near_boundary,
            "ill_conditioned": r.ill_conditioned,
            "starts": r.starts,
            "converged_starts": r.converged_starts,
            "winning_start": r.winning_start,
            "n_points": r.n_points,
            "data_scale": r.data_scale,
            "warnings": r.warnings,
            "cost_history": r.cost_history,
        },
    })
}

fn fit_options(args: &FitArgs) -> CliResult<FitOptions> {
    let mut opts = match &args.options {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        }
        None => FitOptions::default(),
    };
    if let Some(w) = &args.window {
        opts.window = Some([w[0], w[1]]);
    }
    if args.constrain_amplitudes {
        opts.constrain_amplitudes = true;
    }
    if args.no_normalize {
        opts.normalize_initial = false;
    }
    if args.single_start {
        opts.multistart = false;
    }
    if let Some(n) = args.max_iterations {
        opts.max_iterations = n;
    }
    Ok(opts)
}

/// A resolved model.
#[derive(Debug, Clone)]
pub enum Model {
    Subohmic {
        p: SubOhmicParams,
        /// Baseline applied to `S(t)`.
        b0: Option<f64>,
        /// The model has a baseline term that still needs a value.
        needs_b0: bool,
    },
    GaussBiexp(GaussBiexpParams),
}

impl Model {
    pub fn stokes(&self, t: f64) -> CliResult<f64> {
        match self {
            Model::Subohmic { p, b0: Some(b0), .. } => Ok(p.stokes_with_baseline(*b0, t)?),
            Model::Subohmic { needs_b0: true, .. } => {
                Err(CliError::usage("this model has a baseline term; supply a dimensionless --b0"))
            }
            Model::Subohmic { p, .. } => Ok(p.stokes(t)?),
            Model::GaussBiexp(g) => Ok(g.stokes(t)?),
        }
    }

    fn subohmic(&self) -> CliResult<&SubOhmicParams> {
        match self {
            Model::Subohmic { p, .. } => Ok(p),
            Model::GaussBiexp(_) => {
                Err(CliError::usage("this command needs a sub-Ohmic model or a tabulated density (--input)"))
            }
        }
    }
}

pub fn resolve(args: &ModelArgs) -> CliResult<Model> {
    if let Some(name) = &args.preset {
        return from_preset(&presets::find(name)?, args);
    }
    let choice = args.model.ok_or_else(|| CliError::usage("give --preset NAME or --model with its parameters"))?;
    match choice {
        ModelChoice::GaussBiexp => {
            let v = args
                .gb
                .as_ref()
                .ok_or_else(|| CliError::usage("--model gauss-biexp needs --gb a_g,ω_d,a_1,τ_1,a_2,τ_2"))?;
            if args.omega_c.is_some() || args.s.is_some() || args.b0.is_some() {
                return Err(CliError::usage("--omega-c, --s and --b0 do not apply to gauss-biexp"));
            }
            Ok(Model::GaussBiexp(GaussBiexpParams::new(v[0], v[1], v[2], v[3], v[4], v[5])?))
        }
        ModelChoice::Subohmic | ModelChoice::SubohmicBaseline => {
            if args.gb.is_some() {
                return Err(CliError::usage("--gb applies only to --model gauss-biexp"));
            }
            let (Some(wc), Some(s)) = (args.omega_c, args.s) else {
                return Err(CliError::usage("sub-Ohmic models need --omega-c and --s"));
            };
            let needs_b0 = choice == ModelChoice::SubohmicBaseline;
            if !needs_b0 && args.b0.is_some() {
                return Err(CliError::usage("--b0 needs --model subohmic-baseline"));
            }
            let p = SubOhmicParams::new(args.delta_s.unwrap_or(1.0), args.omega_ph.unwrap_or(wc), wc, s)?;
            Ok(Model::Subohmic { p, b0: args.b0, needs_b0 })
        }
    }
}

fn from_preset(entry: &PresetEntry, args: &ModelArgs) -> CliResult<Model> {
    match &entry.model {
        PresetModel::GaussBiexp { .. } => {
            if args.b0.is_some() || args.delta_s.is_some() || args.omega_ph.is_some() {
                return Err(CliError::usage(format!("preset '{}' takes no --b0, --delta-s or --omega-ph", entry.name)));
            }
            Ok(Model::GaussBiexp(entry.gauss_biexp().expect("registry entries are valid")))
        }
        PresetModel::Subohmic { omega_c, s, delta_s, omega_ph, .. }
        | PresetModel::SubohmicBaseline { omega_c, s, delta_s, omega_ph, .. } => {
            let needs_b0 = entry.baseline().is_some();
            if !needs_b0 && args.b0.is_some() {
                return Err(CliError::usage(format!("preset '{}' has no baseline term", entry.name)));
            }
            let p = SubOhmicParams::new(
                args.delta_s.unwrap_or(*delta_s),
                args.omega_ph.unwrap_or(*omega_ph),
                *omega_c,
                *s,
            )?;
            let b0 = args.b0.or(entry.baseline().flatten());
            Ok(Model::Subohmic { p, b0, needs_b0 })
        }
    }
}

fn time_grid(tmax: f64, n: usize) -> CliResult<Vec<f64>> {
    if n < 2 {
        return Err(CliError::usage("--npoints must be at least 2"));
    }
    if !(tmax > 0.0 && tmax.is_finite()) {
        return Err(CliError::usage("--tmax-ps must be positive"));
    }
    Ok(linear_grid(0.0, tmax, n))
}

/// Frequencies from `--omega-min/--omega-max/--omega-points`, falling back
/// to the given range, count and spacing (`log` for logarithmic).
fn omega_grid(args: &OmegaArgs, range: (f64, f64), n_default: usize, log: bool) -> CliResult<Vec<f64>> {
    let (lo, hi) = match (args.omega_min, args.omega_max) {
        (None, None) => range,
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(CliError::usage("--omega-min and --omega-max go together")),
    };
    let n = args.omega_points.unwrap_or(n_default);
    let log = args.omega_spacing.map_or(log, |sp| sp == Spacing::Log);
    if !(hi > lo) || n < 2 {
        return Err(CliError::usage("need --omega-max > --omega-min and at least 2 --omega-points"));
    }
    if log {
        if !(lo > 0.0) {
            return Err(CliError::usage("--omega-min must be positive"));
        }
        Ok(log_grid(lo, hi, n))
    } else {
        Ok(linear_grid(lo, hi, n))
    }
}

/// Reads a tabulated density with columns `omega_radps,K[,J]`.
pub fn read_density(path: &Path) -> CliResult<TabulatedSpectralFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let table = parse_table(&text)?;
    if table.header.len() < 2 || table.header[0] != "omega_radps" || table.header[1] != "K" {
        return Err(CliError::input(format!(
            "line 1: expected header starting 'omega_radps,K', found '{}'",
            table.header.join(",")
        )));
    }
    let mut omegas = Vec::new();
    let mut ks = Vec::new();
    for (line, row) in &table.rows {
        match (row.first().copied().flatten(), row.get(1).copied().flatten()) {
            (Some(w), Some(k)) => {
                omegas.push(w);
                ks.push(k);
            }
            _ => return Err(CliError::input(format!("line {line}: omega_radps and K are required"))),
        }
    }
    let lambda = trapezoid(&omegas, &ks);
    Ok(TabulatedSpectralFunction::new(omegas, ks, lambda)?)
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Uniform frequency table of a Gauss-biexponential density, fine enough for
/// times up to `t_max`.
fn gauss_biexp_table(g: &GaussBiexpParams, t_max: f64) -> CliResult<TabulatedSpectralFunction> {
    let step = PI / (8.0 * t_max);
    let top = 1e4_f64.max(40.0 * g.omega_d().sqrt());
    let n = (top / step).ceil() as usize + 1;
    if n > 2_000_000 {
        return Err(CliError::usage("--tmax-ps is too long for the tabulated Gauss-biexponential transform"));
    }
    Ok(TabulatedSpectralFunction::from_gauss_biexp(g, linear_grid(step, top, n), 1.0)?)
}

fn lineshape(
    model: &ModelArgs,
    input: Option<&Path>,
    ctx: &PhysicalContext,
    ts: &[f64],
    method: Method,
) -> CliResult<LineShapeSeries> {
    if let Some(path) = input {
        if method == Method::Closed {
            return Err(CliError::usage("--method closed needs a sub-Ohmic model"));
        }
        return Ok(g_numeric_tabulated(&read_density(path)?, ctx, ts)?);
    }
    let resolved = resolve(model)?;
    let p = resolved.subohmic()?;
    let closed = match method {
        Method::Closed => true,
        Method::Numeric => false,
        Method::Auto => p.s() > 0.0 && p.s() < 1.0,
    };
    Ok(if closed { g_subohmic_closed(p, ctx, ts)? } else { g_numeric(p, ctx, ts)? })
}

/// Frequency window covering both the absorption and fluorescence lines.
fn default_spectrum_window(g: &LineShapeSeries, omega_eg: f64) -> (f64, f64) {
    let t1 = g.times[1];
    let width = (2.0 * g.values[1].re.max(0.0)).sqrt() / t1;
    let t_max = *g.times.last().unwrap();
    let pad = 8.0 * width + 40.0 / t_max;
    (omega_eg - 3.0 * g.lambda - pad, omega_eg + g.lambda + pad)
}

fn synth(model: &Model, tmax: f64, n: usize, noise: f64, seed: u64) -> CliResult<String> {
    let ts = time_grid(tmax, n)?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(CliError::usage("--noise must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise).map_err(|e| CliError::usage(e.to_string()))?;
    let mut rows = Vec::with_capacity(n);
    for &t in &ts {
        let clean = model.stokes(t)?;
        if noise > 0.0 {
            rows.push(vec![Some(t), Some(clean + normal.sample(&mut rng)), Some(noise)]);
        } else {
            rows.push(vec![Some(t), Some(clean)]);
        }
    }
    let header: &[&str] = if noise > 0.0 { &["t_ps", "S", "sigma"] } else { &["t_ps", "S"] };
    Ok(format_csv(header, rows))
}

fn presets_cmd(json: bool, output: Option<&Path>) -> CliResult<()> {
    let all = presets::registry();
    if json {
        let doc = json!({ "schema_version": SCHEMA_VERSION, "presets": all });
        return emit(output, &pretty(&doc));
    }
    let mut out = String::new();
    for p in &all {
        let params = match &p.model {
            PresetModel::Subohmic { omega_c, s, .. } => format!("subohmic omega_c={omega_c:?} rad/ps s={s:?}"),
            PresetModel::SubohmicBaseline { omega_c, s, b0_quoted_wavenumber, b0, .. } => format!(
                "subohmic-baseline omega_c={omega_c:?} rad/ps s={s:?} b0(quoted)={b0_quoted_wavenumber:?} cm^-1 b0={}",
                b0.map(|v| format!("{v:?}")).unwrap_or_else(|| "unset".into())
            ),
            PresetModel::GaussBiexp { a_g, omega_d, a_1, tau_1, a_2, tau_2 } => format!(
                "gauss-biexp a_g={a_g:?} omega_d={omega_d:?} a_1={a_1:?} tau_1={tau_1:?} ps a_2={a_2:?} tau_2={tau_2:?} ps"
            ),
        };
        out.push_str(&format!(
            "{}\n  system: {}\n  model: {params}\n  provenance: {}\n",
            p.name, p.system, p.provenance
        ));
        for note in &p.notes {
            out.push_str(&format!("  note: {note}\n"));
        }
    }
    emit(output, &out)
}

fn hr(model: &ModelArgs, json: bool) -> CliResult<()> {
    let resolved = resolve(model)?;
    let p = resolved.subohmic()?;
    let hr = p.huang_rhys();
    let text = if json {
        let (class, value) = match hr {
            HuangRhys::Finite(v) => ("finite", Some(v)),
            HuangRhys::InfraredDivergent => ("infrared-divergent", None),
        };
        pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "s": p.s(),
            "classification": class,
            "value": value,
            "reorganization_energy": p.reorganization_energy(),
        }))
    } else {
        match hr {
            HuangRhys::Finite(v) => format!("finite: {v:?} (s = {:?})\n", p.s()),
            HuangRhys::InfraredDivergent => format!("infrared-divergent (s = {:?} <= 1)\n", p.s()),
        }
    };
    emit(None, &text)
}
