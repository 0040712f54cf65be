//! Command-line surface.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "specdens", version, about = "Spectral densities from dynamic Stokes-shift data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the preset registry with provenance.
    Presets {
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample a model on a uniform time grid, optionally with Gaussian noise.
    Synth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "tmax-ps")]
        tmax_ps: f64,
        #[arg(long, default_value_t = 200)]
        npoints: usize,
        /// Standard deviation of the added noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a model to a response file and write the result as JSON.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelChoice::Subohmic)]
        model: ModelChoice,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recover K(ω) = ωJ(ω) from a response file.
    #[command(group(ArgGroup::new("scale").required(true).args(["lambda", "lambda_arb"])))]
    Invert {
        #[arg(long)]
        input: PathBuf,
        /// Reorganization energy λ/ħ in rad/ps.
        #[arg(long)]
        lambda: Option<f64>,
        /// Use λ = 1 and return the shape of J only.
        #[arg(long = "lambda-arb")]
        lambda_arb: bool,
        #[arg(long, value_enum, default_value_t = TailChoice::Auto)]
        tail: TailChoice,
        #[command(flatten)]
        omega: OmegaArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute S(t) from a model or a tabulated K(ω).
    Forward {
        #[command(flatten)]
        model: ModelArgs,
        /// Tabulated density with columns omega_radps,K[,J].
        #[arg(long, conflicts_with_all = ["preset", "model"])]
        input: Option<PathBuf>,
        #[arg(long = "tmax-ps")]
        tmax_ps: f64,
        #[arg(long, default_value_t = 200)]
        npoints: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute the line-shape function g(t).
    Lineshape {
        #[command(flatten)]
        model: ModelArgs,
        /// Tabulated density with columns omega_radps,K[,J].
        #[arg(long, conflicts_with_all = ["preset", "model"])]
        input: Option<PathBuf>,
        #[arg(long = "temperature-K")]
        temperature_k: f64,
        #[arg(long = "tmax-ps")]
        tmax_ps: f64,
        #[arg(long, default_value_t = 201)]
        npoints: usize,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute a normalized absorption or fluorescence line.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Tabulated density with columns omega_radps,K[,J].
        #[arg(long, conflicts_with_all = ["preset", "model"])]
        input: Option<PathBuf>,
        #[arg(long = "temperature-K")]
        temperature_k: f64,
        #[arg(long = "tmax-ps")]
        tmax_ps: f64,
        /// Time samples of g.
        #[arg(long, default_value_t = 2001)]
        npoints: usize,
        #[arg(long, value_enum, default_value_t = Kind::Absorption)]
        kind: Kind,
        /// Electronic gap ω_eg in rad/ps.
        #[arg(long = "omega-eg", default_value_t = 0.0)]
        omega_eg: f64,
        #[command(flatten)]
        omega: OmegaArgs,
        /// Largest accepted |exp(-g(t_max))|.
        #[arg(long = "truncation-tol", default_value_t = specdens::lineshape::DEFAULT_TRUNCATION_TOLERANCE)]
        truncation_tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classify and evaluate the Huang-Rhys factor.
    Hr {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        json: bool,
    },
    /// Fit the sub-Ohmic and Gauss-biexponential models and rank them by AICc.
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// A model given by preset name or by explicit parameters.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long, conflicts_with_all = ["model", "omega_c", "s", "gb"])]
    pub preset: Option<String>,
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
    /// Cutoff frequency ω_c in rad/ps.
    #[arg(long = "omega-c", allow_negative_numbers = true)]
    pub omega_c: Option<f64>,
    /// Exponent s.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Dimensionless baseline b0.
    #[arg(long, allow_negative_numbers = true)]
    pub b0: Option<f64>,
    /// Coupling δ_s (default 1).
    #[arg(long = "delta-s", allow_negative_numbers = true)]
    pub delta_s: Option<f64>,
    /// Phonon frequency ω_ph in rad/ps (default ω_c).
    #[arg(long = "omega-ph", allow_negative_numbers = true)]
    pub omega_ph: Option<f64>,
    /// Gauss-biexponential parameters a_g,ω_d,a_1,τ_1,a_2,τ_2.
    #[arg(long, value_delimiter = ',', num_args = 6, allow_negative_numbers = true)]
    pub gb: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Fit window as t_min,t_max in ps.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub window: Option<Vec<f64>>,
    /// Impose a_g + a_1 + a_2 = 1.
    #[arg(long = "constrain-amplitudes")]
    pub constrain_amplitudes: bool,
    /// Fit the data as given, without dividing by S(0).
    #[arg(long = "no-normalize")]
    pub no_normalize: bool,
    /// Use a single central start instead of the start grid.
    #[arg(long = "single-start")]
    pub single_start: bool,
    #[arg(long = "max-iterations")]
    pub max_iterations: Option<usize>,
    /// JSON file with fit options; flags given on the command line override it.
    #[arg(long = "options")]
    pub options: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OmegaArgs {
    #[arg(long = "omega-min")]
    pub omega_min: Option<f64>,
    #[arg(long = "omega-max")]
    pub omega_max: Option<f64>,
    #[arg(long = "omega-points")]
    pub omega_points: Option<usize>,
    #[arg(long = "omega-spacing", value_enum)]
    pub omega_spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Subohmic,
    SubohmicBaseline,
    GaussBiexp,
}

impl From<ModelChoice> for specdens::ModelKind {
    fn from(m: ModelChoice) -> Self {
        match m {
            ModelChoice::Subohmic => Self::Subohmic,
            ModelChoice::SubohmicBaseline => Self::SubohmicBaseline,
            ModelChoice::GaussBiexp => Self::GaussBiexp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailChoice {
    Auto,
    Algebraic,
    Exponential,
    None,
}

impl From<TailChoice> for specdens::TailFamily {
    fn from(t: TailChoice) -> Self {
        match t {
            TailChoice::Auto => Self::Auto,
            TailChoice::Algebraic => Self::Algebraic,
            TailChoice::Exponential => Self::Exponential,
            TailChoice::None => Self::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Auto,
    Closed,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Absorption,
    Fluorescence,
}

impl From<Kind> for specdens::SpectrumKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Absorption => Self::Absorption,
            Kind::Fluorescence => Self::Fluorescence,
        }
    }
}
