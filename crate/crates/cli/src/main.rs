mod config;
mod run;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{FamilyName, FieldName, ModeName, RunConfig, SimMethod};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "spdelab", version, about = "Kernels, spectra, covariances, path synthesis and moduli for L-KS and time-fractional SPDEs")]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// seed for stochastic commands (replaces the configured seed list)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// output directory for CSV tables and the manifest
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "SPDELAB_THREADS")]
    pub threads: Option<usize>,
    /// criterion ids or module names for `verify`, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// special functions
    Specfun {
        #[command(subcommand)]
        op: SpecfunOp,
    },
    /// Green kernels and their Fourier transforms
    Kernel {
        #[command(subcommand)]
        op: KernelOp,
    },
    /// spectral densities, variograms and asymptotic fits
    Spectral {
        #[command(subcommand)]
        op: SpectralOp,
    },
    /// covariances, covariance matrices, bifractional fits and nondeterminism checks
    Cov {
        #[command(subcommand)]
        op: CovOp,
    },
    /// draw sample paths
    Simulate(SimulateArgs),
    /// modulus-of-continuity statistics on simulated paths
    Moduli(ModuliArgs),
    /// run the acceptance suite
    Verify,
}

#[derive(Subcommand, Debug)]
pub enum SpecfunOp {
    Eval(SpecfunEval),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpecFn {
    /// Mittag-Leffler E_β(x)
    Ml,
    /// closed bounds on E_β(−x), x > 0
    MlBounds,
    Gamma,
    LnGamma,
    Erfc,
    Erfcx,
    Hyp2f1,
    Mills,
}

#[derive(Args, Debug)]
pub struct SpecfunEval {
    #[arg(long, value_enum)]
    pub function: SpecFn,
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// time at which spatial quantities are taken
    #[arg(long)]
    pub time: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum KernelOp {
    Eval(KernelEval),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Physical,
    Fourier,
}

#[derive(Args, Debug)]
pub struct KernelEval {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "physical")]
    pub space: Space,
    #[arg(long, required = true, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// |x| in physical space, |ξ| in Fourier space
    #[arg(long, required = true, value_delimiter = ',')]
    pub r: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AxisName {
    Temporal,
    Spatial,
}

#[derive(Args, Debug, Clone)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "temporal")]
    pub axis: AxisName,
    #[arg(long, value_enum, default_value = "base")]
    pub field: FieldName,
}

#[derive(Subcommand, Debug)]
pub enum SpectralOp {
    Eval {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, required = true, value_delimiter = ',')]
        freq: Vec<f64>,
    },
    Variogram {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, required = true, value_delimiter = ',')]
        lags: Vec<f64>,
        /// evaluate temporal variograms through the spectral integral
        #[arg(long)]
        spectral_route: bool,
    },
    Asymptote {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value_t = 1e2)]
        lo: f64,
        #[arg(long, default_value_t = 1e6)]
        hi: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, value_enum, default_value = "auto")]
        log_power: LogPowerName,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LogPowerName {
    Auto,
    Include,
    Exclude,
}

#[derive(Subcommand, Debug)]
pub enum CovOp {
    /// temporal covariance at (t, s) pairs, or spatial covariance at lags h
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "temporal")]
        axis: AxisName,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        h: Vec<f64>,
    },
    /// temporal covariance matrix on the given times (default: the configured grid)
    Matrix {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
    },
    /// least-squares bifractional Brownian motion fit on a geometric grid
    Fit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 1e-2)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
    },
    /// finite-instance strong local nondeterminism of the spatial field
    Slnd(SlndArgs),
}

#[derive(Args, Debug)]
pub struct SlndArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0.25)]
    pub side: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub min_separation: f64,
    /// φ(r) = r^exponent; defaults to the variogram exponent
    #[arg(long)]
    pub exponent: Option<f64>,
    /// multiply φ by |log r|; defaults to on for the critical β = 1/2 field in d = 3
    #[arg(long)]
    pub phi_log: Option<bool>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub method: Option<SimMethod>,
    #[arg(long, value_enum)]
    pub field: Option<FieldName>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub start: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ModuliArgs {
    #[command(flatten)]
    pub sim: SimulateArgs,
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub log_power: Option<f64>,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(run::EXIT_USAGE);
        }
    };
    match run::execute(cli, std::env::args().collect()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl ModelArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.model;
        if let Some(f) = self.family {
            if f != m.family {
                // parameters of the other family do not carry over
                m.epsilon = None;
                m.theta = None;
                m.beta = None;
            }
            m.family = f;
        }
        if let Some(d) = self.dim {
            m.dim = d;
        }
        if self.epsilon.is_some() {
            m.epsilon = self.epsilon;
        }
        if self.theta.is_some() {
            m.theta = self.theta;
        }
        if self.beta.is_some() {
            m.beta = self.beta;
        }
        if let Some(t) = self.time {
            m.t = t;
        }
    }
}
