//! Run configuration: a TOML document, command-line overrides, validation.

use serde::{Deserialize, Serialize};
use spdelab::model::ModelParams;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "config: {}", self.msg)
        } else {
            write!(f, "config: {}: {}", self.key, self.msg)
        }
    }
}

fn err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_owned(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Lks,
    Tf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: FamilyName,
    #[serde(alias = "d")]
    pub dim: usize,
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
    /// time at which spatial quantities are taken
    pub t: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            family: FamilyName::Lks,
            dim: 1,
            epsilon: None,
            theta: None,
            beta: None,
            t: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub start: f64,
    pub spacing: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            start: 0.0,
            spacing: 1.0 / 4096.0,
            n: 4097,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimMethod {
    /// stationary-increment synthesis of a temporal process
    Increments,
    /// FFT synthesis of a spatial field along a line
    Spectral,
    /// exact Cholesky factor of the temporal covariance
    Cholesky,
    /// standard Brownian motion
    Brownian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldName {
    Base,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub method: SimMethod,
    pub field: FieldName,
    pub replicas: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            method: SimMethod::Increments,
            field: FieldName::Base,
            replicas: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Uniform,
    Local,
    Chung,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModuliSection {
    pub mode: ModeName,
    /// normalizing exponent; defaults to the model's Hölder index
    pub h: Option<f64>,
    /// power of log(1/δ) in the normalizer; 1/2 for uniform, 0 for local
    pub log_power: Option<f64>,
    pub delta_max: f64,
    pub levels: usize,
    pub t0: f64,
    /// iterated-log ensemble rank; defaults to replicas/64
    pub ensemble_k: Option<usize>,
}

impl Default for ModuliSection {
    fn default() -> Self {
        ModuliSection {
            mode: ModeName::Uniform,
            h: None,
            log_power: None,
            delta_max: 0.25,
            levels: 7,
            t0: 0.5,
            ensemble_k: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ml_rel_tol: f64,
    pub ml_series_cutoff: f64,
    pub ml_asymptotic_cutoff: f64,
    pub nyquist_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ml_rel_tol: 1e-13,
            ml_series_cutoff: 1.0,
            ml_asymptotic_cutoff: 50.0,
            nyquist_ratio: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub only: Option<Vec<u8>>,
    pub constant_perturbation: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            only: None,
            constant_perturbation: 1.0,
        }
    }
}

/// The resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub seeds: Vec<u64>,
    pub simulate: SimulateSection,
    pub moduli: ModuliSection,
    pub tolerances: Tolerances,
    pub verify: VerifySection,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSection::default(),
            grid: GridSection::default(),
            seeds: vec![1],
            simulate: SimulateSection::default(),
            moduli: ModuliSection::default(),
            tolerances: Tolerances::default(),
            verify: VerifySection::default(),
            output_dir: "spdelab-out".into(),
        }
    }
}

/// Parse a TOML document; unknown and duplicate keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_owned();
        let key = match e.span() {
            Some(span) => {
                let line = text[..span.start].matches('\n').count() + 1;
                format!("line {line}")
            }
            None => String::new(),
        };
        err(&key, msg)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model_params()?;
        let m = &self.model;
        if !(m.t > 0.0 && m.t.is_finite()) {
            return Err(err("model.t", format!("must be positive, got {}", m.t)));
        }
        let g = &self.grid;
        if !(g.spacing > 0.0 && g.spacing.is_finite()) {
            return Err(err("grid.spacing", format!("must be positive, got {}", g.spacing)));
        }
        if g.n < 2 {
            return Err(err("grid.n", format!("need at least 2 points, got {}", g.n)));
        }
        if !(g.start >= 0.0 && g.start.is_finite()) {
            return Err(err("grid.start", format!("must be nonnegative, got {}", g.start)));
        }
        if self.seeds.is_empty() {
            return Err(err("seeds", "need at least one seed"));
        }
        if self.simulate.replicas == 0 {
            return Err(err("simulate.replicas", "must be positive"));
        }
        let md = &self.moduli;
        if let Some(h) = md.h {
            if !(h > 0.0 && h < 1.0) {
                return Err(err("moduli.h", format!("must lie in (0, 1), got {h}")));
            }
        }
        if !(md.delta_max > 0.0 && md.delta_max < 1.0) {
            return Err(err("moduli.delta_max", format!("must lie in (0, 1), got {}", md.delta_max)));
        }
        if md.levels < 5 {
            return Err(err("moduli.levels", format!("need at least 5, got {}", md.levels)));
        }
        if md.ensemble_k == Some(0) {
            return Err(err("moduli.ensemble_k", "must be positive"));
        }
        let t = &self.tolerances;
        if !(t.ml_rel_tol > 0.0 && t.ml_rel_tol <= 1e-3) {
            return Err(err("tolerances.ml_rel_tol", format!("must lie in (0, 1e-3], got {}", t.ml_rel_tol)));
        }
        if !(t.ml_series_cutoff > 0.0 && t.ml_series_cutoff < t.ml_asymptotic_cutoff) {
            return Err(err(
                "tolerances.ml_series_cutoff",
                "must be positive and below tolerances.ml_asymptotic_cutoff",
            ));
        }
        if !(t.nyquist_ratio > 0.0 && t.nyquist_ratio < 1.0) {
            return Err(err("tolerances.nyquist_ratio", format!("must lie in (0, 1), got {}", t.nyquist_ratio)));
        }
        if let Some(only) = &self.verify.only {
            if let Some(bad) = only.iter().find(|i| !(1..=12).contains(*i)) {
                return Err(err("verify.only", format!("no criterion {bad}")));
            }
        }
        if !(self.verify.constant_perturbation > 0.0) {
            return Err(err("verify.constant_perturbation", "must be positive"));
        }
        if self.output_dir.is_empty() {
            return Err(err("output_dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        let m = &self.model;
        if !(1..=3).contains(&m.dim) {
            return Err(err("model.dim", format!("must be 1, 2 or 3, got {}", m.dim)));
        }
        match m.family {
            FamilyName::Lks => {
                if m.beta.is_some() {
                    return Err(err("model.beta", "only used with family = \"tf\""));
                }
                let eps = m.epsilon.unwrap_or(1.0);
                let th = m.theta.unwrap_or(0.0);
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(err("model.epsilon", format!("must be positive, got {eps}")));
                }
                ModelParams::lks(eps, th, m.dim).map_err(|e| err("model.theta", e.to_string()))
            }
            FamilyName::Tf => {
                if m.epsilon.is_some() || m.theta.is_some() {
                    let k = if m.epsilon.is_some() { "model.epsilon" } else { "model.theta" };
                    return Err(err(k, "only used with family = \"lks\""));
                }
                let b = m.beta.unwrap_or(0.25);
                ModelParams::tf(b, m.dim).map_err(|_| err("model.beta", format!("must lie in (0, 1/2], got {b}")))
            }
        }
    }

    /// Fill implied defaults so the manifest echoes every value used.
    pub fn resolve(&mut self) -> Result<(), ConfigError> {
        let p = self.model_params()?;
        match self.model.family {
            FamilyName::Lks => {
                self.model.epsilon = Some(p.epsilon);
                self.model.theta = Some(p.theta);
            }
            FamilyName::Tf => self.model.beta = Some(p.beta),
        }
        if self.moduli.log_power.is_none() {
            self.moduli.log_power = match self.moduli.mode {
                ModeName::Uniform => Some(0.5),
                ModeName::Local => Some(0.0),
                ModeName::Chung => None,
            };
        }
        Ok(())
    }

    pub fn grid_points(&self) -> Vec<f64> {
        spdelab::sampler::uniform_grid(self.grid.start, self.grid.spacing, self.grid.n)
    }
}
