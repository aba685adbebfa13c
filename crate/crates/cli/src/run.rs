//! Command execution, CSV outputs and the run manifest.

use crate::config::{parse_config, ConfigError, FieldName, ModeName, RunConfig, SimMethod};
use crate::{AxisName, Cli, Command, CovOp, DensityArgs, KernelOp, LogPowerName, ModuliArgs, SimulateArgs, SlndArgs, Space, SpecFn, SpecfunEval, SpecfunOp, SpectralOp};
use serde::Serialize;
use sha2::{Digest, Sha256};
use spdelab::covariance::{bifbm_fit, slnd_check, spatial_cov, temporal_cov_fn, CovMatrix, SlndConfig, TabulatedIsotropicCov};
use spdelab::io::{paths_csv, table_csv};
use spdelab::kernels::{kernel, kernel_ft};
use spdelab::model::{Family, ModelParams};
use spdelab::moduli::{chung_stat, dyadic_deltas, local_modulus_stat, uniform_modulus_stat, IterLog, ModulusReport, ModulusSpec};
use spdelab::sampler::{
    sample_brownian, sample_cholesky, sample_spectral_stat_increments, sample_spectral_stationary_with, FrequencyGrid,
    SamplePathSet, StationaryOptions,
};
use spdelab::specfun::{erfc, erfcx, gamma_fn, hyp2f1, ln_gamma, mills_ratio, ml_bounds, mittag_leffler_with, MLEvalPolicy};
use spdelab::spectral::{
    eval_sd, fit_asymptote_with, log_spaced, spatial_covariance, spatial_variogram, temporal_variogram,
    temporal_variogram_spectral, FieldKind, FitOptions, LogPowerTerm, SpectralDensity,
};
use spdelab::verify::{run_with, VerifyOptions};
use std::fmt;
use std::io::Write;
use std::path::Path;

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_VERIFY_EXPECTED: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_IO: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Usage(String),
    Numeric(spdelab::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<spdelab::Error> for CliError {
    fn from(e: spdelab::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

type Res<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// What a command produced.
struct Outcome {
    tables: Vec<(String, String)>,
    /// echoed to stdout
    echo: Option<String>,
    code: u8,
}

impl Outcome {
    fn table(name: &str, csv: String) -> Self {
        Outcome {
            tables: vec![(name.to_owned(), csv.clone())],
            echo: Some(csv),
            code: 0,
        }
    }
}

/// Module names accepted by `--only`.
fn criteria_for(name: &str) -> Option<&'static [u8]> {
    Some(match name {
        "specfun" => &[1],
        "kernels" | "kernel" => &[2, 3],
        "covariance" | "cov" => &[4, 5, 6, 9],
        "spectral" => &[7, 8],
        "sampler" => &[10],
        "moduli" => &[11],
        "cli" | "determinism" => &[12],
        _ => return None,
    })
}

pub fn parse_only(items: &[String]) -> Res<Vec<u8>> {
    let mut ids = Vec::new();
    for it in items {
        let it = it.trim();
        if let Ok(i) = it.parse::<u8>() {
            if !(1..=12).contains(&i) {
                return Err(usage(format!("--only: no criterion {i}")));
            }
            ids.push(i);
        } else if let Some(list) = criteria_for(it) {
            ids.extend_from_slice(list);
        } else {
            return Err(usage(format!("--only: unknown criterion or module '{it}'")));
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn load_config(cli: &Cli) -> Res<RunConfig> {
    match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Ok(parse_config(&text)?)
        }
        None => Ok(RunConfig::default()),
    }
}

fn apply_simulate(a: &SimulateArgs, cfg: &mut RunConfig) {
    a.model.apply(cfg);
    if let Some(m) = a.method {
        cfg.simulate.method = m;
    }
    if let Some(f) = a.field {
        cfg.simulate.field = f;
    }
    if let Some(r) = a.replicas {
        cfg.simulate.replicas = r;
    }
    if let Some(n) = a.n {
        cfg.grid.n = n;
    }
    if let Some(s) = a.spacing {
        cfg.grid.spacing = s;
    }
    if let Some(s) = a.start {
        cfg.grid.start = s;
    }
}

fn apply_moduli(a: &ModuliArgs, cfg: &mut RunConfig) {
    apply_simulate(&a.sim, cfg);
    let m = &mut cfg.moduli;
    if let Some(v) = a.mode {
        m.mode = v;
    }
    if a.h.is_some() {
        m.h = a.h;
    }
    if a.log_power.is_some() {
        m.log_power = a.log_power;
    }
    if let Some(v) = a.delta_max {
        m.delta_max = v;
    }
    if let Some(v) = a.levels {
        m.levels = v;
    }
    if let Some(v) = a.t0 {
        m.t0 = v;
    }
    if a.k.is_some() {
        m.ensemble_k = a.k;
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Specfun { .. } => "specfun eval",
        Command::Kernel { .. } => "kernel eval",
        Command::Spectral { op } => match op {
            SpectralOp::Eval { .. } => "spectral eval",
            SpectralOp::Variogram { .. } => "spectral variogram",
            SpectralOp::Asymptote { .. } => "spectral asymptote",
        },
        Command::Cov { op } => match op {
            CovOp::Eval { .. } => "cov eval",
            CovOp::Matrix { .. } => "cov matrix",
            CovOp::Fit { .. } => "cov fit",
            CovOp::Slnd(_) => "cov slnd",
        },
        Command::Simulate(_) => "simulate",
        Command::Moduli(_) => "moduli",
        Command::Verify => "verify",
    }
}

pub fn execute(cli: Cli, argv: Vec<String>) -> Res<u8> {
    let mut cfg = load_config(&cli)?;
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.display().to_string();
    }
    if cli.only.is_some() && !matches!(cli.cmd, Command::Verify) {
        return Err(usage("--only applies to verify"));
    }
    if let Some(items) = &cli.only {
        cfg.verify.only = Some(parse_only(items)?);
    }
    match &cli.cmd {
        Command::Kernel { op: KernelOp::Eval(a) } => a.model.apply(&mut cfg),
        Command::Spectral { op } => match op {
            SpectralOp::Eval { density, .. }
            | SpectralOp::Variogram { density, .. }
            | SpectralOp::Asymptote { density, .. } => density.model.apply(&mut cfg),
        },
        Command::Cov { op } => match op {
            CovOp::Eval { model, .. } | CovOp::Matrix { model, .. } | CovOp::Fit { model, .. } => model.apply(&mut cfg),
            CovOp::Slnd(a) => a.model.apply(&mut cfg),
        },
        Command::Simulate(a) => apply_simulate(a, &mut cfg),
        Command::Moduli(a) => apply_moduli(a, &mut cfg),
        Command::Specfun { .. } | Command::Verify => {}
    }
    cfg.validate()?;
    cfg.resolve()?;
    let threads = cli.threads.unwrap_or(0);
    if cli.threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let out = match &cli.cmd {
        Command::Specfun { op: SpecfunOp::Eval(a) } => specfun_eval(a, &cfg)?,
        Command::Kernel { op: KernelOp::Eval(a) } => {
            let p = cfg.model_params()?;
            let mut rows = Vec::new();
            for &t in &a.t {
                for &r in &a.r {
                    let v = match a.space {
                        Space::Physical => kernel(&p, t, r)?,
                        Space::Fourier => kernel_ft(&p, t, r)?,
                    };
                    rows.push(vec![t, r, v]);
                }
            }
            let head = if a.space == Space::Physical { "r" } else { "xi" };
            Outcome::table("kernel.csv", table_csv(&["t", head, "value"], &rows))
        }
        Command::Spectral { op } => spectral(op, &cfg)?,
        Command::Cov { op } => cov(op, &cfg)?,
        Command::Simulate(_) => simulate(&cfg)?,
        Command::Moduli(_) => moduli(&cfg)?,
        Command::Verify => verify(&cfg)?,
    };
    if let Some(text) = &out.echo {
        print!("{text}");
    }
    write_outputs(&cfg, command_name(&cli.cmd), argv, rayon::current_num_threads(), &out.tables)?;
    Ok(out.code)
}

fn ml_policy(cfg: &RunConfig) -> MLEvalPolicy {
    let t = &cfg.tolerances;
    MLEvalPolicy {
        series_cutoff: t.ml_series_cutoff,
        asymptotic_cutoff: t.ml_asymptotic_cutoff,
        target_rel_tol: t.ml_rel_tol,
        ..MLEvalPolicy::default()
    }
}

fn need(v: Option<f64>, flag: &str) -> Res<f64> {
    v.ok_or_else(|| usage(format!("{flag} is required for this function")))
}

fn specfun_eval(a: &SpecfunEval, cfg: &RunConfig) -> Res<Outcome> {
    let pol = ml_policy(cfg);
    let mut rows = Vec::new();
    for &x in &a.x {
        let row = match a.function {
            SpecFn::Ml => vec![x, mittag_leffler_with(need(a.beta, "--beta")?, x, &pol)?],
            SpecFn::MlBounds => {
                let (lo, hi) = ml_bounds(need(a.beta, "--beta")?, x)?;
                vec![x, lo, hi]
            }
            SpecFn::Gamma => vec![x, gamma_fn(x)?],
            SpecFn::LnGamma => vec![x, ln_gamma(x)?],
            SpecFn::Erfc => vec![x, erfc(x)],
            SpecFn::Erfcx => vec![x, erfcx(x)],
            SpecFn::Mills => vec![x, mills_ratio(x)],
            SpecFn::Hyp2f1 => vec![x, hyp2f1(need(a.a, "--a")?, need(a.b, "--b")?, need(a.c, "--c")?, x)?],
        };
        rows.push(row);
    }
    let header: &[&str] = if a.function == SpecFn::MlBounds { &["x", "lower", "upper"] } else { &["x", "value"] };
    Ok(Outcome::table("specfun.csv", table_csv(header, &rows)))
}

fn field_kind(f: FieldName) -> FieldKind {
    match f {
        FieldName::Base => FieldKind::Base,
        FieldName::Gradient => FieldKind::Gradient,
    }
}

fn density(d: &DensityArgs, cfg: &RunConfig) -> Res<SpectralDensity> {
    let p = cfg.model_params()?;
    Ok(match d.axis {
        AxisName::Temporal => SpectralDensity::temporal(p, field_kind(d.field))?,
        AxisName::Spatial => SpectralDensity::spatial(p, field_kind(d.field), cfg.model.t)?,
    })
}

fn spectral(op: &SpectralOp, cfg: &RunConfig) -> Res<Outcome> {
    match op {
        SpectralOp::Eval { density: d, freq } => {
            let sd = density(d, cfg)?;
            let rows = freq.iter().map(|&f| Ok(vec![f, eval_sd(&sd, f)?])).collect::<Res<Vec<_>>>()?;
            Ok(Outcome::table("spectral.csv", table_csv(&["freq", "density"], &rows)))
        }
        SpectralOp::Variogram {
            density: d,
            lags,
            spectral_route,
        } => {
            let sd = density(d, cfg)?;
            if *spectral_route && d.axis != AxisName::Temporal {
                return Err(usage("--spectral-route applies to temporal variograms"));
            }
            let rows = lags
                .iter()
                .map(|&h| {
                    let v = match (d.axis, spectral_route) {
                        (AxisName::Spatial, _) => spatial_variogram(&sd, h)?,
                        (AxisName::Temporal, true) => temporal_variogram_spectral(&sd, h)?,
                        (AxisName::Temporal, false) => temporal_variogram(&sd, h)?,
                    };
                    Ok(vec![h, v])
                })
                .collect::<Res<Vec<_>>>()?;
            Ok(Outcome::table("variogram.csv", table_csv(&["lag", "variogram"], &rows)))
        }
        SpectralOp::Asymptote {
            density: d,
            lo,
            hi,
            points,
            log_power,
        } => {
            let sd = density(d, cfg)?;
            let o = FitOptions {
                window: (*lo, *hi),
                points: *points,
                log_power: match log_power {
                    LogPowerName::Auto => LogPowerTerm::Auto,
                    LogPowerName::Include => LogPowerTerm::Include,
                    LogPowerName::Exclude => LogPowerTerm::Exclude,
                },
            };
            let r = fit_asymptote_with(&sd, o)?;
            let row = vec![r.fitted_exponent, r.fitted_log_power, r.fitted_constant, r.residual, *lo, *hi];
            Ok(Outcome::table(
                "asymptote.csv",
                table_csv(&["exponent", "log_power", "constant", "residual", "lo", "hi"], &[row]),
            ))
        }
    }
}

fn cov(op: &CovOp, cfg: &RunConfig) -> Res<Outcome> {
    let p = cfg.model_params()?;
    match op {
        CovOp::Eval { axis, t, s, h, .. } => match axis {
            AxisName::Temporal => {
                if t.is_empty() || t.len() != s.len() || !h.is_empty() {
                    return Err(usage("temporal cov eval needs --t and --s lists of equal length"));
                }
                let f = temporal_cov_fn(&p)?;
                let rows = t.iter().zip(s).map(|(&a, &b)| Ok(vec![a, b, f(a, b)?])).collect::<Res<Vec<_>>>()?;
                Ok(Outcome::table("cov.csv", table_csv(&["t", "s", "cov"], &rows)))
            }
            AxisName::Spatial => {
                if h.is_empty() || !t.is_empty() || !s.is_empty() {
                    return Err(usage("spatial cov eval needs --h and no --t/--s"));
                }
                let sd = SpectralDensity::spatial(p, FieldKind::Base, cfg.model.t)?;
                let rows = h.iter().map(|&x| Ok(vec![x, spatial_cov(&sd, x)?])).collect::<Res<Vec<_>>>()?;
                Ok(Outcome::table("cov.csv", table_csv(&["h", "cov"], &rows)))
            }
        },
        CovOp::Matrix { times, .. } => {
            let pts = if times.is_empty() { cfg.grid_points() } else { times.clone() };
            let f = temporal_cov_fn(&p)?;
            let m = CovMatrix::build(pts.iter().map(|&x| vec![x]).collect(), |a, b| f(a[0], b[0]))?;
            let mut header = vec!["t".to_owned()];
            header.extend((0..pts.len()).map(|j| format!("c{j}")));
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<f64>> = (0..pts.len())
                .map(|i| std::iter::once(pts[i]).chain(m.entries.row(i).iter().copied()).collect())
                .collect();
            let info = table_csv(&["jitter", "min_eigenvalue"], &[vec![m.jitter, m.min_eigenvalue()]]);
            let csv = table_csv(&h, &rows);
            Ok(Outcome {
                tables: vec![("cov_matrix.csv".into(), csv.clone()), ("cov_matrix_info.csv".into(), info)],
                echo: Some(csv),
                code: 0,
            })
        }
        CovOp::Fit { n, lo, hi, .. } => {
            if !(*lo > 0.0 && hi > lo) {
                return Err(usage("cov fit needs 0 < --lo < --hi"));
            }
            let f = temporal_cov_fn(&p)?;
            let r = bifbm_fit(|t, s| f(t, s), &log_spaced(*lo, *hi, *n))?;
            let row = vec![r.params.h, r.params.k, r.params.scale, r.residual];
            Ok(Outcome::table("cov_fit.csv", table_csv(&["h", "k", "scale", "residual"], &[row])))
        }
        CovOp::Slnd(a) => slnd(a, p, cfg),
    }
}

fn slnd(a: &SlndArgs, p: ModelParams, cfg: &RunConfig) -> Res<Outcome> {
    let sd = SpectralDensity::spatial(p, FieldKind::Base, cfg.model.t)?;
    let reach = a.side * (p.dim as f64).sqrt() * 1.5;
    let tab = TabulatedIsotropicCov::new(
        spatial_covariance(&sd, 0.0)?,
        |h| spatial_variogram(&sd, h),
        (a.min_separation / 10.0).min(1e-5),
        reach.max(1.0),
        161,
    )?;
    let exponent = a.exponent.unwrap_or_else(|| sd.variogram_exponent());
    let phi_log = a.phi_log.unwrap_or(p.family == Family::Tf && p.beta == 0.5 && p.dim == 3);
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let c = SlndConfig {
            n_max: a.n_max,
            trials: a.trials,
            dim: p.dim,
            side: a.side,
            exponent,
            phi_log,
            min_separation: a.min_separation,
            seed,
        };
        let cov = |x: &[f64], y: &[f64]| {
            let h = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
            Ok(tab.cov(h))
        };
        let r = slnd_check(cov, &c)?;
        rows.push(vec![seed as f64, r.c_min, r.median_ratio, f64::from(u8::from(r.pass)), r.worst_n as f64]);
    }
    Ok(Outcome::table(
        "slnd.csv",
        table_csv(&["seed", "c_min", "median_ratio", "pass", "worst_n"], &rows),
    ))
}

fn draw(cfg: &RunConfig, seed: u64) -> Res<SamplePathSet> {
    let p = cfg.model_params()?;
    let g = &cfg.grid;
    let reps = cfg.simulate.replicas;
    let field = field_kind(cfg.simulate.field);
    Ok(match cfg.simulate.method {
        SimMethod::Brownian => {
            if g.start != 0.0 {
                return Err(usage("brownian paths start at 0; set grid.start = 0"));
            }
            sample_brownian(g.n, g.spacing, reps, seed)?
        }
        SimMethod::Increments => {
            let sd = SpectralDensity::temporal(p, field)?;
            let times = cfg.grid_points();
            let span = times[times.len() - 1] - times[0];
            sample_spectral_stat_increments(&sd, &times, reps, seed, FrequencyGrid::for_grid(span, g.spacing))?
        }
        SimMethod::Spectral => {
            let sd = SpectralDensity::spatial(p, field, cfg.model.t)?;
            let opts = StationaryOptions {
                nyquist_ratio: cfg.tolerances.nyquist_ratio,
                ..StationaryOptions::default()
            };
            let mut set = sample_spectral_stationary_with(&sd, g.n, g.spacing, reps, seed, opts)?;
            for x in &mut set.grid {
                *x += g.start;
            }
            set
        }
        SimMethod::Cholesky => {
            if field != FieldKind::Base {
                return Err(usage("cholesky simulation supports the base field"));
            }
            let f = temporal_cov_fn(&p)?;
            let pts: Vec<Vec<f64>> = cfg.grid_points().into_iter().map(|x| vec![x]).collect();
            sample_cholesky(&CovMatrix::build(pts, |a, b| f(a[0], b[0]))?, reps, seed)?
        }
    })
}

fn simulate(cfg: &RunConfig) -> Res<Outcome> {
    let mut tables = Vec::new();
    let mut echo = String::new();
    for &seed in &cfg.seeds {
        let set = draw(cfg, seed)?;
        let name = format!("paths_seed{seed}.csv");
        echo.push_str(&format!("{name}: {} replicas x {} points\n", set.replicas(), set.grid.len()));
        tables.push((name, paths_csv(&set)));
    }
    Ok(Outcome {
        tables,
        echo: Some(echo),
        code: 0,
    })
}

/// Default normalizing exponent for the simulated target.
fn default_h(cfg: &RunConfig) -> Res<f64> {
    let p = cfg.model_params()?;
    let field = field_kind(cfg.simulate.field);
    Ok(match cfg.simulate.method {
        SimMethod::Brownian => 0.5,
        SimMethod::Spectral => SpectralDensity::spatial(p, field, cfg.model.t)?.variogram_exponent() / 2.0,
        SimMethod::Increments | SimMethod::Cholesky => match field {
            FieldKind::Base => p.temporal_h(),
            FieldKind::Gradient => p.gradient_temporal_h(),
        },
    })
}

fn moduli(cfg: &RunConfig) -> Res<Outcome> {
    let m = &cfg.moduli;
    let h = match m.h {
        Some(h) => h,
        None => default_h(cfg)?,
    };
    let iter_log = match m.ensemble_k {
        Some(k) => IterLog::Ensemble { k },
        None => ModulusSpec::default_ensemble(cfg.simulate.replicas),
    };
    let deltas = dyadic_deltas(m.delta_max, m.levels);
    let mut tables = Vec::new();
    let mut summary = Vec::new();
    for &seed in &cfg.seeds {
        let set = draw(cfg, seed)?;
        let r: ModulusReport = match m.mode {
            ModeName::Uniform => {
                let spec = ModulusSpec::uniform(h, m.log_power.unwrap_or(0.5));
                let iv = (set.grid[0], set.grid[set.grid.len() - 1]);
                uniform_modulus_stat(&set, &spec, iv, &deltas)?
            }
            ModeName::Local => {
                let spec = ModulusSpec::local(h, m.log_power.unwrap_or(0.0), iter_log);
                local_modulus_stat(&set, &spec, m.t0, &deltas)?
            }
            ModeName::Chung => {
                if m.log_power.is_some() {
                    return Err(usage("chung mode takes no log power"));
                }
                chung_stat(&set, &ModulusSpec::chung(h, iter_log), &deltas)?
            }
        };
        let rows: Vec<Vec<f64>> = r.delta_grid.iter().zip(&r.statistic).map(|(d, s)| vec![*d, *s]).collect();
        tables.push((format!("moduli_seed{seed}.csv"), table_csv(&["delta", "statistic"], &rows)));
        summary.push(vec![seed as f64, h, r.plateau_estimate, r.plateau_cv, r.fitted_h, r.fitted_h_stderr]);
    }
    let s = table_csv(&["seed", "h", "plateau", "plateau_cv", "fitted_h", "fitted_h_stderr"], &summary);
    tables.push(("moduli_summary.csv".into(), s.clone()));
    Ok(Outcome {
        tables,
        echo: Some(s),
        code: 0,
    })
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn verify(cfg: &RunConfig) -> Res<Outcome> {
    let opts = VerifyOptions {
        constant_perturbation: cfg.verify.constant_perturbation,
    };
    let ids: Vec<u8> = cfg.verify.only.clone().unwrap_or_else(|| (1..=12).collect());
    let mut rows = Vec::new();
    let mut check_rows = Vec::new();
    let (mut unexpected, mut expected) = (false, false);
    let mut stdout = std::io::stdout();
    for id in ids {
        let r = run_with(id, &opts);
        let _ = writeln!(stdout, "{}", r.line());
        let _ = stdout.flush();
        if !r.ok() {
            unexpected = true;
        } else if !r.pass() {
            expected = true;
        }
        let join = |f: &dyn Fn(&spdelab::verify::Check) -> String| r.checks.iter().map(f).collect::<Vec<_>>().join("; ");
        let measured = match &r.error {
            Some(e) => format!("error: {e}"),
            None => join(&|c| format!("{}={}", c.label, c.measured)),
        };
        rows.push(vec![
            id.to_string(),
            r.title.to_owned(),
            measured,
            join(&|c| format!("{} {}", c.label, c.tolerance)),
            r.pass().to_string(),
            (!r.pass() && r.ok()).to_string(),
            format!("{:.3}", r.elapsed.as_secs_f64()),
        ]);
        for c in &r.checks {
            check_rows.push(vec![
                id.to_string(),
                c.label.clone(),
                c.measured.clone(),
                c.tolerance.clone(),
                c.pass.to_string(),
                c.expected_failure.to_string(),
            ]);
        }
    }
    let report = csv_text(
        &["id", "target", "measured", "tolerance", "pass", "expected_failure_only", "seconds"],
        &rows,
    )?;
    let checks = csv_text(&["id", "check", "measured", "tolerance", "pass", "expected_failure"], &check_rows)?;
    let code = if unexpected {
        EXIT_VERIFY_FAILED
    } else if expected {
        EXIT_VERIFY_EXPECTED
    } else {
        0
    };
    Ok(Outcome {
        tables: vec![("verify.csv".into(), report), ("verify_checks.csv".into(), checks)],
        echo: None,
        code,
    })
}

#[derive(Serialize)]
struct OutputRecord {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'a str,
    argv: Vec<String>,
    threads: usize,
    float_format: &'static str,
    config: &'a RunConfig,
    outputs: Vec<OutputRecord>,
}

fn write_outputs(cfg: &RunConfig, command: &str, argv: Vec<String>, threads: usize, tables: &[(String, String)]) -> Res<()> {
    let dir = Path::new(&cfg.output_dir);
    let io = |e: std::io::Error, p: &Path| CliError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let mut outputs = Vec::new();
    for (name, text) in tables {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| io(e, &path))?;
        let digest = Sha256::digest(text.as_bytes());
        outputs.push(OutputRecord {
            file: name.clone(),
            bytes: text.len(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
    }
    let m = Manifest {
        tool: "spdelab",
        version: env!("CARGO_PKG_VERSION"),
        core_version: spdelab::VERSION,
        command,
        argv,
        threads,
        float_format: "{:.16e}",
        config: cfg,
        outputs,
    };
    let text = toml::to_string(&m).map_err(|e| CliError::Io(format!("manifest: {e}")))?;
    let path = dir.join("manifest.toml");
    std::fs::write(&path, text).map_err(|e| io(e, &path))?;
    Ok(())
}
