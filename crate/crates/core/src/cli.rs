//! Command-line front end. Arguments are parsed with clap, resolved into a
//! [`RunConfig`] (angles in radians, seed fixed, paths explicit), and that
//! config is written next to every output so `superrad replay` can rerun it.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{analytic_curve, CurveOptions};
use crate::error::{Error, Result};
use crate::estimator::{correlate_frames, curve_metrics, fit_offset_prefactor, synthesize_frames, visibility};
use crate::estimator::{FitResult, FitWeighting, FrameOptions};
use crate::io;
use crate::model::{linspace, CorrelationCurve, CurveMeta, DetectorSet, EmitterChain, SourceModel};
use crate::quantum::{g_spe_permanent, g_spe_statevector};
use crate::stochastic::mc_correlation;

/// Environment variable supplying the seed when `--seed` is absent.
pub const SEED_ENV: &str = "SUPERRAD_SEED";

#[derive(Debug, Parser)]
#[command(name = "superrad", version, about = "Higher-order photon correlations of independent emitters")]
pub struct Cli {
    /// Upper bound on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form coincident correlation curve (SPE or TLS).
    Analytic(AnalyticArgs),
    /// Exact single-photon-emitter curve from the state-vector or permanent engine.
    Quantum(QuantumArgs),
    /// Monte Carlo correlation curve for thermal or coherent sources.
    Mc(McArgs),
    /// Synthesize a camera frame stack.
    Simulate(SimulateArgs),
    /// Correlate a frame stack against a reference pixel.
    Correlate(CorrelateArgs),
    /// Fit offset + prefactor·template to a curve.
    Fit(FitArgs),
    /// Visibility, FWHM and peak position of a curve.
    Report(ReportArgs),
    /// Re-run the configuration stored in a sidecar file.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Spe,
    Tls,
    Cls,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, value_enum, default_value = "spe")]
    pub model: ModelArg,
    /// Number of emitters N.
    #[arg(long)]
    pub n: usize,
    /// Spacing k·d; accepts `pi`, `2pi`, `0.5*pi` or a number.
    #[arg(long, default_value = "pi", allow_hyphen_values = true)]
    pub kd: String,
    /// TLS mean intensity or CLS amplitude per source.
    #[arg(long, default_value_t = 1.0)]
    pub strength: f64,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Correlation order m.
    #[arg(long)]
    pub m: usize,
    /// Angle of the first m−1 detectors.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub theta1: String,
    /// θ₂ grid as `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Angles are given in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeArg {
    /// Max-normalized for SPE, raw for TLS.
    Auto,
    Raw,
    Max,
    Baseline,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub normalize: NormalizeArg,
    /// Multiply the TLS form by (m−1)!, the scale of the normalized estimator.
    #[arg(long)]
    pub absolute_scale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Statevector,
    Permanent,
}

#[derive(Debug, Args)]
pub struct QuantumArgs {
    /// Number of two-level atoms N.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "pi", allow_hyphen_values = true)]
    pub kd: String,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, value_enum, default_value = "statevector")]
    pub engine: EngineArg,
    #[arg(long, value_enum, default_value = "raw")]
    pub normalize: NormalizeArg,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = 100_000)]
    pub realizations: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Pixel angles as `start:stop:count`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "pixels")]
    pub grid: Option<String>,
    /// Pixel count on the default range [-1.2, 1.2] rad.
    #[arg(long)]
    pub pixels: Option<usize>,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub frames: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Slit width over spacing a/d (single-slit envelope).
    #[arg(long)]
    pub envelope: Option<f64>,
    /// Mean photon count per pixel (Poisson counting noise).
    #[arg(long)]
    pub shot_noise: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Frame stack (.gmf) with its sidecar.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub m: usize,
    /// Reference pixel index, or `auto` for the pixel nearest θ = 0.
    #[arg(long = "ref", default_value = "auto")]
    pub reference: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `eq5` (thermal closed form), `eq3` (single-photon closed form) or a curve CSV.
    #[arg(long)]
    pub template: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value = "pi", allow_hyphen_values = true)]
    pub kd: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub theta1: String,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub absolute_scale: bool,
    /// Weight points by 1/stderr².
    #[arg(long)]
    pub weighted: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Sidecar JSON of a previous run.
    #[arg(long)]
    pub config: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Chain parameters as resolved numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub model: ModelArg,
    pub n: usize,
    pub kd: f64,
    pub strength: f64,
}

impl ChainConfig {
    pub fn build(&self) -> Result<EmitterChain<f64>> {
        let model = match self.model {
            ModelArg::Spe => SourceModel::Spe,
            ModelArg::Tls => SourceModel::Tls { mean_intensity: self.strength },
            ModelArg::Cls => SourceModel::Cls { amplitude: self.strength },
        };
        EmitterChain::new(self.n, self.kd, model)
    }
}

/// Uniform grid in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferencePixel {
    Auto,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum TemplateConfig {
    Eq3 { n: usize, m: usize, kd: f64, theta1: f64 },
    Eq5 { n: usize, m: usize, kd: f64, theta1: f64, absolute_scale: bool },
    File { path: PathBuf },
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "subcommand")]
pub enum RunConfig {
    Analytic {
        chain: ChainConfig,
        m: usize,
        theta1: f64,
        grid: GridConfig,
        normalize: NormalizeArg,
        absolute_scale: bool,
        out: PathBuf,
    },
    Quantum {
        chain: ChainConfig,
        m: usize,
        theta1: f64,
        grid: GridConfig,
        engine: EngineArg,
        normalize: NormalizeArg,
        out: PathBuf,
    },
    Mc {
        chain: ChainConfig,
        m: usize,
        theta1: f64,
        grid: GridConfig,
        realizations: usize,
        seed: u64,
        out: PathBuf,
    },
    Simulate {
        chain: ChainConfig,
        pixels: GridConfig,
        frames: usize,
        seed: u64,
        envelope: Option<f64>,
        shot_noise: Option<f64>,
        out: PathBuf,
    },
    Correlate {
        frames: PathBuf,
        m: usize,
        reference: ReferencePixel,
        out: PathBuf,
    },
    Fit {
        data: PathBuf,
        template: TemplateConfig,
        weighting: FitWeighting,
        out: Option<PathBuf>,
    },
    Report {
        data: PathBuf,
        out: Option<PathBuf>,
    },
}

impl RunConfig {
    /// Same run writing somewhere else.
    pub fn redirect(&mut self, path: PathBuf) {
        match self {
            RunConfig::Analytic { out, .. }
            | RunConfig::Quantum { out, .. }
            | RunConfig::Mc { out, .. }
            | RunConfig::Simulate { out, .. }
            | RunConfig::Correlate { out, .. } => *out = path,
            RunConfig::Fit { out, .. } | RunConfig::Report { out, .. } => *out = Some(path),
        }
    }
}

/// Parses `pi`, `-pi`, `2pi`, `0.5*pi`, `pi/2` or a plain number.
pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    let bad = || Error::Argument(format!("cannot parse {text:?} as a number"));
    let (body, divisor) = match t.split_once('/') {
        Some((b, d)) => (b.to_string(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let value = if let Some(coef) = body.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI
    } else {
        body.parse::<f64>().map_err(|_| bad())?
    };
    let value = value / divisor;
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

fn to_radians(x: f64, degrees: bool) -> f64 {
    if degrees {
        x.to_radians()
    } else {
        x
    }
}

/// Parses `start:stop:count`.
pub fn parse_grid(text: &str, degrees: bool) -> Result<GridConfig> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(Error::Argument(format!("grid {text:?} is not start:stop:count")));
    };
    let count: usize =
        count.trim().parse().map_err(|_| Error::Argument(format!("bad grid count in {text:?}")))?;
    if count == 0 {
        return Err(Error::Argument("grid count must be ≥ 1".into()));
    }
    let (start, stop) = (to_radians(parse_real(start)?, degrees), to_radians(parse_real(stop)?, degrees));
    if count > 1 && !(start < stop) {
        return Err(Error::Argument(format!("grid start must be below stop in {text:?}")));
    }
    Ok(GridConfig { start, stop, count })
}

fn resolve_seed(seed: Option<u64>) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| Error::Argument(format!("{SEED_ENV}={v:?} is not a u64"))),
            Err(_) => Ok(0),
        },
    }
}

fn resolve_chain(args: &ChainArgs) -> Result<ChainConfig> {
    let c = ChainConfig { model: args.model, n: args.n, kd: parse_real(&args.kd)?, strength: args.strength };
    c.build()?;
    Ok(c)
}

fn require_order(m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::Argument("--m must be ≥ 1".into()));
    }
    Ok(m)
}

/// Validates parsed arguments into a [`RunConfig`]. `Replay` has no config
/// of its own and is handled by [`run`].
pub fn resolve(command: &Command) -> Result<RunConfig> {
    Ok(match command {
        Command::Analytic(a) => {
            let chain = resolve_chain(&a.chain)?;
            if chain.model == ModelArg::Cls {
                return Err(Error::Argument("no closed form for cls; use `mc`".into()));
            }
            RunConfig::Analytic {
                chain,
                m: require_order(a.curve.m)?,
                theta1: to_radians(parse_real(&a.curve.theta1)?, a.curve.degrees),
                grid: parse_grid(&a.curve.grid, a.curve.degrees)?,
                normalize: a.normalize,
                absolute_scale: a.absolute_scale,
                out: a.curve.out.clone(),
            }
        }
        Command::Quantum(q) => {
            let chain = ChainConfig { model: ModelArg::Spe, n: q.n, kd: parse_real(&q.kd)?, strength: 1.0 };
            chain.build()?;
            RunConfig::Quantum {
                chain,
                m: require_order(q.curve.m)?,
                theta1: to_radians(parse_real(&q.curve.theta1)?, q.curve.degrees),
                grid: parse_grid(&q.curve.grid, q.curve.degrees)?,
                engine: q.engine,
                normalize: q.normalize,
                out: q.curve.out.clone(),
            }
        }
        Command::Mc(a) => {
            let chain = resolve_chain(&a.chain)?;
            if chain.model == ModelArg::Spe {
                return Err(Error::Argument("spe has no classical field; use `quantum`".into()));
            }
            RunConfig::Mc {
                chain,
                m: require_order(a.curve.m)?,
                theta1: to_radians(parse_real(&a.curve.theta1)?, a.curve.degrees),
                grid: parse_grid(&a.curve.grid, a.curve.degrees)?,
                realizations: a.realizations,
                seed: resolve_seed(a.seed)?,
                out: a.curve.out.clone(),
            }
        }
        Command::Simulate(s) => {
            let chain = resolve_chain(&s.chain)?;
            if chain.model == ModelArg::Spe {
                return Err(Error::Argument(
                    "frame synthesis needs tls or cls sources; single-photon curves come from `quantum`".into(),
                ));
            }
            let pixels = match (&s.grid, s.pixels) {
                (Some(g), _) => parse_grid(g, s.degrees)?,
                (None, Some(p)) if p > 0 => GridConfig { start: -1.2, stop: 1.2, count: p },
                _ => return Err(Error::Argument("give --grid or --pixels".into())),
            };
            if s.frames == 0 {
                return Err(Error::Argument("--frames must be ≥ 1".into()));
            }
            RunConfig::Simulate {
                chain,
                pixels,
                frames: s.frames,
                seed: resolve_seed(s.seed)?,
                envelope: s.envelope,
                shot_noise: s.shot_noise,
                out: s.out.clone(),
            }
        }
        Command::Correlate(c) => RunConfig::Correlate {
            frames: c.frames.clone(),
            m: require_order(c.m)?,
            reference: match c.reference.as_str() {
                "auto" => ReferencePixel::Auto,
                idx => ReferencePixel::Index(
                    idx.parse().map_err(|_| Error::Argument(format!("--ref {idx:?} is not auto or an index")))?,
                ),
            },
            out: c.out.clone(),
        },
        Command::Fit(f) => {
            let closed_form = || -> Result<(usize, usize, f64, f64)> {
                let n = f.n.ok_or_else(|| Error::Argument("closed-form templates need --n".into()))?;
                let m = require_order(f.m.ok_or_else(|| Error::Argument("closed-form templates need --m".into()))?)?;
                Ok((n, m, parse_real(&f.kd)?, to_radians(parse_real(&f.theta1)?, f.degrees)))
            };
            let template = match f.template.as_str() {
                "eq5" | "tls" => {
                    let (n, m, kd, theta1) = closed_form()?;
                    TemplateConfig::Eq5 { n, m, kd, theta1, absolute_scale: f.absolute_scale }
                }
                "eq3" | "spe" => {
                    let (n, m, kd, theta1) = closed_form()?;
                    TemplateConfig::Eq3 { n, m, kd, theta1 }
                }
                path => TemplateConfig::File { path: PathBuf::from(path) },
            };
            RunConfig::Fit {
                data: f.data.clone(),
                template,
                weighting: if f.weighted { FitWeighting::InverseVariance } else { FitWeighting::Unweighted },
                out: f.out.clone(),
            }
        }
        Command::Report(r) => RunConfig::Report { data: r.data.clone(), out: r.out.clone() },
        Command::Replay(_) => return Err(Error::Argument("replay has no configuration of its own".into())),
    })
}

fn normalize_curve(curve: CorrelationCurve<f64>, tag: NormalizeArg, model: ModelArg) -> Result<CorrelationCurve<f64>> {
    match (tag, model) {
        (NormalizeArg::Raw, _) | (NormalizeArg::Auto, ModelArg::Tls | ModelArg::Cls) => Ok(curve),
        (NormalizeArg::Max, _) | (NormalizeArg::Auto, ModelArg::Spe) => curve.max_normalized(),
        (NormalizeArg::Baseline, _) => curve.baseline_normalized(),
    }
}

fn write_curve_with_config(path: &Path, curve: &CorrelationCurve<f64>, config: &RunConfig) -> Result<()> {
    io::write_curve(path, curve)?;
    io::write_json(&io::output_sidecar_path(path), config)
}

fn template_curve(template: &TemplateConfig, grid: &[f64]) -> Result<CorrelationCurve<f64>> {
    match template {
        TemplateConfig::Eq3 { n, m, kd, theta1 } => {
            analytic_curve(&EmitterChain::spe(*n, *kd)?, *m, *theta1, grid, CurveOptions::default())
        }
        TemplateConfig::Eq5 { n, m, kd, theta1, absolute_scale } => analytic_curve(
            &EmitterChain::tls(*n, *kd, 1.0)?,
            *m,
            *theta1,
            grid,
            CurveOptions { max_normalize: false, absolute_scale: *absolute_scale },
        ),
        TemplateConfig::File { path } => io::read_curve(path),
    }
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    fit: FitResult<f64>,
    config: &'a RunConfig,
}

#[derive(Debug, Serialize)]
struct MetricsReport<'a> {
    visibility: f64,
    fwhm: f64,
    peak_position: f64,
    config: &'a RunConfig,
}

/// Executes a resolved configuration; returns text for standard output.
pub fn execute(config: &RunConfig) -> Result<String> {
    match config {
        RunConfig::Analytic { chain, m, theta1, grid, normalize, absolute_scale, out } => {
            let c = chain.build()?;
            let curve = analytic_curve(
                &c,
                *m,
                *theta1,
                &grid.points(),
                CurveOptions { max_normalize: false, absolute_scale: *absolute_scale },
            )?;
            let curve = normalize_curve(curve, *normalize, chain.model)?;
            write_curve_with_config(out, &curve, config)?;
            Ok(format!("wrote {} points to {}\n", curve.len(), out.display()))
        }
        RunConfig::Quantum { chain, m, theta1, grid, engine, normalize, out } => {
            let c = chain.build()?;
            let points = grid.points();
            let values = points
                .par_iter()
                .map(|&t2| {
                    let d = DetectorSet::coincident(*m, *theta1, t2)?;
                    match engine {
                        EngineArg::Statevector => g_spe_statevector(&c, &d),
                        EngineArg::Permanent => g_spe_permanent(&c, &d),
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            let curve = CorrelationCurve::new(points, values, None)?.with_meta(CurveMeta {
                n_sources: chain.n,
                order: *m,
                theta1: *theta1,
                spacing_kd: chain.kd,
                source_model: SourceModel::Spe,
            });
            let curve = normalize_curve(curve, *normalize, ModelArg::Spe)?;
            write_curve_with_config(out, &curve, config)?;
            Ok(format!("wrote {} points to {}\n", curve.len(), out.display()))
        }
        RunConfig::Mc { chain, m, theta1, grid, realizations, seed, out } => {
            let curve = mc_correlation(&chain.build()?, *m, *theta1, &grid.points(), *realizations, *seed)?;
            write_curve_with_config(out, &curve, config)?;
            Ok(format!("wrote {} points to {}\n", curve.len(), out.display()))
        }
        RunConfig::Simulate { chain, pixels, frames, seed, envelope, shot_noise, out } => {
            let options = FrameOptions { envelope: *envelope, shot_noise: *shot_noise };
            let stack = synthesize_frames(&chain.build()?, &pixels.points(), *frames, *seed, options)?;
            io::write_stack(out, &stack, config)?;
            Ok(format!("wrote {} frames of {} pixels to {}\n", stack.frames(), stack.pixels(), out.display()))
        }
        RunConfig::Correlate { frames, m, reference, out } => {
            let (stack, _) = io::read_stack(frames)?;
            let ref_pixel = match reference {
                ReferencePixel::Auto => None,
                ReferencePixel::Index(i) => Some(*i),
            };
            let curve = correlate_frames(&stack, ref_pixel, *m)?;
            write_curve_with_config(out, &curve, config)?;
            Ok(format!("wrote {} points to {}\n", curve.len(), out.display()))
        }
        RunConfig::Fit { data, template, weighting, out } => {
            let data_curve = io::read_curve(data)?;
            let template_curve = template_curve(template, data_curve.theta2())?;
            let fit = fit_offset_prefactor(&data_curve, &template_curve, *weighting)?;
            let text = serde_json::to_string_pretty(&FitReport { fit, config })? + "\n";
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            Ok(text)
        }
        RunConfig::Report { data, out } => {
            let curve = io::read_curve(data)?;
            let metrics = curve_metrics(&curve).map_err(|e| match e {
                Error::Numerical(msg) => {
                    Error::Numerical(format!("{msg} (visibility {})", visibility(&curve)))
                }
                other => other,
            })?;
            let report = MetricsReport {
                visibility: metrics.visibility,
                fwhm: metrics.fwhm,
                peak_position: metrics.peak_position,
                config,
            };
            let text = serde_json::to_string_pretty(&report)? + "\n";
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            Ok(text)
        }
    }
}

/// Loads the run configuration recorded in a sidecar (curve, report or frame stack).
pub fn load_recorded_config(path: &Path) -> Result<RunConfig> {
    let value: serde_json::Value = io::read_json(path)?;
    let inner = match value.get("config") {
        Some(c) => c.clone(),
        None => value,
    };
    Ok(serde_json::from_value(inner)?)
}

/// Resolves and executes one parsed command line.
pub fn run(cli: &Cli) -> Result<String> {
    let config = match &cli.command {
        Command::Replay(r) => {
            let mut config = load_recorded_config(&r.config)?;
            if let Some(out) = &r.out {
                config.redirect(out.clone());
            }
            config
        }
        other => resolve(other)?,
    };
    match cli.workers {
        Some(0) => Err(Error::Argument("--workers must be ≥ 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Argument(e.to_string()))?
            .install(|| execute(&config)),
        None => execute(&config),
    }
}
