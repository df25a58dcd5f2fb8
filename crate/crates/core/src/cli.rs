//! Command-line workflows: generate, train, test and diagnose.
//!
//! Everything a run needs lives in one TOML file (see `docs/config.md`). The
//! `--seed` and `--out` flags are the only overrides. Each command writes its
//! artifacts into the output directory and a JSON report that echoes the
//! resolved configuration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, TargetSpec};
use crate::diagnostics::{self, ApproximationConfig, ComplexityConfig, RateReport};
use crate::error::{Error, Result};
use crate::network::{MomentCertificate, Network, GLOROT_TRUNCATION};
use crate::nulldist::{self, NullConfig, SigmaScale, TestResult};
use crate::significance::{Normalization, RateConstants, StatConfig};
use crate::training::{self, ArchSpec, FittedModel, TrainConfig};

pub const DATA_FILE: &str = "data.csv";
pub const MODEL_FILE: &str = "model.nnsig";
pub const LOSS_FILE: &str = "loss.csv";
pub const TRAIN_REPORT: &str = "train_summary.json";
pub const TEST_REPORT: &str = "report.json";
pub const DIAGNOSTICS_REPORT: &str = "diagnostics.json";
pub const APPROXIMATION_CSV: &str = "approximation_rate.csv";
pub const COMPLEXITY_CSV: &str = "complexity_scaling.csv";

#[derive(Debug, Parser)]
#[command(name = "nnsig", version, about = "Variable significance tests for neural network regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset from `[data.generator]`.
    Generate(CommonArgs),
    /// Fit the least-squares network and save it.
    Train(CommonArgs),
    /// Fit (or load) a network and test the configured variables.
    Test(CommonArgs),
    /// Run the enabled rate experiments.
    Diagnose(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub architecture: ArchSpec,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub test: TestSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// CSV file, relative paths resolved against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Target column of the CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSection {
    pub n: usize,
    pub d: usize,
    #[serde(flatten)]
    pub spec: TargetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSection {
    /// Zero-based variable indices; empty means all.
    pub variables: Vec<usize>,
    /// Saved model to test instead of fitting one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    pub normalization: Normalization,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateConstants>,
    /// Write one null-sample CSV per variable next to the report.
    pub write_null_samples: bool,
    pub null: NullConfig,
}

impl Default for TestSection {
    fn default() -> Self {
        TestSection {
            variables: Vec::new(),
            model: None,
            normalization: Normalization::Identity,
            rate: None,
            write_null_samples: true,
            null: NullConfig::default(),
        }
    }
}

impl TestSection {
    pub fn stat_config(&self) -> StatConfig {
        StatConfig {
            normalization: self.normalization,
            rate: self.rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub approximation: bool,
    pub complexity: bool,
    pub approximation_experiment: ApproximationConfig,
    pub complexity_experiment: ComplexityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("nnsig-out") }
    }
}

impl RunConfig {
    /// Parses a config. `training.seed` and `test.null.seed` default to the
    /// master seed when they are not given.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let master = match value.get("seed") {
            None => 0,
            Some(toml::Value::Integer(s)) if *s >= 0 => *s as u64,
            Some(other) => return Err(Error::Config(format!("seed must be a nonnegative integer, got {other}"))),
        };
        let seed = toml::Value::Integer(master as i64);
        let training = table_entry(&mut value, "training")?;
        training.entry("seed").or_insert_with(|| seed.clone());
        let null = table_entry(table_entry(&mut value, "test")?, "null")?;
        null.entry("seed").or_insert(seed);
        let cfg: RunConfig = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads a config file; relative data and model paths become relative to its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [cfg.data.path.as_mut(), cfg.test.model.as_mut()].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Replaces the master seed and every seed derived from it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.training.seed = seed;
        self.test.null.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.data.path, &self.data.generator) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("[data] sets both path and generator; choose one".into()));
            }
            (Some(_), None) if self.data.target.is_none() => {
                return Err(Error::Config("[data] path needs a target column name".into()));
            }
            _ => {}
        }
        if self.architecture.depth == 0 {
            return Err(Error::Config("[architecture] depth must be at least 1".into()));
        }
        self.training.validate()?;
        self.test.null.validate()?;
        self.test.stat_config().validate()
    }

    fn generator(&self) -> Result<&GeneratorSection> {
        self.data
            .generator
            .as_ref()
            .ok_or_else(|| Error::Config("missing [data.generator] section".into()))
    }

    /// The dataset described by `[data]`.
    pub fn load_data(&self) -> Result<Dataset> {
        match (&self.data.path, &self.data.generator) {
            (Some(path), None) => {
                let target = self.data.target.as_deref().unwrap_or("y");
                data::load_csv(path, target)
            }
            (None, Some(g)) => data::generate(&g.spec, g.n, g.d, self.seed),
            (None, None) => Err(Error::Config(
                "missing [data] section: set path and target, or [data.generator]".into(),
            )),
            (Some(_), Some(_)) => Err(Error::Config("[data] sets both path and generator; choose one".into())),
        }
    }
}

fn table_entry<'a>(t: &'a mut toml::Table, key: &str) -> Result<&'a mut toml::Table> {
    match t.entry(key).or_insert_with(|| toml::Value::Table(Default::default())) {
        toml::Value::Table(inner) => Ok(inner),
        _ => Err(Error::Config(format!("'{key}' must be a table"))),
    }
}

/// Settings that the method leaves open, as used in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenChoices {
    pub normalization: Normalization,
    pub sigma_scale: SigmaScale,
    pub glorot_truncation_sigmas: f64,
    pub noise_truncation_sigmas: f64,
}

impl OpenChoices {
    fn of(cfg: &RunConfig) -> Self {
        OpenChoices {
            normalization: cfg.test.normalization,
            sigma_scale: cfg.test.null.sigma_scale,
            glorot_truncation_sigmas: GLOROT_TRUNCATION,
            noise_truncation_sigmas: data::NOISE_TRUNCATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub dims: Vec<usize>,
    pub activation: String,
    pub width: usize,
    pub depth: usize,
    pub final_risk: f64,
    pub epochs_run: usize,
    pub moment: MomentCertificate,
}

impl ModelSummary {
    fn of(fit: &FittedModel) -> Self {
        ModelSummary {
            dims: fit.net.dims(),
            activation: fit.net.activation().to_string(),
            width: fit.width_used,
            depth: fit.net.depth(),
            final_risk: fit.final_empirical_risk,
            epochs_run: fit.epochs_run,
            moment: fit.moment,
        }
    }
}

/// Wall-clock seconds per stage; not reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub data_s: f64,
    pub train_s: f64,
    pub test_s: f64,
    pub diagnostics_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: ModelSummary,
    pub model_path: PathBuf,
    pub config: RunConfig,
    pub version: String,
    pub timings: Timings,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub results: Vec<TestResult>,
    /// Raw statistics in the CSV's original units, when the data were rescaled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_original_units: Option<Vec<f64>>,
    pub model: ModelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsReport>,
    pub open_choices: OpenChoices,
    pub config: RunConfig,
    pub version: String,
    pub timings: Timings,
    pub timestamp: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximation: Option<RateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<RateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub diagnostics: DiagnosticsReport,
    pub config: RunConfig,
    pub version: String,
    pub timings: Timings,
    pub timestamp: String,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `data.csv` from `[data.generator]`.
pub fn cmd_generate(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let g = cfg.generator()?;
    let ds = data::generate(&g.spec, g.n, g.d, cfg.seed)?;
    create_dir(&cfg.output.dir)?;
    let path = cfg.output.dir.join(DATA_FILE);
    ds.write_csv(&path)?;
    Ok(path)
}

/// Fits the network; writes the model, its loss curve and a summary.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport> {
    cfg.validate()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let ds = cfg.load_data()?;
    timings.data_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let fit = training::fit_least_squares(&ds, &cfg.architecture, &cfg.training)?;
    timings.train_s = t.elapsed().as_secs_f64();

    create_dir(&cfg.output.dir)?;
    let model_path = cfg.output.dir.join(MODEL_FILE);
    fit.net.save(&model_path)?;
    fit.write_loss_csv(cfg.output.dir.join(LOSS_FILE))?;
    let report = TrainReport {
        model: ModelSummary::of(&fit),
        model_path,
        config: cfg.clone(),
        version: crate::VERSION.to_owned(),
        timings,
        timestamp: now(),
    };
    write_json(&cfg.output.dir.join(TRAIN_REPORT), &report)?;
    Ok(report)
}

fn variables(cfg: &RunConfig, d: usize) -> Result<Vec<usize>> {
    if cfg.test.variables.is_empty() {
        return Ok((0..d).collect());
    }
    if let Some(&j) = cfg.test.variables.iter().find(|&&j| j >= d) {
        return Err(Error::Config(format!("[test] variable {j} out of range for d = {d}")));
    }
    Ok(cfg.test.variables.clone())
}

/// Fits or loads the model and tests the configured variables.
pub fn cmd_test(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let ds = cfg.load_data()?;
    let vars = variables(cfg, ds.d())?;
    timings.data_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let fit = match &cfg.test.model {
        Some(path) => FittedModel::from_network(Network::load(path)?, &ds, cfg.training.moment_bound)?,
        None => training::fit_least_squares(&ds, &cfg.architecture, &cfg.training)?,
    };
    timings.train_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let results = nulldist::significance_tests(&fit, &ds, &vars, &cfg.test.null, &cfg.test.stat_config())?;
    timings.test_s = t.elapsed().as_secs_f64();

    create_dir(&cfg.output.dir)?;
    if cfg.test.write_null_samples {
        for r in &results {
            let path = cfg.output.dir.join(format!("null_samples_{}.csv", r.variable_index));
            std::fs::write(&path, r.null_samples_csv()).map_err(|e| Error::io(&path, e))?;
        }
    }
    let raw_original_units = ds.transform.as_ref().map(|tr| {
        results
            .iter()
            .map(|r| tr[r.variable_index].statistic_to_original(r.observed.raw))
            .collect()
    });
    let report = Report {
        results,
        raw_original_units,
        model: ModelSummary::of(&fit),
        diagnostics: None,
        open_choices: OpenChoices::of(cfg),
        config: cfg.clone(),
        version: crate::VERSION.to_owned(),
        timings,
        timestamp: now(),
    };
    write_json(&cfg.output.dir.join(TEST_REPORT), &report)?;
    Ok(report)
}

/// Runs the enabled experiments; disabled ones are left out of the report.
pub fn cmd_diagnose(cfg: &RunConfig) -> Result<DiagnoseReport> {
    cfg.validate()?;
    let t = Instant::now();
    let dg = &cfg.diagnostics;
    create_dir(&cfg.output.dir)?;
    let mut out = DiagnosticsReport::default();
    if dg.approximation {
        let rep = diagnostics::approximation_rate_experiment(&dg.approximation_experiment, cfg.seed)?;
        rep.write_csv(cfg.output.dir.join(APPROXIMATION_CSV), "width")?;
        out.approximation = Some(rep);
    }
    if dg.complexity {
        let rep = diagnostics::complexity_scaling_experiment(&dg.complexity_experiment, cfg.seed)?;
        rep.write_csv(cfg.output.dir.join(COMPLEXITY_CSV), "n")?;
        out.complexity = Some(rep);
    }
    let report = DiagnoseReport {
        diagnostics: out,
        config: cfg.clone(),
        version: crate::VERSION.to_owned(),
        timings: Timings {
            diagnostics_s: t.elapsed().as_secs_f64(),
            ..Default::default()
        },
        timestamp: now(),
    };
    write_json(&cfg.output.dir.join(DIAGNOSTICS_REPORT), &report)?;
    Ok(report)
}

/// Loads the config named on the command line and applies the overrides.
pub fn resolve(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

/// Runs a parsed command line and returns a one-line summary.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Generate(args) => {
            let path = cmd_generate(&resolve(&args)?)?;
            Ok(format!("wrote {}", path.display()))
        }
        Command::Train(args) => {
            let r = cmd_train(&resolve(&args)?)?;
            Ok(format!(
                "width {} risk {:.6e} after {} epochs; model {}",
                r.model.width,
                r.model.final_risk,
                r.model.epochs_run,
                r.model_path.display()
            ))
        }
        Command::Test(args) => {
            let cfg = resolve(&args)?;
            let r = cmd_test(&cfg)?;
            let mut lines: Vec<String> = r
                .results
                .iter()
                .map(|t| format!("x{}: T = {:.6e}  p = {:.4}", t.variable_index + 1, t.observed.normalized, t.p_value))
                .collect();
            lines.push(format!("report {}", cfg.output.dir.join(TEST_REPORT).display()));
            Ok(lines.join("\n"))
        }
        Command::Diagnose(args) => {
            let cfg = resolve(&args)?;
            let r = cmd_diagnose(&cfg)?;
            let mut lines = Vec::new();
            for (name, rep) in [("approximation", &r.diagnostics.approximation), ("complexity", &r.diagnostics.complexity)] {
                if let Some(rep) = rep {
                    lines.push(format!("{name}: slope {:.3} ± {:.3}", rep.log_log_slope, rep.slope_stderr));
                }
            }
            lines.push(format!("report {}", cfg.output.dir.join(DIAGNOSTICS_REPORT).display()));
            Ok(lines.join("\n"))
        }
    }
}
