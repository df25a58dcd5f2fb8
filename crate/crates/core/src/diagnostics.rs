//! Empirical checks of capacity and approximation behaviour.
//!
//! The empirical Rademacher complexity
//! `R̂ = E_ε sup_f |(1/n) Σ ε_i f(x_i)|` is estimated by Monte Carlo over the
//! signs, with the supremum replaced by a maximum over sampled networks. That
//! makes every estimate a lower bound on the true quantity; scaling laws
//! (`∝ 1/√n` for a fixed class) are still visible.

use std::io::Write;
use std::path::Path;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, TargetKind, TargetSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{Activation, Network};
use crate::rng;
use crate::training::{self, ArchSpec, TrainConfig, Width};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub value: f64,
    pub n: usize,
    pub n_eps: usize,
    pub n_class: usize,
    pub std_error: f64,
}

/// A point dropped from a rate regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPoint {
    pub x: f64,
    pub reason: String,
}

/// Errors against a grid of widths or sample sizes, with the OLS slope of
/// `log error` on `log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub x_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub log_log_slope: f64,
    pub slope_stderr: f64,
    /// Per-point Monte-Carlo standard errors, when the errors are estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_std_errors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<ExcludedPoint>,
}

impl RateReport {
    /// `slope + k · stderr`.
    pub fn slope_upper(&self, k: f64) -> f64 {
        self.log_log_slope + k * self.slope_stderr
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, x_name: &str) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        writeln!(buf, "{x_name},error").expect("write to Vec");
        for (x, e) in self.x_values.iter().zip(&self.errors) {
            writeln!(buf, "{x},{e}").expect("write to Vec");
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Produces the outputs of sampled class members on a point set.
pub trait ClassSampler {
    /// `n_class` rows, each holding one function's values on the rows of `x`.
    /// Member `k` must not depend on `n_class`, so larger samples nest smaller ones.
    fn outputs(&self, x: &Matrix, n_class: usize, seed: u64) -> Result<Vec<Vec<f64>>>;
}

/// Truncated-Glorot networks of a fixed architecture.
#[derive(Debug, Clone)]
pub struct GlorotClass {
    pub dims: Vec<usize>,
    pub activation: Activation,
}

impl GlorotClass {
    pub fn member(&self, k: usize, seed: u64) -> Result<Network> {
        let mut rng = rng::substream(seed, rng::domain::EXPERIMENT, k as u64);
        Network::init_glorot_with(&self.dims, self.activation, &mut rng)
    }
}

impl ClassSampler for GlorotClass {
    fn outputs(&self, x: &Matrix, n_class: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if x.cols() != self.dims[0] {
            return Err(Error::Input(format!(
                "points have {} columns, class expects {}",
                x.cols(),
                self.dims[0]
            )));
        }
        (0..n_class)
            .into_par_iter()
            .map(|k| Ok(self.member(k, seed)?.eval_rows(x)))
            .collect()
    }
}

/// A fixed list of functions; sampling takes the first `n_class`.
pub struct FixedClass<F>(pub Vec<F>);

impl<F: Fn(&[f64]) -> f64> ClassSampler for FixedClass<F> {
    fn outputs(&self, x: &Matrix, n_class: usize, _seed: u64) -> Result<Vec<Vec<f64>>> {
        if n_class > self.0.len() {
            return Err(Error::Config(format!(
                "class has {} members, {n_class} requested",
                self.0.len()
            )));
        }
        Ok(self.0[..n_class]
            .iter()
            .map(|f| x.row_iter().map(f).collect())
            .collect())
    }
}

/// Rademacher signs of draw `t` for `n` points. Independent of the class, so
/// estimates for nested classes share their draws.
pub fn rademacher_signs(seed: u64, t: usize, n: usize) -> Vec<f64> {
    let mut r = rng::substream(seed, rng::domain::RADEMACHER, t as u64);
    (0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Monte-Carlo Rademacher estimate from function values.
pub fn estimate_rademacher_from_outputs(outputs: &[Vec<f64>], n: usize, n_eps: usize, seed: u64) -> Result<RademacherEstimate> {
    if n_eps == 0 || outputs.is_empty() || n == 0 {
        return Err(Error::Config("n_eps, n_class and n must be at least 1".into()));
    }
    let sups: Vec<f64> = (0..n_eps)
        .into_par_iter()
        .map(|t| {
            let eps = rademacher_signs(seed, t, n);
            outputs
                .iter()
                .map(|f| (f.iter().zip(&eps).map(|(v, e)| v * e).sum::<f64>() / n as f64).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let mean = sups.iter().sum::<f64>() / n_eps as f64;
    let std_error = if n_eps > 1 {
        let var = sups.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n_eps - 1) as f64;
        (var / n_eps as f64).sqrt()
    } else {
        0.0
    };
    Ok(RademacherEstimate {
        value: mean,
        n,
        n_eps,
        n_class: outputs.len(),
        std_error,
    })
}

pub fn estimate_rademacher<S: ClassSampler + ?Sized>(
    class: &S,
    x: &Matrix,
    n_eps: usize,
    n_class: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if n_class == 0 {
        return Err(Error::Config("n_class must be at least 1".into()));
    }
    let outputs = class.outputs(x, n_class, seed)?;
    estimate_rademacher_from_outputs(&outputs, x.rows(), n_eps, seed)
}

/// Localization radius `H L^{L_d} / √n`.
pub fn localization_radius(width: usize, lipschitz: f64, depth: usize, n: usize) -> f64 {
    width as f64 * lipschitz.powi(depth as i32) / (n as f64).sqrt()
}

/// Indices of the networks within squared empirical distance `r` of `reference`.
pub fn localize(nets: &[Network], reference: &Network, x: &Matrix, r: f64) -> Result<Vec<usize>> {
    if !(r >= 0.0) {
        return Err(Error::Config(format!("localization radius must be ≥ 0, got {r}")));
    }
    if x.rows() == 0 {
        return Err(Error::Input("localization needs at least one point".into()));
    }
    let base = reference.eval_rows(x);
    Ok(nets
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            let d2 = f
                .eval_rows(x)
                .iter()
                .zip(&base)
                .map(|(v, b)| (v - b).powi(2))
                .sum::<f64>()
                / x.rows() as f64;
            d2 <= r
        })
        .map(|(i, _)| i)
        .collect())
}

/// OLS fit of `log y` on `log x`: (slope, stderr of slope).
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Numerical(format!(
            "slope regression needs at least 3 points, got {}",
            x.len().min(y.len())
        )));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Numerical("log-log regression needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Numerical("x values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

/// Settings shared by the rate experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproximationConfig {
    pub target: TargetKind,
    pub d: usize,
    pub widths: Vec<usize>,
    pub n: usize,
    pub depth: usize,
    pub activation: Activation,
    pub training: TrainConfig,
}

impl Default for ApproximationConfig {
    fn default() -> Self {
        ApproximationConfig {
            target: TargetKind::SmoothSin { frequency: vec![1.0, 0.0] },
            d: 2,
            widths: vec![4, 8, 16, 32],
            n: 4000,
            depth: 1,
            activation: Activation::Tanh,
            // a fixed budget without early stopping, so every width trains for as long
            training: TrainConfig {
                epochs: 600,
                tolerance: 0.0,
                ..TrainConfig::default()
            },
        }
    }
}

/// Fits one network per width on half of a noiseless sample and reports the
/// held-out RMSE against the target. Widths whose fit diverges are excluded
/// from the regression and listed in the report.
pub fn approximation_rate_experiment(cfg: &ApproximationConfig, seed: u64) -> Result<RateReport> {
    if cfg.widths.len() < 3 || cfg.widths.windows(2).any(|w| w[1] <= w[0]) || cfg.widths[0] == 0 {
        return Err(Error::Config(format!(
            "widths must be ≥ 3 strictly increasing positive entries, got {:?}",
            cfg.widths
        )));
    }
    let spec = TargetSpec::new(cfg.target.clone(), 0.0);
    let sample = data::generate(&spec, cfg.n, cfg.d, seed)?;
    let (train, test) = sample.split(0.5, seed)?;
    let fits: Vec<(usize, Result<f64>)> = cfg
        .widths
        .par_iter()
        .map(|&h| {
            let arch = ArchSpec {
                depth: cfg.depth,
                width: Width::Fixed(h),
                activation: cfg.activation,
                ..ArchSpec::default()
            };
            let fitted = training::fit_least_squares(&train, &arch, &cfg.training);
            let rmse = fitted.map(|f| {
                let mse = test
                    .x
                    .row_iter()
                    .zip(&test.y)
                    .map(|(r, y)| (f.net.eval(r) - y).powi(2))
                    .sum::<f64>()
                    / test.n() as f64;
                mse.sqrt()
            });
            (h, rmse)
        })
        .collect();

    let mut x_values = Vec::new();
    let mut errors = Vec::new();
    let mut excluded = Vec::new();
    for (h, res) in fits {
        match res {
            Ok(e) if e.is_finite() && e > 0.0 => {
                x_values.push(h as f64);
                errors.push(e);
            }
            Ok(e) => excluded.push(ExcludedPoint {
                x: h as f64,
                reason: format!("non-positive or non-finite error {e}"),
            }),
            Err(err @ Error::Divergence { .. }) => excluded.push(ExcludedPoint {
                x: h as f64,
                reason: err.to_string(),
            }),
            Err(err) => return Err(err),
        }
    }
    for ex in &excluded {
        eprintln!("warning: width {} excluded from rate regression: {}", ex.x, ex.reason);
    }
    let (slope, stderr) = log_log_slope(&x_values, &errors)?;
    Ok(RateReport {
        x_values,
        errors,
        log_log_slope: slope,
        slope_stderr: stderr,
        point_std_errors: None,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityConfig {
    /// Layer widths of the sampled class.
    pub dims: Vec<usize>,
    pub activation: Activation,
    pub n_list: Vec<usize>,
    pub n_eps: usize,
    pub n_class: usize,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        ComplexityConfig {
            dims: vec![3, 8, 8, 1],
            activation: Activation::Tanh,
            n_list: vec![250, 1000, 4000],
            n_eps: 200,
            n_class: 50,
        }
    }
}

/// Rademacher estimates of one fixed Glorot class at increasing sample sizes.
pub fn complexity_scaling_experiment(cfg: &ComplexityConfig, seed: u64) -> Result<RateReport> {
    if cfg.n_list.len() < 3 || cfg.n_list.windows(2).any(|w| w[1] <= w[0]) || cfg.n_list[0] == 0 {
        return Err(Error::Config(format!(
            "n_list must be ≥ 3 strictly increasing positive entries, got {:?}",
            cfg.n_list
        )));
    }
    crate::network::validate_dims(&cfg.dims)?;
    let class = GlorotClass {
        dims: cfg.dims.clone(),
        activation: cfg.activation,
    };
    let d = cfg.dims[0];
    let mut x_values = Vec::new();
    let mut errors = Vec::new();
    let mut point_se = Vec::new();
    for (k, &n) in cfg.n_list.iter().enumerate() {
        let mut pts = rng::substream(seed, rng::domain::DATA_COVARIATES, k as u64);
        let x = data::uniform_covariates(n, d, &mut pts);
        let est = estimate_rademacher(&class, &x, cfg.n_eps, cfg.n_class, seed)?;
        x_values.push(n as f64);
        errors.push(est.value);
        point_se.push(est.std_error);
    }
    let (slope, stderr) = log_log_slope(&x_values, &errors)?;
    Ok(RateReport {
        x_values,
        errors,
        log_log_slope: slope,
        slope_stderr: stderr,
        point_std_errors: Some(point_se),
        excluded: Vec::new(),
    })
}
