//! Datasets: synthetic regression data on `[-1, 1]^d` and CSV ingestion.
//!
//! Synthetic responses follow `y = f(x) + ε` with `x` uniform on the cube and
//! `ε ~ N(0, σ²)` truncated at ±4σ, so `|y| ≤ sup|f| + 4σ`.
//!
//! CSV covariates are mapped column-wise onto `[-1, 1]` with
//! `original = a_j + b_j · rescaled`. Partial derivatives in rescaled
//! coordinates are `b_j` times the original ones, so statistics scale by `b_j²`
//! and a zero derivative stays zero.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{self, Rng};

/// Noise is truncated at this many standard deviations.
pub const NOISE_TRUNCATION: f64 = 4.0;

/// Regression function used by the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    /// `f(x) = β·x + intercept`.
    Linear {
        beta: Vec<f64>,
        #[serde(default)]
        intercept: f64,
    },
    /// `f(x) = Σ_k sin(π ω_k x_k)`; a zero frequency drops the coordinate.
    SmoothSin { frequency: Vec<f64> },
    /// `base` evaluated with coordinate `dead_index` pinned to zero, so the
    /// target does not depend on that variable.
    NullVariable {
        base: Box<TargetKind>,
        dead_index: usize,
    },
}

impl TargetKind {
    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            TargetKind::Linear { beta, .. } if beta.len() != d => Err(Error::Config(format!(
                "linear target has {} coefficients but d = {d}",
                beta.len()
            ))),
            TargetKind::SmoothSin { frequency } if frequency.len() != d => {
                Err(Error::Config(format!(
                    "smooth_sin target has {} frequencies but d = {d}",
                    frequency.len()
                )))
            }
            TargetKind::NullVariable { base, dead_index } => {
                if *dead_index >= d {
                    return Err(Error::Config(format!(
                        "dead_index {dead_index} out of range for d = {d}"
                    )));
                }
                base.check_dim(d)
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TargetKind::Linear { beta, intercept } => {
                beta.iter().zip(x).fold(*intercept, |acc, (b, v)| acc + b * v)
            }
            TargetKind::SmoothSin { frequency } => frequency
                .iter()
                .zip(x)
                .map(|(w, v)| (PI * w * v).sin())
                .sum(),
            TargetKind::NullVariable { base, dead_index } => {
                let mut pinned = x.to_vec();
                pinned[*dead_index] = 0.0;
                base.eval(&pinned)
            }
        }
    }

    /// Upper bound on `sup |f|` over the cube.
    pub fn sup_bound(&self) -> f64 {
        match self {
            TargetKind::Linear { beta, intercept } => {
                intercept.abs() + beta.iter().map(|b| b.abs()).sum::<f64>()
            }
            TargetKind::SmoothSin { frequency } => frequency
                .iter()
                .map(|w| (PI * w.abs()).min(1.0))
                .sum(),
            TargetKind::NullVariable { base, .. } => base.sup_bound(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    #[serde(flatten)]
    pub kind: TargetKind,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Optional bound on |y|; generation fails if `sup|f| + 4σ` exceeds it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_y: Option<f64>,
}

impl TargetSpec {
    pub fn new(kind: TargetKind, noise_sigma: f64) -> Self {
        TargetSpec {
            kind,
            noise_sigma,
            m_y: None,
        }
    }

    /// Response bound `sup|f| + 4σ`.
    pub fn response_bound(&self) -> f64 {
        self.kind.sup_bound() + NOISE_TRUNCATION * self.noise_sigma
    }
}

/// Per-column map between original and rescaled coordinates:
/// `original = center + half_range · rescaled`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnTransform {
    pub center: f64,
    pub half_range: f64,
}

impl ColumnTransform {
    pub fn to_unit(&self, v: f64) -> f64 {
        ((v - self.center) / self.half_range).clamp(-1.0, 1.0)
    }

    pub fn to_original(&self, v: f64) -> f64 {
        self.center + self.half_range * v
    }

    /// Converts a statistic computed in rescaled coordinates back to original units.
    pub fn statistic_to_original(&self, rescaled: f64) -> f64 {
        rescaled / (self.half_range * self.half_range)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// `generated`, a CSV path, or `subset of ...`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_truncation_sigmas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_bound: Option<f64>,
    pub covariate_names: Vec<String>,
    pub target_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub transform: Option<Vec<ColumnTransform>>,
    pub meta: DatasetMeta,
}

fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("x{k}")).collect()
}

/// `n` points drawn uniformly from `[-1, 1]^d`.
pub fn uniform_covariates(n: usize, d: usize, rng: &mut Rng) -> Matrix {
    let data = (0..n * d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Matrix::from_vec(n, d, data).expect("sizes agree")
}

/// Truncated normal noise: resample until `|ε| ≤ 4σ`.
fn truncated_noise(sigma: f64, rng: &mut Rng) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite");
    loop {
        let e: f64 = normal.sample(rng);
        if e.abs() <= NOISE_TRUNCATION * sigma {
            return e;
        }
    }
}

/// Draws `n` observations of `y = f(x) + ε`.
pub fn generate(spec: &TargetSpec, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::Config(format!("generator needs n ≥ 1 and d ≥ 1, got n={n}, d={d}")));
    }
    if !(spec.noise_sigma >= 0.0) || !spec.noise_sigma.is_finite() {
        return Err(Error::Config(format!("noise_sigma must be ≥ 0, got {}", spec.noise_sigma)));
    }
    spec.kind.check_dim(d)?;
    let bound = spec.response_bound();
    if let Some(m_y) = spec.m_y {
        if bound > m_y {
            return Err(Error::Config(format!(
                "response bound sup|f| + 4σ = {bound} exceeds m_y = {m_y}"
            )));
        }
    }
    let mut cov_rng = rng::substream(seed, rng::domain::DATA_COVARIATES, 0);
    let mut noise_rng = rng::substream(seed, rng::domain::DATA_NOISE, 0);
    let x = uniform_covariates(n, d, &mut cov_rng);
    let y = x
        .row_iter()
        .map(|r| spec.kind.eval(r) + truncated_noise(spec.noise_sigma, &mut noise_rng))
        .collect();
    Ok(Dataset {
        x,
        y,
        transform: None,
        meta: DatasetMeta {
            source: "generated".into(),
            generator: Some(spec.clone()),
            seed: Some(seed),
            noise_truncation_sigmas: Some(NOISE_TRUNCATION),
            response_bound: Some(bound),
            covariate_names: default_names(d),
            target_name: "y".into(),
        },
    })
}

/// Reads a headered CSV and rescales every covariate column onto `[-1, 1]`.
///
/// Row numbers in errors count data rows from 1 (the header is not a row).
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| {
            Error::Data(format!(
                "{}: target column '{target_column}' not found in header {headers:?}",
                path.display()
            ))
        })?;
    let covariate_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if covariate_names.is_empty() {
        return Err(Error::Data(format!("{}: no covariate columns", path.display())));
    }
    let d = covariate_names.len();

    let mut raw = Vec::new();
    let mut y = Vec::new();
    let mut missing_rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "{}: row {row} has {} fields, header has {}",
                path.display(),
                record.len(),
                headers.len()
            )));
        }
        if record.iter().any(str::is_empty) {
            missing_rows.push(row);
            continue;
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    Error::Data(format!(
                        "{}: non-numeric value '{cell}' in column '{}' at row {row}",
                        path.display(),
                        headers[c]
                    ))
                })?;
            if c == target_idx {
                y.push(v);
            } else {
                raw.push(v);
            }
        }
    }
    if !missing_rows.is_empty() {
        return Err(Error::Data(format!(
            "{}: missing values in rows {missing_rows:?}",
            path.display()
        )));
    }
    if y.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let mut x = Matrix::from_vec(y.len(), d, raw)?;
    let mut transform = Vec::with_capacity(d);
    for (j, name) in covariate_names.iter().enumerate() {
        let col = x.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::Data(format!(
                "{}: covariate column '{name}' is constant",
                path.display()
            )));
        }
        let t = ColumnTransform {
            center: 0.5 * (hi + lo),
            half_range: 0.5 * (hi - lo),
        };
        for i in 0..x.rows() {
            x[(i, j)] = t.to_unit(x[(i, j)]);
        }
        transform.push(t);
    }
    Ok(Dataset {
        x,
        y,
        transform: Some(transform),
        meta: DatasetMeta {
            source: path.display().to_string(),
            covariate_names,
            target_name: target_column.to_owned(),
            ..Default::default()
        },
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => {
            let csv::ErrorKind::Io(io) = e.into_kind() else { unreachable!() };
            Error::io(PathBuf::from(path), io)
        }
        _ => Error::Data(format!("{}: {e}", path.display())),
    }
}

/// Seeded shuffle of `0..n` cut into a train and a test part.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Input(format!(
            "split of {n} rows at fraction {train_fraction} leaves an empty part"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::substream(seed, rng::domain::DATA_SPLIT, 0));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

impl Dataset {
    /// Dataset from covariates already in `[-1, 1]^d` and matching responses.
    pub fn from_parts(x: Matrix, y: Vec<f64>) -> Result<Dataset> {
        if x.rows() == 0 || x.rows() != y.len() {
            return Err(Error::Input(format!(
                "need a nonempty design with one response per row, got {} rows and {} responses",
                x.rows(),
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("row {}: response is not finite", i + 1)));
        }
        for (i, row) in x.row_iter().enumerate() {
            if row.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                return Err(Error::Data(format!("row {}: covariates must lie in [-1, 1]", i + 1)));
            }
        }
        Ok(Dataset {
            meta: DatasetMeta {
                source: "memory".into(),
                covariate_names: default_names(x.cols()),
                target_name: "y".into(),
                ..Default::default()
            },
            x,
            y,
            transform: None,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    /// Rows selected by `indices`; transform and names are carried over.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut meta = self.meta.clone();
        meta.source = format!("subset of {}", self.meta.source);
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            transform: self.transform.clone(),
            meta,
        }
    }

    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        let (train, test) = split_indices(self.n(), train_fraction, seed)?;
        Ok((self.subset(&train), self.subset(&test)))
    }

    /// Covariates in original units (identity when no transform was applied).
    pub fn original_covariates(&self) -> Matrix {
        let mut x = self.x.clone();
        if let Some(t) = &self.transform {
            for i in 0..x.rows() {
                for (v, tj) in x.row_mut(i).iter_mut().zip(t) {
                    *v = tj.to_original(*v);
                }
            }
        }
        x
    }

    /// Writes `x1,...,xd,y` (or the stored names) with full-precision values.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        let names = if self.meta.covariate_names.len() == self.d() {
            self.meta.covariate_names.clone()
        } else {
            default_names(self.d())
        };
        let target = if self.meta.target_name.is_empty() { "y" } else { &self.meta.target_name };
        writeln!(buf, "{},{target}", names.join(",")).expect("write to Vec");
        let x = self.original_covariates();
        for (row, y) in x.row_iter().zip(&self.y) {
            for v in row {
                write!(buf, "{v},").expect("write to Vec");
            }
            writeln!(buf, "{y}").expect("write to Vec");
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}
