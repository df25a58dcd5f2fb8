//! Least-squares fitting over the network class.
//!
//! The estimator minimizes `(1/n) Σ ½ (y_i − f(x_i))²` by mini-batch gradient
//! descent with per-epoch geometric learning-rate decay and global gradient
//! norm clipping. Batches follow a seeded per-epoch permutation and every sum
//! runs in index order, so a fit is a pure function of (data, config, seed).

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{Activation, MomentCertificate, Network, Workspace};
use crate::rng;

/// Epochs over which relative improvement is measured for early stopping.
pub const PLATEAU_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Multiplier applied to the learning rate after every epoch.
    pub lr_decay: f64,
    pub seed: u64,
    /// Stop once the loss improved by less than this fraction over the last
    /// `PLATEAU_WINDOW` epochs. Zero disables early stopping.
    pub tolerance: f64,
    pub max_grad_norm: f64,
    /// Bound `M` for the moment certificate; defaults to `max y²`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moment_bound: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 400,
            batch_size: 32,
            learning_rate: 0.05,
            lr_decay: 0.995,
            seed: 0,
            tolerance: 1e-4,
            max_grad_norm: 10.0,
            moment_bound: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::Config(format!("lr_decay must lie in (0, 1], got {}", self.lr_decay)));
        }
        if !(self.tolerance >= 0.0) || !(self.max_grad_norm > 0.0) {
            return Err(Error::Config("tolerance must be ≥ 0 and max_grad_norm > 0".into()));
        }
        Ok(())
    }
}

/// Hidden-layer width: fixed, or `max(2, ⌈c · n^exponent⌉)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WidthRepr", into = "WidthRepr")]
pub enum Width {
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WidthRepr {
    Fixed(usize),
    Name(String),
}

impl TryFrom<WidthRepr> for Width {
    type Error = String;

    fn try_from(r: WidthRepr) -> std::result::Result<Self, String> {
        match r {
            WidthRepr::Fixed(0) => Err("width must be positive".into()),
            WidthRepr::Fixed(w) => Ok(Width::Fixed(w)),
            WidthRepr::Name(s) if s == "auto" => Ok(Width::Auto),
            WidthRepr::Name(s) => Err(format!("width must be an integer or \"auto\", got '{s}'")),
        }
    }
}

impl From<Width> for WidthRepr {
    fn from(w: Width) -> Self {
        match w {
            Width::Auto => WidthRepr::Name("auto".into()),
            Width::Fixed(w) => WidthRepr::Fixed(w),
        }
    }
}

/// Architecture of the fitted network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchSpec {
    /// Number of hidden layers.
    pub depth: usize,
    pub width: Width,
    pub activation: Activation,
    /// Constant `c` of the automatic width schedule.
    pub width_c: f64,
    /// Exponent of the automatic width schedule.
    pub width_exponent: f64,
}

impl Default for ArchSpec {
    fn default() -> Self {
        ArchSpec {
            depth: 2,
            width: Width::Auto,
            activation: Activation::Sigmoid,
            width_c: 1.0,
            width_exponent: 0.25,
        }
    }
}

impl ArchSpec {
    pub fn resolve_width(&self, n: usize) -> usize {
        match self.width {
            Width::Fixed(w) => w,
            Width::Auto => width_schedule_with(n, self.width_c, self.width_exponent),
        }
    }

    /// `[d, H, ..., H, 1]` for sample size `n`.
    pub fn layer_dims(&self, d: usize, n: usize) -> Vec<usize> {
        let h = self.resolve_width(n);
        std::iter::once(d)
            .chain(std::iter::repeat_n(h, self.depth))
            .chain(std::iter::once(1))
            .collect()
    }
}

/// `H_n = max(2, ⌈c · n^{1/4}⌉)`, which keeps `H_n L^{L_d} / √n → 0` for fixed depth.
pub fn width_schedule(n: usize, c: f64) -> usize {
    width_schedule_with(n, c, 0.25)
}

pub fn width_schedule_with(n: usize, c: f64, exponent: f64) -> usize {
    let raw = c * (n as f64).powf(exponent);
    // 10000^0.25 evaluates a hair above 10
    let h = (raw - 1e-9).ceil().max(2.0);
    h as usize
}

/// A fitted least-squares network and its training record.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub net: Network,
    /// Full-data loss after each epoch.
    pub train_loss_history: Vec<f64>,
    pub final_empirical_risk: f64,
    pub width_used: usize,
    pub moment: MomentCertificate,
    pub epochs_run: usize,
}

impl FittedModel {
    /// Wraps an existing network (for example one loaded from disk).
    pub fn from_network(net: Network, data: &Dataset, moment_bound: Option<f64>) -> Result<Self> {
        let risk = quadratic_loss(&net, &data.x, &data.y)?;
        let bound = moment_bound.unwrap_or_else(|| default_moment_bound(&data.y));
        let moment = net.second_moment(&data.x, bound)?;
        Ok(FittedModel {
            width_used: net.width(),
            net,
            train_loss_history: Vec::new(),
            final_empirical_risk: risk,
            moment,
            epochs_run: 0,
        })
    }

    /// Residual variance estimate `2 · risk` (the mean squared residual).
    pub fn sigma2_hat(&self) -> f64 {
        2.0 * self.final_empirical_risk
    }

    /// `epoch,loss` lines with a header.
    pub fn write_loss_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        writeln!(buf, "epoch,loss").expect("write to Vec");
        for (e, l) in self.train_loss_history.iter().enumerate() {
            writeln!(buf, "{},{l}", e + 1).expect("write to Vec");
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

fn default_moment_bound(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).fold(0.0, f64::max)
}

/// `(1/n) Σ ½ (y_i − f(x_i))²`.
pub fn quadratic_loss(net: &Network, x: &Matrix, y: &[f64]) -> Result<f64> {
    if x.rows() != y.len() || y.is_empty() {
        return Err(Error::Input(format!(
            "quadratic loss needs matching nonempty inputs, got {} rows and {} responses",
            x.rows(),
            y.len()
        )));
    }
    if x.cols() != net.input_dim() {
        return Err(Error::Input(format!(
            "covariates have {} columns, network expects {}",
            x.cols(),
            net.input_dim()
        )));
    }
    let mut ws = Workspace::new(net);
    let total: f64 = x
        .row_iter()
        .zip(y)
        .map(|(r, yi)| {
            let e = yi - net.eval_with(r, &mut ws);
            0.5 * e * e
        })
        .sum();
    Ok(total / y.len() as f64)
}

/// Parameter gradients, laid out like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl ParamGrads {
    fn zeros_like(net: &Network) -> Self {
        ParamGrads {
            weights: net
                .layers()
                .iter()
                .map(|l| Matrix::zeros(l.out_dim(), l.in_dim()))
                .collect(),
            biases: net.layers().iter().map(|l| vec![0.0; l.out_dim()]).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.as_slice())
            .chain(self.biases.iter().flatten())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Gradient of the mean quadratic loss over `rows` w.r.t. every parameter.
pub fn loss_gradient(net: &Network, x: &Matrix, y: &[f64], rows: &[usize]) -> ParamGrads {
    let mut grads = ParamGrads::zeros_like(net);
    let mut ws = Workspace::new(net);
    let scale = 1.0 / rows.len() as f64;
    for &i in rows {
        net.forward_into(x.row(i), &mut ws);
        let d_out = (ws.output() - y[i]) * scale;
        net.backpropagate(&mut ws, d_out, |l, delta, input| {
            let gw = &mut grads.weights[l];
            for (k, d) in delta.iter().enumerate() {
                for (g, a) in gw.row_mut(k).iter_mut().zip(input) {
                    *g += d * a;
                }
                grads.biases[l][k] += d;
            }
        });
    }
    grads
}

/// One clipped gradient-descent step on the given rows.
pub fn gradient_step(
    net: &mut Network,
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    learning_rate: f64,
    max_grad_norm: f64,
) {
    let grads = loss_gradient(net, x, y, rows);
    let norm = grads.norm();
    let step = if norm > max_grad_norm {
        learning_rate * max_grad_norm / norm
    } else {
        learning_rate
    };
    for (layer, (gw, gb)) in net.layers_mut().iter_mut().zip(grads.weights.iter().zip(&grads.biases)) {
        for i in 0..gw.rows() {
            for (w, g) in layer.weights.row_mut(i).iter_mut().zip(gw.row(i)) {
                *w -= step * g;
            }
        }
        for (b, g) in layer.biases.iter_mut().zip(gb) {
            *b -= step * g;
        }
    }
}

/// Fits the least-squares network on `data`.
///
/// The returned network is the best full-data iterate; if none beats the
/// all-zero network, the zero network is returned, so the empirical risk never
/// exceeds that baseline.
pub fn fit_least_squares(data: &Dataset, arch: &ArchSpec, cfg: &TrainConfig) -> Result<FittedModel> {
    cfg.validate()?;
    let n = data.n();
    if n == 0 {
        return Err(Error::Input("cannot fit on an empty dataset".into()));
    }
    if cfg.batch_size > n {
        return Err(Error::Config(format!(
            "batch_size {} exceeds sample size {n}",
            cfg.batch_size
        )));
    }
    let dims = arch.layer_dims(data.d(), n);
    let mut net = Network::init_glorot(&dims, arch.activation, cfg.seed)?;
    let zero = Network::zeros(&dims, arch.activation)?;
    let zero_risk = quadratic_loss(&zero, &data.x, &data.y)?;

    let mut best = net.clone();
    let mut best_loss = quadratic_loss(&net, &data.x, &data.y)?;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut lr = cfg.learning_rate;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.epochs {
        let mut shuffle = rng::substream(cfg.seed, rng::domain::TRAIN_SHUFFLE, epoch as u64);
        order.shuffle(&mut shuffle);
        for batch in order.chunks(cfg.batch_size) {
            gradient_step(&mut net, &data.x, &data.y, batch, lr, cfg.max_grad_norm);
        }
        let loss = quadratic_loss(&net, &data.x, &data.y)?;
        if !loss.is_finite() {
            return Err(Error::Divergence {
                epoch: epoch + 1,
                learning_rate: lr,
                loss,
            });
        }
        history.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best = net.clone();
        }
        lr *= cfg.lr_decay;
        if loss == 0.0 {
            break;
        }
        if cfg.tolerance > 0.0 && history.len() > PLATEAU_WINDOW {
            let past = history[history.len() - 1 - PLATEAU_WINDOW];
            if (past - loss) < cfg.tolerance * past {
                break;
            }
        }
    }

    if best_loss > zero_risk {
        best = zero;
        best_loss = zero_risk;
    }
    let bound = cfg.moment_bound.unwrap_or_else(|| default_moment_bound(&data.y));
    let moment = best.second_moment(&data.x, bound)?;
    Ok(FittedModel {
        width_used: best.width(),
        epochs_run: history.len(),
        net: best,
        train_loss_history: history,
        final_empirical_risk: best_loss,
        moment,
    })
}
