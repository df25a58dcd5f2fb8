//! Fully connected feed-forward networks.
//!
//! A network with layer widths `[d, H_1, ..., H_L, 1]` computes
//! `z_l = ψ(W_l z_{l-1} + b_l)` for each hidden layer and an affine output
//! `f(x) = W_{L+1} z_L + b_{L+1}` with no activation on the last layer.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{self, Rng};

/// Multiples of the Glorot standard deviation at which sampled weights are
/// truncated (by resampling).
pub const GLOROT_TRUNCATION: f64 = 2.0;

/// Magic bytes opening every model file. The trailing digit is the format version.
pub const MODEL_MAGIC: &[u8; 6] = b"NNSIG1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative at `z`. The ReLU derivative at 0 is taken to be 0.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 - s)
            }
        }
    }

    /// Derivative at `z` when `a = ψ(z)` is already known.
    #[inline]
    pub fn derivative_given_output(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }

    /// Lipschitz constant of the activation.
    pub fn lipschitz(self) -> f64 {
        match self {
            Activation::Relu | Activation::Tanh => 1.0,
            Activation::Sigmoid => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

/// One affine map `W z + b`; `weights` is `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub(crate) weights: Matrix,
    pub(crate) biases: Vec<f64>,
}

impl Layer {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .row_iter()
                .zip(&self.biases)
                .map(|(w, b)| w.iter().zip(input).fold(*b, |acc, (wi, xi)| acc + wi * xi)),
        );
    }
}

/// Result of checking the moment condition `(1/n) Σ f(x_i)² ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCertificate {
    pub second_moment: f64,
    pub bound_m: f64,
    pub satisfied: bool,
}

/// Multilayer perceptron with one scalar output. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    activation: Activation,
}

/// Checks `[d, H_1, ..., H_L, 1]`.
pub fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Config(format!(
            "layer dims need at least an input and an output entry, got {dims:?}"
        )));
    }
    if dims.iter().any(|&w| w == 0) {
        return Err(Error::Config(format!("layer dims must be positive, got {dims:?}")));
    }
    if *dims.last().unwrap() != 1 {
        return Err(Error::Config(format!("output width must be 1, got {dims:?}")));
    }
    Ok(())
}

/// Glorot standard deviation `sqrt(2 / (d + 1))` for input dimension `d`.
pub fn glorot_sigma(input_dim: usize) -> f64 {
    (2.0 / (input_dim as f64 + 1.0)).sqrt()
}

impl Network {
    /// Network with all weights and biases zero.
    pub fn zeros(dims: &[usize], activation: Activation) -> Result<Self> {
        validate_dims(dims)?;
        let layers = dims
            .windows(2)
            .map(|w| Layer {
                weights: Matrix::zeros(w[1], w[0]),
                biases: vec![0.0; w[1]],
            })
            .collect();
        Ok(Network { layers, activation })
    }

    /// Builds a network from per-layer row-major weights (`out × in`) and biases.
    pub fn from_parts(
        dims: &[usize],
        activation: Activation,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_dims(dims)?;
        let n_layers = dims.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::Config(format!(
                "expected {n_layers} weight and bias blocks, got {} and {}",
                weights.len(),
                biases.len()
            )));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for (l, (w, b)) in weights.into_iter().zip(biases).enumerate() {
            let (inp, out) = (dims[l], dims[l + 1]);
            if b.len() != out {
                return Err(Error::Config(format!(
                    "layer {l}: bias length {} != width {out}",
                    b.len()
                )));
            }
            let weights = Matrix::from_vec(out, inp, w)
                .map_err(|e| Error::Config(format!("layer {l}: {e}")))?;
            layers.push(Layer { weights, biases: b });
        }
        Ok(Network { layers, activation })
    }

    /// Glorot-normal initialization, truncated at ±2σ by resampling, zero biases.
    pub fn init_glorot(dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut rng = rng::substream(seed, rng::domain::GLOROT_INIT, 0);
        Self::init_glorot_with(dims, activation, &mut rng)
    }

    pub fn init_glorot_with(dims: &[usize], activation: Activation, rng: &mut Rng) -> Result<Self> {
        validate_dims(dims)?;
        let sigma = glorot_sigma(dims[0]);
        let normal = Normal::new(0.0, sigma).expect("sigma is positive");
        let bound = GLOROT_TRUNCATION * sigma;
        let mut net = Network::zeros(dims, activation)?;
        for layer in &mut net.layers {
            for i in 0..layer.weights.rows() {
                for w in layer.weights.row_mut(i) {
                    *w = loop {
                        let v: f64 = normal.sample(rng);
                        if v.abs() <= bound {
                            break v;
                        }
                    };
                }
            }
        }
        Ok(net)
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// `[d, H_1, ..., H_L, 1]`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Layer::out_dim))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Widest hidden layer (0 for a purely affine network).
    pub fn width(&self) -> usize {
        self.layers[..self.depth()]
            .iter()
            .map(Layer::out_dim)
            .max()
            .unwrap_or(0)
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.biases.len())
            .sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Input(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.eval(x))
    }

    /// Forward pass without the dimension check.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_with(x, &mut Workspace::new(self))
    }

    /// Forward pass reusing `ws`.
    pub fn eval_with(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        self.forward_into(x, ws);
        ws.output()
    }

    /// Outputs on every row of `x`.
    pub fn eval_rows(&self, x: &Matrix) -> Vec<f64> {
        let mut ws = Workspace::new(self);
        x.row_iter().map(|r| self.eval_with(r, &mut ws)).collect()
    }

    /// Gradient `∂f/∂x` by reverse accumulation.
    pub fn input_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.value_and_gradient(x).1)
    }

    /// Output and input gradient from one forward and one backward sweep.
    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut ws = Workspace::new(self);
        let (v, g) = self.value_and_gradient_with(x, &mut ws);
        (v, g.to_vec())
    }

    /// As [`Network::value_and_gradient`], reusing `ws`; the gradient borrows from it.
    pub fn value_and_gradient_with<'w>(&self, x: &[f64], ws: &'w mut Workspace) -> (f64, &'w [f64]) {
        self.forward_into(x, ws);
        let v = ws.output();
        self.backpropagate(ws, 1.0, |_, _, _| {});
        (v, &ws.delta)
    }

    /// Forward pass keeping every pre-activation and layer output in `ws`.
    pub(crate) fn forward_into(&self, x: &[f64], ws: &mut Workspace) {
        debug_assert_eq!(ws.post.len(), self.layers.len() + 1);
        ws.post[0].clear();
        ws.post[0].extend_from_slice(x);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (inputs, outputs) = ws.post.split_at_mut(l + 1);
            let z = &mut ws.pre[l];
            layer.affine(&inputs[l], z);
            let a = &mut outputs[0];
            a.clear();
            if l < last {
                a.extend(z.iter().map(|&v| self.activation.apply(v)));
            } else {
                a.extend_from_slice(z);
            }
        }
    }

    /// Reverse sweep over the pass stored in `ws`, seeded with
    /// `d_output = ∂loss/∂f`. For every layer, from the output inwards,
    /// `on_layer(l, delta, layer_input)` receives the gradient w.r.t. that
    /// layer's pre-activation together with its input. Leaves the gradient
    /// w.r.t. the network input in `ws.delta`.
    pub(crate) fn backpropagate<F>(&self, ws: &mut Workspace, d_output: f64, mut on_layer: F)
    where
        F: FnMut(usize, &[f64], &[f64]),
    {
        ws.delta.clear();
        ws.delta.push(d_output);
        for l in (0..self.layers.len()).rev() {
            on_layer(l, &ws.delta, &ws.post[l]);
            let layer = &self.layers[l];
            ws.upstream.clear();
            ws.upstream.resize(layer.in_dim(), 0.0);
            for (row, d) in layer.weights.row_iter().zip(&ws.delta) {
                for (u, w) in ws.upstream.iter_mut().zip(row) {
                    *u += d * w;
                }
            }
            if l > 0 {
                let act = self.activation;
                for ((u, z), a) in ws.upstream.iter_mut().zip(&ws.pre[l - 1]).zip(&ws.post[l]) {
                    *u *= act.derivative_given_output(*z, *a);
                }
            }
            std::mem::swap(&mut ws.delta, &mut ws.upstream);
        }
    }

    /// `(1/n) Σ f(x_i)²` over the rows of `x`, checked against `bound_m`.
    pub fn second_moment(&self, x: &Matrix, bound_m: f64) -> Result<MomentCertificate> {
        if x.rows() == 0 {
            return Err(Error::Input("second moment needs at least one point".into()));
        }
        if x.cols() != self.input_dim() {
            return Err(Error::Input(format!(
                "covariates have {} columns, network expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        let mut acc = crate::linalg::CompensatedSum::default();
        let mut ws = Workspace::new(self);
        for r in x.row_iter() {
            let v = self.eval_with(r, &mut ws);
            acc.add(v * v);
        }
        let second_moment = acc.value() / x.rows() as f64;
        Ok(MomentCertificate {
            second_moment,
            bound_m,
            satisfied: second_moment <= bound_m,
        })
    }

    /// Lipschitz bound in the ∞-norm: `Π_l ‖W_l‖_∞ · L^{depth}`.
    pub fn lipschitz_bound(&self) -> f64 {
        let norms: f64 = self
            .layers
            .iter()
            .map(|l| {
                l.weights
                    .row_iter()
                    .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .product();
        norms * self.activation.lipschitz().powi(self.depth() as i32)
    }

    /// Serializes to the `NNSIG1` binary layout (see `docs/model-format.md`).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        let name = self.activation.name().as_bytes();
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name);
        out.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for d in self.dims() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for layer in &self.layers {
            for v in layer.weights.as_slice().iter().chain(&layer.biases) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        let magic = r.take(MODEL_MAGIC.len(), "magic")?;
        if &magic[..5] != b"NNSIG" {
            return Err(Error::Format("not a model file (bad magic)".into()));
        }
        if magic != MODEL_MAGIC {
            return Err(Error::Format(format!(
                "unsupported model format version '{}'",
                String::from_utf8_lossy(&magic[5..])
            )));
        }
        let name_len = r.u32("activation tag length")? as usize;
        if name_len > 64 {
            return Err(Error::Format(format!("activation tag length {name_len} is implausible")));
        }
        let name = r.take(name_len, "activation tag")?;
        let name = std::str::from_utf8(name)
            .map_err(|_| Error::Format("activation tag is not UTF-8".into()))?;
        let activation = name
            .parse::<Activation>()
            .map_err(|_| Error::Format(format!("unknown activation tag '{name}'")))?;
        let n_layers = r.u32("layer count")? as usize;
        if n_layers == 0 || n_layers > 1024 {
            return Err(Error::Format(format!("layer count {n_layers} out of range")));
        }
        let dims = (0..=n_layers)
            .map(|_| r.u32("dims").map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        validate_dims(&dims).map_err(|e| Error::Format(e.to_string()))?;
        let mut weights = Vec::with_capacity(n_layers);
        let mut biases = Vec::with_capacity(n_layers);
        for w in dims.windows(2) {
            weights.push(r.f64s(w[0] * w[1], "weights")?);
            biases.push(r.f64s(w[1], "biases")?);
        }
        if r.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after model data",
                bytes.len() - r.pos
            )));
        }
        Network::from_parts(&dims, activation, weights, biases)
            .map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Network::from_bytes(&bytes)
    }
}

/// Scratch buffers for forward and backward sweeps of one network shape.
#[derive(Debug, Clone)]
pub struct Workspace {
    /// Pre-activations per layer (the last entry is the output).
    pre: Vec<Vec<f64>>,
    /// `post[0] = x`, `post[l + 1]` is the output of layer `l`.
    post: Vec<Vec<f64>>,
    delta: Vec<f64>,
    upstream: Vec<f64>,
}

impl Workspace {
    pub fn new(net: &Network) -> Self {
        let dims = net.dims();
        let widest = dims.iter().copied().max().unwrap_or(1);
        Workspace {
            pre: dims[1..].iter().map(|&w| Vec::with_capacity(w)).collect(),
            post: dims.iter().map(|&w| Vec::with_capacity(w)).collect(),
            delta: Vec::with_capacity(widest),
            upstream: Vec::with_capacity(widest),
        }
    }

    pub(crate) fn output(&self) -> f64 {
        self.pre.last().unwrap()[0]
    }

    /// Smallest |pre-activation| over the hidden layers.
    fn min_hidden_margin(&self) -> f64 {
        let hidden = &self.pre[..self.pre.len() - 1];
        hidden
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, z| m.min(z.abs()))
    }
}

/// Smallest |pre-activation| of any hidden unit at `x`; used to stay away from
/// ReLU kinks when comparing against finite differences.
pub fn min_hidden_margin(net: &Network, x: &[f64]) -> f64 {
    let mut ws = Workspace::new(net);
    net.forward_into(x, &mut ws);
    ws.min_hidden_margin()
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format(format!(
                "truncated model file while reading {what} at byte {}",
                self.pos
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format(format!("{what} block too large")))?;
        let b = self.take(len, what)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_net() -> Network {
        // f(x) = 2 x_1 - x_2 + 3, as a one-hidden-layer net would collapse;
        // here the network has no hidden layer at all.
        Network::from_parts(&[2, 1], Activation::Tanh, vec![vec![2.0, -1.0]], vec![vec![3.0]]).unwrap()
    }

    #[test]
    fn glorot_sigma_for_three_inputs() {
        assert!((glorot_sigma(3) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn glorot_respects_truncation_and_zero_biases() {
        let net = Network::init_glorot(&[3, 16, 16, 1], Activation::Tanh, 11).unwrap();
        let bound = 2.0 * glorot_sigma(3);
        for layer in net.layers() {
            assert!(layer.weights().as_slice().iter().all(|w| w.abs() <= bound));
            assert!(layer.biases().iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn glorot_is_deterministic() {
        let a = Network::init_glorot(&[3, 5, 1], Activation::Relu, 9).unwrap();
        let b = Network::init_glorot(&[3, 5, 1], Activation::Relu, 9).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        let c = Network::init_glorot(&[3, 5, 1], Activation::Relu, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_dims_rejected() {
        for dims in [vec![3], vec![3, 0, 1], vec![3, 4, 2], vec![]] {
            let err = Network::init_glorot(&dims, Activation::Tanh, 0).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{dims:?}");
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Network::zeros(&[4, 3, 3, 1], Activation::Sigmoid).unwrap();
        assert_eq!(net.forward(&[0.3, -0.2, 1.0, -1.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_relu_unit() {
        let net = Network::from_parts(
            &[2, 1, 1],
            Activation::Relu,
            vec![vec![1.0, 0.0], vec![2.0]],
            vec![vec![0.0], vec![1.0]],
        )
        .unwrap();
        assert_eq!(net.forward(&[0.5, -0.3]).unwrap(), 2.0);
        assert_eq!(net.input_gradient(&[0.5, -0.3]).unwrap(), vec![2.0, 0.0]);
        // kink: derivative taken as 0
        assert_eq!(net.input_gradient(&[0.0, 0.7]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let net = linear_net();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Input(_))));
        assert!(matches!(net.input_gradient(&[1.0, 2.0, 3.0]), Err(Error::Input(_))));
    }

    #[test]
    fn linear_gradient_is_constant() {
        let net = linear_net();
        for x in [[0.1, 0.2], [-1.0, 1.0], [0.0, 0.0]] {
            assert_eq!(net.input_gradient(&x).unwrap(), vec![2.0, -1.0]);
            assert_eq!(net.forward(&x).unwrap(), 2.0 * x[0] - x[1] + 3.0);
        }
    }

    #[test]
    fn moment_certificates() {
        let x = Matrix::from_rows(&[[0.1, 0.2], [0.5, -0.5], [-1.0, 1.0]]).unwrap();
        let zero = Network::zeros(&[2, 3, 1], Activation::Tanh).unwrap();
        let cert = zero.second_moment(&x, 1e-9).unwrap();
        assert_eq!(cert.second_moment, 0.0);
        assert!(cert.satisfied);

        let constant = Network::from_parts(
            &[2, 1, 1],
            Activation::Tanh,
            vec![vec![0.0, 0.0], vec![0.0]],
            vec![vec![0.0], vec![-1.5]],
        )
        .unwrap();
        let cert = constant.second_moment(&x, 2.0).unwrap();
        assert_eq!(cert.second_moment, 2.25);
        assert!(!cert.satisfied);

        assert!(matches!(zero.second_moment(&Matrix::zeros(0, 2), 1.0), Err(Error::Input(_))));
    }

    #[test]
    fn bytes_round_trip() {
        let net = Network::init_glorot(&[3, 4, 2, 1], Activation::Sigmoid, 5).unwrap();
        let back = Network::from_bytes(&net.to_bytes()).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn bad_headers_are_format_errors() {
        let net = Network::init_glorot(&[2, 3, 1], Activation::Tanh, 1).unwrap();
        let bytes = net.to_bytes();

        let mut corrupt = bytes.clone();
        corrupt[0] = b'X';
        assert!(matches!(Network::from_bytes(&corrupt), Err(Error::Format(_))));

        let mut version = bytes.clone();
        version[5] = b'2';
        let msg = Network::from_bytes(&version).unwrap_err().to_string();
        assert!(msg.contains("version"), "{msg}");

        let truncated = &bytes[..bytes.len() - 3];
        let msg = Network::from_bytes(truncated).unwrap_err().to_string();
        assert!(msg.contains("truncated"), "{msg}");

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(Network::from_bytes(&trailing), Err(Error::Format(_))));
    }

    #[test]
    fn unknown_activation_tag_is_named() {
        let net = Network::init_glorot(&[2, 3, 1], Activation::Tanh, 1).unwrap();
        let mut bytes = net.to_bytes();
        // "tanh" -> "tenh"
        bytes[11] = b'e';
        let msg = Network::from_bytes(&bytes).unwrap_err().to_string();
        assert!(msg.contains("tenh"), "{msg}");
    }
}
