//! Monte-Carlo null distribution of the test statistic.
//!
//! 1. Sample `m` networks with the fitted architecture from the truncated
//!    Glorot distribution.
//! 2. Form `Σ̂_{lk} = (1/n) Σ_i f_l(x_i) f_k(x_i)`, draw `z ~ N(0, Σ̂)` and pick
//!    the network at `argmax z`.
//! 3. The null sample is the statistic of the picked network.
//!
//! One network set and one `Σ̂` serve all `n_p` draws, and every network's
//! statistic is computed once up front, so a draw only costs a triangular
//! matrix-vector product. Draw `r` for variable `j` uses its own RNG stream
//! (see [`draw_stream`]), which makes results independent of thread count.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};
use crate::network::{Activation, Network, GLOROT_TRUNCATION};
use crate::rng::{self, Rng};
use crate::significance::{self, StatConfig, VariableStatistic};
use crate::training::FittedModel;

/// Relative jitter ladder: `0`, then `1e-10 · tr/m` up to `1e-6 · tr/m` by ×10.
pub const JITTER_MIN: f64 = 1e-10;
pub const JITTER_MAX: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaScale {
    /// `Σ̂` as the plain Gram matrix.
    #[default]
    Raw,
    /// `Σ̂` multiplied by `4 σ̂²`.
    FourSigma2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NullConfig {
    /// Number of sampled networks.
    pub m: usize,
    /// Number of null draws.
    pub n_p: usize,
    pub lambda_shrink: f64,
    /// Growth rate of the adaptive network count; 0 keeps `m` fixed.
    pub alpha_adapt: f64,
    pub m_max: usize,
    pub adapt_tol: f64,
    pub sigma_scale: SigmaScale,
    pub seed: u64,
    /// Worker threads for the draws; 0 uses the global pool. Results do not
    /// depend on it, so it is left out of serialized echoes.
    #[serde(skip_serializing)]
    pub threads: usize,
}

impl Default for NullConfig {
    fn default() -> Self {
        NullConfig {
            m: 200,
            n_p: 1000,
            lambda_shrink: 0.0,
            alpha_adapt: 0.0,
            m_max: 2000,
            adapt_tol: 0.01,
            sigma_scale: SigmaScale::Raw,
            seed: 0,
            threads: 0,
        }
    }
}

impl NullConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Config(format!(
                "m must be at least 2 to form a covariance, got {}",
                self.m
            )));
        }
        if self.m > self.m_max {
            return Err(Error::Config(format!("m = {} exceeds m_max = {}", self.m, self.m_max)));
        }
        if self.n_p == 0 {
            return Err(Error::Config("n_p must be at least 1".into()));
        }
        check_lambda(self.lambda_shrink)?;
        if !(self.alpha_adapt >= 0.0) || !(self.adapt_tol > 0.0) {
            return Err(Error::Config("alpha_adapt must be ≥ 0 and adapt_tol > 0".into()));
        }
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("shrinkage λ must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// Empirical covariance of sampled network outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    pub entries: Matrix,
    pub shrunk: bool,
    pub chol_factor: Option<Matrix>,
    pub jitter_used: f64,
}

impl CovMatrix {
    pub fn new(entries: Matrix) -> Self {
        CovMatrix {
            entries,
            shrunk: false,
            chol_factor: None,
            jitter_used: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }
}

/// Outcome of testing one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub variable_index: usize,
    pub observed: VariableStatistic,
    pub null_samples: Vec<f64>,
    pub p_value: f64,
    pub m_final: usize,
    pub seed: u64,
    pub jitter_used: f64,
    pub config_echo: TestConfigEcho,
    pub version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfigEcho {
    pub null: NullConfig,
    pub stat: StatConfig,
    pub glorot_truncation_sigmas: f64,
}

/// `m` truncated-Glorot networks with the given layer widths. Network `i`
/// comes from its own stream, so the first `m` networks of a larger sample
/// are the same networks.
pub fn sample_networks(m: usize, dims: &[usize], activation: Activation, seed: u64) -> Result<Vec<Network>> {
    if m < 2 {
        return Err(Error::Config(format!("need at least 2 sampled networks, got {m}")));
    }
    sample_range(0..m, dims, activation, seed)
}

fn sample_range(
    range: std::ops::Range<usize>,
    dims: &[usize],
    activation: Activation,
    seed: u64,
) -> Result<Vec<Network>> {
    range
        .map(|i| {
            let mut rng = rng::substream(seed, rng::domain::NULL_NETWORKS, i as u64);
            Network::init_glorot_with(dims, activation, &mut rng)
        })
        .collect()
}

/// Gram matrix of precomputed outputs (one row of `n` values per network).
pub fn covariance_from_outputs(outputs: &[Vec<f64>], scale: f64) -> CovMatrix {
    let m = outputs.len();
    let n = outputs.first().map_or(1, Vec::len).max(1) as f64;
    let mut entries = Matrix::zeros(m, m);
    for l in 0..m {
        for k in 0..=l {
            let s = dot(&outputs[l], &outputs[k]);
            let v = scale * s / n;
            entries[(l, k)] = v;
            entries[(k, l)] = v;
        }
    }
    CovMatrix::new(entries)
}

fn scale_factor(sigma_scale: SigmaScale, sigma2_hat: f64) -> f64 {
    match sigma_scale {
        SigmaScale::Raw => 1.0,
        SigmaScale::FourSigma2 => 4.0 * sigma2_hat,
    }
}

/// `Σ̂_{lk} = (1/n) Σ_i f_l(x_i) f_k(x_i)`, optionally times `4 σ̂²`.
pub fn empirical_covariance(
    nets: &[Network],
    x: &Matrix,
    sigma_scale: SigmaScale,
    sigma2_hat: f64,
) -> CovMatrix {
    let outputs: Vec<Vec<f64>> = nets.par_iter().map(|f| f.eval_rows(x)).collect();
    covariance_from_outputs(&outputs, scale_factor(sigma_scale, sigma2_hat))
}

/// `(1 − λ) Σ̂ + λ diag(Σ̂)`: the diagonal is kept, off-diagonals are scaled by `1 − λ`.
pub fn shrink(cov: &CovMatrix, lambda: f64) -> Result<CovMatrix> {
    check_lambda(lambda)?;
    let m = cov.dim();
    let mut entries = cov.entries.clone();
    for l in 0..m {
        for k in 0..m {
            if l != k {
                entries[(l, k)] *= 1.0 - lambda;
            }
        }
    }
    Ok(CovMatrix {
        entries,
        shrunk: cov.shrunk || lambda > 0.0,
        chol_factor: None,
        jitter_used: 0.0,
    })
}

/// Factors `Σ̂ + jitter·I`, escalating the jitter until the factorization succeeds.
pub fn cholesky_with_jitter(cov: &CovMatrix) -> Result<CovMatrix> {
    let m = cov.dim();
    if m == 0 {
        return Err(Error::Numerical("cannot factor an empty covariance".into()));
    }
    if cov.entries.asymmetry() > 1e-12 * cov.entries.frobenius_norm().max(1.0) {
        return Err(Error::Numerical("covariance is not symmetric".into()));
    }
    let mean_diag = cov.entries.trace() / m as f64;
    if !mean_diag.is_finite() {
        return Err(Error::Numerical("covariance has non-finite entries".into()));
    }
    let mut ladder = vec![0.0];
    let mut rel = JITTER_MIN;
    while rel <= JITTER_MAX * (1.0 + 1e-9) {
        ladder.push(rel * mean_diag);
        rel *= 10.0;
    }
    for jitter in ladder {
        let mut a = cov.entries.clone();
        for i in 0..m {
            a[(i, i)] += jitter;
        }
        if let Some(l) = linalg::cholesky(&a) {
            return Ok(CovMatrix {
                entries: cov.entries.clone(),
                shrunk: cov.shrunk,
                chol_factor: Some(l),
                jitter_used: jitter,
            });
        }
    }
    Err(Error::Numerical(format!(
        "covariance of dimension {m} is not positive definite even with jitter {:e}·tr/m; \
         use shrinkage (lambda_shrink > 0) or fewer sampled networks",
        JITTER_MAX
    )))
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = i;
        }
    }
    best
}

/// `argmax(L g)` for a given standard-normal vector `g`.
pub fn select_index_from(chol: &Matrix, g: &[f64]) -> usize {
    argmax(&chol.lower_mul_vec(g))
}

/// Draws `g ~ N(0, I)` and returns `argmax(L g)`.
pub fn select_index(chol: &Matrix, rng: &mut Rng) -> usize {
    let g: Vec<f64> = (0..chol.rows()).map(|_| StandardNormal.sample(rng)).collect();
    select_index_from(chol, &g)
}

fn require_factor(cov: &CovMatrix) -> Result<&Matrix> {
    cov.chol_factor
        .as_ref()
        .ok_or_else(|| Error::Numerical("covariance has not been factored".into()))
}

/// One null sample: the normalized statistic of the network at `argmax z`.
pub fn null_sample(
    nets: &[Network],
    cov: &CovMatrix,
    x: &Matrix,
    j: usize,
    stat_cfg: &StatConfig,
    rng: &mut Rng,
) -> Result<f64> {
    let chol = require_factor(cov)?;
    let idx = select_index(chol, rng);
    Ok(significance::empirical_test_statistic(&nets[idx], x, j, stat_cfg)?.normalized)
}

/// RNG stream of draw `r` for variable `j`.
pub fn draw_stream(seed: u64, j: usize, r: usize) -> Rng {
    rng::substream(seed, rng::domain::NULL_DRAWS, ((j as u64) << 24) | r as u64)
}

/// `‖Σ̂_k − Σ̂_{k−1}‖_F` where the smaller matrix is zero-padded: the common
/// leading block is compared entrywise, the rows and columns of newly added
/// networks count in full.
pub fn covariance_change(previous: &Matrix, current: &Matrix) -> f64 {
    let (a, b) = if previous.rows() <= current.rows() {
        (previous, current)
    } else {
        (current, previous)
    };
    let k = a.rows();
    let mut total = 0.0;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            let old = if i < k && j < k { a[(i, j)] } else { 0.0 };
            let d = b[(i, j)] - old;
            total += d * d;
        }
    }
    total.sqrt()
}

/// `m_{k+1} = ⌈m_k (1 + α ‖Σ̂_k − Σ̂_{k−1}‖_F)⌉`, capped at `m_max`.
pub fn adaptive_m(previous: &Matrix, current: &Matrix, m_k: usize, alpha: f64, m_max: usize) -> usize {
    next_m(m_k, alpha, covariance_change(previous, current), m_max)
}

/// The growth rule for a known change norm.
pub fn next_m(m_k: usize, alpha: f64, change: f64, m_max: usize) -> usize {
    let grown = m_k as f64 * (1.0 + alpha * change);
    // keep 100 · 1.05 at 105
    let next = (grown - 1e-9).ceil().max(m_k as f64) as usize;
    next.min(m_max).max(m_k.min(m_max))
}

/// Sampled networks, their factored covariance and cached statistics.
#[derive(Debug, Clone)]
pub struct NullSimulator {
    pub nets: Vec<Network>,
    pub cov: CovMatrix,
    /// `raw_stats[l][j]`: raw statistic of network `l` for variable `j`.
    pub raw_stats: Vec<Vec<f64>>,
    /// Network counts visited by the adaptive loop (a single entry when off).
    pub m_history: Vec<usize>,
}

impl NullSimulator {
    /// Runs steps 1 and 2 (with shrinkage and, when `alpha_adapt > 0`, the
    /// adaptive growth of `m`) and caches every network's statistics.
    pub fn build(dims: &[usize], activation: Activation, x: &Matrix, sigma2_hat: f64, cfg: &NullConfig) -> Result<Self> {
        cfg.validate()?;
        if x.rows() == 0 {
            return Err(Error::Input("null simulation needs at least one point".into()));
        }
        let scale = scale_factor(cfg.sigma_scale, sigma2_hat);
        let mut nets = sample_networks(cfg.m, dims, activation, cfg.seed)?;
        let (mut outputs, mut raw_stats) = sweep(&nets, x)?;
        let mut cov = covariance_from_outputs(&outputs, scale);
        let mut m_history = vec![cfg.m];

        if cfg.alpha_adapt > 0.0 {
            let mut previous = Matrix::zeros(0, 0);
            loop {
                let m_k = nets.len();
                let change = covariance_change(&previous, &cov.entries);
                let norm = cov.entries.frobenius_norm();
                if norm == 0.0 || change / norm < cfg.adapt_tol || m_k >= cfg.m_max {
                    break;
                }
                let m_next = next_m(m_k, cfg.alpha_adapt, change, cfg.m_max);
                if m_next == m_k {
                    break;
                }
                let extra = sample_range(m_k..m_next, dims, activation, cfg.seed)?;
                let (o, r) = sweep(&extra, x)?;
                outputs.extend(o);
                raw_stats.extend(r);
                nets.extend(extra);
                previous = std::mem::replace(&mut cov, covariance_from_outputs(&outputs, scale)).entries;
                m_history.push(m_next);
            }
        }

        let cov = cholesky_with_jitter(&shrink(&cov, cfg.lambda_shrink)?)?;
        Ok(NullSimulator {
            nets,
            cov,
            raw_stats,
            m_history,
        })
    }

    pub fn m(&self) -> usize {
        self.nets.len()
    }

    /// Draw `r` for variable `j`: cached raw statistic of the selected network divided by `u²`.
    pub fn draw(&self, seed: u64, j: usize, r: usize, u: f64) -> f64 {
        let chol = self.cov.chol_factor.as_ref().expect("factored in build");
        let idx = select_index(chol, &mut draw_stream(seed, j, r));
        self.raw_stats[idx][j] / (u * u)
    }

    /// `n_p` draws for variable `j`, merged in replication order.
    pub fn draws(&self, seed: u64, j: usize, n_p: usize, u: f64, threads: usize) -> Result<Vec<f64>> {
        let run = || (0..n_p).into_par_iter().map(|r| self.draw(seed, j, r, u)).collect();
        with_threads(threads, run)
    }
}

/// Outputs and raw statistics of every network.
fn sweep(nets: &[Network], x: &Matrix) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let pairs = nets
        .par_iter()
        .map(|f| significance::outputs_and_raw_statistics(f, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = current pool).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// `(1 + #{null ≥ observed}) / (n_p + 1)`.
pub fn p_value(observed: f64, null_samples: &[f64]) -> f64 {
    let exceed = null_samples.iter().filter(|&&s| s >= observed).count();
    (1 + exceed) as f64 / (null_samples.len() + 1) as f64
}

/// Null samples for variable `j`.
pub fn null_distribution(
    fitted: &FittedModel,
    data: &Dataset,
    j: usize,
    cfg: &NullConfig,
    stat_cfg: &StatConfig,
) -> Result<Vec<f64>> {
    check_variable(fitted, data, j)?;
    let u = significance::normalization_factor(stat_cfg, data.n())?;
    with_threads(cfg.threads, || {
        let sim = NullSimulator::build(&fitted.net.dims(), fitted.net.activation(), &data.x, fitted.sigma2_hat(), cfg)?;
        sim.draws(cfg.seed, j, cfg.n_p, u, 0)
    })?
}

fn check_variable(fitted: &FittedModel, data: &Dataset, j: usize) -> Result<()> {
    if fitted.net.input_dim() != data.d() {
        return Err(Error::Input(format!(
            "model expects {} inputs but the data has {} covariates",
            fitted.net.input_dim(),
            data.d()
        )));
    }
    if j >= data.d() {
        return Err(Error::Input(format!("variable index {j} out of range for d = {}", data.d())));
    }
    Ok(())
}

/// Tests a single variable.
pub fn significance_test(
    fitted: &FittedModel,
    data: &Dataset,
    j: usize,
    cfg: &NullConfig,
    stat_cfg: &StatConfig,
) -> Result<TestResult> {
    Ok(significance_tests(fitted, data, &[j], cfg, stat_cfg)?.remove(0))
}

/// Tests several variables against one shared network sample and covariance.
pub fn significance_tests(
    fitted: &FittedModel,
    data: &Dataset,
    variables: &[usize],
    cfg: &NullConfig,
    stat_cfg: &StatConfig,
) -> Result<Vec<TestResult>> {
    for &j in variables {
        check_variable(fitted, data, j)?;
    }
    stat_cfg.validate()?;
    with_threads(cfg.threads, || run_tests(fitted, data, variables, cfg, stat_cfg))?
}

fn run_tests(
    fitted: &FittedModel,
    data: &Dataset,
    variables: &[usize],
    cfg: &NullConfig,
    stat_cfg: &StatConfig,
) -> Result<Vec<TestResult>> {
    let sim = NullSimulator::build(&fitted.net.dims(), fitted.net.activation(), &data.x, fitted.sigma2_hat(), cfg)?;
    let u = significance::normalization_factor(stat_cfg, data.n())?;
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    variables
        .iter()
        .map(|&j| {
            let observed = significance::empirical_test_statistic(&fitted.net, &data.x, j, stat_cfg)?;
            let null_samples = sim.draws(cfg.seed, j, cfg.n_p, u, 0)?;
            Ok(TestResult {
                variable_index: j,
                p_value: p_value(observed.normalized, &null_samples),
                observed,
                null_samples,
                m_final: sim.m(),
                seed: cfg.seed,
                jitter_used: sim.cov.jitter_used,
                config_echo: TestConfigEcho {
                    null: cfg.clone(),
                    stat: *stat_cfg,
                    glorot_truncation_sigmas: GLOROT_TRUNCATION,
                },
                version: crate::VERSION.to_owned(),
                timestamp: timestamp.clone(),
            })
        })
        .collect()
}

impl TestResult {
    /// `null_sample` values, one per line, with a header.
    pub fn null_samples_csv(&self) -> String {
        let mut s = String::from("replication,null_sample\n");
        for (r, v) in self.null_samples.iter().enumerate() {
            s.push_str(&format!("{r},{v}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_net(d: usize, c: f64) -> Network {
        Network::from_parts(&[d, 1], Activation::Tanh, vec![vec![0.0; d]], vec![vec![c]]).unwrap()
    }

    fn points() -> Matrix {
        Matrix::from_rows(&[[0.1, 0.2], [0.9, -0.3], [-0.5, 0.5], [0.0, -1.0]]).unwrap()
    }

    #[test]
    fn covariance_of_constants() {
        let cov = empirical_covariance(&[constant_net(2, 1.0), constant_net(2, 2.0)], &points(), SigmaScale::Raw, 0.0);
        assert_eq!(cov.entries, Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap());
    }

    #[test]
    fn covariance_of_negated_pair() {
        let f = Network::init_glorot(&[2, 3, 1], Activation::Tanh, 4).unwrap();
        let mut g = f.clone();
        for w in g.layers_mut().last_mut().unwrap().weights.row_mut(0) {
            *w = -*w;
        }
        let cov = empirical_covariance(&[f.clone(), g], &points(), SigmaScale::Raw, 0.0);
        let a = f.eval_rows(&points()).iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!((cov.entries[(0, 0)] - a).abs() < 1e-15);
        assert!((cov.entries[(0, 1)] + a).abs() < 1e-15);
        assert!((cov.entries[(1, 1)] - a).abs() < 1e-15);
    }

    #[test]
    fn four_sigma2_scales_entries() {
        let nets = [constant_net(2, 1.0), constant_net(2, 2.0)];
        let cov = empirical_covariance(&nets, &points(), SigmaScale::FourSigma2, 0.25);
        assert_eq!(cov.entries, Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap());
        let cov = empirical_covariance(&nets, &points(), SigmaScale::FourSigma2, 0.5);
        assert_eq!(cov.entries[(1, 1)], 8.0);
    }

    #[test]
    fn shrink_examples() {
        let cov = CovMatrix::new(Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap());
        assert_eq!(shrink(&cov, 0.0).unwrap().entries, cov.entries);
        assert_eq!(shrink(&cov, 1.0).unwrap().entries, Matrix::from_rows(&[[1.0, 0.0], [0.0, 4.0]]).unwrap());
        assert_eq!(shrink(&cov, 0.5).unwrap().entries, Matrix::from_rows(&[[1.0, 1.0], [1.0, 4.0]]).unwrap());
        assert!(shrink(&cov, 0.5).unwrap().shrunk);
        assert!(matches!(shrink(&cov, 1.5), Err(Error::Config(_))));
        assert!(matches!(shrink(&cov, -0.1), Err(Error::Config(_))));
    }

    #[test]
    fn cholesky_examples() {
        let id = cholesky_with_jitter(&CovMatrix::new(Matrix::identity(3))).unwrap();
        assert_eq!(id.chol_factor.unwrap(), Matrix::identity(3));
        assert_eq!(id.jitter_used, 0.0);

        let d = cholesky_with_jitter(&CovMatrix::new(Matrix::from_rows(&[[4.0, 0.0], [0.0, 9.0]]).unwrap())).unwrap();
        assert_eq!(d.chol_factor.unwrap(), Matrix::from_rows(&[[2.0, 0.0], [0.0, 3.0]]).unwrap());
    }

    #[test]
    fn rank_one_needs_jitter() {
        let nets: Vec<Network> = (1..=4).map(|c| constant_net(2, c as f64)).collect();
        let cov = empirical_covariance(&nets, &points(), SigmaScale::Raw, 0.0);
        let f = cholesky_with_jitter(&cov).unwrap();
        assert!(f.jitter_used > 0.0);
        let l = f.chol_factor.unwrap();
        let rebuilt = l.mul_transpose_self();
        for i in 0..4 {
            for k in 0..4 {
                let target = cov.entries[(i, k)] + if i == k { f.jitter_used } else { 0.0 };
                assert!((rebuilt[(i, k)] - target).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_covariance_fails_with_advice() {
        let err = cholesky_with_jitter(&CovMatrix::new(Matrix::zeros(3, 3))).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
        assert!(err.to_string().contains("shrinkage"));
    }

    #[test]
    fn argmax_with_forced_draw() {
        assert_eq!(select_index_from(&Matrix::identity(2), &[0.1, 5.0]), 1);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn adaptive_rule_examples() {
        assert_eq!(next_m(100, 0.1, 0.5, 10_000), 105);
        assert_eq!(next_m(100, 0.1, 0.0, 10_000), 100);
        assert_eq!(next_m(100, 0.0, 123.0, 10_000), 100);
        assert_eq!(next_m(100, 1.0, 5.0, 300), 300);
        let a = Matrix::identity(2);
        assert_eq!(adaptive_m(&a, &a, 50, 0.3, 100), 50);
    }

    #[test]
    fn covariance_change_pads_new_block() {
        let prev = Matrix::from_rows(&[[1.0]]).unwrap();
        let cur = Matrix::from_rows(&[[1.0, 2.0], [2.0, 2.0]]).unwrap();
        assert!((covariance_change(&prev, &cur) - 12.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(covariance_change(&cur, &cur), 0.0);
    }

    #[test]
    fn p_value_formula() {
        assert_eq!(p_value(0.0, &[0.0, 1.0, 2.0]), 1.0);
        assert_eq!(p_value(10.0, &[0.0, 1.0, 2.0]), 0.25);
        assert_eq!(p_value(1.0, &[0.0, 1.0, 2.0]), 0.75);
    }

    #[test]
    fn config_validation() {
        assert!(NullConfig { m: 1, ..Default::default() }.validate().is_err());
        assert!(NullConfig { m: 10, m_max: 5, ..Default::default() }.validate().is_err());
        assert!(NullConfig { n_p: 0, ..Default::default() }.validate().is_err());
        assert!(NullConfig { lambda_shrink: 2.0, ..Default::default() }.validate().is_err());
        assert!(NullConfig::default().validate().is_ok());
        assert!(matches!(sample_networks(1, &[2, 3, 1], Activation::Tanh, 0), Err(Error::Config(_))));
    }
}
