//! The squared-partial-derivative statistic
//! `T_j[f] = (1/n) Σ_i (∂f/∂x_j (x_i))²` and its normalization.
//!
//! For an affine `f(x) = β·x + b` the statistic is exactly `β_j²`, which is the
//! classical coefficient test. Sums are compensated so the statistic does not
//! depend on row order beyond the last bit or two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CompensatedSum, Matrix};
use crate::network::{Network, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `U = 1`.
    #[default]
    Identity,
    /// `U = √(H L^{L_d} / √n) + H^{−s/d}`.
    Rate,
}

/// Constants of the rate normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConstants {
    /// Hidden width `H_n`.
    pub width: f64,
    /// Activation Lipschitz constant `L`.
    pub lipschitz: f64,
    /// Number of hidden layers `L_d`.
    pub depth: u32,
    /// Smoothness ratio `s/d`.
    pub s_over_d: f64,
    /// Carried through to reports; has no numeric effect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_prime: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatConfig {
    pub normalization: Normalization,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateConstants>,
}

impl StatConfig {
    pub fn rate(constants: RateConstants) -> Self {
        StatConfig {
            normalization: Normalization::Rate,
            rate: Some(constants),
        }
    }

    pub fn validate(&self) -> Result<()> {
        normalization_factor(self, 1).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableStatistic {
    pub variable_index: usize,
    pub raw: f64,
    pub normalized: f64,
    pub n_used: usize,
}

/// Normalization factor `U`; statistics are divided by `U²`.
pub fn normalization_factor(cfg: &StatConfig, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Input("normalization needs n ≥ 1".into()));
    }
    match cfg.normalization {
        Normalization::Identity => Ok(1.0),
        Normalization::Rate => {
            let c = cfg.rate.ok_or_else(|| {
                Error::Config("rate normalization requires [test.rate] constants".into())
            })?;
            if !(c.width > 0.0 && c.lipschitz > 0.0 && c.s_over_d > 0.0) {
                return Err(Error::Config(format!(
                    "rate constants must be positive, got {c:?}"
                )));
            }
            let complexity = c.width * c.lipschitz.powi(c.depth as i32) / (n as f64).sqrt();
            Ok(complexity.sqrt() + c.width.powf(-c.s_over_d))
        }
    }
}

fn check(net: &Network, x: &Matrix) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::Input("test statistic needs at least one point".into()));
    }
    if x.cols() != net.input_dim() {
        return Err(Error::Input(format!(
            "covariates have {} columns, network expects {}",
            x.cols(),
            net.input_dim()
        )));
    }
    Ok(())
}

/// Raw statistics for every input variable, from one gradient pass per row.
pub fn raw_statistics(net: &Network, x: &Matrix) -> Result<Vec<f64>> {
    outputs_and_raw_statistics(net, x).map(|(_, raw)| raw)
}

/// Network outputs on every row together with the raw statistics, from the same sweep.
pub fn outputs_and_raw_statistics(net: &Network, x: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
    check(net, x)?;
    let mut sums = vec![CompensatedSum::default(); x.cols()];
    let mut outputs = Vec::with_capacity(x.rows());
    let mut ws = Workspace::new(net);
    for row in x.row_iter() {
        let (v, g) = net.value_and_gradient_with(row, &mut ws);
        outputs.push(v);
        for (s, gj) in sums.iter_mut().zip(g) {
            s.add(gj * gj);
        }
    }
    let n = x.rows() as f64;
    Ok((outputs, sums.iter().map(|s| s.value() / n).collect()))
}

fn to_statistic(j: usize, raw: f64, n: usize, u: f64) -> VariableStatistic {
    VariableStatistic {
        variable_index: j,
        raw,
        normalized: raw / (u * u),
        n_used: n,
    }
}

/// Statistic for variable `j`.
pub fn empirical_test_statistic(
    net: &Network,
    x: &Matrix,
    j: usize,
    cfg: &StatConfig,
) -> Result<VariableStatistic> {
    check(net, x)?;
    if j >= x.cols() {
        return Err(Error::Input(format!(
            "variable index {j} out of range for d = {}",
            x.cols()
        )));
    }
    let u = normalization_factor(cfg, x.rows())?;
    let mut sum = CompensatedSum::default();
    let mut ws = Workspace::new(net);
    for row in x.row_iter() {
        let (_, g) = net.value_and_gradient_with(row, &mut ws);
        sum.add(g[j] * g[j]);
    }
    Ok(to_statistic(j, sum.value() / x.rows() as f64, x.rows(), u))
}

/// Statistics for all variables in index order.
pub fn all_statistics(net: &Network, x: &Matrix, cfg: &StatConfig) -> Result<Vec<VariableStatistic>> {
    let u = normalization_factor(cfg, x.rows().max(1))?;
    let raw = raw_statistics(net, x)?;
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(j, r)| to_statistic(j, r, x.rows(), u))
        .collect())
}
