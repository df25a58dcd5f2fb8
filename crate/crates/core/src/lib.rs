//! Least-squares neural network regression with significance tests for
//! individual input variables.
//!
//! The test statistic for variable `j` is the empirical mean of the squared
//! partial derivative `(1/n) Σ (∂f/∂x_j (x_i))²` of a fitted multilayer
//! perceptron. Its null distribution is simulated by sampling networks of the
//! same architecture, forming the Gram matrix of their outputs, drawing from
//! the corresponding multivariate normal and evaluating the statistic on the
//! network that attains the maximum coordinate.
//!
//! Module map:
//! - [`network`]: the MLP class, initialization, evaluation, input gradients, model files.
//! - [`training`]: least-squares fitting by mini-batch gradient descent.
//! - [`significance`]: the squared-partial-derivative statistic and its normalization.
//! - [`nulldist`]: null-distribution simulation and p-values.
//! - [`diagnostics`]: Rademacher complexity and rate experiments.
//! - [`data`]: synthetic generators, CSV ingestion and splitting.
//! - [`cli`]: configuration, reports and the command implementations behind the `nnsig` binary.

pub mod cli;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod network;
pub mod nulldist;
pub mod rng;
pub mod significance;
pub mod training;

pub use data::{Dataset, TargetKind, TargetSpec};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use network::{Activation, MomentCertificate, Network};
pub use nulldist::{CovMatrix, NullConfig, SigmaScale, TestResult};
pub use significance::{Normalization, StatConfig, VariableStatistic};
pub use training::{ArchSpec, FittedModel, TrainConfig, Width};

/// Library version embedded in reports and model summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
