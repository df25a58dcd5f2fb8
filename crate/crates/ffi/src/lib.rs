//! C ABI for nnsig.
//!
//! Networks and datasets are opaque handles returned through out-pointers and
//! released with the matching `*_free`. Every fallible call
//! returns an [`NnsigStatus`]; on failure the message is available from
//! [`nnsig_last_error`] on the same thread until the next failing call.
//!
//! Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nnsig::data::{self, TargetSpec};
use nnsig::nulldist::{self, NullConfig, SigmaScale};
use nnsig::significance::{self, Normalization, RateConstants, StatConfig};
use nnsig::training::{self, ArchSpec, FittedModel, TrainConfig, Width};
use nnsig::{Activation, Dataset, Error, Matrix, Network};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NnsigStatus {
    Ok = 0,
    NullPointer = 1,
    /// Length mismatch, size overflow or non-UTF-8 string.
    InvalidArgument = 2,
    Config = 3,
    Input = 4,
    Format = 5,
    Data = 6,
    Numerical = 7,
    Divergence = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NnsigActivation {
    Relu = 0,
    Tanh = 1,
    Sigmoid = 2,
}

impl From<NnsigActivation> for Activation {
    fn from(a: NnsigActivation) -> Self {
        match a {
            NnsigActivation::Relu => Activation::Relu,
            NnsigActivation::Tanh => Activation::Tanh,
            NnsigActivation::Sigmoid => Activation::Sigmoid,
        }
    }
}

/// Opaque network handle.
pub struct NnsigNetwork(Network);

/// Opaque dataset handle.
pub struct NnsigDataset(Dataset);

/// Architecture of a fitted network. `width = 0` selects the automatic schedule.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NnsigArchSpec {
    pub depth: usize,
    pub width: usize,
    pub activation: NnsigActivation,
    pub width_c: f64,
    pub width_exponent: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NnsigTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub max_grad_norm: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NnsigNullConfig {
    pub m: usize,
    pub n_p: usize,
    pub lambda_shrink: f64,
    pub alpha_adapt: f64,
    pub m_max: usize,
    pub adapt_tol: f64,
    /// false: plain Gram matrix; true: scaled by 4σ̂².
    pub four_sigma2: bool,
    pub seed: u64,
    pub threads: usize,
}

/// `rate = false` divides by 1; otherwise the rate constants are used.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NnsigStatConfig {
    pub rate: bool,
    pub width: f64,
    pub lipschitz: f64,
    pub depth: u32,
    pub s_over_d: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NnsigTestOutcome {
    pub observed_raw: f64,
    pub observed_normalized: f64,
    pub p_value: f64,
    pub m_final: usize,
    pub jitter_used: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NnsigStatus {
    match e {
        Error::Config(_) => NnsigStatus::Config,
        Error::Input(_) => NnsigStatus::Input,
        Error::Format(_) => NnsigStatus::Format,
        Error::Data(_) => NnsigStatus::Data,
        Error::Numerical(_) => NnsigStatus::Numerical,
        Error::Divergence { .. } => NnsigStatus::Divergence,
        Error::Io { .. } => NnsigStatus::Io,
    }
}

struct Fail(NnsigStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NnsigStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NnsigStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NnsigStatus::Panic
        }
    }
}

fn null_arg(name: &str) -> Fail {
    Fail(NnsigStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null_arg(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null_arg(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null_arg(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(NnsigStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn check_len(name: &str, got: usize, want: usize) -> Result<(), Fail> {
    if got != want {
        return Err(Fail(
            NnsigStatus::InvalidArgument,
            format!("{name} has length {got}, expected {want}"),
        ));
    }
    Ok(())
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nnsig_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nnsig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn nnsig_arch_spec_default() -> NnsigArchSpec {
    let a = ArchSpec::default();
    NnsigArchSpec {
        depth: a.depth,
        width: 0,
        activation: match a.activation {
            Activation::Relu => NnsigActivation::Relu,
            Activation::Tanh => NnsigActivation::Tanh,
            Activation::Sigmoid => NnsigActivation::Sigmoid,
        },
        width_c: a.width_c,
        width_exponent: a.width_exponent,
    }
}

#[no_mangle]
pub extern "C" fn nnsig_train_config_default() -> NnsigTrainConfig {
    let t = TrainConfig::default();
    NnsigTrainConfig {
        epochs: t.epochs,
        batch_size: t.batch_size,
        learning_rate: t.learning_rate,
        lr_decay: t.lr_decay,
        seed: t.seed,
        tolerance: t.tolerance,
        max_grad_norm: t.max_grad_norm,
    }
}

#[no_mangle]
pub extern "C" fn nnsig_null_config_default() -> NnsigNullConfig {
    let c = NullConfig::default();
    NnsigNullConfig {
        m: c.m,
        n_p: c.n_p,
        lambda_shrink: c.lambda_shrink,
        alpha_adapt: c.alpha_adapt,
        m_max: c.m_max,
        adapt_tol: c.adapt_tol,
        four_sigma2: c.sigma_scale == SigmaScale::FourSigma2,
        seed: c.seed,
        threads: c.threads,
    }
}

#[no_mangle]
pub extern "C" fn nnsig_stat_config_default() -> NnsigStatConfig {
    NnsigStatConfig {
        rate: false,
        width: 0.0,
        lipschitz: 0.0,
        depth: 0,
        s_over_d: 0.0,
    }
}

impl From<&NnsigArchSpec> for ArchSpec {
    fn from(a: &NnsigArchSpec) -> Self {
        ArchSpec {
            depth: a.depth,
            width: if a.width == 0 { Width::Auto } else { Width::Fixed(a.width) },
            activation: a.activation.into(),
            width_c: a.width_c,
            width_exponent: a.width_exponent,
        }
    }
}

impl From<&NnsigTrainConfig> for TrainConfig {
    fn from(t: &NnsigTrainConfig) -> Self {
        TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            lr_decay: t.lr_decay,
            seed: t.seed,
            tolerance: t.tolerance,
            max_grad_norm: t.max_grad_norm,
            moment_bound: None,
        }
    }
}

impl From<&NnsigNullConfig> for NullConfig {
    fn from(c: &NnsigNullConfig) -> Self {
        NullConfig {
            m: c.m,
            n_p: c.n_p,
            lambda_shrink: c.lambda_shrink,
            alpha_adapt: c.alpha_adapt,
            m_max: c.m_max,
            adapt_tol: c.adapt_tol,
            sigma_scale: if c.four_sigma2 { SigmaScale::FourSigma2 } else { SigmaScale::Raw },
            seed: c.seed,
            threads: c.threads,
        }
    }
}

impl From<&NnsigStatConfig> for StatConfig {
    fn from(s: &NnsigStatConfig) -> Self {
        if !s.rate {
            return StatConfig::default();
        }
        StatConfig {
            normalization: Normalization::Rate,
            rate: Some(RateConstants {
                width: s.width,
                lipschitz: s.lipschitz,
                depth: s.depth,
                s_over_d: s.s_over_d,
                c_prime: None,
            }),
        }
    }
}

// ---- networks ----

/// Truncated-Glorot network with layer widths `dims[0..n_dims]`.
///
/// # Safety
/// `dims` must point to `n_dims` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nnsig_network_glorot(
    dims: *const usize,
    n_dims: usize,
    activation: NnsigActivation,
    seed: u64,
    out: *mut *mut NnsigNetwork,
) -> NnsigStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let dims = slice(dims, n_dims, "dims")?;
        let net = Network::init_glorot(dims, activation.into(), seed)?;
        put(out, NnsigNetwork(net));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nnsig_network_load(path: *const c_char, out: *mut *mut NnsigNetwork) -> NnsigStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let net = Network::load(string(path, "path")?)?;
        put(out, NnsigNetwork(net));
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nnsig_network_save(net: *const NnsigNetwork, path: *const c_char) -> NnsigStatus {
    guard(|| {
        deref(net, "net")?.0.save(string(path, "path")?)?;
        Ok(())
    })
}

/// Input dimension, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nnsig_network_input_dim(net: *const NnsigNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.input_dim())
}

/// `f(x)` for one point of length `d`.
///
/// # Safety
/// `x` must point to `d` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn nnsig_network_eval(
    net: *const NnsigNetwork,
    x: *const f64,
    d: usize,
    out: *mut f64,
) -> NnsigStatus {
    guard(|| {
        let net = &deref(net, "net")?.0;
        let x = slice(x, d, "x")?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        *out = net.forward(x)?;
        Ok(())
    })
}

/// `∂f/∂x` at one point; `grad` receives `d` values.
///
/// # Safety
/// `x` and `grad` must each hold `d` values.
#[no_mangle]
pub unsafe extern "C" fn nnsig_network_gradient(
    net: *const NnsigNetwork,
    x: *const f64,
    d: usize,
    grad: *mut f64,
) -> NnsigStatus {
    guard(|| {
        let net = &deref(net, "net")?.0;
        let x = slice(x, d, "x")?;
        let out = slice_mut(grad, d, "grad")?;
        out.copy_from_slice(&net.input_gradient(x)?);
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nnsig_network_free(net: *mut NnsigNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

// ---- datasets ----

/// Synthetic data; `spec_json` is a target description such as
/// `{"kind":"linear","beta":[1,0],"intercept":0,"noise_sigma":0.1}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nnsig_dataset_generate(
    spec_json: *const c_char,
    n: usize,
    d: usize,
    seed: u64,
    out: *mut *mut NnsigDataset,
) -> NnsigStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let spec: TargetSpec = serde_json::from_str(string(spec_json, "spec_json")?)
            .map_err(|e| Fail(NnsigStatus::Config, format!("target spec: {e}")))?;
        put(out, NnsigDataset(data::generate(&spec, n, d, seed)?));
        Ok(())
    })
}

/// Row-major `n × d` covariates in `[-1, 1]` and `n` responses, copied.
///
/// # Safety
/// `x` must hold `n·d` values and `y` `n` values.
#[no_mangle]
pub unsafe extern "C" fn nnsig_dataset_from_arrays(
    x: *const f64,
    y: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut NnsigDataset,
) -> NnsigStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let len = n
            .checked_mul(d)
            .ok_or_else(|| Fail(NnsigStatus::InvalidArgument, "n·d overflows".into()))?;
        let x = Matrix::from_vec(n, d, slice(x, len, "x")?.to_vec())?;
        let y = slice(y, n, "y")?.to_vec();
        put(out, NnsigDataset(Dataset::from_parts(x, y)?));
        Ok(())
    })
}

/// # Safety
/// `path` and `target` must be NUL-terminated strings and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nnsig_dataset_load_csv(
    path: *const c_char,
    target: *const c_char,
    out: *mut *mut NnsigDataset,
) -> NnsigStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let ds = data::load_csv(string(path, "path")?, string(target, "target")?)?;
        put(out, NnsigDataset(ds));
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nnsig_dataset_n(ds: *const NnsigDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n())
}

/// Number of covariates, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nnsig_dataset_d(ds: *const NnsigDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.d())
}

/// # Safety
/// `ds` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nnsig_dataset_free(ds: *mut NnsigDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

// ---- estimation and testing ----

/// Least-squares fit. `final_risk` may be null.
///
/// # Safety
/// Handles and configs must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nnsig_fit(
    ds: *const NnsigDataset,
    arch: *const NnsigArchSpec,
    cfg: *const NnsigTrainConfig,
    out: *mut *mut NnsigNetwork,
    final_risk: *mut f64,
) -> NnsigStatus {
    guard(|| {
        let ds = &deref(ds, "dataset")?.0;
        let arch = ArchSpec::from(deref(arch, "arch")?);
        let cfg = TrainConfig::from(deref(cfg, "cfg")?);
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let fit = training::fit_least_squares(ds, &arch, &cfg)?;
        if !final_risk.is_null() {
            *final_risk = fit.final_empirical_risk;
        }
        put(out, NnsigNetwork(fit.net));
        Ok(())
    })
}

/// Raw statistics `(1/n) Σ (∂f/∂x_j)²` for every variable; `out` holds `d` values.
///
/// # Safety
/// Handles must be live and `out` must hold `d` values.
#[no_mangle]
pub unsafe extern "C" fn nnsig_statistics(
    net: *const NnsigNetwork,
    ds: *const NnsigDataset,
    out: *mut f64,
    d: usize,
) -> NnsigStatus {
    guard(|| {
        let net = &deref(net, "net")?.0;
        let ds = &deref(ds, "dataset")?.0;
        check_len("out", d, ds.d())?;
        let raw = significance::raw_statistics(net, &ds.x)?;
        slice_mut(out, d, "out")?.copy_from_slice(&raw);
        Ok(())
    })
}

/// Significance test of variable `j`. When `null_samples` is non-null it
/// receives the `n_p` null draws; `null_len` must then equal `cfg->n_p`.
///
/// # Safety
/// Handles and configs must be live; `outcome` writable; `null_samples`
/// null or holding `null_len` values.
#[no_mangle]
pub unsafe extern "C" fn nnsig_significance_test(
    net: *const NnsigNetwork,
    ds: *const NnsigDataset,
    j: usize,
    cfg: *const NnsigNullConfig,
    stat: *const NnsigStatConfig,
    outcome: *mut NnsigTestOutcome,
    null_samples: *mut f64,
    null_len: usize,
) -> NnsigStatus {
    guard(|| {
        let net = &deref(net, "net")?.0;
        let ds = &deref(ds, "dataset")?.0;
        let cfg = NullConfig::from(deref(cfg, "cfg")?);
        let stat = StatConfig::from(deref(stat, "stat")?);
        if outcome.is_null() {
            return Err(null_arg("outcome"));
        }
        if !null_samples.is_null() {
            check_len("null_samples", null_len, cfg.n_p)?;
        }
        let fitted = FittedModel::from_network(net.clone(), ds, None)?;
        let r = nulldist::significance_test(&fitted, ds, j, &cfg, &stat)?;
        if !null_samples.is_null() {
            slice_mut(null_samples, null_len, "null_samples")?.copy_from_slice(&r.null_samples);
        }
        *outcome = NnsigTestOutcome {
            observed_raw: r.observed.raw,
            observed_normalized: r.observed.normalized,
            p_value: r.p_value,
            m_final: r.m_final,
            jitter_used: r.jitter_used,
        };
        Ok(())
    })
}
