use nnsig::diagnostics::{self, ApproximationConfig, ComplexityConfig, FixedClass, GlorotClass};
use nnsig::{data, Activation, Error, Matrix, Network, TrainConfig};

fn covariates(n: usize, d: usize, seed: u64) -> Matrix {
    data::uniform_covariates(n, d, &mut nnsig::rng::substream(seed, 0, 0))
}

/// `E |(1/n) Σ ε_i|` by enumerating the binomial distribution of the sign sum.
fn exact_mean_abs_sign_average(n: usize) -> f64 {
    let mut binom = 1.0f64;
    let mut total = 0.0;
    for k in 0..=n {
        total += binom * (2.0 * k as f64 - n as f64).abs();
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    total / 2f64.powi(n as i32) / n as f64
}

#[test]
fn enumeration_oracle_approaches_gaussian_limit() {
    assert_eq!(exact_mean_abs_sign_average(1), 1.0);
    assert_eq!(exact_mean_abs_sign_average(2), 0.5);
    let n = 1000;
    let gaussian = (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
    assert!((exact_mean_abs_sign_average(n) / gaussian - 1.0).abs() < 1e-3);
}

#[test]
fn constant_singleton_matches_exact_value() {
    let one = FixedClass(vec![|_: &[f64]| 1.0]);
    for n in [5, 12, 20] {
        let est = diagnostics::estimate_rademacher(&one, &covariates(n, 1, 0), 20_000, 1, n as u64).unwrap();
        let exact = exact_mean_abs_sign_average(n);
        assert!((est.value - exact).abs() < 3.0 * est.std_error, "n={n}: {} vs {exact}", est.value);
    }
    let n = 400;
    let est = diagnostics::estimate_rademacher(&one, &covariates(n, 1, 0), 4000, 1, 1).unwrap();
    let gaussian = (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
    assert!((est.value - gaussian).abs() < 3.0 * est.std_error + 1e-3);
}

#[test]
fn zero_function_has_zero_complexity() {
    let zero = FixedClass(vec![|_: &[f64]| 0.0]);
    let est = diagnostics::estimate_rademacher(&zero, &covariates(30, 2, 0), 50, 1, 0).unwrap();
    assert_eq!((est.value, est.std_error), (0.0, 0.0));
}

#[test]
fn single_member_matches_direct_formula() {
    let x = covariates(50, 2, 1);
    let class = GlorotClass { dims: vec![2, 4, 1], activation: Activation::Tanh };
    let f = class.member(0, 7).unwrap();
    let est = diagnostics::estimate_rademacher(&class, &x, 30, 1, 7).unwrap();
    let values = f.eval_rows(&x);
    let direct = (0..30)
        .map(|t| {
            let eps = diagnostics::rademacher_signs(7, t, 50);
            (values.iter().zip(&eps).map(|(v, e)| v * e).sum::<f64>() / 50.0).abs()
        })
        .sum::<f64>()
        / 30.0;
    assert!((est.value - direct).abs() < 1e-15);
}

#[test]
fn larger_class_samples_never_decrease_the_estimate() {
    let x = covariates(80, 3, 2);
    let class = GlorotClass { dims: vec![3, 5, 5, 1], activation: Activation::Sigmoid };
    let values: Vec<f64> = [1, 4, 16, 64]
        .iter()
        .map(|&m| diagnostics::estimate_rademacher(&class, &x, 40, m, 3).unwrap().value)
        .collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
}

#[test]
fn quadrupling_n_halves_the_complexity() {
    let class = GlorotClass { dims: vec![3, 8, 8, 1], activation: Activation::Tanh };
    let small = diagnostics::estimate_rademacher(&class, &covariates(250, 3, 4), 300, 32, 4).unwrap();
    let large = diagnostics::estimate_rademacher(&class, &covariates(1000, 3, 5), 300, 32, 4).unwrap();
    let ratio = small.value / large.value;
    assert!((1.6..=2.5).contains(&ratio), "{ratio}");
}

#[test]
fn complexity_scaling_experiment_slope() {
    let cfg = ComplexityConfig { n_list: vec![100, 400, 1600], n_eps: 200, n_class: 16, ..Default::default() };
    let report = diagnostics::complexity_scaling_experiment(&cfg, 1).unwrap();
    assert!((-0.7..=-0.3).contains(&report.log_log_slope), "{}", report.log_log_slope);
    assert_eq!(report.point_std_errors.as_ref().map(Vec::len), Some(3));
}

#[test]
fn localization_keeps_the_right_networks() {
    let x = covariates(40, 2, 3);
    let nets: Vec<Network> = (0..12)
        .map(|k| Network::init_glorot(&[2, 4, 1], Activation::Tanh, k).unwrap())
        .collect();
    let reference = nets[0].clone();
    assert_eq!(diagnostics::localize(&nets, &reference, &x, f64::INFINITY).unwrap(), (0..12).collect::<Vec<_>>());
    assert_eq!(diagnostics::localize(&nets, &reference, &x, 0.0).unwrap(), vec![0]);
    let sizes: Vec<usize> = [0.0, 0.01, 0.1, 1.0, 10.0]
        .iter()
        .map(|&r| diagnostics::localize(&nets, &reference, &x, r).unwrap().len())
        .collect();
    assert!(sizes.windows(2).all(|w| w[1] >= w[0]), "{sizes:?}");
    assert!(matches!(diagnostics::localize(&nets, &reference, &x, -1.0), Err(Error::Config(_))));
    // H L^{L_d} / √n
    assert_eq!(diagnostics::localization_radius(8, 0.5, 2, 64), 0.25);
}

#[test]
fn slope_of_exact_power_law() {
    let x = [1.0, 2.0, 4.0, 8.0, 16.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
    let (slope, stderr) = diagnostics::log_log_slope(&x, &y).unwrap();
    assert!((slope + 0.5).abs() < 1e-12 && stderr < 1e-7);
    assert!(matches!(diagnostics::log_log_slope(&x[..2], &y[..2]), Err(Error::Numerical(_))));
    assert!(matches!(diagnostics::log_log_slope(&[1.0, 2.0, 0.0], &[1.0, 1.0, 1.0]), Err(Error::Numerical(_))));
}

#[test]
fn approximation_error_falls_with_width() {
    let cfg = ApproximationConfig {
        widths: vec![2, 4, 8, 16],
        n: 1000,
        training: TrainConfig { epochs: 150, ..Default::default() },
        ..Default::default()
    };
    let report = diagnostics::approximation_rate_experiment(&cfg, 3).unwrap();
    assert!(report.log_log_slope < 0.0, "{report:?}");
    assert!(report.excluded.is_empty());
    let bad = ApproximationConfig { widths: vec![4, 4, 8], ..cfg };
    assert!(matches!(diagnostics::approximation_rate_experiment(&bad, 0), Err(Error::Config(_))));
}
