mod common;

use common::{random_net, random_point, worst_gradient_error};
use nnsig::network::{glorot_sigma, GLOROT_TRUNCATION};
use nnsig::{Activation, Error, Matrix, Network};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn smooth_gradients_match_finite_differences() {
    for act in [Activation::Tanh, Activation::Sigmoid] {
        let (worst, n) = worst_gradient_error(act, f64::NEG_INFINITY);
        assert_eq!(n, 100);
        assert!(worst < 1e-5, "{act}: {worst:e}");
    }
}

#[test]
fn relu_gradients_match_away_from_kinks() {
    let (worst, _) = worst_gradient_error(Activation::Relu, 1e-3);
    assert!(worst < 1e-4, "{worst:e}");
}

#[test]
fn relu_derivative_at_zero_is_zero() {
    // the hidden unit sits exactly on its kink at x = 0
    let net = Network::from_parts(&[1, 1, 1], Activation::Relu, vec![vec![1.0], vec![1.0]], vec![vec![0.0], vec![0.0]]).unwrap();
    assert_eq!(net.input_gradient(&[0.0]).unwrap(), vec![0.0]);
}

#[test]
fn disconnected_input_has_exactly_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for act in [Activation::Relu, Activation::Tanh, Activation::Sigmoid] {
        let base = random_net(&[4, 6, 6, 1], act, &mut rng);
        let mut weights: Vec<Vec<f64>> = base.layers().iter().map(|l| l.weights().as_slice().to_vec()).collect();
        for row in weights[0].chunks_mut(4) {
            row[2] = 0.0;
        }
        let biases = base.layers().iter().map(|l| l.biases().to_vec()).collect();
        let net = Network::from_parts(&[4, 6, 6, 1], act, weights, biases).unwrap();
        for _ in 0..50 {
            let g = net.input_gradient(&random_point(4, &mut rng)).unwrap();
            assert_eq!(g[2], 0.0);
        }
    }
}

#[test]
fn linear_net_gradient_is_its_coefficients() {
    let net = Network::from_parts(&[2, 1], Activation::Tanh, vec![vec![2.0, -1.0]], vec![vec![3.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let x = random_point(2, &mut rng);
        assert_eq!(net.input_gradient(&x).unwrap(), vec![2.0, -1.0]);
        assert_eq!(net.eval(&x), 2.0 * x[0] - x[1] + 3.0);
    }
}

#[test]
fn hand_evaluated_relu_unit() {
    let net = Network::from_parts(&[2, 1, 1], Activation::Relu, vec![vec![1.0, 0.0], vec![2.0]], vec![vec![0.0], vec![1.0]]).unwrap();
    assert_eq!(net.forward(&[0.5, -0.3]).unwrap(), 2.0);
    let zero = Network::zeros(&[3, 4, 1], Activation::Tanh).unwrap();
    assert_eq!(zero.forward(&[0.2, -0.7, 1.0]).unwrap(), 0.0);
}

#[test]
fn dimension_mismatch_is_input_error() {
    let net = Network::zeros(&[3, 2, 1], Activation::Tanh).unwrap();
    assert!(matches!(net.forward(&[0.0, 0.0]), Err(Error::Input(_))));
    assert!(matches!(net.input_gradient(&[0.0; 4]), Err(Error::Input(_))));
}

#[test]
fn invalid_dims_are_config_errors() {
    for dims in [&[3][..], &[3, 0, 1], &[3, 4, 2], &[]] {
        assert!(matches!(Network::init_glorot(dims, Activation::Tanh, 0), Err(Error::Config(_))), "{dims:?}");
    }
}

/// Sound enclosure of f over a box, by interval propagation through each layer.
fn interval_bound(net: &Network, lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = (lo.to_vec(), hi.to_vec());
    let last = net.layers().len() - 1;
    for (l, layer) in net.layers().iter().enumerate() {
        let w = layer.weights();
        let mut nlo = Vec::new();
        let mut nhi = Vec::new();
        for (i, b) in layer.biases().iter().enumerate() {
            let (mut a, mut c) = (*b, *b);
            for (k, wik) in w.row(i).iter().enumerate() {
                if *wik >= 0.0 {
                    a += wik * lo[k];
                    c += wik * hi[k];
                } else {
                    a += wik * hi[k];
                    c += wik * lo[k];
                }
            }
            if l < last {
                // all three activations are nondecreasing
                a = net.activation().apply(a);
                c = net.activation().apply(c);
            }
            nlo.push(a);
            nhi.push(c);
        }
        lo = nlo;
        hi = nhi;
    }
    (lo[0], hi[0])
}

#[test]
fn outputs_lie_in_interval_enclosure() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for act in [Activation::Relu, Activation::Tanh, Activation::Sigmoid] {
        for _ in 0..20 {
            let net = random_net(&[3, 7, 7, 1], act, &mut rng);
            let (lo, hi) = interval_bound(&net, &[-1.0; 3], &[1.0; 3]);
            for _ in 0..50 {
                let v = net.eval(&random_point(3, &mut rng));
                assert!(v.is_finite());
                assert!(lo - 1e-12 <= v && v <= hi + 1e-12, "{v} not in [{lo}, {hi}]");
            }
        }
    }
}

#[test]
fn lipschitz_bound_holds_on_sampled_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for act in [Activation::Relu, Activation::Tanh, Activation::Sigmoid] {
        for _ in 0..20 {
            let net = random_net(&[2, 5, 5, 1], act, &mut rng);
            let lip = net.lipschitz_bound();
            for _ in 0..50 {
                let (x, y) = (random_point(2, &mut rng), random_point(2, &mut rng));
                let dist = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!((net.eval(&x) - net.eval(&y)).abs() <= lip * dist * (1.0 + 1e-12));
            }
        }
    }
}

/// Std of N(0, σ²) truncated to [-2σ, 2σ], by composite Simpson integration.
fn truncated_normal_std(sigma: f64) -> f64 {
    let a = GLOROT_TRUNCATION * sigma;
    let steps = 20_000;
    let h = 2.0 * a / steps as f64;
    let (mut mass, mut second) = (0.0, 0.0);
    for i in 0..=steps {
        let x = -a + i as f64 * h;
        let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let density = (-0.5 * (x / sigma).powi(2)).exp();
        mass += w * density;
        second += w * x * x * density;
    }
    (second / mass).sqrt()
}

#[test]
fn glorot_weights_follow_truncated_normal() {
    let sigma = glorot_sigma(3);
    let oracle = truncated_normal_std(sigma);
    assert!((oracle - 0.622).abs() < 1e-3, "{oracle}");

    let net = Network::init_glorot(&[3, 320, 320, 1], Activation::Tanh, 2024).unwrap();
    let weights: Vec<f64> = net.layers().iter().flat_map(|l| l.weights().as_slice().to_vec()).collect();
    assert!(weights.len() >= 100_000);
    assert!(weights.iter().all(|w| w.abs() <= GLOROT_TRUNCATION * sigma));
    let n = weights.len() as f64;
    let mean = weights.iter().sum::<f64>() / n;
    let std = (weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((std / oracle - 1.0).abs() < 0.05, "sample std {std}, oracle {oracle}");
    assert!(net.layers().iter().all(|l| l.biases().iter().all(|&b| b == 0.0)));
}

#[test]
fn glorot_is_deterministic_per_seed() {
    let a = Network::init_glorot(&[3, 5, 1], Activation::Sigmoid, 77).unwrap();
    let b = Network::init_glorot(&[3, 5, 1], Activation::Sigmoid, 77).unwrap();
    let c = Network::init_glorot(&[3, 5, 1], Activation::Sigmoid, 78).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn moment_certificates() {
    let x = Matrix::from_rows(&[[0.1, 0.2], [-0.5, 0.9], [1.0, -1.0]]).unwrap();
    let zero = Network::zeros(&[2, 3, 1], Activation::Tanh).unwrap();
    let cert = zero.second_moment(&x, 1e-9).unwrap();
    assert_eq!((cert.second_moment, cert.satisfied), (0.0, true));
    let c = Network::from_parts(&[2, 1], Activation::Tanh, vec![vec![0.0, 0.0]], vec![vec![-1.5]]).unwrap();
    let cert = c.second_moment(&x, 2.0).unwrap();
    assert_eq!((cert.second_moment, cert.satisfied), (2.25, false));
    assert!(matches!(c.second_moment(&Matrix::zeros(0, 2), 1.0), Err(Error::Input(_))));

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let data = nnsig::data::uniform_covariates(500, 3, &mut rng);
    for k in 0..50 {
        let net = Network::init_glorot(&[3, 8, 8, 1], Activation::Tanh, k).unwrap();
        let cert = net.second_moment(&data, 1.0).unwrap();
        assert!(cert.second_moment.is_finite() && cert.second_moment >= 0.0);
    }
}

#[test]
fn save_load_reproduces_outputs_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for act in [Activation::Relu, Activation::Tanh, Activation::Sigmoid] {
        let net = random_net(&[4, 6, 5, 1], act, &mut rng);
        let path = dir.path().join(format!("{act}.nnsig"));
        net.save(&path).unwrap();
        let back = Network::load(&path).unwrap();
        assert_eq!(back, net);
        for _ in 0..100 {
            let x = random_point(4, &mut rng);
            assert_eq!(net.eval(&x).to_bits(), back.eval(&x).to_bits());
        }
    }
}

#[test]
fn damaged_files_are_format_errors() {
    let net = Network::init_glorot(&[2, 3, 1], Activation::Tanh, 1).unwrap();
    let bytes = net.to_bytes();

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(Network::from_bytes(&bad_magic), Err(Error::Format(_))));

    let mut bad_version = bytes.clone();
    bad_version[5] = b'2';
    assert!(matches!(Network::from_bytes(&bad_version), Err(Error::Format(_))));

    for cut in [3, 10, 20, bytes.len() - 1] {
        assert!(matches!(Network::from_bytes(&bytes[..cut]), Err(Error::Format(_))), "cut {cut}");
    }

    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(Network::from_bytes(&trailing), Err(Error::Format(_))));

    let mut unknown = bytes.clone();
    // the activation name follows the magic and its u32 length
    unknown[10..14].copy_from_slice(b"tanq");
    match Network::from_bytes(&unknown) {
        Err(Error::Format(msg)) => assert!(msg.contains("tanq"), "{msg}"),
        other => panic!("{other:?}"),
    }
}
