//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use nnsig::network::min_hidden_margin;
use nnsig::{Activation, Matrix, Network};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_net(dims: &[usize], act: Activation, rng: &mut ChaCha8Rng) -> Network {
    let normal = Normal::new(0.0, 0.8).unwrap();
    let weights = dims
        .windows(2)
        .map(|w| (0..w[0] * w[1]).map(|_| normal.sample(rng)).collect())
        .collect();
    let biases = dims[1..]
        .iter()
        .map(|&h| (0..h).map(|_| normal.sample(rng) * 0.3).collect())
        .collect();
    Network::from_parts(dims, act, weights, biases).unwrap()
}

pub fn random_point(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn central_difference(net: &Network, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[j] += h;
            down[j] -= h;
            (net.eval(&up) - net.eval(&down)) / (2.0 * h)
        })
        .collect()
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|u| u * u).sum::<f64>().sqrt().max(1e-8);
    diff / scale
}

/// Worst relative error of analytic input gradients against central differences
/// over 100 random networks and points whose hidden margins exceed `min_margin`.
pub fn worst_gradient_error(act: Activation, min_margin: f64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 100 {
        let d = rng.random_range(1..=5);
        let h = rng.random_range(2..=8);
        let depth = rng.random_range(1..=3);
        let mut dims = vec![d];
        dims.extend(std::iter::repeat_n(h, depth));
        dims.push(1);
        let net = random_net(&dims, act, &mut rng);
        let x = random_point(d, &mut rng);
        if min_hidden_margin(&net, &x) <= min_margin {
            continue;
        }
        let g = net.input_gradient(&x).unwrap();
        worst = worst.max(relative_error(&g, &central_difference(&net, &x, 1e-5)));
        checked += 1;
    }
    (worst, checked)
}

/// Largest eigenvalue of a symmetric matrix by power iteration.
fn top_eigenvalue(a: &Matrix, iters: usize, seed: u64) -> f64 {
    let mut v = normal_vec(&mut rng(seed), a.rows());
    let mut lambda = 0.0;
    for _ in 0..iters {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let w = a.mul_vec(&v);
        lambda = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        v = w;
    }
    lambda
}

/// Smallest eigenvalue of a symmetric matrix: power iteration on `ρI − A`
/// with `ρ` an upper bound on the spectrum (the max absolute row sum).
pub fn min_eigenvalue(a: &Matrix) -> f64 {
    let m = a.rows();
    let rho = (0..m)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut shifted = Matrix::zeros(m, m);
    for i in 0..m {
        for k in 0..m {
            shifted[(i, k)] = if i == k { rho } else { 0.0 } - a[(i, k)];
        }
    }
    rho - top_eigenvalue(&shifted, 2000, 17)
}

/// Strips wall-clock fields from a JSON report.
pub fn without_clock(mut v: serde_json::Value) -> serde_json::Value {
    strip(&mut v);
    v
}

fn strip(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("timestamp");
            map.remove("timings");
            map.values_mut().for_each(strip);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}
