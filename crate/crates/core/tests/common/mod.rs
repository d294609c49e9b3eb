//! Reference computations that share no code with the library's numeric
//! paths. Used by both the oracle tests and the acceptance runner.
#![allow(dead_code)]

pub mod checks;

use std::path::PathBuf;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `x^3 p (x - p) / ((2p - x)^2 + eps)`, straight from the formula.
pub fn rule_formula(x: f64, p: f64, z: f64, eta: f64, eps: f64) -> f64 {
    eta * z * x.powi(3) * p * (x - p) / ((2.0 * p - x).powi(2) + eps)
}

/// Spike-timing form evaluated at `T_pre = 1/x`, `ΔT = 1/p - 1/x`.
pub fn timing_form(x: f64, p: f64) -> f64 {
    let t_pre = 1.0 / x;
    let dt = 1.0 / p - 1.0 / x;
    dt / (t_pre.powi(2) * (t_pre - dt).powi(2))
}

/// Loss of a bias-free sigmoid MLP, computed with explicit loops.
pub fn naive_bce(weights: &[Vec<Vec<f64>>], input: &[f64], y: f64) -> f64 {
    let mut a = input.to_vec();
    for w in weights {
        a = w
            .iter()
            .map(|row| {
                let z: f64 = row.iter().zip(&a).map(|(wi, ai)| wi * ai).sum();
                1.0 / (1.0 + (-z).exp())
            })
            .collect();
    }
    let p = a[0];
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

pub fn to_nested(weights: &[Array2<f64>]) -> Vec<Vec<Vec<f64>>> {
    weights
        .iter()
        .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
        .collect()
}

/// Central differences of [`naive_bce`] for every weight and input entry.
pub fn fd_gradients(
    weights: &[Vec<Vec<f64>>],
    input: &[f64],
    y: f64,
    h: f64,
) -> (Vec<Vec<Vec<f64>>>, Vec<f64>) {
    let mut w = weights.to_vec();
    let mut gw = weights.to_vec();
    for l in 0..w.len() {
        for j in 0..w[l].len() {
            for i in 0..w[l][j].len() {
                let orig = w[l][j][i];
                w[l][j][i] = orig + h;
                let up = naive_bce(&w, input, y);
                w[l][j][i] = orig - h;
                let down = naive_bce(&w, input, y);
                w[l][j][i] = orig;
                gw[l][j][i] = (up - down) / (2.0 * h);
            }
        }
    }
    let mut x = input.to_vec();
    let gx = (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let up = naive_bce(weights, &x, y);
            x[i] = orig - h;
            let down = naive_bce(weights, &x, y);
            x[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect();
    (gw, gx)
}

/// Relative error with an absolute floor.
pub fn close(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    let diff = (a - b).abs();
    diff <= abs_floor || diff <= rel * a.abs().max(b.abs())
}

/// Textbook scalar Adam.
pub struct ScalarAdam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: f64,
    v: f64,
    t: i32,
}

impl ScalarAdam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: 0.0,
            v: 0.0,
            t: 0,
        }
    }

    pub fn step(&mut self, w: f64, g: f64) -> f64 {
        self.t += 1;
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g;
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g * g;
        let m_hat = self.m / (1.0 - self.beta1.powi(self.t));
        let v_hat = self.v / (1.0 - self.beta2.powi(self.t));
        w - self.lr * m_hat / (v_hat.sqrt() + self.eps)
    }
}

pub fn random_input(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// MNIST directory: `$STDPNET_MNIST_DIR`, else `data/mnist` in the workspace.
pub fn mnist_dir() -> PathBuf {
    let dir = std::env::var_os("STDPNET_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/mnist"));
    assert!(
        dir.join("train-images-idx3-ubyte").is_file(),
        "MNIST not found in {}; run scripts/fetch_data.sh or set STDPNET_MNIST_DIR",
        dir.display()
    );
    dir
}

pub fn iris_file() -> PathBuf {
    std::env::var_os("STDPNET_IRIS_FILE")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/iris.csv"))
}
