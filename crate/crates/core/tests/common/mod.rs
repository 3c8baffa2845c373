#![allow(dead_code)]

use certq::linalg::{dot, DenseMatrix};
use certq::mpc::{ContinuousLti, DiscreteLti, MpcConfig};
use rand::Rng;

/// Tracking cost of the input sequence `u` (stacked) by explicit simulation.
pub fn simulated_cost(
    model: &DiscreteLti,
    cfg: &MpcConfig,
    x0: &[f64],
    uprev: &[f64],
    reference: &[f64],
    u: &[f64],
) -> f64 {
    let (nu, ny) = (model.nu(), model.ny());
    let mut x = x0.to_vec();
    let mut prev = uprev.to_vec();
    let mut cost = 0.0;
    for k in 0..cfg.horizon {
        let uk = &u[k * nu..(k + 1) * nu];
        let du: Vec<f64> = uk.iter().zip(&prev).map(|(a, b)| a - b).collect();
        cost += quad(&cfg.wu, uk) + quad(&cfg.wdu, &du);
        x = model.step(&x, uk);
        let y = model.output(&x);
        let e: Vec<f64> = y
            .iter()
            .zip(&reference[k * ny..(k + 1) * ny])
            .map(|(a, b)| a - b)
            .collect();
        cost += quad(&cfg.wy, &e);
        prev = uk.to_vec();
    }
    cost
}

pub fn quad(w: &DenseMatrix, v: &[f64]) -> f64 {
    dot(v, &w.mul_vec(v))
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-scale..=scale))
        .collect();
    DenseMatrix::from_row_major(rows, cols, data).unwrap()
}

pub fn random_vec<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..=scale)).collect()
}

/// Random PSD weight `GᵀG` (optionally plus a diagonal shift).
pub fn random_weight<R: Rng>(n: usize, shift: f64, rng: &mut R) -> DenseMatrix {
    let g = random_matrix(n, n, 1.0, rng);
    let mut w = g
        .transpose()
        .matmul(&g)
        .add(&DenseMatrix::identity(n).scale(shift));
    w.symmetrize();
    w
}

/// Random small discrete plant and config with `WΔu ≻ 0`.
pub fn random_mpc<R: Rng>(rng: &mut R) -> (DiscreteLti, MpcConfig) {
    let nx = rng.gen_range(1..=3);
    let nu = rng.gen_range(1..=2);
    let ny = rng.gen_range(1..=2);
    let horizon = rng.gen_range(1..=3);
    let model = DiscreteLti::new(
        random_matrix(nx, nx, 0.8, rng),
        random_matrix(nx, nu, 1.0, rng),
        random_matrix(ny, nx, 1.0, rng),
        0.1,
    )
    .unwrap();
    let cfg = MpcConfig {
        horizon,
        wy: random_weight(ny, 0.0, rng),
        wu: random_weight(nu, 0.0, rng).scale(0.1),
        wdu: random_weight(nu, 0.1, rng),
        umin: vec![-1.0; nu],
        umax: vec![1.0; nu],
    };
    (model, cfg)
}

/// RK4 integration of `ẋ = Ax + Bu` with `u` held constant over `duration`.
pub fn rk4_hold(
    m: &ContinuousLti,
    x: &[f64],
    u: &[f64],
    duration: f64,
    substeps: usize,
) -> Vec<f64> {
    let h = duration / substeps as f64;
    let bu = m.b.mul_vec(u);
    let f =
        |x: &[f64]| -> Vec<f64> { m.a.mul_vec(x).iter().zip(&bu).map(|(a, b)| a + b).collect() };
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    let mut x = x.to_vec();
    for _ in 0..substeps {
        let k1 = f(&x);
        let k2 = f(&axpy(&x, &k1, h / 2.0));
        let k3 = f(&axpy(&x, &k2, h / 2.0));
        let k4 = f(&axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}
