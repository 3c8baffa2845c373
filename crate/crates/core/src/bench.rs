//! Seeded random instances and the solver-versus-oracle benchmark.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ipm::{certified_iterations, solve, BoxQp};
use crate::linalg::DenseMatrix;
use crate::oracle::solve_enumeration;

/// Random SPD box QP: `Q = MᵀM + I` with `M ~ U[−1,1]`, `d ~ U[−5,5]`,
/// `l = −a`, `u = b` with `a, b ~ U[0.5, 2]`.
pub fn random_instance<R: Rng>(n: usize, rng: &mut R) -> BoxQp {
    let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let m = DenseMatrix::from_row_major(n, n, m).expect("sized storage");
    let mut q = m.transpose().matmul(&m).add(&DenseMatrix::identity(n));
    q.symmetrize();
    let d = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    let l = (0..n).map(|_| -rng.gen_range(0.5..=2.0)).collect();
    let u = (0..n).map(|_| rng.gen_range(0.5..=2.0)).collect();
    BoxQp::new(q, d, l, u).expect("MᵀM + I is SPD and l < 0 < u")
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-dimension benchmark summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionStats {
    pub n: usize,
    pub instances: usize,
    pub certified: usize,
    /// Distinct iteration counts observed, sorted.
    pub iteration_counts: Vec<usize>,
    pub max_deviation: f64,
    pub max_gap: f64,
    pub first_converged_min: usize,
    pub first_converged_max: usize,
}

impl DimensionStats {
    pub fn iterations_constant(&self) -> bool {
        self.iteration_counts.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub seed: u64,
    pub eps: f64,
    pub dims: Vec<DimensionStats>,
}

impl BenchReport {
    pub fn max_deviation(&self) -> f64 {
        self.dims
            .iter()
            .map(|d| d.max_deviation)
            .fold(0.0, f64::max)
    }

    pub fn all_constant(&self) -> bool {
        self.dims.iter().all(DimensionStats::iterations_constant)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "bench seed={} eps={:e}", self.seed, self.eps);
        for d in &self.dims {
            let counts: Vec<String> = d.iteration_counts.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(
                out,
                "n={} instances={} N={} iters=[{}] constant={} max_dev={:.3e} max_gap={:.3e} first_below_eps=[{},{}]",
                d.n,
                d.instances,
                d.certified,
                counts.join(","),
                d.iterations_constant(),
                d.max_deviation,
                d.max_gap,
                d.first_converged_min,
                d.first_converged_max,
            );
        }
        let _ = writeln!(
            out,
            "summary max_dev={:.3e} all_constant={}",
            self.max_deviation(),
            self.all_constant()
        );
        out
    }
}

/// Solves `count` random instances for every `n` in `1..=nmax` with both the
/// interior-point solver and the enumeration oracle.
pub fn run_bench(count: usize, nmax: usize, eps: f64, seed: u64) -> Result<BenchReport> {
    let mut rng = seeded_rng(seed);
    let mut dims = Vec::with_capacity(nmax);
    for n in 1..=nmax {
        let certified = certified_iterations(n, eps)?.iterations;
        let mut stats = DimensionStats {
            n,
            instances: count,
            certified,
            iteration_counts: Vec::new(),
            max_deviation: 0.0,
            max_gap: 0.0,
            first_converged_min: usize::MAX,
            first_converged_max: 0,
        };
        for _ in 0..count {
            let p = random_instance(n, &mut rng);
            let sol = solve(&p, eps, false)?;
            let reference = solve_enumeration(&p)?;
            let dev = sol
                .ystar
                .iter()
                .zip(&reference.ystar)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            stats.max_deviation = stats.max_deviation.max(dev);
            stats.max_gap = stats.max_gap.max(sol.duality_gap);
            if !stats.iteration_counts.contains(&sol.iterations_run) {
                stats.iteration_counts.push(sol.iterations_run);
            }
            let first = sol.first_converged.unwrap_or(usize::MAX);
            stats.first_converged_min = stats.first_converged_min.min(first);
            stats.first_converged_max = stats.first_converged_max.max(first);
        }
        stats.iteration_counts.sort_unstable();
        dims.push(stats);
    }
    Ok(BenchReport { seed, eps, dims })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible() {
        let a = random_instance(4, &mut seeded_rng(7));
        let b = random_instance(4, &mut seeded_rng(7));
        assert_eq!(a, b);
        assert!(a.lower().iter().all(|&v| (-2.0..=-0.5).contains(&v)));
        assert!(a.upper().iter().all(|&v| (0.5..=2.0).contains(&v)));
    }

    #[test]
    fn small_bench_is_deterministic() {
        let a = run_bench(3, 3, 1e-8, 11).unwrap();
        let b = run_bench(3, 3, 1e-8, 11).unwrap();
        assert_eq!(a.render(), b.render());
        assert!(a.all_constant());
        assert!(a.max_deviation() < 1e-4);
    }
}
