mod common;

use certq::bench::seeded_rng;
use certq::linalg::{cholesky, expm_scaled, norm_inf, solve_spd, DenseMatrix};
use proptest::prelude::*;

fn spd_from(entries: &[f64], n: usize, shift: f64) -> DenseMatrix {
    let m = DenseMatrix::from_row_major(n, n, entries.to_vec()).unwrap();
    let mut a = m
        .transpose()
        .matmul(&m)
        .add(&DenseMatrix::identity(n).scale(shift));
    a.symmetrize();
    a
}

#[test]
fn random_spd_reconstruction() {
    let mut rng = seeded_rng(3);
    let m = common::random_matrix(10, 10, 1.0, &mut rng);
    let mut a = m.transpose().matmul(&m).add(&DenseMatrix::identity(10));
    a.symmetrize();
    let l = cholesky(&a).unwrap().to_lower();
    let err = l.matmul(&l.transpose()).sub(&a).norm_fro() / a.norm_fro();
    assert!(err <= 1e-12, "reconstruction error {err}");
    for i in 0..10 {
        assert!(l[(i, i)] > 0.0);
        for j in i + 1..10 {
            assert_eq!(l[(i, j)], 0.0);
        }
    }
}

#[test]
fn ill_conditioned_solve_residual() {
    // diag spread 1e8 rotated by a fixed orthogonal-ish mixing
    let n = 6;
    let mut rng = seeded_rng(5);
    let g = common::random_matrix(n, n, 1.0, &mut rng);
    let mut base = g
        .transpose()
        .matmul(&g)
        .add(&DenseMatrix::identity(n).scale(1e-7));
    base.symmetrize();
    let b: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sin()).collect();
    let x = solve_spd(&cholesky(&base).unwrap(), &b).unwrap();
    let r: Vec<f64> = base
        .mul_vec(&x)
        .iter()
        .zip(&b)
        .map(|(a, c)| a - c)
        .collect();
    assert!(norm_inf(&r) <= 1e-10 * norm_inf(&b));
}

proptest! {
    #[test]
    fn spd_solve_residual(
        n in 1usize..12,
        entries in prop::collection::vec(-1.0f64..1.0, 144),
        rhs in prop::collection::vec(-10.0f64..10.0, 12),
        shift in 0.01f64..10.0,
    ) {
        let a = spd_from(&entries[..n * n], n, shift);
        let b = &rhs[..n];
        let x = solve_spd(&cholesky(&a).unwrap(), b).unwrap();
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(b).map(|(p, q)| p - q).collect();
        prop_assert!(norm_inf(&r) <= 1e-10 * norm_inf(b).max(1e-300));
    }

    #[test]
    fn expm_inverse_pair(
        n in 1usize..6,
        entries in prop::collection::vec(-1.0f64..1.0, 25),
        scale in 0.0f64..10.0,
    ) {
        let m = DenseMatrix::from_row_major(n, n, entries[..n * n].to_vec()).unwrap();
        let norm = m.norm_inf();
        let m = if norm > 0.0 { m.scale(scale / norm) } else { m };
        let (fwd, bwd) = (expm_scaled(&m), expm_scaled(&m.scale(-1.0)));
        // round-off in the product grows with ‖e^M‖‖e^−M‖ for non-normal M
        let cond = fwd.norm_inf() * bwd.norm_inf();
        let err = fwd.matmul(&bwd).sub(&DenseMatrix::identity(n)).max_abs();
        prop_assert!(err <= 1e-13 * cond, "err {} cond {}", err, cond);
    }

    #[test]
    fn expm_block_triangular(
        entries in prop::collection::vec(-1.0f64..1.0, 15),
        ts in 0.01f64..1.0,
    ) {
        let a = DenseMatrix::from_row_major(3, 3, entries[..9].to_vec()).unwrap();
        let b = DenseMatrix::from_row_major(3, 2, entries[9..].to_vec()).unwrap();
        let mut aug = DenseMatrix::zeros(5, 5);
        aug.set_block(0, 0, &a);
        aug.set_block(0, 3, &b);
        let e = expm_scaled(&aug.scale(ts));
        let top = e.block(0, 0, 3, 3);
        prop_assert!(top.sub(&expm_scaled(&a.scale(ts))).max_abs() <= 1e-12);
        prop_assert!(e.block(3, 0, 2, 3).max_abs() == 0.0);
        prop_assert!(e.block(3, 3, 2, 2).sub(&DenseMatrix::identity(2)).max_abs() == 0.0);
    }
}

#[test]
fn expm_matches_series_on_random_matrix() {
    // independent check: plain Taylor series with many terms on a small-norm matrix
    let mut rng = seeded_rng(9);
    let m = common::random_matrix(4, 4, 0.3, &mut rng);
    let mut term = DenseMatrix::identity(4);
    let mut sum = DenseMatrix::identity(4);
    for k in 1..40 {
        term = term.matmul(&m).scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    assert!(expm_scaled(&m).sub(&sum).max_abs() <= 1e-14);
}
