//! Independent reference solvers for box QPs.
//!
//! Neither routine shares code with the interior-point path beyond the dense
//! kernels; they exist to check its answers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ipm::BoxQp;
use crate::linalg::{cholesky, norm_inf, DenseMatrix};

/// Largest dimension accepted by [`solve_enumeration`].
pub const MAX_ENUMERATION_DIM: usize = 12;
/// Iteration cap of [`solve_projected_gradient`].
pub const MAX_PG_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMethod {
    ActiveSetEnumeration,
    ProjectedGradient,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub ystar: Vec<f64>,
    pub objective: f64,
    pub method: OracleMethod,
}

/// Natural KKT residual `‖y − clip(y − ∇J(y), l, u)‖∞`.
///
/// Zero exactly at the minimizer of a convex box QP.
pub fn kkt_residual(p: &BoxQp, y: &[f64]) -> f64 {
    let g = p.gradient(y);
    (0..p.dim())
        .map(|i| (y[i] - (y[i] - g[i]).clamp(p.lower()[i], p.upper()[i])).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Free,
    Lower,
    Upper,
}

/// Exhaustive active-set search over all `3ⁿ` assignments.
pub fn solve_enumeration(p: &BoxQp) -> Result<OracleResult> {
    let n = p.dim();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            max: MAX_ENUMERATION_DIM,
        });
    }
    let q = p.q();
    let (l, u, d) = (p.lower(), p.upper(), p.d());
    let scale = 1.0 + norm_inf(d) + q.max_abs() * (norm_inf(l).max(norm_inf(u)));
    let tol = 1e-9 * scale;

    let mut slots = vec![Slot::Free; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for s in slots.iter_mut() {
            *s = match c % 3 {
                0 => Slot::Free,
                1 => Slot::Lower,
                _ => Slot::Upper,
            };
            c /= 3;
        }
        let Some(y) = candidate(q, d, l, u, &slots) else {
            continue;
        };
        let violation = violation(p, &y, &slots);
        if violation <= tol {
            return Ok(finish(p, y, OracleMethod::ActiveSetEnumeration));
        }
        if best.as_ref().is_none_or(|(v, _)| violation < *v) {
            best = Some((violation, y));
        }
    }
    // Only reachable through roundoff on nearly degenerate instances.
    let (_, y) = best.expect("the all-free assignment always yields a candidate");
    Ok(finish(p, y, OracleMethod::ActiveSetEnumeration))
}

fn candidate(q: &DenseMatrix, d: &[f64], l: &[f64], u: &[f64], slots: &[Slot]) -> Option<Vec<f64>> {
    let n = d.len();
    let mut y = vec![0.0; n];
    let mut free = Vec::with_capacity(n);
    for i in 0..n {
        match slots[i] {
            Slot::Free => free.push(i),
            Slot::Lower => y[i] = l[i],
            Slot::Upper => y[i] = u[i],
        }
    }
    if free.is_empty() {
        return Some(y);
    }
    let k = free.len();
    let mut sub = DenseMatrix::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            sub[(a, b)] = q[(i, j)];
        }
        let mut r = -d[i];
        for j in 0..n {
            if slots[j] != Slot::Free {
                r -= q[(i, j)] * y[j];
            }
        }
        rhs[a] = r;
    }
    let f = cholesky(&sub).ok()?;
    f.solve_in_place(&mut rhs);
    for (a, &i) in free.iter().enumerate() {
        y[i] = rhs[a];
    }
    Some(y)
}

// Primal bound violation plus wrong-signed multipliers at the fixed bounds.
fn violation(p: &BoxQp, y: &[f64], slots: &[Slot]) -> f64 {
    let g = p.gradient(y);
    let (l, u) = (p.lower(), p.upper());
    let mut worst: f64 = 0.0;
    for i in 0..y.len() {
        let v = match slots[i] {
            Slot::Free => (l[i] - y[i]).max(y[i] - u[i]).max(0.0),
            Slot::Lower => (-g[i]).max(0.0),
            Slot::Upper => g[i].max(0.0),
        };
        worst = worst.max(v);
    }
    worst
}

fn finish(p: &BoxQp, y: Vec<f64>, method: OracleMethod) -> OracleResult {
    OracleResult {
        objective: p.objective(&y),
        ystar: y,
        method,
    }
}

/// Projected gradient with the fixed step `1/L`, `L` the Gershgorin bound of `Q`.
///
/// Stops when `‖y₊ − y‖∞ ≤ tol · max(1, ‖y‖∞)`.
pub fn solve_projected_gradient(p: &BoxQp, tol: f64) -> Result<OracleResult> {
    let n = p.dim();
    let lip = p.q().norm_inf();
    let (l, u) = (p.lower(), p.upper());
    let mut y: Vec<f64> = (0..n).map(|i| 0.0f64.clamp(l[i], u[i])).collect();
    for _ in 0..MAX_PG_ITERATIONS {
        let g = p.gradient(&y);
        let mut step: f64 = 0.0;
        for i in 0..n {
            let next = (y[i] - g[i] / lip).clamp(l[i], u[i]);
            step = step.max((next - y[i]).abs());
            y[i] = next;
        }
        if step <= tol * norm_inf(&y).max(1.0) {
            return Ok(finish(p, y, OracleMethod::ProjectedGradient));
        }
    }
    Err(Error::IterationLimit(MAX_PG_ITERATIONS))
}
