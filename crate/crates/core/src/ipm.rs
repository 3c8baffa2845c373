//! Feasible full-Newton path-following interior-point method for
//! box-constrained QPs.
//!
//! The problem `min ½yᵀQy + yᵀd, l ≤ y ≤ u` is mapped onto the unit box
//! `[-1, 1]ⁿ`, its linear term is normalized to unit infinity norm, and the
//! iteration starts from a closed-form strictly feasible point that is
//! already close to the central path. Every iteration shrinks the path
//! parameter by the fixed factor `1 - η` and takes one full Newton step, so
//! the number of iterations needed to push the duality gap under `ε` is known
//! before the first iteration: see [`certified_iterations`].
//!
//! The multiplier/slack pairing is
//!
//! ```text
//! 2λH̃z + 2λh̃ + γ − θ = 0,   z + φ − e = 0,   z − ψ + e = 0,
//! γφ = τ²e,   θψ = τ²e
//! ```
//!
//! where `γ, φ` belong to the upper bound and `θ, ψ` to the lower bound.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, norm2, norm_inf, DenseMatrix};
use crate::table::fmt_sig12;

/// Relative threshold below which the transformed linear term counts as zero.
pub const ZERO_GRADIENT_TOL: f64 = 1e-14;

/// Box-constrained convex QP `min ½yᵀQy + yᵀd` subject to `l ≤ y ≤ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxQp {
    q: DenseMatrix,
    d: Vec<f64>,
    l: Vec<f64>,
    u: Vec<f64>,
}

impl BoxQp {
    /// Validates dimensions, finiteness, `l < u` and positive definiteness of `Q`.
    pub fn new(q: DenseMatrix, d: Vec<f64>, l: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let n = q.rows();
        if n == 0 {
            return Err(Error::InvalidProblem("empty problem".into()));
        }
        if !q.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Q is {}x{}, expected square",
                q.rows(),
                q.cols()
            )));
        }
        for (name, v) in [("d", &d), ("l", &l), ("u", &u)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has length {}, expected {n}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidProblem(format!(
                    "{name} has non-finite entries"
                )));
            }
        }
        if let Some(i) = (0..n).find(|&i| !(l[i] < u[i])) {
            return Err(Error::InvalidProblem(format!(
                "bounds l[{i}]={} must be below u[{i}]={}",
                l[i], u[i]
            )));
        }
        cholesky(&q).map_err(|e| Error::InvalidProblem(format!("Q is not SPD: {e}")))?;
        Ok(Self { q, d, l, u })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    pub fn upper(&self) -> &[f64] {
        &self.u
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        0.5 * dot(y, &self.q.mul_vec(y)) + dot(y, &self.d)
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut g = self.q.mul_vec(y);
        for (gi, di) in g.iter_mut().zip(&self.d) {
            *gi += di;
        }
        g
    }

    /// Same argmin with `Q` and `d` multiplied by `c > 0`.
    pub fn scaled_objective(&self, c: f64) -> Self {
        Self {
            q: self.q.scale(c),
            d: self.d.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// Maps `p` onto `[-1, 1]ⁿ` through `y = ½diag(u−l)z + ½(u+l)`.
///
/// Returns `(H, h)` with `H = diag(u−l) Q diag(u−l)` and
/// `h = diag(u−l)(Q(u+l) + 2d)`; the transformed objective is
/// `¼(½zᵀHz + zᵀh)` plus a constant.
pub fn to_scaled_box(p: &BoxQp) -> (DenseMatrix, Vec<f64>) {
    let width: Vec<f64> = p.u.iter().zip(&p.l).map(|(u, l)| u - l).collect();
    let center_sum: Vec<f64> = p.u.iter().zip(&p.l).map(|(u, l)| u + l).collect();
    let mut hess = p.q.scale_rows_cols(&width, &width);
    hess.symmetrize();
    let qc = p.q.mul_vec(&center_sum);
    let h = (0..p.dim())
        .map(|i| width[i] * (qc[i] + 2.0 * p.d[i]))
        .collect();
    (hess, h)
}

/// Inverse coordinate map from the unit box back to `[l, u]`.
pub fn recover(z: &[f64], l: &[f64], u: &[f64]) -> Vec<f64> {
    z.iter()
        .zip(l.iter().zip(u))
        .map(|(&zi, (&li, &ui))| (0.5 * (ui - li) * zi + 0.5 * (ui + li)).clamp(li, ui))
        .collect()
}

/// Unit-box problem with its linear term normalized to `‖h̃‖∞ = 1`.
#[derive(Debug, Clone)]
pub struct ScaledProblem {
    pub h_mat: DenseMatrix,
    pub h: Vec<f64>,
    pub h_tilde_mat: DenseMatrix,
    pub h_tilde: Vec<f64>,
    pub hinf: f64,
    pub lambda: f64,
}

impl ScaledProblem {
    pub fn dim(&self) -> usize {
        self.h.len()
    }
}

pub fn scale_problem(h_mat: DenseMatrix, h: Vec<f64>) -> Result<ScaledProblem> {
    if h_mat.rows() != h.len() || !h_mat.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, h has length {}",
            h_mat.rows(),
            h_mat.cols(),
            h.len()
        )));
    }
    let hinf = norm_inf(&h);
    if hinf == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let n = h.len();
    Ok(ScaledProblem {
        h_tilde_mat: h_mat.scale(1.0 / hinf),
        h_tilde: h.iter().map(|v| v / hinf).collect(),
        h_mat,
        h,
        hinf,
        lambda: 1.0 / ((n + 1) as f64).sqrt(),
    })
}

/// Everything fixed before the first iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub eps: f64,
    pub eta: f64,
    pub tau0: f64,
    pub lambda: f64,
    pub iterations: usize,
}

/// Path-parameter reduction per iteration, `η = 1/(4√(2n))`.
pub fn step_reduction(n: usize) -> f64 {
    1.0 / (4.0 * (2.0 * n as f64).sqrt())
}

/// Exact iteration count `⌈log(2n/ε) / (−2 log(1 − η))⌉ + 1` of the solver.
pub fn certified_iterations(n: usize, eps: f64) -> Result<Certificate> {
    if n == 0 {
        return Err(Error::InvalidProblem("dimension must be at least 1".into()));
    }
    let two_n = 2.0 * n as f64;
    if !(eps > 0.0 && eps < two_n) {
        return Err(Error::InvalidTolerance { n, eps });
    }
    let eta = step_reduction(n);
    let ratio = (two_n / eps).ln() / (-2.0 * (1.0 - eta).ln());
    Ok(Certificate {
        n,
        eps,
        eta,
        tau0: 1.0 / (1.0 - eta),
        lambda: 1.0 / ((n + 1) as f64).sqrt(),
        iterations: ratio.ceil() as usize + 1,
    })
}

/// Primal-dual iterate in unit-box coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub z: Vec<f64>,
    pub gamma: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub tau: f64,
}

impl IterateState {
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Duality gap `vᵀs = γᵀφ + θᵀψ`.
    pub fn gap(&self) -> f64 {
        dot(&self.gamma, &self.phi) + dot(&self.theta, &self.psi)
    }

    /// Smallest entry among `γ, θ, φ, ψ`.
    pub fn min_positive(&self) -> f64 {
        [&self.gamma, &self.theta, &self.phi, &self.psi]
            .iter()
            .flat_map(|v| v.iter())
            .fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// `min(vs)` over both complementary pairs.
    pub fn min_complementary(&self) -> f64 {
        self.gamma
            .iter()
            .zip(&self.phi)
            .chain(self.theta.iter().zip(&self.psi))
            .map(|(a, b)| a * b)
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖2λH̃z + 2λh̃ + γ − θ‖∞`.
    pub fn stationarity_residual(&self, sp: &ScaledProblem) -> f64 {
        let hz = sp.h_tilde_mat.mul_vec(&self.z);
        (0..self.dim())
            .map(|i| {
                (2.0 * sp.lambda * (hz[i] + sp.h_tilde[i]) + self.gamma[i] - self.theta[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max(‖z + φ − e‖∞, ‖z − ψ + e‖∞)`.
    pub fn feasibility_residual(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let upper = (self.z[i] + self.phi[i] - 1.0).abs();
                let lower = (self.z[i] - self.psi[i] + 1.0).abs();
                upper.max(lower)
            })
            .fold(0.0, f64::max)
    }
}

/// Closed-form strictly feasible starting point with `τ = τ⁰ = 1/(1−η)`.
pub fn initialize(sp: &ScaledProblem) -> IterateState {
    let n = sp.dim();
    let lh: Vec<f64> = sp.h_tilde.iter().map(|h| sp.lambda * h).collect();
    IterateState {
        z: vec![0.0; n],
        gamma: lh.iter().map(|v| 1.0 - v).collect(),
        theta: lh.iter().map(|v| 1.0 + v).collect(),
        phi: vec![1.0; n],
        psi: vec![1.0; n],
        tau: 1.0 / (1.0 - step_reduction(n)),
    }
}

/// One full Newton step toward the central-path point with parameter `tau_next`.
pub fn newton_step(sp: &ScaledProblem, st: &IterateState, tau_next: f64) -> Result<IterateState> {
    newton_step_at(sp, st, tau_next, 0)
}

fn newton_step_at(
    sp: &ScaledProblem,
    st: &IterateState,
    tau: f64,
    iteration: usize,
) -> Result<IterateState> {
    let n = st.dim();
    let upper_ratio: Vec<f64> = st.gamma.iter().zip(&st.phi).map(|(g, p)| g / p).collect();
    let lower_ratio: Vec<f64> = st.theta.iter().zip(&st.psi).map(|(t, p)| t / p).collect();
    let upper_root: Vec<f64> = upper_ratio.iter().map(|r| r.sqrt()).collect();
    let lower_root: Vec<f64> = lower_ratio.iter().map(|r| r.sqrt()).collect();

    let mut m = sp.h_tilde_mat.scale(2.0 * sp.lambda);
    for i in 0..n {
        m[(i, i)] += upper_ratio[i] + lower_ratio[i];
    }
    let factor = cholesky(&m).map_err(|e| Error::NumericalBreakdown {
        iteration,
        reason: format!("Newton matrix: {e}"),
    })?;
    let mut dz: Vec<f64> = (0..n)
        .map(|i| 2.0 * (lower_root[i] * tau - upper_root[i] * tau + st.gamma[i] - st.theta[i]))
        .collect();
    factor.solve_in_place(&mut dz);

    let mut next = IterateState {
        z: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        psi: Vec::with_capacity(n),
        tau,
    };
    for i in 0..n {
        let dgamma = upper_ratio[i] * dz[i] + 2.0 * (upper_root[i] * tau - st.gamma[i]);
        let dtheta = -lower_ratio[i] * dz[i] + 2.0 * (lower_root[i] * tau - st.theta[i]);
        next.z.push(st.z[i] + dz[i]);
        next.gamma.push(st.gamma[i] + dgamma);
        next.theta.push(st.theta[i] + dtheta);
        next.phi.push(st.phi[i] - dz[i]);
        next.psi.push(st.psi[i] + dz[i]);
    }
    let min = next.min_positive();
    if !(min > 0.0) {
        return Err(Error::NumericalBreakdown {
            iteration,
            reason: format!("iterate lost strict positivity (min entry {min:e})"),
        });
    }
    Ok(next)
}

/// Snapshot of one iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationDiagnostics {
    pub k: usize,
    pub tau: f64,
    pub gap: f64,
    pub proximity: f64,
    pub stationarity_residual: f64,
    pub min_complementary: f64,
}

/// Proximity `‖τe − β‖/τ` of `β = √(vs)` to the central-path target `τ`.
pub fn proximity(beta: &[f64], tau: f64) -> f64 {
    let dev: Vec<f64> = beta.iter().map(|b| tau - b).collect();
    norm2(&dev) / tau
}

/// Diagnostics of `st` as iterate number `k`.
///
/// The proximity is measured against the next target `(1−η)τ`, which is the
/// quantity that must stay below `1/√2` for the next full step to be safe.
pub fn diagnostics(sp: &ScaledProblem, st: &IterateState, k: usize) -> IterationDiagnostics {
    let beta: Vec<f64> = st
        .gamma
        .iter()
        .zip(&st.phi)
        .chain(st.theta.iter().zip(&st.psi))
        .map(|(v, s)| (v * s).sqrt())
        .collect();
    let target = (1.0 - step_reduction(st.dim())) * st.tau;
    IterationDiagnostics {
        k,
        tau: st.tau,
        gap: st.gap(),
        proximity: proximity(&beta, target),
        stationarity_residual: st.stationarity_residual(sp),
        min_complementary: st.min_complementary(),
    }
}

/// Output of [`solve`].
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub ystar: Vec<f64>,
    pub zstar: Vec<f64>,
    pub duality_gap: f64,
    pub iterations_run: usize,
    /// `None` when the zero-gradient shortcut returned the box center.
    pub certificate: Option<Certificate>,
    /// First iteration whose gap was already `≤ ε`.
    pub first_converged: Option<usize>,
    pub trace: Option<Vec<IterationDiagnostics>>,
}

/// Solves `p` to duality gap `≤ eps` in exactly the certified number of iterations.
pub fn solve(p: &BoxQp, eps: f64, trace: bool) -> Result<SolveResult> {
    let n = p.dim();
    let cert = certified_iterations(n, eps)?;
    let (h_mat, h) = to_scaled_box(p);

    if norm_inf(&h) <= ZERO_GRADIENT_TOL * h_mat.norm_inf().max(1.0) {
        let z = vec![0.0; n];
        return Ok(SolveResult {
            ystar: recover(&z, &p.l, &p.u),
            zstar: z,
            duality_gap: 0.0,
            iterations_run: 0,
            certificate: None,
            first_converged: Some(0),
            trace: trace.then(Vec::new),
        });
    }

    let sp = scale_problem(h_mat, h)?;
    let mut st = initialize(&sp);
    let mut log = trace.then(|| Vec::with_capacity(cert.iterations + 1));
    if let Some(log) = log.as_mut() {
        log.push(diagnostics(&sp, &st, 0));
    }

    let mut first_converged = None;
    for k in 1..=cert.iterations {
        let tau = (1.0 - cert.eta) * st.tau;
        st = newton_step_at(&sp, &st, tau, k)?;
        if first_converged.is_none() && st.gap() <= eps {
            first_converged = Some(k);
        }
        if let Some(log) = log.as_mut() {
            log.push(diagnostics(&sp, &st, k));
        }
    }

    Ok(SolveResult {
        ystar: recover(&st.z, &p.l, &p.u),
        duality_gap: st.gap(),
        zstar: st.z,
        iterations_run: cert.iterations,
        certificate: Some(cert),
        first_converged,
        trace: log,
    })
}

/// Header of the per-iteration trace CSV.
pub const TRACE_HEADER: &str = "k,tau,gap,proximity,stationarity_residual,min_complementary";

pub fn write_trace_csv<W: Write>(trace: &[IterationDiagnostics], mut w: W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for d in trace {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            d.k,
            fmt_sig12(d.tau),
            fmt_sig12(d.gap),
            fmt_sig12(d.proximity),
            fmt_sig12(d.stationarity_residual),
            fmt_sig12(d.min_complementary)
        )?;
    }
    Ok(())
}
