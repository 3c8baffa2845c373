//! Input-constrained linear MPC condensed into box QPs.
//!
//! The plant is discretized with a zero-order hold, the predicted states are
//! eliminated through the dynamics, and every sampling instant produces one
//! [`BoxQp`] in the stacked input sequence `U = (u₀, …, u_{T−1})`. Only the
//! linear term changes between instants, so the solver's iteration count is
//! the same at every step.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::ipm::{solve, BoxQp};
use crate::linalg::{cholesky, expm_scaled, DenseMatrix};
use crate::table::fmt_sig12;

/// Continuous-time plant `ẋ = Ax + Bu`, `y = Cx`.
#[derive(Debug, Clone)]
pub struct ContinuousLti {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub c: DenseMatrix,
}

impl ContinuousLti {
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix) -> Result<Self> {
        check_plant(&a, &b, &c)?;
        Ok(Self { a, b, c })
    }
}

fn check_plant(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<()> {
    if !a.is_square() || b.rows() != a.rows() || c.cols() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// Sampled plant `x⁺ = A_d x + B_d u`, `y = Cx`.
#[derive(Debug, Clone)]
pub struct DiscreteLti {
    pub ad: DenseMatrix,
    pub bd: DenseMatrix,
    pub c: DenseMatrix,
    pub ts: f64,
}

impl DiscreteLti {
    pub fn new(ad: DenseMatrix, bd: DenseMatrix, c: DenseMatrix, ts: f64) -> Result<Self> {
        check_plant(&ad, &bd, &c)?;
        Ok(Self { ad, bd, c, ts })
    }

    pub fn nx(&self) -> usize {
        self.ad.rows()
    }

    pub fn nu(&self) -> usize {
        self.bd.cols()
    }

    pub fn ny(&self) -> usize {
        self.c.rows()
    }

    pub fn step(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut next = self.ad.mul_vec(x);
        for (n, b) in next.iter_mut().zip(self.bd.mul_vec(u)) {
            *n += b;
        }
        next
    }

    pub fn output(&self, x: &[f64]) -> Vec<f64> {
        self.c.mul_vec(x)
    }
}

/// Zero-order-hold discretization through `expm([[A, B], [0, 0]]·Ts)`.
pub fn discretize_zoh(m: &ContinuousLti, ts: f64) -> Result<DiscreteLti> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "sampling time {ts} must be positive"
        )));
    }
    let nx = m.a.rows();
    let nu = m.b.cols();
    let mut aug = DenseMatrix::zeros(nx + nu, nx + nu);
    aug.set_block(0, 0, &m.a.scale(ts));
    aug.set_block(0, nx, &m.b.scale(ts));
    let e = expm_scaled(&aug);
    Ok(DiscreteLti {
        ad: e.block(0, 0, nx, nx),
        bd: e.block(0, nx, nx, nu),
        c: m.c.clone(),
        ts,
    })
}

/// Horizon, weights and input bounds.
///
/// The stage cost is `Σ_{k=1..T} ‖y_k − r_k‖²_Wy + Σ_{k=0..T−1} ‖u_k‖²_Wu + ‖u_k − u_{k−1}‖²_WΔu`.
#[derive(Debug, Clone)]
pub struct MpcConfig {
    pub horizon: usize,
    pub wy: DenseMatrix,
    pub wu: DenseMatrix,
    pub wdu: DenseMatrix,
    pub umin: Vec<f64>,
    pub umax: Vec<f64>,
}

impl MpcConfig {
    fn validate(&self, nu: usize, ny: usize) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidProblem("horizon must be at least 1".into()));
        }
        for (name, w, dim) in [
            ("Wy", &self.wy, ny),
            ("Wu", &self.wu, nu),
            ("Wdu", &self.wdu, nu),
        ] {
            if w.rows() != dim || w.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {dim}x{dim}",
                    w.rows(),
                    w.cols()
                )));
            }
            if w.relative_asymmetry() > 1e-12 || w.diag().iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidProblem(format!("{name} is not a PSD weight")));
            }
        }
        if self.umin.len() != nu || self.umax.len() != nu {
            return Err(Error::DimensionMismatch(
                "input bounds must have length nu".into(),
            ));
        }
        if self.umin.iter().zip(&self.umax).any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidProblem("umin must be below umax".into()));
        }
        Ok(())
    }
}

/// Prediction matrices and the constant Hessian of the condensed problem.
///
/// With `U` the stacked inputs, `Y = Φx₀ + ΓU` and `ΔU = SU − Eu₋₁`.
#[derive(Debug, Clone)]
pub struct CondensedMpc {
    pub model: DiscreteLti,
    pub config: MpcConfig,
    pub phi: DenseMatrix,
    pub gamma: DenseMatrix,
    pub s: DenseMatrix,
    pub q_qp: DenseMatrix,
    gamma_t_wy: DenseMatrix,
    // Sᵀ W̄Δu E, n × nu
    st_wdu_e: DenseMatrix,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

pub fn condense(model: DiscreteLti, config: MpcConfig) -> Result<CondensedMpc> {
    let (nx, nu, ny) = (model.nx(), model.nu(), model.ny());
    config.validate(nu, ny)?;
    let t = config.horizon;
    let n = nu * t;

    // C·A_d^k for k = 0..T
    let mut ca_pows = Vec::with_capacity(t + 1);
    let mut ca = model.c.clone();
    for _ in 0..=t {
        let next = ca.matmul(&model.ad);
        ca_pows.push(ca);
        ca = next;
    }
    let mut phi = DenseMatrix::zeros(ny * t, nx);
    for k in 1..=t {
        phi.set_block((k - 1) * ny, 0, &ca_pows[k]);
    }
    let markov: Vec<DenseMatrix> = ca_pows[..t].iter().map(|m| m.matmul(&model.bd)).collect();
    let mut gamma = DenseMatrix::zeros(ny * t, n);
    for k in 1..=t {
        for j in 0..k {
            gamma.set_block((k - 1) * ny, j * nu, &markov[k - 1 - j]);
        }
    }
    let mut s = DenseMatrix::identity(n);
    for k in 1..t {
        for i in 0..nu {
            s[(k * nu + i, (k - 1) * nu + i)] = -1.0;
        }
    }

    let wy_bar = config.wy.repeat_diag(t);
    let wu_bar = config.wu.repeat_diag(t);
    let wdu_bar = config.wdu.repeat_diag(t);
    let gamma_t_wy = gamma.transpose().matmul(&wy_bar);
    let st_wdu = s.transpose().matmul(&wdu_bar);
    let mut q_qp = gamma_t_wy
        .matmul(&gamma)
        .add(&wu_bar)
        .add(&st_wdu.matmul(&s))
        .scale(2.0);
    q_qp.symmetrize();
    cholesky(&q_qp)?;

    // E places u₋₁ in the first block, so SᵀW̄ΔuE is the first nu columns.
    let st_wdu_e = st_wdu.block(0, 0, n, nu);
    let lower = config.umin.repeat(t);
    let upper = config.umax.repeat(t);
    Ok(CondensedMpc {
        model,
        config,
        phi,
        gamma,
        s,
        q_qp,
        gamma_t_wy,
        st_wdu_e,
        lower,
        upper,
    })
}

impl CondensedMpc {
    /// Number of decision variables `nu·T`.
    pub fn dim(&self) -> usize {
        self.q_qp.rows()
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon
    }

    /// Box QP for state `x0`, previous input `uprev` and the stacked
    /// reference `R = (r₁, …, r_T)` of length `ny·T`.
    pub fn build_qp(&self, x0: &[f64], uprev: &[f64], reference: &[f64]) -> Result<BoxQp> {
        BoxQp::new(
            self.q_qp.clone(),
            self.linear_term(x0, uprev, reference)?,
            self.lower.clone(),
            self.upper.clone(),
        )
    }

    /// `d = 2(ΓᵀW̄y(Φx₀ − R) − SᵀW̄ΔuE·u₋₁)`.
    pub fn linear_term(&self, x0: &[f64], uprev: &[f64], reference: &[f64]) -> Result<Vec<f64>> {
        let (nx, nu, ny) = (self.model.nx(), self.model.nu(), self.model.ny());
        let t = self.horizon();
        if x0.len() != nx || uprev.len() != nu || reference.len() != ny * t {
            return Err(Error::DimensionMismatch(format!(
                "x0 {} (want {nx}), uprev {} (want {nu}), reference {} (want {})",
                x0.len(),
                uprev.len(),
                reference.len(),
                ny * t
            )));
        }
        let mut err = self.phi.mul_vec(x0);
        for (e, r) in err.iter_mut().zip(reference) {
            *e -= r;
        }
        let track = self.gamma_t_wy.mul_vec(&err);
        let rate = self.st_wdu_e.mul_vec(uprev);
        Ok(track
            .iter()
            .zip(&rate)
            .map(|(a, b)| 2.0 * (a - b))
            .collect())
    }
}

/// How the reference is previewed over the prediction horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferencePreview {
    /// The current reference is held over the whole horizon.
    #[default]
    Hold,
    /// Future reference samples are used, holding the last one past the end.
    Window,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub iters: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SimLog {
    pub records: Vec<SimRecord>,
}

impl SimLog {
    /// The common iteration count, or `None` if it varied between steps.
    pub fn invariant_iterations(&self) -> Option<usize> {
        let first = self.records.first()?.iters;
        self.records
            .iter()
            .all(|r| r.iters == first)
            .then_some(first)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let Some(first) = self.records.first() else {
            return Ok(());
        };
        let mut header = vec!["t".to_string()];
        for (prefix, len) in [
            ("x", first.x.len()),
            ("y", first.y.len()),
            ("u", first.u.len()),
            ("r", first.r.len()),
        ] {
            header.extend((1..=len).map(|i| format!("{prefix}{i}")));
        }
        header.push("iters".into());
        header.push("gap".into());
        writeln!(w, "{}", header.join(","))?;
        for rec in &self.records {
            let mut row = vec![fmt_sig12(rec.t)];
            for v in [&rec.x, &rec.y, &rec.u, &rec.r] {
                row.extend(v.iter().map(|&x| fmt_sig12(x)));
            }
            row.push(rec.iters.to_string());
            row.push(fmt_sig12(rec.gap));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Receding-horizon simulation on the discrete plant with the reference held
/// over each horizon.
pub fn simulate_closed_loop(
    c: &CondensedMpc,
    x_init: &[f64],
    reference: &[Vec<f64>],
    steps: usize,
    eps: f64,
) -> Result<SimLog> {
    simulate_closed_loop_with(c, x_init, reference, steps, eps, ReferencePreview::Hold)
}

pub fn simulate_closed_loop_with(
    c: &CondensedMpc,
    x_init: &[f64],
    reference: &[Vec<f64>],
    steps: usize,
    eps: f64,
    preview: ReferencePreview,
) -> Result<SimLog> {
    let (nx, nu, ny) = (c.model.nx(), c.model.nu(), c.model.ny());
    if steps == 0 {
        return Err(Error::InvalidProblem("steps must be at least 1".into()));
    }
    if x_init.len() != nx {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, expected {nx}",
            x_init.len()
        )));
    }
    if reference.is_empty() || reference.iter().any(|r| r.len() != ny) {
        return Err(Error::DimensionMismatch(format!(
            "reference samples must be non-empty vectors of length {ny}"
        )));
    }
    let sample = |k: usize| &reference[k.min(reference.len() - 1)];
    let t = c.horizon();

    let mut x = x_init.to_vec();
    let mut uprev = vec![0.0; nu];
    let mut log = SimLog {
        records: Vec::with_capacity(steps),
    };
    for k in 0..steps {
        let stacked: Vec<f64> = match preview {
            ReferencePreview::Hold => sample(k).repeat(t),
            ReferencePreview::Window => (1..=t).flat_map(|j| sample(k + j).clone()).collect(),
        };
        let at_step = |e: Error| Error::Step {
            step: k,
            source: Box::new(e),
        };
        let qp = c.build_qp(&x, &uprev, &stacked).map_err(at_step)?;
        let sol = solve(&qp, eps, false).map_err(at_step)?;
        let u = sol.ystar[..nu].to_vec();
        log.records.push(SimRecord {
            t: k as f64 * c.model.ts,
            y: c.model.output(&x),
            x: x.clone(),
            u: u.clone(),
            r: sample(k).clone(),
            iters: sol.iterations_run,
            gap: sol.duality_gap,
        });
        x = c.model.step(&x, &u);
        uprev = u;
    }
    Ok(log)
}

/// Linearized AFTI-16 aircraft benchmark.
pub mod afti16 {
    use super::*;

    pub const SAMPLE_TIME: f64 = 0.05;
    pub const INPUT_LIMIT: f64 = 25.0;
    /// Default simulation length (4 s).
    pub const DEFAULT_STEPS: usize = 80;
    /// Pitch set-point of the default square wave.
    pub const PITCH_STEP: f64 = 10.0;
    /// Time at which the default pitch reference returns to zero.
    pub const PITCH_STEP_END: f64 = 2.0;

    pub fn plant() -> ContinuousLti {
        let a = DenseMatrix::from_rows(&[
            [-0.0151, -60.5651, 0.0, -32.174],
            [-0.0001, -1.3411, 0.9929, 0.0],
            [0.00018, 43.2541, -0.86939, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        .expect("static matrix");
        let b = DenseMatrix::from_rows(&[
            [-2.516, -13.136],
            [-0.1689, -0.2514],
            [-17.251, -1.5766],
            [0.0, 0.0],
        ])
        .expect("static matrix");
        let c = DenseMatrix::from_rows(&[[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
            .expect("static matrix");
        ContinuousLti { a, b, c }
    }

    pub fn config(horizon: usize) -> MpcConfig {
        MpcConfig {
            horizon,
            wy: DenseMatrix::from_diag(&[10.0, 10.0]),
            wu: DenseMatrix::zeros(2, 2),
            wdu: DenseMatrix::from_diag(&[0.1, 0.1]),
            umin: vec![-INPUT_LIMIT; 2],
            umax: vec![INPUT_LIMIT; 2],
        }
    }

    pub fn controller(horizon: usize) -> Result<CondensedMpc> {
        condense(discretize_zoh(&plant(), SAMPLE_TIME)?, config(horizon))
    }

    /// `r₁ ≡ 0`; `r₂` is [`PITCH_STEP`] until [`PITCH_STEP_END`], then zero.
    pub fn default_reference(steps: usize) -> Vec<Vec<f64>> {
        (0..steps)
            .map(|k| {
                let t = k as f64 * SAMPLE_TIME;
                let pitch = if t < PITCH_STEP_END - 1e-9 {
                    PITCH_STEP
                } else {
                    0.0
                };
                vec![0.0, pitch]
            })
            .collect()
    }
}
