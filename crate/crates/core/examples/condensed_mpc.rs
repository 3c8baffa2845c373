//! Condensed MPC on a user-defined plant: a double integrator with a
//! saturated force, driven from rest to a position set-point.
//!
//! ```text
//! cargo run --example condensed_mpc
//! ```

use certq::linalg::DenseMatrix;
use certq::mpc::{condense, discretize_zoh, simulate_closed_loop, ContinuousLti, MpcConfig};

fn main() -> certq::Result<()> {
    let plant = ContinuousLti::new(
        DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]])?,
        DenseMatrix::from_rows(&[[0.0], [1.0]])?,
        DenseMatrix::from_rows(&[[1.0, 0.0]])?,
    )?;
    let model = discretize_zoh(&plant, 0.1)?;
    let config = MpcConfig {
        horizon: 15,
        wy: DenseMatrix::from_diag(&[1.0]),
        wu: DenseMatrix::from_diag(&[0.01]),
        wdu: DenseMatrix::from_diag(&[0.1]),
        umin: vec![-1.0],
        umax: vec![1.0],
    };
    let c = condense(model, config)?;
    println!(
        "QP dimension {}, Hessian diag {:?}",
        c.dim(),
        &c.q_qp.diag()[..3]
    );

    let steps = 80;
    let log = simulate_closed_loop(&c, &[0.0, 0.0], &[vec![2.0]], steps, 1e-6)?;
    for rec in log.records.iter().step_by(10) {
        println!(
            "t={:>4.1}  pos={:>7.4}  vel={:>7.4}  u={:>7.4}",
            rec.t, rec.x[0], rec.x[1], rec.u[0]
        );
    }
    println!("iterations per step: {:?}", log.invariant_iterations());
    Ok(())
}
