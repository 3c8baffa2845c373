//! Solve a small box QP, print the per-iteration trace and compare against
//! the exact active-set enumeration.
//!
//! ```text
//! cargo run --example solve_box_qp [problem.json] [eps]
//! ```

use std::env;
use std::io;
use std::path::PathBuf;

use certq::cli::load_problem;
use certq::ipm::write_trace_csv;
use certq::oracle::{kkt_residual, solve_enumeration};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data/coupled.json")
    });
    let eps: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1e-8);

    let p = load_problem(&path)?;
    let r = certq::solve(&p, eps, true)?;
    if let Some(trace) = &r.trace {
        write_trace_csv(trace, io::stdout().lock())?;
    }
    let exact = solve_enumeration(&p)?;
    let dev = r
        .ystar
        .iter()
        .zip(&exact.ystar)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    println!();
    println!(
        "iterations {} (first below eps at {:?})",
        r.iterations_run, r.first_converged
    );
    println!("gap        {:e}", r.duality_gap);
    println!("ystar      {:?}", r.ystar);
    println!("exact      {:?}", exact.ystar);
    println!("max |diff| {dev:e}");
    println!("kkt        {:e}", kkt_residual(&p, &r.ystar));
    Ok(())
}
