//! Closed-loop AFTI-16 pitch tracking for several horizons.
//!
//! Writes one CSV per horizon into the given directory (default: the system
//! temp dir) and reports the per-step iteration count, which never changes.
//!
//! ```text
//! cargo run --release --example afti16_closed_loop [out_dir]
//! ```

use std::env;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use certq::mpc::{afti16, simulate_closed_loop};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(env::temp_dir);
    let steps = afti16::DEFAULT_STEPS;
    let reference = afti16::default_reference(steps);

    for horizon in [5, 10, 15, 20] {
        let c = afti16::controller(horizon)?;
        let start = Instant::now();
        let log = simulate_closed_loop(&c, &[0.0; 4], &reference, steps, 1e-6)?;
        let elapsed = start.elapsed();

        let peak_u = log
            .records
            .iter()
            .flat_map(|r| r.u.iter())
            .fold(0.0f64, |m, u| m.max(u.abs()));
        let pitch_at_end_of_step = log
            .records
            .iter()
            .rev()
            .find(|r| r.t < afti16::PITCH_STEP_END - 1e-9)
            .map(|r| r.y[1])
            .unwrap_or(f64::NAN);

        let path = dir.join(format!("afti16_T{horizon}.csv"));
        log.write_csv(BufWriter::new(File::create(&path)?))?;
        println!(
            "T={horizon:<2} n={:<2} iters={:?} max|u|={peak_u:.3} pitch(t<2s)={pitch_at_end_of_step:.3} time={:.1?} -> {}",
            c.dim(),
            log.invariant_iterations(),
            elapsed,
            path.display()
        );
    }
    Ok(())
}
