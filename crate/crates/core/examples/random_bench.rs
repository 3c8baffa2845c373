//! Seeded random instances: iteration count per dimension and deviation from
//! the exact enumeration solution.
//!
//! ```text
//! cargo run --release --example random_bench [seed]
//! ```

use certq::bench::run_bench;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7);
    let report = run_bench(20, 8, 1e-8, seed)?;
    print!("{}", report.render());
    println!(
        "all constant: {}  worst deviation: {:e}",
        report.all_constant(),
        report.max_deviation()
    );
    Ok(())
}
