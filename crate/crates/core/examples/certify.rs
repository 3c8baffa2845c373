//! Iteration counts known before solving, for a grid of sizes and tolerances.
//!
//! ```text
//! cargo run --example certify
//! ```

use certq::certified_iterations;

fn main() -> certq::Result<()> {
    let tolerances = [1e-3, 1e-6, 1e-9];
    print!("{:>4}", "n");
    for eps in tolerances {
        print!("{:>10}", format!("{eps:e}"));
    }
    println!("{:>12}{:>12}", "eta", "lambda");
    for n in [1, 2, 5, 10, 20, 30, 40, 100] {
        print!("{n:>4}");
        for eps in tolerances {
            print!("{:>10}", certified_iterations(n, eps)?.iterations);
        }
        let c = certified_iterations(n, 1e-6)?;
        println!("{:>12.6}{:>12.6}", c.eta, c.lambda);
    }
    Ok(())
}
