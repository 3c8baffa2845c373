//! `certq` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or parse errors, 3 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::bench::run_bench;
use crate::error::Error;
use crate::ipm::{certified_iterations, solve, write_trace_csv, BoxQp};
use crate::linalg::DenseMatrix;
use crate::mpc::{afti16, simulate_closed_loop};
use crate::table::fmt_sig12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "certq",
    version,
    about = "Box-QP interior-point solver with an exact iteration count"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the iteration count for dimension n and tolerance eps.
    Certify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Solve a box QP stored as JSON with keys Q, d, l, u.
    Solve {
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// Write per-iteration diagnostics to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Closed-loop AFTI-16 pitch tracking with the condensed MPC.
    #[command(name = "demo-afti16")]
    DemoAfti16 {
        #[arg(long = "T", default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=50))]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = afti16::DEFAULT_STEPS)]
        steps: usize,
        /// Write the simulation log to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the solver against the enumeration oracle on random instances.
    Bench {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=12))]
        nmax: u32,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Problem file layout.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    pub l: Vec<f64>,
    pub u: Vec<f64>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<BoxQp, String> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| format!("invalid problem file: {e}"))?;
        file.into_qp()
    }

    pub fn into_qp(self) -> Result<BoxQp, String> {
        let q = DenseMatrix::from_rows(&self.q).map_err(|e| format!("field Q: {e}"))?;
        BoxQp::new(q, self.d, self.l, self.u).map_err(|e| format!("invalid problem: {e}"))
    }
}

pub fn load_problem(path: &Path) -> Result<BoxQp, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ProblemFile::parse(&text)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Certify { n, eps } => certify(n, eps, out),
        Command::Solve { path, eps, trace } => solve_file(&path, eps, trace.as_deref(), out),
        Command::DemoAfti16 {
            horizon,
            eps,
            steps,
            out: csv,
        } => demo(horizon as usize, eps, steps, csv.as_deref(), out),
        Command::Bench {
            count,
            nmax,
            eps,
            seed,
        } => bench(count, nmax as usize, eps, seed, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err((code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

type CmdResult = Result<(), (i32, String)>;

fn classify(e: Error) -> (i32, String) {
    let code = match e.root() {
        Error::NumericalBreakdown { .. } | Error::NotPositiveDefinite { .. } => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    };
    (code, e.to_string())
}

fn io_error(e: std::io::Error) -> (i32, String) {
    (EXIT_USAGE, e.to_string())
}

fn certify(n: usize, eps: f64, out: &mut dyn Write) -> CmdResult {
    let c = certified_iterations(n, eps).map_err(classify)?;
    writeln!(
        out,
        "n={} eps={:e} N={} eta={} lambda={} tau0={}",
        c.n,
        c.eps,
        c.iterations,
        fmt_sig12(c.eta),
        fmt_sig12(c.lambda),
        fmt_sig12(c.tau0)
    )
    .map_err(io_error)
}

fn solve_file(path: &Path, eps: f64, trace: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let p = load_problem(path).map_err(|m| (EXIT_USAGE, m))?;
    let sol = solve(&p, eps, trace.is_some()).map_err(classify)?;
    let ystar: Vec<String> = sol.ystar.iter().map(|&v| fmt_sig12(v)).collect();
    writeln!(
        out,
        "n={} iterations={} gap={:e}",
        p.dim(),
        sol.iterations_run,
        sol.duality_gap
    )
    .and_then(|_| writeln!(out, "ystar={}", ystar.join(",")))
    .map_err(io_error)?;
    if let (Some(path), Some(log)) = (trace, sol.trace.as_ref()) {
        let file = File::create(path).map_err(io_error)?;
        write_trace_csv(log, BufWriter::new(file)).map_err(io_error)?;
    }
    Ok(())
}

fn demo(
    horizon: usize,
    eps: f64,
    steps: usize,
    csv: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let n = 2 * horizon;
    let certified = certified_iterations(n, eps).map_err(classify)?.iterations;
    let controller = afti16::controller(horizon).map_err(classify)?;
    let reference = afti16::default_reference(steps.max(1));
    let log =
        simulate_closed_loop(&controller, &[0.0; 4], &reference, steps, eps).map_err(classify)?;
    if let Some(path) = csv {
        let file = File::create(path).map_err(io_error)?;
        log.write_csv(BufWriter::new(file)).map_err(io_error)?;
    }
    match log.invariant_iterations() {
        Some(iters) if iters == certified => writeln!(
            out,
            "T={horizon} n={n} N={certified} iters={iters} (all 0..{steps} identical)"
        )
        .map_err(io_error),
        _ => {
            let seen: Vec<usize> = log.records.iter().map(|r| r.iters).collect();
            Err((
                EXIT_NUMERICAL,
                format!("iteration counts not invariant (certified {certified}): {seen:?}"),
            ))
        }
    }
}

fn bench(count: usize, nmax: usize, eps: f64, seed: u64, out: &mut dyn Write) -> CmdResult {
    if count == 0 {
        return Err((EXIT_USAGE, "count must be at least 1".into()));
    }
    let report = run_bench(count, nmax, eps, seed).map_err(classify)?;
    write!(out, "{}", report.render()).map_err(io_error)
}
