//! The `erw` command line.
//!
//! Exit codes: `0` on success, `1` on a numerical failure (with a JSON
//! error record on stdout) or a failed `verify`, `2` on a usage error.
//! `ERW_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use erw_core::enumerate::enumerate_exact;
use erw_core::moments::{var_ztilde_exact, MomentTable};
use erw_core::quadrature::Tolerance;
use erw_core::variance::{figure_grid_points, figure_row, var_z_infty, var_ztilde_infty};
use erw_core::walk::simulate_walk;
use erw_core::MemoryParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::acceptance::run_suite;
use crate::experiment::{mc_terminal_stats, ExperimentConfig};
use crate::format::{
    error_record, figure_records, format_g12, moment_records, write_figure_csv, write_json,
    write_moments_csv, write_trace_csv, EnumerationRecord,
};
use crate::rng::replication_rng;
use crate::stats::lil_scan;
use crate::{HarnessError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "ERW_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "erw",
    version,
    about = "Elephant random walk on the infinite dihedral group"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and print its terminal values.
    Simulate {
        #[command(flatten)]
        memory: Memory,
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full path as CSV to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Exact moments by enumerating every letter sequence.
    Enumerate {
        #[command(flatten)]
        memory: Memory,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Table of H_k, I_k and a_k.
    Moments {
        #[command(flatten)]
        memory: Memory,
        #[arg(long)]
        n_max: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Limit variances by quadrature.
    Variance {
        #[command(flatten)]
        memory: Memory,
        /// Also print the exact second moment of Ztilde at this horizon.
        #[arg(long)]
        exact_n: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Var(Z_infinity) over a grid of q.
    Figure {
        #[arg(long, allow_negative_numbers = true)]
        q_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        q_max: f64,
        #[arg(long)]
        step: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo summary over independent paths.
    Stats {
        #[command(flatten)]
        memory: Memory,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scan the LIL envelope instead of the terminal statistics.
        #[arg(long)]
        lil: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run the acceptance suite.
    Verify {
        /// Only the enumeration and identity checks.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Memory {
    /// Memory parameter p in [0, 1].
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// Reinforcement coefficient q = 2p - 1 in [-1, 1].
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

/// Problems found after parsing. Reported like clap errors, exit 2.
#[derive(Debug)]
struct Usage(String);

fn usage(msg: impl Into<String>) -> Usage {
    Usage(msg.into())
}

impl Memory {
    fn resolve(&self, allow_degenerate: bool) -> Result<MemoryParams, Usage> {
        let params = match (self.p, self.q) {
            (Some(p), None) => MemoryParams::from_p(p),
            (None, Some(q)) => MemoryParams::from_q(q),
            _ => return Err(usage("exactly one of --p and --q is required")),
        }
        .map_err(|e| usage(e.to_string()))?;
        if !allow_degenerate {
            params
                .require_subcritical()
                .map_err(|_| usage("p = 1 (q = 1) is only accepted by `simulate`"))?;
        }
        Ok(params)
    }
}

impl Output {
    fn tolerance(&self) -> Result<Tolerance, Usage> {
        if self.tol > 0.0 && self.tol.is_finite() {
            Ok(Tolerance::absolute(self.tol))
        } else {
            Err(usage("--tol must be positive"))
        }
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn json_only(&self) -> Result<(), Usage> {
        match self.format {
            Some(Format::Csv) => Err(usage("this command only writes JSON")),
            _ => Ok(()),
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let outcome = match &pool {
        Some(pool) => pool.install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(Usage(msg))) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(err)) => {
            println!("{}", error_record(&err));
            eprintln!("error: {err}");
            EXIT_FAILURE
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, Usage> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| usage(format!("cannot build thread pool: {e}")))
}

enum Failure {
    Usage(Usage),
    Run(HarnessError),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u)
    }
}

impl<E: Into<HarnessError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

/// Writes the buffered output in one go, so a failed run leaves no
/// partial file behind.
fn emit(dest: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match dest {
        Some(path) => fs::write(path, bytes)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct PathRecord {
    p: f64,
    q: f64,
    steps: u64,
    seed: u64,
    #[serde(rename = "W")]
    w: i64,
    #[serde(rename = "S")]
    s: i64,
    /// Distance from the identity, `|S|`.
    #[serde(rename = "Delta")]
    delta: u64,
    #[serde(rename = "Xi")]
    xi: f64,
    #[serde(rename = "Ztilde")]
    ztilde: f64,
    #[serde(rename = "QV")]
    qv: f64,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct VarianceRecord {
    q: f64,
    var_Z_infinity: f64,
    var_Z_abs_err: f64,
    var_Ztilde_infinity: f64,
    var_Ztilde_abs_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var_Ztilde_exact: Option<f64>,
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    let mut buf = Vec::new();
    let dest = match command {
        Command::Simulate {
            memory,
            steps,
            seed,
            trace,
            out,
        } => {
            let params = memory.resolve(true)?;
            if steps == 0 {
                return Err(usage("--steps must be at least 1").into());
            }
            let steps_usize = usize::try_from(steps).map_err(|_| usage("--steps is too large"))?;
            let walk = simulate_walk(params, steps_usize, &mut replication_rng(seed, 0))?;
            if let Some(path) = &trace {
                let mut t = Vec::new();
                write_trace_csv(&mut t, params, &walk.letters)?;
                fs::write(path, t)?;
            }
            let mut st = erw_core::coupled::CoupledState::new(params);
            for &g in &walk.letters {
                st.advance(g);
            }
            let rec = PathRecord {
                p: params.p(),
                q: params.q(),
                steps,
                seed,
                w: st.w(),
                s: st.s(),
                delta: st.s().unsigned_abs(),
                xi: st.xi(),
                ztilde: st.ztilde(),
                qv: st.qv(),
            };
            match out.format_or(Format::Csv) {
                Format::Json => write_json(&mut buf, &rec)?,
                Format::Csv => {
                    buf.extend(
                        csv_line(
                            &[
                                "p", "q", "steps", "seed", "W", "S", "Delta", "Xi", "Ztilde", "QV",
                            ]
                            .map(String::from),
                        )
                        .bytes(),
                    );
                    buf.extend(
                        csv_line(&[
                            format_g12(rec.p),
                            format_g12(rec.q),
                            steps.to_string(),
                            seed.to_string(),
                            rec.w.to_string(),
                            rec.s.to_string(),
                            rec.delta.to_string(),
                            format_g12(rec.xi),
                            format_g12(rec.ztilde),
                            format_g12(rec.qv),
                        ])
                        .bytes(),
                    );
                }
            }
            out.output
        }
        Command::Enumerate { memory, n, out } => {
            let params = memory.resolve(false)?;
            out.json_only()?;
            let r = enumerate_exact(n, &params)?;
            write_json(&mut buf, &EnumerationRecord::new(&params, &r))?;
            out.output
        }
        Command::Moments { memory, n_max, out } => {
            let params = memory.resolve(false)?;
            let table = MomentTable::new(params.q(), n_max)?;
            match out.format_or(Format::Csv) {
                Format::Csv => write_moments_csv(&mut buf, &table)?,
                Format::Json => write_json(&mut buf, &moment_records(&table))?,
            }
            out.output
        }
        Command::Variance {
            memory,
            exact_n,
            out,
        } => {
            let params = memory.resolve(false)?;
            let tol = out.tolerance()?;
            let q = params.q();
            let z = var_z_infty(q, tol)?;
            let zt = var_ztilde_infty(q, tol)?;
            let exact = exact_n.map(|n| var_ztilde_exact(n, q)).transpose()?;
            let rec = VarianceRecord {
                q,
                var_Z_infinity: z.value,
                var_Z_abs_err: z.abs_err_estimate,
                var_Ztilde_infinity: zt.value,
                var_Ztilde_abs_err: zt.abs_err_estimate,
                exact_n,
                var_Ztilde_exact: exact,
            };
            match out.format_or(Format::Csv) {
                Format::Json => write_json(&mut buf, &rec)?,
                Format::Csv => {
                    let mut head = vec![
                        "q",
                        "var_Z_infinity",
                        "var_Z_abs_err",
                        "var_Ztilde_infinity",
                        "var_Ztilde_abs_err",
                    ];
                    let mut row = vec![
                        format_g12(q),
                        format_g12(rec.var_Z_infinity),
                        format_g12(rec.var_Z_abs_err),
                        format_g12(rec.var_Ztilde_infinity),
                        format_g12(rec.var_Ztilde_abs_err),
                    ];
                    if let (Some(n), Some(v)) = (exact_n, exact) {
                        head.extend(["exact_n", "var_Ztilde_exact"]);
                        row.extend([n.to_string(), format_g12(v)]);
                    }
                    buf.extend(
                        csv_line(&head.iter().map(|s| s.to_string()).collect::<Vec<_>>()).bytes(),
                    );
                    buf.extend(csv_line(&row).bytes());
                }
            }
            out.output
        }
        Command::Figure {
            q_min,
            q_max,
            step,
            out,
        } => {
            let tol = out.tolerance()?;
            let points =
                figure_grid_points(q_min, q_max, step).map_err(|e| usage(e.to_string()))?;
            let rows: Vec<_> = points.into_par_iter().map(|q| figure_row(q, tol)).collect();
            match out.format_or(Format::Csv) {
                Format::Csv => write_figure_csv(&mut buf, &rows)?,
                Format::Json => write_json(&mut buf, &figure_records(&rows))?,
            }
            out.output
        }
        Command::Stats {
            memory,
            steps,
            reps,
            seed,
            lil,
            out,
        } => {
            let params = memory.resolve(false)?;
            out.json_only()?;
            let config = ExperimentConfig::new(params, steps, reps, seed)
                .map_err(|e| usage(e.to_string()))?;
            let summary = if lil {
                lil_scan(&config)?
            } else {
                mc_terminal_stats(&config)?
            };
            write_json(&mut buf, &summary)?;
            out.output
        }
        Command::Verify { quick } => {
            let all = run_suite(quick, |r| {
                println!("{r}");
            });
            println!(
                "{}",
                if all {
                    "verify: all criteria passed"
                } else {
                    "verify: FAILED"
                }
            );
            return Ok(if all { EXIT_OK } else { EXIT_FAILURE });
        }
    };
    emit(&dest, &buf)?;
    Ok(EXIT_OK)
}
