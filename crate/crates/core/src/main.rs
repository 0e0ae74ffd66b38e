//! Command-line front end.
//!
//! Exit codes: 0 success or colorable, 1 not colorable / nothing found,
//! 2 budget exhausted, 3 bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use linecolor::constructive::{
    bound_sequence, closed_form_bound, color_line_with_cap, lll_diagnostics, ColorLineError,
    DEFAULT_ROUND_CAP,
};
use linecolor::family::enumerate_arrays;
use linecolor::io::{
    read_array, read_instance, read_json, read_points, to_versioned_string, write_atomic,
};
use linecolor::periodic::{
    find_periodic_with_budget, periodicity_experiment, verify_periodic, PeriodicError,
};
use linecolor::solver::{
    decide_finite_with_budget, find_unsat_window_with_budget, SolveError, WindowError,
    DEFAULT_NODE_BUDGET,
};
use linecolor::witnesses::{
    chi2z_search, hypersimplex_set, lower_bound_binomial, polygon_set, witness_from_kdistance,
    KDistanceSet,
};
use linecolor::{verify_coloring, Coloring, PointSet};

/// Default seed for randomized commands; fixed so runs are reproducible.
const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(
    name = "linecolor",
    version,
    about = "Distance-restricted colorings of the line"
)]
struct Cli {
    /// Write the JSON result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print search statistics to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the instance's points are colorable.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Search for a minimal non-colorable integer window.
    Window {
        #[arg(long)]
        array: PathBuf,
        #[arg(long)]
        radius: u64,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Search for a periodic coloring of the integers.
    Periodic {
        #[arg(long)]
        array: PathBuf,
        #[arg(long)]
        pmax: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Construct a coloring of the given points.
    Color {
        #[arg(long)]
        array: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ROUND_CAP)]
        round_cap: u64,
    },
    /// Print the bound sequence B_0..B_k and 32^k·k!.
    Bounds {
        #[arg(long)]
        k: usize,
    },
    /// Print local-lemma diagnostics for an array.
    Diagnose {
        #[arg(long)]
        array: PathBuf,
    },
    /// Print C(n+1, k).
    Lowerbound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Build a k-distance set.
    Kdistance {
        kind: KDistanceKind,
        /// Dimension (hypersimplex only).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: usize,
    },
    /// Build the pigeonhole witness array of a k-distance set.
    Witness {
        /// A k-distance set file, or a points file for a set on the line.
        #[arg(long)]
        points: PathBuf,
    },
    /// Check a coloring against an instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
    },
    /// Run a batch experiment.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// Compare window search with periodic search over a family of arrays.
    Periodicity {
        #[arg(long)]
        entry_max: i64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        pmax: usize,
    },
    /// Classify 2-row arrays with 3 (or 4) columns.
    Chi2z {
        #[arg(long)]
        entry_max: i64,
        #[arg(long, default_value_t = 3)]
        columns: usize,
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        pmax: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KDistanceKind {
    Hypersimplex,
    Polygon,
}

enum Output {
    Json(String),
    Text(String),
}

struct Done {
    output: Output,
    code: u8,
}

impl Done {
    fn json<T: Serialize>(value: &T, code: u8) -> Self {
        Done {
            output: Output::Json(to_versioned_string(value)),
            code,
        }
    }

    fn text(text: &str, code: u8) -> Self {
        Done {
            output: Output::Text(format!("{text}\n")),
            code,
        }
    }
}

/// Reported with exit code 2; every other error is bad input (exit 3).
#[derive(Debug, thiserror::Error)]
#[error("budget exhausted: {0}")]
struct BudgetExhausted(String);

fn out_of_budget(e: impl std::fmt::Display) -> anyhow::Error {
    BudgetExhausted(e.to_string()).into()
}

fn expect_clean(violations: Vec<linecolor::Violation>, what: &str) {
    // Search output is untrusted; a failed re-check is a bug, not a result.
    assert!(
        violations.is_empty(),
        "{what} failed re-verification: {:?}",
        violations[0]
    );
}

fn run(cli: &Cli) -> anyhow::Result<Done> {
    match &cli.command {
        Command::Solve { instance, budget } => {
            let inst = read_instance(instance)?;
            let points = inst
                .points
                .ok_or_else(|| anyhow!("{}: instance has no `points`", instance.display()))?;
            match decide_finite_with_budget(&points, &inst.array, *budget) {
                Ok(result) => {
                    if cli.verbose {
                        eprintln!(
                            "nodes {} max depth {}",
                            result.stats.nodes, result.stats.max_depth
                        );
                    }
                    match result.witness {
                        Some(witness) => {
                            expect_clean(
                                verify_coloring(&points, &witness, &inst.array)
                                    .expect("witness is total"),
                                "solver witness",
                            );
                            Ok(Done::json(&witness, 0))
                        }
                        None => Ok(Done::text("UNSAT", 1)),
                    }
                }
                Err(e @ SolveError::BudgetExhausted { .. }) => Err(out_of_budget(e)),
            }
        }
        Command::Window {
            array,
            radius,
            budget,
        } => {
            let d = read_array(array)?;
            match find_unsat_window_with_budget(&d, *radius, *budget) {
                Ok(report) if report.found => Ok(Done::json(&report, 0)),
                Ok(_) => Ok(Done::text("none", 1)),
                Err(e @ WindowError::NonIntegral) => Err(e.into()),
                Err(e @ WindowError::Budget { .. }) => Err(out_of_budget(e)),
            }
        }
        Command::Periodic {
            array,
            pmax,
            budget,
        } => {
            let d = read_array(array)?;
            match find_periodic_with_budget(&d, *pmax, *budget) {
                Ok(Some(p)) => {
                    expect_clean(
                        verify_periodic(&p, &d).expect("well-formed"),
                        "periodic coloring",
                    );
                    Ok(Done::json(&p, 0))
                }
                Ok(None) => Ok(Done::text("none", 1)),
                Err(e @ PeriodicError::Budget { .. }) => Err(out_of_budget(e)),
                Err(e) => Err(e.into()),
            }
        }
        Command::Color {
            array,
            points,
            seed,
            round_cap,
        } => {
            let d = read_array(array)?;
            let q = read_points(points)?;
            match color_line_with_cap(&d, &q, *seed, *round_cap) {
                Ok(out) => {
                    expect_clean(
                        verify_coloring(&q, &out.coloring, &d).expect("coloring is total"),
                        "constructed coloring",
                    );
                    Ok(Done::json(&out, 0))
                }
                Err(ColorLineError::Unsat) => Ok(Done::text("UNSAT", 1)),
                Err(e) => Err(out_of_budget(e)),
            }
        }
        Command::Bounds { k } => {
            let seq = bound_sequence(*k);
            let closed: Vec<_> = (0..=*k).map(closed_form_bound).collect();
            let value = json!({
                "bounds": seq.values.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
                "closed_form": closed.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            });
            Ok(Done::json(&value, 0))
        }
        Command::Diagnose { array } => {
            let d = read_array(array)?;
            let diag = lll_diagnostics(&d)?;
            Ok(Done::json(&diag, 0))
        }
        Command::Lowerbound { n, k } => {
            let bound = lower_bound_binomial(*n, *k)?;
            Ok(Done::json(
                &json!({ "n": n, "k": k, "lower_bound": bound.to_string() }),
                0,
            ))
        }
        Command::Kdistance { kind, n, k } => {
            let set = match kind {
                KDistanceKind::Hypersimplex => {
                    let n = n.ok_or_else(|| anyhow!("hypersimplex needs --n"))?;
                    hypersimplex_set(n, *k)
                }
                KDistanceKind::Polygon => polygon_set(*k),
            }?;
            Ok(Done::json(&set, 0))
        }
        Command::Witness { points } => {
            let set = match read_json::<KDistanceSet>(points) {
                Ok(set) => set,
                Err(_) => KDistanceSet::from_line(&read_points(points)?),
            };
            let witness = witness_from_kdistance(&set)?;
            let certificate = witness.structural_certificate();
            let search = set.line_points().map(|line| {
                decide_finite_with_budget(&line, &witness.array, DEFAULT_NODE_BUDGET)
                    .map(|r| r.status)
                    .map_err(|e| e.to_string())
            });
            let value = json!({
                "witness": witness,
                "certificate": certificate,
                "search": search,
            });
            Ok(Done::json(&value, 0))
        }
        Command::Verify { instance, coloring } => {
            let inst = read_instance(instance)?;
            let points: PointSet = inst
                .points
                .ok_or_else(|| anyhow!("{}: instance has no `points`", instance.display()))?;
            let t: Coloring = read_json(coloring)?;
            let violations = verify_coloring(&points, &t, &inst.array)?;
            let code = if violations.is_empty() { 0 } else { 1 };
            Ok(Done::json(&json!({ "violations": violations }), code))
        }
        Command::Experiment(Experiment::Periodicity {
            entry_max,
            k,
            m,
            radius,
            pmax,
        }) => {
            let family = enumerate_arrays(*k, *m, *entry_max);
            let report = periodicity_experiment(&family, *radius, *pmax)?;
            Ok(Done::json(&report, 0))
        }
        Command::Experiment(Experiment::Chi2z {
            entry_max,
            columns,
            radius,
            pmax,
        }) => {
            let report = chi2z_search(*entry_max, *columns, *radius, *pmax)?;
            Ok(Done::json(&report, 0))
        }
    }
}

fn emit(out: Option<&Path>, output: Output) -> std::io::Result<()> {
    match (output, out) {
        (Output::Json(text), Some(path)) => write_atomic(path, text.as_bytes()),
        (Output::Json(text), None) | (Output::Text(text), _) => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let done = run(&cli).and_then(|done| {
        emit(cli.out.as_deref(), done.output)?;
        Ok(done.code)
    });
    match done {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is::<BudgetExhausted>() => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
