use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use selbb::verify::{load_checks, run_check};
use selbb::{replay, run_scenario, sweep, write_csv, write_trace, Grid, RunResult, Scenario};

/// Byzantine Broadcast simulator on a selective-broadcast channel.
#[derive(Parser)]
#[command(name = "selbb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file (a scenario object or a list of them).
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run every point of a parameter grid.
    Sweep {
        grid: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Evaluate closed-form bounds: `builtin`, a JSON file, or inline JSON.
    VerifyBounds { params: String },
    /// Re-run the repetition recorded in a trace and compare slot logs.
    Replay { trace: PathBuf },
}

#[derive(Args)]
struct RunOpts {
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-repetition JSONL slot logs.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Override the base seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
}

const FAILURE_DIR: &str = "selbb-failures";

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = jobs {
        b = b.num_threads(k.max(1));
    }
    Ok(b.build()?)
}

fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    })
}

/// Writes CSV and traces; returns whether every run passed.
fn emit(results: &[(Scenario, Vec<RunResult>)], opts: &RunOpts) -> Result<bool> {
    let records: Vec<_> = results.iter().flat_map(|(_, runs)| runs.iter().map(|r| &r.record)).collect();
    match &opts.out {
        Some(path) => write_csv(fs::File::create(path)?, &records)?,
        None => write_csv(io::stdout().lock(), &records)?,
    }
    let mut all_pass = true;
    for (scenario, runs) in results {
        for run in runs {
            let path = match &opts.trace {
                Some(dir) => Some(write_trace(dir, scenario, run)?),
                None => None,
            };
            if !run.verdict.is_pass() {
                all_pass = false;
                let path = match path {
                    Some(p) => p,
                    None => write_trace(Path::new(FAILURE_DIR), scenario, run)?,
                };
                eprintln!(
                    "FAIL {} repetition {} seed {}: {}; replay with `selbb replay {}`",
                    scenario.label(),
                    run.prepared.repetition,
                    run.prepared.seed,
                    run.record.verdict,
                    path.display()
                );
            }
        }
    }
    let total = records.len();
    let failed = records.iter().filter(|r| !r.passed()).count();
    eprintln!("{total} runs, {failed} failed");
    Ok(all_pass)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { scenario, opts } => {
            let mut scenarios = load_scenarios(&scenario)?;
            for s in &mut scenarios {
                if let Some(seed) = opts.seed {
                    s.seed = seed;
                }
                s.validate().with_context(|| format!("scenario {}", s.label()))?;
            }
            let results = pool(opts.jobs)?.install(|| {
                scenarios
                    .iter()
                    .map(|s| run_scenario(s).map(|r| (s.clone(), r)))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            emit(&results, &opts)
        }
        Command::Sweep { grid, opts } => {
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let mut grid: Grid = serde_json::from_str(&text)?;
            if let Some(seed) = opts.seed {
                grid.seed = seed;
            }
            let result = pool(opts.jobs)?.install(|| sweep(&grid))?;
            for (s, reason) in &result.skipped {
                eprintln!("skipped {}: {reason}", s.label());
            }
            emit(&result.runs, &opts)
        }
        Command::VerifyBounds { params } => {
            let mut ok = true;
            for check in load_checks(&params)? {
                let out = run_check(&check);
                ok &= out.ok;
                println!("{} {} = {}", if out.ok { "ok  " } else { "FAIL" }, out.label, out.value);
            }
            Ok(ok)
        }
        Command::Replay { trace } => {
            let report = replay(&trace)?;
            if let Some(line) = report.first_difference {
                bail!(
                    "trace diverges at line {line} ({} recorded lines, {} replayed)",
                    report.recorded_lines,
                    report.replayed_lines
                );
            }
            println!(
                "identical: {} lines, verdict {}",
                report.recorded_lines, report.run.record.verdict
            );
            Ok(report.run.verdict.is_pass())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
