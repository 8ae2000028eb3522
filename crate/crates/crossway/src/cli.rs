//! Command line front end.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 the instance cannot
//! be scheduled (infeasible program or a run that stops making progress),
//! 3 a completed run whose trajectory audit found conflict-zone overlap.

use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use crossway_core::milp::{self, MilpStatus, PriorityMatrix};
use crossway_core::selector;

use crate::formats;
use crate::scenario::{load_scenario, Scenario};
use crate::sim::{self, SimError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSCHEDULABLE: i32 = 2;
pub const EXIT_UNSAFE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "crossway",
    version,
    about = "Cooperative intersection crossing: solve, select, plan, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory.csv and metrics.json.
    Simulate(SimulateArgs),
    /// Solve a single velocity optimization instance.
    Solve(SolveArgs),
    /// Run subset selection on a solved instance.
    Select(SelectArgs),
    /// Summarize a metrics.json produced by simulate.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for trajectory.csv and metrics.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Override a scalar scenario field, e.g. --set dt=0.05.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Override the recorded scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file in the `n`/`bounds`/`conflict` text format.
    #[arg(long)]
    instance: PathBuf,
    /// Output directory for the `.sol` file.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// Instance file in the `n`/`v_max`/`v`/`priority` text format.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// metrics.json from a simulate run.
    #[arg(long)]
    instance: PathBuf,
}

pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Solve(args) => solve(&args),
        Command::Select(args) => select(&args),
        Command::Report(args) => report(&args),
    }
}

fn fail(msg: impl std::fmt::Display, code: i32) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn prepare_scenario(args: &SimulateArgs) -> Result<Scenario, String> {
    let mut scenario = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    for s in &args.sets {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| format!("--set needs KEY=VALUE, got `{s}`"))?;
        scenario.apply_override(key, value)?;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    scenario.validate().map_err(|e| e.to_string())?;
    Ok(scenario)
}

fn simulate(args: &SimulateArgs) -> i32 {
    let scenario = match prepare_scenario(args) {
        Ok(s) => s,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let result = match sim::run(&scenario) {
        Ok(r) => r,
        Err(e @ SimError::Horizon { .. }) => return fail(e, EXIT_UNSCHEDULABLE),
        Err(e) => return fail(e, EXIT_USAGE),
    };
    if let Err(e) = std::fs::create_dir_all(&args.out_dir) {
        return fail(format!("cannot create {}: {e}", args.out_dir.display()), EXIT_USAGE);
    }
    let csv = formats::trajectory_csv(&result);
    let metrics = match formats::metrics_json(&result) {
        Ok(m) => m,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    if let Err(e) = formats::write_text(&args.out_dir.join("trajectory.csv"), &csv) {
        return fail(e, EXIT_USAGE);
    }
    if let Err(e) = formats::write_text(&args.out_dir.join("metrics.json"), &metrics) {
        return fail(e, EXIT_USAGE);
    }
    println!(
        "makespan {:.3} s, {} rounds, {} vehicles, {} violations",
        result.makespan,
        result.rounds.len(),
        scenario.departures.len(),
        result.violations.len()
    );
    if result.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_UNSAFE
    }
}

fn solve(args: &SolveArgs) -> i32 {
    let inst = match formats::read_solver_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let problem = match milp::assemble(inst.n, &inst.terms, inst.v_min, inst.v_max) {
        Ok(p) => p,
        Err(e) => return fail(e, EXIT_UNSCHEDULABLE),
    };
    let clock = Instant::now();
    let solution = milp::solve(&problem);
    let solve_time_ms = clock.elapsed().as_secs_f64() * 1e3;
    let text = formats::write_solution(&solution, solve_time_ms);
    if let Err(e) = std::fs::create_dir_all(&args.out_dir) {
        return fail(format!("cannot create {}: {e}", args.out_dir.display()), EXIT_USAGE);
    }
    let stem = args
        .instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    let out = args.out_dir.join(format!("{stem}.sol"));
    if let Err(e) = formats::write_text(&out, &text) {
        return fail(e, EXIT_USAGE);
    }
    print!("{text}");
    if solution.status == MilpStatus::Optimal {
        EXIT_OK
    } else {
        EXIT_UNSCHEDULABLE
    }
}

fn select(args: &SelectArgs) -> i32 {
    let inst = match formats::read_select_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let s = PriorityMatrix::from_pairs(inst.v.len(), &inst.order);
    let flags = selector::extract_subset(&inst.v, &s, inst.v_max);
    print!("{}", formats::write_selection(&inst, &flags));
    EXIT_OK
}

fn report(args: &ReportArgs) -> i32 {
    let metrics = match formats::read_metrics(&args.instance) {
        Ok(m) => m,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    print!("{}", formats::summarize(&metrics));
    EXIT_OK
}
