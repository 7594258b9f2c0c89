//! Command-line driver: solve a queue-pool control model, simulate a
//! policy, sweep a parameter, or run the structural checks, reading one
//! JSON config and writing plot-ready CSV / JSON files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use flexq::analysis;
use flexq::config::ConfigFile;
use flexq::experiments::{
    self, delay_sweep_study, keepalive_sweep_study, solution_csv, sweep_csv, sweep_meta_json,
    value_surface_csv, SweepSpec,
};
use flexq::sim;
use flexq::solver::{SolveResult, Solver, SolverSettings};

mod policy_csv;

#[derive(Parser)]
#[command(name = "flexq", version, about = "Optimal deployment and scheduling for a pool of on-demand queues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model and write the per-state values and decisions
    Solve(SolveArgs),
    /// Estimate a policy's discounted value by simulation
    Simulate(SimulateArgs),
    /// Re-solve along a parameter grid and tabulate long-run metrics
    Sweep(SweepArgs),
    /// Solve and run the monotonicity / threshold structure checks
    Check(CheckArgs),
    /// Solve and export the raw value surface in state-index order
    Export(ExportArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Model config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Destination for the per-state solution table (CSV)
    #[arg(long)]
    output: PathBuf,
    /// Destination for the run summary (JSON); defaults to the output
    /// path with a `.summary.json` extension
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model config (JSON); must contain a `sim` section
    #[arg(long)]
    config: PathBuf,
    /// Policy table produced by `solve`; when omitted the model is
    /// solved first and its optimal policy is simulated
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Destination for the estimate (JSON)
    #[arg(long)]
    output: PathBuf,
    /// Also write one replication's full event log (CSV) here
    #[arg(long)]
    event_log: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Model config (JSON) with a `sweep` section
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Run a built-in study instead: `keepalive-cost-study` or
    /// `delay-cost-study`
    #[arg(long)]
    preset: Option<String>,
    /// Destination for the sweep rows (CSV)
    #[arg(long)]
    output: PathBuf,
    /// Destination for the sweep metadata (JSON); defaults to the
    /// output path with a `.meta.json` extension
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Model config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Destination for the check report (JSON)
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// Model config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Destination for the value surface (CSV)
    #[arg(long)]
    output: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => run_solve(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Check(args) => run_check(args),
        Command::Export(args) => run_export(args),
    }
}

/// Parse the config, build the solver, and run value iteration.
fn load_and_solve(path: &Path) -> Result<(ConfigFile, Solver, SolverSettings, SolveResult)> {
    let config = ConfigFile::from_path(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let params = config.to_model_params()?;
    let settings = config.solver_settings();
    let solver = Solver::new(params)?;
    let result = solver.value_iteration(settings)?;
    Ok((config, solver, settings, result))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn json_line(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn run_solve(args: SolveArgs) -> Result<()> {
    let (_, solver, settings, result) = load_and_solve(&args.config)?;
    let space = solver.space();

    write_text(&args.output, &solution_csv(space, &result.values, &result.policy))?;

    let summary = serde_json::json!({
        "queues": space.queue_count(),
        "buffer": space.buffer(),
        "states": space.cardinality(),
        "tol": settings.tol,
        "iterations": result.iterations,
        "residual": result.residual,
        "contraction_modulus": result.rho,
        "error_bound": result.error_bound,
        "value_at_all_idle": result.values.get(space.all_inactive_index()),
        "rejecting_states": analysis::count_rejecting_states(&result.policy),
    });
    let summary_path = args
        .summary
        .unwrap_or_else(|| args.output.with_extension("summary.json"));
    write_text(&summary_path, &json_line(&summary))?;

    println!(
        "solved {} states in {} iterations (residual {:.3e}); wrote {} and {}",
        space.cardinality(),
        result.iterations,
        result.residual,
        args.output.display(),
        summary_path.display()
    );
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let config = ConfigFile::from_path(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let params = config.to_model_params()?;
    let sim_config = config
        .sim_config()?
        .context("config has no `sim` section")?;

    let policy = match &args.policy {
        Some(path) => {
            let space = params.state_space()?;
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading policy {}", path.display()))?;
            policy_csv::parse_solution_csv(&text, &space)
                .with_context(|| format!("parsing policy {}", path.display()))?
        }
        None => {
            let solver = Solver::new(params.clone())?;
            solver.value_iteration(config.solver_settings())?.policy
        }
    };

    let estimate = sim::estimate_with_config(&policy, &params, &sim_config)?;
    write_text(
        &args.output,
        &json_line(&serde_json::to_value(&estimate)?),
    )?;

    if let Some(log_path) = &args.event_log {
        let mut events = Vec::new();
        sim::simulate_once_logged(&policy, &params, &sim_config, sim_config.rng_seed, &mut events)?;
        let space = params.state_space()?;
        write_text(log_path, &event_log_csv(&events, &space)?)?;
    }

    println!(
        "simulated {} replications: mean {:.6} (se {:.6}); wrote {}",
        estimate.replications,
        estimate.mean,
        estimate.std_error,
        args.output.display()
    );
    Ok(())
}

/// One row per event of a single replication; states are rendered as
/// level vectors joined with `|` so the file stays one-row-per-event.
fn event_log_csv(events: &[sim::SimEvent], space: &flexq::state::StateSpace) -> Result<String> {
    let mut out = String::from("time,kind,queue,state_after,discounted_increment,component\n");
    for e in events {
        let queue = e.queue.map(|q| (q + 1).to_string()).unwrap_or_default();
        let state = space
            .decode(e.state_after)?
            .levels()
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("|");
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            experiments::fmt_sig(e.time, 12),
            e.kind,
            queue,
            state,
            experiments::fmt_sig(e.discounted_increment, 12),
            e.component
        ));
    }
    Ok(out)
}

fn run_sweep_cmd(args: SweepArgs) -> Result<()> {
    let (spec, notes) = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let config = ConfigFile::from_path(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            (SweepSpec::from_config(&config)?, Vec::new())
        }
        (None, Some(name)) => {
            let preset = match name.as_str() {
                "keepalive-cost-study" => keepalive_sweep_study(),
                "delay-cost-study" => delay_sweep_study(),
                other => bail!(
                    "unknown preset {other:?}; available: keepalive-cost-study, delay-cost-study"
                ),
            };
            (preset.spec, preset.notes)
        }
        _ => bail!("pass exactly one of --config or --preset"),
    };

    let rows = experiments::run_sweep(&spec)?;
    write_text(&args.output, &sweep_csv(&rows))?;
    let meta_path = args
        .meta
        .unwrap_or_else(|| args.output.with_extension("meta.json"));
    write_text(&meta_path, &sweep_meta_json(&spec, &notes))?;

    let flagged = rows.iter().filter(|r| !r.converged).count();
    println!(
        "swept {} of {} points ({} flagged); wrote {} and {}",
        rows.len() - flagged,
        rows.len(),
        flagged,
        args.output.display(),
        meta_path.display()
    );
    Ok(())
}

fn run_check(args: CheckArgs) -> Result<()> {
    let (_, solver, settings, result) = load_and_solve(&args.config)?;
    let domination = analysis::check_domination(&result.values, solver.space(), settings.tol)?;
    let threshold = analysis::check_build_threshold(&solver, &result.values)?;

    let report = serde_json::json!({
        "iterations": result.iterations,
        "residual": result.residual,
        "error_bound": result.error_bound,
        "domination": domination,
        "build_threshold": threshold,
        "rejecting_states": analysis::count_rejecting_states(&result.policy),
    });
    write_text(&args.output, &json_line(&report))?;

    println!(
        "domination: {} violations / {} pairs; build threshold: {} violations / {} pairs; wrote {}",
        domination.violations.len(),
        domination.checked_pairs,
        threshold.violations.len(),
        threshold.checked_pairs,
        args.output.display()
    );
    Ok(())
}

fn run_export(args: ExportArgs) -> Result<()> {
    let (_, solver, _, result) = load_and_solve(&args.config)?;
    write_text(&args.output, &value_surface_csv(solver.space(), &result.values))?;
    println!(
        "exported {} states to {}",
        solver.space().cardinality(),
        args.output.display()
    );
    Ok(())
}
