use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use firstocc_core::mdp::Cell;
use firstocc_harness::cli;
use firstocc_harness::experiments::run_and_emit;
use firstocc_harness::{Experiment, ExperimentConfig, HarnessError, Result};

/// First-occupancy experiments, planning and FR learning.
#[derive(Parser)]
#[command(name = "firstocc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment and write its CSV and plot-data files.
    Run {
        /// fig1-demo, fig3-planning, fourrooms, fourrooms-noise,
        /// exploration, mountaincar-ff, mountaincar-dims or escape.
        experiment: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Parameter override such as `fourrooms.k_iters=3`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Plan to a goal cell with the exact FRs of single-move policies.
    Plan {
        #[arg(long)]
        env: PathBuf,
        /// Goal as `row,col`.
        #[arg(long)]
        goal: String,
        /// Comma-separated move names, e.g. `up,right,down,left`.
        #[arg(long, value_delimiter = ',')]
        policies: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// TD-learn the FR of a single-move policy and compare it with DP.
    LearnFr {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Steps between restarts from a random free cell.
        #[arg(long, default_value_t = 20)]
        restart: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional CSV destination for the learned matrix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            experiment,
            seed,
            out,
            overrides,
        } => {
            let experiment: Experiment = experiment.parse()?;
            let mut config = ExperimentConfig::new(experiment, seed, out);
            for kv in &overrides {
                config = config.with_override(kv)?;
            }
            let report = run_and_emit(&config)?;
            for table in &report.tables {
                println!("{}/{}.csv ({} rows)", config.out_dir.display(), table.name, table.rows.len());
            }
            if let Some(summary) = report.table("summary") {
                print!("{}", summary.to_csv_string()?);
            }
            Ok(())
        }
        Command::Plan { env, goal, policies, out } => {
            let goal: Cell = goal.parse().map_err(|e: firstocc_core::Error| HarnessError::Usage(e.to_string()))?;
            let (plan, report) = cli::plan(&env, goal, &policies)?;
            report.emit(&out)?;
            let names: Vec<&str> = policies.iter().map(String::as_str).collect();
            print!("{}", plan.render(&names, |s| s.to_string()));
            Ok(())
        }
        Command::LearnFr {
            env,
            policy,
            steps,
            alpha,
            restart,
            seed,
            out,
        } => {
            let learned = cli::learn_fr(&env, &policy, steps, alpha, restart, seed)?;
            println!("policy={policy} steps={steps} mean_td_error={} max_error_vs_dp={}", learned.mean_td_error, learned.max_error);
            if let Some(path) = out {
                learned.fr.save(&path)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("firstocc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
