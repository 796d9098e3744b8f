//! Command-line front end: `run`, `solve`, `list-agents`, `dump-env`.
//!
//! Exit codes: 0 on success, 2 on configuration or input errors, 1 on
//! runtime failures.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use psqlab::agents::AgentKind;
use psqlab::config::{threads_from_env, RunSettings};
use psqlab::harness::{run_experiment, EnvFamily};
use psqlab::instance_file::{read_instance, to_text, write_instance};
use psqlab::mdp::solve_optimal;
use psqlab::Error;

#[derive(Parser)]
#[command(name = "psqlab", version, about = "Tabular posterior-sampling Q-learning laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a regret experiment and write runs.csv and aggregate.csv.
    Run(RunArgs),
    /// Solve a serialized instance exactly and print V* and the optimal policy.
    Solve {
        #[arg(long)]
        env_file: PathBuf,
    },
    /// List the available agent names.
    ListAgents,
    /// Generate one instance and write it in the instance text format.
    DumpEnv {
        #[arg(long, default_value = "chain")]
        env: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        instance: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML file with experiment settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    /// Comma-separated agent names.
    #[arg(long)]
    agents: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    regret_mode: Option<String>,
    /// Fixed target sample count for psql and psql-bernstein.
    #[arg(long)]
    psql_samples: Option<usize>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Solve { env_file } => cmd_solve(env_file),
        Command::ListAgents => {
            for kind in AgentKind::ALL {
                println!("{:<16}{}", kind.name(), kind.description());
            }
            Ok(())
        }
        Command::DumpEnv {
            env,
            seed,
            instance,
            out,
        } => cmd_dump_env(&env, seed, instance, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let flags = RunSettings {
        env: args.env,
        agents: args.agents,
        episodes: args.episodes,
        instances: args.instances,
        seed: args.seed,
        out: args.out,
        regret_mode: args.regret_mode,
        psql_samples: args.psql_samples,
        ..RunSettings::default()
    };
    let settings = match &args.config {
        Some(path) => RunSettings::from_file(path)
            .map_err(|e| Failure::Config(e.to_string()))?
            .merge(flags)?,
        None => flags,
    };
    let mut config = settings.to_experiment()?;
    config.threads = threads_from_env()?;
    let out_dir = settings.output_dir();

    let started = Instant::now();
    let result = run_experiment(&config)?;
    let (runs, agg) = result.write_csvs(&out_dir)?;
    eprintln!(
        "{} instances x {} agents x {} episodes in {:.2}s; wrote {} and {}",
        config.instances,
        config.agents.len(),
        config.episodes,
        started.elapsed().as_secs_f64(),
        runs.display(),
        agg.display()
    );
    for a in &result.aggregates {
        println!(
            "{}: final mean cumulative regret {:.4} (std {:.4}) after {} episodes",
            a.agent,
            a.mean.last().copied().unwrap_or(0.0),
            a.std.last().copied().unwrap_or(0.0),
            config.episodes
        );
    }
    Ok(())
}

fn cmd_solve(path: PathBuf) -> Result<(), Failure> {
    let instance = read_instance(&path).map_err(|e| Failure::Config(e.to_string()))?;
    let mdp = &instance.mdp;
    let values = solve_optimal(mdp).map_err(|e| Failure::Config(e.to_string()))?;
    println!("v_star(1, {}) = {}", mdp.start_state(), significant(values.v(1, mdp.start_state()), 10));
    println!("optimal policy (rows h = 1..{}, columns s = 0..{}):", mdp.horizon(), mdp.num_states() - 1);
    let policy = values.greedy_policy();
    for h in 1..=mdp.horizon() {
        let row: Vec<String> = (0..mdp.num_states()).map(|s| policy.action(h, s).to_string()).collect();
        println!("h={h:<3} {}", row.join(" "));
    }
    Ok(())
}

fn cmd_dump_env(env: &str, seed: u64, instance: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    let family = EnvFamily::parse(env)?;
    let inst = family.instance(seed, instance)?;
    match out {
        Some(path) => write_instance(&path, &inst)?,
        None => print!("{}", to_text(&inst)?),
    }
    Ok(())
}

/// Formats `x` with `digits` significant digits.
fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
