//! Compares realized-return regret with exact regret of the committed
//! per-episode policy on the same instances.
//!
//!     cargo run --release --example exact_regret -- [episodes]

use psqlab::prelude::*;

fn main() -> Result<()> {
    let episodes: usize = std::env::args().nth(1).map_or(3000, |a| a.parse().expect("episodes"));
    let agents = ["psql-star", "rlsvi", "ucbql", "random"];
    let mut config = ExperimentConfig::new(EnvFamily::Chain(ChainRanges::default()), &agents, episodes, 5, 11)?;
    let realized = run_experiment(&config)?;
    config.regret_mode = RegretMode::Exact;
    let exact = run_experiment(&config)?;
    println!("{:>10} {:>12} {:>12}", "agent", "realized", "exact");
    for agent in agents {
        println!(
            "{agent:>10} {:12.2} {:12.2}",
            realized.final_mean(agent).unwrap(),
            exact.final_mean(agent).unwrap()
        );
    }
    Ok(())
}
