//! Runs the slippery-grid benchmark and writes runs.csv / aggregate.csv.
//!
//!     cargo run --release --example grid_experiment -- [episodes] [instances] [out-dir]

use std::path::PathBuf;

use psqlab::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().map_or(20_000, |a| a.parse().expect("episodes"));
    let instances: usize = args.next().map_or(10, |a| a.parse().expect("instances"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "grid-out".into()));

    let config = ExperimentConfig::new(
        EnvFamily::Grid(GridRanges::default()),
        &["psql-star", "rlsvi", "ucbql", "staged-randql", "random"],
        episodes,
        instances,
        7,
    )?;
    let result = run_experiment(&config)?;
    for inst in &result.instances {
        if let psqlab::harness::InstanceSpec::Grid(spec) = &inst.spec {
            println!("holes {:?}", spec.holes);
        }
    }
    for agg in &result.aggregates {
        println!("{:>14}: {:9.2} ± {:.2}", agg.agent, agg.mean.last().unwrap(), agg.std.last().unwrap());
    }
    let (runs, agg) = result.write_csvs(&out)?;
    println!("wrote {} and {}", runs.display(), agg.display());
    Ok(())
}
