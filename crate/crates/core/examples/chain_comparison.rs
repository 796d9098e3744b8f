//! Runs the chain benchmark with the tuned constants and prints final
//! cumulative regret per agent (mean ± std over instances) plus the
//! per-instance values.
//!
//!     cargo run --release --example chain_comparison -- [episodes] [instances] [seed]

use std::time::Instant;

use psqlab::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().map_or(10_000, |a| a.parse().expect("episodes"));
    let instances: usize = args.next().map_or(10, |a| a.parse().expect("instances"));
    let seed: u64 = args.next().map_or(2024, |a| a.parse().expect("seed"));

    let mut config = ExperimentConfig::new(
        EnvFamily::Chain(ChainRanges::default()),
        &["psql-star", "rlsvi", "ucbql", "staged-randql", "random"],
        episodes,
        instances,
        seed,
    )?;
    config
        .agents
        .push(AgentConfig::experiment(AgentKind::Psql).with_samples(4).with_label("psql-j4"));
    config.agents.push(AgentConfig::experiment(AgentKind::PsqlBernstein).with_samples(4).with_label("psql-bernstein-j4"));

    let started = Instant::now();
    let result = run_experiment(&config)?;
    eprintln!("ran in {:.1}s", started.elapsed().as_secs_f64());

    for agg in &result.aggregates {
        let finals = result.final_regrets(&agg.agent);
        let row: Vec<String> = finals.iter().map(|r| format!("{r:7.1}")).collect();
        println!(
            "{:>18}: {:9.2} ± {:7.2} | {}",
            agg.agent,
            agg.mean.last().unwrap(),
            agg.std.last().unwrap(),
            row.join(" ")
        );
    }
    println!();
    for agg in &result.aggregates {
        let k = agg.mean.len();
        if k < 1000 {
            break;
        }
        let early = agg.mean[999] / 1000.0;
        let late = agg.mean[k - 1] / k as f64;
        println!(
            "{:>18}: R(1000)/1000 = {early:.4}, R(K)/K = {late:.4}, ratio = {:.3}, log-log slope = {:.3}",
            agg.agent,
            late / early,
            loglog_slope(&agg.mean, 1000)
        );
    }
    Ok(())
}

/// Least-squares slope of log R(k) against log k over k in [from, K],
/// on 50 log-spaced points.
fn loglog_slope(curve: &[f64], from: usize) -> f64 {
    let k_max = curve.len() as f64;
    let pts: Vec<(f64, f64)> = (0..50)
        .map(|i| {
            let k = (from as f64 * (k_max / from as f64).powf(i as f64 / 49.0)).round() as usize;
            ((k as f64).ln(), curve[k - 1].max(1e-12).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
