//! Prints the learning-rate weights, the three variance schedules and the
//! number of target samples for a few problem sizes.
//!
//!     cargo run --example posterior_schedules

use psqlab::posterior::{
    alpha_weights, compute_j, hoeffding_variance, learning_rate, tuned_variance, variance, BernsteinAccumulators,
    BernsteinLogs, VarianceConstants, VarianceMode,
};

fn main() -> psqlab::Result<()> {
    let horizon = 32;
    println!("alpha_n for H = {horizon}:");
    for n in [1u64, 2, 10, 33, 100, 1000] {
        println!("  n = {n:5}: {:.5}", learning_rate(n, horizon)?);
    }

    let w = alpha_weights(50, horizon);
    let root: f64 = (1..=50).map(|i| w[i] / (i as f64).sqrt()).sum();
    println!(
        "weights for n = 50: sum = {:.15}, max = {:.4}, sum/sqrt(i) = {root:.4} (1/sqrt(n) = {:.4})",
        w.iter().sum::<f64>(),
        w[1..].iter().copied().fold(0.0, f64::max),
        1.0 / 50f64.sqrt()
    );

    // Bernstein variance on a stream of constant next-step values; with a
    // small constant the Bernstein term drops below the Hoeffding clamp
    let logs = BernsteinLogs::new(10, 2, 10_000, horizon, 4, 0.05);
    let constants = VarianceConstants {
        c_bernstein: 1e-3,
        ..VarianceConstants::default()
    };
    let mut acc = BernsteinAccumulators::default();
    println!("{:>6} {:>12} {:>12} {:>12}", "n", "hoeffding", "tuned", "bernstein");
    for n in 1..=100_000u64 {
        acc.update(0.5, 0.0);
        if n.is_power_of_two() || n == 100_000 {
            let vb = variance(n, horizon, VarianceMode::Bernstein, &constants, Some(&acc), Some(&logs))?;
            println!(
                "{n:>6} {:>12.4e} {:>12.4e} {vb:>12.4e}",
                hoeffding_variance(n, horizon, None),
                tuned_variance(n, 0.02, 1.0)
            );
        }
    }

    println!("target samples J at delta = 0.05, H = 32, K = 10^4:");
    for states in [8, 12, 17] {
        println!("  S = {states:2}: J = {}", compute_j(0.05, states, 2, 320_000, horizon)?);
    }
    Ok(())
}
