//! Monte-Carlo view of the two bootstrapped targets: the max of J draws
//! from the greedy action's posterior, and the max over fresh per-action
//! draws.
//!
//!     cargo run --release --example target_sampling

use psqlab::agents::{construct_target, vanilla_target};
use psqlab::posterior::{InitValue, PosteriorTable, VarianceConstants, VarianceMode};
use psqlab::rng::RngStream;

fn main() {
    // a unit-variance, zero-mean posterior at every next state
    let constants = VarianceConstants {
        c_tuned: 1.0,
        v_max: 1.0,
        ..VarianceConstants::default()
    };
    let table = PosteriorTable::new(2, 1, 2, InitValue::VMax(0.0), VarianceMode::Tuned, constants);
    let mut rng = RngStream::from_seed(1);
    let trials = 100_000;
    for j in [1, 2, 4, 16, 64, 124] {
        let mean = (0..trials).map(|_| construct_target(&table, &mut rng, 0.0, 2, 0, j)).sum::<f64>() / trials as f64;
        println!("J = {j:3}: E[max] = {mean:.4}");
    }
    let mean = (0..trials).map(|_| vanilla_target(&table, &mut rng, 0.0, 2, 0)).sum::<f64>() / trials as f64;
    println!("fresh draw per action (2 actions): {mean:.4} (1/sqrt(pi) = {:.4})", 1.0 / std::f64::consts::PI.sqrt());
}
