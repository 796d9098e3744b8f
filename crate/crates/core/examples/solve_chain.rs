//! Builds chain instances, solves them by backward induction and compares
//! the optimal value with a few fixed policies.
//!
//!     cargo run --example solve_chain -- [p] [length]

use psqlab::environments::{build_chain, ChainSpec, LEFT, RIGHT};
use psqlab::mdp::Policy;
use psqlab::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(0.8, |a| a.parse().expect("p"));
    let length: usize = args.next().map_or(10, |a| a.parse().expect("length"));

    let spec = ChainSpec { p, length, horizon: 32 };
    let mdp = build_chain(&spec)?;
    let values = solve_optimal(&mdp)?;
    println!("chain p={p} length={length}: v*(1, 0) = {:.6}", values.v(1, 0));

    let ns = mdp.num_states();
    for (name, policy) in [
        ("always right", Policy::constant(32, ns, RIGHT)),
        ("always left", Policy::constant(32, ns, LEFT)),
        ("greedy on Q*", values.greedy_policy()),
    ] {
        println!("{name:>13}: {:.6}", evaluate_policy(&mdp, &policy)?.get(1, 0));
    }

    // value of the start state as the success probability varies
    for p in [0.7, 0.8, 0.9, 0.95, 1.0] {
        let m = build_chain(&ChainSpec { p, ..spec })?;
        println!("p = {p:4}: v* = {:.4}", solve_optimal(&m)?.v(1, 0));
    }
    Ok(())
}
