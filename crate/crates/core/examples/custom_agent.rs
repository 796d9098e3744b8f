//! Plugs a hand-written agent into the episode loop: epsilon-greedy
//! Q-learning with the same step size as the library agents.
//!
//!     cargo run --release --example custom_agent

use psqlab::environments::{make_chain, ChainRanges};
use psqlab::harness::run_agent;
use psqlab::mdp::{argmax, Policy, Transition};
use psqlab::posterior::update_mean;
use psqlab::prelude::*;

struct EpsilonGreedy {
    horizon: usize,
    actions: usize,
    q: Vec<f64>,
    n: Vec<u64>,
    epsilon: f64,
    rng: RngStream,
}

impl EpsilonGreedy {
    fn idx(&self, h: usize, s: usize, a: usize) -> usize {
        ((h - 1) * 64 + s) * self.actions + a
    }

    fn greedy(&self, h: usize, s: usize) -> usize {
        argmax((0..self.actions).map(|a| self.q[self.idx(h, s, a)]))
    }
}

impl Agent for EpsilonGreedy {
    fn name(&self) -> &str {
        "eps-greedy"
    }

    fn begin_episode(&mut self) {}

    fn select_action(&mut self, h: usize, s: usize) -> usize {
        if self.rng.uniform() < self.epsilon {
            self.rng.index(self.actions)
        } else {
            self.greedy(h, s)
        }
    }

    fn observe(&mut self, t: &Transition) {
        let next = if t.h < self.horizon {
            (0..self.actions).map(|a| self.q[self.idx(t.h + 1, t.next_state, a)]).fold(0.0, f64::max)
        } else {
            0.0
        };
        let i = self.idx(t.h, t.state, t.action);
        self.n[i] += 1;
        self.q[i] = update_mean(self.q[i], t.reward + next, self.n[i], self.horizon);
    }

    fn commit_policy(&mut self) -> Policy {
        Policy::from_fn(self.horizon, 64, |h, s| self.greedy(h, s))
    }

    fn estimate(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.idx(h, s, a)]
    }
}

fn main() -> Result<()> {
    let (mdp, spec) = make_chain(&mut RngStream::from_seed(3), &ChainRanges::default())?;
    let v_star = solve_optimal(&mdp)?.v(1, 0);
    println!("{spec:?}, v* = {v_star:.4}");
    for epsilon in [0.0, 0.05, 0.2] {
        let mut agent = EpsilonGreedy {
            horizon: 32,
            actions: 2,
            q: vec![1.0; 32 * 64 * 2],
            n: vec![0; 32 * 64 * 2],
            epsilon,
            rng: RngStream::from_seed(9),
        };
        let (returns, _) = run_agent(&mdp, &mut agent, 5000, &mut RngStream::from_seed(1), RegretMode::Realized)?;
        let regret = cumulative_regret(v_star, &returns);
        println!("epsilon {epsilon:4}: regret after 5000 episodes = {:.1}", regret.last().unwrap());
    }
    Ok(())
}
