use super::{Agent, AgentConfig, AgentKind, EnvInfo};
use crate::error::Result;
use crate::mdp::{argmax, Policy, Transition};
use crate::posterior::{compute_j, BernsteinLogs, PosteriorTable, VarianceMode};
use crate::rng::RngStream;

/// How the bootstrapped target `z` is built from the next state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetRule {
    /// Max of `samples` draws from the posterior of the posterior-mean
    /// argmax action at the next state.
    Optimistic { samples: usize },
    /// One fresh draw per next-state action, then the max.
    Vanilla,
}

/// Draws one Gaussian per action and returns the argmax (ties low).
pub fn sample_argmax(means: &[f64], variances: &[f64], rng: &mut RngStream) -> usize {
    argmax(means.iter().zip(variances).map(|(&m, &v)| rng.gaussian(m, v)))
}

/// Optimistic target: `r + max_j Ṽʲ` with `Ṽʲ ~ N(Q̂(s', â), v(N(s', â)))`
/// and `â = argmax_a Q̂(s', a)`. Past the horizon the next value is zero.
pub fn construct_target(
    table: &PosteriorTable,
    rng: &mut RngStream,
    reward: f64,
    next_h: usize,
    next_state: usize,
    samples: usize,
) -> f64 {
    if next_h > table.horizon() {
        return reward;
    }
    let best = argmax(table.means_at(next_h, next_state).iter().copied());
    let mean = table.mean(next_h, next_state, best);
    let var = table.variance(next_h, next_state, best);
    let sd = var.max(0.0).sqrt();
    let mut top = f64::NEG_INFINITY;
    for _ in 0..samples {
        top = top.max(mean + sd * rng.standard_normal());
    }
    reward + top
}

/// Vanilla target: `r + max_a Q̃(s', a)` with fresh draws.
pub fn vanilla_target(table: &PosteriorTable, rng: &mut RngStream, reward: f64, next_h: usize, next_state: usize) -> f64 {
    if next_h > table.horizon() {
        return reward;
    }
    let top = (0..table.num_actions())
        .map(|a| rng.gaussian(table.mean(next_h, next_state, a), table.variance(next_h, next_state, a)))
        .fold(f64::NEG_INFINITY, f64::max);
    reward + top
}

/// Q-learning with posterior sampling, in all three flavours.
pub struct PsqlAgent {
    name: String,
    table: PosteriorTable,
    rule: TargetRule,
    rng: RngStream,
    committed: Option<Policy>,
    variances: Vec<f64>,
}

impl PsqlAgent {
    pub fn new(config: &AgentConfig, env: &EnvInfo) -> Result<Self> {
        let samples = || -> Result<usize> {
            match config.samples {
                Some(j) => Ok(j),
                None => compute_j(
                    config.constants.delta,
                    env.num_states,
                    env.num_actions,
                    env.total_steps(),
                    env.horizon,
                ),
            }
        };
        let rule = match config.kind {
            AgentKind::PsqlStar => TargetRule::Vanilla,
            _ => TargetRule::Optimistic { samples: samples()? },
        };
        let mut table = PosteriorTable::new(
            env.horizon,
            env.num_states,
            env.num_actions,
            config.init,
            config.variance_mode,
            config.constants,
        );
        if config.clip {
            table = table.with_clip(0.0, config.constants.v_max);
        }
        if config.variance_mode == VarianceMode::Bernstein {
            let j = match rule {
                TargetRule::Optimistic { samples } => samples,
                TargetRule::Vanilla => 1,
            };
            table = table.with_bernstein(BernsteinLogs::new(
                env.num_states,
                env.num_actions,
                env.episodes,
                env.horizon,
                j,
                config.constants.delta,
            ));
        }
        Ok(PsqlAgent {
            name: config.display_name().to_string(),
            table,
            rule,
            rng: RngStream::from_seed(config.seed),
            committed: None,
            variances: vec![0.0; env.num_actions],
        })
    }

    pub fn rule(&self) -> TargetRule {
        self.rule
    }

    pub fn table(&self) -> &PosteriorTable {
        &self.table
    }

    fn draw_action(&mut self, h: usize, s: usize) -> usize {
        for (a, v) in self.variances.iter_mut().enumerate() {
            *v = self.table.variance(h, s, a);
        }
        sample_argmax(self.table.means_at(h, s), &self.variances, &mut self.rng)
    }
}

impl Agent for PsqlAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self) {
        self.committed = None;
    }

    fn select_action(&mut self, h: usize, s: usize) -> usize {
        match &self.committed {
            Some(policy) => policy.action(h, s),
            None => self.draw_action(h, s),
        }
    }

    fn observe(&mut self, t: &Transition) {
        let z = match self.rule {
            TargetRule::Optimistic { samples } => {
                construct_target(&self.table, &mut self.rng, t.reward, t.h + 1, t.next_state, samples)
            }
            TargetRule::Vanilla => vanilla_target(&self.table, &mut self.rng, t.reward, t.h + 1, t.next_state),
        };
        self.table.record(t.h, t.state, t.action, z, t.reward);
    }

    fn commit_policy(&mut self) -> Policy {
        let (horizon, ns) = (self.table.horizon(), self.table.num_states());
        let mut policy = Policy::constant(horizon, ns, 0);
        for h in 1..=horizon {
            for s in 0..ns {
                let a = self.draw_action(h, s);
                policy.set(h, s, a);
            }
        }
        self.committed = Some(policy.clone());
        policy
    }

    fn estimate(&self, h: usize, s: usize, a: usize) -> f64 {
        self.table.mean(h, s, a)
    }

    fn posterior(&self) -> Option<&PosteriorTable> {
        Some(&self.table)
    }
}
