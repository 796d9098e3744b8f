use super::{Agent, AgentConfig, EnvInfo};
use crate::mdp::{Policy, Transition, ValueTables};
use crate::rng::RngStream;

/// Uniformly random actions.
pub struct RandomAgent {
    name: String,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    committed: Option<Policy>,
    rng: RngStream,
}

impl RandomAgent {
    pub fn new(config: &AgentConfig, env: &EnvInfo) -> Self {
        RandomAgent {
            name: config.display_name().to_string(),
            horizon: env.horizon,
            num_states: env.num_states,
            num_actions: env.num_actions,
            committed: None,
            rng: RngStream::from_seed(config.seed),
        }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self) {
        self.committed = None;
    }

    fn select_action(&mut self, h: usize, s: usize) -> usize {
        match &self.committed {
            Some(policy) => policy.action(h, s),
            None => self.rng.index(self.num_actions),
        }
    }

    fn observe(&mut self, _t: &Transition) {}

    /// Each `(h, s)` is visited at most once per episode, so independent
    /// uniform draws per `(h, s)` give the same trajectory law as drawing
    /// actions on the fly.
    fn commit_policy(&mut self) -> Policy {
        let na = self.num_actions;
        let rng = &mut self.rng;
        let policy = Policy::from_fn(self.horizon, self.num_states, |_, _| rng.index(na));
        self.committed = Some(policy.clone());
        policy
    }

    fn estimate(&self, _h: usize, _s: usize, _a: usize) -> f64 {
        0.0
    }
}

/// Greedy on the true `Q*`. Only the harness can build it, since it needs
/// the true model.
pub struct OracleAgent {
    name: String,
    truth: ValueTables,
    policy: Policy,
}

impl OracleAgent {
    pub fn new(config: &AgentConfig, truth: &ValueTables) -> Self {
        OracleAgent {
            name: config.display_name().to_string(),
            policy: truth.greedy_policy(),
            truth: truth.clone(),
        }
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self) {}

    fn select_action(&mut self, h: usize, s: usize) -> usize {
        self.policy.action(h, s)
    }

    fn observe(&mut self, _t: &Transition) {}

    fn commit_policy(&mut self) -> Policy {
        self.policy.clone()
    }

    fn estimate(&self, h: usize, s: usize, a: usize) -> f64 {
        self.truth.q(h, s, a)
    }
}
