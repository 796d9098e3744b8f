use super::{Agent, AgentConfig, EnvInfo};
use crate::mdp::{argmax, Policy, Transition};
use crate::posterior::step_size;

/// Hoeffding bonus `√(c · V_max² · log(SAT/δ) / n)`.
pub fn ucb_bonus(c: f64, v_max: f64, log_term: f64, n: u64) -> f64 {
    (c * v_max * v_max * log_term / n as f64).sqrt()
}

/// Optimistic Q-learning with a count-based bonus, acting greedily.
pub struct UcbqlAgent {
    name: String,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    q: Vec<f64>,
    v: Vec<f64>,
    count: Vec<u64>,
    c: f64,
    v_max: f64,
    log_term: f64,
}

impl UcbqlAgent {
    pub fn new(config: &AgentConfig, env: &EnvInfo) -> Self {
        let (hz, ns, na) = (env.horizon, env.num_states, env.num_actions);
        let v_max = config.constants.v_max;
        let mut q = vec![0.0; (hz + 1) * ns * na];
        let mut v = vec![0.0; (hz + 1) * ns];
        for h in 1..=hz {
            let init = config.init.value(h, hz).min(v_max);
            q[(h - 1) * ns * na..h * ns * na].fill(init);
            v[(h - 1) * ns..h * ns].fill(init);
        }
        UcbqlAgent {
            name: config.display_name().to_string(),
            horizon: hz,
            num_states: ns,
            num_actions: na,
            count: vec![0; q.len()],
            q,
            v,
            c: config.c_ucb,
            v_max,
            log_term: env.log_term(config.constants.delta),
        }
    }

    #[inline]
    fn idx(&self, h: usize, s: usize, a: usize) -> usize {
        ((h - 1) * self.num_states + s) * self.num_actions + a
    }

    fn greedy(&self, h: usize, s: usize) -> usize {
        let i = self.idx(h, s, 0);
        argmax(self.q[i..i + self.num_actions].iter().copied())
    }

    pub fn count(&self, h: usize, s: usize, a: usize) -> u64 {
        self.count[self.idx(h, s, a)]
    }

    /// Current state-value estimate.
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.v[(h - 1) * self.num_states + s]
    }
}

impl Agent for UcbqlAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self) {}

    fn select_action(&mut self, h: usize, s: usize) -> usize {
        self.greedy(h, s)
    }

    fn observe(&mut self, t: &Transition) {
        let i = self.idx(t.h, t.state, t.action);
        self.count[i] += 1;
        let n = self.count[i];
        let alpha = step_size(n, self.horizon);
        let next = self.v[t.h * self.num_states + t.next_state];
        let z = t.reward + next + ucb_bonus(self.c, self.v_max, self.log_term, n);
        self.q[i] = ((1.0 - alpha) * self.q[i] + alpha * z).clamp(0.0, self.v_max);
        let row = self.idx(t.h, t.state, 0);
        let best = self.q[row..row + self.num_actions]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        self.v[(t.h - 1) * self.num_states + t.state] = best.min(self.v_max);
    }

    fn commit_policy(&mut self) -> Policy {
        // estimates at later steps are untouched until they are visited, so
        // the greedy policy fixed at episode start is the one followed
        Policy::from_fn(self.horizon, self.num_states, |h, s| self.greedy(h, s))
    }

    fn estimate(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.idx(h, s, a)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentKind;

    #[test]
    fn bonus_example() {
        let b = ucb_bonus(0.01, 1.0, 18.444_397_270_569_68, 100);
        assert!((b - 0.042_946_940_834_673_76).abs() < 1e-12);
        assert!(ucb_bonus(0.01, 1.0, 18.44, 1 << 60) < 1e-8);
        assert_eq!(ucb_bonus(0.0, 1.0, 18.44, 3), 0.0);
    }

    #[test]
    fn estimates_stay_clipped() {
        let env = EnvInfo {
            horizon: 2,
            num_states: 2,
            num_actions: 2,
            episodes: 100,
        };
        let mut agent = UcbqlAgent::new(&AgentConfig::experiment(AgentKind::Ucbql), &env);
        for k in 0..50 {
            agent.observe(&Transition {
                h: 1,
                state: 0,
                action: k % 2,
                reward: 1.0,
                next_state: 1,
            });
            for a in 0..2 {
                let q = agent.estimate(1, 0, a);
                assert!((0.0..=1.0).contains(&q));
            }
        }
    }

    #[test]
    fn zero_bonus_is_plain_q_learning() {
        let env = EnvInfo {
            horizon: 1,
            num_states: 1,
            num_actions: 2,
            episodes: 10,
        };
        let mut cfg = AgentConfig::experiment(AgentKind::Ucbql);
        cfg.c_ucb = 0.0;
        let mut agent = UcbqlAgent::new(&cfg, &env);
        let rewards = [0.2, 0.6, 0.4];
        let mut q = 1.0;
        for (i, r) in rewards.iter().enumerate() {
            agent.observe(&Transition {
                h: 1,
                state: 0,
                action: 0,
                reward: *r,
                next_state: 0,
            });
            q = crate::posterior::update_mean(q, *r, i as u64 + 1, 1);
            assert!((agent.estimate(1, 0, 0) - q).abs() < 1e-15);
        }
        // the untried action keeps its optimistic value and is picked
        assert_eq!(agent.select_action(1, 0), 1);
    }
}
