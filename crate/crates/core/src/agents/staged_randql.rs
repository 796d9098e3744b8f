use super::{Agent, AgentConfig, EnvInfo};
use crate::mdp::{argmax, Policy, Transition};
use crate::rng::RngStream;

/// Length of stage `k` for one `(h, s, a)`: `⌊(1 + 1/H)^k · H⌋`.
pub fn stage_length(k: u32, horizon: usize) -> usize {
    let hz = horizon as f64;
    ((1.0 + 1.0 / hz).powi(k as i32) * hz).floor() as usize
}

/// Staged randomized Q-learning.
///
/// Targets `r + V̄_{h+1}(s')` are buffered per `(h, s, a)` for the length of
/// a stage. When a stage fills up, an ensemble of temporary Q-values is
/// drawn as Dirichlet-weighted averages of a prior pseudo-target
/// (`prior_reward · init(h)`, weight parameter `n₀/κ`) and the stage's
/// targets (weight parameter `1/κ` each); the policy Q-value becomes the
/// ensemble maximum. Estimates only change at stage ends.
pub struct StagedRandQlAgent {
    name: String,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    q: Vec<f64>,
    v: Vec<f64>,
    stage: Vec<u32>,
    buffer: Vec<Vec<f64>>,
    prior_value: Vec<f64>,
    cap: Vec<f64>,
    prior_shape: f64,
    target_shape: f64,
    ensemble: usize,
    rng: RngStream,
}

impl StagedRandQlAgent {
    pub fn new(config: &AgentConfig, env: &EnvInfo) -> Self {
        let (hz, ns, na) = (env.horizon, env.num_states, env.num_actions);
        let params = config.randql;
        let cap: Vec<f64> = (1..=hz)
            .map(|h| config.init.value(h, hz).min(config.constants.v_max))
            .collect();
        let mut q = vec![0.0; hz * ns * na];
        let mut v = vec![0.0; (hz + 1) * ns];
        for h in 1..=hz {
            q[(h - 1) * ns * na..h * ns * na].fill(cap[h - 1]);
            v[(h - 1) * ns..h * ns].fill(cap[h - 1]);
        }
        let n0 = params.prior_count.unwrap_or(1.0 / ns as f64);
        StagedRandQlAgent {
            name: config.display_name().to_string(),
            horizon: hz,
            num_states: ns,
            num_actions: na,
            stage: vec![0; q.len()],
            buffer: vec![Vec::new(); q.len()],
            prior_value: cap.iter().map(|c| params.prior_reward * c).collect(),
            q,
            v,
            cap,
            prior_shape: n0 / params.kappa,
            target_shape: 1.0 / params.kappa,
            ensemble: params.ensemble,
            rng: RngStream::from_seed(config.seed),
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

    /// Index of the stage currently being filled for `(h, s, a)`.
    pub fn stage(&self, h: usize, s: usize, a: usize) -> u32 {
        self.stage[self.idx(h, s, a)]
    }

    fn close_stage(&mut self, h: usize, i: usize) {
        let targets = std::mem::take(&mut self.buffer[i]);
        let prior = self.prior_value[h - 1];
        let mut best = f64::NEG_INFINITY;
        for _ in 0..self.ensemble {
            let w0 = self.rng.gamma(self.prior_shape);
            let mut total = w0;
            let mut acc = w0 * prior;
            for &x in &targets {
                let w = self.rng.gamma(self.target_shape);
                total += w;
                acc += w * x;
            }
            best = best.max(acc / total);
        }
        self.q[i] = best.clamp(0.0, self.cap[h - 1]);
        self.stage[i] += 1;
        self.buffer[i] = targets;
        self.buffer[i].clear();
    }
}

impl Agent for StagedRandQlAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self) {}

    fn select_action(&mut self, h: usize, s: usize) -> usize {
        self.greedy(h, s)
    }

    fn observe(&mut self, t: &Transition) {
        let i = self.idx(t.h, t.state, t.action);
        let target = t.reward + self.v[t.h * self.num_states + t.next_state];
        self.buffer[i].push(target);
        if self.buffer[i].len() >= stage_length(self.stage[i], self.horizon) {
            self.close_stage(t.h, i);
            let row = self.idx(t.h, t.state, 0);
            let best = self.q[row..row + self.num_actions]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            self.v[(t.h - 1) * self.num_states + t.state] = best;
        }
    }

    fn commit_policy(&mut self) -> Policy {
        Policy::from_fn(self.horizon, self.num_states, |h, s| self.greedy(h, s))
    }

    fn estimate(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.idx(h, s, a)]
    }
}
