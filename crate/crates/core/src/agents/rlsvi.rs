use super::{Agent, AgentConfig, EnvInfo};
use crate::mdp::{argmax, Policy, Transition};
use crate::rng::RngStream;

/// Reward perturbation scale `√(c · V_max² · log(SAT/δ) / (n + 1))`.
pub fn rlsvi_noise_std(c: f64, v_max: f64, log_term: f64, n: u64) -> f64 {
    (c * v_max * v_max * log_term / (n as f64 + 1.0)).sqrt()
}

/// Tabular RLSVI: value iteration on the empirical model with Gaussian
/// reward perturbations, re-solved once per episode.
pub struct RlsviAgent {
    name: String,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    count: Vec<u64>,
    reward_sum: Vec<f64>,
    /// `(h, s, a, s')` visit counts.
    next_count: Vec<u32>,
    /// Perturbed Q for the current episode; row `H + 1` is zero.
    q: Vec<f64>,
    v: Vec<f64>,
    c: f64,
    v_max: f64,
    optimistic: Vec<f64>,
    clip: bool,
    log_term: f64,
    rng: RngStream,
}

impl RlsviAgent {
    pub fn new(config: &AgentConfig, env: &EnvInfo) -> Self {
        let (hz, ns, na) = (env.horizon, env.num_states, env.num_actions);
        let v_max = config.constants.v_max;
        RlsviAgent {
            name: config.display_name().to_string(),
            horizon: hz,
            num_states: ns,
            num_actions: na,
            count: vec![0; hz * ns * na],
            reward_sum: vec![0.0; hz * ns * na],
            next_count: vec![0; hz * ns * na * ns],
            q: vec![0.0; hz * ns * na],
            v: vec![0.0; (hz + 1) * ns],
            c: config.c_rlsvi,
            v_max,
            optimistic: (1..=hz).map(|h| config.init.value(h, hz).min(v_max)).collect(),
            clip: config.clip,
            log_term: env.log_term(config.constants.delta),
            rng: RngStream::from_seed(config.seed),
        }
    }

    #[inline]
    fn idx(&self, h: usize, s: usize, a: usize) -> usize {
        ((h - 1) * self.num_states + s) * self.num_actions + a
    }

    /// Empirical next-state distribution for a visited `(h, s, a)`.
    pub fn empirical_row(&self, h: usize, s: usize, a: usize) -> Option<Vec<f64>> {
        let i = self.idx(h, s, a);
        let n = self.count[i];
        (n > 0).then(|| {
            self.next_count[i * self.num_states..(i + 1) * self.num_states]
                .iter()
                .map(|&c| c as f64 / n as f64)
                .collect()
        })
    }

    fn solve_perturbed(&mut self) {
        let (ns, na) = (self.num_states, self.num_actions);
        for h in (1..=self.horizon).rev() {
            let next_off = h * ns;
            for s in 0..ns {
                let mut best = f64::NEG_INFINITY;
                for a in 0..na {
                    let i = self.idx(h, s, a);
                    let n = self.count[i];
                    let mut value = if n == 0 {
                        self.optimistic[h - 1]
                    } else {
                        let counts = &self.next_count[i * ns..(i + 1) * ns];
                        let mut expected = 0.0;
                        for (sp, &c) in counts.iter().enumerate() {
                            if c > 0 {
                                expected += c as f64 * self.v[next_off + sp];
                            }
                        }
                        let std = rlsvi_noise_std(self.c, self.v_max, self.log_term, n);
                        self.reward_sum[i] / n as f64 + std * self.rng.standard_normal() + expected / n as f64
                    };
                    if self.clip {
                        value = value.clamp(0.0, self.v_max);
                    }
                    self.q[i] = value;
                    best = best.max(value);
                }
                self.v[(h - 1) * ns + s] = best;
            }
        }
    }

    fn greedy(&self, h: usize, s: usize) -> usize {
        let i = self.idx(h, s, 0);
        argmax(self.q[i..i + self.num_actions].iter().copied())
    }
}

impl Agent for RlsviAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self) {
        self.solve_perturbed();
    }

    fn select_action(&mut self, h: usize, s: usize) -> usize {
        self.greedy(h, s)
    }

    fn observe(&mut self, t: &Transition) {
        let i = self.idx(t.h, t.state, t.action);
        self.count[i] += 1;
        self.reward_sum[i] += t.reward;
        self.next_count[i * self.num_states + t.next_state] += 1;
    }

    fn commit_policy(&mut self) -> Policy {
        Policy::from_fn(self.horizon, self.num_states, |h, s| self.greedy(h, s))
    }

    fn estimate(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.idx(h, s, a)]
    }
}
