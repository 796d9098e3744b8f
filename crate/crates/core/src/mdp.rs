//! Finite-horizon, time-inhomogeneous tabular MDPs.
//!
//! Step indices are 1-based throughout the public API: an episode visits
//! steps `h = 1..=H`, and the terminal value at `h = H + 1` is zero.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Tolerance on transition row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A full tabular MDP with expected rewards in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    start_state: usize,
    /// `(h-1, s, a, s')` row-major.
    transitions: Vec<f64>,
    /// `(h-1, s, a)` row-major.
    rewards: Vec<f64>,
}

impl TabularMdp {
    /// Builds and validates an MDP from flat row-major tensors.
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        start_state: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
    ) -> Result<Self> {
        let mdp = TabularMdp {
            horizon,
            num_states,
            num_actions,
            start_state,
            transitions,
            rewards,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Builds an MDP from closures over `(h, s, a)`; `h` is 1-based.
    pub fn from_fn(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        start_state: usize,
        mut transition: impl FnMut(usize, usize, usize) -> Vec<f64>,
        mut reward: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut transitions = Vec::with_capacity(horizon * num_states * num_actions * num_states);
        let mut rewards = Vec::with_capacity(horizon * num_states * num_actions);
        for h in 1..=horizon {
            for s in 0..num_states {
                for a in 0..num_actions {
                    let row = transition(h, s, a);
                    if row.len() != num_states {
                        return Err(Error::InvalidModel(format!(
                            "transition row ({h},{s},{a}) has length {} instead of {num_states}",
                            row.len()
                        )));
                    }
                    transitions.extend_from_slice(&row);
                    rewards.push(reward(h, s, a));
                }
            }
        }
        Self::new(horizon, num_states, num_actions, start_state, transitions, rewards)
    }

    pub fn validate(&self) -> Result<()> {
        let (hz, ns, na) = (self.horizon, self.num_states, self.num_actions);
        if hz == 0 || ns == 0 || na == 0 {
            return Err(Error::InvalidModel(
                "horizon, state count and action count must be positive".into(),
            ));
        }
        if self.start_state >= ns {
            return Err(Error::InvalidModel(format!(
                "start state {} outside 0..{ns}",
                self.start_state
            )));
        }
        if self.transitions.len() != hz * ns * na * ns {
            return Err(Error::InvalidModel(format!(
                "transition tensor has {} entries, expected {}",
                self.transitions.len(),
                hz * ns * na * ns
            )));
        }
        if self.rewards.len() != hz * ns * na {
            return Err(Error::InvalidModel(format!(
                "reward tensor has {} entries, expected {}",
                self.rewards.len(),
                hz * ns * na
            )));
        }
        for h in 1..=hz {
            for s in 0..ns {
                for a in 0..na {
                    let row = self.transition_row(h, s, a);
                    if let Some(p) = row.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                        return Err(Error::InvalidModel(format!(
                            "transition ({h},{s},{a}) has invalid probability {p}"
                        )));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOL {
                        return Err(Error::InvalidModel(format!(
                            "transition row ({h},{s},{a}) sums to {sum}"
                        )));
                    }
                    let r = self.reward(h, s, a);
                    if !(0.0..=1.0).contains(&r) {
                        return Err(Error::InvalidModel(format!(
                            "reward ({h},{s},{a}) = {r} outside [0, 1]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn start_state(&self) -> usize {
        self.start_state
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    #[inline]
    fn sa_index(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!((1..=self.horizon).contains(&h));
        ((h - 1) * self.num_states + s) * self.num_actions + a
    }

    /// Next-state distribution for `(h, s, a)`.
    #[inline]
    pub fn transition_row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let i = self.sa_index(h, s, a) * self.num_states;
        &self.transitions[i..i + self.num_states]
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.rewards[self.sa_index(h, s, a)]
    }

    /// Mutable access to one reward entry, for perturbation experiments.
    /// The caller is responsible for keeping the entry in `[0, 1]`.
    pub fn reward_mut(&mut self, h: usize, s: usize, a: usize) -> &mut f64 {
        let i = self.sa_index(h, s, a);
        &mut self.rewards[i]
    }

    pub fn check_indices(&self, h: usize, s: usize, a: usize) -> Result<()> {
        if !(1..=self.horizon).contains(&h) {
            return Err(Error::Index(format!("step {h} outside 1..={}", self.horizon)));
        }
        if s >= self.num_states {
            return Err(Error::Index(format!("state {s} outside 0..{}", self.num_states)));
        }
        if a >= self.num_actions {
            return Err(Error::Index(format!("action {a} outside 0..{}", self.num_actions)));
        }
        Ok(())
    }

    /// Samples one transition. Rewards are deterministic given `(h, s, a)`.
    pub fn step(&self, rng: &mut RngStream, h: usize, s: usize, a: usize) -> Result<(f64, usize)> {
        self.check_indices(h, s, a)?;
        Ok(self.step_unchecked(rng, h, s, a))
    }

    #[inline]
    pub(crate) fn step_unchecked(&self, rng: &mut RngStream, h: usize, s: usize, a: usize) -> (f64, usize) {
        let next = rng.categorical(self.transition_row(h, s, a));
        (self.reward(h, s, a), next)
    }

    /// Expected value of `values` under the next-state distribution.
    #[inline]
    pub fn expected_next(&self, h: usize, s: usize, a: usize, values: &[f64]) -> f64 {
        self.transition_row(h, s, a)
            .iter()
            .zip(values)
            .map(|(p, v)| p * v)
            .sum()
    }
}

/// A deterministic non-stationary policy: one action per `(h, s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    horizon: usize,
    num_states: usize,
    actions: Vec<usize>,
}

impl Policy {
    pub fn from_fn(horizon: usize, num_states: usize, mut f: impl FnMut(usize, usize) -> usize) -> Self {
        let mut actions = Vec::with_capacity(horizon * num_states);
        for h in 1..=horizon {
            for s in 0..num_states {
                actions.push(f(h, s));
            }
        }
        Policy {
            horizon,
            num_states,
            actions,
        }
    }

    pub fn constant(horizon: usize, num_states: usize, action: usize) -> Self {
        Self::from_fn(horizon, num_states, |_, _| action)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[(h - 1) * self.num_states + s]
    }

    pub fn set(&mut self, h: usize, s: usize, a: usize) {
        self.actions[(h - 1) * self.num_states + s] = a;
    }
}

/// State values for steps `1..=H+1`; the row at `H + 1` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct StateValues {
    horizon: usize,
    num_states: usize,
    values: Vec<f64>,
}

impl StateValues {
    fn zeros(horizon: usize, num_states: usize) -> Self {
        StateValues {
            horizon,
            num_states,
            values: vec![0.0; (horizon + 1) * num_states],
        }
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize) -> f64 {
        self.values[(h - 1) * self.num_states + s]
    }

    /// All states' values at step `h`.
    #[inline]
    pub fn row(&self, h: usize) -> &[f64] {
        let i = (h - 1) * self.num_states;
        &self.values[i..i + self.num_states]
    }

    fn row_mut(&mut self, h: usize) -> &mut [f64] {
        let i = (h - 1) * self.num_states;
        &mut self.values[i..i + self.num_states]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// Optimal action values `Q*` and state values `V*`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTables {
    num_states: usize,
    num_actions: usize,
    q: Vec<f64>,
    v: StateValues,
}

impl ValueTables {
    #[inline]
    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[((h - 1) * self.num_states + s) * self.num_actions + a]
    }

    #[inline]
    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v.get(h, s)
    }

    pub fn state_values(&self) -> &StateValues {
        &self.v
    }

    /// Greedy policy on `Q*`, ties to the lowest action index.
    pub fn greedy_policy(&self) -> Policy {
        Policy::from_fn(self.v.horizon, self.num_states, |h, s| {
            argmax((0..self.num_actions).map(|a| self.q(h, s, a)))
        })
    }
}

/// Index of the largest value; ties go to the lowest index.
#[inline]
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Backward induction for `Q*` and `V*`.
pub fn solve_optimal(mdp: &TabularMdp) -> Result<ValueTables> {
    mdp.validate()?;
    Ok(solve_optimal_unchecked(mdp))
}

pub(crate) fn solve_optimal_unchecked(mdp: &TabularMdp) -> ValueTables {
    let (hz, ns, na) = (mdp.horizon, mdp.num_states, mdp.num_actions);
    let mut v = StateValues::zeros(hz, ns);
    let mut q = vec![0.0; hz * ns * na];
    for h in (1..=hz).rev() {
        let (head, tail) = v.values.split_at_mut(h * ns);
        let next = &tail[..ns];
        let current = &mut head[(h - 1) * ns..];
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let value = mdp.reward(h, s, a) + mdp.expected_next(h, s, a, next);
                q[((h - 1) * ns + s) * na + a] = value;
                best = best.max(value);
            }
            current[s] = best;
        }
    }
    ValueTables {
        num_states: ns,
        num_actions: na,
        q,
        v,
    }
}

/// Exact value `V^π` of a deterministic policy.
pub fn evaluate_policy(mdp: &TabularMdp, policy: &Policy) -> Result<StateValues> {
    if policy.horizon != mdp.horizon || policy.num_states != mdp.num_states {
        return Err(Error::InvalidArgument(format!(
            "policy shape ({}, {}) does not match MDP ({}, {})",
            policy.horizon, policy.num_states, mdp.horizon, mdp.num_states
        )));
    }
    if let Some(a) = policy.actions.iter().find(|a| **a >= mdp.num_actions) {
        return Err(Error::Index(format!(
            "policy action {a} outside 0..{}",
            mdp.num_actions
        )));
    }
    let ns = mdp.num_states;
    let mut v = StateValues::zeros(mdp.horizon, ns);
    for h in (1..=mdp.horizon).rev() {
        let next = v.row(h + 1).to_vec();
        let current = v.row_mut(h);
        for (s, out) in current.iter_mut().enumerate() {
            let a = policy.action(h, s);
            *out = mdp.reward(h, s, a) + mdp.expected_next(h, s, a, &next);
        }
    }
    Ok(v)
}

/// One realized transition; `h` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub h: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// A full episode trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeRecord {
    pub trajectory: Vec<Transition>,
    pub realized_return: f64,
}

impl EpisodeRecord {
    pub fn with_capacity(horizon: usize) -> Self {
        EpisodeRecord {
            trajectory: Vec::with_capacity(horizon),
            realized_return: 0.0,
        }
    }

    pub fn push(&mut self, t: Transition) {
        self.realized_return += t.reward;
        self.trajectory.push(t);
    }
}

/// Cumulative regret against the optimal start-state value.
pub fn cumulative_regret(v_star_at_start: f64, episode_returns: &[f64]) -> Vec<f64> {
    episode_returns
        .iter()
        .scan(0.0, |acc, r| {
            *acc += v_star_at_start - r;
            Some(*acc)
        })
        .collect()
}
