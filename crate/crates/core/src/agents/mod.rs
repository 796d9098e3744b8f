//! Episodic agents behind a common interface.
//!
//! The harness drives every agent the same way: `begin_episode`, then for
//! `h = 1..=H` one `select_action` followed by one `observe`. In exact
//! regret mode the harness additionally calls `commit_policy` right after
//! `begin_episode`; the agent then pre-draws everything it needs for the
//! episode and must act according to the returned policy.

mod baselines;
mod psql;
mod rlsvi;
mod staged_randql;
mod ucbql;

use std::fmt;

pub use baselines::{OracleAgent, RandomAgent};
pub use psql::{construct_target, sample_argmax, vanilla_target, PsqlAgent, TargetRule};
pub use rlsvi::{rlsvi_noise_std, RlsviAgent};
pub use staged_randql::{stage_length, StagedRandQlAgent};
pub use ucbql::{ucb_bonus, UcbqlAgent};

use crate::error::{Error, Result};
use crate::mdp::{Policy, Transition, ValueTables};
use crate::posterior::{ClampSchedule, InitValue, VarianceConstants, VarianceMode};

/// What every agent exposes to the harness.
pub trait Agent: Send {
    /// Display name used in results.
    fn name(&self) -> &str;

    fn begin_episode(&mut self);

    /// Action for state `s` at step `h` (1-based).
    fn select_action(&mut self, h: usize, s: usize) -> usize;

    /// Consumes the transition just taken at `t.h`.
    fn observe(&mut self, t: &Transition);

    /// Pre-draws and returns the deterministic policy the agent will follow
    /// for the rest of the current episode.
    fn commit_policy(&mut self) -> Policy;

    /// Current point estimate of `Q_h(s, a)`, for diagnostics.
    fn estimate(&self, h: usize, s: usize, a: usize) -> f64;

    /// Posterior table, for the posterior-sampling agents.
    fn posterior(&self) -> Option<&crate::posterior::PosteriorTable> {
        None
    }
}

/// Algorithm tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Psql,
    PsqlStar,
    PsqlBernstein,
    Ucbql,
    Rlsvi,
    StagedRandQl,
    Random,
    Oracle,
}

impl AgentKind {
    pub const ALL: [AgentKind; 8] = [
        AgentKind::Psql,
        AgentKind::PsqlStar,
        AgentKind::PsqlBernstein,
        AgentKind::Ucbql,
        AgentKind::Rlsvi,
        AgentKind::StagedRandQl,
        AgentKind::Random,
        AgentKind::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AgentKind::Psql => "psql",
            AgentKind::PsqlStar => "psql-star",
            AgentKind::PsqlBernstein => "psql-bernstein",
            AgentKind::Ucbql => "ucbql",
            AgentKind::Rlsvi => "rlsvi",
            AgentKind::StagedRandQl => "staged-randql",
            AgentKind::Random => "random",
            AgentKind::Oracle => "oracle",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownAgent(name.to_string()))
    }

    pub fn description(&self) -> &'static str {
        match self {
            AgentKind::Psql => "posterior-sampling Q-learning, optimistic J-sample target",
            AgentKind::PsqlStar => "posterior-sampling Q-learning, vanilla single-sample target",
            AgentKind::PsqlBernstein => "posterior-sampling Q-learning, Bernstein variance schedule",
            AgentKind::Ucbql => "Q-learning with Hoeffding UCB bonus",
            AgentKind::Rlsvi => "randomized least-squares value iteration (tabular)",
            AgentKind::StagedRandQl => "staged randomized Q-learning (Dirichlet stage weights)",
            AgentKind::Random => "uniform random actions",
            AgentKind::Oracle => "greedy on the true optimal Q (needs the true model)",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of the staged randomized Q-learning baseline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandQlParams {
    /// Ensemble size.
    pub ensemble: usize,
    /// Prior pseudo-count; `None` means `1 / S`.
    pub prior_count: Option<f64>,
    /// Prior pseudo-reward scale.
    pub prior_reward: f64,
    /// Posterior inflation of the Dirichlet weights.
    pub kappa: f64,
}

impl Default for RandQlParams {
    fn default() -> Self {
        RandQlParams {
            ensemble: 10,
            prior_count: None,
            prior_reward: 1.0,
            kappa: 1.0,
        }
    }
}

/// Everything needed to build one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    pub kind: AgentKind,
    /// Name written to results; defaults to the kind's name.
    pub label: Option<String>,
    pub variance_mode: VarianceMode,
    pub constants: VarianceConstants,
    /// Fixed number of target samples for PSQL instead of the high-probability `J`.
    pub samples: Option<usize>,
    pub init: InitValue,
    /// Clip stored estimates into `[0, V_max]`.
    pub clip: bool,
    pub c_ucb: f64,
    pub c_rlsvi: f64,
    pub randql: RandQlParams,
    pub seed: u64,
}

impl AgentConfig {
    /// Constants of the tuned benchmark setting: `δ = 0.05`, `V_max = 1`,
    /// tuned posterior scale `c = 0.02`, UCB `c = 0.01`, RLSVI `c = 0.005`,
    /// initialization at `V_max` (step cap for staged RandQL), clipping on.
    pub fn experiment(kind: AgentKind) -> Self {
        let constants = VarianceConstants {
            bernstein_clamp: ClampSchedule::Tuned,
            ..VarianceConstants::default()
        };
        AgentConfig {
            kind,
            label: None,
            variance_mode: match kind {
                AgentKind::PsqlBernstein => VarianceMode::Bernstein,
                _ => VarianceMode::Tuned,
            },
            constants,
            samples: None,
            init: match kind {
                AgentKind::StagedRandQl => InitValue::StepCap,
                _ => InitValue::VMax(constants.v_max),
            },
            clip: true,
            c_ucb: 0.01,
            c_rlsvi: 0.005,
            randql: RandQlParams::default(),
            seed: 0,
        }
    }

    /// Unnormalized setting: means start at `H`, `σ² = 64 H³`, no clipping,
    /// `V_max = H`.
    pub fn theoretical(kind: AgentKind, horizon: usize) -> Self {
        let mut cfg = Self::experiment(kind);
        cfg.variance_mode = match kind {
            AgentKind::PsqlBernstein => VarianceMode::Bernstein,
            _ => VarianceMode::HoeffdingTheoretical,
        };
        cfg.constants.v_max = horizon as f64;
        cfg.constants.bernstein_clamp = ClampSchedule::HoeffdingTheoretical;
        cfg.init = InitValue::Horizon;
        cfg.clip = false;
        cfg
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.kind.name())
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.constants;
        if !(c.delta > 0.0 && c.delta < 1.0) {
            return Err(Error::Config(format!("delta {} outside (0, 1)", c.delta)));
        }
        let positive = [
            ("c_tuned", c.c_tuned),
            ("c_bernstein", c.c_bernstein),
            ("v_max", c.v_max),
            ("c_rlsvi", self.c_rlsvi),
            ("prior_reward", self.randql.prior_reward),
            ("kappa", self.randql.kappa),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.c_ucb >= 0.0 && self.c_ucb.is_finite()) {
            return Err(Error::Config(format!("c_ucb must be nonnegative, got {}", self.c_ucb)));
        }
        if let Some(s) = c.sigma_sq {
            if !(s > 0.0) {
                return Err(Error::Config(format!("sigma_sq must be positive, got {s}")));
            }
        }
        if self.samples == Some(0) {
            return Err(Error::Config("target sample count must be at least 1".into()));
        }
        if self.randql.ensemble == 0 {
            return Err(Error::Config("ensemble size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Shape of the problem an agent is built for. `episodes` is the planned
/// number of episodes `K` (it enters log factors through `T = K H`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvInfo {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions: usize,
    pub episodes: usize,
}

impl EnvInfo {
    pub fn total_steps(&self) -> usize {
        self.episodes * self.horizon
    }

    /// `log(S A T / δ)`.
    pub fn log_term(&self, delta: f64) -> f64 {
        ((self.num_states * self.num_actions) as f64 * self.total_steps() as f64 / delta).ln()
    }
}

/// Builds an agent. `truth` is required only by the oracle agent.
pub fn build_agent(config: &AgentConfig, env: &EnvInfo, truth: Option<&ValueTables>) -> Result<Box<dyn Agent>> {
    config.validate()?;
    let agent: Box<dyn Agent> = match config.kind {
        AgentKind::Psql | AgentKind::PsqlStar | AgentKind::PsqlBernstein => Box::new(PsqlAgent::new(config, env)?),
        AgentKind::Ucbql => Box::new(UcbqlAgent::new(config, env)),
        AgentKind::Rlsvi => Box::new(RlsviAgent::new(config, env)),
        AgentKind::StagedRandQl => Box::new(StagedRandQlAgent::new(config, env)),
        AgentKind::Random => Box::new(RandomAgent::new(config, env)),
        AgentKind::Oracle => {
            let truth = truth.ok_or_else(|| {
                Error::InvalidArgument("the oracle agent needs the true optimal values".into())
            })?;
            Box::new(OracleAgent::new(config, truth))
        }
    };
    Ok(agent)
}
