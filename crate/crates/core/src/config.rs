//! Flat key/value experiment settings, read from TOML files or assembled
//! from command-line flags.
//!
//! Recognized keys (all optional; defaults in parentheses):
//!
//! * `env` — `"chain"` or `"grid"` (`"chain"`)
//! * `agents` — comma-separated agent names (`"psql-star,ucbql"`)
//! * `episodes` (10000 on chain, 20000 on grid), `instances` (10), `seed` (0)
//! * `out` — output directory (`"psqlab-out"`)
//! * `regret_mode` — `"realized"` or `"exact"` (`"realized"`)
//! * `horizon` (32)
//! * `delta` (0.05), `v_max` (1.0)
//! * `c_tuned` (0.02), `c_ucb` (0.01), `c_rlsvi` (0.005), `c_bernstein` (1.0)
//! * `psql_samples` — fixed target sample count for `psql` and `psql-bernstein`
//! * `variance_mode` — `"tuned"` or `"hoeffding"` for `psql`/`psql-star`
//! * `init` — `"vmax"`, `"horizon"` or `"step-cap"` for the Q-learning agents
//! * `clip` — clip stored estimates into `[0, v_max]` (true)
//! * `chain_p_min`, `chain_p_max` (0.7, 0.95), `chain_length_min`, `chain_length_max` (7, 14)
//! * `grid_holes_min`, `grid_holes_max` (2, 5)
//! * `randql_ensemble` (10)
//!
//! Unknown keys are an error.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::agents::{AgentConfig, AgentKind};
use crate::error::{Error, Result};
use crate::harness::{EnvFamily, ExperimentConfig, RegretMode};
use crate::posterior::{InitValue, VarianceMode};

pub const DEFAULT_OUT: &str = "psqlab-out";

macro_rules! settings {
    ($($field:ident : $ty:ty),* $(,)?) => {
        #[derive(Clone, Debug, Default, PartialEq, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct RunSettings {
            $(pub $field: Option<$ty>,)*
        }

        impl RunSettings {
            /// Combines two sources; a key set in both must agree.
            pub fn merge(self, other: RunSettings) -> Result<RunSettings> {
                Ok(RunSettings {
                    $($field: merge_key(stringify!($field), self.$field, other.$field)?,)*
                })
            }
        }
    };
}

settings! {
    env: String,
    agents: String,
    episodes: usize,
    instances: usize,
    seed: u64,
    out: PathBuf,
    regret_mode: String,
    horizon: usize,
    delta: f64,
    v_max: f64,
    c_tuned: f64,
    c_ucb: f64,
    c_rlsvi: f64,
    c_bernstein: f64,
    psql_samples: usize,
    variance_mode: String,
    init: String,
    clip: bool,
    chain_p_min: f64,
    chain_p_max: f64,
    chain_length_min: usize,
    chain_length_max: usize,
    grid_holes_min: usize,
    grid_holes_max: usize,
    randql_ensemble: usize,
}

fn merge_key<T: PartialEq + std::fmt::Debug>(key: &str, a: Option<T>, b: Option<T>) -> Result<Option<T>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::Config(format!(
            "`{key}` is set to {x:?} in the config file and {y:?} on the command line"
        ))),
        (Some(x), _) => Ok(Some(x)),
        (None, y) => Ok(y),
    }
}

impl RunSettings {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// Resolves defaults and builds the experiment.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let mut env = EnvFamily::parse(self.env.as_deref().unwrap_or("chain"))?;
        if let Some(h) = self.horizon {
            env.set_horizon(h);
        }
        match &mut env {
            EnvFamily::Chain(r) => {
                set(&mut r.p_min, self.chain_p_min);
                set(&mut r.p_max, self.chain_p_max);
                set(&mut r.length_min, self.chain_length_min);
                set(&mut r.length_max, self.chain_length_max);
                if self.grid_holes_min.is_some() || self.grid_holes_max.is_some() {
                    return Err(Error::Config("grid_holes_* keys need env = \"grid\"".into()));
                }
            }
            EnvFamily::Grid(r) => {
                set(&mut r.holes_min, self.grid_holes_min);
                set(&mut r.holes_max, self.grid_holes_max);
                if self.chain_p_min.is_some()
                    || self.chain_p_max.is_some()
                    || self.chain_length_min.is_some()
                    || self.chain_length_max.is_some()
                {
                    return Err(Error::Config("chain_* keys need env = \"chain\"".into()));
                }
            }
        }
        let default_episodes = match env {
            EnvFamily::Chain(_) => 10_000,
            EnvFamily::Grid(_) => 20_000,
        };
        let names = self.agents.as_deref().unwrap_or("psql-star,ucbql");
        let variance_mode = self.variance_mode.as_deref().map(VarianceMode::parse).transpose()?;
        if variance_mode == Some(VarianceMode::Bernstein) {
            return Err(Error::Config("use the psql-bernstein agent for the Bernstein schedule".into()));
        }
        let init = self.init.as_deref().map(parse_init).transpose()?;
        let mut agents = Vec::new();
        for name in names.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            let kind = AgentKind::parse(name)?;
            let mut cfg = AgentConfig::experiment(kind);
            let c = &mut cfg.constants;
            set(&mut c.delta, self.delta);
            set(&mut c.c_tuned, self.c_tuned);
            set(&mut c.c_bernstein, self.c_bernstein);
            if let Some(v) = self.v_max {
                c.v_max = v;
                if let InitValue::VMax(_) = cfg.init {
                    cfg.init = InitValue::VMax(v);
                }
            }
            set(&mut cfg.c_ucb, self.c_ucb);
            set(&mut cfg.c_rlsvi, self.c_rlsvi);
            set(&mut cfg.clip, self.clip);
            set(&mut cfg.randql.ensemble, self.randql_ensemble);
            if matches!(kind, AgentKind::Psql | AgentKind::PsqlBernstein) {
                cfg.samples = self.psql_samples.or(cfg.samples);
            }
            if matches!(kind, AgentKind::Psql | AgentKind::PsqlStar) {
                set(&mut cfg.variance_mode, variance_mode);
            }
            if !matches!(kind, AgentKind::Random | AgentKind::Oracle) {
                set(&mut cfg.init, init.map(|i| i.with_v_max(cfg.constants.v_max)));
            }
            agents.push(cfg);
        }
        let config = ExperimentConfig {
            env,
            agents,
            episodes: self.episodes.unwrap_or(default_episodes),
            instances: self.instances.unwrap_or(10),
            master_seed: self.seed.unwrap_or(0),
            regret_mode: RegretMode::parse(self.regret_mode.as_deref().unwrap_or("realized"))?,
            threads: 0,
        };
        config.validate()?;
        Ok(config)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn parse_init(name: &str) -> Result<InitValue> {
    match name {
        "vmax" => Ok(InitValue::VMax(1.0)),
        "horizon" => Ok(InitValue::Horizon),
        "step-cap" => Ok(InitValue::StepCap),
        other => Err(Error::Config(format!("unknown init `{other}` (expected vmax, horizon or step-cap)"))),
    }
}

impl InitValue {
    fn with_v_max(self, v_max: f64) -> Self {
        match self {
            InitValue::VMax(_) => InitValue::VMax(v_max),
            other => other,
        }
    }
}

/// Thread cap from `PSQLAB_THREADS` (unset or 0 means automatic).
pub fn threads_from_env() -> Result<usize> {
    match std::env::var("PSQLAB_THREADS") {
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("PSQLAB_THREADS must be a nonnegative integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}
