//! Seeded multi-instance regret experiments.
//!
//! For every instance `i` the environment is drawn from the stream seeded by
//! `derive_seed(master, i, "env")` and solved once for `V*`. Every agent
//! then runs `K` episodes on it with its own seed
//! `derive_seed(master, i, name)`; environment noise for that run comes from
//! `derive_seed(master, i, "env-step:" + name)`. Cells (instance × agent)
//! run in parallel and results are gathered in `(agent, instance)` order,
//! so outputs do not depend on the thread count.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::agents::{build_agent, Agent, AgentConfig, AgentKind, EnvInfo};
use crate::environments::{make_chain, make_grid, ChainRanges, ChainSpec, GridRanges, GridSpec};
use crate::error::{Error, Result};
use crate::mdp::{cumulative_regret, evaluate_policy, solve_optimal_unchecked, EpisodeRecord, TabularMdp, Transition};
use crate::rng::{derive_seed, RngStream};

pub const RUNS_HEADER: &str = "agent,instance,seed,episode,episode_return,cumulative_regret";
pub const AGGREGATE_HEADER: &str = "agent,episode,mean_cum_regret,std_cum_regret";
pub const RUNS_FILE: &str = "runs.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

/// Environment family and its sampling ranges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnvFamily {
    Chain(ChainRanges),
    Grid(GridRanges),
}

impl EnvFamily {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "chain" => Ok(EnvFamily::Chain(ChainRanges::default())),
            "grid" => Ok(EnvFamily::Grid(GridRanges::default())),
            other => Err(Error::Config(format!("unknown environment `{other}` (expected chain or grid)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvFamily::Chain(_) => "chain",
            EnvFamily::Grid(_) => "grid",
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            EnvFamily::Chain(r) => r.horizon,
            EnvFamily::Grid(r) => r.horizon,
        }
    }

    pub fn set_horizon(&mut self, horizon: usize) {
        match self {
            EnvFamily::Chain(r) => r.horizon = horizon,
            EnvFamily::Grid(r) => r.horizon = horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvFamily::Chain(r) => r.validate(),
            EnvFamily::Grid(r) => r.validate(),
        }
    }

    pub fn generate(&self, rng: &mut RngStream) -> Result<Instance> {
        match self {
            EnvFamily::Chain(r) => make_chain(rng, r).map(|(mdp, spec)| Instance {
                mdp,
                spec: InstanceSpec::Chain(spec),
            }),
            EnvFamily::Grid(r) => make_grid(rng, r).map(|(mdp, spec)| Instance {
                mdp,
                spec: InstanceSpec::Grid(spec),
            }),
        }
    }

    /// Instance `index` of an experiment with this master seed.
    pub fn instance(&self, master_seed: u64, index: usize) -> Result<Instance> {
        let mut rng = RngStream::from_seed(derive_seed(master_seed, index as u64, "env"));
        self.generate(&mut rng)
    }
}

/// Parameters an instance was drawn with.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    Chain(ChainSpec),
    Grid(GridSpec),
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub mdp: TabularMdp,
    pub spec: InstanceSpec,
}

/// How per-episode performance enters the regret.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegretMode {
    /// `V*(start) - realized return`.
    Realized,
    /// `V*(start) - V^{π_k}(start)` for the policy committed at episode start.
    Exact,
}

impl RegretMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "realized" => Ok(RegretMode::Realized),
            "exact" => Ok(RegretMode::Exact),
            other => Err(Error::Config(format!("unknown regret mode `{other}` (expected realized or exact)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegretMode::Realized => "realized",
            RegretMode::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvFamily,
    pub agents: Vec<AgentConfig>,
    pub episodes: usize,
    pub instances: usize,
    pub master_seed: u64,
    pub regret_mode: RegretMode,
    /// Worker threads; 0 picks automatically.
    pub threads: usize,
}

impl ExperimentConfig {
    /// Experiment with the benchmark constants for each named agent.
    pub fn new(env: EnvFamily, agent_names: &[&str], episodes: usize, instances: usize, master_seed: u64) -> Result<Self> {
        let agents = agent_names
            .iter()
            .map(|n| AgentKind::parse(n).map(AgentConfig::experiment))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentConfig {
            env,
            agents,
            episodes,
            instances,
            master_seed,
            regret_mode: RegretMode::Realized,
            threads: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.instances == 0 {
            return Err(Error::Config("instances must be at least 1".into()));
        }
        if self.agents.is_empty() {
            return Err(Error::Config("no agents configured".into()));
        }
        self.env.validate()?;
        let mut names: Vec<&str> = self.agents.iter().map(|a| a.display_name()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate agent name `{}`", w[0])));
        }
        for agent in &self.agents {
            if agent.display_name().contains(',') || agent.display_name().contains('"') {
                return Err(Error::Config(format!("agent name `{}` cannot contain , or \"", agent.display_name())));
            }
            agent.validate()?;
        }
        Ok(())
    }
}

/// Cumulative regret of one agent on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretCurve {
    pub agent: String,
    pub instance: usize,
    pub seed: u64,
    pub v_star: f64,
    pub returns: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl RegretCurve {
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret after `k` episodes (1-based).
    pub fn at(&self, k: usize) -> f64 {
        self.cumulative[k - 1]
    }
}

/// Per-episode mean and sample standard deviation across instances.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateCurve {
    pub agent: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Call counts of one run, checked against `K · H`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CallCounts {
    pub select_action: usize,
    pub observe: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub curves: Vec<RegretCurve>,
    pub aggregates: Vec<AggregateCurve>,
    pub instances: Vec<Instance>,
}

impl ExperimentResult {
    pub fn curves_for<'a>(&'a self, agent: &'a str) -> impl Iterator<Item = &'a RegretCurve> + 'a {
        self.curves.iter().filter(move |c| c.agent == agent)
    }

    /// Final cumulative regret per instance, in instance order.
    pub fn final_regrets(&self, agent: &str) -> Vec<f64> {
        self.curves_for(agent).map(RegretCurve::final_regret).collect()
    }

    pub fn aggregate(&self, agent: &str) -> Option<&AggregateCurve> {
        self.aggregates.iter().find(|a| a.agent == agent)
    }

    pub fn final_mean(&self, agent: &str) -> Option<f64> {
        self.aggregate(agent).and_then(|a| a.mean.last().copied())
    }

    pub fn write_runs_csv(&self, path: &Path) -> Result<()> {
        let rows = self.curves.iter().flat_map(|c| {
            c.returns.iter().zip(&c.cumulative).enumerate().map(|(k, (&ret, &cum))| RunRow {
                agent: &c.agent,
                instance: c.instance,
                seed: c.seed,
                episode: k + 1,
                episode_return: ret,
                cumulative_regret: cum,
            })
        });
        write_rows(path, rows)
    }

    pub fn write_aggregate_csv(&self, path: &Path) -> Result<()> {
        let rows = self.aggregates.iter().flat_map(|a| {
            a.mean.iter().zip(&a.std).enumerate().map(|(k, (&m, &s))| AggregateRow {
                agent: &a.agent,
                episode: k + 1,
                mean_cum_regret: m,
                std_cum_regret: s,
            })
        });
        write_rows(path, rows)
    }

    /// Writes `runs.csv` and `aggregate.csv` into `dir`, creating it.
    pub fn write_csvs(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let runs = dir.join(RUNS_FILE);
        let agg = dir.join(AGGREGATE_FILE);
        self.write_runs_csv(&runs)?;
        self.write_aggregate_csv(&agg)?;
        Ok((runs, agg))
    }
}

// Field order and names define the CSV headers.
#[derive(Serialize)]
struct RunRow<'a> {
    agent: &'a str,
    instance: usize,
    seed: u64,
    episode: usize,
    episode_return: f64,
    cumulative_regret: f64,
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    agent: &'a str,
    episode: usize,
    mean_cum_regret: f64,
    std_cum_regret: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<()> {
    let io_err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    for row in rows {
        w.serialize(row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Plays one episode from the start state.
pub fn run_episode(mdp: &TabularMdp, agent: &mut dyn Agent, rng: &mut RngStream, counts: &mut CallCounts) -> EpisodeRecord {
    let mut record = EpisodeRecord::with_capacity(mdp.horizon());
    let mut s = mdp.start_state();
    for h in 1..=mdp.horizon() {
        let a = agent.select_action(h, s);
        counts.select_action += 1;
        let (reward, next_state) = mdp.step_unchecked(rng, h, s, a);
        let t = Transition {
            h,
            state: s,
            action: a,
            reward,
            next_state,
        };
        agent.observe(&t);
        counts.observe += 1;
        record.push(t);
        s = next_state;
    }
    record
}

/// Runs `episodes` episodes and returns the per-episode performance used
/// for regret (realized return or exact committed-policy value).
pub fn run_agent(
    mdp: &TabularMdp,
    agent: &mut dyn Agent,
    episodes: usize,
    rng: &mut RngStream,
    mode: RegretMode,
) -> Result<(Vec<f64>, CallCounts)> {
    let mut counts = CallCounts::default();
    let mut values = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        agent.begin_episode();
        let exact = match mode {
            RegretMode::Realized => None,
            RegretMode::Exact => {
                let policy = agent.commit_policy();
                Some(evaluate_policy(mdp, &policy)?.get(1, mdp.start_state()))
            }
        };
        let record = run_episode(mdp, agent, rng, &mut counts);
        values.push(exact.unwrap_or(record.realized_return));
    }
    let expected = episodes * mdp.horizon();
    if counts.select_action != expected || counts.observe != expected {
        return Err(Error::InvalidArgument(format!(
            "agent `{}` made {:?} calls, expected {expected} of each",
            agent.name(),
            counts
        )));
    }
    Ok((values, counts))
}

/// Arithmetic mean and sample standard deviation (n - 1 denominator) per
/// episode index.
pub fn aggregate(curves: &[&[f64]]) -> Result<(Vec<f64>, Vec<f64>)> {
    let Some(first) = curves.first() else {
        return Err(Error::LengthMismatch("no curves to aggregate".into()));
    };
    let len = first.len();
    if let Some(c) = curves.iter().find(|c| c.len() != len) {
        return Err(Error::LengthMismatch(format!("curve lengths {} and {}", len, c.len())));
    }
    let n = curves.len() as f64;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for k in 0..len {
        let m = curves.iter().map(|c| c[k]).sum::<f64>() / n;
        mean[k] = m;
        if curves.len() > 1 {
            let ss: f64 = curves.iter().map(|c| (c[k] - m).powi(2)).sum();
            std[k] = (ss / (n - 1.0)).sqrt();
        }
    }
    Ok((mean, std))
}

struct Cell<'a> {
    instance: usize,
    agent: &'a AgentConfig,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_cells(config))
}

fn run_cells(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let instances: Vec<Instance> = (0..config.instances)
        .into_par_iter()
        .map(|i| config.env.instance(config.master_seed, i))
        .collect::<Result<_>>()?;
    let truths: Vec<_> = instances.par_iter().map(|inst| solve_optimal_unchecked(&inst.mdp)).collect();

    let mut agents: Vec<&AgentConfig> = config.agents.iter().collect();
    agents.sort_by(|a, b| a.display_name().cmp(b.display_name()));
    let cells: Vec<Cell> = agents
        .iter()
        .flat_map(|agent| (0..config.instances).map(move |instance| Cell { instance, agent }))
        .collect();

    let curves: Vec<RegretCurve> = cells
        .par_iter()
        .map(|cell| {
            let inst = &instances[cell.instance];
            let truth = &truths[cell.instance];
            let name = cell.agent.display_name();
            let seed = derive_seed(config.master_seed, cell.instance as u64, name);
            let agent_cfg = cell.agent.clone().with_seed(seed);
            let env = EnvInfo {
                horizon: inst.mdp.horizon(),
                num_states: inst.mdp.num_states(),
                num_actions: inst.mdp.num_actions(),
                episodes: config.episodes,
            };
            let mut agent = build_agent(&agent_cfg, &env, Some(truth))?;
            let mut step_rng = RngStream::from_seed(derive_seed(
                config.master_seed,
                cell.instance as u64,
                &format!("env-step:{name}"),
            ));
            let (returns, _) = run_agent(&inst.mdp, agent.as_mut(), config.episodes, &mut step_rng, config.regret_mode)?;
            let v_star = truth.v(1, inst.mdp.start_state());
            Ok(RegretCurve {
                agent: name.to_string(),
                instance: cell.instance,
                seed,
                v_star,
                cumulative: cumulative_regret(v_star, &returns),
                returns,
            })
        })
        .collect::<Result<_>>()?;

    let mut aggregates = Vec::with_capacity(agents.len());
    for agent in &agents {
        let name = agent.display_name();
        let series: Vec<&[f64]> = curves
            .iter()
            .filter(|c| c.agent == name)
            .map(|c| c.cumulative.as_slice())
            .collect();
        let (mean, std) = aggregate(&series)?;
        aggregates.push(AggregateCurve {
            agent: name.to_string(),
            mean,
            std,
        });
    }
    Ok(ExperimentResult {
        curves,
        aggregates,
        instances,
    })
}
