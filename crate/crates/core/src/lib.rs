//! A tabular episodic reinforcement-learning laboratory.
//!
//! The crate provides Q-learning with posterior sampling in three flavours
//! (an optimistic multi-sample target, a vanilla single-sample target and a
//! Bernstein variance schedule), three baselines (UCB Q-learning, tabular
//! RLSVI and staged randomized Q-learning), exact finite-horizon dynamic
//! programming, two randomized benchmark families and a seeded,
//! thread-count-independent regret harness.
//!
//! ```
//! use psqlab::prelude::*;
//!
//! let mut rng = RngStream::from_seed(1);
//! let (mdp, spec) = make_chain(&mut rng, &ChainRanges::fixed(1.0, 7, 32)).unwrap();
//! let values = solve_optimal(&mdp).unwrap();
//! assert_eq!(values.v(1, mdp.start_state()), 0.75);
//! assert_eq!(spec.length, 7);
//! ```

pub mod agents;
pub mod config;
pub mod environments;
pub mod error;
pub mod harness;
pub mod instance_file;
pub mod mdp;
pub mod posterior;
pub mod rng;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::agents::{build_agent, Agent, AgentConfig, AgentKind, EnvInfo};
    pub use crate::environments::{build_chain, build_grid, make_chain, make_grid, ChainRanges, ChainSpec, GridRanges, GridSpec};
    pub use crate::error::{Error, Result};
    pub use crate::harness::{aggregate, run_experiment, EnvFamily, ExperimentConfig, ExperimentResult, RegretCurve, RegretMode};
    pub use crate::mdp::{cumulative_regret, evaluate_policy, solve_optimal, Policy, TabularMdp, ValueTables};
    pub use crate::posterior::{InitValue, PosteriorTable, VarianceConstants, VarianceMode};
    pub use crate::rng::RngStream;
}
