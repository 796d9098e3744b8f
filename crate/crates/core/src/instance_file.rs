//! Text serialization of MDP instances for audit and replay.
//!
//! Instances are stored as TOML with these keys:
//!
//! | key | type | meaning |
//! |-----|------|---------|
//! | `format` | string | always `"psqlab-instance-v1"` |
//! | `family` | string | `"chain"`, `"grid"` or `"custom"` |
//! | `horizon`, `num_states`, `num_actions`, `start_state` | integer | shape |
//! | `chain_p`, `chain_length` | float, integer | chain parameters (chain only) |
//! | `grid_side`, `grid_holes`, `grid_slip` | integer, integer array, float array | grid parameters (grid only) |
//! | `rewards` | `[h][s][a]` float array | expected rewards, `h` from 1 |
//! | `transitions` | `[h][s][a][s']` float array | transition probabilities |
//!
//! Floats are written in shortest round-trip form, so a dump reloads to a
//! bit-identical MDP. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environments::{ChainSpec, GridSpec};
use crate::error::{Error, Result};
use crate::harness::{Instance, InstanceSpec};
use crate::mdp::TabularMdp;

pub const FORMAT_TAG: &str = "psqlab-instance-v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    format: String,
    family: String,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    start_state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chain_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chain_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_side: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_holes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_slip: Option<Vec<f64>>,
    rewards: Vec<Vec<Vec<f64>>>,
    transitions: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Renders an instance in the documented text format.
pub fn to_text(instance: &Instance) -> Result<String> {
    let mdp = &instance.mdp;
    let (hz, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut record = InstanceRecord {
        format: FORMAT_TAG.to_string(),
        family: "custom".to_string(),
        horizon: hz,
        num_states: ns,
        num_actions: na,
        start_state: mdp.start_state(),
        chain_p: None,
        chain_length: None,
        grid_side: None,
        grid_holes: None,
        grid_slip: None,
        rewards: (1..=hz)
            .map(|h| (0..ns).map(|s| (0..na).map(|a| mdp.reward(h, s, a)).collect()).collect())
            .collect(),
        transitions: (1..=hz)
            .map(|h| {
                (0..ns)
                    .map(|s| (0..na).map(|a| mdp.transition_row(h, s, a).to_vec()).collect())
                    .collect()
            })
            .collect(),
    };
    match &instance.spec {
        InstanceSpec::Chain(spec) => {
            record.family = "chain".into();
            record.chain_p = Some(spec.p);
            record.chain_length = Some(spec.length);
        }
        InstanceSpec::Grid(spec) => {
            record.family = "grid".into();
            record.grid_side = Some(spec.side);
            record.grid_holes = Some(spec.holes.clone());
            record.grid_slip = Some(spec.slip.to_vec());
        }
        InstanceSpec::Custom => {}
    }
    toml::to_string(&record).map_err(|e| Error::InvalidArgument(format!("cannot serialize instance: {e}")))
}

/// Parses the documented text format and validates the MDP.
pub fn from_text(text: &str, origin: &Path) -> Result<Instance> {
    let parse_err = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let record: InstanceRecord = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if record.format != FORMAT_TAG {
        return Err(parse_err(format!("unsupported format tag `{}`", record.format)));
    }
    let (hz, ns, na) = (record.horizon, record.num_states, record.num_actions);
    let shape_ok = record.rewards.len() == hz
        && record.transitions.len() == hz
        && record.rewards.iter().all(|r| r.len() == ns && r.iter().all(|x| x.len() == na))
        && record
            .transitions
            .iter()
            .all(|t| t.len() == ns && t.iter().all(|x| x.len() == na && x.iter().all(|row| row.len() == ns)));
    if !shape_ok {
        return Err(parse_err(format!(
            "tensor shapes do not match horizon={hz}, num_states={ns}, num_actions={na}"
        )));
    }
    let rewards: Vec<f64> = record.rewards.into_iter().flatten().flatten().collect();
    let transitions: Vec<f64> = record.transitions.into_iter().flatten().flatten().flatten().collect();
    let mdp = TabularMdp::new(hz, ns, na, record.start_state, transitions, rewards)
        .map_err(|e| parse_err(e.to_string()))?;
    let spec = match record.family.as_str() {
        "chain" => {
            let (Some(p), Some(length)) = (record.chain_p, record.chain_length) else {
                return Err(parse_err("chain instances need chain_p and chain_length".into()));
            };
            InstanceSpec::Chain(ChainSpec { p, length, horizon: hz })
        }
        "grid" => {
            let (Some(side), Some(holes), Some(slip)) = (record.grid_side, record.grid_holes, record.grid_slip) else {
                return Err(parse_err("grid instances need grid_side, grid_holes and grid_slip".into()));
            };
            let slip: [f64; 3] = slip
                .try_into()
                .map_err(|_| parse_err("grid_slip must have three entries".into()))?;
            InstanceSpec::Grid(GridSpec {
                side,
                holes,
                horizon: hz,
                slip,
            })
        }
        "custom" => InstanceSpec::Custom,
        other => return Err(parse_err(format!("unknown family `{other}`"))),
    };
    Ok(Instance { mdp, spec })
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    fs::write(path, to_text(instance)?).map_err(|e| Error::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text, path)
}
