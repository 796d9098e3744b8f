//! Randomized benchmark families: the left/right chain and the 4x4
//! slippery grid with holes.
//!
//! Both families pay a single goal reward of `(H - h) / H`, where `h` is the
//! step at which the agent arrives on the goal cell. The payout is attached
//! to the goal state itself (any action taken on the goal at step `h` pays
//! it) and the goal then moves to an absorbing zero-reward sink, so the
//! payout stays Markov in `(h, s)`. Holes also lead to the sink.

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::rng::RngStream;

pub const DEFAULT_HORIZON: usize = 32;

/// Chain actions.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Grid actions.
pub const GRID_LEFT: usize = 0;
pub const GRID_RIGHT: usize = 1;
pub const GRID_DOWN: usize = 2;
pub const GRID_UP: usize = 3;

pub const GRID_SIDE: usize = 4;
const GRID_CELLS: usize = GRID_SIDE * GRID_SIDE;
const GRID_START: usize = 0;
const GRID_GOAL: usize = GRID_CELLS - 1;
/// Largest hole count for which a hole-free start-to-goal path can exist
/// (14 free cells minus the 5 interior cells of a shortest path).
pub const MAX_GRID_HOLES: usize = GRID_CELLS - 2 - (2 * (GRID_SIDE - 1) - 1);

/// Goal payout for arriving on the goal at step `h`.
#[inline]
pub fn goal_payout(h: usize, horizon: usize) -> f64 {
    horizon.saturating_sub(h) as f64 / horizon as f64
}

/// Sampling ranges for chain instances (inclusive bounds).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRanges {
    pub p_min: f64,
    pub p_max: f64,
    pub length_min: usize,
    pub length_max: usize,
    pub horizon: usize,
}

impl Default for ChainRanges {
    fn default() -> Self {
        ChainRanges {
            p_min: 0.7,
            p_max: 0.95,
            length_min: 7,
            length_max: 14,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl ChainRanges {
    /// A degenerate range pinned to one `(p, length)` pair.
    pub fn fixed(p: f64, length: usize, horizon: usize) -> Self {
        ChainRanges {
            p_min: p,
            p_max: p,
            length_min: length,
            length_max: length,
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_min) || !(0.0..=1.0).contains(&self.p_max) || self.p_min > self.p_max {
            return Err(Error::Config(format!(
                "chain p range [{}, {}] must be an ordered sub-interval of [0, 1]",
                self.p_min, self.p_max
            )));
        }
        if self.length_min == 0 || self.length_min > self.length_max {
            return Err(Error::Config(format!(
                "chain length range [{}, {}] must be ordered and positive",
                self.length_min, self.length_max
            )));
        }
        if self.horizon < self.length_max + 1 {
            return Err(Error::Config(format!(
                "horizon {} cannot reach a chain goal at distance {}",
                self.horizon, self.length_max
            )));
        }
        Ok(())
    }
}

/// The parameters of one drawn chain instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpec {
    pub p: f64,
    /// Index of the goal state; states are `0..=length` plus a sink.
    pub length: usize,
    pub horizon: usize,
}

impl ChainSpec {
    pub fn goal(&self) -> usize {
        self.length
    }

    pub fn sink(&self) -> usize {
        self.length + 1
    }

    pub fn num_states(&self) -> usize {
        self.length + 2
    }

    /// Whether the spec lies inside the default benchmark ranges.
    pub fn in_benchmark_range(&self) -> bool {
        (0.7..=0.95).contains(&self.p) && (7..=14).contains(&self.length) && self.horizon > self.length
    }
}

/// Draws `p` and the chain length uniformly from `ranges` and builds the MDP.
pub fn make_chain(rng: &mut RngStream, ranges: &ChainRanges) -> Result<(TabularMdp, ChainSpec)> {
    ranges.validate()?;
    let p = rng.real_inclusive(ranges.p_min, ranges.p_max);
    let length = rng.int_inclusive(ranges.length_min, ranges.length_max);
    let spec = ChainSpec {
        p,
        length,
        horizon: ranges.horizon,
    };
    Ok((build_chain(&spec)?, spec))
}

/// Builds the chain MDP for a fixed spec.
pub fn build_chain(spec: &ChainSpec) -> Result<TabularMdp> {
    if !(0.0..=1.0).contains(&spec.p) || spec.length == 0 || spec.horizon == 0 {
        return Err(Error::InvalidArgument(format!("unbuildable chain spec {spec:?}")));
    }
    let (goal, sink, ns) = (spec.goal(), spec.sink(), spec.num_states());
    let horizon = spec.horizon;
    TabularMdp::from_fn(
        horizon,
        ns,
        2,
        0,
        |_, s, a| {
            let mut row = vec![0.0; ns];
            if s >= goal {
                row[sink] = 1.0;
                return row;
            }
            let right = s + 1;
            let left = s.saturating_sub(1);
            let (forward, backward) = if a == RIGHT { (right, left) } else { (left, right) };
            row[forward] += spec.p;
            row[backward] += 1.0 - spec.p;
            row
        },
        |h, s, _| if s == goal { goal_payout(h, horizon) } else { 0.0 },
    )
}

/// Sampling ranges for grid instances (inclusive hole-count bounds).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRanges {
    pub holes_min: usize,
    pub holes_max: usize,
    pub horizon: usize,
}

impl Default for GridRanges {
    fn default() -> Self {
        GridRanges {
            holes_min: 2,
            holes_max: 5,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl GridRanges {
    pub fn fixed(holes: usize, horizon: usize) -> Self {
        GridRanges {
            holes_min: holes,
            holes_max: holes,
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.holes_min > self.holes_max {
            return Err(Error::Config(format!(
                "hole range [{}, {}] is empty",
                self.holes_min, self.holes_max
            )));
        }
        if self.holes_max > MAX_GRID_HOLES {
            return Err(Error::Config(format!(
                "at most {MAX_GRID_HOLES} holes leave a feasible path on a {GRID_SIDE}x{GRID_SIDE} grid, got {}",
                self.holes_max
            )));
        }
        let shortest = 2 * (GRID_SIDE - 1);
        if self.horizon < shortest + 1 {
            return Err(Error::Config(format!(
                "horizon {} cannot reach the grid goal ({} moves away)",
                self.horizon, shortest
            )));
        }
        Ok(())
    }
}

/// The parameters of one drawn grid instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub side: usize,
    /// Sorted hole cells, indexed `row * side + col`.
    pub holes: Vec<usize>,
    pub horizon: usize,
    /// Probabilities of moving forward, and to each perpendicular side.
    pub slip: [f64; 3],
}

impl GridSpec {
    pub fn start(&self) -> usize {
        GRID_START
    }

    pub fn goal(&self) -> usize {
        GRID_GOAL
    }

    pub fn sink(&self) -> usize {
        GRID_CELLS
    }

    pub fn num_states(&self) -> usize {
        GRID_CELLS + 1
    }

    pub fn is_hole(&self, cell: usize) -> bool {
        self.holes.binary_search(&cell).is_ok()
    }

    /// Breadth-first reachability of the goal from the start over non-hole cells.
    pub fn goal_reachable(&self) -> bool {
        let mut seen = [false; GRID_CELLS];
        let mut queue = std::collections::VecDeque::from([GRID_START]);
        seen[GRID_START] = true;
        while let Some(cell) = queue.pop_front() {
            if cell == GRID_GOAL {
                return true;
            }
            for a in 0..4 {
                let next = move_cell(cell, a);
                if !seen[next] && !self.is_hole(next) {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        false
    }
}

/// Deterministic move with wall bumps.
fn move_cell(cell: usize, action: usize) -> usize {
    let (row, col) = (cell / GRID_SIDE, cell % GRID_SIDE);
    match action {
        GRID_LEFT if col > 0 => cell - 1,
        GRID_RIGHT if col + 1 < GRID_SIDE => cell + 1,
        GRID_DOWN if row + 1 < GRID_SIDE => cell + GRID_SIDE,
        GRID_UP if row > 0 => cell - GRID_SIDE,
        _ => cell,
    }
}

fn perpendicular(action: usize) -> [usize; 2] {
    match action {
        GRID_LEFT | GRID_RIGHT => [GRID_UP, GRID_DOWN],
        _ => [GRID_LEFT, GRID_RIGHT],
    }
}

/// Draws a hole count, places holes uniformly over the non-start, non-goal
/// cells (resampling placements until the goal is reachable) and builds the MDP.
pub fn make_grid(rng: &mut RngStream, ranges: &GridRanges) -> Result<(TabularMdp, GridSpec)> {
    ranges.validate()?;
    let count = rng.int_inclusive(ranges.holes_min, ranges.holes_max);
    let candidates: Vec<usize> = (0..GRID_CELLS).filter(|c| *c != GRID_START && *c != GRID_GOAL).collect();
    let spec = loop {
        let mut pool = candidates.clone();
        for i in 0..count {
            let j = i + rng.index(pool.len() - i);
            pool.swap(i, j);
        }
        let mut holes = pool[..count].to_vec();
        holes.sort_unstable();
        let spec = GridSpec {
            side: GRID_SIDE,
            holes,
            horizon: ranges.horizon,
            slip: [1.0 / 3.0; 3],
        };
        if spec.goal_reachable() {
            break spec;
        }
    };
    Ok((build_grid(&spec)?, spec))
}

/// Builds the grid MDP for a fixed spec.
pub fn build_grid(spec: &GridSpec) -> Result<TabularMdp> {
    if spec.side != GRID_SIDE {
        return Err(Error::InvalidArgument(format!("only {GRID_SIDE}x{GRID_SIDE} grids are supported")));
    }
    if spec.holes.iter().any(|&c| c >= GRID_CELLS || c == GRID_START || c == GRID_GOAL) {
        return Err(Error::InvalidArgument(format!("invalid hole set {:?}", spec.holes)));
    }
    let slip_sum: f64 = spec.slip.iter().sum();
    if spec.slip.iter().any(|p| *p < 0.0) || (slip_sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("slip vector {:?} is not a distribution", spec.slip)));
    }
    let ns = spec.num_states();
    let sink = spec.sink();
    let horizon = spec.horizon;
    TabularMdp::from_fn(
        horizon,
        ns,
        4,
        GRID_START,
        |_, s, a| {
            let mut row = vec![0.0; ns];
            if s == sink || s == GRID_GOAL || spec.is_hole(s) {
                row[sink] = 1.0;
                return row;
            }
            let [side_a, side_b] = perpendicular(a);
            row[move_cell(s, a)] += spec.slip[0];
            row[move_cell(s, side_a)] += spec.slip[1];
            row[move_cell(s, side_b)] += spec.slip[2];
            row
        },
        |h, s, _| if s == GRID_GOAL { goal_payout(h, horizon) } else { 0.0 },
    )
}
