//! Instance generators. Every random generator is driven by a ChaCha stream
//! seeded from a `u64`, so a seed pins the instance bit for bit.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::{
    linear_interpolation_weights, representative_states, AggregationArchitecture, SparseRow,
};
use crate::error::{Error, Result};
use crate::mdp::{Action, DiscountedMdp, Transition};

/// The two-state counterexample: states 1 and 2 are absorbing with self-loop
/// costs 0 and 1. Aggregate state `x1` disaggregates onto state 1 and `x2`
/// onto state 2, while the aggregation probabilities cross over:
/// `phi(1,x1) = delta`, `phi(1,x2) = 1 - delta`, `phi(2,x2) = delta`,
/// `phi(2,x1) = 1 - delta`. With `delta = 0` the support condition fails.
pub fn counterexample(alpha: f64, delta: f64) -> Result<(DiscountedMdp, AggregationArchitecture)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    let mdp = DiscountedMdp::new(
        alpha,
        vec![
            vec![Action::new("stay", vec![Transition::new(0, 1.0, 0.0)])],
            vec![Action::new("stay", vec![Transition::new(1, 1.0, 1.0)])],
        ],
    )?;
    let row = |own: usize, other: usize| -> SparseRow {
        [(own, delta), (other, 1.0 - delta)]
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .collect()
    };
    let arch = AggregationArchitecture::new(
        2,
        vec!["x1".into(), "x2".into()],
        vec![vec![(0, 1.0)], vec![(1, 1.0)]],
        vec![row(0, 1), row(1, 0)],
    )?;
    Ok((mdp, arch))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomMdpSpec {
    pub n: usize,
    pub actions_per_state: usize,
    /// Distinct successors per (state, action).
    pub branching: usize,
    pub cost_range: (f64, f64),
    pub alpha: f64,
    pub seed: u64,
}

/// Positive uniforms in `(0, 1]`, normalized.
fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

fn random_support(rng: &mut ChaCha8Rng, universe: usize, size: usize) -> Vec<usize> {
    let mut picked = sample(rng, universe, size).into_vec();
    picked.sort_unstable();
    picked
}

pub fn random_mdp(spec: &RandomMdpSpec) -> Result<DiscountedMdp> {
    let RandomMdpSpec {
        n,
        actions_per_state,
        branching,
        cost_range: (lo, hi),
        alpha,
        seed,
    } = *spec;
    if n == 0 || actions_per_state == 0 {
        return Err(Error::InvalidParameter(
            "need at least one state and one action per state".into(),
        ));
    }
    if branching == 0 || branching > n {
        return Err(Error::InvalidParameter(format!(
            "branching must lie in 1..={n}, got {branching}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "bad cost range [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..n)
        .map(|_| {
            (0..actions_per_state)
                .map(|u| {
                    let successors = random_support(&mut rng, n, branching);
                    let probs = random_distribution(&mut rng, branching);
                    let transitions = successors
                        .into_iter()
                        .zip(probs)
                        .map(|(j, p)| {
                            let cost = if lo < hi { rng.gen_range(lo..hi) } else { lo };
                            Transition::new(j, p, cost)
                        })
                        .collect();
                    Action::new(format!("a{}", u + 1), transitions)
                })
                .collect()
        })
        .collect();
    DiscountedMdp::new(alpha, states)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomAggregationSpec {
    pub n: usize,
    pub num_aggregate: usize,
    pub seed: u64,
    /// Build `D` supports inside the footprints so that `d_xi > 0` implies
    /// `phi_ix > 0`.
    pub enforce_condition: bool,
    /// Extra aggregate states (beyond the primary one) each original state
    /// may spread onto.
    pub max_overlap: usize,
}

/// Random architecture with every footprint nonempty.
pub fn random_aggregation(spec: &RandomAggregationSpec) -> Result<AggregationArchitecture> {
    let RandomAggregationSpec {
        n,
        num_aggregate,
        seed,
        enforce_condition,
        max_overlap,
    } = *spec;
    if num_aggregate == 0 || num_aggregate > n {
        return Err(Error::InvalidParameter(format!(
            "num_aggregate must lie in 1..={n}, got {num_aggregate}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // The first num_aggregate states of a random permutation seed the
    // footprints so none is empty.
    let order = sample(&mut rng, n, n).into_vec();
    let mut primary = vec![0; n];
    for (k, &j) in order.iter().enumerate() {
        primary[j] = if k < num_aggregate {
            k
        } else {
            rng.gen_range(0..num_aggregate)
        };
    }

    let mut footprints = vec![Vec::new(); num_aggregate];
    let mut aggregation = Vec::with_capacity(n);
    for (j, &own) in primary.iter().enumerate() {
        let extra = rng.gen_range(0..=max_overlap.min(num_aggregate - 1));
        let mut members = vec![own];
        while members.len() < extra + 1 {
            let y = rng.gen_range(0..num_aggregate);
            if !members.contains(&y) {
                members.push(y);
            }
        }
        members.sort_unstable();
        let weights = random_distribution(&mut rng, members.len());
        for &y in &members {
            footprints[y].push(j);
        }
        aggregation.push(members.into_iter().zip(weights).collect());
    }

    let disaggregation = footprints
        .iter()
        .map(|footprint| {
            let pool: Vec<usize> = if enforce_condition {
                footprint.clone()
            } else {
                (0..n).collect()
            };
            let size = rng.gen_range(1..=pool.len().min(3));
            let support: Vec<usize> = random_support(&mut rng, pool.len(), size)
                .into_iter()
                .map(|k| pool[k])
                .collect();
            let weights = random_distribution(&mut rng, size);
            let mut row: SparseRow = support.into_iter().zip(weights).collect();
            row.sort_by_key(|&(i, _)| i);
            row
        })
        .collect();

    let labels = (1..=num_aggregate).map(|k| format!("x{k}")).collect();
    AggregationArchitecture::new(n, labels, disaggregation, aggregation)
}

/// One randomized (MDP, architecture) pair of the kind used by the bound
/// suite: up to `max_n` states, up to 3 actions, discount in `[0.5, 0.95]`.
pub fn random_instance(
    seed: u64,
    max_n: usize,
    enforce_condition: bool,
) -> Result<(DiscountedMdp, AggregationArchitecture)> {
    if max_n == 0 {
        return Err(Error::InvalidParameter("max_n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let mdp_spec = RandomMdpSpec {
        n,
        actions_per_state: rng.gen_range(1..=3),
        branching: rng.gen_range(1..=n.min(4)),
        cost_range: (0.0, 10.0),
        alpha: rng.gen_range(0.5..=0.95),
        seed: rng.gen(),
    };
    let agg_spec = RandomAggregationSpec {
        n,
        num_aggregate: rng.gen_range(1..=n),
        seed: rng.gen(),
        enforce_condition,
        max_overlap: rng.gen_range(0..=2),
    };
    Ok((random_mdp(&mdp_spec)?, random_aggregation(&agg_spec)?))
}

const MOVES: [(&str, isize, isize); 4] = [
    ("up", 0, -1),
    ("down", 0, 1),
    ("left", -1, 0),
    ("right", 1, 0),
];

/// Grid navigation: cells are indexed `row * width + col`. Each step costs 1;
/// the intended move succeeds with probability `1 - noise`, otherwise one of
/// the other three moves happens uniformly. Moving off the grid stays put.
/// The target cell is absorbing at zero cost.
pub fn gridworld(
    width: usize,
    height: usize,
    alpha: f64,
    noise: f64,
    target: (usize, usize),
) -> Result<DiscountedMdp> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(
            "grid must have at least one cell".into(),
        ));
    }
    if !(0.0..1.0).contains(&noise) {
        return Err(Error::InvalidParameter(format!(
            "noise must lie in [0, 1), got {noise}"
        )));
    }
    if target.0 >= width || target.1 >= height {
        return Err(Error::InvalidParameter(format!(
            "target {target:?} outside a {width}x{height} grid"
        )));
    }
    let step = |cell: usize, (dx, dy): (isize, isize)| -> usize {
        let (col, row) = ((cell % width) as isize, (cell / width) as isize);
        let (c, r) = (col + dx, row + dy);
        if c < 0 || r < 0 || c >= width as isize || r >= height as isize {
            cell
        } else {
            r as usize * width + c as usize
        }
    };
    let goal = target.1 * width + target.0;
    let states = (0..width * height)
        .map(|cell| {
            if cell == goal {
                return vec![Action::new("stay", vec![Transition::new(cell, 1.0, 0.0)])];
            }
            MOVES
                .iter()
                .enumerate()
                .map(|(k, &(label, _, _))| {
                    let mut transitions: Vec<Transition> = Vec::new();
                    for (m, &(_, mx, my)) in MOVES.iter().enumerate() {
                        let p = if m == k { 1.0 - noise } else { noise / 3.0 };
                        if p == 0.0 {
                            continue;
                        }
                        let next = step(cell, (mx, my));
                        match transitions.iter_mut().find(|t| t.next == next) {
                            Some(t) => t.prob += p,
                            None => transitions.push(Transition::new(next, p, 1.0)),
                        }
                    }
                    transitions.sort_by_key(|t| t.next);
                    Action::new(label, transitions)
                })
                .collect()
        })
        .collect();
    DiscountedMdp::new(alpha, states)
}

/// Coarse-grid representative states on a `width x height` grid: every
/// `spacing`-th column and row (plus the last one) is a representative, and
/// the remaining cells interpolate bilinearly between them.
pub fn coarse_grid_aggregation(
    width: usize,
    height: usize,
    spacing: usize,
) -> Result<AggregationArchitecture> {
    if spacing == 0 {
        return Err(Error::InvalidParameter("spacing must be positive".into()));
    }
    let marks = |len: usize| -> Vec<usize> {
        let mut m: Vec<usize> = (0..len).step_by(spacing).collect();
        if *m.last().unwrap() != len - 1 {
            m.push(len - 1);
        }
        m
    };
    let (cols, rows) = (marks(width), marks(height));
    let col_w = linear_interpolation_weights(width, &cols);
    let row_w = linear_interpolation_weights(height, &rows);
    let reps: Vec<usize> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| r * width + c))
        .collect();
    let weights: Vec<Vec<f64>> = (0..width * height)
        .map(|cell| {
            let (c, r) = (cell % width, cell / width);
            row_w[r]
                .iter()
                .flat_map(|&wr| col_w[c].iter().map(move |&wc| wr * wc))
                .collect()
        })
        .collect();
    representative_states(&reps, &weights)
}

/// Declarative description of an instance, as accepted on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Counterexample {
        alpha: f64,
        delta: f64,
    },
    Random {
        seed: u64,
        n: usize,
        actions_per_state: usize,
        branching: usize,
        cost_range: (f64, f64),
        alpha: f64,
        num_aggregate: usize,
        #[serde(default = "default_true")]
        enforce_condition: bool,
        #[serde(default = "default_overlap")]
        max_overlap: usize,
    },
    Gridworld {
        width: usize,
        height: usize,
        alpha: f64,
        noise: f64,
        /// 1-based `(column, row)` of the target cell.
        target: (usize, usize),
        /// Representative spacing for a coarse-grid architecture.
        #[serde(default)]
        spacing: Option<usize>,
    },
}

fn default_true() -> bool {
    true
}

fn default_overlap() -> usize {
    1
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<(DiscountedMdp, Option<AggregationArchitecture>)> {
        match *self {
            GeneratorSpec::Counterexample { alpha, delta } => {
                let (mdp, arch) = counterexample(alpha, delta)?;
                Ok((mdp, Some(arch)))
            }
            GeneratorSpec::Random {
                seed,
                n,
                actions_per_state,
                branching,
                cost_range,
                alpha,
                num_aggregate,
                enforce_condition,
                max_overlap,
            } => {
                let mdp = random_mdp(&RandomMdpSpec {
                    n,
                    actions_per_state,
                    branching,
                    cost_range,
                    alpha,
                    seed,
                })?;
                let arch = random_aggregation(&RandomAggregationSpec {
                    n,
                    num_aggregate,
                    // decorrelate from the MDP stream
                    seed: seed ^ 0x9e37_79b9_7f4a_7c15,
                    enforce_condition,
                    max_overlap,
                })?;
                Ok((mdp, Some(arch)))
            }
            GeneratorSpec::Gridworld {
                width,
                height,
                alpha,
                noise,
                target,
                spacing,
            } => {
                if target.0 == 0 || target.1 == 0 {
                    return Err(Error::InvalidParameter(
                        "target coordinates are 1-based".into(),
                    ));
                }
                let mdp = gridworld(width, height, alpha, noise, (target.0 - 1, target.1 - 1))?;
                let arch = spacing
                    .map(|s| coarse_grid_aggregation(width, height, s))
                    .transpose()?;
                Ok((mdp, arch))
            }
        }
    }
}
