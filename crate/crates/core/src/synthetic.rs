//! Synthetic grid networks and trajectories drawn from a known RL model.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Trajectory, TrajectorySet};
use crate::features::{FeatureSource, FeatureSpec, FeatureTensor};
use crate::model::{systematic_utility, ModelKind, ModelParams};
use crate::network::{Link, LinkGraph};
use crate::solver::{choice_probabilities, ChoiceMatrix, SharedSystem};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    pub trajectories: usize,
    /// Number of distinct destination links the trajectories end at.
    pub destinations: usize,
    pub seed: u64,
    /// Ground-truth coefficients for `travel_time`, `right_turn`,
    /// `link_constant` and `uturn`.
    pub truth: [f64; 4],
}

impl Default for GridConfig {
    /// An 18×19 grid: 1294 directed links.
    fn default() -> Self {
        Self { rows: 18, cols: 19, trajectories: 10_000, destinations: 64, seed: 42, truth: [-1.5, -0.5, -0.3, -20.0] }
    }
}

pub struct SyntheticDataset {
    pub graph: LinkGraph,
    pub features: FeatureTensor,
    pub truth: ModelParams,
    pub trajectories: TrajectorySet,
    /// `(row, col)` of every node.
    pub coordinates: Vec<(usize, usize)>,
}

pub const GRID_FEATURES: [&str; 4] = ["travel_time", "right_turn", "link_constant", "uturn"];

/// Bidirectional grid; node `r * cols + c`.
pub fn grid_network(rows: usize, cols: usize) -> Result<(LinkGraph, Vec<(usize, usize)>)> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(Error::InvalidConfig(format!("grid {rows}x{cols} has no links")));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut links = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                links.push(Link { tail: id(r, c), head: id(r, c + 1) });
                links.push(Link { tail: id(r, c + 1), head: id(r, c) });
            }
            if r + 1 < rows {
                links.push(Link { tail: id(r, c), head: id(r + 1, c) });
                links.push(Link { tail: id(r + 1, c), head: id(r, c) });
            }
        }
    }
    let coords = (0..rows * cols).map(|v| (v / cols, v % cols)).collect();
    Ok((LinkGraph::new(rows * cols, links)?, coords))
}

/// Right-turn dummies for a grid with rows growing upward.
pub fn right_turns(graph: &LinkGraph, coords: &[(usize, usize)]) -> Vec<(usize, usize, f64)> {
    let dir = |l: Link| {
        let (r0, c0) = coords[l.tail];
        let (r1, c1) = coords[l.head];
        (c1 as i64 - c0 as i64, r1 as i64 - r0 as i64)
    };
    graph
        .edges()
        .filter_map(|(k, a)| {
            let (x1, y1) = dir(graph.link(k));
            let (x2, y2) = dir(graph.link(a));
            (x1 * y2 - y1 * x2 < 0).then_some((k, a, 1.0))
        })
        .collect()
}

/// Samples one route from `origin` following `cm`; `None` if it exceeds
/// `max_steps`.
pub fn sample_route(
    graph: &LinkGraph,
    cm: &ChoiceMatrix,
    origin: usize,
    max_steps: usize,
    rng: &mut impl Rng,
) -> Option<Vec<usize>> {
    let mut route = vec![origin];
    let mut k = origin;
    while k != cm.destination {
        if route.len() > max_steps {
            return None;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = None;
        for (a, p) in cm.row(graph, k) {
            if p > 0.0 {
                acc += p;
                next = Some(a);
                if u < acc {
                    break;
                }
            }
        }
        k = next?;
        route.push(k);
    }
    Some(route)
}

pub fn synthetic_grid(config: &GridConfig) -> Result<SyntheticDataset> {
    let (graph, coords) = grid_network(config.rows, config.cols)?;
    let n = graph.link_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let tt: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..3.0)).collect();
    let specs = vec![
        FeatureSpec::new(GRID_FEATURES[0], "min", FeatureSource::Link(tt)).nonnegative(),
        FeatureSpec::new(GRID_FEATURES[1], "dummy", FeatureSource::Transition(right_turns(&graph, &coords))),
        FeatureSpec::new(GRID_FEATURES[2], "count", FeatureSource::Constant),
        FeatureSpec::new(GRID_FEATURES[3], "dummy", FeatureSource::UTurn),
    ];
    let features = FeatureTensor::build(&graph, specs)?;
    let pairs: Vec<(&str, f64)> = GRID_FEATURES.iter().copied().zip(config.truth).collect();
    let truth = ModelParams::new(ModelKind::Rl, &pairs).freeze("uturn");
    let h = systematic_utility(&features, &truth)?;
    let sys = SharedSystem::new(&graph, &h, 1.0)?;

    let mut links: Vec<usize> = (0..n).collect();
    links.shuffle(&mut rng);
    let dests: Vec<usize> = links.into_iter().take(config.destinations.clamp(1, n)).collect();
    let cms = dests
        .iter()
        .map(|&d| choice_probabilities(&graph, &sys.solve(d)?.value, &h))
        .collect::<Result<Vec<_>>>()?;
    let max_steps = 4 * n;
    let mut out = Vec::with_capacity(config.trajectories);
    while out.len() < config.trajectories {
        let di = rng.gen_range(0..dests.len());
        let origin = rng.gen_range(0..n);
        if origin == dests[di] {
            continue;
        }
        if let Some(route) = sample_route(&graph, &cms[di], origin, max_steps, &mut rng) {
            out.push(Trajectory::new(format!("t{}", out.len()), route));
        }
    }
    Ok(SyntheticDataset { graph, features, truth, trajectories: TrajectorySet::new(out), coordinates: coords })
}
