//! The seven-node, nine-link illustrative network with its two observation
//! periods (before and after closing link 4→5).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Trajectory, TrajectorySet};
use crate::features::{FeatureSource, FeatureSpec, FeatureTensor};
use crate::network::{Link, LinkGraph};

/// `(tail, head, travel time)` in link-index order.
pub const TOY_LINKS: [(usize, usize, f64); 9] = [
    (0, 1, 0.0),
    (1, 2, 1.0),
    (2, 3, 2.0),
    (2, 4, 1.0),
    (4, 3, 1.0),
    (3, 5, 1.0),
    (4, 5, 2.0),
    (1, 5, 4.0),
    (5, 6, 0.0),
];

/// Observed path counts before the closure (paths 1–4).
pub const TOY_COUNTS_BEFORE: [usize; 4] = [19, 14, 19, 48];
/// Observed path counts after the closure; path 3 no longer exists.
pub const TOY_COUNTS_AFTER: [usize; 4] = [25, 24, 0, 51];

pub const TOY_FEATURE: &str = "travel_time";

pub struct ToyFixture {
    pub graph: LinkGraph,
    pub features: FeatureTensor,
    pub before: TrajectorySet,
    pub after_graph: LinkGraph,
    pub after_features: FeatureTensor,
    pub after: TrajectorySet,
}

pub fn toy_graph() -> LinkGraph {
    LinkGraph::new(7, TOY_LINKS.iter().map(|&(tail, head, _)| Link { tail, head }).collect())
        .expect("toy network is valid")
}

/// Link index from a `"tail-head"` label such as `"4-5"`.
pub fn toy_link(label: &str) -> usize {
    TOY_LINKS
        .iter()
        .position(|&(t, h, _)| format!("{t}-{h}") == label)
        .unwrap_or_else(|| panic!("no toy link {label}"))
}

pub fn toy_travel_times() -> Vec<f64> {
    TOY_LINKS.iter().map(|l| l.2).collect()
}

pub fn toy_feature_specs() -> Vec<FeatureSpec> {
    vec![FeatureSpec::new(TOY_FEATURE, "min", FeatureSource::Link(toy_travel_times())).nonnegative()]
}

pub fn toy_features(graph: &LinkGraph) -> FeatureTensor {
    FeatureTensor::build(graph, toy_feature_specs()).expect("toy features are valid")
}

/// Paths 1–4 as link sequences, following the link table.
pub fn toy_path(number: usize) -> Vec<usize> {
    let labels: &[&str] = match number {
        1 => &["0-1", "1-2", "2-3", "3-5", "5-6"],
        2 => &["0-1", "1-2", "2-4", "4-3", "3-5", "5-6"],
        3 => &["0-1", "1-2", "2-4", "4-5", "5-6"],
        4 => &["0-1", "1-5", "5-6"],
        _ => panic!("toy paths are numbered 1 to 4"),
    };
    labels.iter().map(|l| toy_link(l)).collect()
}

fn expand(counts: &[usize; 4], prefix: &str) -> TrajectorySet {
    let mut out = Vec::new();
    for (p, &c) in counts.iter().enumerate() {
        for i in 0..c {
            out.push(Trajectory::new(format!("{prefix}-p{}-{i}", p + 1), toy_path(p + 1)));
        }
    }
    TrajectorySet::new(out)
}

pub fn toy_fixture() -> ToyFixture {
    let graph = toy_graph();
    let features = toy_features(&graph);
    let after_graph = graph.remove_link(toy_link("4-5")).expect("valid link");
    let after_features = toy_features(&after_graph);
    ToyFixture {
        before: expand(&TOY_COUNTS_BEFORE, "before"),
        after: expand(&TOY_COUNTS_AFTER, "after"),
        graph,
        features,
        after_graph,
        after_features,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_counts_and_paths() {
        let fx = toy_fixture();
        assert_eq!(fx.before.len(), 100);
        assert_eq!(fx.after.len(), 100);
        fx.before.validate(&fx.graph).unwrap();
        fx.after.validate(&fx.after_graph).unwrap();
        let tt = toy_travel_times();
        let p1: f64 = toy_path(1)[1..].iter().map(|&l| tt[l]).sum();
        assert_eq!(p1, 4.0);
        for p in 1..=4 {
            let total: f64 = toy_path(p)[1..].iter().map(|&l| tt[l]).sum();
            assert_eq!(total, 4.0);
        }
        let l45 = toy_link("4-5");
        assert!(fx.after_graph.predecessors(l45).is_empty());
        assert!(fx.after_graph.successors(l45).is_empty());
    }
}
