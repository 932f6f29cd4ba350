//! Random networks and a brute-force path enumerator shared by the
//! integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reclogit_core::{FeatureSource, FeatureSpec, FeatureTensor, Link, LinkGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed network on `nodes` nodes. Acyclic networks only have
/// links from lower to higher node numbers.
pub fn random_network(rng: &mut impl Rng, nodes: usize, density: f64, acyclic: bool) -> LinkGraph {
    loop {
        let mut links = Vec::new();
        for t in 0..nodes {
            for h in 0..nodes {
                if t == h || (acyclic && h < t) {
                    continue;
                }
                if rng.gen_bool(density) {
                    links.push(Link { tail: t, head: h });
                }
            }
        }
        if links.len() >= 3 {
            return LinkGraph::new(nodes, links).expect("valid links");
        }
    }
}

/// Travel-time feature uniform in `[1, 3]` plus a u-turn dummy.
pub fn random_features(rng: &mut impl Rng, graph: &LinkGraph) -> FeatureTensor {
    let tt: Vec<f64> = (0..graph.link_count()).map(|_| rng.gen_range(1.0..3.0)).collect();
    FeatureTensor::build(
        graph,
        vec![
            FeatureSpec::new("travel_time", "min", FeatureSource::Link(tt)).nonnegative(),
            FeatureSpec::new("uturn", "", FeatureSource::UTurn),
        ],
    )
    .expect("finite features")
}

/// All link sequences from `origin` to `destination` in an acyclic graph, or
/// `None` when there are more than `cap`.
pub fn enumerate_paths(graph: &LinkGraph, origin: usize, destination: usize, cap: usize) -> Option<Vec<Vec<usize>>> {
    fn walk(
        g: &LinkGraph,
        path: &mut Vec<usize>,
        d: usize,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        let k = *path.last().unwrap();
        if k == d {
            out.push(path.clone());
            return out.len() <= cap;
        }
        for &a in g.successors(k) {
            path.push(a);
            let ok = walk(g, path, d, out, cap);
            path.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut out = Vec::new();
    walk(graph, &mut vec![origin], destination, &mut out, cap).then_some(out)
}

/// Simple (link-distinct) paths, for cyclic graphs.
pub fn simple_paths(graph: &LinkGraph, origin: usize, destination: usize, cap: usize) -> Vec<Vec<usize>> {
    fn walk(g: &LinkGraph, path: &mut Vec<usize>, d: usize, out: &mut Vec<Vec<usize>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        let k = *path.last().unwrap();
        if k == d {
            out.push(path.clone());
            return;
        }
        for &a in g.successors(k) {
            if !path.contains(&a) {
                path.push(a);
                walk(g, path, d, out, cap);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(graph, &mut vec![origin], destination, &mut out, cap);
    out
}

/// `Σ h` along a path.
pub fn path_utility(graph: &LinkGraph, h: &[f64], path: &[usize]) -> f64 {
    path.windows(2).map(|w| h[graph.edge_index(w[0], w[1]).expect("feasible path")]).sum()
}
