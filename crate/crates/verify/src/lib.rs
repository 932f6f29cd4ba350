//! Shared pieces of the acceptance suite: a PASS/FAIL ledger and random
//! network generators with brute-force path enumeration.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reclogit_core::{FeatureSource, FeatureSpec, FeatureTensor, Link, LinkGraph};

/// Prints one line per criterion as it is decided and remembers failures.
#[derive(Default)]
pub struct Ledger {
    failed: Vec<usize>,
    total: usize,
}

impl Ledger {
    pub fn record(&mut self, id: usize, title: &str, pass: bool, detail: &str, started: Instant) {
        self.total += 1;
        if !pass {
            self.failed.push(id);
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} [{id:>2}] {title} — {detail} ({:.2} s)", started.elapsed().as_secs_f64());
    }

    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn total(&self) -> usize {
        self.total
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed network; acyclic networks only link lower to higher
/// node numbers.
pub fn random_network(rng: &mut impl Rng, nodes: usize, density: f64, acyclic: bool) -> LinkGraph {
    loop {
        let mut links = Vec::new();
        for tail in 0..nodes {
            for head in 0..nodes {
                if tail != head && (!acyclic || head > tail) && rng.gen_bool(density) {
                    links.push(Link { tail, head });
                }
            }
        }
        if links.len() >= 3 {
            return LinkGraph::new(nodes, links).expect("valid links");
        }
    }
}

/// Travel time in `[1, 3]`, a u-turn dummy and a constant, plus RL
/// coefficients whose `exp(h)` row sums stay below one so the value
/// function exists on cycles.
pub fn random_features(rng: &mut impl Rng, graph: &LinkGraph) -> (FeatureTensor, Vec<(&'static str, f64)>) {
    let tt: Vec<f64> = (0..graph.link_count()).map(|_| rng.gen_range(1.0..3.0)).collect();
    let f = FeatureTensor::build(
        graph,
        vec![
            FeatureSpec::new("travel_time", "min", FeatureSource::Link(tt.clone())).nonnegative(),
            FeatureSpec::new("uturn", "", FeatureSource::UTurn),
            FeatureSpec::new("constant", "", FeatureSource::Constant),
        ],
    )
    .expect("finite features")
    .with_link_attribute("travel_time", tt);
    let degree = (0..graph.link_count()).map(|k| graph.successors(k).len()).max().unwrap_or(0);
    let phi = vec![
        ("travel_time", rng.gen_range(-1.5..-0.3)),
        ("uturn", -20.0),
        ("constant", -((1 + degree) as f64).ln()),
    ];
    (f, phi)
}

/// `(origin, destination)` pairs of distinct links with the destination
/// reachable.
pub fn reachable_pairs(graph: &LinkGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in 0..graph.link_count() {
        let reach = graph.reaches(d);
        out.extend((0..graph.link_count()).filter(|&o| o != d && reach[o]).map(|o| (o, d)));
    }
    out
}

/// Simple (link-distinct) paths from `origin` to `destination`; `None` when
/// there are more than `cap`. On acyclic graphs these are all the paths.
pub fn simple_paths(graph: &LinkGraph, origin: usize, destination: usize, cap: usize) -> Option<Vec<Vec<usize>>> {
    fn walk(g: &LinkGraph, path: &mut Vec<usize>, d: usize, out: &mut Vec<Vec<usize>>, cap: usize) -> bool {
        let k = *path.last().unwrap();
        if k == d {
            out.push(path.clone());
            return out.len() <= cap;
        }
        for &a in g.successors(k) {
            if path.contains(&a) {
                continue;
            }
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

/// `Σ h` over the transitions of a path.
pub fn path_utility(graph: &LinkGraph, h: &[f64], path: &[usize]) -> f64 {
    path.windows(2).map(|w| h[graph.edge_index(w[0], w[1]).expect("feasible path")]).sum()
}
