//! Value-function, choice and flow invariants on random networks.

mod common;

use common::{enumerate_paths, path_utility, random_features, random_network, rng, simple_paths};
use proptest::prelude::*;
use reclogit_core::model::systematic_utility;
use reclogit_core::solver::{choice_probabilities, expected_link_flow, path_log_probability, solve_value};
use reclogit_core::{Error, LinkGraph, ModelKind, ModelParams};

fn utilities(graph: &LinkGraph, seed: u64, beta: f64) -> Vec<f64> {
    utilities_shifted(graph, seed, beta, stable_shift(graph))
}

/// `−ln(1 + max out-degree)`: keeps every row sum of exp(h) below one, so
/// the value function exists on cyclic networks too.
fn stable_shift(graph: &LinkGraph) -> f64 {
    let degree = (0..graph.link_count()).map(|k| graph.successors(k).len()).max().unwrap_or(0);
    -((1 + degree) as f64).ln()
}

fn utilities_shifted(graph: &LinkGraph, seed: u64, beta: f64, shift: f64) -> Vec<f64> {
    let f = random_features(&mut rng(seed ^ 0x9e37), graph);
    let p = ModelParams::new(ModelKind::Rl, &[("travel_time", beta), ("uturn", -20.0)]);
    systematic_utility(&f, &p).unwrap().into_iter().map(|x| x + shift).collect()
}

/// `(origin, destination)` pairs with the destination reachable from the
/// origin, origin ≠ destination.
fn od_pairs(graph: &LinkGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in 0..graph.link_count() {
        let reach = graph.reaches(d);
        for o in 0..graph.link_count() {
            if o != d && reach[o] {
                out.push((o, d));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bellman_residual_is_tiny(seed in any::<u64>(), nodes in 4usize..9, acyclic in any::<bool>(),
                                beta in -2.0f64..-0.3, mu in 0.5f64..2.0) {
        let g = random_network(&mut rng(seed), nodes, 0.35, acyclic);
        let h = utilities(&g, seed, beta);
        for d in 0..g.link_count() {
            let value = solve_value(&g, &h, mu, d).unwrap();
            prop_assert!(value.bellman_residual(&g, &h) < 1e-8);
        }
    }

    #[test]
    fn flows_are_conserved(seed in any::<u64>(), nodes in 4usize..9, acyclic in any::<bool>(),
                           beta in -2.0f64..-0.3) {
        let g = random_network(&mut rng(seed), nodes, 0.35, acyclic);
        let h = utilities(&g, seed, beta);
        for (o, d) in od_pairs(&g).into_iter().take(12) {
            let value = solve_value(&g, &h, 1.0, d).unwrap();
            let cm = choice_probabilities(&g, &value, &h).unwrap();
            let f = expected_link_flow(&g, &cm, o).unwrap();
            prop_assert!((f.destination_inflow() - 1.0).abs() < 1e-8);
            for a in 0..g.link_count() {
                let inflow: f64 = g.incoming(a).map(|(k, e)| cm.p[e] * f.flow[k]).sum();
                let demand = if a == o { 1.0 } else { 0.0 };
                prop_assert!((f.flow[a] - inflow - demand).abs() < 1e-8, "link {}", a);
            }
        }
    }

    #[test]
    fn acyclic_probabilities_match_path_enumeration(seed in any::<u64>(), nodes in 4usize..8,
                                                    beta in -2.0f64..-0.3, mu in 0.5f64..2.0) {
        let g = random_network(&mut rng(seed), nodes, 0.4, true);
        let h = utilities(&g, seed, beta);
        for (o, d) in od_pairs(&g) {
            let Some(paths) = enumerate_paths(&g, o, d, 100) else { continue };
            let value = solve_value(&g, &h, mu, d).unwrap();
            let cm = choice_probabilities(&g, &value, &h).unwrap();
            let u: Vec<f64> = paths.iter().map(|p| path_utility(&g, &h, p) / mu).collect();
            let m = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let denom: f64 = u.iter().map(|x| (x - m).exp()).sum();
            let mut total = 0.0;
            for (p, ui) in paths.iter().zip(&u) {
                let expected = (ui - m).exp() / denom;
                let got = path_log_probability(&g, p, &cm).unwrap().exp();
                prop_assert!((got - expected).abs() < 1e-10, "{} vs {}", got, expected);
                total += got;
            }
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn independence_of_irrelevant_alternatives(seed in any::<u64>(), nodes in 4usize..8,
                                               acyclic in any::<bool>(), beta in -2.0f64..-0.3) {
        let mut r = rng(seed);
        let g = random_network(&mut r, nodes, 0.4, acyclic);
        let h = utilities(&g, seed, beta);
        for (o, d) in od_pairs(&g).into_iter().take(6) {
            let paths = simple_paths(&g, o, d, 30);
            if paths.len() < 2 {
                continue;
            }
            let (pa, pb) = (&paths[0], &paths[paths.len() - 1]);
            let value = solve_value(&g, &h, 1.0, d).unwrap();
            let cm = choice_probabilities(&g, &value, &h).unwrap();
            let diff = path_log_probability(&g, pa, &cm).unwrap() - path_log_probability(&g, pb, &cm).unwrap();
            let udiff = path_utility(&g, &h, pa) - path_utility(&g, &h, pb);
            prop_assert!((diff - udiff).abs() < 1e-9);

            // Close a link on neither path: the ratio must not move.
            let Some(x) = (0..g.link_count()).find(|l| !pa.contains(l) && !pb.contains(l)) else { continue };
            let g2 = g.remove_link(x).unwrap();
            let h2 = utilities_shifted(&g2, seed, beta, stable_shift(&g));
            let v2 = solve_value(&g2, &h2, 1.0, d).unwrap();
            let cm2 = choice_probabilities(&g2, &v2, &h2).unwrap();
            let diff2 = path_log_probability(&g2, pa, &cm2).unwrap() - path_log_probability(&g2, pb, &cm2).unwrap();
            prop_assert!((diff2 - diff).abs() < 1e-9, "{} vs {}", diff2, diff);
        }
    }
}

#[test]
fn attractive_cycle_has_no_value_function() {
    // 0 → 1 ⇄ 2 → 3 with a rewarding loop between links 1 and 2.
    let g = LinkGraph::from_pairs(&[(0, 1), (1, 2), (2, 1), (2, 3)]).unwrap();
    let h = vec![0.5; g.edge_count()];
    let err = solve_value(&g, &h, 1.0, 3).unwrap_err();
    assert!(matches!(err, Error::ValueUndefined { destination: 3, .. }), "{err}");
}
