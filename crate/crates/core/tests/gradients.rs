//! Analytic loss gradients against central differences on random cyclic
//! networks, for every model kind.

mod common;

use common::{random_network, rng};
use rand::seq::SliceRandom;
use rand::Rng;
use reclogit_core::evaluator::{evaluate, finite_difference_gradient, flatten, Predictor, Scenario};
use reclogit_core::synthetic::sample_route;
use reclogit_core::{
    FeatureSource, FeatureSpec, FeatureTensor, ModelKind, ModelParams, Trajectory, TrajectorySet,
};

const REL_STEP: f64 = 1e-4;

/// A random network with trajectories sampled from an RL model. With
/// `link_size` the features carry an OD-specific link-size column.
fn scenario(seed: u64, link_size: bool) -> (Scenario, Vec<(&'static str, f64)>) {
    let mut r = rng(seed);
    let nodes = r.gen_range(5..8);
    let g = random_network(&mut r, nodes, 0.4, false);
    let tt: Vec<f64> = (0..g.link_count()).map(|_| r.gen_range(1.0..3.0)).collect();
    let length: Vec<f64> = (0..g.link_count()).map(|_| r.gen_range(0.2..1.0)).collect();
    let mut specs = vec![
        FeatureSpec::new("travel_time", "min", FeatureSource::Link(tt.clone())),
        FeatureSpec::new("uturn", "", FeatureSource::UTurn),
        FeatureSpec::new("constant", "", FeatureSource::Constant),
    ];
    let degree = (0..g.link_count()).map(|k| g.successors(k).len()).max().unwrap();
    let mut phi = vec![("travel_time", -1.0), ("uturn", -3.0), ("constant", -((1 + degree) as f64).ln())];
    if link_size {
        specs.push(FeatureSpec::new("link_size", "", FeatureSource::LinkSize));
        phi.push(("link_size", -0.5));
    }
    let f = FeatureTensor::build(&g, specs)
        .unwrap()
        .with_link_attribute("travel_time", tt)
        .with_link_attribute("length", length);

    let truth = ModelParams::new(ModelKind::Rl, &phi);
    let mut probe = Scenario::new("probe", g.clone(), f.clone(), TrajectorySet::default()).unwrap();
    if link_size {
        probe = probe.with_link_size(&truth).unwrap();
    }
    let pred = Predictor::new(&probe, &truth).unwrap();
    let mut trajs = Vec::new();
    let mut attempts = 0;
    while trajs.len() < 40 && attempts < 2000 {
        attempts += 1;
        let (o, d) = (r.gen_range(0..g.link_count()), r.gen_range(0..g.link_count()));
        if o == d || !g.reaches(d)[o] {
            continue;
        }
        let cm = pred.choice(o, d).unwrap();
        if let Some(route) = sample_route(&g, &cm, o, 50, &mut r) {
            trajs.push(Trajectory::new(format!("t{}", trajs.len()), route));
        }
    }
    assert!(trajs.len() >= 10, "too few routes on seed {seed}");
    let mut scn = Scenario::new("s", g, f, TrajectorySet::new(trajs)).unwrap();
    if link_size {
        scn = scn.with_link_size(&truth).unwrap();
    }
    (scn, phi)
}

fn params(kind: ModelKind, phi: &[(&str, f64)], layers: usize, n: usize, r: &mut impl Rng) -> ModelParams {
    let jittered: Vec<(&str, f64)> = phi.iter().map(|&(k, v)| (k, v + r.gen_range(-0.2..0.2))).collect();
    let mut p = ModelParams::new(kind, &jittered);
    match kind {
        ModelKind::Nrl => p = p.with_nrl(&[("travel_time", r.gen_range(-0.2..0.2)), ("length", r.gen_range(-0.3..0.3))]),
        ModelKind::ResRl | ModelKind::ResDgcnRl => {
            p = p.with_zero_layers(layers, n);
            for t in &mut p.theta {
                for x in t.as_mut_slice() {
                    *x = r.gen_range(-0.4..0.4);
                }
            }
            (p.alpha, p.beta, p.gamma) = (r.gen_range(0.5..1.5), r.gen_range(0.5..1.5), r.gen_range(0.5..1.5));
        }
        _ => {}
    }
    p
}

fn check(scn: &Scenario, p: &ModelParams, lambda: f64, r: &mut impl Rng) -> usize {
    let scenarios = core::slice::from_ref(scn);
    let analytic = evaluate(scenarios, p, lambda, None, true).unwrap().gradient.unwrap().to_flat(p.kind);
    let mut coords: Vec<usize> = (0..flatten(p).len()).collect();
    coords.shuffle(r);
    coords.truncate(40);
    let fd = finite_difference_gradient(scenarios, p, lambda, REL_STEP, Some(&coords)).unwrap();
    for &(i, d) in &fd {
        let a = analytic[i];
        let tol = (1e-5 * a.abs().max(d.abs())).max(1e-8);
        assert!((a - d).abs() <= tol, "{} λ={lambda} coord {i}: analytic {a} fd {d}", p.kind.name());
    }
    fd.len()
}

#[test]
fn every_model_matches_finite_differences() {
    let mut checked = 0;
    for seed in 0..4 {
        let (scn, phi) = scenario(seed, false);
        let n = scn.graph.link_count();
        let mut r = rng(seed + 31);
        for kind in [ModelKind::Rl, ModelKind::Nrl, ModelKind::ResRl, ModelKind::ResDgcnRl] {
            for layers in [1, 2] {
                if !kind.has_residual() && layers == 2 {
                    continue;
                }
                for lambda in [0.0, 0.5, 1.0] {
                    let p = params(kind, &phi, layers, n, &mut r);
                    checked += check(&scn, &p, lambda, &mut r);
                }
            }
        }
    }
    assert!(checked > 300);
}

#[test]
fn link_size_models_match_finite_differences() {
    for seed in 10..14 {
        let (scn, phi) = scenario(seed, true);
        let mut r = rng(seed);
        let p = params(ModelKind::LsRl, &phi, 0, 0, &mut r);
        check(&scn, &p, 0.0, &mut r);
        // NRL with the link size in its scale as well.
        let mut nrl = params(ModelKind::Nrl, &phi, 0, 0, &mut r);
        nrl.nrl_names.push("link_size".into());
        nrl.nrl_gamma.push(0.1);
        check(&scn, &nrl, 0.0, &mut r);
    }
}
