//! ACP, JSD and BLEU-4 over held-out trajectories.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::Trajectory;
use crate::evaluator::{Predictor, Scenario};
use crate::math::{exp, ln, log2};
use crate::model::ModelParams;
use crate::solver::{default_max_steps, most_probable_route, ChoiceMatrix};
use crate::{Error, Result};

/// How the empirical next-link distribution is pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JsdGrouping {
    /// By predecessor link, over all destinations.
    #[default]
    Predecessor,
    /// By predecessor link and destination.
    PredecessorDestination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMetrics {
    pub id: String,
    pub ll: f64,
    pub probability: f64,
    /// `None` for single-link trajectories (no steps).
    pub jsd: Option<f64>,
    pub bleu: f64,
    /// False when the greedy route hit the step cap.
    pub route_complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub ll: f64,
    pub acp: f64,
    pub jsd: f64,
    pub bleu: f64,
    pub n_trajectories: usize,
    pub route_failures: usize,
    pub per_trajectory: Option<Vec<TrajectoryMetrics>>,
}

/// Jensen–Shannon divergence in bits between two distributions on the same
/// support.
pub fn jsd_pair(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            total += 0.5 * a * log2(a / m);
        }
        if b > 0.0 {
            total += 0.5 * b * log2(b / m);
        }
    }
    total.max(0.0)
}

fn ngram_counts(seq: &[usize], n: usize) -> BTreeMap<&[usize], usize> {
    let mut m = BTreeMap::new();
    for w in seq.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Sentence-level BLEU-4 with uniform weights and brevity penalty. Orders
/// above the length of either sequence are dropped and the remaining
/// weights renormalised.
pub fn bleu4(hypothesis: &[usize], reference: &[usize]) -> f64 {
    let max_n = 4.min(hypothesis.len()).min(reference.len());
    if max_n == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let hyp = ngram_counts(hypothesis, n);
        let refc = ngram_counts(reference, n);
        let matched: usize = hyp.iter().map(|(g, &c)| c.min(*refc.get(g).unwrap_or(&0))).sum();
        let total = hypothesis.len() + 1 - n;
        if matched == 0 {
            return 0.0;
        }
        log_sum += ln(matched as f64 / total as f64) / max_n as f64;
    }
    let (h, r) = (hypothesis.len() as f64, reference.len() as f64);
    let bp = if h > r { 1.0 } else { exp(1.0 - r / h) };
    bp * exp(log_sum)
}

/// Observed next-link counts per grouping key.
fn empirical(trajs: &[&Trajectory], grouping: JsdGrouping) -> BTreeMap<(usize, usize), BTreeMap<usize, f64>> {
    let mut m: BTreeMap<(usize, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    for t in trajs {
        let d = match grouping {
            JsdGrouping::Predecessor => usize::MAX,
            JsdGrouping::PredecessorDestination => t.destination(),
        };
        for (k, a) in t.steps() {
            *m.entry((k, d)).or_default().entry(a).or_insert(0.0) += 1.0;
        }
    }
    m
}

/// JSD between the empirical next-link distribution at `k` and the model's.
fn step_jsd(scenario: &Scenario, cm: &ChoiceMatrix, k: usize, emp: &BTreeMap<usize, f64>) -> f64 {
    let total: f64 = emp.values().sum();
    let mut p = Vec::new();
    let mut q = Vec::new();
    for (a, pa) in cm.row(&scenario.graph, k) {
        p.push(emp.get(&a).copied().unwrap_or(0.0) / total);
        q.push(pa);
    }
    jsd_pair(&p, &q)
}

/// Metrics of `params` on the given trajectories of one scenario.
pub fn evaluate_metrics(
    scenario: &Scenario,
    params: &ModelParams,
    trajs: &[&Trajectory],
    grouping: JsdGrouping,
    detail: bool,
) -> Result<MetricsReport> {
    if trajs.is_empty() {
        return Err(Error::InvalidConfig("metrics need a nonempty evaluation set".into()));
    }
    let graph = &scenario.graph;
    for (n, t) in trajs.iter().enumerate() {
        crate::data::validate_trajectory(n, t, graph)?;
    }
    let pred = Predictor::new(scenario, params)?;
    let emp = empirical(trajs, grouping);
    let max_steps = default_max_steps(graph);
    let mut cache: BTreeMap<(usize, usize), ChoiceMatrix> = BTreeMap::new();
    let od_specific = scenario.uses_od_utilities(params);
    let mut rows = Vec::with_capacity(trajs.len());
    for t in trajs {
        let key = (if od_specific { t.origin() } else { usize::MAX }, t.destination());
        if let alloc::collections::btree_map::Entry::Vacant(e) = cache.entry(key) {
            e.insert(pred.choice(t.origin(), t.destination())?);
        }
        let cm = &cache[&key];
        let ll = crate::solver::path_log_probability(graph, &t.links, cm)?;
        let jsd = if t.step_count() == 0 {
            None
        } else {
            let d = match grouping {
                JsdGrouping::Predecessor => usize::MAX,
                JsdGrouping::PredecessorDestination => t.destination(),
            };
            let s: f64 = t.steps().map(|(k, _)| step_jsd(scenario, cm, k, &emp[&(k, d)])).sum();
            Some(s / t.step_count() as f64)
        };
        let (bleu, route_complete) = match most_probable_route(graph, cm, t.origin(), max_steps) {
            Ok(route) => (bleu4(&route, &t.links), true),
            Err(Error::IncompleteRoute { .. }) => (0.0, false),
            Err(e) => return Err(e),
        };
        rows.push(TrajectoryMetrics { id: t.id.clone(), ll, probability: exp(ll), jsd, bleu, route_complete });
    }
    let n = rows.len() as f64;
    let jsd_rows: Vec<f64> = rows.iter().filter_map(|r| r.jsd).collect();
    let report = MetricsReport {
        ll: rows.iter().map(|r| r.ll).sum(),
        acp: rows.iter().map(|r| r.probability).sum::<f64>() / n,
        jsd: if jsd_rows.is_empty() { 0.0 } else { jsd_rows.iter().sum::<f64>() / jsd_rows.len() as f64 },
        bleu: rows.iter().map(|r| r.bleu).sum::<f64>() / n,
        n_trajectories: rows.len(),
        route_failures: rows.iter().filter(|r| !r.route_complete).count(),
        per_trajectory: if detail { Some(rows) } else { None },
    };
    Ok(report)
}

/// Average choice probability: mean over trajectories of `Π_l P(a_{l+1}|a_l)`.
pub fn acp(scenario: &Scenario, params: &ModelParams, trajs: &[&Trajectory]) -> Result<f64> {
    Ok(evaluate_metrics(scenario, params, trajs, JsdGrouping::Predecessor, false)?.acp)
}
