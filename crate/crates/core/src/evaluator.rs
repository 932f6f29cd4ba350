//! Log-likelihood, the EI-penalised loss and its gradient.
//!
//! Trajectories are grouped by destination (by origin-destination pair when
//! a link-size attribute enters the utilities), so each value function is
//! solved once per group. The gradient of the RL-type likelihood uses the
//! adjoint of the value system: with `x` solving `(I − M_d)ᵀ x = g`,
//! `g_o = n_o / z_o`,
//!
//! ```text
//! ∂LL/∂h(a|k) = (c(a|k) − x_k M(a|k) z_a) / μ
//! ```
//!
//! where `c` counts observed transitions. The same `x` gives the expected
//! link flows `F_k = x_k z_k`. The result is then pulled back through the
//! residual layers. NRL uses implicit differentiation of its fixed point.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Trajectory, TrajectorySet};
use crate::features::FeatureTensor;
use crate::linalg::{DenseMatrix, Lu};
use crate::math::{ln, sqrt};
use crate::model::{nrl_scale, residual_backward, residual_forward, systematic_utility, ModelKind, ModelParams};
use crate::network::{build_proximities, LinkGraph, ProximitySet};
use crate::solver::{self, ChoiceMatrix, SharedSystem};
use crate::{Error, Result};

/// Name of the NRL scale attribute that reads the OD-specific link size.
pub const LINK_SIZE: &str = "link_size";

/// A network state with the trajectories observed on it.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub graph: LinkGraph,
    pub features: FeatureTensor,
    pub proximities: ProximitySet,
    pub trajectories: TrajectorySet,
    /// Fixed coefficients for the link-size attribute, when one is used.
    pub link_size_params: Option<ModelParams>,
    link_size: BTreeMap<(usize, usize), Vec<f64>>,
}

impl Scenario {
    pub fn new(name: &str, graph: LinkGraph, features: FeatureTensor, trajectories: TrajectorySet) -> Result<Self> {
        trajectories.validate(&graph)?;
        if features.edge_count() != graph.edge_count() {
            return Err(Error::Dimension("features built for a different graph".into()));
        }
        let proximities = build_proximities(&graph);
        Ok(Self {
            name: name.into(),
            graph,
            features,
            proximities,
            trajectories,
            link_size_params: None,
            link_size: BTreeMap::new(),
        })
    }

    /// Precomputes the link-size attribute for every OD pair observed in the
    /// scenario, with the given fixed coefficients.
    pub fn with_link_size(mut self, fixed: &ModelParams) -> Result<Self> {
        let mut table = BTreeMap::new();
        for t in self.trajectories.iter() {
            let od = (t.origin(), t.destination());
            if let alloc::collections::btree_map::Entry::Vacant(e) = table.entry(od) {
                e.insert(solver::link_size_attribute(&self.graph, &self.features, fixed, od.0, od.1)?);
            }
        }
        self.link_size = table;
        self.link_size_params = Some(fixed.clone());
        Ok(self)
    }

    /// Link-size vector for an OD pair, computed on demand when it was not
    /// precomputed.
    pub fn link_size(&self, origin: usize, destination: usize) -> Result<Vec<f64>> {
        if let Some(v) = self.link_size.get(&(origin, destination)) {
            return Ok(v.clone());
        }
        let fixed = self.link_size_params.as_ref().ok_or_else(|| {
            Error::InvalidConfig("link-size attribute requested but no fixed coefficients were given".into())
        })?;
        solver::link_size_attribute(&self.graph, &self.features, fixed, origin, destination)
    }

    pub fn link_size_table(&self) -> &BTreeMap<(usize, usize), Vec<f64>> {
        &self.link_size
    }

    pub fn uses_od_utilities(&self, params: &ModelParams) -> bool {
        self.features.link_size_index().is_some()
            || (params.kind == ModelKind::Nrl && params.nrl_names.iter().any(|n| n == LINK_SIZE))
    }
}

/// `EI = −Σ_m ‖θᵐ‖` (Frobenius norm per layer).
pub fn ei_penalty(params: &ModelParams) -> f64 {
    -params.theta.iter().map(|t| t.norm()).sum::<f64>()
}

/// Gradient of the loss `−LL − λ·EI`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub d_phi: Vec<f64>,
    pub d_nrl_gamma: Vec<f64>,
    pub d_theta: Vec<DenseMatrix>,
    pub d_alpha: f64,
    pub d_beta: f64,
    pub d_gamma: f64,
}

impl GradientVector {
    pub fn zeros(params: &ModelParams) -> Self {
        Self {
            d_phi: vec![0.0; params.phi.len()],
            d_nrl_gamma: vec![0.0; params.nrl_gamma.len()],
            d_theta: params.theta.iter().map(|t| DenseMatrix::zeros(t.rows(), t.cols())).collect(),
            d_alpha: 0.0,
            d_beta: 0.0,
            d_gamma: 0.0,
        }
    }

    /// Flat view in the order of [`flatten`].
    pub fn to_flat(&self, kind: ModelKind) -> Vec<f64> {
        let mut out = self.d_phi.clone();
        if kind == ModelKind::Nrl {
            out.extend_from_slice(&self.d_nrl_gamma);
        }
        if kind == ModelKind::ResDgcnRl {
            out.extend_from_slice(&[self.d_alpha, self.d_beta, self.d_gamma]);
        }
        if kind.has_residual() {
            for t in &self.d_theta {
                out.extend_from_slice(t.as_slice());
            }
        }
        out
    }

    pub fn norm(&self, kind: ModelKind) -> f64 {
        sqrt(self.to_flat(kind).iter().map(|x| x * x).sum())
    }
}

/// Estimated parameters as one vector: `φ`, then the NRL scale
/// coefficients, then `α, β, γ` (ResDGCN-RL), then every `θᵐ` row-major.
pub fn flatten(params: &ModelParams) -> Vec<f64> {
    let mut out = params.phi.clone();
    if params.kind == ModelKind::Nrl {
        out.extend_from_slice(&params.nrl_gamma);
    }
    if params.kind == ModelKind::ResDgcnRl {
        out.extend_from_slice(&[params.alpha, params.beta, params.gamma]);
    }
    if params.kind.has_residual() {
        for t in &params.theta {
            out.extend_from_slice(t.as_slice());
        }
    }
    out
}

/// Inverse of [`flatten`] on top of `template`.
pub fn unflatten(template: &ModelParams, flat: &[f64]) -> Result<ModelParams> {
    if flat.len() != flatten(template).len() {
        return Err(Error::Dimension(format!(
            "{} values for {} parameters",
            flat.len(),
            flatten(template).len()
        )));
    }
    let mut p = template.clone();
    let mut i = 0;
    let mut take = |dst: &mut [f64]| {
        dst.copy_from_slice(&flat[i..i + dst.len()]);
        i += dst.len();
    };
    take(&mut p.phi);
    if p.kind == ModelKind::Nrl {
        take(&mut p.nrl_gamma);
    }
    if p.kind == ModelKind::ResDgcnRl {
        let mut s = [0.0; 3];
        take(&mut s);
        (p.alpha, p.beta, p.gamma) = (s[0], s[1], s[2]);
    }
    if p.kind.has_residual() {
        for t in &mut p.theta {
            take(t.as_mut_slice());
        }
    }
    Ok(p)
}

/// Which flat coordinates the optimiser may move.
pub fn trainable_mask(params: &ModelParams) -> Vec<bool> {
    let mut mask: Vec<bool> = params.frozen.iter().map(|f| !f).collect();
    mask.resize(flatten(params).len(), true);
    mask
}

/// Human-readable name of flat coordinate `i`.
pub fn coordinate_name(params: &ModelParams, mut i: usize) -> String {
    if i < params.phi.len() {
        return params.phi_names[i].clone();
    }
    i -= params.phi.len();
    if params.kind == ModelKind::Nrl {
        if i < params.nrl_gamma.len() {
            return format!("nrl_gamma.{}", params.nrl_names[i]);
        }
        i -= params.nrl_gamma.len();
    }
    if params.kind == ModelKind::ResDgcnRl {
        if i < 3 {
            return String::from(["alpha", "beta", "gamma"][i]);
        }
        i -= 3;
    }
    for (m, t) in params.theta.iter().enumerate() {
        let size = t.rows() * t.cols();
        if i < size {
            return format!("theta[{}][{}][{}]", m + 1, i / t.cols(), i % t.cols());
        }
        i -= size;
    }
    String::from("?")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub ll: f64,
    pub ei: f64,
    pub lambda: f64,
    /// `−LL − λ·EI`.
    pub loss: f64,
    pub n_trajectories: usize,
    pub gradient: Option<GradientVector>,
}

/// Transition counts of one group of trajectories.
struct GroupStats {
    counts: Vec<f64>,
    origins: BTreeMap<usize, f64>,
}

fn group_trajectories<'a>(
    scenario: &Scenario,
    params: &ModelParams,
    trajs: impl Iterator<Item = &'a Trajectory>,
) -> Result<BTreeMap<(usize, usize), GroupStats>> {
    let od = scenario.uses_od_utilities(params);
    let graph = &scenario.graph;
    let mut groups: BTreeMap<(usize, usize), GroupStats> = BTreeMap::new();
    for (n, t) in trajs.enumerate() {
        if t.links.is_empty() {
            return Err(Error::MalformedTrajectory { trajectory: n, detail: "empty trajectory".into() });
        }
        let key = (if od { t.origin() } else { usize::MAX }, t.destination());
        let g = groups
            .entry(key)
            .or_insert_with(|| GroupStats { counts: vec![0.0; graph.edge_count()], origins: BTreeMap::new() });
        for (s, (k, a)) in t.steps().enumerate() {
            let e = graph.edge_index(k, a).ok_or(Error::InfeasibleStep { trajectory: n, step: s, from: k, to: a })?;
            g.counts[e] += 1.0;
        }
        *g.origins.entry(t.origin()).or_insert(0.0) += 1.0;
    }
    Ok(groups)
}

/// Adds `φ_LS · LS[a]` to every transition `(k, a)`.
fn with_link_size(graph: &LinkGraph, h: &[f64], coef: f64, ls: &[f64]) -> Vec<f64> {
    graph.edges().zip(h).map(|((_, a), &x)| x + coef * ls[a]).collect()
}

struct GroupContribution {
    ll: f64,
    d_h: Option<Vec<f64>>,
    d_ls: f64,
    d_nrl: Vec<f64>,
}

struct GroupResult {
    ll: f64,
    d_h: Option<Vec<f64>>,
    d_mu: Option<Vec<f64>>,
}

/// LL of one destination group under constant scale, plus `∂LL/∂h`.
fn rl_group(
    graph: &LinkGraph,
    sys: &SharedSystem<'_>,
    h: &[f64],
    destination: usize,
    stats: &GroupStats,
    want_grad: bool,
) -> Result<GroupResult> {
    let mu = sys.mu();
    let sol = sys.solve(destination)?;
    let z = &sol.value.z;
    let mut ll = 0.0;
    for (e, &c) in stats.counts.iter().enumerate() {
        if c != 0.0 {
            ll += c * h[e] / mu;
        }
    }
    let mut g = vec![0.0; graph.link_count()];
    for (&o, &n) in &stats.origins {
        if !(z[o] > 0.0) {
            return Err(Error::Unreachable { from: o, destination });
        }
        ll -= n * ln(z[o]);
        g[o] = n / z[o];
    }
    if !want_grad {
        return Ok(GroupResult { ll, d_h: None, d_mu: None });
    }
    let x = sys.adjoint(&sol, &g)?;
    let w = sys.weights();
    let mut d_h = stats.counts.clone();
    for k in 0..graph.link_count() {
        if k == destination {
            for e in graph.edge_range(k) {
                d_h[e] = 0.0;
            }
            continue;
        }
        for (e, &a) in graph.edge_range(k).zip(graph.successors(k)) {
            d_h[e] = (d_h[e] - x[k] * w[e] * z[a]) / mu;
        }
    }
    Ok(GroupResult { ll, d_h: Some(d_h), d_mu: None })
}

/// LL of one NRL group, plus `∂LL/∂h` and `∂LL/∂μ` by implicit
/// differentiation of `V = μ ⊙ lse((h + V)/μ)`.
fn nrl_group(
    graph: &LinkGraph,
    h: &[f64],
    mu: &[f64],
    destination: usize,
    stats: &GroupStats,
    want_grad: bool,
) -> Result<GroupResult> {
    let n = graph.link_count();
    let value = solver::solve_value_nrl(graph, h, mu, destination)?;
    let v = &value.v;
    let cm = solver::choice_probabilities(graph, &value, h)?;
    let mut ll = 0.0;
    for (e, (k, a)) in graph.edges().enumerate() {
        let c = stats.counts[e];
        if c != 0.0 {
            if !value.reachable[a] {
                return Err(Error::Unreachable { from: a, destination });
            }
            ll += c * (h[e] + v[a] - v[k]) / mu[k];
        }
    }
    if !want_grad {
        return Ok(GroupResult { ll, d_h: None, d_mu: None });
    }
    // r = ∂LL/∂V (direct)
    let mut r = vec![0.0; n];
    for (e, (k, a)) in graph.edges().enumerate() {
        let c = stats.counts[e];
        if c != 0.0 {
            r[a] += c / mu[k];
            r[k] -= c / mu[k];
        }
    }
    r[destination] = 0.0;
    let mut b = DenseMatrix::identity(n);
    for (e, (k, a)) in graph.edges().enumerate() {
        if cm.p[e] != 0.0 {
            b[(k, a)] -= cm.p[e];
        }
    }
    let lu = Lu::factor(&b).map_err(|e| Error::ValueUndefined { destination, detail: format!("NRL adjoint: {e}") })?;
    let y = lu.solve_transpose(&r);
    let mut d_h = vec![0.0; graph.edge_count()];
    let mut d_mu = vec![0.0; n];
    for k in 0..n {
        if k == destination || !value.reachable[k] {
            continue;
        }
        let mut expected = 0.0;
        let mut direct = 0.0;
        for (e, &a) in graph.edge_range(k).zip(graph.successors(k)) {
            if !value.reachable[a] {
                continue;
            }
            let u = h[e] + v[a];
            expected += cm.p[e] * u;
            let c = stats.counts[e];
            d_h[e] = c / mu[k] + y[k] * cm.p[e];
            if c != 0.0 {
                direct -= c * (u - v[k]) / (mu[k] * mu[k]);
            }
        }
        let s = (v[k] - expected) / mu[k];
        d_mu[k] = direct + y[k] * s;
    }
    Ok(GroupResult { ll, d_h: Some(d_h), d_mu: Some(d_mu) })
}

/// Evaluates the loss on the selected trajectories of each scenario
/// (`None` selects all of them).
pub fn evaluate(
    scenarios: &[Scenario],
    params: &ModelParams,
    lambda: f64,
    selection: Option<&[Vec<usize>]>,
    want_grad: bool,
) -> Result<Evaluation> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be nonnegative, got {lambda}")));
    }
    if let Some(sel) = selection {
        if sel.len() != scenarios.len() {
            return Err(Error::Dimension("selection does not match the scenarios".into()));
        }
    }
    let mut ll = 0.0;
    let mut n_traj = 0;
    let mut grad = GradientVector::zeros(params);
    for (si, scn) in scenarios.iter().enumerate() {
        let all: Vec<usize>;
        let idx: &[usize] = match selection {
            Some(sel) => &sel[si],
            None => {
                all = (0..scn.trajectories.len()).collect();
                &all
            }
        };
        if idx.is_empty() {
            continue;
        }
        n_traj += idx.len();
        let trajs = idx.iter().map(|&i| &scn.trajectories.trajectories[i]);
        let (l, g) = scenario_ll(scn, params, trajs, want_grad)?;
        ll += l;
        if let Some(g) = g {
            for (a, b) in grad.d_phi.iter_mut().zip(&g.d_phi) {
                *a += b;
            }
            for (a, b) in grad.d_nrl_gamma.iter_mut().zip(&g.d_nrl_gamma) {
                *a += b;
            }
            for (a, b) in grad.d_theta.iter_mut().zip(&g.d_theta) {
                a.axpy(1.0, b);
            }
            grad.d_alpha += g.d_alpha;
            grad.d_beta += g.d_beta;
            grad.d_gamma += g.d_gamma;
        }
    }
    let ei = ei_penalty(params);
    let gradient = if want_grad {
        // Loss = −LL − λ·EI = −LL + λ Σ‖θᵐ‖.
        grad.d_phi.iter_mut().for_each(|x| *x = -*x);
        grad.d_nrl_gamma.iter_mut().for_each(|x| *x = -*x);
        grad.d_alpha = -grad.d_alpha;
        grad.d_beta = -grad.d_beta;
        grad.d_gamma = -grad.d_gamma;
        for (dt, t) in grad.d_theta.iter_mut().zip(&params.theta) {
            dt.scale(-1.0);
            let norm = t.norm();
            if lambda != 0.0 && norm > 0.0 {
                dt.axpy(lambda / norm, t);
            }
        }
        for (d, &frozen) in grad.d_phi.iter_mut().zip(&params.frozen) {
            if frozen {
                *d = 0.0;
            }
        }
        if params.kind != ModelKind::ResDgcnRl {
            (grad.d_alpha, grad.d_beta, grad.d_gamma) = (0.0, 0.0, 0.0);
        }
        Some(grad)
    } else {
        None
    };
    Ok(Evaluation { ll, ei, lambda, loss: -ll - lambda * ei, n_trajectories: n_traj, gradient })
}

/// Log-likelihood of one scenario's trajectories and its gradient (of LL,
/// not of the loss).
fn scenario_ll<'a>(
    scn: &Scenario,
    params: &ModelParams,
    trajs: impl Iterator<Item = &'a Trajectory>,
    want_grad: bool,
) -> Result<(f64, Option<GradientVector>)> {
    params.validate(&scn.graph, &scn.features)?;
    let graph = &scn.graph;
    let groups = group_trajectories(scn, params, trajs)?;
    let od = scn.uses_od_utilities(params);
    let ls_index = scn.features.link_size_index();
    if od && params.kind.has_residual() && !params.theta.is_empty() {
        return Err(Error::Unsupported("residual layers on top of an OD-specific link-size attribute".into()));
    }
    let v = systematic_utility(&scn.features, params)?;
    let field = residual_forward(graph, v, params, Some(&scn.proximities))?;
    let h = &field.h;

    let shared = if od || params.kind == ModelKind::Nrl { None } else { Some(SharedSystem::new(graph, h, params.mu)?) };
    let groups: Vec<_> = groups.into_iter().collect();
    let eval_group = |(key, stats): &((usize, usize), GroupStats)| -> Result<GroupContribution> {
        let (origin, destination) = *key;
        let ls = if od { Some(scn.link_size(origin, destination)?) } else { None };
        let h_od;
        let hg: &[f64] = match (&ls, ls_index) {
            (Some(ls), Some(q)) => {
                h_od = with_link_size(graph, h, params.phi[q], ls);
                &h_od
            }
            _ => h,
        };
        let mut d_nrl = Vec::new();
        let res = if params.kind == ModelKind::Nrl {
            let mu = nrl_scale(&scn.features, params, graph.link_count(), ls.as_deref())?;
            let r = nrl_group(graph, hg, &mu, destination, stats, want_grad)?;
            if let Some(d_mu) = &r.d_mu {
                for name in &params.nrl_names {
                    let w = if name == LINK_SIZE {
                        ls.as_deref().unwrap_or(&[])
                    } else {
                        scn.features.link_attribute(name).unwrap_or(&[])
                    };
                    d_nrl.push(d_mu.iter().zip(&mu).zip(w).map(|((dm, m), x)| dm * m * x).sum::<f64>());
                }
            }
            r
        } else if let Some(sys) = &shared {
            rl_group(graph, sys, hg, destination, stats, want_grad)?
        } else {
            let sys = SharedSystem::single(graph, hg, params.mu)?;
            rl_group(graph, &sys, hg, destination, stats, want_grad)?
        };
        let d_ls = match (&ls, ls_index, &res.d_h) {
            (Some(ls), Some(_), Some(d_h)) => graph.edges().zip(d_h).map(|((_, a), x)| x * ls[a]).sum::<f64>(),
            _ => 0.0,
        };
        Ok(GroupContribution { ll: res.ll, d_h: res.d_h, d_ls, d_nrl })
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<GroupContribution>> = {
        use rayon::prelude::*;
        groups.par_iter().map(eval_group).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<GroupContribution>> = groups.iter().map(eval_group).collect();

    // Reduced in group order so results do not depend on the thread count.
    let mut ll = 0.0;
    let mut d_h_total = if want_grad { Some(vec![0.0; graph.edge_count()]) } else { None };
    let mut d_ls = 0.0;
    let mut d_nrl = vec![0.0; params.nrl_gamma.len()];
    for part in parts {
        let part = part?;
        ll += part.ll;
        if let (Some(total), Some(d_h)) = (d_h_total.as_mut(), part.d_h.as_ref()) {
            for (t, x) in total.iter_mut().zip(d_h) {
                *t += x;
            }
        }
        d_ls += part.d_ls;
        for (a, b) in d_nrl.iter_mut().zip(&part.d_nrl) {
            *a += b;
        }
    }
    let Some(d_h) = d_h_total else {
        return Ok((ll, None));
    };
    let back = residual_backward(graph, &field, params, Some(&scn.proximities), &d_h)?;
    let mut g = GradientVector::zeros(params);
    for (q, d) in g.d_phi.iter_mut().enumerate() {
        if Some(q) == ls_index {
            *d = d_ls;
        } else {
            *d = back.d_v.iter().zip(scn.features.values(q)).map(|(a, b)| a * b).sum();
        }
    }
    g.d_nrl_gamma = d_nrl;
    if !back.d_theta.is_empty() {
        g.d_theta = back.d_theta;
    }
    g.d_alpha = back.d_alpha;
    g.d_beta = back.d_beta;
    g.d_gamma = back.d_gamma;
    Ok((ll, Some(g)))
}

/// `LL = Σ_n Σ_l ln P(a_{l+1} | a_l)` over all trajectories of all scenarios.
pub fn log_likelihood(scenarios: &[Scenario], params: &ModelParams) -> Result<f64> {
    Ok(evaluate(scenarios, params, 0.0, None, false)?.ll)
}

/// Central differences of the loss over flat coordinates `coords` (all
/// coordinates when `None`), step `rel · max(1, |p_i|)`.
pub fn finite_difference_gradient(
    scenarios: &[Scenario],
    params: &ModelParams,
    lambda: f64,
    rel: f64,
    coords: Option<&[usize]>,
) -> Result<Vec<(usize, f64)>> {
    let base = flatten(params);
    let all: Vec<usize>;
    let coords = match coords {
        Some(c) => c,
        None => {
            all = (0..base.len()).collect();
            &all
        }
    };
    let mut out = Vec::with_capacity(coords.len());
    let mut x = base.clone();
    for &i in coords {
        let step = rel * base[i].abs().max(1.0);
        x[i] = base[i] + step;
        let up = evaluate(scenarios, &unflatten(params, &x)?, lambda, None, false)?.loss;
        x[i] = base[i] - step;
        let down = evaluate(scenarios, &unflatten(params, &x)?, lambda, None, false)?.loss;
        x[i] = base[i];
        out.push((i, (up - down) / (2.0 * step)));
    }
    Ok(out)
}

/// Choice probabilities of a fitted model on one scenario.
pub struct Predictor<'s> {
    scenario: &'s Scenario,
    params: ModelParams,
    h: Vec<f64>,
    shared: Option<SharedSystem<'s>>,
}

impl<'s> Predictor<'s> {
    pub fn new(scenario: &'s Scenario, params: &ModelParams) -> Result<Self> {
        params.validate(&scenario.graph, &scenario.features)?;
        let v = systematic_utility(&scenario.features, params)?;
        let field = residual_forward(&scenario.graph, v, params, Some(&scenario.proximities))?;
        let shared = if scenario.uses_od_utilities(params) || params.kind == ModelKind::Nrl {
            None
        } else {
            Some(SharedSystem::new(&scenario.graph, &field.h, params.mu)?)
        };
        Ok(Self { scenario, params: params.clone(), h: field.h, shared })
    }

    /// Deterministic utilities `h` (without any link-size term).
    pub fn utilities(&self) -> &[f64] {
        &self.h
    }

    pub fn choice(&self, origin: usize, destination: usize) -> Result<ChoiceMatrix> {
        let scn = self.scenario;
        let graph = &scn.graph;
        graph.check_link(origin)?;
        graph.check_link(destination)?;
        if let Some(sys) = &self.shared {
            let sol = sys.solve(destination)?;
            return solver::choice_probabilities(graph, &sol.value, &self.h);
        }
        let ls = if scn.uses_od_utilities(&self.params) { Some(scn.link_size(origin, destination)?) } else { None };
        let h = match (&ls, scn.features.link_size_index()) {
            (Some(ls), Some(q)) => with_link_size(graph, &self.h, self.params.phi[q], ls),
            _ => self.h.clone(),
        };
        let value = if self.params.kind == ModelKind::Nrl {
            let mu = nrl_scale(&scn.features, &self.params, graph.link_count(), ls.as_deref())?;
            solver::solve_value_nrl(graph, &h, &mu, destination)?
        } else {
            solver::solve_value(graph, &h, self.params.mu, destination)?
        };
        solver::choice_probabilities(graph, &value, &h)
    }

    /// `ln P(path)` for one trajectory.
    pub fn path_log_probability(&self, links: &[usize]) -> Result<f64> {
        let (Some(&o), Some(&d)) = (links.first(), links.last()) else {
            return Err(Error::MalformedTrajectory { trajectory: 0, detail: "empty path".into() });
        };
        let cm = self.choice(o, d)?;
        solver::path_log_probability(&self.scenario.graph, links, &cm)
    }
}
