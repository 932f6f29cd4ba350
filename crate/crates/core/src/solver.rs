//! Destination-specific value functions, choice probabilities, expected link
//! flows and greedy routes.
//!
//! For a constant scale `μ` the logsum Bellman equation is linear in
//! `z = exp(V/μ)`:
//!
//! ```text
//! z_k = Σ_a δ(a|k) e^{h(a|k)/μ} z_a   (k ≠ d),   z_d = 1
//! ```
//!
//! i.e. `(I − M_d) z = e_d` with `M = exp(h/μ) ⊙ A` and row `d` of `M`
//! zeroed. NRL has a per-link scale and is solved by fixed-point iteration.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::features::FeatureTensor;
use crate::linalg::{DenseMatrix, Lu};
use crate::math::{exp, ln, log_sum_exp};
use crate::model::{systematic_utility, ModelParams};
use crate::network::LinkGraph;
use crate::{Error, Result};

/// Relative residual accepted for a solved value function.
pub const VALUE_RESIDUAL_TOL: f64 = 1e-9;

pub const NRL_TOL: f64 = 1e-10;
pub const NRL_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    pub destination: usize,
    /// `V(k)`; `-∞` for links that cannot reach the destination.
    pub v: Vec<f64>,
    /// `exp(V/μ_k)`; zero when unreachable.
    pub z: Vec<f64>,
    pub reachable: Vec<bool>,
    /// Scale per link (constant for every model but NRL).
    pub mu: Vec<f64>,
}

impl ValueField {
    fn from_z(destination: usize, mut z: Vec<f64>, structural: &[bool], mu: f64) -> Self {
        let mut reachable = structural.to_vec();
        let mut v = vec![f64::NEG_INFINITY; z.len()];
        for k in 0..z.len() {
            if reachable[k] && z[k].is_finite() && z[k] > 0.0 {
                v[k] = mu * ln(z[k]);
            } else {
                reachable[k] = false;
                z[k] = 0.0;
            }
        }
        v[destination] = 0.0;
        z[destination] = 1.0;
        reachable[destination] = true;
        let n = v.len();
        Self { destination, v, z, reachable, mu: vec![mu; n] }
    }

    /// `max_k |V(k) − μ_k ln Σ_a δ(a|k) e^{(h(a|k)+V(a))/μ_k}|` over reachable
    /// non-destination links.
    pub fn bellman_residual(&self, graph: &LinkGraph, h: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..graph.link_count() {
            if k == self.destination || !self.reachable[k] {
                continue;
            }
            let mu = self.mu[k];
            let terms = graph
                .edge_range(k)
                .zip(graph.successors(k))
                .filter(|&(_, &a)| self.reachable[a])
                .map(|(e, &a)| (h[e] + self.v[a]) / mu);
            let rhs = mu * log_sum_exp(terms.collect::<Vec<_>>().iter().copied());
            worst = worst.max((self.v[k] - rhs).abs());
        }
        worst
    }
}

/// `P^d(a|k)` per transition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceMatrix {
    pub destination: usize,
    /// Probabilities in edge order.
    pub p: Vec<f64>,
}

impl ChoiceMatrix {
    pub fn to_dense(&self, graph: &LinkGraph) -> DenseMatrix {
        graph.to_dense(&self.p)
    }

    pub fn prob(&self, graph: &LinkGraph, k: usize, a: usize) -> Option<f64> {
        graph.edge_index(k, a).map(|e| self.p[e])
    }

    /// `(next link, probability)` pairs leaving `k`.
    pub fn row<'a>(&'a self, graph: &'a LinkGraph, k: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        graph.edge_range(k).zip(graph.successors(k)).map(move |(e, &a)| (a, self.p[e]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowVector {
    pub origin: usize,
    pub destination: usize,
    pub flow: Vec<f64>,
}

impl FlowVector {
    /// Total flow entering the destination link (1 under unit demand).
    pub fn destination_inflow(&self) -> f64 {
        self.flow[self.destination]
    }
}

fn check_utilities(graph: &LinkGraph, h: &[f64]) -> Result<()> {
    if h.len() != graph.edge_count() {
        return Err(Error::Dimension(format!(
            "{} utilities for {} transitions",
            h.len(),
            graph.edge_count()
        )));
    }
    Ok(())
}

/// `M_e = exp(h_e / μ)` in edge order.
pub fn transition_weights(h: &[f64], mu: f64) -> Vec<f64> {
    h.iter().map(|&x| exp(x / mu)).collect()
}

/// Dense `I − M_d`.
fn destination_system(graph: &LinkGraph, weights: &[f64], destination: usize) -> DenseMatrix {
    let n = graph.link_count();
    let mut b = DenseMatrix::identity(n);
    for k in 0..n {
        if k == destination {
            continue;
        }
        for (e, &a) in graph.edge_range(k).zip(graph.successors(k)) {
            b[(k, a)] -= weights[e];
        }
    }
    b
}

/// `max_k |((I − M_d) z − e_d)_k|` using the sparse structure.
fn sparse_residual(graph: &LinkGraph, weights: &[f64], destination: usize, z: &[f64]) -> f64 {
    let mut worst: f64 = (z[destination] - 1.0).abs();
    for k in 0..graph.link_count() {
        if k == destination {
            continue;
        }
        let s: f64 = graph.edge_range(k).zip(graph.successors(k)).map(|(e, &a)| weights[e] * z[a]).sum();
        worst = worst.max((z[k] - s).abs());
    }
    worst
}

/// `max_k |((I − M_d)ᵀ x − g)_k|`.
fn sparse_residual_transpose(graph: &LinkGraph, weights: &[f64], destination: usize, x: &[f64], g: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..graph.link_count() {
        let s: f64 = graph.incoming(a).filter(|&(k, _)| k != destination).map(|(k, e)| weights[e] * x[k]).sum();
        worst = worst.max((x[a] - s - g[a]).abs());
    }
    worst
}

fn scale_of(v: &[f64]) -> f64 {
    v.iter().fold(1.0, |m: f64, x| m.max(x.abs()))
}

/// Solves the RL value function for one destination by dense LU.
pub fn solve_value(graph: &LinkGraph, h: &[f64], mu: f64, destination: usize) -> Result<ValueField> {
    graph.check_link(destination)?;
    check_utilities(graph, h)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidConfig(format!("scale mu must be positive, got {mu}")));
    }
    let weights = transition_weights(h, mu);
    solve_with_weights(graph, &weights, mu, destination).map(|(vf, _)| vf)
}

fn solve_with_weights(
    graph: &LinkGraph,
    weights: &[f64],
    mu: f64,
    destination: usize,
) -> Result<(ValueField, Lu)> {
    if let Some(e) = weights.iter().position(|w| !w.is_finite()) {
        return Err(Error::ValueUndefined {
            destination,
            detail: format!("transition weight {e} overflows"),
        });
    }
    let b = destination_system(graph, weights, destination);
    let lu = Lu::factor(&b).map_err(|e| Error::ValueUndefined { destination, detail: format!("{e}") })?;
    let mut rhs = vec![0.0; graph.link_count()];
    rhs[destination] = 1.0;
    let z = lu.solve(&rhs);
    let res = sparse_residual(graph, weights, destination, &z);
    if !(res <= VALUE_RESIDUAL_TOL * scale_of(&z)) {
        return Err(Error::ValueUndefined {
            destination,
            detail: format!(
                "residual {res:e} after LU solve (smallest relative pivot {:e})",
                lu.min_pivot_ratio()
            ),
        });
    }
    // A nonpositive z on a link that can reach the destination means the
    // fixed point does not exist (spectral radius of M at least one); the
    // linear solve alone would not notice.
    let reach = graph.reaches(destination);
    if let Some(k) = (0..z.len()).find(|&k| reach[k] && !(z[k] > 0.0 && z[k].is_finite())) {
        return Err(Error::ValueUndefined {
            destination,
            detail: format!("z({k}) = {:e} is not positive; utilities are too large for the cycles of the network", z[k]),
        });
    }
    Ok((ValueField::from_z(destination, z, &reach, mu), lu))
}

/// Solves the NRL value function `V(k) = μ_k ln Σ_a δ(a|k) e^{(h(a|k)+V(a))/μ_k}`
/// by Jacobi fixed-point iteration from `V = 0`.
pub fn solve_value_nrl(graph: &LinkGraph, h: &[f64], mu: &[f64], destination: usize) -> Result<ValueField> {
    solve_value_nrl_with(graph, h, mu, destination, NRL_TOL, NRL_MAX_ITER)
}

pub fn solve_value_nrl_with(
    graph: &LinkGraph,
    h: &[f64],
    mu: &[f64],
    destination: usize,
    tol: f64,
    max_iter: usize,
) -> Result<ValueField> {
    graph.check_link(destination)?;
    check_utilities(graph, h)?;
    let n = graph.link_count();
    if mu.len() != n {
        return Err(Error::Dimension(format!("{} scales for {n} links", mu.len())));
    }
    if let Some(k) = mu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidConfig(format!("scale of link {k} is {}", mu[k])));
    }
    let reachable = graph.reaches(destination);
    let mut v: Vec<f64> = (0..n).map(|k| if reachable[k] { 0.0 } else { f64::NEG_INFINITY }).collect();
    let mut next = v.clone();
    let mut terms = Vec::new();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        residual = 0.0;
        for k in 0..n {
            if k == destination || !reachable[k] {
                continue;
            }
            terms.clear();
            for (e, &a) in graph.edge_range(k).zip(graph.successors(k)) {
                if reachable[a] {
                    terms.push((h[e] + v[a]) / mu[k]);
                }
            }
            let val = mu[k] * log_sum_exp(terms.iter().copied());
            if !val.is_finite() {
                return Err(Error::ValueUndefined {
                    destination,
                    detail: format!("NRL value at link {k} is {val}"),
                });
            }
            residual = residual.max((val - v[k]).abs());
            next[k] = val;
        }
        core::mem::swap(&mut v, &mut next);
        if residual < tol {
            let z = (0..n).map(|k| if reachable[k] { exp(v[k] / mu[k]) } else { 0.0 }).collect();
            return Ok(ValueField { destination, v, z, reachable, mu: mu.to_vec() });
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual })
}

/// `P^d(a|k) = δ(a|k) e^{(h(a|k) + V(a) − V(k))/μ_k}`; the destination row
/// and rows of unreachable links are zero.
pub fn choice_probabilities(graph: &LinkGraph, value: &ValueField, h: &[f64]) -> Result<ChoiceMatrix> {
    check_utilities(graph, h)?;
    if value.v.len() != graph.link_count() {
        return Err(Error::Dimension("value field built for a different graph".into()));
    }
    let mut p = vec![0.0; graph.edge_count()];
    for k in 0..graph.link_count() {
        if k == value.destination || !value.reachable[k] {
            continue;
        }
        let mu = value.mu[k];
        for (e, &a) in graph.edge_range(k).zip(graph.successors(k)) {
            if value.reachable[a] {
                p[e] = exp((h[e] + value.v[a] - value.v[k]) / mu);
            }
        }
    }
    Ok(ChoiceMatrix { destination: value.destination, p })
}

/// `Σ_l ln P(a_{l+1}|a_l)`; `-∞` when a step has zero probability.
pub fn path_log_probability(graph: &LinkGraph, links: &[usize], cm: &ChoiceMatrix) -> Result<f64> {
    let Some(&last) = links.last() else {
        return Err(Error::MalformedTrajectory { trajectory: 0, detail: "empty path".into() });
    };
    if last != cm.destination {
        return Err(Error::MalformedTrajectory {
            trajectory: 0,
            detail: format!("path ends at link {last}, choice matrix is for destination {}", cm.destination),
        });
    }
    let mut total = 0.0;
    for (s, w) in links.windows(2).enumerate() {
        let e = graph
            .edge_index(w[0], w[1])
            .ok_or(Error::InfeasibleStep { trajectory: 0, step: s, from: w[0], to: w[1] })?;
        total += ln(cm.p[e]);
    }
    Ok(total)
}

/// Expected link flows from `origin` under unit demand:
/// `(I − Pᵀ) F = G^o`.
pub fn expected_link_flow(graph: &LinkGraph, cm: &ChoiceMatrix, origin: usize) -> Result<FlowVector> {
    graph.check_link(origin)?;
    let n = graph.link_count();
    let d = cm.destination;
    let row_mass: f64 = cm.row(graph, origin).map(|(_, p)| p).sum();
    if origin != d && row_mass <= 0.0 {
        return Err(Error::Unreachable { from: origin, destination: d });
    }
    let mut b = DenseMatrix::identity(n);
    for (e, (k, a)) in graph.edges().enumerate() {
        b[(a, k)] -= cm.p[e];
    }
    let lu = Lu::factor(&b).map_err(|e| Error::Singular(format!("flow system: {e}")))?;
    let mut g = vec![0.0; n];
    g[origin] = 1.0;
    let flow = lu.solve(&g);
    Ok(FlowVector { origin, destination: d, flow })
}

/// OD-specific link-size attribute: the RL expected link flow under fixed
/// coefficients. The link-size coefficient itself is ignored.
pub fn link_size_attribute(
    graph: &LinkGraph,
    features: &FeatureTensor,
    fixed: &ModelParams,
    origin: usize,
    destination: usize,
) -> Result<Vec<f64>> {
    let mut p = fixed.clone();
    if let Some(q) = features.link_size_index() {
        p.phi[q] = 0.0;
    }
    let h = systematic_utility(features, &p)?;
    let value = solve_value(graph, &h, p.mu, destination)?;
    if !value.reachable[origin] {
        return Err(Error::Unreachable { from: origin, destination });
    }
    let cm = choice_probabilities(graph, &value, &h)?;
    Ok(expected_link_flow(graph, &cm, origin)?.flow)
}

/// Greedy most-probable route; ties go to the lowest link index.
pub fn most_probable_route(
    graph: &LinkGraph,
    cm: &ChoiceMatrix,
    origin: usize,
    max_steps: usize,
) -> Result<Vec<usize>> {
    graph.check_link(origin)?;
    let mut route = vec![origin];
    let mut k = origin;
    for _ in 0..max_steps {
        if k == cm.destination {
            return Ok(route);
        }
        let mut best: Option<(usize, f64)> = None;
        for (a, p) in cm.row(graph, k) {
            if p > 0.0 && best.is_none_or(|(b, bp)| p > bp || (p == bp && a < b)) {
                best = Some((a, p));
            }
        }
        match best {
            Some((a, _)) => {
                route.push(a);
                k = a;
            }
            None => {
                if route.len() == 1 {
                    return Err(Error::Unreachable { from: origin, destination: cm.destination });
                }
                return Err(Error::IncompleteRoute { partial: route });
            }
        }
    }
    if k == cm.destination {
        Ok(route)
    } else {
        Err(Error::IncompleteRoute { partial: route })
    }
}

pub fn default_max_steps(graph: &LinkGraph) -> usize {
    2 * graph.link_count()
}

/// Value solves for many destinations sharing one utility matrix.
///
/// Factorises `B = I − M` once; destination `d` then follows from
/// `z = B⁻¹e_d / (B⁻¹)_dd` since `I − M_d` is a rank-one update of `B`.
/// Falls back to a per-destination factorisation when `B` is singular or a
/// solution fails its residual check.
pub struct SharedSystem<'g> {
    graph: &'g LinkGraph,
    weights: Vec<f64>,
    mu: f64,
    base: Option<Lu>,
}

/// Solution for one destination, keeping what the adjoint solve needs.
pub struct DestinationSolve {
    pub value: ValueField,
    /// Raw linear-system solution (before unreachable entries are zeroed).
    z_raw: Vec<f64>,
    fallback: Option<Lu>,
    /// `(B⁻¹)_dd` when solved through the shared factorisation.
    pivot: f64,
}

impl<'g> SharedSystem<'g> {
    pub fn new(graph: &'g LinkGraph, h: &[f64], mu: f64) -> Result<Self> {
        Self::build(graph, h, mu, true)
    }

    /// Per-destination factorisations only; cheaper when a single destination
    /// is solved for these utilities.
    pub fn single(graph: &'g LinkGraph, h: &[f64], mu: f64) -> Result<Self> {
        Self::build(graph, h, mu, false)
    }

    fn build(graph: &'g LinkGraph, h: &[f64], mu: f64, shared: bool) -> Result<Self> {
        check_utilities(graph, h)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("scale mu must be positive, got {mu}")));
        }
        let weights = transition_weights(h, mu);
        if let Some(e) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::ValueUndefined { destination: usize::MAX, detail: format!("transition weight {e} overflows") });
        }
        if !shared {
            return Ok(Self { graph, weights, mu, base: None });
        }
        let n = graph.link_count();
        let mut b = DenseMatrix::identity(n);
        for (e, (k, a)) in graph.edges().enumerate() {
            b[(k, a)] -= weights[e];
        }
        let base = Lu::factor(&b).ok().filter(|lu| lu.min_pivot_ratio() > 1e-10);
        Ok(Self { graph, weights, mu, base })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn uses_shared_factorization(&self) -> bool {
        self.base.is_some()
    }

    pub fn solve(&self, destination: usize) -> Result<DestinationSolve> {
        self.graph.check_link(destination)?;
        let n = self.graph.link_count();
        if let Some(lu) = &self.base {
            let mut e = vec![0.0; n];
            e[destination] = 1.0;
            let w = lu.solve(&e);
            let pivot = w[destination];
            if pivot.is_finite() && pivot > 0.0 {
                let z: Vec<f64> = w.iter().map(|x| x / pivot).collect();
                let res = sparse_residual(self.graph, &self.weights, destination, &z);
                let reach = self.graph.reaches(destination);
                let positive = (0..n).all(|k| !reach[k] || z[k] > 0.0);
                if positive && res <= VALUE_RESIDUAL_TOL * scale_of(&z) {
                    let value = ValueField::from_z(destination, z.clone(), &reach, self.mu);
                    return Ok(DestinationSolve { value, z_raw: z, fallback: None, pivot });
                }
            }
        }
        let (value, lu) = solve_with_weights(self.graph, &self.weights, self.mu, destination)?;
        let z_raw = value.z.clone();
        Ok(DestinationSolve { value, z_raw, fallback: Some(lu), pivot: f64::NAN })
    }

    /// Solves `(I − M_d)ᵀ x = g` for the destination of `sol`.
    pub fn adjoint(&self, sol: &DestinationSolve, g: &[f64]) -> Result<Vec<f64>> {
        let d = sol.value.destination;
        let x = match (&sol.fallback, &self.base) {
            (Some(lu), _) => lu.solve_transpose(g),
            (None, Some(lu)) => {
                let x0 = lu.solve_transpose(g);
                let mut e = vec![0.0; g.len()];
                e[d] = 1.0;
                let mut y = lu.solve_transpose(&e);
                y[d] -= 1.0;
                let s = x0[d] / sol.pivot;
                x0.iter().zip(&y).map(|(a, b)| a - b * s).collect()
            }
            (None, None) => unreachable!("shared solution without a base factorisation"),
        };
        let res = sparse_residual_transpose(self.graph, &self.weights, d, &x, g);
        if !(res <= VALUE_RESIDUAL_TOL * scale_of(&x).max(scale_of(g))) {
            return Err(Error::ValueUndefined { destination: d, detail: format!("adjoint residual {res:e}") });
        }
        let _ = &sol.z_raw;
        Ok(x)
    }
}
