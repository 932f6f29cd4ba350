//! Deterministic utilities for the recursive logit family.
//!
//! Every model starts from the systematic utility `v(a|k) = Σ_q φ_q x_q(a|k)`.
//! Res-RL and ResDGCN-RL add a residual built by `M` masked layers
//!
//! ```text
//! h⁰ = v
//! hᵐ = hᵐ⁻¹ + (ln 2 − softplus(Π hᵐ⁻¹ θᵐ)) ⊙ A
//! ```
//!
//! where `Π = I` for Res-RL and `Π = αZ_F + βZ_in + γZ_out` for ResDGCN-RL.
//! Per-transition quantities are stored in the edge order of the graph.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::features::FeatureTensor;
use crate::linalg::DenseMatrix;
use crate::math::{exp, residual_term, sigmoid};
use crate::network::{LinkGraph, ProximitySet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Rl,
    LsRl,
    Nrl,
    ResRl,
    ResDgcnRl,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Rl, ModelKind::LsRl, ModelKind::Nrl, ModelKind::ResRl, ModelKind::ResDgcnRl];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Rl => "rl",
            ModelKind::LsRl => "lsrl",
            ModelKind::Nrl => "nrl",
            ModelKind::ResRl => "resrl",
            ModelKind::ResDgcnRl => "resdgcnrl",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    pub fn has_residual(self) -> bool {
        matches!(self, ModelKind::ResRl | ModelKind::ResDgcnRl)
    }
}

/// Parameters of any model in the family.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub phi_names: Vec<String>,
    pub phi: Vec<f64>,
    /// Coefficients held at their value during estimation.
    pub frozen: Vec<bool>,
    /// One `|V|×|V|` weight matrix per residual layer.
    pub theta: Vec<DenseMatrix>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Link attributes entering the NRL scale `μ_k = exp(Σ γ_j w_j(k))`.
    pub nrl_names: Vec<String>,
    pub nrl_gamma: Vec<f64>,
    pub mu: f64,
}

impl ModelParams {
    /// Parameters with the given systematic coefficients and no residual.
    pub fn new(kind: ModelKind, phi: &[(&str, f64)]) -> Self {
        Self {
            kind,
            phi_names: phi.iter().map(|(n, _)| String::from(*n)).collect(),
            phi: phi.iter().map(|(_, v)| *v).collect(),
            frozen: vec![false; phi.len()],
            theta: Vec::new(),
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            nrl_names: Vec::new(),
            nrl_gamma: Vec::new(),
            mu: 1.0,
        }
    }

    /// Adds `layers` zero weight matrices of size `n`.
    pub fn with_zero_layers(mut self, layers: usize, n: usize) -> Self {
        self.theta = (0..layers).map(|_| DenseMatrix::zeros(n, n)).collect();
        self
    }

    pub fn with_nrl(mut self, coefficients: &[(&str, f64)]) -> Self {
        self.nrl_names = coefficients.iter().map(|(n, _)| String::from(*n)).collect();
        self.nrl_gamma = coefficients.iter().map(|(_, v)| *v).collect();
        self
    }

    pub fn freeze(mut self, name: &str) -> Self {
        if let Some(i) = self.phi_names.iter().position(|n| n == name) {
            self.frozen[i] = true;
        }
        self
    }

    pub fn layers(&self) -> usize {
        self.theta.len()
    }

    pub fn phi_value(&self, name: &str) -> Option<f64> {
        self.phi_names.iter().position(|n| n == name).map(|i| self.phi[i])
    }

    /// Checks internal consistency and compatibility with a graph and features.
    pub fn validate(&self, graph: &LinkGraph, features: &FeatureTensor) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("scale mu must be positive, got {}", self.mu)));
        }
        if self.phi.len() != self.phi_names.len() || self.frozen.len() != self.phi.len() {
            return Err(Error::Dimension("phi names, values and frozen flags differ in length".into()));
        }
        if self.phi.len() != features.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} features",
                self.phi.len(),
                features.len()
            )));
        }
        for (name, fname) in self.phi_names.iter().zip(features.names()) {
            if name != fname {
                return Err(Error::Dimension(format!(
                    "coefficient '{name}' does not match feature '{fname}'"
                )));
            }
        }
        if features.edge_count() != graph.edge_count() {
            return Err(Error::Dimension("features built for a different graph".into()));
        }
        let n = graph.link_count();
        for (m, t) in self.theta.iter().enumerate() {
            if t.rows() != n || t.cols() != n {
                return Err(Error::Dimension(format!(
                    "layer {} weight matrix is {}x{}, graph has {n} links",
                    m + 1,
                    t.rows(),
                    t.cols()
                )));
            }
        }
        if !self.kind.has_residual() && !self.theta.is_empty() {
            return Err(Error::Dimension(format!(
                "{} takes no residual layers",
                self.kind.name()
            )));
        }
        if self.nrl_names.len() != self.nrl_gamma.len() {
            return Err(Error::Dimension("NRL names and coefficients differ in length".into()));
        }
        if self.kind == ModelKind::LsRl && features.link_size_index().is_none() {
            return Err(Error::InvalidConfig("LS-RL needs a link_size feature".into()));
        }
        Ok(())
    }
}

/// Systematic, residual and total deterministic utilities of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityField {
    pub v: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// Layer inputs `h⁰ … h^{M-1}`.
    pub hidden: Vec<Vec<f64>>,
    /// Pre-activations `(Π hᵐ⁻¹ θᵐ)` on the mask, per layer.
    pub pre_activation: Vec<Vec<f64>>,
    /// Sparse rows of `Π hᵐ⁻¹`, per layer.
    pub propagated: Vec<Vec<Vec<(usize, f64)>>>,
}

impl UtilityField {
    /// Field without residual: `h = v`.
    pub fn systematic_only(v: Vec<f64>) -> Self {
        let g = vec![0.0; v.len()];
        Self { h: v.clone(), v, g, hidden: Vec::new(), pre_activation: Vec::new(), propagated: Vec::new() }
    }

    pub fn layers(&self) -> usize {
        self.pre_activation.len()
    }
}

/// `v(a|k) = Σ_q φ_q x_q(a|k)` in edge order. The link-size feature (if any)
/// contributes zero here; it is OD-specific and added by the caller.
pub fn systematic_utility(features: &FeatureTensor, params: &ModelParams) -> Result<Vec<f64>> {
    if features.len() != params.phi.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} features",
            params.phi.len(),
            features.len()
        )));
    }
    let mut v = vec![0.0; features.edge_count()];
    for (q, &coef) in params.phi.iter().enumerate() {
        if coef != 0.0 {
            for (out, x) in v.iter_mut().zip(features.values(q)) {
                *out += coef * x;
            }
        }
    }
    Ok(v)
}

/// Rows of the propagation matrix `Π` as `(column, weight)` lists.
pub fn propagation_rows(
    kind: ModelKind,
    n: usize,
    prox: Option<&ProximitySet>,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<Vec<Vec<(usize, f64)>>> {
    match kind {
        ModelKind::ResRl => Ok((0..n).map(|k| vec![(k, 1.0)]).collect()),
        ModelKind::ResDgcnRl => {
            let prox = prox.ok_or_else(|| Error::InvalidConfig("ResDGCN-RL needs proximities".into()))?;
            if prox.dim() != n {
                return Err(Error::Dimension(format!(
                    "proximities are {}x{}, graph has {n} links",
                    prox.dim(),
                    prox.dim()
                )));
            }
            Ok((0..n)
                .map(|k| {
                    prox.row_entries(k)
                        .iter()
                        .map(|e| (e.col, alpha * e.first + beta * e.second_in + gamma * e.second_out))
                        .collect()
                })
                .collect())
        }
        other => Err(Error::Unsupported(format!("{} has no residual layers", other.name()))),
    }
}

/// Runs the residual layers on top of `v`.
pub fn residual_forward(
    graph: &LinkGraph,
    v: Vec<f64>,
    params: &ModelParams,
    prox: Option<&ProximitySet>,
) -> Result<UtilityField> {
    if !params.kind.has_residual() || params.theta.is_empty() {
        return Ok(UtilityField::systematic_only(v));
    }
    let n = graph.link_count();
    if v.len() != graph.edge_count() {
        return Err(Error::Dimension("utility vector does not match graph transitions".into()));
    }
    let rows = propagation_rows(params.kind, n, prox, params.alpha, params.beta, params.gamma)?;
    let mut h = v.clone();
    let mut hidden = Vec::with_capacity(params.layers());
    let mut pre_activation = Vec::with_capacity(params.layers());
    let mut propagated = Vec::with_capacity(params.layers());
    let mut scratch = vec![0.0; n];
    let mut mark = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    for (m, theta) in params.theta.iter().enumerate() {
        let mut s = vec![0.0; h.len()];
        let mut w_rows = Vec::with_capacity(n);
        for k in 0..n {
            // W_k = Σ_j Π_kj h_{j,:}
            for &(j, w) in &rows[k] {
                for (e, &i) in graph.edge_range(j).zip(graph.successors(j)) {
                    if !mark[i] {
                        mark[i] = true;
                        touched.push(i);
                    }
                    scratch[i] += w * h[e];
                }
            }
            touched.sort_unstable();
            let w_row: Vec<(usize, f64)> = touched.iter().map(|&i| (i, scratch[i])).collect();
            for &i in &touched {
                scratch[i] = 0.0;
                mark[i] = false;
            }
            touched.clear();
            for (e, &a) in graph.edge_range(k).zip(graph.successors(k)) {
                let x: f64 = w_row.iter().map(|&(i, wi)| wi * theta[(i, a)]).sum();
                if !x.is_finite() {
                    return Err(Error::NumericOverflow {
                        layer: m + 1,
                        detail: format!("pre-activation at transition ({k}, {a}) is {x}"),
                    });
                }
                s[e] = x;
            }
            w_rows.push(w_row);
        }
        let next: Vec<f64> = h.iter().zip(&s).map(|(&x, &z)| x + residual_term(z)).collect();
        hidden.push(core::mem::replace(&mut h, next));
        pre_activation.push(s);
        propagated.push(w_rows);
    }
    let g = h.iter().zip(&v).map(|(a, b)| a - b).collect();
    Ok(UtilityField { v, g, h, hidden, pre_activation, propagated })
}

/// Res-RL forward pass.
pub fn resrl_residual(graph: &LinkGraph, v: Vec<f64>, params: &ModelParams) -> Result<UtilityField> {
    if params.kind != ModelKind::ResRl {
        return Err(Error::Unsupported(format!("expected resrl, got {}", params.kind.name())));
    }
    residual_forward(graph, v, params, None)
}

/// ResDGCN-RL forward pass.
pub fn resdgcn_residual(
    graph: &LinkGraph,
    v: Vec<f64>,
    params: &ModelParams,
    prox: &ProximitySet,
) -> Result<UtilityField> {
    if params.kind != ModelKind::ResDgcnRl {
        return Err(Error::Unsupported(format!("expected resdgcnrl, got {}", params.kind.name())));
    }
    residual_forward(graph, v, params, Some(prox))
}

/// Gradients of a scalar with respect to the residual-layer parameters and
/// the systematic utility, given its gradient with respect to `h^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBackward {
    pub d_v: Vec<f64>,
    pub d_theta: Vec<DenseMatrix>,
    pub d_alpha: f64,
    pub d_beta: f64,
    pub d_gamma: f64,
}

/// Reverse pass through the residual layers.
pub fn residual_backward(
    graph: &LinkGraph,
    field: &UtilityField,
    params: &ModelParams,
    prox: Option<&ProximitySet>,
    d_h: &[f64],
) -> Result<ResidualBackward> {
    let n = graph.link_count();
    let mut grad = d_h.to_vec();
    let mut d_theta: Vec<DenseMatrix> = Vec::with_capacity(field.layers());
    let (mut d_alpha, mut d_beta, mut d_gamma) = (0.0, 0.0, 0.0);
    if field.layers() == 0 {
        return Ok(ResidualBackward { d_v: grad, d_theta, d_alpha, d_beta, d_gamma });
    }
    let rows = propagation_rows(params.kind, n, prox, params.alpha, params.beta, params.gamma)?;
    let dgcn = params.kind == ModelKind::ResDgcnRl;
    let mut d_w = vec![0.0; n];
    for m in (0..field.layers()).rev() {
        let theta = &params.theta[m];
        let s = &field.pre_activation[m];
        let h_prev = &field.hidden[m];
        let w_rows = &field.propagated[m];
        let mut dt = DenseMatrix::zeros(n, n);
        let d_s: Vec<f64> = grad.iter().zip(s).map(|(&g, &z)| -g * sigmoid(z)).collect();
        // The skip connection passes `grad` through unchanged.
        let mut d_prev = grad.clone();
        for k in 0..n {
            let w_row = &w_rows[k];
            for &(i, _) in w_row {
                d_w[i] = 0.0;
            }
            for (e, &a) in graph.edge_range(k).zip(graph.successors(k)) {
                let ds = d_s[e];
                if ds == 0.0 {
                    continue;
                }
                for &(i, wi) in w_row {
                    dt[(i, a)] += wi * ds;
                    d_w[i] += ds * theta[(i, a)];
                }
            }
            let entries = if dgcn { prox.map(|p| p.row_entries(k)) } else { None };
            for (idx, &(j, pkj)) in rows[k].iter().enumerate() {
                let mut d_pi = 0.0;
                for (e, &i) in graph.edge_range(j).zip(graph.successors(j)) {
                    d_prev[e] += pkj * d_w[i];
                    d_pi += h_prev[e] * d_w[i];
                }
                // rows[k] is aligned with the proximity row entries.
                if let Some(en) = entries.map(|en| en[idx]) {
                    d_alpha += d_pi * en.first;
                    d_beta += d_pi * en.second_in;
                    d_gamma += d_pi * en.second_out;
                }
            }
        }
        grad = d_prev;
        d_theta.push(dt);
    }
    d_theta.reverse();
    Ok(ResidualBackward { d_v: grad, d_theta, d_alpha, d_beta, d_gamma })
}

/// Per-link NRL scale `μ_k = exp(Σ_j γ_j w_j(k))`. A coefficient named
/// `link_size` reads the OD-specific `link_size` vector.
pub fn nrl_scale(
    features: &FeatureTensor,
    params: &ModelParams,
    link_count: usize,
    link_size: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let mut expo = vec![0.0; link_count];
    for (name, &coef) in params.nrl_names.iter().zip(&params.nrl_gamma) {
        if coef == 0.0 {
            continue;
        }
        let attr = if name == "link_size" {
            link_size.ok_or_else(|| {
                Error::InvalidConfig("NRL scale uses link_size but none was supplied".into())
            })?
        } else {
            features.link_attribute(name).ok_or_else(|| {
                Error::InvalidConfig(format!("NRL scale attribute '{name}' not found"))
            })?
        };
        if attr.len() != link_count {
            return Err(Error::Dimension(format!("attribute '{name}' has wrong length")));
        }
        for (x, w) in expo.iter_mut().zip(attr) {
            *x += coef * w;
        }
    }
    expo.into_iter()
        .enumerate()
        .map(|(k, x)| {
            let mu = exp(x);
            if mu.is_finite() && mu > 0.0 {
                Ok(mu)
            } else {
                Err(Error::NumericOverflow { layer: 0, detail: format!("scale of link {k} is {mu}") })
            }
        })
        .collect()
}

/// Closed-form `∂u(a|k)/∂v(a'|k')` for a one-layer residual model.
///
/// For ResDGCN-RL this is `1[(k,a)=(k',a')] − σ(S_ka) Π_kk' θ_a'a`; Res-RL
/// is the special case `Π = I`, so only `k = k'` pairs interact.
pub fn cross_effect_derivative(
    graph: &LinkGraph,
    field: &UtilityField,
    params: &ModelParams,
    prox: Option<&ProximitySet>,
    (k, a): (usize, usize),
    (k2, a2): (usize, usize),
) -> Result<f64> {
    for l in [k, a, k2, a2] {
        graph.check_link(l)?;
    }
    if params.kind.has_residual() && params.layers() > 1 {
        return Err(Error::Unsupported(
            "closed-form cross effect needs a single residual layer; use finite differences".into(),
        ));
    }
    let (Some(e), Some(_)) = (graph.edge_index(k, a), graph.edge_index(k2, a2)) else {
        return Ok(0.0);
    };
    let direct = if (k, a) == (k2, a2) { 1.0 } else { 0.0 };
    if !params.kind.has_residual() || params.layers() == 0 {
        return Ok(direct);
    }
    let pi = match params.kind {
        ModelKind::ResRl => {
            if k == k2 {
                1.0
            } else {
                0.0
            }
        }
        _ => prox
            .ok_or_else(|| Error::InvalidConfig("ResDGCN-RL needs proximities".into()))?
            .combined(k, k2, params.alpha, params.beta, params.gamma),
    };
    Ok(direct - sigmoid(field.pre_activation[0][e]) * pi * params.theta[0][(a2, a)])
}

/// The prefactor `(1 − 2e^{−g}) / (2e^{−g})` written in terms of the residual
/// utility of a one-layer model; equals `−σ(S)`.
pub fn cross_effect_prefactor(g: f64) -> f64 {
    let e = exp(-g);
    (1.0 - 2.0 * e) / (2.0 * e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::math::LN_2;
    use crate::network::build_proximities;

    fn toy() -> (LinkGraph, FeatureTensor) {
        let g = fixture::toy_graph();
        let f = fixture::toy_features(&g);
        (g, f)
    }

    #[test]
    fn toy_systematic_utility() {
        let (g, f) = toy();
        let p = ModelParams::new(ModelKind::Rl, &[("travel_time", -1.0)]);
        let v = systematic_utility(&f, &p).unwrap();
        let e = g.edge_index(fixture::toy_link("1-2"), fixture::toy_link("2-3")).unwrap();
        assert_eq!(v[e], -2.0);
        let zero = ModelParams::new(ModelKind::Rl, &[("travel_time", 0.0)]);
        assert!(systematic_utility(&f, &zero).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_form_two_features() {
        let g = LinkGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        let f = FeatureTensor::build(
            &g,
            vec![
                crate::FeatureSpec::new("a", "", crate::FeatureSource::Constant),
                crate::FeatureSpec::new("b", "", crate::FeatureSource::Link(vec![2.0, 2.0])),
            ],
        )
        .unwrap();
        let p = ModelParams::new(ModelKind::Rl, &[("a", -1.0), ("b", 0.5)]);
        assert_eq!(systematic_utility(&f, &p).unwrap(), vec![0.0]);
        let short = ModelParams::new(ModelKind::Rl, &[("a", -1.0)]);
        assert!(systematic_utility(&f, &short).is_err());
    }

    #[test]
    fn zero_theta_reverts_to_systematic() {
        let (g, f) = toy();
        let prox = build_proximities(&g);
        for kind in [ModelKind::ResRl, ModelKind::ResDgcnRl] {
            let p = ModelParams::new(kind, &[("travel_time", -0.7)]).with_zero_layers(2, 9);
            let v = systematic_utility(&f, &p).unwrap();
            let field = residual_forward(&g, v.clone(), &p, Some(&prox)).unwrap();
            assert_eq!(field.h, v);
            assert!(field.g.iter().all(|&x| x == 0.0));
            assert_eq!(field.hidden.len(), 2);
        }
    }

    #[test]
    fn zero_propagation_weights_give_no_residual() {
        let (g, f) = toy();
        let prox = build_proximities(&g);
        let mut p = ModelParams::new(ModelKind::ResDgcnRl, &[("travel_time", -1.0)]).with_zero_layers(1, 9);
        p.theta[0].fill(0.3);
        p.alpha = 0.0;
        p.beta = 0.0;
        p.gamma = 0.0;
        let v = systematic_utility(&f, &p).unwrap();
        let field = resdgcn_residual(&g, v.clone(), &p, &prox).unwrap();
        assert_eq!(field.h, v);
    }

    #[test]
    fn single_layer_term_at_ln3() {
        // k -> a with h(a'|k) θ_{a'a} = ln 3 gives a layer term of −ln 2.
        let g = LinkGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        let mut p = ModelParams::new(ModelKind::ResRl, &[]).with_zero_layers(1, 2);
        p.theta[0][(1, 1)] = 3f64.ln();
        let field = resrl_residual(&g, vec![1.0], &p).unwrap();
        assert!((field.g[0] + LN_2).abs() < 1e-15);
        assert!((field.pre_activation[0][0] - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn overflow_names_layer() {
        let g = LinkGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        let mut p = ModelParams::new(ModelKind::ResRl, &[]).with_zero_layers(2, 2);
        p.theta[1][(1, 1)] = f64::INFINITY;
        match resrl_residual(&g, vec![1.0], &p) {
            Err(Error::NumericOverflow { layer, .. }) => assert_eq!(layer, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nrl_scale_values() {
        let (g, f) = toy();
        let f = f.with_link_attribute("tt", vec![1.0; 9]);
        let p = ModelParams::new(ModelKind::Nrl, &[("travel_time", -1.0)]).with_nrl(&[("tt", 0.0)]);
        assert!(nrl_scale(&f, &p, 9, None).unwrap().iter().all(|&m| m == 1.0));
        let p = p.clone().with_nrl(&[("tt", 0.108)]);
        let mu = nrl_scale(&f, &p, 9, None).unwrap();
        assert!((mu[0] - 1.114).abs() < 5e-4);
        let p = p.with_nrl(&[("tt", -0.5)]);
        assert!(nrl_scale(&f, &p, 9, None).unwrap().iter().all(|&m| m > 0.0 && m < 1.0));
        let _ = g;
    }

    #[test]
    fn prefactor_matches_negative_sigmoid() {
        for &s in &[-3.0, -0.2, 0.0, 0.7, 4.0] {
            let g = residual_term(s);
            assert!((cross_effect_prefactor(g) + sigmoid(s)).abs() < 1e-12);
            assert!(g < LN_2);
        }
    }

    #[test]
    fn resrl_has_no_cross_link_effect() {
        let (g, f) = toy();
        let mut p = ModelParams::new(ModelKind::ResRl, &[("travel_time", -1.0)]).with_zero_layers(1, 9);
        p.theta[0].fill(0.2);
        let v = systematic_utility(&f, &p).unwrap();
        let field = resrl_residual(&g, v, &p).unwrap();
        let l = fixture::toy_link;
        let d = cross_effect_derivative(&g, &field, &p, None, (l("2-3"), l("3-5")), (l("2-4"), l("4-3")))
            .unwrap();
        assert_eq!(d, 0.0);
        p.theta[0].fill(0.0);
        let d = cross_effect_derivative(&g, &field, &p, None, (l("2-4"), l("4-3")), (l("2-4"), l("4-5")))
            .unwrap();
        assert_eq!(d, 0.0);
        let deep = p.clone().with_zero_layers(2, 9);
        assert!(cross_effect_derivative(&g, &field, &deep, None, (0, 1), (0, 1)).is_err());
    }
}
