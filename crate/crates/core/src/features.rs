//! Per-transition action features `x_q(a|k)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::network::LinkGraph;
use crate::{Error, Result};

/// Where the values of one feature come from.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSource {
    /// Attribute of the entered link: `x(a|k) = values[a]`.
    Link(Vec<f64>),
    /// `x(a|k) = 1` on every transition (per-link count constant).
    Constant,
    /// 1 when `a` returns to the tail node of `k`.
    UTurn,
    /// Explicit `(from, to, value)` triples; missing transitions are zero.
    Transition(Vec<(usize, usize, f64)>),
    /// OD-specific expected link flow, filled in per origin-destination pair.
    LinkSize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub unit: String,
    pub source: FeatureSource,
    /// Reject negative values (travel times).
    pub nonnegative: bool,
}

impl FeatureSpec {
    pub fn new(name: &str, unit: &str, source: FeatureSource) -> Self {
        Self { name: name.into(), unit: unit.into(), source, nonnegative: false }
    }

    pub fn nonnegative(mut self) -> Self {
        self.nonnegative = true;
        self
    }
}

/// Q feature rows, each aligned with the transitions of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    specs: Vec<FeatureSpec>,
    values: Vec<Vec<f64>>,
    link_size: Option<usize>,
    link_attributes: Vec<(String, Vec<f64>)>,
    edges: usize,
}

impl FeatureTensor {
    pub fn build(graph: &LinkGraph, specs: Vec<FeatureSpec>) -> Result<Self> {
        let n = graph.link_count();
        let mut values = Vec::with_capacity(specs.len());
        let mut link_size = None;
        for (q, spec) in specs.iter().enumerate() {
            let row: Vec<f64> = match &spec.source {
                FeatureSource::Link(v) => {
                    if v.len() != n {
                        return Err(Error::Dimension(format!(
                            "feature '{}' has {} link values, graph has {n} links",
                            spec.name,
                            v.len()
                        )));
                    }
                    graph.edges().map(|(_, a)| v[a]).collect()
                }
                FeatureSource::Constant => vec![1.0; graph.edge_count()],
                FeatureSource::UTurn => graph
                    .edges()
                    .map(|(k, a)| if graph.link(a).head == graph.link(k).tail { 1.0 } else { 0.0 })
                    .collect(),
                FeatureSource::Transition(triples) => {
                    let mut row = vec![0.0; graph.edge_count()];
                    for &(k, a, x) in triples {
                        graph.check_link(k)?;
                        graph.check_link(a)?;
                        // Transitions absent from this graph (removed links) are skipped.
                        if let Some(e) = graph.edge_index(k, a) {
                            row[e] = x;
                        }
                    }
                    row
                }
                FeatureSource::LinkSize => {
                    if link_size.is_some() {
                        return Err(Error::InvalidConfig("more than one link-size feature".into()));
                    }
                    link_size = Some(q);
                    vec![0.0; graph.edge_count()]
                }
            };
            if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig(format!("feature '{}' has value {bad}", spec.name)));
            }
            if spec.nonnegative && row.iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "feature '{}' must be nonnegative",
                    spec.name
                )));
            }
            values.push(row);
        }
        let link_attributes = specs
            .iter()
            .filter_map(|s| match &s.source {
                FeatureSource::Link(v) => Some((s.name.clone(), v.clone())),
                _ => None,
            })
            .collect();
        Ok(Self { specs, values, link_size, link_attributes, edges: graph.edge_count() })
    }

    /// Rebuilds the tensor for another graph over the same links (for
    /// instance after a link removal).
    pub fn for_graph(&self, graph: &LinkGraph) -> Result<Self> {
        let mut t = Self::build(graph, self.specs.clone())?;
        t.link_attributes = self.link_attributes.clone();
        Ok(t)
    }

    /// Adds a link attribute that is not itself a utility feature (for the
    /// NRL scale).
    pub fn with_link_attribute(mut self, name: &str, values: Vec<f64>) -> Self {
        self.link_attributes.retain(|(n, _)| n != name);
        self.link_attributes.push((name.into(), values));
        self
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.specs.iter().map(|s| s.name.as_str())
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// Values of feature `q` in edge order.
    pub fn values(&self, q: usize) -> &[f64] {
        &self.values[q]
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn link_size_index(&self) -> Option<usize> {
        self.link_size
    }

    pub fn link_attribute(&self, name: &str) -> Option<&[f64]> {
        self.link_attributes.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn masked_link_feature() {
        let g = fixture::toy_graph();
        let t = fixture::toy_features(&g);
        assert_eq!(t.len(), 1);
        let e = g.edge_index(fixture::toy_link("1-2"), fixture::toy_link("2-3")).unwrap();
        assert_eq!(t.values(0)[e], 2.0);
        assert_eq!(t.edge_count(), g.edge_count());
    }

    #[test]
    fn uturn_and_transition_sources() {
        // 0->1, 1->0, 1->2
        let g = LinkGraph::from_pairs(&[(0, 1), (1, 0), (1, 2)]).unwrap();
        let t = FeatureTensor::build(
            &g,
            vec![
                FeatureSpec::new("uturn", "", FeatureSource::UTurn),
                FeatureSpec::new("rt", "", FeatureSource::Transition(vec![(0, 2, 1.0)])),
                FeatureSpec::new("lc", "", FeatureSource::Constant),
            ],
        )
        .unwrap();
        let e01 = g.edge_index(0, 1).unwrap();
        let e02 = g.edge_index(0, 2).unwrap();
        assert_eq!(t.values(0)[e01], 1.0);
        assert_eq!(t.values(0)[e02], 0.0);
        assert_eq!(t.values(1)[e02], 1.0);
        assert!(t.values(2).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn negative_travel_time_rejected() {
        let g = LinkGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        let spec = FeatureSpec::new("tt", "min", FeatureSource::Link(vec![1.0, -1.0])).nonnegative();
        assert!(FeatureTensor::build(&g, vec![spec]).is_err());
    }
}
