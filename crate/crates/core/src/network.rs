//! Directed road network at the link level.
//!
//! Links are the states of the route choice process: the adjacency `A` is
//! link-to-link, with `A[k][a] = 1` when link `a` leaves the node where link
//! `k` ends. Proximity matrices are built over the same link graph.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::DenseMatrix;
use crate::math::sqrt;
use crate::{Error, Result};

/// A directed link between two (dense) node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub tail: usize,
    pub head: usize,
}

/// Link graph with a CSR view of the transitions.
///
/// Transitions ("edges") are numbered in row-major order of `A`; per-transition
/// quantities such as utilities are stored as `Vec<f64>` in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGraph {
    links: Vec<Link>,
    node_count: usize,
    removed: Vec<bool>,
    succ_offsets: Vec<usize>,
    succ: Vec<usize>,
    pred_offsets: Vec<usize>,
    pred: Vec<usize>,
    /// Edge index of each entry of `pred`.
    pred_edge: Vec<usize>,
}

impl LinkGraph {
    /// Builds the graph; node indices must be `< node_count`. Loop links are
    /// rejected.
    pub fn new(node_count: usize, links: Vec<Link>) -> Result<Self> {
        for (i, l) in links.iter().enumerate() {
            if l.tail >= node_count || l.head >= node_count {
                return Err(Error::Dimension(format!(
                    "link {i} references node outside 0..{node_count}"
                )));
            }
            if l.tail == l.head {
                return Err(Error::InvalidConfig(format!(
                    "link {i} is a loop on node {}",
                    l.tail
                )));
            }
        }
        let removed = vec![false; links.len()];
        Ok(Self::build(node_count, links, removed))
    }

    /// Convenience constructor from `(tail, head)` pairs with
    /// `node_count = max id + 1`.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let n = pairs.iter().map(|&(t, h)| t.max(h) + 1).max().unwrap_or(0);
        Self::new(n, pairs.iter().map(|&(tail, head)| Link { tail, head }).collect())
    }

    fn build(node_count: usize, links: Vec<Link>, removed: Vec<bool>) -> Self {
        let n = links.len();
        let mut out_of_node: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for (a, l) in links.iter().enumerate() {
            if !removed[a] {
                out_of_node[l.tail].push(a);
            }
        }
        let mut succ_offsets = Vec::with_capacity(n + 1);
        let mut succ = Vec::new();
        succ_offsets.push(0);
        for (k, l) in links.iter().enumerate() {
            if !removed[k] {
                succ.extend(out_of_node[l.head].iter().copied().filter(|&a| a != k));
            }
            succ_offsets.push(succ.len());
        }
        let mut indeg = vec![0usize; n];
        for &a in &succ {
            indeg[a] += 1;
        }
        let mut pred_offsets = vec![0usize; n + 1];
        for a in 0..n {
            pred_offsets[a + 1] = pred_offsets[a] + indeg[a];
        }
        let mut fill = pred_offsets.clone();
        let mut pred = vec![0usize; succ.len()];
        let mut pred_edge = vec![0usize; succ.len()];
        for k in 0..n {
            for e in succ_offsets[k]..succ_offsets[k + 1] {
                let a = succ[e];
                pred[fill[a]] = k;
                pred_edge[fill[a]] = e;
                fill[a] += 1;
            }
        }
        Self { links, node_count, removed, succ_offsets, succ, pred_offsets, pred, pred_edge }
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, k: usize) -> Link {
        self.links[k]
    }

    pub fn is_removed(&self, k: usize) -> bool {
        self.removed[k]
    }

    /// Number of transitions (nonzeros of `A`).
    pub fn edge_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, k: usize) -> &[usize] {
        &self.succ[self.succ_offsets[k]..self.succ_offsets[k + 1]]
    }

    pub fn predecessors(&self, a: usize) -> &[usize] {
        &self.pred[self.pred_offsets[a]..self.pred_offsets[a + 1]]
    }

    /// Edge indices of the transitions leaving `k`.
    pub fn edge_range(&self, k: usize) -> core::ops::Range<usize> {
        self.succ_offsets[k]..self.succ_offsets[k + 1]
    }

    /// Edge indices of the transitions entering `a`, paired with their source.
    pub fn incoming(&self, a: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.pred_offsets[a]..self.pred_offsets[a + 1];
        self.pred[r.clone()].iter().copied().zip(self.pred_edge[r].iter().copied())
    }

    /// `(from, to)` of every transition in edge order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.link_count()).flat_map(move |k| self.successors(k).iter().map(move |&a| (k, a)))
    }

    /// Source link of each edge, in edge order.
    pub fn edge_sources(&self) -> Vec<usize> {
        self.edges().map(|(k, _)| k).collect()
    }

    pub fn edge_index(&self, k: usize, a: usize) -> Option<usize> {
        let row = self.successors(k);
        row.binary_search(&a).ok().map(|i| self.succ_offsets[k] + i)
    }

    pub fn has_transition(&self, k: usize, a: usize) -> bool {
        k < self.link_count() && a < self.link_count() && self.edge_index(k, a).is_some()
    }

    pub fn check_link(&self, k: usize) -> Result<()> {
        if k < self.link_count() {
            Ok(())
        } else {
            Err(Error::InvalidLink { index: k, link_count: self.link_count() })
        }
    }

    /// The binary adjacency matrix `A`.
    pub fn adjacency(&self) -> DenseMatrix {
        let n = self.link_count();
        let mut a = DenseMatrix::zeros(n, n);
        for (k, j) in self.edges() {
            a[(k, j)] = 1.0;
        }
        a
    }

    /// Expands per-edge values into a dense `|V|×|V|` matrix, zero off-mask.
    pub fn to_dense(&self, values: &[f64]) -> DenseMatrix {
        let n = self.link_count();
        let mut m = DenseMatrix::zeros(n, n);
        for (e, (k, a)) in self.edges().enumerate() {
            m[(k, a)] = values[e];
        }
        m
    }

    /// Gathers the on-mask entries of a dense matrix in edge order.
    pub fn gather(&self, m: &DenseMatrix) -> Vec<f64> {
        self.edges().map(|(k, a)| m[(k, a)]).collect()
    }

    /// Copy of the graph with `link` disabled: its row and column of `A` are
    /// zeroed but it keeps its index.
    pub fn remove_link(&self, link: usize) -> Result<LinkGraph> {
        self.check_link(link)?;
        let mut removed = self.removed.clone();
        removed[link] = true;
        Ok(Self::build(self.node_count, self.links.clone(), removed))
    }

    /// Links from which `destination` can be reached (including itself).
    pub fn reaches(&self, destination: usize) -> Vec<bool> {
        let mut seen = vec![false; self.link_count()];
        if destination >= self.link_count() {
            return seen;
        }
        let mut queue = VecDeque::new();
        seen[destination] = true;
        queue.push_back(destination);
        while let Some(a) = queue.pop_front() {
            for &k in self.predecessors(a) {
                if !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        seen
    }

    /// Whether the transition graph has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let n = self.link_count();
        let mut indeg: Vec<usize> = (0..n).map(|a| self.predecessors(a).len()).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&a| indeg[a] == 0).collect();
        let mut visited = 0;
        while let Some(k) = stack.pop() {
            visited += 1;
            for &a in self.successors(k) {
                indeg[a] -= 1;
                if indeg[a] == 0 {
                    stack.push(a);
                }
            }
        }
        visited == n
    }
}

/// One stored nonzero of the union sparsity pattern of the proximities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximityEntry {
    pub col: usize,
    pub first: f64,
    pub second_in: f64,
    pub second_out: f64,
}

/// Normalised first-order and second-order (in/out) link proximities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximitySet {
    pub first: DenseMatrix,
    pub second_in: DenseMatrix,
    pub second_out: DenseMatrix,
    offsets: Vec<usize>,
    entries: Vec<ProximityEntry>,
}

impl ProximitySet {
    pub fn dim(&self) -> usize {
        self.first.rows()
    }

    /// Nonzeros of row `k` of any of the three matrices.
    pub fn row_entries(&self, k: usize) -> &[ProximityEntry] {
        &self.entries[self.offsets[k]..self.offsets[k + 1]]
    }

    /// `(αZ_F + βZ_in + γZ_out)[k][j]`.
    pub fn combined(&self, k: usize, j: usize, alpha: f64, beta: f64, gamma: f64) -> f64 {
        alpha * self.first[(k, j)] + beta * self.second_in[(k, j)] + gamma * self.second_out[(k, j)]
    }
}

/// Raw (unnormalised) proximities `A_F`, `A_S_in`, `A_S_out`.
pub fn raw_proximities(g: &LinkGraph) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let n = g.link_count();
    let mut first = DenseMatrix::zeros(n, n);
    for (k, a) in g.edges() {
        first[(k, a)] = 1.0;
        first[(a, k)] = 1.0;
    }
    let mut s_in = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let preds = g.predecessors(k);
        if preds.is_empty() {
            continue;
        }
        let w = 1.0 / preds.len() as f64;
        for &i in preds {
            for &j in preds {
                s_in[(i, j)] += w;
            }
        }
    }
    let mut s_out = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let succ = g.successors(k);
        if succ.is_empty() {
            continue;
        }
        let w = 1.0 / succ.len() as f64;
        for &i in succ {
            for &j in succ {
                s_out[(i, j)] += w;
            }
        }
    }
    (first, s_in, s_out)
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` with `D̃` the row sums of `A + I`.
pub fn normalize_with_self_loops(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut t = a.clone();
    for i in 0..n {
        t[(i, i)] += 1.0;
    }
    let d: Vec<f64> = (0..n).map(|i| 1.0 / sqrt(t.row(i).iter().sum::<f64>())).collect();
    for i in 0..n {
        let di = d[i];
        for (j, x) in t.row_mut(i).iter_mut().enumerate() {
            if *x != 0.0 {
                *x *= di * d[j];
            }
        }
    }
    t
}

/// Builds `Z_F`, `Z_S_in`, `Z_S_out` for the link graph.
pub fn build_proximities(g: &LinkGraph) -> ProximitySet {
    let (f, si, so) = raw_proximities(g);
    let first = normalize_with_self_loops(&f);
    let second_in = normalize_with_self_loops(&si);
    let second_out = normalize_with_self_loops(&so);
    let n = g.link_count();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut entries = Vec::new();
    offsets.push(0);
    for k in 0..n {
        let (rf, ri, ro) = (first.row(k), second_in.row(k), second_out.row(k));
        for j in 0..n {
            if rf[j] != 0.0 || ri[j] != 0.0 || ro[j] != 0.0 {
                entries.push(ProximityEntry { col: j, first: rf[j], second_in: ri[j], second_out: ro[j] });
            }
        }
        offsets.push(entries.len());
    }
    ProximitySet { first, second_in, second_out, offsets, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn toy_adjacency_has_eleven_transitions() {
        let g = fixture::toy_graph();
        assert_eq!(g.link_count(), 9);
        assert_eq!(g.edge_count(), 11);
        let expected = [
            ("0-1", "1-2"), ("0-1", "1-5"), ("1-2", "2-3"), ("1-2", "2-4"), ("2-3", "3-5"),
            ("2-4", "4-3"), ("2-4", "4-5"), ("4-3", "3-5"), ("3-5", "5-6"), ("4-5", "5-6"),
            ("1-5", "5-6"),
        ];
        for (k, a) in expected {
            assert!(g.has_transition(fixture::toy_link(k), fixture::toy_link(a)), "{k} -> {a}");
        }
        for (k, a) in g.edges() {
            assert_eq!(g.link(k).head, g.link(a).tail);
            assert_ne!(k, a);
        }
    }

    #[test]
    fn single_link_has_empty_adjacency() {
        let g = LinkGraph::from_pairs(&[(0, 1)]).unwrap();
        assert_eq!(g.adjacency(), DenseMatrix::zeros(1, 1));
    }

    #[test]
    fn loop_link_rejected() {
        assert!(LinkGraph::from_pairs(&[(0, 0)]).is_err());
    }

    #[test]
    fn removing_4_5_drops_two_transitions_and_is_idempotent() {
        let g = fixture::toy_graph();
        let l45 = fixture::toy_link("4-5");
        let r = g.remove_link(l45).unwrap();
        assert_eq!(r.edge_count(), g.edge_count() - 2);
        assert!(!r.has_transition(fixture::toy_link("2-4"), l45));
        assert!(!r.has_transition(l45, fixture::toy_link("5-6")));
        assert_eq!(r.link_count(), g.link_count());
        let rr = r.remove_link(l45).unwrap();
        assert_eq!(rr, r);
        assert!(g.remove_link(9).is_err());
    }

    #[test]
    fn two_link_chain_proximity() {
        let g = LinkGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        let (f, _, _) = raw_proximities(&g);
        assert_eq!(f.to_rows(), alloc::vec![alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.0]]);
        let p = build_proximities(&g);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.first[(i, j)] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn no_transitions_gives_identity() {
        let g = LinkGraph::from_pairs(&[(0, 1), (2, 3), (4, 5)]).unwrap();
        let p = build_proximities(&g);
        let id = DenseMatrix::identity(3);
        assert_eq!(p.first, id);
        assert_eq!(p.second_in, id);
        assert_eq!(p.second_out, id);
    }

    #[test]
    fn toy_outgoing_pair_has_positive_second_out() {
        let g = fixture::toy_graph();
        let (_, _, so) = raw_proximities(&g);
        let (a, b) = (fixture::toy_link("2-3"), fixture::toy_link("2-4"));
        assert!((so[(a, b)] - 0.5).abs() < 1e-15);
        assert!(build_proximities(&g).second_out[(a, b)] > 0.0);
    }

    #[test]
    fn reachability_after_removal() {
        let g = fixture::toy_graph();
        let d = fixture::toy_link("5-6");
        assert!(g.reaches(d).iter().all(|&r| r));
        let r = g.remove_link(fixture::toy_link("4-5")).unwrap();
        let reach = r.reaches(d);
        assert!(!reach[fixture::toy_link("4-5")]);
        assert!(reach[fixture::toy_link("0-1")]);
        assert!(g.is_acyclic());
    }
}
