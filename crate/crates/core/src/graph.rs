use std::collections::HashSet;

use crate::error::{Error, Result};

/// Undirected simple graph stored as an edge list with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    /// Validates and normalizes an edge list. Pairs may be given in either
    /// orientation; self-loops, duplicates and out-of-range indices are
    /// rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::with_label(0, n, edges)
    }

    pub(crate) fn with_label(
        label: usize,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let bad = |reason: String| Error::InvalidGraph {
            graph: label,
            reason,
        };
        if n == 0 {
            return Err(bad("graph has no nodes".into()));
        }
        if n > u32::MAX as usize {
            return Err(bad(format!("{n} nodes exceeds the u32 index range")));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(bad(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(bad(format!("self-loop at node {i}")));
            }
            let e = (i.min(j) as u32, i.max(j) as u32);
            if !seen.insert(e) {
                return Err(bad(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            out.push(e);
        }
        Ok(Self { n, edges: out })
    }

    /// Trusted constructor for samplers that emit each `i < j` pair at most once.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(edges.iter().all(|&(i, j)| i < j && (j as usize) < n));
        Self { n, edges }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                edges.push((i, j));
            }
        }
        Self { n, edges }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(i, j) in &self.edges {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        deg
    }

    /// Dense 0/1 adjacency matrix (row-major, `n × n`).
    pub fn adjacency(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for &(i, j) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            a[i * n + j] = 1.0;
            a[j * n + i] = 1.0;
        }
        a
    }

    /// Applies a node relabeling `new = perm[old]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let edges = self
            .edges
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (perm[i as usize] as u32, perm[j as usize] as u32);
                (a.min(b), a.max(b))
            })
            .collect();
        Self { n: self.n, edges }
    }
}

/// `M` graphs with disjoint node sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphCollection {
    graphs: Vec<Graph>,
}

impl GraphCollection {
    pub fn new(graphs: Vec<Graph>) -> Self {
        Self { graphs }
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn into_graphs(self) -> Vec<Graph> {
        self.graphs
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// `M`.
    pub fn graph_count(&self) -> usize {
        self.graphs.len()
    }

    /// `N = Σ n⁽ᵐ⁾`.
    pub fn total_nodes(&self) -> usize {
        self.graphs.iter().map(Graph::node_count).sum()
    }

    /// `S = Σ (n⁽ᵐ⁾)²`, the number of observed dyads including self-pairs.
    pub fn observed_dyads(&self) -> u64 {
        self.graphs
            .iter()
            .map(|g| (g.node_count() as u64).pow(2))
            .sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::node_count).collect()
    }

    pub fn max_size(&self) -> usize {
        self.graphs.iter().map(Graph::node_count).max().unwrap_or(0)
    }

    pub fn total_edges(&self) -> usize {
        self.graphs.iter().map(Graph::edge_count).sum()
    }
}

impl FromIterator<Graph> for GraphCollection {
    fn from_iter<T: IntoIterator<Item = Graph>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_edges() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(0, []).is_err());
    }

    #[test]
    fn normalizes_orientation() {
        let g = Graph::new(3, [(2, 0), (1, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2), (1, 2)]);
        assert_eq!(g.degrees(), vec![1, 1, 2]);
    }

    #[test]
    fn collection_totals() {
        let c = GraphCollection::new(vec![Graph::complete(4), Graph::empty(2), Graph::empty(1)]);
        assert_eq!(c.graph_count(), 3);
        assert_eq!(c.total_nodes(), 7);
        assert_eq!(c.observed_dyads(), 16 + 4 + 1);
        assert_eq!(c.total_edges(), 6);
        assert_eq!(c.max_size(), 4);
    }
}
