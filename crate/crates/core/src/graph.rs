//! Simple undirected graphs and summary statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::ClusterAssignment;

/// A simple undirected graph stored as a sorted list of `(u, v)` pairs with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list, rejecting self-loops,
    /// duplicates and out-of-range endpoints. Endpoints are reordered so that
    /// `u < v` and the list is sorted lexicographically.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop at node {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            out.push((u, v));
        }
        out.sort_unstable();
        if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Graph { n, edges: out })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
        }
    }

    /// Caller guarantees the list is already canonical.
    pub(crate) fn from_sorted_unchecked(n: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(u, v)| u < v && v < n));
        Graph { n, edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::from_graph(self)
    }

    /// Returns the graph with node `i` renamed to `perm[i]`.
    pub fn relabel_nodes(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.n,
            });
        }
        Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }
}

/// Compressed neighbor lists. Neighbors of each node are sorted ascending.
#[derive(Clone, Debug)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    fn from_graph(g: &Graph) -> Self {
        let deg = g.degrees();
        let mut offsets = Vec::with_capacity(g.n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..g.n].to_vec();
        let mut targets = vec![0; offsets[g.n]];
        for &(u, v) in &g.edges {
            targets[fill[u]] = v;
            fill[u] += 1;
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..g.n {
            targets[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Adjacency { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphStats {
    pub average_degree: f64,
    /// `degree_histogram[d]` is the number of nodes with degree `d`.
    pub degree_histogram: Vec<usize>,
    /// Fraction of edges whose endpoints share a cluster; 0 for an edgeless graph.
    pub within_block_fraction: f64,
    /// Symmetric k×k edge counts; the diagonal holds within-block edges.
    pub block_pair_counts: Vec<Vec<usize>>,
}

pub fn graph_stats(graph: &Graph, assignment: &ClusterAssignment) -> Result<GraphStats> {
    if assignment.labels().len() != graph.node_count() {
        return Err(Error::LengthMismatch {
            left: assignment.labels().len(),
            right: graph.node_count(),
        });
    }
    let k = assignment.k();
    let labels = assignment.labels();
    let degrees = graph.degrees();
    let max_deg = degrees.iter().copied().max().unwrap_or(0);
    let mut degree_histogram = vec![0; max_deg + 1];
    for &d in &degrees {
        degree_histogram[d] += 1;
    }
    let mut counts = vec![vec![0usize; k]; k];
    let mut within = 0usize;
    for &(u, v) in graph.edges() {
        let (a, b) = (labels[u], labels[v]);
        if a == b {
            within += 1;
            counts[a][a] += 1;
        } else {
            counts[a][b] += 1;
            counts[b][a] += 1;
        }
    }
    let m = graph.edge_count();
    Ok(GraphStats {
        average_degree: if graph.node_count() == 0 {
            0.0
        } else {
            2.0 * m as f64 / graph.node_count() as f64
        },
        degree_histogram,
        within_block_fraction: if m == 0 { 0.0 } else { within as f64 / m as f64 },
        block_pair_counts: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_edges() {
        let g = Graph::new(4, [(3, 1), (0, 2), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3)]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(Graph::new(3, [(1, 1)]), Err(Error::Validation(_))));
        assert!(matches!(Graph::new(3, [(0, 3)]), Err(Error::Validation(_))));
        assert!(matches!(
            Graph::new(3, [(0, 1), (1, 0)]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn adjacency_lists_are_symmetric() {
        let g = Graph::new(4, [(0, 1), (0, 2), (2, 3)]).unwrap();
        let adj = g.adjacency();
        assert_eq!(adj.neighbors(0), &[1, 2]);
        assert_eq!(adj.neighbors(2), &[0, 3]);
        assert_eq!(adj.degree(1), 1);
        assert_eq!(adj.degree(3), 1);
    }

    #[test]
    fn stats_of_empty_graph() {
        let a = ClusterAssignment::from_labels(vec![0, 1, 0, 1], 2).unwrap();
        let s = graph_stats(&Graph::empty(4), &a).unwrap();
        assert_eq!(s.average_degree, 0.0);
        assert_eq!(s.degree_histogram, vec![4]);
        assert_eq!(s.within_block_fraction, 0.0);
    }

    #[test]
    fn stats_count_block_pairs() {
        let a = ClusterAssignment::from_labels(vec![0, 0, 1, 1], 2).unwrap();
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let s = graph_stats(&g, &a).unwrap();
        assert_eq!(s.block_pair_counts, vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(s.within_block_fraction, 0.5);
        assert_eq!(s.average_degree, 2.0);
    }
}
