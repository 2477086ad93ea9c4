//! Undirected simple graphs of agents and friendships.

mod edgelist;
mod export;
mod generators;
mod properties;

use std::collections::BTreeSet;

pub use edgelist::{load_edge_list, write_edge_list, EdgeListLoad};
pub use export::{export_graph, import_graph, ExportFormat};
pub use generators::{gen_erdos_renyi, gen_scale_free, gen_small_world};
pub use properties::{network_properties, NetworkProperties};

pub type NodeId = usize;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed {format} document: {message}")]
    Document { format: &'static str, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected graph without self-loops or parallel edges. Nodes are
/// `0..node_count`; adjacency lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
    labels: Option<Vec<String>>,
}

impl Graph {
    pub fn empty(node_count: usize) -> Self {
        Self { adjacency: vec![Vec::new(); node_count], edge_count: 0, labels: None }
    }

    /// Builds a graph from an edge iterator. Duplicate and reversed edges
    /// collapse; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::Parameter(format!("self-loop at node {u}")));
            }
            if u >= node_count || v >= node_count {
                return Err(GraphError::Parameter(format!("edge ({u}, {v}) out of range for {node_count} nodes")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self::from_canonical(node_count, &set))
    }

    pub(crate) fn from_canonical(node_count: usize, edges: &BTreeSet<(NodeId, NodeId)>) -> Self {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { adjacency, edge_count: edges.len(), labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.len() != self.node_count() {
            return Err(GraphError::Parameter(format!("{} labels for {} nodes", labels.len(), self.node_count())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges().collect()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}
