use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use super::{Graph, GraphError, NodeId};

/// Result of reading a SNAP-style edge list.
#[derive(Debug, Clone)]
pub struct EdgeListLoad {
    pub graph: Graph,
    /// Original id of each contiguous node, in first-seen order.
    pub original_ids: Vec<u64>,
    pub self_loops_dropped: usize,
    pub duplicate_edges: usize,
}

/// Reads whitespace-separated `u v` pairs, one per line. Blank lines and
/// lines starting with `#` are skipped. Ids are remapped to `0..n` in
/// first-seen order; a self-loop line is dropped and does not introduce its
/// node.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<EdgeListLoad, GraphError> {
    let mut index: HashMap<u64, NodeId> = HashMap::new();
    let mut original_ids = Vec::new();
    let mut edges = BTreeSet::new();
    let mut self_loops_dropped = 0;
    let mut duplicate_edges = 0;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected two node ids, got {trimmed:?}"),
                })
            }
        };
        let parse = |tok: &str| {
            tok.parse::<u64>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("node id {tok:?} is not a non-negative integer"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == b {
            self_loops_dropped += 1;
            continue;
        }
        let mut intern = |id: u64| {
            *index.entry(id).or_insert_with(|| {
                original_ids.push(id);
                original_ids.len() - 1
            })
        };
        let (u, v) = (intern(a), intern(b));
        if !edges.insert((u.min(v), u.max(v))) {
            duplicate_edges += 1;
        }
    }

    Ok(EdgeListLoad {
        graph: Graph::from_canonical(original_ids.len(), &edges),
        original_ids,
        self_loops_dropped,
        duplicate_edges,
    })
}

/// Writes one `u v` line per edge (`u < v`, lexicographic order) after a
/// `#` header giving the node and edge counts.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# nodes: {} edges: {}", graph.node_count(), graph.edge_count())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}
