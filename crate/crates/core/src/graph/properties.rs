use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Graph, NodeId};

/// Structural summary of a network.
///
/// Path statistics cover the largest connected component only (ties go to
/// the component holding the smallest node id); `component_count` says how
/// many components there were.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkProperties {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_degree: f64,
    pub avg_path_length: f64,
    pub diameter: usize,
    pub avg_clustering_coefficient: f64,
    pub component_count: usize,
    pub largest_component_size: usize,
}

pub fn network_properties(g: &Graph) -> NetworkProperties {
    let n = g.node_count();
    let avg_degree = if n == 0 { 0.0 } else { 2.0 * g.edge_count() as f64 / n as f64 };
    let components = g.components();
    let largest = components.iter().fold(None::<&Vec<NodeId>>, |best, c| match best {
        Some(b) if b.len() >= c.len() => Some(b),
        _ => Some(c),
    });
    let (avg_path_length, diameter, largest_component_size) = match largest {
        Some(comp) => {
            let (avg, diam) = path_stats(g, comp);
            (avg, diam, comp.len())
        }
        None => (0.0, 0, 0),
    };
    NetworkProperties {
        node_count: n,
        edge_count: g.edge_count(),
        avg_degree,
        avg_path_length,
        diameter,
        avg_clustering_coefficient: avg_clustering(g),
        component_count: components.len(),
        largest_component_size,
    }
}

/// All-pairs BFS inside one component. Per-source sums are collected in
/// source order before adding, so the result does not depend on thread count.
fn path_stats(g: &Graph, comp: &[NodeId]) -> (f64, usize) {
    let k = comp.len();
    if k < 2 {
        return (0.0, 0);
    }
    let per_source: Vec<(u64, usize)> = comp
        .par_iter()
        .map_init(
            || (vec![usize::MAX; g.node_count()], Vec::with_capacity(k)),
            |(dist, queue), &s| bfs_from(g, s, dist, queue),
        )
        .collect();
    let total: u64 = per_source.iter().map(|&(sum, _)| sum).sum();
    let diameter = per_source.iter().map(|&(_, ecc)| ecc).max().unwrap_or(0);
    let pairs = (k as u64) * (k as u64 - 1);
    (total as f64 / pairs as f64, diameter)
}

fn bfs_from(g: &Graph, source: NodeId, dist: &mut [usize], queue: &mut Vec<NodeId>) -> (u64, usize) {
    queue.clear();
    queue.push(source);
    dist[source] = 0;
    let mut head = 0;
    let mut sum = 0u64;
    let mut ecc = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let du = dist[u];
        sum += du as u64;
        ecc = ecc.max(du);
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = du + 1;
                queue.push(v);
            }
        }
    }
    for &u in queue.iter() {
        dist[u] = usize::MAX;
    }
    (sum, ecc)
}

/// Mean local clustering coefficient; nodes of degree < 2 count as 0.
fn avg_clustering(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = (0..n).map(|u| local_clustering(g, u)).sum();
    total / n as f64
}

fn local_clustering(g: &Graph, u: NodeId) -> f64 {
    let ns = g.neighbors(u);
    let d = ns.len();
    if d < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (i, &a) in ns.iter().enumerate() {
        links += sorted_intersection_count(&ns[i + 1..], g.neighbors(a));
    }
    2.0 * links as f64 / (d * (d - 1)) as f64
}

fn sorted_intersection_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, path, star};

    #[test]
    fn triangle() {
        let p = network_properties(&complete(3));
        assert_eq!(p.avg_degree, 2.0);
        assert_eq!(p.diameter, 1);
        assert_eq!(p.avg_path_length, 1.0);
        assert_eq!(p.avg_clustering_coefficient, 1.0);
    }

    #[test]
    fn three_node_path() {
        // pairs: (0,1)=1, (1,2)=1, (0,2)=2 -> 4/3
        let p = network_properties(&path(3));
        assert!((p.avg_path_length - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.diameter, 2);
        assert_eq!(p.avg_clustering_coefficient, 0.0);
    }

    #[test]
    fn largest_component_only() {
        // triangle + isolated pair + isolated node
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let p = network_properties(&g);
        assert_eq!(p.component_count, 3);
        assert_eq!(p.largest_component_size, 3);
        assert_eq!(p.diameter, 1);
        assert_eq!(p.avg_path_length, 1.0);
        assert!((p.avg_clustering_coefficient - 0.5).abs() < 1e-15);
    }

    #[test]
    fn star_clustering_is_zero() {
        let p = network_properties(&star(4));
        assert_eq!(p.avg_clustering_coefficient, 0.0);
        assert_eq!(p.diameter, 2);
        assert_eq!(p.avg_degree, 1.6);
    }

    #[test]
    fn single_node() {
        let p = network_properties(&Graph::empty(1));
        assert_eq!((p.avg_path_length, p.diameter, p.avg_degree), (0.0, 0, 0.0));
    }
}
