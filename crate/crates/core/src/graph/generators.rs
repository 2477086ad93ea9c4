use std::collections::BTreeSet;

use super::{Graph, GraphError, NodeId};
use crate::rng::{self, SimRng};

/// G(n, p): every unordered pair is an edge independently with probability
/// `p`. Pairs are visited in lexicographic order, one uniform draw each.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Parameter("erdos-renyi needs n >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::Parameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng::unit(&mut rng) < p {
                edges.insert((u, v));
            }
        }
    }
    Ok(Graph::from_canonical(n, &edges))
}

/// Barabási–Albert preferential attachment.
///
/// Starts from `m` isolated nodes; each later node attaches to `m` distinct
/// existing nodes chosen with probability proportional to degree, where a
/// degree-0 node weighs as 1. The result has exactly `m * (n - m)` edges.
pub fn gen_scale_free(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    if m == 0 || m >= n {
        return Err(GraphError::Parameter(format!("scale-free needs 1 <= m < n (m={m}, n={n})")));
    }
    let mut rng = rng::seeded(seed);
    let mut degree = vec![0usize; n];
    let mut edges = BTreeSet::new();
    let mut chosen = Vec::with_capacity(m);
    for arriving in m..n {
        chosen.clear();
        for _ in 0..m {
            let target = weighted_pick(&mut rng, &degree[..arriving], &chosen);
            chosen.push(target);
        }
        for &target in &chosen {
            edges.insert((target, arriving));
            degree[target] += 1;
            degree[arriving] += 1;
        }
    }
    Ok(Graph::from_canonical(n, &edges))
}

fn weighted_pick(rng: &mut SimRng, degree: &[usize], exclude: &[NodeId]) -> NodeId {
    let weight = |u: usize| if exclude.contains(&u) { 0 } else { degree[u].max(1) };
    let total: usize = (0..degree.len()).map(weight).sum();
    let mut r = rng::uniform_index(rng, total);
    for u in 0..degree.len() {
        let w = weight(u);
        if r < w {
            return u;
        }
        r -= w;
    }
    unreachable!("weighted draw past the total weight")
}

/// Watts–Strogatz small world.
///
/// Ring lattice with `k / 2` neighbors per side, then for each offset
/// `j = 1..=k/2` and each node `u` in order, edge `(u, u + j)` is rewired
/// with probability `beta` to a uniformly chosen node that is neither `u`
/// nor already adjacent to `u`. Edge count stays `n * k / 2`.
pub fn gen_small_world(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph, GraphError> {
    if !k.is_multiple_of(2) {
        return Err(GraphError::Parameter(format!("ring-lattice degree k={k} must be even")));
    }
    if k >= n {
        return Err(GraphError::Parameter(format!("small-world needs k < n (k={k}, n={n})")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(GraphError::Parameter(format!("rewire probability {beta} outside [0, 1]")));
    }
    let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    let mut rng = rng::seeded(seed);
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng::unit(&mut rng) >= beta {
                continue;
            }
            // lattice edge may already have been rewired away
            if !adj[u].contains(&v) || adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng::uniform_index(&mut rng, n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges: BTreeSet<(NodeId, NodeId)> =
        adj.iter().enumerate().flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v))).collect();
    Ok(Graph::from_canonical(n, &edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::network_properties;

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(gen_erdos_renyi(5, 0.0, 7).unwrap().edge_count(), 0);
        let k4 = gen_erdos_renyi(4, 1.0, 1).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(network_properties(&k4).avg_clustering_coefficient, 1.0);
    }

    #[test]
    fn erdos_renyi_rejects_bad_probability() {
        assert!(gen_erdos_renyi(10, 1.5, 0).is_err());
        assert!(gen_erdos_renyi(10, -0.1, 0).is_err());
        assert!(gen_erdos_renyi(10, f64::NAN, 0).is_err());
        assert!(gen_erdos_renyi(0, 0.5, 0).is_err());
    }

    #[test]
    fn erdos_renyi_is_seed_deterministic() {
        let a = gen_erdos_renyi(60, 0.1, 99).unwrap();
        assert_eq!(a, gen_erdos_renyi(60, 0.1, 99).unwrap());
        assert_ne!(a, gen_erdos_renyi(60, 0.1, 100).unwrap());
    }

    #[test]
    fn scale_free_edge_count() {
        for seed in 0..5 {
            let g = gen_scale_free(100, 4, seed).unwrap();
            assert_eq!(g.edge_count(), 384);
            assert!((network_properties(&g).avg_degree - 7.68).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_free_minimal_instance() {
        let g = gen_scale_free(2, 1, 3).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn scale_free_heavy_tail() {
        let g = gen_scale_free(50, 3, 11).unwrap();
        let mut deg = g.degrees();
        deg.sort_unstable();
        let median = (deg[24] + deg[25]) as f64 / 2.0;
        assert!(*deg.last().unwrap() as f64 > median, "max {:?} median {median}", deg.last());
    }

    #[test]
    fn scale_free_rejects_m_at_least_n() {
        assert!(gen_scale_free(4, 4, 0).is_err());
        assert!(gen_scale_free(4, 0, 0).is_err());
    }

    #[test]
    fn small_world_edge_count_is_invariant() {
        for seed in 0..10 {
            for beta in [0.0, 0.1, 0.3, 0.7, 1.0] {
                let g = gen_small_world(100, 4, beta, seed).unwrap();
                assert_eq!(g.edge_count(), 200);
            }
        }
    }

    #[test]
    fn small_world_lattice_clustering() {
        // closed form for the unrewired ring lattice: 3(k-2) / (4(k-1))
        let k = 4.0;
        let expected = 3.0 * (k - 2.0) / (4.0 * (k - 1.0));
        let g = gen_small_world(100, 4, 0.0, 5).unwrap();
        assert!((network_properties(&g).avg_clustering_coefficient - expected).abs() < 1e-12);
        assert_eq!(expected, 0.5);
    }

    #[test]
    fn small_world_cycle() {
        let g = gen_small_world(6, 2, 0.0, 1).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(network_properties(&g).diameter, 3);
    }

    #[test]
    fn small_world_parameter_errors() {
        assert!(gen_small_world(10, 3, 0.1, 0).is_err());
        assert!(gen_small_world(4, 4, 0.1, 0).is_err());
        assert!(gen_small_world(10, 2, 2.0, 0).is_err());
    }
}
