//! Small deterministic and seeded random graph families for tests, benches and
//! the CLI's synthetic inputs.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_unweighted(n, &edges).expect("path is simple")
}

/// Cycle on `n >= 3` nodes.
pub fn ring(n: usize) -> Graph {
    assert!(n >= 3, "ring needs at least 3 nodes");
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_unweighted(n, &edges).expect("ring is simple")
}

/// Cycle `0..n` plus one chord `(a, b)`; the chord is the last edge.
pub fn ring_with_chord(n: usize, a: usize, b: usize) -> Result<Graph> {
    let mut edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    edges.push((a, b));
    Graph::from_unweighted(n, &edges)
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::from_unweighted(n, &edges).expect("complete graph is simple")
}

/// Star with centre 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::from_unweighted(leaves + 1, &edges).expect("star is simple")
}

/// Two `K_size` cliques joined by a single bridge `(size - 1, size)`.
pub fn barbell(size: usize) -> Graph {
    let mut edges = Vec::new();
    for offset in [0, size] {
        for u in 0..size {
            for v in u + 1..size {
                edges.push((offset + u, offset + v));
            }
        }
    }
    edges.push((size - 1, size));
    Graph::from_unweighted(2 * size, &edges).expect("barbell is simple")
}

fn pair_from_index(n: usize, mut idx: usize) -> (usize, usize) {
    // Row-major enumeration of the strict upper triangle.
    let mut u = 0;
    loop {
        let row = n - 1 - u;
        if idx < row {
            return (u, u + 1 + idx);
        }
        idx -= row;
        u += 1;
    }
}

/// Uniform `G(n, m)` with unit weights. May be disconnected.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(Error::InvalidArgument(format!(
            "{m} edges do not fit in a simple graph on {n} nodes"
        )));
    }
    let mut chosen = sample(rng, pairs, m).into_vec();
    chosen.sort_unstable();
    let edges: Vec<_> = chosen.into_iter().map(|i| pair_from_index(n, i)).collect();
    Graph::from_unweighted(n, &edges)
}

/// Connected graph with `m >= n - 1` unit edges: a random spanning tree
/// (random recursive tree) topped up with uniformly chosen extra pairs.
pub fn random_connected<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if n == 0 || m + 1 < n || m > pairs {
        return Err(Error::InvalidArgument(format!(
            "cannot build a connected simple graph with n={n}, m={m}"
        )));
    }
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for v in 1..n {
        let u = rng.random_range(0..v);
        present.insert((u, v));
        edges.push((u, v));
    }
    if m - edges.len() > pairs / 2 {
        // Dense request: sample from the complement directly.
        let mut rest: Vec<(usize, usize)> = (0..pairs)
            .map(|i| pair_from_index(n, i))
            .filter(|p| !present.contains(p))
            .collect();
        let need = m - edges.len();
        let picks = sample(rng, rest.len(), need).into_vec();
        let mut picked: Vec<_> = picks.into_iter().map(|i| rest[i]).collect();
        picked.sort_unstable();
        rest.clear();
        edges.extend(picked);
    } else {
        while edges.len() < m {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            let p = (a.min(b), a.max(b));
            if present.insert(p) {
                edges.push(p);
            }
        }
    }
    Graph::from_unweighted(n, &edges)
}

/// Preferential attachment: each new node links to `per_node` distinct
/// existing nodes chosen proportionally to degree.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, per_node: usize, rng: &mut R) -> Result<Graph> {
    if per_node == 0 || n <= per_node {
        return Err(Error::InvalidArgument(format!(
            "need n > per_node >= 1, got n={n}, per_node={per_node}"
        )));
    }
    let mut edges = Vec::new();
    let mut targets: Vec<usize> = Vec::new();
    // Seed clique on per_node + 1 nodes.
    for u in 0..=per_node {
        for v in u + 1..=per_node {
            edges.push((u, v));
            targets.push(u);
            targets.push(v);
        }
    }
    for v in per_node + 1..n {
        let mut chosen = Vec::with_capacity(per_node);
        while chosen.len() < per_node {
            let t = targets[rng.random_range(0..targets.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for t in chosen {
            edges.push((t, v));
            targets.push(t);
            targets.push(v);
        }
    }
    Graph::from_unweighted(n, &edges)
}

/// Same topology with weights drawn uniformly from `[lo, hi)`.
pub fn with_random_weights<R: Rng + ?Sized>(g: &Graph, lo: f64, hi: f64, rng: &mut R) -> Graph {
    let edges: Vec<_> = g
        .edges()
        .iter()
        .map(|e| (e.u, e.v, rng.random_range(lo..hi)))
        .collect();
    Graph::from_edges(g.node_count(), &edges).expect("reweighting keeps the graph valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_index_covers_upper_triangle() {
        let n = 6;
        let all: Vec<_> = (0..15).map(|i| pair_from_index(n, i)).collect();
        let mut expect = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                expect.push((u, v));
            }
        }
        assert_eq!(all, expect);
    }

    #[test]
    fn random_connected_is_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(n, m) in &[(10, 9), (10, 15), (10, 45), (50, 120)] {
            let g = random_connected(n, m, &mut rng).unwrap();
            assert_eq!(g.edge_count(), m);
            assert_eq!(g.connected_components().len(), 1);
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(complete(5).edge_count(), 10);
        assert_eq!(barbell(4).edge_count(), 13);
        assert_eq!(star(3).degree(0), 3);
        assert_eq!(ring_with_chord(9, 0, 2).unwrap().edge_count(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ba = barabasi_albert(30, 2, &mut rng).unwrap();
        assert_eq!(ba.edge_count(), 3 + 2 * 27);
    }
}
