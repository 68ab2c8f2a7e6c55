//! Brute-force references. Everything here recomputes from scratch with a
//! general LU inverse and shares no update logic with the fast paths.

use std::collections::VecDeque;

use itertools::Itertools;

use crate::centrality::{EdgeScoreTable, EdgeSet, PairCounting, ScoreKind};
use crate::error::{Error, Result};
use crate::forest::dense_identity_plus_laplacian;
use crate::graph::{EdgeId, Graph, ResidualGraph};
use crate::par;

pub const DEFAULT_BUDGET: u128 = 2_000_000;
const NAIVE_LIMIT: usize = 500;
const BATCH: usize = 2048;

/// `n tr((I + L)^{-1}) - n` via LU.
pub(crate) fn dense_forest_index(g: &Graph) -> f64 {
    let n = g.node_count();
    let a = dense_identity_plus_laplacian(&ResidualGraph::full(g));
    let inv = a.try_inverse().expect("I + L is nonsingular");
    n as f64 * inv.trace() - n as f64
}

/// `C(m, k)`, saturating.
pub fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((m - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `k`-subset maximizing `C(S)`, by enumeration. Ties go to the
/// lexicographically smallest index tuple.
pub fn optimum_attack(g: &Graph, k: usize, budget: u128) -> Result<(EdgeSet, f64)> {
    let m = g.edge_count();
    crate::centrality::check_k(g, k)?;
    let required = binomial(m, k);
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let base = dense_forest_index(g);
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut combos = (0..m).combinations(k);
    loop {
        let batch: Vec<Vec<usize>> = combos.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let values = par::map_slice(&batch, |c| {
            let ids: Vec<EdgeId> = c.iter().copied().map(EdgeId).collect();
            let reduced = ResidualGraph::without(g, &ids).expect("distinct ids").to_graph();
            dense_forest_index(&reduced) - base
        });
        // Combinations arrive in lexicographic order, so strict improvement
        // keeps the earliest maximizer.
        for (c, v) in batch.into_iter().zip(values) {
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((c, v));
            }
        }
    }
    let (ids, value) = best.expect("at least the empty combination");
    let ids: Vec<EdgeId> = ids.into_iter().map(EdgeId).collect();
    Ok((EdgeSet::from_ids(g, &ids)?, value))
}

/// `ρ(G) = Σ_{i<j} (ω_ii + ω_jj - 2 ω_ij)` summed pair by pair.
pub fn naive_forest_index(g: &Graph) -> Result<f64> {
    let n = g.node_count();
    if n > NAIVE_LIMIT {
        return Err(Error::Capacity {
            nodes: n,
            limit: NAIVE_LIMIT,
        });
    }
    let a = dense_identity_plus_laplacian(&ResidualGraph::full(g));
    let o = a.try_inverse().expect("I + L is nonsingular");
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += o[(i, i)] + o[(j, j)] - 2.0 * o[(i, j)];
        }
    }
    Ok(total)
}

/// `C(e)` for every edge by deleting it and inverting again.
pub fn exhaustive_edge_gains(g: &Graph) -> Vec<(EdgeId, f64)> {
    let base = dense_forest_index(g);
    let ids: Vec<EdgeId> = g.edge_ids().collect();
    let vals = par::map_slice(&ids, |&e| {
        dense_forest_index(&ResidualGraph::without(g, &[e]).expect("valid id").to_graph()) - base
    });
    ids.into_iter().zip(vals).collect()
}

/// Betweenness by listing every shortest path explicitly. Exponential in the
/// worst case; meant for graphs with a handful of nodes.
pub fn enumerated_betweenness(g: &Graph, counting: PairCounting) -> EdgeScoreTable {
    let n = g.node_count();
    let mut score = vec![0.0; g.edge_count()];
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for t in 0..n {
            let include = match counting {
                PairCounting::Unordered => t > s,
                PairCounting::Ordered => t != s,
            };
            if !include || dist[t] == usize::MAX {
                continue;
            }
            let mut paths: Vec<Vec<EdgeId>> = Vec::new();
            let mut stack = vec![(s, Vec::new())];
            while let Some((v, path)) = stack.pop() {
                if v == t {
                    paths.push(path);
                    continue;
                }
                for &(w, e) in g.neighbors(v) {
                    if dist[w] == dist[v] + 1 && dist[w] <= dist[t] {
                        let mut p = path.clone();
                        p.push(e);
                        stack.push((w, p));
                    }
                }
            }
            let share = 1.0 / paths.len() as f64;
            for p in paths {
                for e in p {
                    score[e.0] += share;
                }
            }
        }
    }
    EdgeScoreTable {
        kind: ScoreKind::Betweenness,
        scores: g.edge_ids().map(|e| (e, score[e.0])).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::edge_betweenness;
    use crate::forest::ForestState;
    use crate::generators;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(15, 3), 455);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn naive_index_examples() {
        assert!((naive_forest_index(&generators::complete(4)).unwrap() - 2.4).abs() < 1e-12);
        assert!((naive_forest_index(&Graph::empty(5)).unwrap() - 20.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = generators::random_connected(6, 9, &mut rng).unwrap();
        let a = naive_forest_index(&g).unwrap();
        let b = ForestState::new(&g).unwrap().forest_index();
        assert!((a - b).abs() <= 1e-8 * b);
        assert!(naive_forest_index(&generators::path(501)).is_err());
    }

    #[test]
    fn optimum_single_edge_matches_scan() {
        let g = generators::path(3);
        let (set, v) = optimum_attack(&g, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(set.len(), 1);
        let gains = exhaustive_edge_gains(&g);
        assert!((gains[0].1 - gains[1].1).abs() < 1e-12);
        assert!((v - gains[0].1).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let g = generators::complete(8);
        match optimum_attack(&g, 4, 1000) {
            Err(Error::Budget { required, budget }) => {
                assert_eq!(required, 20475);
                assert_eq!(budget, 1000);
            }
            other => panic!("{other:?}"),
        }
        let (empty, v) = optimum_attack(&g, 0, 1).unwrap();
        assert!(empty.is_empty());
        assert_eq!(v, 0.0);
    }

    #[test]
    fn brandes_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..40 {
            let n = rng.random_range(2..=8);
            let m = rng.random_range(0..=n * (n - 1) / 2);
            let g = generators::erdos_renyi(n, m, &mut rng).unwrap();
            for c in [PairCounting::Unordered, PairCounting::Ordered] {
                let fast = edge_betweenness(&g, c);
                let slow = enumerated_betweenness(&g, c);
                for ((_, a), (_, b)) in fast.scores.iter().zip(&slow.scores) {
                    assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
                }
            }
        }
    }
}
