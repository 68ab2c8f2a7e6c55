#![allow(dead_code)]

use forest_attack::centrality::{edge_betweenness, fegc, EdgeSet, PairCounting};
use forest_attack::forest::ForestState;
use forest_attack::generators;
use forest_attack::{EdgeId, Graph};

/// Four nodes: a triangle {0, 1, 2} plus a pendant node 3 hanging off 0.
pub fn four_node_graph() -> Graph {
    Graph::from_unweighted(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct PairWitness {
    pub first: EdgeId,
    pub second: EdgeId,
    /// `C({first})`.
    pub alone: f64,
    /// `C({first, second}) - C({second})`.
    pub after_second: f64,
}

/// Every ordered edge pair of `g` with its two marginal gains.
pub fn ordered_pair_gains(g: &Graph) -> Vec<PairWitness> {
    let single = |e| fegc(g, &EdgeSet::from_ids(g, &[e]).unwrap()).unwrap();
    let mut out = Vec::new();
    for a in g.edge_ids() {
        for b in g.edge_ids().filter(|&b| b != a) {
            let pair = fegc(g, &EdgeSet::from_ids(g, &[a, b]).unwrap()).unwrap();
            out.push(PairWitness {
                first: a,
                second: b,
                alone: single(a),
                after_second: pair - single(b),
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct RingWitness {
    pub chord: (usize, usize),
    pub counting: PairCounting,
    pub strong: EdgeId,
    pub weak: EdgeId,
    pub strong_gain: f64,
    pub weak_gain: f64,
    pub betweenness: f64,
}

/// Searches 9-node rings with one chord for two edges whose single-edge
/// gains round to `strong` and `weak` (within `tol`) and whose betweenness
/// equals `target` under the given pair counting.
pub fn search_ring_chords(strong: f64, weak: f64, tol: f64, target: f64, counting: PairCounting) -> Vec<RingWitness> {
    let n = 9;
    let mut found = Vec::new();
    for a in 0..n {
        for b in a + 2..n {
            if a == 0 && b == n - 1 {
                continue;
            }
            let g = generators::ring_with_chord(n, a, b).unwrap();
            let state = ForestState::new(&g).unwrap();
            let gains: Vec<f64> = state.edge_gains().into_iter().map(|(_, r)| r.unwrap()).collect();
            let bc = edge_betweenness(&g, counting);
            for e1 in g.edge_ids() {
                for e2 in g.edge_ids() {
                    if e1 == e2 {
                        continue;
                    }
                    let b1 = bc.get(e1).unwrap();
                    let b2 = bc.get(e2).unwrap();
                    if (gains[e1.0] - strong).abs() <= tol
                        && (gains[e2.0] - weak).abs() <= tol
                        && (b1 - target).abs() < 1e-9
                        && (b2 - target).abs() < 1e-9
                    {
                        found.push(RingWitness {
                            chord: (a, b),
                            counting,
                            strong: e1,
                            weak: e2,
                            strong_gain: gains[e1.0],
                            weak_gain: gains[e2.0],
                            betweenness: b1,
                        });
                    }
                }
            }
        }
    }
    found
}
