//! Spectral bounds on the submodularity ratio `γ` and curvature `α` of `C(S)`,
//! the greedy guarantee they imply, and a brute-force scan that measures both
//! on small graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, ResidualGraph};
use crate::oracle::dense_forest_index;
use crate::par;
use crate::sparse::{laplacian, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeBounds {
    pub gamma_lower: f64,
    pub alpha_upper: f64,
    pub ratio_lower: f64,
    pub lambda_max_estimate: f64,
    /// `false` when power iteration stalled and `n w_max` was used instead.
    pub converged: bool,
}

/// `(1/α)(1 - e^{-αγ})`, continuous at `α = 0` where it equals `γ`.
pub fn guarantee_ratio(alpha: f64, gamma: f64) -> f64 {
    if alpha < 1e-9 {
        gamma
    } else {
        -(-alpha * gamma).exp_m1() / alpha
    }
}

const POWER_TOLERANCE: f64 = 1e-6;
const POWER_MAX_ITERATIONS: usize = 20_000;

/// Largest Laplacian eigenvalue by power iteration from a seeded start.
///
/// Returns the Rayleigh quotient padded by the final residual norm, capped by
/// `cap`, and whether the iteration met the relative tolerance.
pub fn lambda_max(l: &CsrMatrix, cap: f64, seed: u64) -> (f64, bool) {
    let n = l.dim();
    if n == 0 || l.diagonal().iter().all(|&d| d == 0.0) {
        return (0.0, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; n];
    let normalize = |v: &mut [f64]| {
        let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if s > 0.0 {
            v.iter_mut().for_each(|a| *a /= s);
        }
        s
    };
    normalize(&mut x);
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        l.mul_vec(&x, &mut y);
        let theta: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let residual = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - theta * a).powi(2))
            .sum::<f64>()
            .sqrt();
        if (theta - prev).abs() <= POWER_TOLERANCE * theta.abs() {
            return ((theta + residual).min(cap), true);
        }
        prev = theta;
        if normalize(&mut y) == 0.0 {
            return (0.0, true);
        }
        std::mem::swap(&mut x, &mut y);
    }
    (cap, false)
}

/// Lower bound on `γ`, upper bound on `α` and the resulting greedy ratio.
pub fn compute_bounds(g: &Graph) -> GuaranteeBounds {
    let r = ResidualGraph::full(g);
    let cap = g.node_count() as f64 * g.max_weight().unwrap_or(0.0);
    let (lambda, converged) = lambda_max(&laplacian(&r), cap, 0x1A4B_DA);
    let gamma_lower = (1.0 / (1.0 + lambda)).powi(2);
    let alpha_upper = 1.0 - gamma_lower;
    GuaranteeBounds {
        gamma_lower,
        alpha_upper,
        ratio_lower: guarantee_ratio(alpha_upper, gamma_lower),
        lambda_max_estimate: lambda,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubmodularityScan {
    /// Smallest observed `Σ_{i ∈ S∖T} Θ_i(T) / Θ_S(T)`.
    pub min_gamma_observed: f64,
    /// Largest observed `1 - Θ_j(T∖j ∪ S) / Θ_j(T∖j)`.
    pub max_alpha_observed: f64,
    pub pairs_checked: usize,
    pub exhaustive: bool,
}

const EXHAUSTIVE_EDGES: usize = 8;
const MAX_SCAN_EDGES: usize = 12;

/// Measures `γ` and `α` directly from exact `C(S)` over subset pairs: all of
/// them when `m ≤ 8`, otherwise `trials` random pairs (`m ≤ 12`).
pub fn empirical_submodularity_scan(g: &Graph, trials: usize, seed: u64) -> Result<SubmodularityScan> {
    let m = g.edge_count();
    if m > MAX_SCAN_EDGES {
        return Err(Error::InvalidArgument(format!(
            "submodularity scan supports at most {MAX_SCAN_EDGES} edges, got {m}"
        )));
    }
    // ρ(G - mask) for every subset, each from its own inversion.
    let values = par::map_range(1usize << m, |mask| {
        let removed: Vec<EdgeId> = (0..m).filter(|i| mask >> i & 1 == 1).map(EdgeId).collect();
        let r = ResidualGraph::without(g, &removed).expect("distinct ids");
        dense_forest_index(&r.to_graph())
    });
    let f = |mask: usize| values[mask] - values[0];
    let theta = |s: usize, t: usize| f(s | t) - f(t);

    let mut scan = SubmodularityScan {
        min_gamma_observed: f64::INFINITY,
        max_alpha_observed: f64::NEG_INFINITY,
        pairs_checked: 0,
        exhaustive: m <= EXHAUSTIVE_EDGES,
    };
    let mut visit = |s: usize, t: usize| {
        scan.pairs_checked += 1;
        let whole = theta(s, t);
        let fresh = s & !t;
        if fresh != 0 && whole > 0.0 {
            let parts: f64 = (0..m).filter(|i| fresh >> i & 1 == 1).map(|i| theta(1 << i, t)).sum();
            scan.min_gamma_observed = scan.min_gamma_observed.min(parts / whole);
        }
        for j in (0..m).filter(|j| (t & !s) >> j & 1 == 1) {
            let bit = 1usize << j;
            let alone = theta(bit, t & !bit);
            let with = theta(bit, (t & !bit) | s);
            if alone > 0.0 {
                scan.max_alpha_observed = scan.max_alpha_observed.max(1.0 - with / alone);
            }
        }
    };
    let full = 1usize << m;
    if scan.exhaustive {
        for s in 0..full {
            for t in 0..full {
                visit(s, t);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let s = rng.random_range(0..full);
            let t = rng.random_range(0..full);
            visit(s, t);
        }
    }
    // No informative pair (e.g. m = 0): report the submodular/supermodular limits.
    if scan.min_gamma_observed.is_infinite() {
        scan.min_gamma_observed = 1.0;
    }
    if scan.max_alpha_observed.is_infinite() {
        scan.max_alpha_observed = 0.0;
    }
    Ok(scan)
}
