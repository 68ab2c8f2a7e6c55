//! Random-projection estimates of single-edge gains without forming `Ω`.
//!
//! With `b_e = e_u - e_v` the two quantities behind the gain are
//!
//! * `ρ_e = ‖Ω b_e‖² + ‖W^{1/2} B Ω b_e‖²`
//! * `bᵀ Ω² b = ‖Ω b_e‖²`
//!
//! Both norms are preserved (up to `1 ± ε`) by a `p × n` projection `P` and a
//! `p × m` projection `Q`. The projected rows `P Ω` and `Q W^{1/2} B Ω` are found
//! by solving `2p` systems in `I + L`, after which every edge costs `O(p)`:
//!
//! `Ĉ(e) = n w ‖Ỹ b_e‖² / (1 - w (‖X̃ b_e‖² + ‖Ỹ b_e‖²))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, ResidualGraph};
use crate::par;
use crate::solver::{solve_generated, SolverConfig};
use crate::sparse::identity_plus_laplacian;

/// Estimated denominators at or below this are not trusted.
pub const SKETCH_DEGENERACY_THRESHOLD: f64 = 1e-9;

/// How the number of projection rows `p` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SketchDim {
    /// `⌈c log₂ n / ε²⌉`, capped at `min(m, n, cap)`.
    Practical { constant: f64, cap: usize },
    /// `⌈24 ln n / (ε/12)²⌉`, the worst-case union-bound value.
    Theoretical,
    Fixed(usize),
}

impl Default for SketchDim {
    fn default() -> Self {
        SketchDim::Practical {
            constant: 4.0,
            cap: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// Entries `±1/√p`.
    #[default]
    Rademacher,
    /// Entries `N(0, 1)/√p`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchConfig {
    pub epsilon: f64,
    pub dim: SketchDim,
    pub projection: Projection,
    pub solver: SolverConfig,
    /// Refuse sketches with more rows than this (theoretical mode overflows
    /// memory almost immediately).
    pub max_dim: usize,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.3,
            dim: SketchDim::default(),
            projection: Projection::default(),
            solver: SolverConfig::default(),
            max_dim: 100_000,
        }
    }
}

impl SketchConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )))
    }
}

/// Number of projection rows for a graph with `n` nodes and `m` edges.
pub fn sketch_dimension(n: usize, m: usize, epsilon: f64, dim: SketchDim) -> usize {
    let p = match dim {
        SketchDim::Practical { constant, cap } => {
            let raw = (constant * (n.max(1) as f64).log2() / (epsilon * epsilon)).ceil() as usize;
            raw.min(m).min(n).min(cap)
        }
        SketchDim::Theoretical => {
            let e = epsilon / 12.0;
            (24.0 * (n.max(1) as f64).ln() / (e * e)).ceil() as usize
        }
        SketchDim::Fixed(p) => p,
    };
    p.max(1)
}

/// Solver accuracies that make the sketch estimates provably `ε/3`-accurate.
///
/// These are reported for reference only: they shrink like `n^{-3}` and fall
/// below double precision on moderately large graphs.
pub fn theoretical_deltas(g: &ResidualGraph<'_>, epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let n = g.node_count() as f64;
    let w_max = g.max_weight().unwrap_or(1.0);
    let w_min = g.min_weight().unwrap_or(1.0);
    let lo = 1.0 - epsilon / 12.0;
    let hi = 1.0 + epsilon / 12.0;
    let spread = n * w_max + 1.0;
    let delta1 = epsilon * w_min * (2.0 * lo * w_min).sqrt()
        / (64.0 * w_max * n * (n + 1.0) * (hi * spread * n).sqrt());
    let delta2 = epsilon * (2.0 * lo * w_min).sqrt() / (32.0 * spread * (hi * spread).sqrt());
    Ok((delta1, delta2))
}

/// SplitMix64 finalizer over a tuple, used to derive independent streams.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_Q: u64 = 1;
const STREAM_P: u64 = 2;

fn projection_row(seed: u64, stream: u64, row: usize, len: usize, p: usize, kind: Projection) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, row as u64));
    let scale = 1.0 / (p as f64).sqrt();
    match kind {
        Projection::Rademacher => (0..len)
            .map(|_| if rng.random::<bool>() { scale } else { -scale })
            .collect(),
        Projection::Gaussian => (0..len)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
            .collect(),
    }
}

/// Projected solves for one graph state. Immutable once built.
#[derive(Debug, Clone)]
pub struct SketchState<'g> {
    graph: ResidualGraph<'g>,
    edges: Vec<EdgeId>,
    p: usize,
    epsilon: f64,
    seed: u64,
    projection: Projection,
    /// `X̃ = Q W^{1/2} B Ω`, node-major: column `u` is `xtil[u*p..(u+1)*p]`.
    xtil: Vec<f64>,
    /// `Ỹ = P Ω`, node-major.
    ytil: Vec<f64>,
    trace_estimate: f64,
}

/// Draws `Q`, `P` and solves for `X̃`, `Ỹ` on the current graph.
pub fn build_sketches<'g>(g: &ResidualGraph<'g>, cfg: &SketchConfig, seed: u64) -> Result<SketchState<'g>> {
    check_epsilon(cfg.epsilon)?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot sketch a graph with no nodes".into()));
    }
    let edges = g.alive_ids();
    let m = edges.len();
    let p = sketch_dimension(n, m, cfg.epsilon, cfg.dim);
    if p > cfg.max_dim {
        return Err(Error::Capacity {
            nodes: p,
            limit: cfg.max_dim,
        });
    }
    let a = identity_plus_laplacian(g);
    let endpoints: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&e| {
            let ed = g.edge(e);
            (ed.u, ed.v, ed.weight.sqrt())
        })
        .collect();
    let projection = cfg.projection;

    // Rows of Q W^{1/2} B, assembled in O(m) each.
    let x = solve_generated(
        &a,
        p,
        |i| {
            let q = projection_row(seed, STREAM_Q, i, m, p, projection);
            let mut row = vec![0.0; n];
            for (&(u, v, sw), qe) in endpoints.iter().zip(q) {
                row[u] += qe * sw;
                row[v] -= qe * sw;
            }
            row
        },
        &cfg.solver,
    )?;
    let y = solve_generated(
        &a,
        p,
        |i| projection_row(seed, STREAM_P, i, n, p, projection),
        &cfg.solver,
    )?;
    // Σ_i P_i Ω P_iᵀ = tr(P Ω Pᵀ), an unbiased estimate of tr(Ω).
    let trace_estimate = y.rhs_dot.iter().sum();
    Ok(SketchState {
        graph: g.clone(),
        edges,
        p,
        epsilon: cfg.epsilon,
        seed,
        projection,
        xtil: x.node_major,
        ytil: y.node_major,
        trace_estimate,
    })
}

impl<'g> SketchState<'g> {
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn graph(&self) -> &ResidualGraph<'g> {
        &self.graph
    }

    /// Row `i` of `Q` (one entry per surviving edge, ascending id).
    pub fn q_row(&self, i: usize) -> Vec<f64> {
        projection_row(self.seed, STREAM_Q, i, self.edges.len(), self.p, self.projection)
    }

    /// Row `i` of `P`.
    pub fn p_row(&self, i: usize) -> Vec<f64> {
        projection_row(self.seed, STREAM_P, i, self.graph.node_count(), self.p, self.projection)
    }

    /// Row `i` of `X̃`.
    pub fn xtil_row(&self, i: usize) -> Vec<f64> {
        (0..self.graph.node_count()).map(|u| self.xtil[u * self.p + i]).collect()
    }

    /// Row `i` of `Ỹ`.
    pub fn ytil_row(&self, i: usize) -> Vec<f64> {
        (0..self.graph.node_count()).map(|u| self.ytil[u * self.p + i]).collect()
    }

    fn column_gap(&self, data: &[f64], u: usize, v: usize) -> f64 {
        let p = self.p;
        data[u * p..(u + 1) * p]
            .iter()
            .zip(&data[v * p..(v + 1) * p])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `(‖X̃ b_e‖², ‖Ỹ b_e‖²)`.
    pub fn edge_norms(&self, e: EdgeId) -> Result<(f64, f64)> {
        if !self.graph.is_alive(e) {
            return Err(Error::InvalidArgument(format!(
                "edge {e} is not present in the sketched graph"
            )));
        }
        let ed = self.graph.edge(e);
        Ok((
            self.column_gap(&self.xtil, ed.u, ed.v),
            self.column_gap(&self.ytil, ed.u, ed.v),
        ))
    }

    /// Estimate of the forest distance between the endpoints of `e`.
    pub fn approx_forest_distance(&self, e: EdgeId) -> Result<f64> {
        let (x, y) = self.edge_norms(e)?;
        Ok(x + y)
    }

    /// `Ĉ(e)`; errors if the estimated denominator is not safely positive.
    pub fn approx_gain(&self, e: EdgeId) -> Result<f64> {
        let (x, y) = self.edge_norms(e)?;
        let w = self.graph.edge(e).weight;
        let denominator = 1.0 - w * (x + y);
        if denominator <= SKETCH_DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate {
                edge: e.0,
                denominator,
            });
        }
        Ok(self.graph.node_count() as f64 * w * y / denominator)
    }

    /// `Ĉ(e)` for every sketched edge, ascending id.
    pub fn approx_gains(&self) -> Vec<(EdgeId, Result<f64>)> {
        let gains = par::map_slice(&self.edges, |&e| self.approx_gain(e));
        self.edges.iter().copied().zip(gains).collect()
    }

    /// Hutchinson estimate of `ρ(G) = n tr(Ω) - n` from the same `P` sketch.
    pub fn estimated_forest_index(&self) -> f64 {
        let n = self.graph.node_count() as f64;
        n * self.trace_estimate - n
    }
}

/// Exact gain of one edge via two sparse solves, for edges whose sketch
/// estimate is degenerate. Costs one `I + L` solve.
pub fn solved_edge_gain(g: &ResidualGraph<'_>, e: EdgeId, solver: &SolverConfig) -> Result<f64> {
    let ed = g.edge(e);
    let a = identity_plus_laplacian(g);
    let mut b = vec![0.0; g.node_count()];
    b[ed.u] = 1.0;
    b[ed.v] = -1.0;
    let z = crate::solver::sddm_solve(&a, &b, solver)?;
    let rho = z[ed.u] - z[ed.v];
    let norm_sq: f64 = z.iter().map(|v| v * v).sum();
    let denominator = 1.0 - ed.weight * rho;
    if denominator <= crate::forest::DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate {
            edge: e.0,
            denominator,
        });
    }
    Ok(g.node_count() as f64 * ed.weight * norm_sq / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::ForestState;
    use crate::generators;
    use crate::graph::Graph;

    #[test]
    fn theoretical_dimension_for_1133_nodes() {
        // 24 ln(1133) / (0.3/12)^2
        let expect = (24.0 * 1133f64.ln() / 0.000625).ceil() as usize;
        assert_eq!(expect, 270_053);
        assert_eq!(sketch_dimension(1133, 5451, 0.3, SketchDim::Theoretical), 270_053);
    }

    #[test]
    fn practical_dimension_caps() {
        let dim = SketchDim::default();
        // 4 * log2(1000) / 0.09 = 442.9
        assert_eq!(sketch_dimension(1000, 5000, 0.3, dim), 443);
        assert_eq!(sketch_dimension(1000, 300, 0.3, dim), 300);
        assert_eq!(sketch_dimension(100, 5000, 0.3, dim), 100);
        assert_eq!(sketch_dimension(1 << 20, 1 << 24, 0.1, dim), 2000);
        assert_eq!(sketch_dimension(5, 0, 0.3, dim), 1);
        assert_eq!(sketch_dimension(5, 4, 0.3, SketchDim::Fixed(64)), 64);
    }

    #[test]
    fn empty_graph_sketch() {
        let g = Graph::empty(4);
        let r = ResidualGraph::full(&g);
        let sk = build_sketches(&r, &SketchConfig::default(), 3).unwrap();
        for i in 0..sk.dim() {
            assert!(sk.xtil_row(i).iter().all(|&v| v == 0.0));
            assert_eq!(sk.ytil_row(i), sk.p_row(i));
        }
    }

    #[test]
    fn projection_entries_and_determinism() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(1);
        let g = generators::random_connected(30, 80, &mut rng).unwrap();
        let r = ResidualGraph::full(&g);
        let cfg = SketchConfig::default();
        let a = build_sketches(&r, &cfg, 42).unwrap();
        let b = build_sketches(&r, &cfg, 42).unwrap();
        let s = 1.0 / (a.dim() as f64).sqrt();
        for i in 0..a.dim() {
            let q = a.q_row(i);
            let p = a.p_row(i);
            assert_eq!(q.len(), 80);
            assert_eq!(p.len(), 30);
            assert!(q.iter().chain(&p).all(|&v| v == s || v == -s));
            assert_eq!(q, b.q_row(i));
            assert_eq!(a.xtil_row(i), b.xtil_row(i));
        }
        let ga: Vec<f64> = a.approx_gains().into_iter().map(|(_, g)| g.unwrap()).collect();
        let gb: Vec<f64> = b.approx_gains().into_iter().map(|(_, g)| g.unwrap()).collect();
        assert_eq!(ga, gb);
        let c = build_sketches(&r, &cfg, 43).unwrap();
        assert_ne!(a.q_row(0), c.q_row(0));
    }

    #[test]
    fn rows_satisfy_solver_contract() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(2);
        let g = generators::with_random_weights(
            &generators::random_connected(40, 100, &mut rng).unwrap(),
            0.5,
            2.0,
            &mut rng,
        );
        let r = ResidualGraph::full(&g);
        let cfg = SketchConfig::default();
        let sk = build_sketches(&r, &cfg, 9).unwrap();
        let a = identity_plus_laplacian(&r);
        let check = |x: &[f64], b: &[f64]| {
            let mut ax = vec![0.0; x.len()];
            a.mul_vec(x, &mut ax);
            let num: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(num <= cfg.solver.rel_tolerance * den);
        };
        for i in 0..sk.dim() {
            let q = sk.q_row(i);
            let mut rhs = vec![0.0; 40];
            for ((_, e), qe) in r.alive_edges().zip(q) {
                rhs[e.u] += qe * e.weight.sqrt();
                rhs[e.v] -= qe * e.weight.sqrt();
            }
            check(&sk.xtil_row(i), &rhs);
            check(&sk.ytil_row(i), &sk.p_row(i));
        }
    }

    #[test]
    fn gaussian_projection_is_supported() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(3);
        let g = generators::random_connected(25, 60, &mut rng).unwrap();
        let r = ResidualGraph::full(&g);
        let cfg = SketchConfig {
            projection: Projection::Gaussian,
            ..SketchConfig::default()
        };
        let sk = build_sketches(&r, &cfg, 1).unwrap();
        let row = sk.p_row(0);
        let s = 1.0 / (sk.dim() as f64).sqrt();
        assert!(row.iter().any(|&v| v.abs() != s));
        assert!(sk.approx_gains().iter().all(|(_, g)| g.is_ok()));
    }

    #[test]
    fn single_edge_large_sketch() {
        let g = Graph::from_unweighted(2, &[(0, 1)]).unwrap();
        let r = ResidualGraph::full(&g);
        let cfg = SketchConfig {
            dim: SketchDim::Fixed(4000),
            solver: SolverConfig {
                rel_tolerance: 1e-12,
                ..Default::default()
            },
            ..SketchConfig::default()
        };
        let sk = build_sketches(&r, &cfg, 5).unwrap();
        let gain = sk.approx_gain(EdgeId(0)).unwrap();
        assert!((gain - 4.0 / 3.0).abs() <= 0.05 * 4.0 / 3.0, "{gain}");
    }

    #[test]
    fn solved_gain_matches_dense() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(4);
        let g = generators::random_connected(30, 70, &mut rng).unwrap();
        let fs = ForestState::new(&g).unwrap();
        let r = ResidualGraph::full(&g);
        let cfg = SolverConfig {
            rel_tolerance: 1e-12,
            ..Default::default()
        };
        for e in g.edge_ids().take(10) {
            let exact = fs.edge_gain(e).unwrap();
            let solved = solved_edge_gain(&r, e, &cfg).unwrap();
            assert!((exact - solved).abs() <= 1e-8 * exact);
        }
    }

    #[test]
    fn deltas() {
        let g = Graph::from_unweighted(2, &[(0, 1)]).unwrap();
        let r = ResidualGraph::full(&g);
        let (d1, d2) = theoretical_deltas(&r, 0.3).unwrap();
        // Direct evaluation with n = 2, w_min = w_max = 1, eps = 0.3.
        let lo: f64 = 1.0 - 0.025;
        let hi: f64 = 1.0 + 0.025;
        let e1 = 0.3 * (2.0 * lo).sqrt() / (64.0 * 2.0 * 3.0 * (hi * 3.0 * 2.0).sqrt());
        let e2 = 0.3 * (2.0 * lo).sqrt() / (32.0 * 3.0 * (hi * 3.0).sqrt());
        assert!((d1 - e1).abs() <= 1e-15 && (d2 - e2).abs() <= 1e-15);
        let mut last = f64::INFINITY;
        for n in [2, 5, 10, 100, 1000] {
            let g = generators::path(n);
            let (d1, d2) = theoretical_deltas(&ResidualGraph::full(&g), 0.3).unwrap();
            assert!(d1 > 0.0 && d2 > 0.0 && d1 < last);
            last = d1;
        }
        assert!(theoretical_deltas(&r, 0.5).is_err());
    }
}
