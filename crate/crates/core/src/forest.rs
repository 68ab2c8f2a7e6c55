//! Dense forest matrix `Ω = (I + L)^{-1}` of a graph under edge deletions.
//!
//! Deleting an edge `e = (u, v)` of weight `w` is a rank-1 downdate of `I + L`,
//! so `Ω` is refreshed with Sherman-Morrison in `O(n²)`:
//!
//! `Ω' = Ω + w Ω b bᵀ Ω / (1 - w bᵀ Ω b)` with `b = e_u - e_v`.
//!
//! `Ω b` is just the difference of two columns, which also makes the single-edge
//! gain `n w ‖Ω b‖² / (1 - w ρ_e)` an `O(n)` read.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, ResidualGraph};
use crate::par;

/// Denominators at or below this are treated as exhausted precision.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    /// Largest node count accepted for the dense `n × n` representation.
    pub dense_limit: usize,
    /// Recompute `Ω` from scratch after this many rank-1 updates.
    pub refresh_interval: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            dense_limit: 4_000,
            refresh_interval: 50,
        }
    }
}

/// Forest matrix of the current graph plus its cached trace.
#[derive(Debug, Clone)]
pub struct ForestState<'g> {
    graph: ResidualGraph<'g>,
    omega: DMatrix<f64>,
    trace: f64,
    config: ForestConfig,
    pending_updates: usize,
}

/// Dense `I + L` for the current graph.
pub(crate) fn dense_identity_plus_laplacian(g: &ResidualGraph<'_>) -> DMatrix<f64> {
    let n = g.node_count();
    let mut m = DMatrix::identity(n, n);
    for (_, e) in g.alive_edges() {
        m[(e.u, e.u)] += e.weight;
        m[(e.v, e.v)] += e.weight;
        m[(e.u, e.v)] -= e.weight;
        m[(e.v, e.u)] -= e.weight;
    }
    m
}

fn invert(g: &ResidualGraph<'_>) -> DMatrix<f64> {
    let a = dense_identity_plus_laplacian(g);
    // I + L is symmetric positive definite for every graph, connected or not.
    Cholesky::new(a)
        .expect("I + L is positive definite")
        .inverse()
}

impl<'g> ForestState<'g> {
    /// Exact forest matrix of `g` with the default configuration.
    pub fn new(g: &'g Graph) -> Result<Self> {
        Self::from_residual(ResidualGraph::full(g), ForestConfig::default())
    }

    pub fn from_residual(graph: ResidualGraph<'g>, config: ForestConfig) -> Result<Self> {
        let n = graph.node_count();
        if n > config.dense_limit {
            return Err(Error::Capacity {
                nodes: n,
                limit: config.dense_limit,
            });
        }
        let omega = invert(&graph);
        let trace = omega.trace();
        Ok(Self {
            graph,
            omega,
            trace,
            config,
            pending_updates: 0,
        })
    }

    pub fn graph(&self) -> &ResidualGraph<'g> {
        &self.graph
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn config(&self) -> ForestConfig {
        self.config
    }

    /// `ρ(G) = n tr(Ω) - n`.
    pub fn forest_index(&self) -> f64 {
        let n = self.node_count() as f64;
        n * self.trace - n
    }

    /// `ρ_ij = ω_ii + ω_jj - 2 ω_ij`.
    pub fn forest_distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let o = &self.omega;
        o[(i, i)] + o[(j, j)] - 2.0 * o[(i, j)]
    }

    /// `Ω b_e` as the difference of columns `u` and `v`.
    fn omega_b(&self, u: usize, v: usize) -> Vec<f64> {
        let cu = self.omega.column(u);
        let cv = self.omega.column(v);
        cu.iter().zip(cv.iter()).map(|(a, b)| a - b).collect()
    }

    fn check_alive(&self, e: EdgeId) -> Result<()> {
        if self.graph.is_alive(e) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "edge {e} is not present in the current graph"
            )))
        }
    }

    /// Sherman-Morrison scale `w / (1 - w ρ_e)` and `‖Ω b_e‖²` for edge `e`.
    fn edge_terms(&self, e: EdgeId) -> Result<(f64, f64)> {
        let edge = self.graph.edge(e);
        let cu = self.omega.column(edge.u);
        let cv = self.omega.column(edge.v);
        let norm_sq: f64 = cu.iter().zip(cv.iter()).map(|(a, b)| (a - b).powi(2)).sum();
        let rho = self.forest_distance(edge.u, edge.v);
        let denominator = 1.0 - edge.weight * rho;
        if denominator <= DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate {
                edge: e.0,
                denominator,
            });
        }
        Ok((edge.weight / denominator, norm_sq))
    }

    /// Forest-index increase from deleting `e` alone: `ρ(G - e) - ρ(G)`.
    pub fn edge_gain(&self, e: EdgeId) -> Result<f64> {
        self.check_alive(e)?;
        let (scale, norm_sq) = self.edge_terms(e)?;
        Ok(self.node_count() as f64 * scale * norm_sq)
    }

    /// Gains of every surviving edge, in ascending edge-id order.
    pub fn edge_gains(&self) -> Vec<(EdgeId, Result<f64>)> {
        let ids = self.graph.alive_ids();
        let gains = par::map_slice(&ids, |&e| self.edge_gain(e));
        ids.into_iter().zip(gains).collect()
    }

    /// Deletes `e` in place and returns the exact forest-index increase.
    ///
    /// On a degenerate denominator the state is left untouched.
    pub fn delete_edge(&mut self, e: EdgeId) -> Result<f64> {
        self.check_alive(e)?;
        let (scale, norm_sq) = self.edge_terms(e)?;
        let edge = *self.graph.edge(e);
        let z = self.omega_b(edge.u, edge.v);
        let n = self.node_count();
        par::for_each_chunk_mut(self.omega.as_mut_slice(), n.max(1), |col, column| {
            let s = scale * z[col];
            if s != 0.0 {
                for (o, &zi) in column.iter_mut().zip(&z) {
                    *o += s * zi;
                }
            }
        });
        self.trace += scale * norm_sq;
        self.graph.remove(e)?;
        self.pending_updates += 1;
        if self.pending_updates >= self.config.refresh_interval {
            self.recompute();
        }
        Ok(n as f64 * scale * norm_sq)
    }

    /// Value-style variant of [`delete_edge`](Self::delete_edge).
    pub fn without_edge(mut self, e: EdgeId) -> Result<Self> {
        self.delete_edge(e)?;
        Ok(self)
    }

    /// Discards accumulated rounding by inverting `I + L` again.
    pub fn recompute(&mut self) {
        self.omega = invert(&self.graph);
        self.trace = self.omega.trace();
        self.pending_updates = 0;
    }
}

/// Convenience: `ρ(G)` for a whole graph via the dense path.
pub fn forest_index(g: &Graph) -> Result<f64> {
    Ok(ForestState::new(g)?.forest_index())
}
