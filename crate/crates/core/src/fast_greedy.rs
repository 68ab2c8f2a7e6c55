//! Sketch-based greedy attack: each round draws fresh projections on the
//! current graph, scores every surviving edge by `Ĉ(e)`, and deletes the best.

use std::time::Instant;

use crate::attack::{assemble, exact_marginal_gains, AttackResult, GainSource, Strategy};
use crate::centrality::{best_of, check_k};
use crate::error::{Error, Result};
use crate::forest::{ForestConfig, ForestState};
use crate::graph::{Graph, ResidualGraph};
use crate::sketch::{build_sketches, derive_seed, solved_edge_gain, SketchConfig};

const ROUND_STREAM: u64 = 0x5EED_0F_F0E57;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FastGreedyConfig {
    pub sketch: SketchConfig,
    /// Governs whether the final exact audit may use a dense `Ω`.
    pub forest: ForestConfig,
}

impl FastGreedyConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            sketch: SketchConfig::with_epsilon(epsilon),
            ..Self::default()
        }
    }
}

/// Seed for round `round` of a run started with `seed`.
pub fn round_seed(seed: u64, round: usize) -> u64 {
    derive_seed(seed, ROUND_STREAM, round as u64)
}

pub fn fast_greedy_attack(g: &Graph, k: usize, seed: u64, cfg: &FastGreedyConfig) -> Result<AttackResult> {
    check_k(g, k)?;
    crate::sketch::check_epsilon(cfg.sketch.epsilon)?;
    let start = Instant::now();
    let mut residual = ResidualGraph::full(g);
    let mut edges = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);
    let mut elapsed = Vec::with_capacity(k);
    let mut estimated_base = None;
    for round in 0..k {
        let sk = build_sketches(&residual, &cfg.sketch, round_seed(seed, round))?;
        if round == 0 {
            estimated_base = Some(sk.estimated_forest_index());
        }
        let mut scored = Vec::with_capacity(residual.edge_count());
        for (e, est) in sk.approx_gains() {
            let gain = match est {
                Ok(x) => x,
                Err(Error::Degenerate { denominator, .. }) => {
                    log::warn!("sketch denominator {denominator:e} for {e}; using a direct solve");
                    solved_edge_gain(&residual, e, &cfg.sketch.solver)?
                }
                Err(other) => return Err(other),
            };
            scored.push((e, gain));
        }
        let (e, gain) = best_of(scored.into_iter()).expect("k <= m leaves a surviving edge");
        residual.remove(e)?;
        edges.push(e);
        gains.push(gain);
        elapsed.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let exact = exact_marginal_gains(g, &edges, cfg.forest, &cfg.sketch.solver)?;
    let base = if g.node_count() <= cfg.forest.dense_limit {
        (ForestState::from_residual(ResidualGraph::full(g), cfg.forest)?.forest_index(), false)
    } else {
        match estimated_base {
            Some(b) => (b, true),
            None => {
                let sk = build_sketches(&ResidualGraph::full(g), &cfg.sketch, round_seed(seed, 0))?;
                (sk.estimated_forest_index(), true)
            }
        }
    };
    Ok(assemble(
        g,
        Strategy::Fast,
        &edges,
        &gains,
        &elapsed,
        base,
        GainSource::Sketch,
        Some(exact.iter().sum()),
    ))
}
