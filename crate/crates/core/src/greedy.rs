//! Exact greedy attack: score every surviving edge against the current `Ω`,
//! delete the best one, update `Ω` by Sherman-Morrison, repeat.

use std::time::Instant;

use crate::attack::{assemble, AttackResult, GainSource, Strategy};
use crate::centrality::{best_of, check_k};
use crate::error::{Error, Result};
use crate::forest::{ForestConfig, ForestState};
use crate::graph::{EdgeId, Graph, ResidualGraph};

pub fn greedy_attack(g: &Graph, k: usize) -> Result<AttackResult> {
    greedy_attack_with(g, k, ForestConfig::default())
}

fn scan(state: &ForestState<'_>) -> Result<(EdgeId, f64)> {
    let mut ok = Vec::new();
    for (e, gain) in state.edge_gains() {
        ok.push((e, gain?));
    }
    Ok(best_of(ok.into_iter()).expect("a surviving edge remains"))
}

/// One greedy round; a degenerate update gets one fresh inversion and retry.
fn round(state: &mut ForestState<'_>) -> Result<(EdgeId, f64)> {
    let attempt = |state: &mut ForestState<'_>| -> Result<(EdgeId, f64)> {
        let (e, _) = scan(state)?;
        let gain = state.delete_edge(e)?;
        Ok((e, gain))
    };
    match attempt(state) {
        Err(Error::Degenerate { edge, denominator }) => {
            log::warn!("edge e{edge} degenerate ({denominator:e}); recomputing forest matrix");
            state.recompute();
            attempt(state)
        }
        other => other,
    }
}

pub fn greedy_attack_with(g: &Graph, k: usize, cfg: ForestConfig) -> Result<AttackResult> {
    check_k(g, k)?;
    let start = Instant::now();
    let mut state = ForestState::from_residual(ResidualGraph::full(g), cfg)?;
    let base = state.forest_index();
    let mut edges = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);
    let mut elapsed = Vec::with_capacity(k);
    for _ in 0..k {
        let (e, gain) = round(&mut state)?;
        edges.push(e);
        gains.push(gain);
        elapsed.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let delta = gains.iter().sum();
    Ok(assemble(
        g,
        Strategy::Greedy,
        &edges,
        &gains,
        &elapsed,
        (base, false),
        GainSource::Exact,
        Some(delta),
    ))
}
