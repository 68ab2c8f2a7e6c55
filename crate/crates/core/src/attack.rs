//! Attack strategies, their common result type, and exact evaluation of
//! chosen edge sequences.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::centrality::{self, Baseline, DegreeMode, EdgeSet, PairCounting, Scorer};
use crate::error::{Error, Result};
use crate::fast_greedy::{fast_greedy_attack, FastGreedyConfig};
use crate::forest::{ForestConfig, ForestState};
use crate::graph::{EdgeId, Graph, ResidualGraph};
use crate::greedy::greedy_attack_with;
use crate::oracle;
use crate::sketch::{build_sketches, solved_edge_gain, SketchConfig};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Fast,
    Optimum,
    Random,
    Betweenness,
    #[serde(rename = "degprod")]
    DegreeProduct,
    #[serde(rename = "degsum")]
    DegreeSum,
    #[serde(rename = "topfegc")]
    TopFegc,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Greedy,
        Strategy::Fast,
        Strategy::Optimum,
        Strategy::Random,
        Strategy::Betweenness,
        Strategy::DegreeProduct,
        Strategy::DegreeSum,
        Strategy::TopFegc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Fast => "fast",
            Strategy::Optimum => "optimum",
            Strategy::Random => "random",
            Strategy::Betweenness => "betweenness",
            Strategy::DegreeProduct => "degprod",
            Strategy::DegreeSum => "degsum",
            Strategy::TopFegc => "topfegc",
        }
    }

    /// Whether the outcome depends on the seed.
    pub fn is_randomized(self) -> bool {
        matches!(self, Strategy::Fast | Strategy::Random)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// Where recorded marginal gains come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainSource {
    Exact,
    Sketch,
}

/// One deleted edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub edge: EdgeId,
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub marginal_gain: f64,
    pub cumulative_gain: f64,
    pub forest_index: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub strategy: Strategy,
    pub base_forest_index: f64,
    /// `true` when the base index is a randomized trace estimate.
    pub base_index_estimated: bool,
    pub gain_source: GainSource,
    pub picks: Vec<Pick>,
    /// Exact `ρ(G - S) - ρ(G)` of the final set, when evaluated.
    pub exact_delta: Option<f64>,
}

impl AttackResult {
    pub fn edges(&self) -> Vec<EdgeId> {
        self.picks.iter().map(|p| p.edge).collect()
    }

    pub fn cumulative_gain(&self) -> f64 {
        self.picks.last().map_or(0.0, |p| p.cumulative_gain)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// Per-step CSV; endpoints are written with the graph's node labels.
    pub fn write_csv<W: Write>(&self, g: &Graph, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for (step, p) in self.picks.iter().enumerate() {
            w.write_record([
                (step + 1).to_string(),
                g.label(p.u).to_string(),
                g.label(p.v).to_string(),
                p.weight.to_string(),
                p.marginal_gain.to_string(),
                p.cumulative_gain.to_string(),
                p.forest_index.to_string(),
                p.elapsed_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "step",
    "edge_u",
    "edge_v",
    "weight",
    "marginal_gain",
    "cumulative_gain",
    "forest_index",
    "elapsed_ms",
];

/// Reads picks back from [`AttackResult::write_csv`] output.
pub fn read_picks_csv<R: Read>(g: &Graph, input: R) -> Result<Vec<Pick>> {
    let index: HashMap<&str, usize> = g.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::parse(1, "unexpected CSV header"));
    }
    let mut picks = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec?;
        let node = |i: usize| {
            index
                .get(&rec[i])
                .copied()
                .ok_or_else(|| Error::parse(line, format!("unknown node '{}'", &rec[i])))
        };
        let num = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|_| Error::parse(line, format!("bad number '{}'", &rec[i])))
        };
        let (u, v) = (node(1)?, node(2)?);
        let edge = g
            .find_edge(u, v)
            .ok_or_else(|| Error::parse(line, "edge not in graph"))?;
        picks.push(Pick {
            edge,
            u,
            v,
            weight: num(3)?,
            marginal_gain: num(4)?,
            cumulative_gain: num(5)?,
            forest_index: num(6)?,
            elapsed_ms: num(7)?,
        });
    }
    Ok(picks)
}

/// Knobs shared by every strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackOptions {
    pub seed: u64,
    pub sketch: SketchConfig,
    pub forest: ForestConfig,
    /// Upper limit on subsets enumerated by the optimum search.
    pub budget: u128,
    pub counting: PairCounting,
}

impl Default for AttackOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            sketch: SketchConfig::default(),
            forest: ForestConfig::default(),
            budget: oracle::DEFAULT_BUDGET,
            counting: PairCounting::default(),
        }
    }
}

/// Exact marginal gains of deleting `edges` in order.
///
/// Uses rank-1 updates of a dense `Ω` when `n` fits, otherwise one sparse
/// solve per edge on the shrinking graph.
pub fn exact_marginal_gains(
    g: &Graph,
    edges: &[EdgeId],
    forest: ForestConfig,
    solver: &SolverConfig,
) -> Result<Vec<f64>> {
    if g.node_count() <= forest.dense_limit {
        let mut state = ForestState::from_residual(ResidualGraph::full(g), forest)?;
        edges
            .iter()
            .map(|&e| match state.delete_edge(e) {
                Err(Error::Degenerate { .. }) => {
                    state.recompute();
                    state.delete_edge(e)
                }
                other => other,
            })
            .collect()
    } else {
        let mut residual = ResidualGraph::full(g);
        let mut gains = Vec::with_capacity(edges.len());
        for &e in edges {
            if !residual.is_alive(e) {
                return Err(Error::InvalidArgument(format!("edge {e} deleted twice")));
            }
            gains.push(solved_edge_gain(&residual, e, solver)?);
            residual.remove(e)?;
        }
        Ok(gains)
    }
}

/// `ρ(G)`: exact when dense fits, otherwise a trace estimate (flagged `true`).
pub fn base_forest_index(g: &Graph, opts: &AttackOptions) -> Result<(f64, bool)> {
    if g.node_count() <= opts.forest.dense_limit {
        Ok((ForestState::from_residual(ResidualGraph::full(g), opts.forest)?.forest_index(), false))
    } else {
        let sk = build_sketches(&ResidualGraph::full(g), &opts.sketch, opts.seed)?;
        Ok((sk.estimated_forest_index(), true))
    }
}

/// Assembles a result from an edge sequence and per-step gains.
pub(crate) fn assemble(
    g: &Graph,
    strategy: Strategy,
    edges: &[EdgeId],
    gains: &[f64],
    elapsed_ms: &[f64],
    base: (f64, bool),
    gain_source: GainSource,
    exact_delta: Option<f64>,
) -> AttackResult {
    let mut cumulative = 0.0;
    let picks = edges
        .iter()
        .zip(gains)
        .zip(elapsed_ms)
        .map(|((&e, &gain), &ms)| {
            cumulative += gain;
            let edge = g.edge(e);
            Pick {
                edge: e,
                u: edge.u,
                v: edge.v,
                weight: edge.weight,
                marginal_gain: gain,
                cumulative_gain: cumulative,
                forest_index: base.0 + cumulative,
                elapsed_ms: ms,
            }
        })
        .collect();
    AttackResult {
        strategy,
        base_forest_index: base.0,
        base_index_estimated: base.1,
        gain_source,
        picks,
        exact_delta,
    }
}

/// Exactly evaluates a precomputed selection.
pub fn evaluate_selection(
    g: &Graph,
    strategy: Strategy,
    set: &EdgeSet,
    elapsed_ms: f64,
    opts: &AttackOptions,
) -> Result<AttackResult> {
    let edges = set.as_slice();
    let gains = exact_marginal_gains(g, edges, opts.forest, &opts.sketch.solver)?;
    let base = base_forest_index(g, opts)?;
    let delta = gains.iter().sum();
    Ok(assemble(
        g,
        strategy,
        edges,
        &gains,
        &vec![elapsed_ms; edges.len()],
        base,
        GainSource::Exact,
        Some(delta),
    ))
}

/// Runs one strategy with budget `k`.
pub fn run_attack(g: &Graph, k: usize, strategy: Strategy, opts: &AttackOptions) -> Result<AttackResult> {
    centrality::check_k(g, k)?;
    let start = Instant::now();
    let set = match strategy {
        Strategy::Greedy => return greedy_attack_with(g, k, opts.forest),
        Strategy::Fast => {
            let cfg = FastGreedyConfig {
                sketch: opts.sketch,
                forest: opts.forest,
            };
            return fast_greedy_attack(g, k, opts.seed, &cfg);
        }
        Strategy::Optimum => oracle::optimum_attack(g, k, opts.budget)?.0,
        Strategy::Random => centrality::random_attack(g, k, opts.seed)?,
        Strategy::Betweenness => centrality::iterative_attack(g, k, Baseline::Betweenness(opts.counting))?,
        Strategy::DegreeProduct => centrality::iterative_attack(g, k, Baseline::Degree(DegreeMode::Product))?,
        Strategy::DegreeSum => centrality::iterative_attack(g, k, Baseline::Degree(DegreeMode::Sum))?,
        Strategy::TopFegc => {
            let scorer = if g.node_count() <= opts.forest.dense_limit {
                Scorer::Exact(opts.forest)
            } else {
                Scorer::Sketch {
                    config: opts.sketch,
                    seed: opts.seed,
                }
            };
            centrality::top_k_fegc(g, k, scorer)?
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    evaluate_selection(g, strategy, &set, ms, opts)
}

/// Exact `Δρ` after each prefix of `edges` (entry `i` covers `i + 1` edges).
pub fn exact_prefix_deltas(g: &Graph, edges: &[EdgeId], opts: &AttackOptions) -> Result<Vec<f64>> {
    let gains = exact_marginal_gains(g, edges, opts.forest, &opts.sketch.solver)?;
    let mut acc = 0.0;
    Ok(gains
        .into_iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect())
}
