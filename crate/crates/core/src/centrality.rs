//! Edge scores: forest edge group centrality (FEGC), shortest-path betweenness,
//! endpoint-degree scores, and the one-shot / iterative selections built on them.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forest::{ForestConfig, ForestState};
use crate::graph::{EdgeId, Graph, ResidualGraph};
use crate::par;
use crate::sketch::{build_sketches, SketchConfig};

/// Ordered set of distinct edges, in selection order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSet {
    members: Vec<EdgeId>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from ids, rejecting duplicates and ids outside `g`.
    pub fn from_ids(g: &Graph, ids: &[EdgeId]) -> Result<Self> {
        let mut s = Self::new();
        for &e in ids {
            s.push(g, e)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, g: &Graph, e: EdgeId) -> Result<()> {
        if e.0 >= g.edge_count() {
            return Err(Error::InvalidArgument(format!("edge {e} does not exist")));
        }
        if self.members.contains(&e) {
            return Err(Error::InvalidArgument(format!("edge {e} selected twice")));
        }
        self.members.push(e);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.members.contains(&e)
    }

    pub fn as_slice(&self) -> &[EdgeId] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.members.iter().copied()
    }

    /// Members sorted by id.
    pub fn sorted(&self) -> Vec<EdgeId> {
        let mut v = self.members.clone();
        v.sort_unstable();
        v
    }
}

impl From<EdgeSet> for Vec<EdgeId> {
    fn from(s: EdgeSet) -> Self {
        s.members
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    Fegc,
    ApproxFegc,
    Betweenness,
    DegreeProduct,
    DegreeSum,
}

/// One score per surviving edge, ascending edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScoreTable {
    pub kind: ScoreKind,
    pub scores: Vec<(EdgeId, f64)>,
}

impl EdgeScoreTable {
    pub fn get(&self, e: EdgeId) -> Option<f64> {
        self.scores
            .binary_search_by_key(&e, |&(id, _)| id)
            .ok()
            .map(|i| self.scores[i].1)
    }

    /// Highest score; ties go to the lowest edge id.
    pub fn argmax(&self) -> Option<(EdgeId, f64)> {
        best_of(self.scores.iter().copied())
    }

    /// The `k` best edges by score, ties to lower ids.
    pub fn top_k(&self, k: usize) -> Vec<EdgeId> {
        let mut order = self.scores.clone();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        order.into_iter().take(k).map(|(e, _)| e).collect()
    }
}

/// Maximum by score with the lowest id winning ties.
pub(crate) fn best_of(items: impl Iterator<Item = (EdgeId, f64)>) -> Option<(EdgeId, f64)> {
    let mut best: Option<(EdgeId, f64)> = None;
    for (e, s) in items {
        match best {
            Some((be, bs)) if s < bs || (s == bs && e > be) => {}
            _ => best = Some((e, s)),
        }
    }
    best
}

/// `C(S) = ρ(G - S) - ρ(G)`.
///
/// Small sets are peeled off one rank-1 update at a time; larger sets pay a
/// single inversion of `I + L(G - S)`.
pub fn fegc(g: &Graph, s: &EdgeSet) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    let mut state = ForestState::new(g)?;
    let base = state.forest_index();
    if s.len() <= 3 {
        let mut total = 0.0;
        for e in s.iter() {
            total += state.delete_edge(e)?;
        }
        Ok(total)
    } else {
        state = ForestState::from_residual(ResidualGraph::without(g, s.as_slice())?, ForestConfig::default())?;
        Ok(state.forest_index() - base)
    }
}

/// How shortest-path counts are aggregated over node pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairCounting {
    /// Each unordered pair `{s, t}` contributes once.
    #[default]
    Unordered,
    /// Both `(s, t)` and `(t, s)` contribute.
    Ordered,
}

fn brandes_from(g: &ResidualGraph<'_>, source: usize, acc: &mut [f64], scratch: &mut BfsScratch) {
    let n = g.node_count();
    let BfsScratch {
        dist,
        sigma,
        delta,
        order,
        queue,
    } = scratch;
    dist.clear();
    dist.resize(n, usize::MAX);
    sigma.clear();
    sigma.resize(n, 0.0);
    delta.clear();
    delta.resize(n, 0.0);
    order.clear();
    queue.clear();
    dist[source] = 0;
    sigma[source] = 1.0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for (w, _) in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    for &w in order.iter().rev() {
        for (v, e) in g.neighbors(w) {
            if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                acc[e.0] += c;
                delta[v] += c;
            }
        }
    }
}

#[derive(Default)]
struct BfsScratch {
    dist: Vec<usize>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: VecDeque<usize>,
}

/// Shortest-path edge betweenness over hop counts (weights ignored), with
/// fractional credit split across equally short paths.
pub fn edge_betweenness_on(g: &ResidualGraph<'_>, counting: PairCounting) -> EdgeScoreTable {
    let n = g.node_count();
    let m_total = g.base().edge_count();
    const SOURCES_PER_CHUNK: usize = 32;
    let chunks = n.div_ceil(SOURCES_PER_CHUNK);
    let partials = par::map_range(chunks, |c| {
        let mut acc = vec![0.0; m_total];
        let mut scratch = BfsScratch::default();
        for s in c * SOURCES_PER_CHUNK..((c + 1) * SOURCES_PER_CHUNK).min(n) {
            brandes_from(g, s, &mut acc, &mut scratch);
        }
        acc
    });
    // Fixed summation order keeps the result independent of thread count.
    let mut total = vec![0.0; m_total];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let scale = match counting {
        PairCounting::Unordered => 0.5,
        PairCounting::Ordered => 1.0,
    };
    EdgeScoreTable {
        kind: ScoreKind::Betweenness,
        scores: g.alive_ids().into_iter().map(|e| (e, total[e.0] * scale)).collect(),
    }
}

pub fn edge_betweenness(g: &Graph, counting: PairCounting) -> EdgeScoreTable {
    edge_betweenness_on(&ResidualGraph::full(g), counting)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    Product,
    Sum,
}

/// Endpoint-degree scores using current unweighted degrees.
pub fn degree_scores_on(g: &ResidualGraph<'_>, mode: DegreeMode) -> EdgeScoreTable {
    let scores = g
        .alive_edges()
        .map(|(id, e)| {
            let (a, b) = (g.degree(e.u) as f64, g.degree(e.v) as f64);
            let s = match mode {
                DegreeMode::Product => a * b,
                DegreeMode::Sum => a + b,
            };
            (id, s)
        })
        .collect();
    EdgeScoreTable {
        kind: match mode {
            DegreeMode::Product => ScoreKind::DegreeProduct,
            DegreeMode::Sum => ScoreKind::DegreeSum,
        },
        scores,
    }
}

pub fn degree_scores(g: &Graph, mode: DegreeMode) -> EdgeScoreTable {
    degree_scores_on(&ResidualGraph::full(g), mode)
}

/// Single-edge FEGC for every edge of `g`. Degenerate edges are an error.
pub fn fegc_scores(g: &Graph, cfg: ForestConfig) -> Result<EdgeScoreTable> {
    let state = ForestState::from_residual(ResidualGraph::full(g), cfg)?;
    let scores = state
        .edge_gains()
        .into_iter()
        .map(|(e, r)| r.map(|s| (e, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeScoreTable {
        kind: ScoreKind::Fegc,
        scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scorer {
    Exact(ForestConfig),
    Sketch { config: SketchConfig, seed: u64 },
}

/// The `k` edges with the largest single-edge gain on the original graph,
/// chosen in one shot.
pub fn top_k_fegc(g: &Graph, k: usize, scorer: Scorer) -> Result<EdgeSet> {
    check_k(g, k)?;
    if k == 0 {
        return Ok(EdgeSet::new());
    }
    let table = match scorer {
        Scorer::Exact(cfg) => fegc_scores(g, cfg)?,
        Scorer::Sketch { config, seed } => {
            let r = ResidualGraph::full(g);
            let sk = build_sketches(&r, &config, seed)?;
            let scores = sk
                .approx_gains()
                .into_iter()
                .map(|(e, res)| {
                    res.or_else(|_| crate::sketch::solved_edge_gain(&r, e, &config.solver))
                        .map(|s| (e, s))
                })
                .collect::<Result<Vec<_>>>()?;
            EdgeScoreTable {
                kind: ScoreKind::ApproxFegc,
                scores,
            }
        }
    };
    EdgeSet::from_ids(g, &table.top_k(k))
}

pub(crate) fn check_k(g: &Graph, k: usize) -> Result<()> {
    if k > g.edge_count() {
        Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the number of edges ({})",
            g.edge_count()
        )))
    } else {
        Ok(())
    }
}

/// `k` distinct edges uniformly at random, reproducible from `seed`.
pub fn random_attack(g: &Graph, k: usize, seed: u64) -> Result<EdgeSet> {
    check_k(g, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<EdgeId> = sample(&mut rng, g.edge_count(), k).into_iter().map(EdgeId).collect();
    EdgeSet::from_ids(g, &ids)
}

/// Structural score recomputed on the shrinking graph each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Betweenness(PairCounting),
    Degree(DegreeMode),
}

/// Repeatedly deletes the top-scoring surviving edge under `baseline`.
pub fn iterative_attack(g: &Graph, k: usize, baseline: Baseline) -> Result<EdgeSet> {
    check_k(g, k)?;
    let mut residual = ResidualGraph::full(g);
    let mut set = EdgeSet::new();
    for _ in 0..k {
        let table = match baseline {
            Baseline::Betweenness(c) => edge_betweenness_on(&residual, c),
            Baseline::Degree(mode) => degree_scores_on(&residual, mode),
        };
        let (e, _) = table.argmax().expect("k <= m leaves a surviving edge");
        residual.remove(e)?;
        set.push(g, e)?;
    }
    Ok(set)
}
