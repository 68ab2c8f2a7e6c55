//! Edge attacks on the forest index of a weighted graph.
//!
//! The forest index `ρ(G) = n tr((I + L)^{-1}) - n` sums forest distances over
//! all node pairs; deleting edges raises it. This crate scores edges by how much
//! their deletion raises `ρ`, and selects `k` edges greedily, either exactly with
//! rank-1 updates of a dense `Ω = (I + L)^{-1}` or approximately from random
//! projections and sparse solves.
//!
//! With the default `parallel` feature, edge scans, sketch solves and subset
//! enumeration run on rayon; without it the same code runs sequentially and
//! produces identical results.

pub mod attack;
pub mod bounds;
pub mod centrality;
pub mod error;
pub mod fast_greedy;
pub mod forest;
pub mod generators;
pub mod graph;
pub mod greedy;
pub mod oracle;
mod par;
pub mod sketch;
pub mod solver;
pub mod sparse;

pub use attack::{run_attack, AttackOptions, AttackResult, Pick, Strategy};
pub use bounds::{compute_bounds, empirical_submodularity_scan, GuaranteeBounds};
pub use centrality::{fegc, EdgeSet, PairCounting};
pub use error::{Error, ErrorClass, Result};
pub use fast_greedy::{fast_greedy_attack, FastGreedyConfig};
pub use forest::{forest_index, ForestConfig, ForestState};
pub use graph::{parse_edge_list, parse_edge_list_str, Edge, EdgeId, Graph, ResidualGraph};
pub use greedy::greedy_attack;
pub use oracle::{naive_forest_index, optimum_attack};
pub use par::is_parallel;
pub use sketch::{build_sketches, SketchConfig, SketchState};
pub use solver::{sddm_solve, SolverConfig};
