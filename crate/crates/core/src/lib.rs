//! Approximation algorithms for the metric s-t path traveling salesman
//! problem.
//!
//! The main pipeline solves the path Held-Karp relaxation by cutting planes
//! ([`lp::hk_solve`]), writes the optimum as a convex combination of spanning
//! trees ([`decompose::decompose`]), fixes the parity of every tree with a
//! minimum T-join ([`tjoin::min_tjoin`]) and keeps the cheapest shortcut
//! Eulerian path ([`solver::solve_bom`]).
//!
//! Around it sit verifiable certificates for the cost analysis
//! ([`narrow`]), the prize-collecting variant ([`prize`]), unit-weight
//! graphical metrics ([`graphical`]) and exhaustive oracles ([`exact`]).
//!
//! Work that splits into independent pieces (trees of a decomposition, pairs
//! of vertices, rounding thresholds) runs through [`par::Exec`], which uses
//! rayon when the `parallel` feature is on and plain iteration otherwise.

pub mod decompose;
pub mod error;
pub mod exact;
pub mod flow;
pub mod graphical;
pub mod instance;
pub mod io;
pub mod lp;
pub mod narrow;
pub mod par;
pub mod prize;
pub mod solver;
pub mod tjoin;

pub use decompose::{decompose, verify_combination, TreeCombination};
pub use error::{Error, Result};
pub use exact::{exact_pc_path, exact_path_tsp};
pub use graphical::{build_layer_traversal, check_layer_lemmas, solve_graphical};
pub use instance::{generate_random_graph, generate_random_metric, metric_closure, validate_metric, EdgeVector, GraphicalInstance, Instance};
pub use lp::{hk_solve, HkSolution};
pub use narrow::{build_certificate, compute_narrow_cuts, verify_certificate, Variant};
pub use par::Exec;
pub use prize::{pc_solve, PcInstance};
pub use solver::{solve_bom, solve_hoogeveen, PathSolution, GOLDEN_RATIO};
pub use tjoin::{min_tjoin, ParitySet};
