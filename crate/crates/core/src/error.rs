use thiserror::Error;

use crate::lp::HkSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph is not connected")]
    NotConnected,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex stalled after {pivots} pivots")]
    Stalled { pivots: usize },

    /// The cutting-plane loop hit its round cap; the last LP solution is kept.
    #[error("separation round cap of {cap} exceeded (best value {})", best.value)]
    IterationCap { cap: usize, best: Box<HkSolution> },

    #[error("decomposition did not converge: residual {residual:e} after {rounds} pricing rounds")]
    Decomposition { residual: f64, rounds: usize },

    #[error("edge set is not a spanning tree: {0}")]
    NotATree(String),

    #[error("odd number of points ({0}) cannot be perfectly matched")]
    OddCardinality(usize),

    #[error("no Eulerian s-t walk: {0}")]
    NotEulerian(String),

    #[error("walk does not visit vertices {0:?}")]
    MissingVertices(Vec<usize>),

    #[error("narrow-cut precedence is inconsistent between {0} and {1}")]
    InconsistentLayers(usize, usize),

    #[error("flow value {value} below required {required}")]
    FlowDeficit { value: f64, required: f64 },

    #[error("instance too large for exhaustive search: n = {n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),
}
