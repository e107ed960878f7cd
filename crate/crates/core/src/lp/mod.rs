//! Linear programming: a dense simplex core and the cutting-plane solver for
//! the path Held-Karp relaxation.

mod hk;
mod simplex;

pub use hk::{
    hk_solve, hk_solve_with, hk_verify, nonseparating_cut, separate, separate_all, st_cut, CutKind, CutQuery,
    DegreeViolation, HkOptions, HkReport, HkSolution, HK_TOL,
};
pub use simplex::{simplex_solve, Constraint, LinearProgram, LpSolution, Relation, Sense};

pub(crate) use simplex::Tableau;
