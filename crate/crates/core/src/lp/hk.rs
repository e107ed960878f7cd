//! Cutting-plane solver for the path Held-Karp relaxation.
//!
//! Degree equalities are present from the start; s-t cuts (`x(δ(S)) ≥ 1`) and
//! nonseparating cuts (`x(δ(S)) ≥ 2`) are added on demand by min-cut
//! separation until none is violated by more than the tolerance.

use std::collections::HashSet;

use serde::Serialize;

use super::simplex::{simplex_solve, LinearProgram, Relation, Sense};
use crate::error::{Error, Result};
use crate::exact::{enumerate_cut_check, CutFamily, ENUMERATION_LIMIT};
use crate::flow::{min_cut, FlowNetwork};
use crate::instance::{all_edges, edge_count, membership, EdgeVector, Instance};
use crate::par::Exec;

/// Default separation tolerance.
pub const HK_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    StSeparating,
    NonSeparating,
}

impl CutKind {
    pub fn requirement(self) -> f64 {
        match self {
            CutKind::StSeparating => 1.0,
            CutKind::NonSeparating => 2.0,
        }
    }
}

/// A cut `δ(U)`; `set` is sorted and, for s-t cuts, contains `s`; for
/// nonseparating cuts it avoids both endpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutQuery {
    pub set: Vec<usize>,
    pub capacity: f64,
    pub kind: CutKind,
}

impl CutQuery {
    pub fn violation(&self) -> f64 {
        self.kind.requirement() - self.capacity
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HkSolution {
    pub x: EdgeVector,
    pub value: f64,
    pub iterations: usize,
    pub tight_cuts: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct HkOptions {
    pub tol: f64,
    /// Separation round cap; `None` means `50·n²`.
    pub max_rounds: Option<usize>,
    pub exec: Exec,
}

impl Default for HkOptions {
    fn default() -> Self {
        Self { tol: HK_TOL, max_rounds: None, exec: Exec::default() }
    }
}

/// Minimum s-t cut; the returned set contains `s`.
pub fn st_cut(x: &EdgeVector, s: usize, t: usize) -> CutQuery {
    let (_, side) = min_cut(x, s, t);
    let set: Vec<usize> = (0..x.n()).filter(|&v| side[v]).collect();
    CutQuery { capacity: x.cut_value(&side), set, kind: CutKind::StSeparating }
}

/// Minimum cut between `v` and the merged endpoint pair; the set contains `v`.
pub fn nonseparating_cut(x: &EdgeVector, v: usize, s: usize, t: usize) -> CutQuery {
    let n = x.n();
    let mut net = FlowNetwork::new(n);
    for (a, b, val) in x.support(0.0) {
        if val <= 0.0 {
            continue;
        }
        let a2 = if a == t { s } else { a };
        let b2 = if b == t { s } else { b };
        if a2 != b2 {
            net.add_edge(a2, b2, val);
        }
    }
    net.max_flow(v, s);
    let side = net.source_side(v);
    let set: Vec<usize> = (0..n).filter(|&u| side[u] && u != s && u != t).collect();
    let mask = membership(n, &set);
    CutQuery { capacity: x.cut_value(&mask), set, kind: CutKind::NonSeparating }
}

/// Every distinct violated cut found by one s-t probe and one probe per internal vertex.
pub fn separate_all(x: &EdgeVector, inst: &Instance, tol: f64) -> Vec<CutQuery> {
    separate_all_with(x, inst, tol, Exec::default())
}

fn separate_all_with(x: &EdgeVector, inst: &Instance, tol: f64, exec: Exec) -> Vec<CutQuery> {
    let (s, t) = (inst.s(), inst.t());
    let mut found = Vec::new();
    let st = st_cut(x, s, t);
    if st.violation() > tol {
        found.push(st);
    }
    let internal: Vec<usize> = inst.internal_vertices().collect();
    let probes = exec.map(&internal, |&v| nonseparating_cut(x, v, s, t));
    let mut seen = HashSet::new();
    for cut in probes {
        if cut.violation() > tol && seen.insert(cut.set.clone()) {
            found.push(cut);
        }
    }
    found
}

/// Most violated cut, ties broken by the lexicographically smallest vertex list.
pub fn separate(x: &EdgeVector, inst: &Instance, tol: f64) -> Option<CutQuery> {
    let mut cuts = separate_all(x, inst, tol);
    cuts.sort_by(|a, b| {
        let (va, vb) = (a.violation(), b.violation());
        if (va - vb).abs() <= 1e-12 {
            a.set.cmp(&b.set)
        } else {
            vb.total_cmp(&va)
        }
    });
    cuts.into_iter().next()
}

pub fn hk_solve(inst: &Instance) -> Result<HkSolution> {
    hk_solve_with(inst, &HkOptions::default())
}

pub fn hk_solve_with(inst: &Instance, opts: &HkOptions) -> Result<HkSolution> {
    let n = inst.n();
    let (s, t) = (inst.s(), inst.t());
    if n == 2 {
        let mut x = EdgeVector::zeros(2);
        x.set(0, 1, 1.0);
        return Ok(HkSolution { value: inst.cost(0, 1), x, iterations: 0, tight_cuts: Vec::new() });
    }

    let edges = all_edges(n);
    let m = edge_count(n);
    let mut lp = LinearProgram::new(Sense::Minimize, inst.upper_triangle());
    for v in 0..n {
        let coeffs: Vec<f64> = edges.iter().map(|&(a, b)| if a == v || b == v { 1.0 } else { 0.0 }).collect();
        let rhs = if v == s || v == t { 1.0 } else { 2.0 };
        lp.add_constraint(coeffs, Relation::Eq, rhs);
    }

    let cap = opts.max_rounds.unwrap_or(50 * n * n);
    let mut added: HashSet<Vec<usize>> = HashSet::new();
    let mut tight_cuts = Vec::new();
    let mut rounds = 0;
    loop {
        let sol = simplex_solve(&lp)?;
        let x = clean(n, sol.x);
        let value = x.cost(inst);
        let cuts = separate_all_with(&x, inst, opts.tol, opts.exec);
        let fresh: Vec<CutQuery> = cuts.into_iter().filter(|c| !added.contains(&c.set)).collect();
        if fresh.is_empty() {
            return Ok(HkSolution { x, value, iterations: rounds, tight_cuts });
        }
        if rounds >= cap {
            let best = HkSolution { x, value, iterations: rounds, tight_cuts };
            return Err(Error::IterationCap { cap, best: Box::new(best) });
        }
        rounds += 1;
        for cut in fresh {
            let mask = membership(n, &cut.set);
            let coeffs: Vec<f64> = edges.iter().map(|&(a, b)| if mask[a] != mask[b] { 1.0 } else { 0.0 }).collect();
            debug_assert_eq!(coeffs.len(), m);
            lp.add_constraint(coeffs, Relation::Ge, cut.kind.requirement());
            added.insert(cut.set.clone());
            tight_cuts.push(cut.set);
        }
    }
}

fn clean(n: usize, raw: Vec<f64>) -> EdgeVector {
    EdgeVector::from_values(n, raw.into_iter().map(|v| if v.abs() < 1e-11 { 0.0 } else { v }).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeViolation {
    pub vertex: usize,
    pub value: f64,
    pub required: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct HkReport {
    pub degree_violations: Vec<DegreeViolation>,
    pub cut_violations: Vec<CutQuery>,
    /// Whether cuts were checked by full enumeration rather than separation.
    pub exhaustive: bool,
}

impl HkReport {
    pub fn is_empty(&self) -> bool {
        self.degree_violations.is_empty() && self.cut_violations.is_empty()
    }
}

/// Checks degree equalities and cut constraints of the path Held-Karp polytope.
pub fn hk_verify(x: &EdgeVector, inst: &Instance, tol: f64) -> HkReport {
    let n = inst.n();
    let degree_violations = (0..n)
        .filter_map(|v| {
            let required = if inst.is_endpoint(v) { 1.0 } else { 2.0 };
            let value = x.degree(v);
            ((value - required).abs() > tol).then_some(DegreeViolation { vertex: v, value, required })
        })
        .collect();
    let (cut_violations, exhaustive) = if n <= ENUMERATION_LIMIT {
        let family = CutFamily::HeldKarp { s: inst.s(), t: inst.t() };
        let cuts = enumerate_cut_check(x, family, tol).expect("size checked");
        let cuts = cuts
            .into_iter()
            .map(|c| CutQuery {
                kind: if c.required == 1.0 { CutKind::StSeparating } else { CutKind::NonSeparating },
                set: c.set,
                capacity: c.capacity,
            })
            .collect();
        (cuts, true)
    } else {
        (separate_all(x, inst, tol), false)
    };
    HkReport { degree_violations, cut_violations, exhaustive }
}
