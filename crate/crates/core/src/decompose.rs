//! Writing a Held-Karp point as a convex combination of spanning trees by
//! column generation.
//!
//! The master LP minimises the total slack `σ⁺ + σ⁻` needed to match `x*`
//! with `Σ λ_T χ_T` over the trees found so far; pricing is a maximum-weight
//! spanning tree under the edge duals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{all_edges, Edge, EdgeVector};
use crate::lp::{LinearProgram, Relation, Sense, Tableau};

/// Edges with `x*_e` at or below this are dropped from the support.
pub const SUPPORT_EPS: f64 = 1e-9;
/// Coefficients below this are pruned from the final combination.
pub const LAMBDA_EPS: f64 = 1e-9;
pub const DECOMPOSE_TOL: f64 = 1e-6;
const PRICING_EPS: f64 = 1e-11;
const SLACK_TARGET: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Merges the two classes; false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal over `candidates` (assumed in canonical order), heaviest first;
/// equal weights keep canonical order.
fn kruskal(n: usize, weights: &EdgeVector, candidates: &[Edge]) -> Result<Vec<Edge>> {
    let mut order: Vec<Edge> = candidates.to_vec();
    order.sort_by(|&(a, b), &(c, d)| weights.get(c, d).total_cmp(&weights.get(a, b)));
    let mut dsu = DisjointSet::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (u, v) in order {
        if dsu.union(u, v) {
            tree.push((u, v));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    if tree.len() + 1 != n {
        return Err(Error::NotConnected);
    }
    tree.sort_unstable();
    Ok(tree)
}

/// Maximum-weight spanning tree. With `restrict_to_support` only edges of
/// positive weight (above [`SUPPORT_EPS`]) are eligible.
pub fn max_weight_spanning_tree(n: usize, weights: &EdgeVector, restrict_to_support: bool) -> Result<Vec<Edge>> {
    let candidates: Vec<Edge> = if restrict_to_support {
        all_edges(n).into_iter().filter(|&(u, v)| weights.get(u, v) > SUPPORT_EPS).collect()
    } else {
        all_edges(n)
    };
    kruskal(n, weights, &candidates)
}

/// Minimum-weight spanning tree over the complete graph.
pub fn min_weight_spanning_tree(n: usize, weights: &EdgeVector) -> Vec<Edge> {
    kruskal(n, &weights.scaled(-1.0), &all_edges(n)).expect("complete graph is connected")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeCombination {
    pub trees: Vec<Vec<Edge>>,
    pub lambdas: Vec<f64>,
    /// `max_e |Σ λ_i χ_{T_i}(e) − x*_e|`.
    pub residual: f64,
}

impl TreeCombination {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// `Σ λ_i χ_{T_i}`.
    pub fn marginals(&self, n: usize) -> EdgeVector {
        let mut out = EdgeVector::zeros(n);
        for (tree, &l) in self.trees.iter().zip(&self.lambdas) {
            for &(u, v) in tree {
                out.add(u, v, l);
            }
        }
        out
    }
}

/// Convex combination of support trees reproducing `x` within `tol`.
pub fn decompose(x: &EdgeVector, tol: f64) -> Result<TreeCombination> {
    let n = x.n();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two vertices".into()));
    }
    let support: Vec<Edge> = all_edges(n).into_iter().filter(|&(u, v)| x.get(u, v) > SUPPORT_EPS).collect();
    let m = support.len();
    let first = kruskal(n, x, &support)?;

    // Columns: σ⁺ (m), σ⁻ (m), then one λ per tree. Rows: m edge rows, convexity.
    let mut obj = vec![1.0; 2 * m];
    obj.push(0.0);
    let mut lp = LinearProgram::new(Sense::Minimize, obj);
    for (i, &(u, v)) in support.iter().enumerate() {
        let mut row = vec![0.0; 2 * m + 1];
        row[i] = 1.0;
        row[m + i] = -1.0;
        row[2 * m] = if first.contains(&(u, v)) { 1.0 } else { 0.0 };
        lp.add_constraint(row, Relation::Eq, x.get(u, v));
    }
    let mut conv = vec![0.0; 2 * m + 1];
    conv[2 * m] = 1.0;
    lp.add_constraint(conv, Relation::Eq, 1.0);

    let mut tab = Tableau::build(&lp)?;
    let mut trees = vec![first];
    let max_rounds = 20 * m.max(1);
    let mut rounds = 0;
    let mut sol;
    loop {
        tab.solve()?;
        sol = tab.solution();
        if sol.objective <= SLACK_TARGET {
            break;
        }
        let mut duals = EdgeVector::zeros(n);
        for (i, &(u, v)) in support.iter().enumerate() {
            duals.set(u, v, sol.duals[i]);
        }
        let mu = sol.duals[m];
        let tree = kruskal(n, &duals, &support)?;
        let gain: f64 = tree.iter().map(|&(u, v)| duals.get(u, v)).sum::<f64>() + mu;
        if gain <= PRICING_EPS || trees.contains(&tree) {
            break;
        }
        rounds += 1;
        if rounds > max_rounds {
            let combo = assemble(x, &trees, &sol.x[2 * m..]);
            return Err(Error::Decomposition { residual: combo.residual, rounds });
        }
        let mut coeffs: Vec<f64> = support.iter().map(|e| if tree.contains(e) { 1.0 } else { 0.0 }).collect();
        coeffs.push(1.0);
        tab.add_column(0.0, &coeffs);
        trees.push(tree);
    }

    let combo = assemble(x, &trees, &sol.x[2 * m..]);
    if combo.residual > tol {
        return Err(Error::Decomposition { residual: combo.residual, rounds });
    }
    Ok(combo)
}

fn assemble(x: &EdgeVector, trees: &[Vec<Edge>], lambdas: &[f64]) -> TreeCombination {
    let mut kept_trees = Vec::new();
    let mut kept = Vec::new();
    for (tree, &l) in trees.iter().zip(lambdas) {
        if l >= LAMBDA_EPS {
            kept_trees.push(tree.clone());
            kept.push(l);
        }
    }
    let total: f64 = kept.iter().sum();
    if total > 0.0 {
        for l in &mut kept {
            *l /= total;
        }
    }
    let mut combo = TreeCombination { trees: kept_trees, lambdas: kept, residual: 0.0 };
    combo.residual = combo.marginals(x.n()).max_abs_diff(x);
    combo
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinationReport {
    pub valid: bool,
    pub deviation: f64,
    pub problems: Vec<String>,
}

/// Checks every structural property of `combo` against `x` at tolerance `tol`.
pub fn verify_combination(x: &EdgeVector, combo: &TreeCombination, tol: f64) -> CombinationReport {
    let n = x.n();
    let mut problems = Vec::new();
    if combo.trees.len() != combo.lambdas.len() {
        problems.push(format!("{} trees but {} coefficients", combo.trees.len(), combo.lambdas.len()));
    }
    for (i, tree) in combo.trees.iter().enumerate() {
        if let Err(e) = check_spanning_tree(n, tree) {
            problems.push(format!("tree {i}: {e}"));
        }
        for &(u, v) in tree {
            if u < n && v < n && u != v && x.get(u, v) <= SUPPORT_EPS {
                problems.push(format!("tree {i} uses ({u},{v}) outside the support"));
            }
        }
    }
    if let Some(l) = combo.lambdas.iter().find(|&&l| l < 0.0) {
        problems.push(format!("negative coefficient {l}"));
    }
    let total: f64 = combo.lambdas.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        problems.push(format!("coefficients sum to {total}"));
    }
    let support = x.support(SUPPORT_EPS).len();
    if combo.trees.len() > support + 1 {
        problems.push(format!("{} trees exceed support size {} + 1", combo.trees.len(), support));
    }
    let deviation = if problems.iter().any(|p| p.starts_with("tree")) {
        f64::INFINITY
    } else {
        combo.marginals(n).max_abs_diff(x)
    };
    if deviation > tol {
        problems.push(format!("marginal deviation {deviation:e}"));
    }
    CombinationReport { valid: problems.is_empty(), deviation, problems }
}

/// `Ok` if `edges` is a spanning tree on `0..n`.
pub fn check_spanning_tree(n: usize, edges: &[Edge]) -> Result<()> {
    if edges.len() + 1 != n {
        return Err(Error::NotATree(format!("{} edges for {n} vertices", edges.len())));
    }
    let mut dsu = DisjointSet::new(n);
    for &(u, v) in edges {
        if u >= n || v >= n || u == v {
            return Err(Error::NotATree(format!("invalid edge ({u},{v})")));
        }
        if !dsu.union(u, v) {
            return Err(Error::NotATree(format!("edge ({u},{v}) closes a cycle")));
        }
    }
    Ok(())
}
