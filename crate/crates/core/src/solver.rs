//! Best-of-many Christofides for the s-t path problem and the single-tree
//! baseline built on a minimum spanning tree.

use serde::Serialize;

use crate::decompose::{decompose, min_weight_spanning_tree, TreeCombination, DECOMPOSE_TOL};
use crate::error::{Error, Result};
use crate::instance::{Edge, Instance};
use crate::lp::{hk_solve_with, HkOptions, HkSolution};
use crate::narrow::RATIO_SLACK;
use crate::par::Exec;
use crate::tjoin::{degrees, eulerian_path, min_tjoin, shortcut, wrong_parity_set, JoinResult, ParitySet};

pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeOutcome {
    pub tree_index: usize,
    pub lambda: f64,
    pub tree_cost: f64,
    pub join_cost: f64,
    pub path_cost: f64,
    pub parity_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSolution {
    pub order: Vec<usize>,
    pub cost: f64,
    pub per_tree: Vec<TreeOutcome>,
    pub chosen_tree: usize,
    pub hk_value: f64,
}

impl PathSolution {
    /// `Σ λ_i [c(T_i) + c(J_i)]`.
    pub fn average_tree_plus_join(&self) -> f64 {
        self.per_tree.iter().map(|o| o.lambda * (o.tree_cost + o.join_cost)).sum()
    }

    /// `Σ λ_i c(H_i)`.
    pub fn average_path_cost(&self) -> f64 {
        self.per_tree.iter().map(|o| o.lambda * o.path_cost).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub hk: HkOptions,
    pub decompose_tol: f64,
    pub exec: Exec,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { hk: HkOptions::default(), decompose_tol: DECOMPOSE_TOL, exec: Exec::default() }
    }
}

impl SolveOptions {
    pub fn with_exec(exec: Exec) -> Self {
        Self { hk: HkOptions { exec, ..HkOptions::default() }, decompose_tol: DECOMPOSE_TOL, exec }
    }
}

/// Everything produced by one tree of the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeRun {
    pub tree: Vec<Edge>,
    pub parity: ParitySet,
    pub join: JoinResult,
    pub walk: Vec<usize>,
    pub order: Vec<usize>,
    pub path_cost: f64,
}

/// Full trace of a best-of-many run.
#[derive(Clone, Debug)]
pub struct BomRun {
    pub hk: HkSolution,
    pub combo: TreeCombination,
    pub trees: Vec<TreeRun>,
    pub solution: PathSolution,
}

/// Parity correction, Eulerian walk and shortcut for one spanning tree.
pub fn augment_tree(inst: &Instance, tree: &[Edge]) -> Result<TreeRun> {
    let n = inst.n();
    let parity = wrong_parity_set(n, tree, inst.s(), inst.t())?;
    let join = min_tjoin(inst, &parity)?;
    let mut multigraph = tree.to_vec();
    multigraph.extend_from_slice(&join.edges);
    let walk = eulerian_path(n, &multigraph, inst.s(), inst.t())?;
    let (order, path_cost) = shortcut(&walk, inst)?;
    Ok(TreeRun { tree: tree.to_vec(), parity, join, walk, order, path_cost })
}

pub fn solve_bom(inst: &Instance) -> Result<PathSolution> {
    Ok(run_bom(inst, &SolveOptions::default())?.solution)
}

pub fn run_bom(inst: &Instance, opts: &SolveOptions) -> Result<BomRun> {
    let hk = hk_solve_with(inst, &opts.hk)?;
    run_bom_from(inst, hk, opts)
}

/// Best-of-many from an already solved relaxation.
pub fn run_bom_from(inst: &Instance, hk: HkSolution, opts: &SolveOptions) -> Result<BomRun> {
    let combo = decompose(&hk.x, opts.decompose_tol)?;
    let trees: Vec<TreeRun> =
        opts.exec.map(&combo.trees, |tree| augment_tree(inst, tree)).into_iter().collect::<Result<_>>()?;
    let per_tree: Vec<TreeOutcome> = trees
        .iter()
        .zip(&combo.lambdas)
        .enumerate()
        .map(|(i, (run, &lambda))| TreeOutcome {
            tree_index: i,
            lambda,
            tree_cost: inst.edges_cost(&run.tree),
            join_cost: run.join.cost,
            path_cost: run.path_cost,
            parity_size: run.parity.len(),
        })
        .collect();
    let chosen = (0..trees.len())
        .min_by(|&a, &b| trees[a].path_cost.total_cmp(&trees[b].path_cost).then(a.cmp(&b)))
        .ok_or_else(|| Error::Invariant("empty decomposition".into()))?;
    let solution = PathSolution {
        order: trees[chosen].order.clone(),
        cost: trees[chosen].path_cost,
        per_tree,
        chosen_tree: chosen,
        hk_value: hk.value,
    };
    Ok(BomRun { hk, combo, trees, solution })
}

/// Minimum spanning tree plus minimum join of its wrong-parity set.
pub fn solve_hoogeveen(inst: &Instance) -> Result<PathSolution> {
    let hk = hk_solve_with(inst, &HkOptions::default())?;
    solve_hoogeveen_from(inst, &hk)
}

pub fn solve_hoogeveen_from(inst: &Instance, hk: &HkSolution) -> Result<PathSolution> {
    let tree = min_weight_spanning_tree(inst.n(), &inst.cost_vector());
    let run = augment_tree(inst, &tree)?;
    Ok(PathSolution {
        per_tree: vec![TreeOutcome {
            tree_index: 0,
            lambda: 1.0,
            tree_cost: inst.edges_cost(&tree),
            join_cost: run.join.cost,
            path_cost: run.path_cost,
            parity_size: run.parity.len(),
        }],
        order: run.order,
        cost: run.path_cost,
        chosen_tree: 0,
        hk_value: hk.value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppendixReport {
    pub mst_cost: f64,
    pub join_cost: f64,
    /// `½ (c(x*) + c(s,t))`.
    pub bound_j2: f64,
    /// `c(x*) - c(s,t)`.
    pub bound_j3: f64,
    /// Cost of the tree minus its s-t path, itself a join for the same parity set.
    pub witness_cost: f64,
    pub witness_is_join: bool,
    pub mst_holds: bool,
    pub j2_holds: bool,
    pub j3_holds: bool,
    pub all_hold: bool,
}

/// Checks the three classical bounds on the spanning tree and its join.
pub fn appendix_bounds_check(inst: &Instance, hk: &HkSolution) -> Result<AppendixReport> {
    let n = inst.n();
    let (s, t) = (inst.s(), inst.t());
    let tree = min_weight_spanning_tree(n, &inst.cost_vector());
    let mst_cost = inst.edges_cost(&tree);
    let parity = wrong_parity_set(n, &tree, s, t)?;
    let join = min_tjoin(inst, &parity)?;

    let path = tree_path(n, &tree, s, t);
    let witness: Vec<Edge> = tree.iter().copied().filter(|e| !path.contains(e)).collect();
    let deg = degrees(n, &witness);
    let witness_is_join = (0..n).all(|v| (deg[v] % 2 == 1) == parity.contains(v));
    let witness_cost = inst.edges_cost(&witness);

    let c = hk.value;
    let cst = inst.cost(s, t);
    let slack = RATIO_SLACK * c.max(f64::MIN_POSITIVE);
    let bound_j2 = 0.5 * (c + cst);
    let bound_j3 = c - cst;
    let mst_holds = mst_cost <= c + slack;
    let j2_holds = join.cost <= bound_j2 + slack;
    let j3_holds = join.cost <= bound_j3 + slack && join.cost <= witness_cost + slack;
    Ok(AppendixReport {
        mst_cost,
        join_cost: join.cost,
        bound_j2,
        bound_j3,
        witness_cost,
        witness_is_join,
        mst_holds,
        j2_holds,
        j3_holds,
        all_hold: mst_holds && j2_holds && j3_holds && witness_is_join,
    })
}

/// Edges on the unique `a`-`b` path of a spanning tree, canonical.
fn tree_path(n: usize, tree: &[Edge], a: usize, b: usize) -> Vec<Edge> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in tree {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut parent = vec![usize::MAX; n];
    parent[a] = a;
    let mut stack = vec![a];
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                stack.push(w);
            }
        }
    }
    let mut out = Vec::new();
    let mut v = b;
    while v != a {
        let p = parent[v];
        out.push(if p < v { (p, v) } else { (v, p) });
        v = p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_vertices() {
        let inst = Instance::from_upper_triangle(2, 0, 1, &[3.5]).unwrap();
        let sol = solve_bom(&inst).unwrap();
        assert_eq!(sol.order, vec![0, 1]);
        assert_eq!(sol.cost, 3.5);
        assert_eq!(sol.hk_value, 3.5);
        let report = appendix_bounds_check(&inst, &crate::lp::hk_solve(&inst).unwrap()).unwrap();
        assert!(report.all_hold);
        assert_eq!(report.join_cost, 0.0);
    }

    #[test]
    fn unit_triangle() {
        let inst = Instance::from_upper_triangle(3, 0, 1, &[1.0, 1.0, 1.0]).unwrap();
        let sol = solve_bom(&inst).unwrap();
        assert_eq!(sol.order, vec![0, 2, 1]);
        assert_abs_diff_eq!(sol.cost, 2.0, epsilon = 1e-9);
        let base = solve_hoogeveen(&inst).unwrap();
        assert_abs_diff_eq!(base.cost, 2.0, epsilon = 1e-9);
        let report = appendix_bounds_check(&inst, &crate::lp::hk_solve(&inst).unwrap()).unwrap();
        // MST is (0,1),(0,2): s has even degree and 2 is an odd leaf.
        assert_eq!(report.join_cost, 1.0);
        assert_abs_diff_eq!(report.bound_j2, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(report.bound_j3, 1.0, epsilon = 1e-9);
        assert!(report.all_hold);
    }

    #[test]
    fn tree_path_on_star() {
        let p = tree_path(4, &[(0, 2), (1, 2), (2, 3)], 0, 1);
        assert_eq!(p, vec![(1, 2), (0, 2)]);
    }
}
