//! Prize-collecting s-t paths: LP relaxation, threshold rounding, and the
//! exactly derandomised mix of a primal-dual oracle with rounded paths.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{exact_pc_path, PC_LIMIT};
use crate::instance::{all_edges, membership, EdgeVector, Instance};
use crate::lp::{nonseparating_cut, simplex_solve, st_cut, LinearProgram, Relation, Sense, HK_TOL};
use crate::narrow::RATIO_SLACK;
use crate::par::Exec;
use crate::solver::{run_bom, SolveOptions, GOLDEN_RATIO};

/// LP values of `y` this close to 0 or 1 are snapped.
pub const Y_SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PcInstance {
    inst: Instance,
    prizes: Vec<f64>,
}

impl PcInstance {
    /// `prizes` lists one value per internal vertex in index order.
    pub fn new(inst: Instance, prizes: &[f64]) -> Result<Self> {
        let internal: Vec<usize> = inst.internal_vertices().collect();
        if prizes.len() != internal.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} prizes (one per internal vertex), got {}",
                internal.len(),
                prizes.len()
            )));
        }
        if let Some(p) = prizes.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidInput(format!("prizes must be finite and nonnegative, got {p}")));
        }
        let mut full = vec![0.0; inst.n()];
        for (&v, &p) in internal.iter().zip(prizes) {
            full[v] = p;
        }
        Ok(Self { inst, prizes: full })
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    /// Prize of `v`; zero for the endpoints.
    pub fn prize(&self, v: usize) -> f64 {
        self.prizes[v]
    }

    /// Prizes of the internal vertices in index order.
    pub fn internal_prizes(&self) -> Vec<f64> {
        self.inst.internal_vertices().map(|v| self.prizes[v]).collect()
    }

    /// Total prize of internal vertices missing from `order`.
    pub fn missed_prize(&self, order: &[usize]) -> f64 {
        let seen = membership(self.inst.n(), order);
        self.inst.internal_vertices().filter(|&v| !seen[v]).map(|v| self.prizes[v]).sum()
    }

    pub fn objective(&self, order: &[usize]) -> f64 {
        self.inst.path_cost(order) + self.missed_prize(order)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcLpSolution {
    pub x: EdgeVector,
    /// Per vertex; endpoints carry 1.
    pub y: Vec<f64>,
    /// `c(x) + π(1 - y)`.
    pub value: f64,
    pub edge_cost: f64,
    pub iterations: usize,
}

/// Solves the prize-collecting relaxation by cut generation.
pub fn pc_lp_solve(pc: &PcInstance, tol: f64) -> Result<PcLpSolution> {
    let inst = pc.instance();
    let n = inst.n();
    let (s, t) = (inst.s(), inst.t());
    let edges = all_edges(n);
    let m = edges.len();
    let internal: Vec<usize> = inst.internal_vertices().collect();
    let k = internal.len();
    let mut ycol = vec![usize::MAX; n];
    for (j, &v) in internal.iter().enumerate() {
        ycol[v] = m + j;
    }

    let mut objective = inst.upper_triangle();
    objective.extend(internal.iter().map(|&v| -pc.prize(v)));
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..k {
        lp.set_bounds(m + j, 0.0, 1.0);
    }
    for v in 0..n {
        let mut row = vec![0.0; m + k];
        for (i, &(a, b)) in edges.iter().enumerate() {
            if a == v || b == v {
                row[i] = 1.0;
            }
        }
        if v == s || v == t {
            lp.add_constraint(row, Relation::Eq, 1.0);
        } else {
            row[ycol[v]] = -2.0;
            lp.add_constraint(row, Relation::Eq, 0.0);
        }
    }

    let constant: f64 = internal.iter().map(|&v| pc.prize(v)).sum();
    let cap = 50 * n * n;
    let mut added: HashSet<(Vec<usize>, usize)> = HashSet::new();
    let mut rounds = 0;
    loop {
        let sol = simplex_solve(&lp)?;
        let x = EdgeVector::from_values(n, sol.x[..m].iter().map(|&v| if v.abs() < 1e-11 { 0.0 } else { v }).collect());
        let mut y = vec![1.0; n];
        for &v in &internal {
            y[v] = sol.x[ycol[v]].clamp(0.0, 1.0);
        }
        let edge_cost = x.cost(inst);
        let value = edge_cost + internal.iter().map(|&v| pc.prize(v) * (1.0 - y[v])).sum::<f64>();
        debug_assert!((value - (sol.objective + constant)).abs() < 1e-6 * (1.0 + value.abs()));

        let mut fresh: Vec<(Vec<usize>, usize)> = Vec::new();
        let cut = st_cut(&x, s, t);
        if cut.capacity < 1.0 - tol {
            fresh.push((cut.set, usize::MAX));
        }
        for &v in &internal {
            if y[v] > tol {
                let cut = nonseparating_cut(&x, v, s, t);
                if cut.capacity < 2.0 * y[v] - tol {
                    fresh.push((cut.set, v));
                }
            }
        }
        fresh.retain(|c| !added.contains(c));
        if fresh.is_empty() {
            return Ok(PcLpSolution { x, y, value, edge_cost, iterations: rounds });
        }
        if rounds >= cap {
            return Err(Error::Invariant(format!("prize-collecting LP exceeded {cap} separation rounds")));
        }
        rounds += 1;
        for (set, v) in fresh {
            let mask = membership(n, &set);
            let mut row: Vec<f64> = edges.iter().map(|&(a, b)| if mask[a] != mask[b] { 1.0 } else { 0.0 }).collect();
            row.resize(m + k, 0.0);
            if v == usize::MAX {
                lp.add_constraint(row, Relation::Ge, 1.0);
            } else {
                row[ycol[v]] = -2.0;
                lp.add_constraint(row, Relation::Ge, 0.0);
            }
            added.insert((set, v));
        }
    }
}

/// Vertices with `y_v ≥ γ` plus the endpoints, as an induced instance and
/// the map from its indices back to the original ones.
pub fn threshold_subinstance(pc: &PcInstance, lp: &PcLpSolution, gamma: f64) -> Result<(Instance, Vec<usize>)> {
    let inst = pc.instance();
    let keep: Vec<usize> = (0..inst.n()).filter(|&v| inst.is_endpoint(v) || lp.y[v] >= gamma).collect();
    inst.induced(&keep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcPath {
    pub order: Vec<usize>,
    pub path_cost: f64,
    pub missed_prize: f64,
    pub objective: f64,
}

impl PcPath {
    pub fn evaluate(pc: &PcInstance, order: Vec<usize>) -> Self {
        let path_cost = pc.instance().path_cost(&order);
        let missed_prize = pc.missed_prize(&order);
        Self { order, path_cost, missed_prize, objective: path_cost + missed_prize }
    }
}

/// A path whose objective is at most twice the LP edge cost plus the LP's
/// missed prize.
pub trait PdOracle: Sync {
    fn solve(&self, pc: &PcInstance) -> Result<PcPath>;
}

/// Exact subset dynamic program; meets the oracle contract trivially.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactPdOracle;

impl PdOracle for ExactPdOracle {
    fn solve(&self, pc: &PcInstance) -> Result<PcPath> {
        if pc.instance().n() > PC_LIMIT {
            return Err(Error::InvalidInput(format!(
                "default oracle is exact and limited to n <= {PC_LIMIT}; plug in a primal-dual oracle for larger inputs"
            )));
        }
        let r = exact_pc_path(pc)?;
        Ok(PcPath::evaluate(pc, r.witness))
    }
}

pub fn pd_oracle(pc: &PcInstance) -> Result<PcPath> {
    ExactPdOracle.solve(pc)
}

/// `a = e^{1 - 2/ρ}`.
pub fn mix_threshold(rho: f64) -> f64 {
    (1.0 - 2.0 / rho).exp()
}

/// Probability of running the oracle: `(1 + ρ ln a) / (2 - a + ρ ln a)`.
pub fn oracle_probability(rho: f64) -> f64 {
    let a = mix_threshold(rho);
    (1.0 + rho * a.ln()) / (2.0 - a + rho * a.ln())
}

/// `ρ / (ρ - a)`.
pub fn pc_ratio(rho: f64) -> f64 {
    rho / (rho - mix_threshold(rho))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalCandidate {
    /// Thresholds `γ ∈ (lo, hi]` all keep the same vertex set.
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
    pub kept: Vec<usize>,
    pub path: PcPath,
    /// `ρ c(x) / lo` with slack.
    pub cost_bound: f64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcReport {
    pub order: Vec<usize>,
    pub path_cost: f64,
    pub missed_prize: f64,
    pub objective: f64,
    pub lp_value: f64,
    pub expectation: f64,
    pub rho: f64,
    pub a: f64,
    pub p: f64,
    pub ratio: f64,
    pub pd: PcPath,
    pub pd_bound_holds: bool,
    pub intervals: Vec<IntervalCandidate>,
    pub lp: PcLpSolution,
}

impl PcReport {
    /// Total interval weight on which `v` is dropped.
    pub fn drop_weight(&self, v: usize) -> f64 {
        self.intervals.iter().filter(|c| !c.kept.contains(&v)).map(|c| c.weight).sum()
    }
}

pub struct PcOptions<'a> {
    pub rho: f64,
    pub tol: f64,
    pub oracle: &'a dyn PdOracle,
    pub exec: Exec,
}

impl Default for PcOptions<'_> {
    fn default() -> Self {
        Self { rho: GOLDEN_RATIO, tol: HK_TOL, oracle: &ExactPdOracle, exec: Exec::default() }
    }
}

pub fn pc_solve(pc: &PcInstance, rho: f64) -> Result<PcReport> {
    pc_solve_with(pc, &PcOptions { rho, ..PcOptions::default() })
}

pub fn pc_solve_with(pc: &PcInstance, opts: &PcOptions<'_>) -> Result<PcReport> {
    let rho = opts.rho;
    if !(1.5..2.0).contains(&rho) {
        return Err(Error::InvalidInput(format!("rho must lie in [1.5, 2), got {rho}")));
    }
    let lp = pc_lp_solve(pc, opts.tol)?;
    pc_round(pc, lp, opts)
}

/// Rounds a feasible LP point: the oracle path mixed with best-of-many on
/// every threshold interval. `opts.tol` is unused here.
pub fn pc_round(pc: &PcInstance, mut lp: PcLpSolution, opts: &PcOptions<'_>) -> Result<PcReport> {
    let rho = opts.rho;
    if !(1.5..2.0).contains(&rho) {
        return Err(Error::InvalidInput(format!("rho must lie in [1.5, 2), got {rho}")));
    }
    let inst = pc.instance();
    if lp.y.len() != inst.n() || lp.x.n() != inst.n() {
        return Err(Error::InvalidInput("LP point does not match the instance".into()));
    }
    for v in inst.internal_vertices() {
        if lp.y[v] < Y_SNAP {
            lp.y[v] = 0.0;
        } else if lp.y[v] > 1.0 - Y_SNAP {
            lp.y[v] = 1.0;
        }
    }
    let a = mix_threshold(rho);
    let p = oracle_probability(rho);

    let mut cuts: Vec<f64> = inst.internal_vertices().map(|v| lp.y[v]).filter(|&y| y > a && y < 1.0).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut points = vec![a];
    points.extend(cuts);
    points.push(1.0);
    let windows: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();

    let pd = opts.oracle.solve(pc)?;
    let pd_bound = 2.0 * lp.edge_cost + (lp.value - lp.edge_cost);
    let pd_bound_holds = pd.objective <= pd_bound + RATIO_SLACK * pd_bound.max(1.0);

    let edge_cost = lp.edge_cost;
    let lp_ref = &lp;
    let intervals: Vec<IntervalCandidate> = opts
        .exec
        .map(&windows, |&(lo, hi)| -> Result<IntervalCandidate> {
            let (sub, map) = threshold_subinstance(pc, lp_ref, hi)?;
            let order: Vec<usize> = if sub.n() == 2 {
                vec![inst.s(), inst.t()]
            } else {
                let run = run_bom(&sub, &SolveOptions::with_exec(crate::par::Exec::Sequential))?;
                run.solution.order.iter().map(|&v| map[v]).collect()
            };
            let path = PcPath::evaluate(pc, order);
            let cost_bound = rho * edge_cost / lo * (1.0 + RATIO_SLACK) + RATIO_SLACK;
            Ok(IntervalCandidate {
                lo,
                hi,
                weight: (hi - lo) / (1.0 - a),
                kept: map,
                bound_holds: path.path_cost <= cost_bound,
                path,
                cost_bound,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let mix: f64 = intervals.iter().map(|c| c.weight * c.path.objective).sum();
    let expectation = p * pd.objective + (1.0 - p) * mix;
    let mut best = &pd;
    for c in &intervals {
        if c.path.objective < best.objective {
            best = &c.path;
        }
    }
    let best = best.clone();
    Ok(PcReport {
        order: best.order,
        path_cost: best.path_cost,
        missed_prize: best.missed_prize,
        objective: best.objective,
        lp_value: lp.value,
        expectation,
        rho,
        a,
        p,
        ratio: pc_ratio(rho),
        pd,
        pd_bound_holds,
        intervals,
        lp,
    })
}
