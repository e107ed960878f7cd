//! Unit-weight graphical metrics: the layer-traversal path, the three-way
//! candidate selection, layer connectivity checks and the ratio constants.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{exact_path_tsp, PATH_LIMIT};
use crate::flow::gomory_hu;
use crate::instance::{all_edges, canonical, metric_closure, Edge, EdgeVector, GraphicalInstance, Instance};
use crate::lp::{hk_solve_with, HkOptions, HkSolution};
use crate::narrow::{compute_narrow_cuts_with, NarrowCutStructure, RATIO_SLACK};
use crate::par::Exec;
use crate::solver::{run_bom_from, SolveOptions};
use crate::tjoin::{eulerian_path, shortcut};

pub const DEFAULT_THETA: f64 = 0.12297;
pub const DEFAULT_SIGMA: f64 = 7.2774e-3;
pub const DEFAULT_KAPPA: f64 = 0.54045;
/// Constants tuned for the integrality-gap bound.
pub const GAP_THETA: f64 = 0.37304;
pub const GAP_SIGMA: f64 = 8.5757e-2;
pub const GAP_KAPPA: f64 = 0.84614;

/// Slack on the strict `> θ` layer inequalities.
pub const LEMMA_TOL: f64 = 1e-7;
/// Instances up to this size also get an exact candidate.
pub const SMALL_EXACT: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerTraversal {
    pub theta: f64,
    pub structure: NarrowCutStructure,
    /// `(q_i, p_i)`: entry and exit vertex of each layer.
    pub portals: Vec<(usize, usize)>,
    /// `P_i` from `q_i` to `p_i`, inside layer `i`.
    pub intra_paths: Vec<Vec<usize>>,
    /// `P_LT` as a vertex sequence.
    pub plt: Vec<usize>,
    pub plt_cost: u64,
    /// `η(P_LT) = Σ (c(e) - 1)`.
    pub eta_cost: u64,
    /// Cost-one graph edges added in pairs to reach isolated vertices.
    pub doubled: Vec<Edge>,
    /// `P_LT` edges followed by both copies of every doubled edge.
    pub augmented: Vec<Edge>,
    pub augmented_cost: u64,
    pub hc: Vec<usize>,
    pub hc_cost: u64,
}

impl LayerTraversal {
    /// `2(n-1) - c(P_LT) + 2η(P_LT)`.
    pub fn predicted_augmented_cost(&self, n: usize) -> i64 {
        2 * (n as i64 - 1) - self.plt_cost as i64 + 2 * self.eta_cost as i64
    }

    pub fn identity_holds(&self, n: usize) -> bool {
        self.augmented_cost as i64 == self.predicted_augmented_cost(n)
    }

    /// `θ η(P_LT) ≤ c(x*) - (n-1)` up to `1e-6`.
    pub fn eta_bound_holds(&self, hk_value: f64, n: usize) -> bool {
        self.theta * self.eta_cost as f64 <= hk_value - (n as f64 - 1.0) + 1e-6
    }
}

fn dist_matrix(g: &GraphicalInstance) -> Result<Vec<u64>> {
    Ok(g.distances()?.into_iter().map(u64::from).collect())
}

/// Minimum-η path from `from` to `to` in the complete graph on `layer`;
/// ties prefer fewer hops, then smaller vertex indices.
fn min_eta_path(layer: &[usize], dist: &[u64], n: usize, from: usize, to: usize) -> Vec<usize> {
    if from == to {
        return vec![from];
    }
    let k = layer.len();
    let pos = |v: usize| layer.iter().position(|&w| w == v).expect("vertex in layer");
    let (a, b) = (pos(from), pos(to));
    let mut best = vec![(u64::MAX, usize::MAX); k];
    let mut prev = vec![usize::MAX; k];
    let mut heap = BinaryHeap::new();
    best[a] = (0, 0);
    heap.push(Reverse((0u64, 0usize, layer[a], a)));
    while let Some(Reverse((eta, hops, _, i))) = heap.pop() {
        if (eta, hops) != best[i] {
            continue;
        }
        if i == b {
            break;
        }
        for j in 0..k {
            if j == i {
                continue;
            }
            let cand = (eta + dist[layer[i] * n + layer[j]] - 1, hops + 1);
            if cand < best[j] {
                best[j] = cand;
                prev[j] = i;
                heap.push(Reverse((cand.0, cand.1, layer[j], j)));
            }
        }
    }
    let mut path = vec![layer[b]];
    let mut i = b;
    while i != a {
        i = prev[i];
        path.push(layer[i]);
    }
    path.reverse();
    path
}

/// Builds `P_LT`, augments it into an Eulerian multigraph and shortcuts it.
pub fn build_layer_traversal(g: &GraphicalInstance, x: &EdgeVector, theta: f64) -> Result<LayerTraversal> {
    build_layer_traversal_with(g, x, theta, Exec::default())
}

pub fn build_layer_traversal_with(g: &GraphicalInstance, x: &EdgeVector, theta: f64, exec: Exec) -> Result<LayerTraversal> {
    let n = g.n();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "layer traversal needs n >= 3 (got {n}); use the direct s-t edge"
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidInput(format!("theta must lie in (0, 1), got {theta}")));
    }
    let (s, t) = (g.s(), g.t());
    let dist = dist_matrix(g)?;
    let structure = compute_narrow_cuts_with(x, s, t, 1.0 - theta, exec)?;
    let layers = &structure.layers;
    let ell = layers.len();
    let layer_of = structure.layer_of(n);

    // (p_i, q_{i+1}) for consecutive layers.
    let mut links = Vec::with_capacity(ell - 1);
    for i in 0..ell - 1 {
        let mut best: Option<(u64, usize, usize)> = None;
        for (u, v) in all_edges(n) {
            let (p, q) = match (layer_of[u], layer_of[v]) {
                (lu, lv) if lu == i && lv == i + 1 => (u, v),
                (lu, lv) if lv == i && lu == i + 1 => (v, u),
                _ => continue,
            };
            let c = dist[u * n + v];
            if best.is_none_or(|(bc, _, _)| c < bc) {
                best = Some((c, p, q));
            }
        }
        let (_, p, q) = best.ok_or_else(|| Error::Invariant(format!("no edge between layers {i} and {}", i + 1)))?;
        links.push((p, q));
    }
    let mut portals = Vec::with_capacity(ell);
    for i in 0..ell {
        let q = if i == 0 { s } else { links[i - 1].1 };
        let p = if i == ell - 1 { t } else { links[i].0 };
        portals.push((q, p));
    }
    let intra_paths: Vec<Vec<usize>> =
        (0..ell).map(|i| min_eta_path(&layers[i], &dist, n, portals[i].0, portals[i].1)).collect();
    let plt: Vec<usize> = intra_paths.iter().flatten().copied().collect();
    let plt_edges: Vec<Edge> = plt.windows(2).map(|w| canonical(w[0], w[1])).collect();
    let plt_cost: u64 = plt_edges.iter().map(|&(u, v)| dist[u * n + v]).sum();
    let eta_cost = plt_cost - plt_edges.len() as u64;

    let mut covered = vec![false; n];
    for &v in &plt {
        covered[v] = true;
    }
    let mut g_edges = g.edges().to_vec();
    g_edges.sort_unstable();
    let mut doubled = Vec::new();
    while let Some(&(u, v)) = g_edges.iter().find(|&&(u, v)| covered[u] != covered[v]) {
        covered[u] = true;
        covered[v] = true;
        doubled.push((u, v));
    }
    if covered.iter().any(|&c| !c) {
        return Err(Error::NotConnected);
    }
    let mut augmented = plt_edges;
    for &e in &doubled {
        augmented.push(e);
        augmented.push(e);
    }
    let augmented_cost: u64 = augmented.iter().map(|&(u, v)| dist[u * n + v]).sum();

    let inst = metric_closure(g)?;
    let walk = eulerian_path(n, &augmented, s, t)?;
    let (hc, _) = shortcut(&walk, &inst)?;
    let hc_cost = hc.windows(2).map(|w| dist[w[0] * n + w[1]]).sum();

    Ok(LayerTraversal {
        theta,
        structure,
        portals,
        intra_paths,
        plt,
        plt_cost,
        eta_cost,
        doubled,
        augmented,
        augmented_cost,
        hc,
        hc_cost,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerCheck {
    pub value: f64,
    pub holds: bool,
}

impl LayerCheck {
    fn new(value: f64, theta: f64) -> Self {
        Self { value, holds: value > theta - LEMMA_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerLemmaReport {
    pub theta: f64,
    /// `x*(E(L_i, L_{i+1}))` for each consecutive pair.
    pub consecutive: Vec<LayerCheck>,
    /// Minimum internal cut of each layer; `None` for singletons.
    pub layer_connectivity: Vec<Option<LayerCheck>>,
    pub bipartitions_checked: usize,
    pub bipartition_violations: usize,
    /// Smallest `x*(E(V_1, V_2))` seen over checked bipartitions.
    pub bipartition_min: Option<f64>,
    pub exhaustive: bool,
    pub all_hold: bool,
}

impl LayerLemmaReport {
    pub fn first_pair(&self) -> &LayerCheck {
        &self.consecutive[0]
    }

    pub fn last_pair(&self) -> &LayerCheck {
        self.consecutive.last().expect("at least two layers")
    }
}

/// Checks the connectivity of the layers of a `(1 - θ)`-narrow structure.
/// Bipartitions of contiguous interior layer unions are enumerated when the
/// count fits in `sample_budget`, otherwise `sample_budget` seeded samples
/// are drawn.
pub fn check_layer_lemmas(x: &EdgeVector, structure: &NarrowCutStructure, theta: f64, sample_budget: usize) -> LayerLemmaReport {
    let layers = &structure.layers;
    let ell = layers.len();
    let consecutive: Vec<LayerCheck> =
        (0..ell - 1).map(|i| LayerCheck::new(x.between(&layers[i], &layers[i + 1]), theta)).collect();

    let layer_connectivity: Vec<Option<LayerCheck>> = layers
        .iter()
        .map(|layer| {
            if layer.len() < 2 {
                return None;
            }
            let k = layer.len();
            let mut sub = EdgeVector::zeros(k);
            for a in 0..k {
                for b in a + 1..k {
                    sub.set(a, b, x.get(layer[a], layer[b]));
                }
            }
            let min = gomory_hu(&sub).iter().skip(1).map(|&(_, w)| w).fold(f64::INFINITY, f64::min);
            Some(LayerCheck::new(min, theta))
        })
        .collect();

    let mut checked = 0;
    let mut violations = 0;
    let mut minimum: Option<f64> = None;
    let mut exhaustive = true;
    let mut record = |union: &[usize], side: &[bool]| {
        let (a, b): (Vec<usize>, Vec<usize>) = union.iter().zip(side).fold((vec![], vec![]), |(mut a, mut b), (&v, &f)| {
            if f { a.push(v) } else { b.push(v) }
            (a, b)
        });
        let value = x.between(&a, &b);
        checked += 1;
        if value <= theta - LEMMA_TOL {
            violations += 1;
        }
        minimum = Some(minimum.map_or(value, |m: f64| m.min(value)));
    };
    for i in 0..ell {
        for j in i + 2..ell {
            let union: Vec<usize> = layers[i + 1..j].iter().flatten().copied().collect();
            let u = union.len();
            if u < 2 {
                continue;
            }
            let total = if u - 1 < usize::BITS as usize - 1 { (1usize << (u - 1)) - 1 } else { usize::MAX };
            if total <= sample_budget {
                // The last vertex always sits on the second side.
                for mask in 1..=total {
                    let side: Vec<bool> = (0..u).map(|b| b < u - 1 && mask >> b & 1 == 1).collect();
                    record(&union, &side);
                }
            } else {
                exhaustive = false;
                let mut rng = ChaCha8Rng::seed_from_u64(((i as u64) << 32) | j as u64);
                for _ in 0..sample_budget {
                    let mut side: Vec<bool> = (0..u).map(|_| rng.gen()).collect();
                    if side.iter().all(|&f| f) || side.iter().all(|&f| !f) {
                        let k = rng.gen_range(0..u);
                        side[k] = !side[k];
                    }
                    record(&union, &side);
                }
            }
        }
    }
    let all_hold = consecutive.iter().all(|c| c.holds)
        && layer_connectivity.iter().flatten().all(|c| c.holds)
        && violations == 0;
    LayerLemmaReport {
        theta,
        consecutive,
        layer_connectivity,
        bipartitions_checked: checked,
        bipartition_violations: violations,
        bipartition_min: minimum,
        exhaustive,
        all_hold,
    }
}

/// External algorithm for graphical instances, returning an s-t Hamiltonian
/// path as a vertex order.
pub trait GraphicalOracle: Sync {
    fn solve(&self, g: &GraphicalInstance, closure: &Instance) -> Result<Vec<usize>>;
}

/// Exact dynamic program as a stand-in oracle for small inputs.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactGraphicalOracle;

impl GraphicalOracle for ExactGraphicalOracle {
    fn solve(&self, _g: &GraphicalInstance, closure: &Instance) -> Result<Vec<usize>> {
        if closure.n() > PATH_LIMIT {
            return Err(Error::TooLarge { n: closure.n(), limit: PATH_LIMIT });
        }
        Ok(exact_path_tsp(closure)?.witness)
    }
}

/// Which of the three regimes bounds a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// `c(x*) ≥ (1+σ)(n-1)`; bounded by the oracle path.
    HighLp,
    /// `c(P_LT) ≥ κ(n-1)`; bounded by the layer traversal.
    LongTraversal,
    /// Otherwise; bounded by best-of-many.
    ShortTraversal,
}

/// `[5/6 + 3/(4(1+σ)), 2 - κ + 2σ/θ, (3+2θ)/(2+θ) + (1-θ)²κ/(4(2+θ))]`.
pub fn graphical_ratio_terms(theta: f64, sigma: f64, kappa: f64) -> [f64; 3] {
    [
        5.0 / 6.0 + 3.0 / (4.0 * (1.0 + sigma)),
        2.0 - kappa + 2.0 * sigma / theta,
        (3.0 + 2.0 * theta) / (2.0 + theta) + (1.0 - theta).powi(2) * kappa / (4.0 * (2.0 + theta)),
    ]
}

pub fn graphical_ratio(theta: f64, sigma: f64, kappa: f64) -> f64 {
    graphical_ratio_terms(theta, sigma, kappa).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Integrality-gap bound for `n` vertices. For `n ≥ 7` the first term picks
/// up `7/(12(n-1)(1+σ))`; smaller instances are bounded by `8/5`.
pub fn gap_bound(theta: f64, sigma: f64, kappa: f64, n: usize) -> f64 {
    match n {
        0..=2 => 1.0,
        3..=6 => 1.6,
        _ => {
            let mut terms = graphical_ratio_terms(theta, sigma, kappa);
            terms[0] += 7.0 / (12.0 * (n as f64 - 1.0) * (1.0 + sigma));
            terms.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Supremum of [`gap_bound`] over all `n`; the `n`-dependent term is largest at `n = 7`.
pub fn gap_bound_sup(theta: f64, sigma: f64, kappa: f64) -> f64 {
    gap_bound(theta, sigma, kappa, 7).max(1.6)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphicalCandidate {
    /// `"oracle"`, `"best_of_many"`, `"layer_traversal"`, `"exact"` or `"direct"`.
    pub name: String,
    pub order: Vec<usize>,
    pub cost: f64,
    pub case: Option<CaseKind>,
    /// The regime's ratio expression.
    pub case_ratio: Option<f64>,
    /// Whether this candidate's regime condition holds on the instance.
    pub case_applies: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphicalReport {
    pub order: Vec<usize>,
    pub cost: f64,
    pub chosen: String,
    pub hk_value: f64,
    pub hk_mass: f64,
    /// `x*(E) = n - 1` and `c(x*) ≥ n - 1`, both within `1e-6`.
    pub hk_graphical_ok: bool,
    pub theta: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub ratio_terms: [f64; 3],
    pub rho: f64,
    pub active_case: Option<CaseKind>,
    pub candidates: Vec<GraphicalCandidate>,
    pub traversal: Option<LayerTraversal>,
    pub identity_holds: bool,
    pub eta_bound_holds: bool,
    /// `cost ≤ ρ c(x*)` with slack; only a claim when an oracle was supplied.
    pub ratio_holds: bool,
    pub ratio_asserted: bool,
}

pub struct GraphicalOptions<'a> {
    pub theta: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub oracle: Option<&'a dyn GraphicalOracle>,
    pub exec: Exec,
}

impl Default for GraphicalOptions<'_> {
    fn default() -> Self {
        Self { theta: DEFAULT_THETA, sigma: DEFAULT_SIGMA, kappa: DEFAULT_KAPPA, oracle: None, exec: Exec::default() }
    }
}

pub fn solve_graphical(
    g: &GraphicalInstance,
    theta: f64,
    sigma: f64,
    kappa: f64,
    oracle: Option<&dyn GraphicalOracle>,
) -> Result<GraphicalReport> {
    solve_graphical_with(g, &GraphicalOptions { theta, sigma, kappa, oracle, exec: Exec::default() })
}

pub fn solve_graphical_with(g: &GraphicalInstance, opts: &GraphicalOptions<'_>) -> Result<GraphicalReport> {
    let (theta, sigma, kappa) = (opts.theta, opts.sigma, opts.kappa);
    if !(theta > 0.0 && theta < 1.0) || sigma < 0.0 || !(0.0..=2.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!(
            "need 0 < theta < 1, sigma >= 0, 0 <= kappa <= 2; got ({theta}, {sigma}, {kappa})"
        )));
    }
    let inst = metric_closure(g)?;
    let n = inst.n();
    let nm1 = n as f64 - 1.0;
    let ratio_terms = graphical_ratio_terms(theta, sigma, kappa);
    let rho = graphical_ratio(theta, sigma, kappa);
    let hk = hk_solve_with(&inst, &HkOptions { exec: opts.exec, ..HkOptions::default() })?;
    let hk_mass = hk.x.total();
    let hk_graphical_ok = (hk_mass - nm1).abs() <= 1e-6 && hk.value >= nm1 - 1e-6;

    if n < 3 {
        let order = vec![inst.s(), inst.t()];
        let cost = inst.path_cost(&order);
        return Ok(GraphicalReport {
            order: order.clone(),
            cost,
            chosen: "direct".into(),
            hk_value: hk.value,
            hk_mass,
            hk_graphical_ok,
            theta,
            sigma,
            kappa,
            ratio_terms,
            rho,
            active_case: None,
            candidates: vec![GraphicalCandidate {
                name: "direct".into(),
                order,
                cost,
                case: None,
                case_ratio: None,
                case_applies: false,
            }],
            traversal: None,
            identity_holds: true,
            eta_bound_holds: true,
            ratio_holds: cost <= hk.value * (1.0 + RATIO_SLACK),
            ratio_asserted: opts.oracle.is_some(),
        });
    }

    let traversal = build_layer_traversal_with(g, &hk.x, theta, opts.exec)?;
    let high_lp = hk.value >= (1.0 + sigma) * nm1;
    let long = traversal.plt_cost as f64 >= kappa * nm1;
    let active_case = Some(if high_lp {
        CaseKind::HighLp
    } else if long {
        CaseKind::LongTraversal
    } else {
        CaseKind::ShortTraversal
    });

    let mut candidates = Vec::new();
    if let Some(oracle) = opts.oracle {
        let order = oracle.solve(g, &inst)?;
        check_order(&inst, &order)?;
        candidates.push(GraphicalCandidate {
            name: "oracle".into(),
            cost: inst.path_cost(&order),
            order,
            case: Some(CaseKind::HighLp),
            case_ratio: Some(ratio_terms[0]),
            case_applies: high_lp,
        });
    }
    let bom = best_of_many(&inst, hk.clone(), opts.exec)?;
    candidates.push(GraphicalCandidate {
        name: "best_of_many".into(),
        cost: bom.1,
        order: bom.0,
        case: Some(CaseKind::ShortTraversal),
        case_ratio: Some(ratio_terms[2]),
        case_applies: !high_lp && !long,
    });
    candidates.push(GraphicalCandidate {
        name: "layer_traversal".into(),
        order: traversal.hc.clone(),
        cost: traversal.hc_cost as f64,
        case: Some(CaseKind::LongTraversal),
        case_ratio: Some(ratio_terms[1]),
        case_applies: !high_lp && long,
    });
    if n <= SMALL_EXACT {
        let exact = exact_path_tsp(&inst)?;
        candidates.push(GraphicalCandidate {
            name: "exact".into(),
            order: exact.witness,
            cost: exact.optimum,
            case: None,
            case_ratio: None,
            case_applies: false,
        });
    }

    let best = candidates
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.cost.total_cmp(&b.cost).then(i.cmp(j)))
        .map(|(_, c)| c.clone())
        .expect("at least two candidates");
    Ok(GraphicalReport {
        ratio_holds: best.cost <= rho * hk.value * (1.0 + RATIO_SLACK),
        ratio_asserted: opts.oracle.is_some(),
        order: best.order,
        cost: best.cost,
        chosen: best.name,
        hk_value: hk.value,
        hk_mass,
        hk_graphical_ok,
        theta,
        sigma,
        kappa,
        ratio_terms,
        rho,
        active_case,
        candidates,
        identity_holds: traversal.identity_holds(n),
        eta_bound_holds: traversal.eta_bound_holds(hk.value, n),
        traversal: Some(traversal),
    })
}

fn best_of_many(inst: &Instance, hk: HkSolution, exec: Exec) -> Result<(Vec<usize>, f64)> {
    let run = run_bom_from(inst, hk, &SolveOptions::with_exec(exec))?;
    Ok((run.solution.order, run.solution.cost))
}

fn check_order(inst: &Instance, order: &[usize]) -> Result<()> {
    let n = inst.n();
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::InvalidInput(format!("oracle path repeats or exceeds vertex {v}")));
        }
        seen[v] = true;
    }
    if order.len() != n || order.first() != Some(&inst.s()) || order.last() != Some(&inst.t()) {
        return Err(Error::InvalidInput("oracle must return a Hamiltonian s-t path".into()));
    }
    Ok(())
}
