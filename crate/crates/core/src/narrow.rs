//! Narrow s-t cuts of a Held-Karp point and the fractional T-join dominators
//! built from them.
//!
//! An s-t cut `U` is τ-narrow when `x*(δ(U)) < 1 + τ`. Narrow cuts never
//! cross, so they are exactly the prefixes `U_i = L_1 ∪ .. ∪ L_i` of an
//! ordered partition of the vertices into layers with `L_1 = {s}` and
//! `L_ℓ = {t}`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::decompose::TreeCombination;
use crate::error::{Error, Result};
use crate::exact::{cut_table, ENUMERATION_LIMIT};
use crate::flow::{gomory_hu, FlowNetwork};
use crate::instance::{all_edges, canonical, membership, Edge, EdgeVector, Instance};
use crate::par::Exec;
use crate::tjoin::{wrong_parity_set, ParitySet};

/// A cut counts as narrow only if it clears `1 + τ` by this margin.
pub const NARROW_EPS: f64 = 1e-9;
/// Odd cuts of a certificate must reach `1 - CERT_TOL`.
pub const CERT_TOL: f64 = 1e-7;
/// Relative slack allowed on every cost guarantee.
pub const RATIO_SLACK: f64 = 1e-6;

#[inline]
pub fn is_narrow(capacity: f64, tau: f64) -> bool {
    capacity < 1.0 + tau - NARROW_EPS
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NarrowCutStructure {
    pub tau: f64,
    pub layers: Vec<Vec<usize>>,
    /// `x*(δ(U_i))` for `i = 1..ℓ-1`.
    pub prefix_capacity: Vec<f64>,
    /// `F_i = E(L_i, L_{≥i+1})` for `i = 1..ℓ-1`.
    pub representatives: Vec<Vec<Edge>>,
}

impl NarrowCutStructure {
    /// `ℓ`.
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Number of narrow cuts, `ℓ - 1`.
    pub fn num_cuts(&self) -> usize {
        self.layers.len() - 1
    }

    /// With only `{s}` and `{t}` as layers there is no internal structure and
    /// every correction sum is empty.
    pub fn is_trivial(&self) -> bool {
        self.layers.len() == 2
    }

    /// Sorted vertex list of the prefix `U_{i+1}` (0-based `i < ℓ-1`).
    pub fn prefix(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.layers[..=i].iter().flatten().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn prefixes(&self) -> Vec<Vec<usize>> {
        (0..self.num_cuts()).map(|i| self.prefix(i)).collect()
    }

    pub fn layer_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (i, layer) in self.layers.iter().enumerate() {
            for &v in layer {
                out[v] = i;
            }
        }
        out
    }

    /// `x*(F_i) - (1 - τ + x*(δ(U_i)))/2` per cut; positive when the lower
    /// bound on representative mass holds.
    pub fn representative_margins(&self, x: &EdgeVector) -> Vec<f64> {
        self.representatives
            .iter()
            .zip(&self.prefix_capacity)
            .map(|(f, &cap)| f.iter().map(|&(u, v)| x.get(u, v)).sum::<f64>() - (1.0 - self.tau + cap) / 2.0)
            .collect()
    }
}

/// Minimum cut separating `{s, u}` from `{v, t}`.
fn forced_cut(x: &EdgeVector, s: usize, t: usize, u: usize, v: usize) -> f64 {
    let n = x.n();
    let mut net = FlowNetwork::new(n);
    let big = 1.0 + x.total();
    for (a, b, val) in x.support(0.0) {
        if val > 0.0 {
            net.add_edge(a, b, val);
        }
    }
    net.add_edge(s, u, big);
    net.add_edge(v, t, big);
    net.max_flow(s, t)
}

/// Layers of the τ-narrow cuts of `x` by pairwise forced minimum cuts.
pub fn compute_narrow_cuts(x: &EdgeVector, s: usize, t: usize, tau: f64) -> Result<NarrowCutStructure> {
    compute_narrow_cuts_with(x, s, t, tau, Exec::default())
}

pub fn compute_narrow_cuts_with(x: &EdgeVector, s: usize, t: usize, tau: f64, exec: Exec) -> Result<NarrowCutStructure> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidInput(format!("tau must lie in (0, 1], got {tau}")));
    }
    let n = x.n();
    let internal: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let k = internal.len();
    // precedes[a * k + b]: internal[a] lies in some narrow cut that misses internal[b].
    let precedes: Vec<bool> = exec.map_range(k * k, |idx| {
        let (a, b) = (idx / k, idx % k);
        a != b && is_narrow(forced_cut(x, s, t, internal[a], internal[b]), tau)
    });
    let rank: Vec<usize> = (0..k).map(|b| (0..k).filter(|&a| precedes[a * k + b]).count()).collect();
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&a| (rank[a], internal[a]));
    for a in order {
        match groups.last_mut() {
            Some((r, members)) if *r == rank[a] => members.push(a),
            _ => groups.push((rank[a], vec![a])),
        }
    }
    // The relation must be a weak order: same layer ⇔ incomparable.
    let mut layer = vec![0usize; k];
    for (li, (_, members)) in groups.iter().enumerate() {
        for &a in members {
            layer[a] = li;
        }
    }
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let expected = layer[a] < layer[b];
            if precedes[a * k + b] != expected {
                return Err(Error::InconsistentLayers(internal[a], internal[b]));
            }
        }
    }

    let mut layers = vec![vec![s]];
    for (_, members) in &groups {
        layers.push(members.iter().map(|&a| internal[a]).collect());
    }
    layers.push(vec![t]);

    let mut structure =
        NarrowCutStructure { tau, layers, prefix_capacity: Vec::new(), representatives: Vec::new() };
    let layer_of = structure.layer_of(n);
    for i in 0..structure.num_cuts() {
        let prefix = structure.prefix(i);
        let cap = x.cut_value_of(&prefix);
        if !is_narrow(cap, tau) {
            let v = structure.layers[i + 1][0];
            return Err(Error::InconsistentLayers(structure.layers[i][0], v));
        }
        structure.prefix_capacity.push(cap);
        let reps: Vec<Edge> = all_edges(n)
            .into_iter()
            .filter(|&(u, v)| {
                let (lu, lv) = (layer_of[u], layer_of[v]);
                (lu == i && lv > i) || (lv == i && lu > i)
            })
            .collect();
        structure.representatives.push(reps);
    }
    Ok(structure)
}

/// `f*_{U_i}`: `x*` restricted to `F_i`.
pub fn representative_vectors(structure: &NarrowCutStructure, x: &EdgeVector) -> Vec<EdgeVector> {
    structure
        .representatives
        .iter()
        .map(|f| {
            let mut out = EdgeVector::zeros(x.n());
            for &(u, v) in f {
                out.set(u, v, x.get(u, v));
            }
            out
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowAssignment {
    /// One vector per narrow cut, supported on that cut's edges.
    pub vectors: Vec<EdgeVector>,
    pub value: f64,
}

/// Routes one unit per narrow cut through the cut's edges into edge
/// capacities `x*_e`; the per-cut flows are fractionally disjoint representatives.
pub fn solve_fractional_disjoint(structure: &NarrowCutStructure, x: &EdgeVector) -> Result<FlowAssignment> {
    let n = x.n();
    let cuts = structure.num_cuts();
    let masks: Vec<Vec<bool>> = structure.prefixes().iter().map(|p| membership(n, p)).collect();
    let edges: Vec<(usize, usize, f64)> = x
        .support(0.0)
        .into_iter()
        .filter(|&(u, v, val)| val > 0.0 && masks.iter().any(|m| m[u] != m[v]))
        .collect();
    let source = 0;
    let sink = 1 + cuts + edges.len();
    let mut net = FlowNetwork::new(sink + 1);
    let big = (cuts + 1) as f64;
    for i in 0..cuts {
        net.add_arc(source, 1 + i, 1.0);
    }
    let mut arc_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cuts];
    for (j, &(u, v, val)) in edges.iter().enumerate() {
        let node = 1 + cuts + j;
        for (i, m) in masks.iter().enumerate() {
            if m[u] != m[v] {
                arc_of[i].push((j, net.add_arc(1 + i, node, big)));
            }
        }
        net.add_arc(node, sink, val);
    }
    let value = net.max_flow(source, sink);
    let required = cuts as f64;
    if value < required - 1e-6 {
        return Err(Error::FlowDeficit { value, required });
    }
    let vectors = arc_of
        .iter()
        .map(|arcs| {
            let mut f = EdgeVector::zeros(n);
            for &(j, id) in arcs {
                let (u, v, _) = edges[j];
                f.set(u, v, net.flow(id).max(0.0));
            }
            f
        })
        .collect();
    Ok(FlowAssignment { vectors, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Simple53,
    Qi,
    Iint,
    Golden,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Simple53, Variant::Qi, Variant::Iint, Variant::Golden];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Simple53 => "simple53",
            Variant::Qi => "qi",
            Variant::Iint => "iint",
            Variant::Golden => "golden",
        }
    }

    pub fn alpha(self) -> f64 {
        match self {
            Variant::Simple53 => 1.0 / 3.0,
            Variant::Qi => 0.30,
            Variant::Iint => 1.0 / 33f64.sqrt(),
            Variant::Golden => 1.0 - 2.0 / 5f64.sqrt(),
        }
    }

    pub fn beta(self) -> f64 {
        match self {
            Variant::Simple53 => 1.0 / 3.0,
            Variant::Qi => 0.35,
            Variant::Iint => 0.5 - 1.0 / (2.0 * 33f64.sqrt()),
            Variant::Golden => 1.0 / 5f64.sqrt(),
        }
    }

    /// `(1 - 2α)/β - 1`, clamped at zero against rounding.
    pub fn tau(self) -> f64 {
        ((1.0 - 2.0 * self.alpha()) / self.beta() - 1.0).max(0.0)
    }

    /// Factor on `c(x*)` bounding the average of `c(T) + c(y)`.
    pub fn guarantee(self) -> f64 {
        match self {
            Variant::Simple53 => 5.0 / 3.0,
            Variant::Qi => 1.6577,
            Variant::Iint => (9.0 - 33f64.sqrt()) / 2.0,
            Variant::Golden => (1.0 + 5f64.sqrt()) / 2.0,
        }
    }

    fn uses_narrow_cuts(self) -> bool {
        self != Variant::Simple53
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variant {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominatorCertificate {
    pub y: EdgeVector,
    pub variant: Variant,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub parity_set: ParitySet,
    /// Narrow cuts with odd parity that received a correction term.
    pub corrected_cuts: Vec<usize>,
}

/// Everything about `x*` a variant needs, computed once and shared by all trees.
#[derive(Clone, Debug)]
pub struct CertificateBuilder {
    variant: Variant,
    x: EdgeVector,
    s: usize,
    t: usize,
    structure: Option<NarrowCutStructure>,
    prefix_masks: Vec<Vec<bool>>,
    corrections: Vec<EdgeVector>,
}

impl CertificateBuilder {
    pub fn new(x: &EdgeVector, s: usize, t: usize, variant: Variant) -> Result<Self> {
        let n = x.n();
        let (structure, corrections) = if variant.uses_narrow_cuts() {
            let tau = variant.tau();
            let structure = compute_narrow_cuts(x, s, t, tau)?;
            let (alpha, beta) = (variant.alpha(), variant.beta());
            let base: Vec<EdgeVector> = match variant {
                Variant::Golden => solve_fractional_disjoint(&structure, x)?.vectors,
                _ => representative_vectors(&structure, x),
            };
            let mut scaled = Vec::with_capacity(base.len());
            for (i, vec) in base.into_iter().enumerate() {
                let cap = structure.prefix_capacity[i];
                let coef = match variant {
                    Variant::Qi => (1.0 - (2.0 * alpha + beta)) / (1.0 - tau / 2.0),
                    Variant::Iint => (1.0 - (2.0 * alpha + beta * cap)) / ((1.0 - tau + cap) / 2.0),
                    _ => 1.0 - 2.0 * alpha - beta * cap,
                };
                if coef < -1e-9 {
                    return Err(Error::Invariant(format!("negative correction {coef} on narrow cut {i}")));
                }
                scaled.push(vec.scaled(coef.max(0.0)));
            }
            (Some(structure), scaled)
        } else {
            (None, Vec::new())
        };
        let prefix_masks = structure.as_ref().map_or_else(Vec::new, |st| {
            st.prefixes().iter().map(|p| membership(n, p)).collect()
        });
        Ok(Self { variant, x: x.clone(), s, t, structure, prefix_masks, corrections })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn structure(&self) -> Option<&NarrowCutStructure> {
        self.structure.as_ref()
    }

    pub fn build(&self, tree: &[Edge]) -> Result<DominatorCertificate> {
        let n = self.x.n();
        let parity = wrong_parity_set(n, tree, self.s, self.t)?;
        let (alpha, beta) = (self.variant.alpha(), self.variant.beta());
        let mut y = EdgeVector::from_edges(n, tree).scaled(alpha);
        y.add_scaled(&self.x, beta);
        let mut corrected_cuts = Vec::new();
        for (i, mask) in self.prefix_masks.iter().enumerate() {
            if parity.is_odd_on(mask) {
                y.add_scaled(&self.corrections[i], 1.0);
                corrected_cuts.push(i);
            }
        }
        Ok(DominatorCertificate {
            y,
            variant: self.variant,
            alpha,
            beta,
            tau: self.variant.tau(),
            parity_set: parity,
            corrected_cuts,
        })
    }
}

/// One-shot certificate for a single tree.
pub fn build_certificate(x: &EdgeVector, s: usize, t: usize, tree: &[Edge], variant: Variant) -> Result<DominatorCertificate> {
    CertificateBuilder::new(x, s, t, variant)?.build(tree)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    pub feasible: bool,
    pub worst_cut: Vec<usize>,
    /// `+∞` when no cut has odd parity.
    pub worst_value: f64,
    pub cost: f64,
    pub exhaustive: bool,
}

/// Checks `y(δ(S)) ≥ 1` over all `S` with `|S ∩ T|` odd.
pub fn verify_certificate(cert: &DominatorCertificate, inst: &Instance) -> CertificateReport {
    let (worst_value, worst_cut, exhaustive) = min_odd_cut(&cert.y, &cert.parity_set);
    CertificateReport {
        feasible: worst_value >= 1.0 - CERT_TOL,
        worst_cut,
        worst_value,
        cost: cert.y.cost(inst),
        exhaustive,
    }
}

/// Minimum `y(δ(S))` over T-odd sets: exhaustive up to the enumeration limit,
/// otherwise the cheapest T-odd fundamental cut of a Gomory–Hu tree.
pub fn min_odd_cut(y: &EdgeVector, parity: &ParitySet) -> (f64, Vec<usize>, bool) {
    let n = y.n();
    if parity.is_empty() {
        return (f64::INFINITY, Vec::new(), n <= ENUMERATION_LIMIT);
    }
    if n <= ENUMERATION_LIMIT {
        let table = cut_table(y).expect("size checked");
        let pmask = parity.vertices().iter().fold(0usize, |m, &v| m | (1 << v));
        let mut best = (f64::INFINITY, 0usize);
        for (mask, &cap) in table.iter().enumerate().skip(1) {
            if (mask & pmask).count_ones() % 2 == 1 && cap < best.0 {
                best = (cap, mask);
            }
        }
        let set = (0..n).filter(|v| best.1 & (1 << v) != 0).collect();
        return (best.0, set, true);
    }
    let tree = gomory_hu(y);
    let mut children = vec![Vec::new(); n];
    for v in 1..n {
        children[tree[v].0].push(v);
    }
    let mut best = (f64::INFINITY, Vec::new());
    for v in 1..n {
        let mut side = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            side.push(u);
            stack.extend(&children[u]);
        }
        let mask = membership(n, &side);
        if parity.is_odd_on(&mask) && tree[v].1 < best.0 {
            side.sort_unstable();
            best = (y.cut_value(&mask), side);
        }
    }
    (best.0, best.1, false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostBoundReport {
    pub variant: Variant,
    /// `Σ λ_i [c(T_i) + c(y_i)]`.
    pub average: f64,
    pub hk_value: f64,
    pub guarantee: f64,
    /// `guarantee · c(x*) · (1 + slack)`.
    pub bound: f64,
    pub holds: bool,
    pub margin: f64,
    /// Whether every per-tree certificate passed verification.
    pub all_feasible: bool,
    pub trivial_structure: bool,
}

/// Aggregates per-tree certificates over a decomposition and compares with
/// the variant's guarantee.
pub fn certificate_cost_bound(
    inst: &Instance,
    x: &EdgeVector,
    combo: &TreeCombination,
    variant: Variant,
) -> Result<CostBoundReport> {
    certificate_cost_bound_with(inst, x, combo, variant, Exec::default())
}

pub fn certificate_cost_bound_with(
    inst: &Instance,
    x: &EdgeVector,
    combo: &TreeCombination,
    variant: Variant,
    exec: Exec,
) -> Result<CostBoundReport> {
    let builder = CertificateBuilder::new(x, inst.s(), inst.t(), variant)?;
    let per_tree = exec.map(&combo.trees, |tree| -> Result<(f64, bool)> {
        let cert = builder.build(tree)?;
        let report = verify_certificate(&cert, inst);
        Ok((inst.edges_cost(tree) + report.cost, report.feasible))
    });
    let mut average = 0.0;
    let mut all_feasible = true;
    for (r, &l) in per_tree.into_iter().zip(&combo.lambdas) {
        let (c, ok) = r?;
        average += l * c;
        all_feasible &= ok;
    }
    let hk_value = x.cost(inst);
    let bound = variant.guarantee() * hk_value * (1.0 + RATIO_SLACK);
    Ok(CostBoundReport {
        variant,
        average,
        hk_value,
        guarantee: variant.guarantee(),
        bound,
        holds: average <= bound,
        margin: bound - average,
        all_feasible,
        trivial_structure: builder.structure().is_some_and(|s| s.is_trivial()),
    })
}

/// For each narrow cut, `(Σ_{i: |U ∩ T_i| odd} λ_i, x*(δ(U)) - 1)`.
pub fn odd_cut_weights(
    structure: &NarrowCutStructure,
    combo: &TreeCombination,
    s: usize,
    t: usize,
) -> Result<Vec<(f64, f64)>> {
    let n = structure.layers.iter().map(Vec::len).sum();
    let parities: Vec<ParitySet> =
        combo.trees.iter().map(|tree| wrong_parity_set(n, tree, s, t)).collect::<Result<_>>()?;
    Ok(structure
        .prefixes()
        .iter()
        .zip(&structure.prefix_capacity)
        .map(|(prefix, &cap)| {
            let mask = membership(n, prefix);
            let weight = parities.iter().zip(&combo.lambdas).filter(|(p, _)| p.is_odd_on(&mask)).map(|(_, &l)| l).sum();
            (weight, cap - 1.0)
        })
        .collect())
}

/// Canonical edge list of `y`'s support, for export.
pub fn support_edges(y: &EdgeVector) -> Vec<Edge> {
    y.support(0.0).into_iter().map(|(u, v, _)| canonical(u, v)).collect()
}
