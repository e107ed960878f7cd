//! Metric instances, graphical instances and edge-indexed vectors.
//!
//! Vertices are 0-based indices. An undirected edge is always stored as
//! `(min, max)` and dense edge vectors use row-major upper-triangle order:
//! `(0,1), (0,2), .., (0,n-1), (1,2), ..`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute tolerance for the triangle inequality.
pub const METRIC_TOL: f64 = 1e-9;

pub type Edge = (usize, usize);

#[inline]
pub fn canonical(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[inline]
pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of edge `{u, v}` in upper-triangle order.
#[inline]
pub fn edge_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u != v && u < n && v < n);
    let (a, b) = canonical(u, v);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// All edges of the complete graph in index order.
pub fn all_edges(n: usize) -> Vec<Edge> {
    let mut out = Vec::with_capacity(edge_count(n));
    for u in 0..n {
        for v in u + 1..n {
            out.push((u, v));
        }
    }
    out
}

/// Complete symmetric cost matrix with distinguished endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    n: usize,
    cost: Vec<f64>,
    s: usize,
    t: usize,
}

impl Instance {
    /// Builds an instance from the row-major upper triangle of the cost matrix.
    pub fn from_upper_triangle(n: usize, s: usize, t: usize, costs: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
        }
        if s >= n || t >= n {
            return Err(Error::InvalidInput(format!("endpoints ({s}, {t}) out of range for n = {n}")));
        }
        if s == t {
            return Err(Error::InvalidInput("s and t must differ".into()));
        }
        if costs.len() != edge_count(n) {
            return Err(Error::InvalidInput(format!(
                "expected {} upper-triangle costs for n = {n}, got {}",
                edge_count(n),
                costs.len()
            )));
        }
        let mut cost = vec![0.0; n * n];
        for (idx, (u, v)) in all_edges(n).into_iter().enumerate() {
            let c = costs[idx];
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidInput(format!("cost({u},{v}) = {c} is not a finite nonnegative number")));
            }
            cost[u * n + v] = c;
            cost[v * n + u] = c;
        }
        Ok(Self { n, cost, s, t })
    }

    /// Builds an instance from a full matrix; the matrix must be symmetric with a zero diagonal.
    pub fn from_matrix(s: usize, t: usize, matrix: &[Vec<f64>]) -> Result<Self> {
        let n = matrix.len();
        for (u, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!("row {u} has length {}, expected {n}", row.len())));
            }
            if row[u] != 0.0 {
                return Err(Error::InvalidInput(format!("diagonal entry {u} is {}", row[u])));
            }
            for v in 0..u {
                if row[v] != matrix[v][u] {
                    return Err(Error::InvalidInput(format!("cost matrix not symmetric at ({v},{u})")));
                }
            }
        }
        let upper: Vec<f64> = all_edges(n).into_iter().map(|(u, v)| matrix[u][v]).collect();
        Self::from_upper_triangle(n, s, t, &upper)
    }

    /// Euclidean distances between points in the plane.
    pub fn from_points(points: &[(f64, f64)], s: usize, t: usize) -> Result<Self> {
        let n = points.len();
        let costs: Vec<f64> = all_edges(n)
            .into_iter()
            .map(|(u, v)| {
                let (dx, dy) = (points[u].0 - points[v].0, points[u].1 - points[v].1);
                dx.hypot(dy)
            })
            .collect();
        Self::from_upper_triangle(n, s, t, &costs)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn t(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn cost(&self, u: usize, v: usize) -> f64 {
        self.cost[u * self.n + v]
    }

    #[inline]
    pub fn is_endpoint(&self, v: usize) -> bool {
        v == self.s || v == self.t
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| !self.is_endpoint(v))
    }

    pub fn upper_triangle(&self) -> Vec<f64> {
        all_edges(self.n).into_iter().map(|(u, v)| self.cost(u, v)).collect()
    }

    /// Costs as an edge vector (the `c` of `c(x)`).
    pub fn cost_vector(&self) -> EdgeVector {
        EdgeVector::from_values(self.n, self.upper_triangle())
    }

    /// Cost of a vertex sequence, summing consecutive pairs.
    pub fn path_cost(&self, order: &[usize]) -> f64 {
        order.windows(2).map(|w| self.cost(w[0], w[1])).sum()
    }

    pub fn edges_cost(&self, edges: &[Edge]) -> f64 {
        edges.iter().map(|&(u, v)| self.cost(u, v)).sum()
    }

    /// Sub-instance induced by `vertices` (sorted, must contain s and t).
    /// Returns the instance and the map from new index to original index.
    pub fn induced(&self, vertices: &[usize]) -> Result<(Instance, Vec<usize>)> {
        let mut keep = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let s = keep.iter().position(|&v| v == self.s);
        let t = keep.iter().position(|&v| v == self.t);
        let (Some(s), Some(t)) = (s, t) else {
            return Err(Error::InvalidInput("induced vertex set must contain both endpoints".into()));
        };
        let m = keep.len();
        let costs: Vec<f64> = all_edges(m).into_iter().map(|(a, b)| self.cost(keep[a], keep[b])).collect();
        Ok((Instance::from_upper_triangle(m, s, t, &costs)?, keep))
    }

    /// Same instance with every cost multiplied by `factor` (≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Instance> {
        let costs: Vec<f64> = self.upper_triangle().into_iter().map(|c| c * factor).collect();
        Instance::from_upper_triangle(self.n, self.s, self.t, &costs)
    }
}

/// A violated triangle: `cost(u, w) > cost(u, v) + cost(v, w) + tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleViolation {
    pub u: usize,
    pub v: usize,
    pub w: usize,
    pub excess: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub violations: Vec<TriangleViolation>,
}

impl MetricReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every triple breaking the triangle inequality. Symmetry, the zero
/// diagonal and nonnegativity are enforced when an [`Instance`] is built.
pub fn validate_metric(inst: &Instance) -> MetricReport {
    let n = inst.n();
    let mut violations = Vec::new();
    for u in 0..n {
        for w in u + 1..n {
            let direct = inst.cost(u, w);
            for v in 0..n {
                if v == u || v == w {
                    continue;
                }
                let detour = inst.cost(u, v) + inst.cost(v, w);
                if direct > detour + METRIC_TOL {
                    violations.push(TriangleViolation { u, v, w, excess: direct - detour });
                }
            }
        }
    }
    MetricReport { violations }
}

/// Unweighted graph whose shortest-path metric defines an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphicalInstance {
    n: usize,
    edges: Vec<Edge>,
    s: usize,
    t: usize,
}

impl GraphicalInstance {
    pub fn new(n: usize, s: usize, t: usize, edges: &[Edge]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
        }
        if s >= n || t >= n || s == t {
            return Err(Error::InvalidInput(format!("invalid endpoints ({s}, {t}) for n = {n}")));
        }
        let mut seen = vec![false; edge_count(n)];
        let mut out = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at {u}")));
            }
            let idx = edge_index(n, u, v);
            if seen[idx] {
                return Err(Error::InvalidInput(format!("duplicate edge ({u},{v})")));
            }
            seen[idx] = true;
            out.push(canonical(u, v));
        }
        Ok(Self { n, edges: out, s, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// All-pairs hop distances, row-major `n × n`.
    pub fn distances(&self) -> Result<Vec<u32>> {
        let n = self.n;
        let adj = self.adjacency();
        let mut dist = vec![u32::MAX; n * n];
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if row[w] == u32::MAX {
                        row[w] = row[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            if row.contains(&u32::MAX) {
                return Err(Error::NotConnected);
            }
        }
        Ok(dist)
    }

    pub fn is_connected(&self) -> bool {
        self.distances().is_ok()
    }
}

/// Shortest-path metric of a connected unit-weight graph.
pub fn metric_closure(g: &GraphicalInstance) -> Result<Instance> {
    let dist = g.distances()?;
    let n = g.n();
    let costs: Vec<f64> = all_edges(n).into_iter().map(|(u, v)| dist[u * n + v] as f64).collect();
    Instance::from_upper_triangle(n, g.s(), g.t(), &costs)
}

/// `n` uniform points in the unit square with Euclidean distances; `s = 0`, `t = 1`.
pub fn generate_random_metric(n: usize, seed: u64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    Instance::from_points(&points, 0, 1)
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// independently with probability `extra_edge_prob`; `s = 0`, `t = 1`.
pub fn generate_random_graph(n: usize, extra_edge_prob: f64, seed: u64) -> Result<GraphicalInstance> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present = vec![false; edge_count(n)];
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        present[edge_index(n, order[i], parent)] = true;
    }
    for flag in present.iter_mut() {
        if !*flag && rng.gen::<f64>() < extra_edge_prob {
            *flag = true;
        }
    }
    let edges: Vec<Edge> = all_edges(n)
        .into_iter()
        .zip(present)
        .filter_map(|(e, p)| p.then_some(e))
        .collect();
    GraphicalInstance::new(n, 0, 1, &edges)
}

/// Dense real vector indexed by the edges of the complete graph on `n` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeVector {
    n: usize,
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn zeros(n: usize) -> Self {
        Self { n, values: vec![0.0; edge_count(n)] }
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), edge_count(n), "edge vector length mismatch");
        Self { n, values }
    }

    /// Incidence vector; repeated edges accumulate.
    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut out = Self::zeros(n);
        for &(u, v) in edges {
            out.add(u, v, 1.0);
        }
        out
    }

    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let mut out = Self::zeros(n);
        for &(u, v, val) in triples {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidInput(format!("bad edge ({u},{v}) for n = {n}")));
            }
            out.set(u, v, val);
        }
        Ok(out)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[edge_index(self.n, u, v)]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, val: f64) {
        let idx = edge_index(self.n, u, v);
        self.values[idx] = val;
    }

    #[inline]
    pub fn add(&mut self, u: usize, v: usize, val: f64) {
        let idx = edge_index(self.n, u, v);
        self.values[idx] += val;
    }

    /// `(u, v, value)` for every entry whose magnitude exceeds `eps`.
    pub fn support(&self, eps: f64) -> Vec<(usize, usize, f64)> {
        all_edges(self.n)
            .into_iter()
            .zip(&self.values)
            .filter(|(_, &x)| x.abs() > eps)
            .map(|((u, v), &x)| (u, v, x))
            .collect()
    }

    pub fn dot(&self, other: &EdgeVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    /// `c(x)` for the instance cost function.
    pub fn cost(&self, inst: &Instance) -> f64 {
        all_edges(self.n).into_iter().zip(&self.values).map(|((u, v), &x)| x * inst.cost(u, v)).sum()
    }

    /// Pointwise product `a ∗ b`.
    pub fn hadamard(&self, other: &EdgeVector) -> EdgeVector {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        EdgeVector { n: self.n, values }
    }

    pub fn scaled(&self, factor: f64) -> EdgeVector {
        EdgeVector { n: self.n, values: self.values.iter().map(|x| x * factor).collect() }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &EdgeVector, factor: f64) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &EdgeVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `x(δ({v}))`.
    pub fn degree(&self, v: usize) -> f64 {
        (0..self.n).filter(|&u| u != v).map(|u| self.get(u, v)).sum()
    }

    /// `x(δ(S))` for the vertex set given by a membership mask.
    pub fn cut_value(&self, in_set: &[bool]) -> f64 {
        let mut total = 0.0;
        for u in 0..self.n {
            for v in u + 1..self.n {
                if in_set[u] != in_set[v] {
                    total += self.get(u, v);
                }
            }
        }
        total
    }

    /// `x(δ(S))` for a vertex list.
    pub fn cut_value_of(&self, set: &[usize]) -> f64 {
        self.cut_value(&membership(self.n, set))
    }

    /// `x(E(A, B))` for disjoint vertex lists.
    pub fn between(&self, a: &[usize], b: &[usize]) -> f64 {
        a.iter().flat_map(|&u| b.iter().map(move |&v| (u, v))).map(|(u, v)| self.get(u, v)).sum()
    }

    /// `x(E(A))`.
    pub fn within(&self, a: &[usize]) -> f64 {
        let mut total = 0.0;
        for (i, &u) in a.iter().enumerate() {
            for &v in &a[i + 1..] {
                total += self.get(u, v);
            }
        }
        total
    }
}

/// Serialized as `[[u, v, value], ..]` over the nonzero entries.
impl serde::Serialize for EdgeVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.support(0.0))
    }
}

pub fn membership(n: usize, set: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in set {
        mask[v] = true;
    }
    mask
}
