//! Parity correction of a spanning tree: wrong-parity sets, minimum T-joins
//! through perfect matching, Eulerian s-t walks and shortcutting.

mod matching;

use serde::Serialize;

use crate::decompose::check_spanning_tree;
use crate::error::{Error, Result};
use crate::instance::{canonical, Edge, Instance};

/// Integer resolution used when handing real costs to the matcher.
const MATCHING_SCALE: f64 = 1e12;

/// A vertex set whose members need their degree parity flipped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParitySet {
    vertices: Vec<usize>,
}

impl ParitySet {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.len() % 2 == 1 {
            return Err(Error::OddCardinality(vertices.len()));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Whether `|set ∩ T|` is odd.
    pub fn is_odd_on(&self, in_set: &[bool]) -> bool {
        self.vertices.iter().filter(|&&v| in_set[v]).count() % 2 == 1
    }
}

pub(crate) fn degrees(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut deg = vec![0usize; n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

/// Internal vertices of odd degree plus endpoints of even degree.
pub fn wrong_parity_set(n: usize, tree: &[Edge], s: usize, t: usize) -> Result<ParitySet> {
    check_spanning_tree(n, tree)?;
    let deg = degrees(n, tree);
    let vertices = (0..n).filter(|&v| (deg[v] % 2 == 1) != (v == s || v == t)).collect();
    ParitySet::new(vertices)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfectMatching {
    pub pairs: Vec<Edge>,
    pub cost: f64,
}

/// Minimum-cost perfect matching on `points` in the complete graph with
/// costs `cost(u, v)`.
pub fn min_weight_perfect_matching(points: &[usize], cost: impl Fn(usize, usize) -> f64) -> Result<PerfectMatching> {
    let k = points.len();
    if k % 2 == 1 {
        return Err(Error::OddCardinality(k));
    }
    if k == 0 {
        return Ok(PerfectMatching { pairs: Vec::new(), cost: 0.0 });
    }
    let mut real = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            real.push((a, b, cost(points[a], points[b])));
        }
    }
    let max_cost = real.iter().map(|e| e.2).fold(0.0, f64::max);
    let scale = if max_cost > 0.0 { MATCHING_SCALE / max_cost } else { 0.0 };
    let top = MATCHING_SCALE as i64 + 1;
    let edges = real.iter().map(|&(a, b, c)| (a, b, top - (c * scale).round() as i64)).collect();
    let (mate, optimal) = matching::Matcher::new(k, edges, true).solve();
    if !optimal {
        return Err(Error::Invariant("matching failed its dual optimality check".into()));
    }
    let mut pairs = Vec::with_capacity(k / 2);
    let mut total = 0.0;
    for a in 0..k {
        match mate[a] {
            Some(b) if a < b => {
                pairs.push(canonical(points[a], points[b]));
                total += cost(points[a], points[b]);
            }
            Some(_) => {}
            None => return Err(Error::Invariant(format!("vertex {} left unmatched", points[a]))),
        }
    }
    pairs.sort_unstable();
    Ok(PerfectMatching { pairs, cost: total })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JoinResult {
    pub edges: Vec<Edge>,
    pub cost: f64,
    pub matching: Vec<Edge>,
}

/// Minimum T-join of the complete metric graph, realised by direct matching edges.
pub fn min_tjoin(inst: &Instance, parity: &ParitySet) -> Result<JoinResult> {
    let m = min_weight_perfect_matching(parity.vertices(), |u, v| inst.cost(u, v))?;
    Ok(JoinResult { edges: m.pairs.clone(), cost: m.cost, matching: m.pairs })
}

/// Hierholzer walk from `s` to `t` using every edge of the multigraph once.
/// Returns the visited vertex sequence (one longer than the edge list).
pub fn eulerian_path(n: usize, edges: &[Edge], s: usize, t: usize) -> Result<Vec<usize>> {
    if s >= n || t >= n || s == t {
        return Err(Error::NotEulerian(format!("endpoints ({s}, {t}) invalid for n = {n}")));
    }
    if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n || u == v) {
        return Err(Error::NotEulerian(format!("invalid edge ({u},{v})")));
    }
    let deg = degrees(n, edges);
    let odd: Vec<usize> = (0..n).filter(|&v| deg[v] % 2 == 1).collect();
    let expected = if s < t { [s, t] } else { [t, s] };
    if odd != expected {
        return Err(Error::NotEulerian(format!("odd-degree vertices {odd:?}, expected exactly [{s}, {t}]")));
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, id));
        adj[v].push((u, id));
    }
    let mut used = vec![false; edges.len()];
    let mut next = vec![0usize; n];
    let mut stack = vec![s];
    let mut walk = Vec::with_capacity(edges.len() + 1);
    while let Some(&v) = stack.last() {
        while next[v] < adj[v].len() && used[adj[v][next[v]].1] {
            next[v] += 1;
        }
        if next[v] == adj[v].len() {
            walk.push(v);
            stack.pop();
        } else {
            let (w, id) = adj[v][next[v]];
            used[id] = true;
            stack.push(w);
        }
    }
    if walk.len() != edges.len() + 1 {
        let stranded: Vec<usize> = (0..n).filter(|&v| adj[v].iter().any(|&(_, id)| !used[id])).collect();
        return Err(Error::NotEulerian(format!("edges unreachable from {s} at vertices {stranded:?}")));
    }
    walk.reverse();
    Ok(walk)
}

/// First-visit shortcutting of an s-t walk into a Hamiltonian path. The end
/// vertex `t` is kept only at its final position.
pub fn shortcut(walk: &[usize], inst: &Instance) -> Result<(Vec<usize>, f64)> {
    let n = inst.n();
    let (s, t) = (inst.s(), inst.t());
    if walk.first() != Some(&s) || walk.last() != Some(&t) {
        return Err(Error::InvalidInput(format!("walk must run from {s} to {t}")));
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for &v in &walk[..walk.len() - 1] {
        if v >= n {
            return Err(Error::InvalidInput(format!("vertex {v} out of range")));
        }
        if v != t && !seen[v] {
            seen[v] = true;
            order.push(v);
        }
    }
    seen[t] = true;
    order.push(t);
    let missing: Vec<usize> = (0..n).filter(|&v| !seen[v]).collect();
    if !missing.is_empty() {
        return Err(Error::MissingVertices(missing));
    }
    let cost = inst.path_cost(&order);
    Ok((order, cost))
}

/// Cost of a vertex walk.
pub fn walk_cost(walk: &[usize], inst: &Instance) -> f64 {
    inst.path_cost(walk)
}
