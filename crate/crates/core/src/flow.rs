//! Highest-label push-relabel maximum flow on real capacities, plus the
//! Gomory–Hu cut tree built on top of it (Gusfield's construction).

use crate::instance::EdgeVector;

/// Residual capacities at or below this are treated as saturated.
const EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: f64,
    flow: f64,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    /// Directed arc `u → v`; returns its id. The paired reverse arc has id `id ^ 1`.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64) -> usize {
        self.add_pair(u, v, cap, 0.0)
    }

    /// Undirected edge: capacity `cap` in both directions.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64) -> usize {
        self.add_pair(u, v, cap, cap)
    }

    fn add_pair(&mut self, u: usize, v: usize, forward: f64, backward: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap: forward.max(0.0), flow: 0.0 });
        self.arcs.push(Arc { to: u, cap: backward.max(0.0), flow: 0.0 });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    /// Net flow along arc `id` (negative if it runs backwards).
    pub fn flow(&self, id: usize) -> f64 {
        self.arcs[id].flow
    }

    #[inline]
    fn residual(&self, id: usize) -> f64 {
        self.arcs[id].cap - self.arcs[id].flow
    }

    fn push(&mut self, id: usize, amount: f64) {
        self.arcs[id].flow += amount;
        self.arcs[id ^ 1].flow -= amount;
    }

    pub fn reset(&mut self) {
        for a in &mut self.arcs {
            a.flow = 0.0;
        }
    }

    /// Maximum `source → sink` flow value. Excess that cannot reach the sink is
    /// returned to the source, so the arcs carry a genuine flow afterwards.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let n = self.nodes();
        if source == sink {
            return 0.0;
        }
        let mut height = vec![0usize; n];
        let mut excess = vec![0.0f64; n];
        let mut current = vec![0usize; n];
        let mut count = vec![0usize; 2 * n + 2];
        height[source] = n;
        count[0] = n - 1;
        count[n] += 1;

        for k in 0..self.adj[source].len() {
            let id = self.adj[source][k];
            let r = self.residual(id);
            if r > EPS {
                let to = self.arcs[id].to;
                self.push(id, r);
                excess[to] += r;
                excess[source] -= r;
            }
        }

        loop {
            // Highest active vertex.
            let mut v = usize::MAX;
            for u in 0..n {
                if u != source && u != sink && excess[u] > EPS && (v == usize::MAX || height[u] > height[v]) {
                    v = u;
                }
            }
            if v == usize::MAX {
                break;
            }
            while excess[v] > EPS {
                if current[v] == self.adj[v].len() {
                    // Relabel.
                    let old = height[v];
                    let mut lowest = usize::MAX;
                    for &id in &self.adj[v] {
                        if self.residual(id) > EPS {
                            lowest = lowest.min(height[self.arcs[id].to]);
                        }
                    }
                    if lowest == usize::MAX || lowest + 1 > 2 * n {
                        // Stranded numerical dust.
                        excess[v] = 0.0;
                        break;
                    }
                    count[old] -= 1;
                    height[v] = lowest + 1;
                    count[height[v]] += 1;
                    current[v] = 0;
                    if old < n && count[old] == 0 {
                        // Gap: nothing above `old` can reach the sink any more.
                        for u in 0..n {
                            if u != source && height[u] > old && height[u] < n {
                                count[height[u]] -= 1;
                                height[u] = n + 1;
                                count[n + 1] += 1;
                                current[u] = 0;
                            }
                        }
                    }
                    continue;
                }
                let id = self.adj[v][current[v]];
                let to = self.arcs[id].to;
                let r = self.residual(id);
                if r > EPS && height[v] == height[to] + 1 {
                    let amount = excess[v].min(r);
                    self.push(id, amount);
                    excess[v] -= amount;
                    excess[to] += amount;
                } else {
                    current[v] += 1;
                }
            }
        }
        excess[sink]
    }

    /// Vertices reachable from `source` in the residual graph (the source side
    /// of the minimal minimum cut). Call after [`max_flow`](Self::max_flow).
    pub fn source_side(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &id in &self.adj[u] {
                let to = self.arcs[id].to;
                if !seen[to] && self.residual(id) > EPS {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }
}

/// Undirected network on `n` vertices with capacity `x_e` on each edge of positive value.
pub fn network_from_vector(x: &EdgeVector) -> FlowNetwork {
    let n = x.n();
    let mut net = FlowNetwork::new(n);
    for (u, v, val) in x.support(EPS) {
        if val > 0.0 {
            net.add_edge(u, v, val);
        }
    }
    net
}

/// Minimum cut between `source` and `sink` under capacities `x`.
/// Returns the cut value and the source-side membership mask.
pub fn min_cut(x: &EdgeVector, source: usize, sink: usize) -> (f64, Vec<bool>) {
    let mut net = network_from_vector(x);
    let value = net.max_flow(source, sink);
    (value, net.source_side(source))
}

/// Gomory–Hu tree as `(parent, cut value)` per vertex; vertex 0 is the root
/// and carries `(0, ∞)`.
pub fn gomory_hu(x: &EdgeVector) -> Vec<(usize, f64)> {
    let n = x.n();
    let mut parent = vec![0usize; n];
    let mut weight = vec![f64::INFINITY; n];
    let mut net = network_from_vector(x);
    for u in 1..n {
        net.reset();
        let p = parent[u];
        weight[u] = net.max_flow(u, p);
        let side = net.source_side(u);
        for v in u + 1..n {
            if side[v] && parent[v] == p {
                parent[v] = u;
            }
        }
    }
    (0..n).map(|v| (parent[v], weight[v])).collect()
}
