//! Brute-force oracles and instance suites shared by the integration tests.
//! Nothing here calls into the library's own enumeration code.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpath::instance::{EdgeVector, GraphicalInstance, Instance};
use stpath::prize::PcInstance;
use stpath::{generate_random_graph, generate_random_metric};

/// The 200-instance metric suite: `n` cycles through 4..=12.
pub fn metric_suite() -> Vec<Instance> {
    (0..200u64).map(|i| generate_random_metric(4 + (i as usize % 9), 1000 + i).unwrap()).collect()
}

/// 100 prize-collecting instances with `n` in 4..=10 and prizes uniform in `[0, 0.8)`.
pub fn pc_suite() -> Vec<PcInstance> {
    (0..100u64)
        .map(|i| {
            let n = 4 + (i as usize % 7);
            let inst = generate_random_metric(n, 5000 + i).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + i);
            let prizes: Vec<f64> = (0..n - 2).map(|_| rng.gen::<f64>() * 0.8).collect();
            PcInstance::new(inst, &prizes).unwrap()
        })
        .collect()
}

/// 100 connected graphs with `n` in 4..=12.
pub fn graph_suite() -> Vec<GraphicalInstance> {
    (0..100u64)
        .map(|i| generate_random_graph(4 + (i as usize % 9), 0.25, 7000 + i).unwrap())
        .collect()
}

fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

pub fn order_cost(inst: &Instance, order: &[usize]) -> f64 {
    order.windows(2).map(|w| inst.cost(w[0], w[1])).sum()
}

/// Minimum s-t Hamiltonian path by scanning every permutation of the internal vertices.
pub fn brute_force_path(inst: &Instance) -> f64 {
    let mut mid: Vec<usize> = (0..inst.n()).filter(|&v| v != inst.s() && v != inst.t()).collect();
    let mut best = f64::INFINITY;
    loop {
        let mut order = vec![inst.s()];
        order.extend(&mid);
        order.push(inst.t());
        best = best.min(order_cost(inst, &order));
        if !next_permutation(&mut mid) {
            return best;
        }
    }
}

/// Minimum path cost plus missed prize over every subset and ordering.
pub fn brute_force_pc(pc: &PcInstance) -> f64 {
    let inst = pc.instance();
    let internal: Vec<usize> = inst.internal_vertices().collect();
    let k = internal.len();
    let mut best = f64::INFINITY;
    for mask in 0..1usize << k {
        let mut mid: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| internal[b]).collect();
        let missed: f64 = (0..k).filter(|b| mask >> b & 1 == 0).map(|b| pc.prize(internal[b])).sum();
        loop {
            let mut order = vec![inst.s()];
            order.extend(&mid);
            order.push(inst.t());
            best = best.min(order_cost(inst, &order) + missed);
            if !next_permutation(&mut mid) {
                break;
            }
        }
    }
    best
}

/// Cheapest perfect pairing of `points` by recursion on the first point.
pub fn brute_force_pairing(points: &[usize], cost: &dyn Fn(usize, usize) -> f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let first = points[0];
    let mut best = f64::INFINITY;
    for i in 1..points.len() {
        let rest: Vec<usize> = points[1..].iter().enumerate().filter(|&(j, _)| j + 1 != i).map(|(_, &p)| p).collect();
        best = best.min(cost(first, points[i]) + brute_force_pairing(&rest, cost));
    }
    best
}

/// `x(δ(S))` for the vertex bitmask `mask`, summing over the support list.
pub fn cut_of(support: &[(usize, usize, f64)], mask: usize) -> f64 {
    support.iter().filter(|&&(u, v, _)| (mask >> u & 1) != (mask >> v & 1)).map(|e| e.2).sum()
}

/// Minimum `y(δ(S))` over sets with an odd number of `parity` vertices;
/// `+∞` for an empty parity set.
pub fn brute_force_min_odd_cut(y: &EdgeVector, parity: &[usize]) -> f64 {
    let n = y.n();
    let support = y.support(0.0);
    let pmask = parity.iter().fold(0usize, |m, &v| m | 1 << v);
    let mut best = f64::INFINITY;
    // Complements give the same cut; keep vertex n-1 outside.
    for mask in 1..1usize << (n - 1) {
        if (mask & pmask).count_ones() % 2 == 1 {
            best = best.min(cut_of(&support, mask));
        }
    }
    best
}

/// Every set `S ∋ s`, `t ∉ S` with `x(δ(S)) < 1 + τ - 1e-9`, as sorted vertex lists.
pub fn brute_force_narrow_cuts(x: &EdgeVector, s: usize, t: usize, tau: f64) -> Vec<Vec<usize>> {
    let n = x.n();
    let support = x.support(0.0);
    let mut out = Vec::new();
    for mask in 0..1usize << n {
        if mask >> s & 1 == 0 || mask >> t & 1 == 1 {
            continue;
        }
        if cut_of(&support, mask) < 1.0 + tau - 1e-9 {
            out.push((0..n).filter(|v| mask >> v & 1 == 1).collect());
        }
    }
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Minimum s-t cut capacity and worst nonseparating cut slack over all sets.
pub fn brute_force_hk_violation(x: &EdgeVector, s: usize, t: usize) -> f64 {
    let n = x.n();
    let support = x.support(0.0);
    let mut worst: f64 = 0.0;
    for mask in 1..(1usize << n) - 1 {
        let cap = cut_of(&support, mask);
        let need = if (mask >> s & 1) != (mask >> t & 1) { 1.0 } else { 2.0 };
        worst = worst.max(need - cap);
    }
    worst
}

/// Hop distances by breadth-first search.
pub fn bfs_distances(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    (0..n)
        .map(|src| {
            let mut d = vec![u32::MAX; n];
            d[src] = 0;
            let mut q = VecDeque::from([src]);
            while let Some(u) = q.pop_front() {
                for &w in &adj[u] {
                    if d[w] == u32::MAX {
                        d[w] = d[u] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

/// Checks `order` is a Hamiltonian s-t path of `n` vertices.
pub fn is_hamiltonian_path(order: &[usize], n: usize, s: usize, t: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n
        && order.first() == Some(&s)
        && order.last() == Some(&t)
        && order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

/// `Σ λ_i χ(T_i)`, built by plain accumulation.
pub fn tree_marginals(n: usize, trees: &[Vec<(usize, usize)>], lambdas: &[f64]) -> EdgeVector {
    let mut out = EdgeVector::zeros(n);
    for (tree, &l) in trees.iter().zip(lambdas) {
        for &(u, v) in tree {
            out.add(u, v, l);
        }
    }
    out
}

/// Acyclic with `n - 1` edges, by union-find.
pub fn is_spanning_tree(n: usize, edges: &[(usize, usize)]) -> bool {
    if edges.len() != n - 1 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Odd-degree internal vertices plus even-degree endpoints.
pub fn wrong_parity(n: usize, tree: &[(usize, usize)], s: usize, t: usize) -> Vec<usize> {
    let mut deg = vec![0; n];
    for &(u, v) in tree {
        deg[u] += 1;
        deg[v] += 1;
    }
    (0..n).filter(|&v| (deg[v] % 2 == 1) != (v == s || v == t)).collect()
}
