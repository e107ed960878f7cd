//! Exhaustive ground truth: subset dynamic programs for the path and
//! prize-collecting problems, full cut enumeration, and brute-force pairing.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{EdgeVector, Instance};
use crate::narrow::is_narrow;
use crate::prize::PcInstance;

/// Largest `n` accepted by [`exact_path_tsp`].
pub const PATH_LIMIT: usize = 20;
/// Largest `n` accepted by [`exact_pc_path`].
pub const PC_LIMIT: usize = 15;
/// Largest `n` accepted by [`enumerate_cut_check`] and [`cut_table`].
pub const ENUMERATION_LIMIT: usize = 16;
/// Largest point count accepted by [`exhaustive_matching`].
pub const MATCHING_LIMIT: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactResult {
    pub optimum: f64,
    pub witness: Vec<usize>,
    pub explored: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactPcResult {
    pub optimum: f64,
    pub witness: Vec<usize>,
    pub path_cost: f64,
    pub missed_prize: f64,
    pub explored: usize,
}

/// Table `dp[mask * k + j]`: cheapest path from `s` through exactly the internal
/// vertices in `mask`, ending at internal vertex `j`.
struct SubsetDp {
    internal: Vec<usize>,
    dp: Vec<f64>,
    parent: Vec<u8>,
}

impl SubsetDp {
    fn build(inst: &Instance) -> Self {
        let internal: Vec<usize> = inst.internal_vertices().collect();
        let k = internal.len();
        let size = 1usize << k;
        let mut dp = vec![f64::INFINITY; size * k];
        let mut parent = vec![u8::MAX; size * k];
        for (j, &v) in internal.iter().enumerate() {
            dp[(1 << j) * k + j] = inst.cost(inst.s(), v);
        }
        for mask in 1..size {
            for j in 0..k {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let cur = dp[mask * k + j];
                if !cur.is_finite() {
                    continue;
                }
                for nxt in 0..k {
                    if mask & (1 << nxt) != 0 {
                        continue;
                    }
                    let m2 = mask | (1 << nxt);
                    let cand = cur + inst.cost(internal[j], internal[nxt]);
                    if cand < dp[m2 * k + nxt] {
                        dp[m2 * k + nxt] = cand;
                        parent[m2 * k + nxt] = j as u8;
                    }
                }
            }
        }
        Self { internal, dp, parent }
    }

    /// Best completion to `t` for `mask`: `(cost, last internal index)`.
    fn close(&self, inst: &Instance, mask: usize) -> (f64, Option<usize>) {
        let k = self.internal.len();
        if mask == 0 {
            return (inst.cost(inst.s(), inst.t()), None);
        }
        let mut best = (f64::INFINITY, None);
        for j in 0..k {
            if mask & (1 << j) != 0 {
                let c = self.dp[mask * k + j] + inst.cost(self.internal[j], inst.t());
                if c < best.0 {
                    best = (c, Some(j));
                }
            }
        }
        best
    }

    fn order(&self, inst: &Instance, mut mask: usize, last: Option<usize>) -> Vec<usize> {
        let k = self.internal.len();
        let mut rev = vec![inst.t()];
        let mut cur = last;
        while let Some(j) = cur {
            rev.push(self.internal[j]);
            let p = self.parent[mask * k + j];
            mask &= !(1 << j);
            cur = (p != u8::MAX).then_some(p as usize);
        }
        rev.push(inst.s());
        rev.reverse();
        rev
    }

    fn states(&self) -> usize {
        self.dp.len()
    }
}

/// Minimum-cost Hamiltonian s-t path.
pub fn exact_path_tsp(inst: &Instance) -> Result<ExactResult> {
    if inst.n() > PATH_LIMIT {
        return Err(Error::TooLarge { n: inst.n(), limit: PATH_LIMIT });
    }
    let table = SubsetDp::build(inst);
    let full = (1usize << table.internal.len()) - 1;
    let (optimum, last) = table.close(inst, full);
    Ok(ExactResult { optimum, witness: table.order(inst, full, last), explored: table.states() })
}

/// Minimum of path cost plus prizes of skipped vertices.
pub fn exact_pc_path(pc: &PcInstance) -> Result<ExactPcResult> {
    let inst = pc.instance();
    if inst.n() > PC_LIMIT {
        return Err(Error::TooLarge { n: inst.n(), limit: PC_LIMIT });
    }
    let table = SubsetDp::build(inst);
    let k = table.internal.len();
    let prize_of: Vec<f64> = table.internal.iter().map(|&v| pc.prize(v)).collect();
    let mut best: Option<(f64, f64, f64, usize, Option<usize>)> = None;
    for mask in 0..1usize << k {
        let (path_cost, last) = table.close(inst, mask);
        let missed: f64 = (0..k).filter(|j| mask & (1 << j) == 0).map(|j| prize_of[j]).sum();
        let obj = path_cost + missed;
        if best.is_none_or(|b| obj < b.0) {
            best = Some((obj, path_cost, missed, mask, last));
        }
    }
    let (optimum, path_cost, missed_prize, mask, last) = best.expect("at least the empty subset");
    Ok(ExactPcResult {
        optimum,
        witness: table.order(inst, mask, last),
        path_cost,
        missed_prize,
        explored: table.states(),
    })
}

/// `x(δ(U))` for every `U ⊆ {0..n-2}` encoded as a bitmask (vertex `n-1` is
/// always outside, so each cut appears exactly once). Filled in Gray-code order.
pub fn cut_table(x: &EdgeVector) -> Result<Vec<f64>> {
    let n = x.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT });
    }
    let bits = n - 1;
    let mut table = vec![0.0; 1 << bits];
    let degree: Vec<f64> = (0..n).map(|v| x.degree(v)).collect();
    // inside[v] = x(v, current set)
    let mut inside = vec![0.0; n];
    let mut in_set = vec![false; n];
    let mut cap = 0.0;
    let mut mask = 0usize;
    for i in 1..1usize << bits {
        let v = i.trailing_zeros() as usize;
        if in_set[v] {
            cap -= degree[v] - 2.0 * inside[v];
            in_set[v] = false;
            for u in 0..n {
                if u != v {
                    inside[u] -= x.get(u, v);
                }
            }
        } else {
            cap += degree[v] - 2.0 * inside[v];
            in_set[v] = true;
            for u in 0..n {
                if u != v {
                    inside[u] += x.get(u, v);
                }
            }
        }
        mask ^= 1 << v;
        table[mask] = cap;
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub enum CutFamily {
    /// s-t cuts need 1, nonseparating cuts need 2.
    HeldKarp { s: usize, t: usize },
    /// Cuts with an odd number of `parity` vertices need 1.
    TJoin { parity: Vec<usize> },
    /// s-t cuts below `1 + tau` (listed, not violations).
    Narrow { s: usize, t: usize, tau: f64 },
}

/// One enumerated cut. `set` is sorted; it contains `s` for s-t cuts and
/// avoids `s` and `t` for nonseparating ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumeratedCut {
    pub set: Vec<usize>,
    pub capacity: f64,
    pub required: f64,
}

/// Every cut of the family violated by more than `tol` (for `Narrow`: every narrow cut).
pub fn enumerate_cut_check(x: &EdgeVector, family: CutFamily, tol: f64) -> Result<Vec<EnumeratedCut>> {
    let n = x.n();
    let table = cut_table(x)?;
    let full = (1usize << n) - 1;
    let set_of = |m: usize| (0..n).filter(|v| m & (1 << v) != 0).collect::<Vec<_>>();
    let mut out = Vec::new();
    match family {
        CutFamily::HeldKarp { s, t } => {
            for (mask, &cap) in table.iter().enumerate().skip(1) {
                let has_s = mask & (1 << s) != 0;
                let has_t = mask & (1 << t) != 0;
                let (required, m) = if has_s != has_t {
                    (1.0, if has_s { mask } else { full ^ mask })
                } else {
                    (2.0, if has_s { full ^ mask } else { mask })
                };
                if cap < required - tol {
                    out.push(EnumeratedCut { set: set_of(m), capacity: cap, required });
                }
            }
        }
        CutFamily::TJoin { parity } => {
            let pmask = parity.iter().fold(0usize, |m, &v| m | (1 << v));
            for (mask, &cap) in table.iter().enumerate().skip(1) {
                if (mask & pmask).count_ones() % 2 == 1 && cap < 1.0 - tol {
                    out.push(EnumeratedCut { set: set_of(mask), capacity: cap, required: 1.0 });
                }
            }
        }
        CutFamily::Narrow { s, t, tau } => {
            for (mask, &cap) in table.iter().enumerate().skip(1) {
                let has_s = mask & (1 << s) != 0;
                let has_t = mask & (1 << t) != 0;
                if has_s != has_t && is_narrow(cap, tau) {
                    let m = if has_s { mask } else { full ^ mask };
                    out.push(EnumeratedCut { set: set_of(m), capacity: cap, required: 1.0 + tau });
                }
            }
            out.sort_by(|a, b| a.set.len().cmp(&b.set.len()).then_with(|| a.set.cmp(&b.set)));
        }
    }
    Ok(out)
}

/// Minimum-cost perfect pairing by exhaustive recursion. Pairs are `(a, b)`
/// with `a < b` in input position order.
pub fn exhaustive_matching(points: &[usize], cost: impl Fn(usize, usize) -> f64) -> Result<(Vec<(usize, usize)>, f64)> {
    if points.len() % 2 == 1 {
        return Err(Error::OddCardinality(points.len()));
    }
    if points.len() > MATCHING_LIMIT {
        return Err(Error::TooLarge { n: points.len(), limit: MATCHING_LIMIT });
    }
    fn rec(
        rest: &mut Vec<usize>,
        cost: &dyn Fn(usize, usize) -> f64,
        acc: f64,
        cur: &mut Vec<(usize, usize)>,
        best: &mut (f64, Vec<(usize, usize)>),
    ) {
        if acc >= best.0 {
            return;
        }
        if rest.is_empty() {
            *best = (acc, cur.clone());
            return;
        }
        let a = rest.remove(0);
        for i in 0..rest.len() {
            let b = rest.remove(i);
            cur.push((a, b));
            rec(rest, cost, acc + cost(a, b), cur, best);
            cur.pop();
            rest.insert(i, b);
        }
        rest.insert(0, a);
    }
    let mut rest = points.to_vec();
    let mut best = (f64::INFINITY, Vec::new());
    if points.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    rec(&mut rest, &cost, 0.0, &mut Vec::new(), &mut best);
    Ok((best.1, best.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_random_metric;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tiny_instances() {
        let two = Instance::from_upper_triangle(2, 0, 1, &[5.0]).unwrap();
        let r = exact_path_tsp(&two).unwrap();
        assert_eq!(r.optimum, 5.0);
        assert_eq!(r.witness, vec![0, 1]);

        let unit = Instance::from_upper_triangle(3, 0, 1, &[1.0, 1.0, 1.0]).unwrap();
        let r = exact_path_tsp(&unit).unwrap();
        assert_eq!(r.optimum, 2.0);
        assert_eq!(r.witness, vec![0, 2, 1]);
    }

    #[test]
    fn witness_achieves_optimum() {
        let inst = generate_random_metric(9, 3).unwrap();
        let r = exact_path_tsp(&inst).unwrap();
        assert_abs_diff_eq!(inst.path_cost(&r.witness), r.optimum, epsilon = 1e-12);
        let mut sorted = r.witness.clone();
        sorted.sort();
        assert_eq!(sorted, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn refuses_large_inputs() {
        let inst = generate_random_metric(21, 0).unwrap();
        assert!(matches!(exact_path_tsp(&inst), Err(Error::TooLarge { limit: 20, .. })));
    }

    #[test]
    fn cut_table_matches_direct_evaluation() {
        let inst = generate_random_metric(7, 5).unwrap();
        let x = inst.cost_vector();
        let table = cut_table(&x).unwrap();
        for mask in 0..1usize << 6 {
            let set: Vec<usize> = (0..7).filter(|v| mask & (1 << v) != 0).collect();
            assert_abs_diff_eq!(table[mask], x.cut_value_of(&set), epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_vector_lists_every_odd_cut() {
        let x = EdgeVector::zeros(5);
        let cuts = enumerate_cut_check(&x, CutFamily::TJoin { parity: vec![1, 3] }, 1e-7).unwrap();
        // Subsets of {0..3} (vertex 4 fixed outside) containing exactly one of {1, 3}.
        assert_eq!(cuts.len(), 8);
    }

    #[test]
    fn matching_on_a_line() {
        let pos: [f64; 4] = [0.0, 1.0, 10.0, 11.0];
        let (pairs, cost) = exhaustive_matching(&[0, 1, 2, 3], |a, b| (pos[a] - pos[b]).abs()).unwrap();
        assert_eq!(cost, 2.0);
        assert_eq!(pairs, vec![(0, 1), (2, 3)]);
    }
}
