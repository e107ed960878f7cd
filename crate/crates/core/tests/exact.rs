mod common;

use approx::assert_abs_diff_eq;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpath::exact::{
    cut_table, enumerate_cut_check, exact_pc_path, exact_path_tsp, exhaustive_matching, CutFamily, ENUMERATION_LIMIT,
    PATH_LIMIT, PC_LIMIT,
};
use stpath::instance::{generate_random_graph, generate_random_metric, metric_closure, EdgeVector, Instance};
use stpath::narrow::compute_narrow_cuts;
use stpath::prize::PcInstance;
use stpath::{hk_solve, Error};

#[test]
fn path_dp_matches_permutations() {
    for seed in 0..12 {
        let n = 3 + seed as usize % 7;
        let inst = generate_random_metric(n, 300 + seed).unwrap();
        let res = exact_path_tsp(&inst).unwrap();
        assert_abs_diff_eq!(res.optimum, brute_force_path(&inst), epsilon = 1e-9);
        assert!(is_hamiltonian_path(&res.witness, n, 0, 1));
        assert_abs_diff_eq!(order_cost(&inst, &res.witness), res.optimum, epsilon = 1e-9);
    }
}

#[test]
fn tiny_paths() {
    let two = Instance::from_upper_triangle(2, 0, 1, &[2.5]).unwrap();
    let res = exact_path_tsp(&two).unwrap();
    assert_eq!((res.optimum, res.witness), (2.5, vec![0, 1]));

    let unit = Instance::from_upper_triangle(3, 0, 1, &[1.0, 1.0, 1.0]).unwrap();
    let res = exact_path_tsp(&unit).unwrap();
    assert_eq!((res.optimum, res.witness), (2.0, vec![0, 2, 1]));
}

#[test]
fn pc_dp_matches_double_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..10 {
        let n = 4 + seed as usize % 5;
        let inst = generate_random_metric(n, 600 + seed).unwrap();
        let prizes: Vec<f64> = (0..n - 2).map(|_| rng.gen_range(0.0..1.2)).collect();
        let pc = PcInstance::new(inst, &prizes).unwrap();
        let res = exact_pc_path(&pc).unwrap();
        assert_abs_diff_eq!(res.optimum, brute_force_pc(&pc), epsilon = 1e-9);
        assert_abs_diff_eq!(res.path_cost + res.missed_prize, res.optimum, epsilon = 1e-9);
        assert_abs_diff_eq!(pc.objective(&res.witness), res.optimum, epsilon = 1e-9);
    }
}

#[test]
fn pc_extremes() {
    let inst = generate_random_metric(6, 5).unwrap();
    let zero = PcInstance::new(inst.clone(), &[0.0; 4]).unwrap();
    let res = exact_pc_path(&zero).unwrap();
    assert_eq!(res.witness, vec![0, 1]);
    assert_eq!(res.optimum, inst.cost(0, 1));

    let huge = PcInstance::new(inst.clone(), &[1e6; 4]).unwrap();
    let res = exact_pc_path(&huge).unwrap();
    assert_eq!(res.witness.len(), 6);
    assert_abs_diff_eq!(res.optimum, exact_path_tsp(&inst).unwrap().optimum, epsilon = 1e-9);
}

#[test]
fn cut_table_matches_direct_sums() {
    let inst = generate_random_metric(7, 2).unwrap();
    let x = hk_solve(&inst).unwrap().x;
    let table = cut_table(&x).unwrap();
    let support = x.support(0.0);
    for (mask, &cap) in table.iter().enumerate() {
        assert_abs_diff_eq!(cap, cut_of(&support, mask), epsilon = 1e-9);
    }
}

#[test]
fn hk_feasible_points_have_no_violations() {
    for seed in 0..15 {
        let inst = metric_closure(&generate_random_graph(8, 0.3, seed).unwrap()).unwrap();
        let x = hk_solve(&inst).unwrap().x;
        let cuts = enumerate_cut_check(&x, CutFamily::HeldKarp { s: 0, t: 1 }, 1e-7).unwrap();
        assert!(cuts.is_empty());
    }
}

#[test]
fn zero_vector_lists_every_odd_cut() {
    let parity = vec![0, 2, 3, 5];
    let cuts = enumerate_cut_check(&EdgeVector::zeros(6), CutFamily::TJoin { parity: parity.clone() }, 0.0).unwrap();
    // Subsets of {0..4} (vertex 5 fixed outside) with an odd number of T vertices.
    let expected = (1usize..1 << 5).filter(|m| [0, 2, 3].iter().filter(|&&v| m >> v & 1 == 1).count() % 2 == 1).count();
    assert_eq!(cuts.len(), expected);
    assert_eq!(expected, 16);
    assert!(cuts.iter().all(|c| c.capacity == 0.0 && c.required == 1.0));

    let hk_cuts = enumerate_cut_check(&EdgeVector::zeros(4), CutFamily::HeldKarp { s: 0, t: 1 }, 0.0).unwrap();
    assert_eq!(hk_cuts.len(), 7);
    assert_eq!(hk_cuts.iter().filter(|c| c.required == 1.0).count(), 4);
}

#[test]
fn narrow_listing_matches_structure() {
    for seed in 0..10 {
        let inst = metric_closure(&generate_random_graph(9, 0.3, 40 + seed).unwrap()).unwrap();
        let x = hk_solve(&inst).unwrap().x;
        for tau in [0.2, 0.6] {
            let listed: Vec<Vec<usize>> = enumerate_cut_check(&x, CutFamily::Narrow { s: 0, t: 1, tau }, 0.0)
                .unwrap()
                .into_iter()
                .map(|c| c.set)
                .collect();
            assert_eq!(listed, compute_narrow_cuts(&x, 0, 1, tau).unwrap().prefixes());
        }
    }
}

#[test]
fn matching_by_recursion() {
    let pos: [f64; 6] = [0.0, 0.5, 4.0, 4.2, 9.0, 10.0];
    let (pairs, cost) = exhaustive_matching(&[0, 1, 2, 3, 4, 5], |a, b| (pos[a] - pos[b]).abs()).unwrap();
    assert_eq!(pairs, vec![(0, 1), (2, 3), (4, 5)]);
    assert_abs_diff_eq!(cost, 1.7, epsilon = 1e-12);
    assert_eq!(exhaustive_matching(&[], |_, _| 1.0).unwrap(), (vec![], 0.0));
    assert!(matches!(exhaustive_matching(&[1, 2, 3], |_, _| 1.0), Err(Error::OddCardinality(3))));
}

#[test]
fn size_limits_are_enforced() {
    let big = generate_random_metric(PATH_LIMIT + 1, 0).unwrap();
    assert!(matches!(exact_path_tsp(&big), Err(Error::TooLarge { .. })));
    let pc = PcInstance::new(generate_random_metric(PC_LIMIT + 1, 0).unwrap(), &[0.5; PC_LIMIT - 1]).unwrap();
    assert!(matches!(exact_pc_path(&pc), Err(Error::TooLarge { .. })));
    let x = EdgeVector::zeros(ENUMERATION_LIMIT + 1);
    assert!(matches!(cut_table(&x), Err(Error::TooLarge { .. })));
}
