mod common;

use approx::assert_abs_diff_eq;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpath::exact::exact_path_tsp;
use stpath::instance::{all_edges, generate_random_metric, Instance};
use stpath::solver::augment_tree;
use stpath::tjoin::{
    eulerian_path, min_tjoin, min_weight_perfect_matching, shortcut, walk_cost, wrong_parity_set, ParitySet,
};
use stpath::{decompose, hk_solve, Error};

fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    (1..n).map(|v| (rng.gen_range(0..v), v)).collect()
}

#[test]
fn parity_examples() {
    assert!(wrong_parity_set(4, &[(0, 2), (2, 3), (1, 3)], 0, 1).unwrap().is_empty());
    // Internal center 2 with leaves s=0, t=1 and w=3.
    assert_eq!(wrong_parity_set(4, &[(0, 2), (1, 2), (2, 3)], 0, 1).unwrap().vertices(), &[2, 3]);
    assert!(wrong_parity_set(4, &[(0, 1), (1, 2)], 0, 1).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let tree = random_tree(8, &mut rng);
        let t = wrong_parity_set(8, &tree, 0, 1).unwrap();
        assert_eq!(t.len() % 2, 0);
        assert_eq!(t.vertices(), wrong_parity(8, &tree, 0, 1).as_slice());
    }
}

#[test]
fn matching_examples() {
    let inst = generate_random_metric(5, 0).unwrap();
    let m = min_weight_perfect_matching(&[1, 3], |u, v| inst.cost(u, v)).unwrap();
    assert_eq!(m.pairs, vec![(1, 3)]);

    let pos: [f64; 4] = [0.0, 1.0, 10.0, 11.0];
    let m = min_weight_perfect_matching(&[0, 1, 2, 3], |a, b| (pos[a] - pos[b]).abs()).unwrap();
    assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
    assert_eq!(m.cost, 2.0);
    assert!(matches!(min_weight_perfect_matching(&[0, 1, 2], |_, _| 1.0), Err(Error::OddCardinality(3))));
}

#[test]
fn matching_matches_pairing_oracle() {
    for seed in 0..40 {
        let k = 2 * (1 + seed as usize % 5);
        let inst = generate_random_metric(k, seed).unwrap();
        let pts: Vec<usize> = (0..k).collect();
        let m = min_weight_perfect_matching(&pts, |u, v| inst.cost(u, v)).unwrap();
        let brute = brute_force_pairing(&pts, &|u, v| inst.cost(u, v));
        assert_abs_diff_eq!(m.cost, brute, epsilon = 1e-9);
        assert_eq!(m.pairs.len(), k / 2);
    }
}

#[test]
fn join_examples() {
    let inst = generate_random_metric(8, 4).unwrap();
    let empty = min_tjoin(&inst, &ParitySet::new(vec![]).unwrap()).unwrap();
    assert!(empty.edges.is_empty());
    assert_eq!(empty.cost, 0.0);

    let pair = min_tjoin(&inst, &ParitySet::new(vec![5, 2]).unwrap()).unwrap();
    assert_eq!(pair.edges, vec![(2, 5)]);
    assert_eq!(pair.cost, inst.cost(2, 5));

    let t = vec![0, 2, 3, 5, 6, 7];
    let join = min_tjoin(&inst, &ParitySet::new(t.clone()).unwrap()).unwrap();
    assert_abs_diff_eq!(join.cost, brute_force_pairing(&t, &|u, v| inst.cost(u, v)), epsilon = 1e-9);
    // Odd-degree set of the join is exactly T.
    let mut deg = [0; 8];
    for &(u, v) in &join.edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    assert_eq!((0..8).filter(|&v| deg[v] % 2 == 1).collect::<Vec<_>>(), t);
}

#[test]
fn euler_examples() {
    assert_eq!(eulerian_path(3, &[(0, 2), (2, 1)], 0, 1).unwrap(), vec![0, 2, 1]);
    let err = eulerian_path(4, &[(0, 2), (2, 3)], 0, 1).unwrap_err();
    assert!(err.to_string().contains('3'));
    // Disconnected: a separate doubled edge.
    assert!(eulerian_path(5, &[(0, 1), (2, 3), (2, 3)], 0, 1).is_err());
}

fn check_walk(n: usize, edges: &[(usize, usize)], walk: &[usize], s: usize, t: usize) {
    assert_eq!(walk.len(), edges.len() + 1);
    assert_eq!((walk[0], *walk.last().unwrap()), (s, t));
    let mut remaining: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    for w in walk.windows(2) {
        let e = (w[0].min(w[1]), w[0].max(w[1]));
        let pos = remaining.iter().position(|&r| r == e).expect("walk uses an edge not in the multigraph");
        remaining.swap_remove(pos);
        assert!(w[0] < n && w[1] < n);
    }
    assert!(remaining.is_empty());
}

#[test]
fn pipeline_walks_are_valid() {
    for seed in 0..20 {
        let n = 8 + seed as usize % 3;
        let inst = generate_random_metric(n, 40 + seed).unwrap();
        let hk = hk_solve(&inst).unwrap();
        let opt = exact_path_tsp(&inst).unwrap().optimum;
        for tree in decompose(&hk.x, 1e-6).unwrap().trees {
            let run = augment_tree(&inst, &tree).unwrap();
            let mut multigraph = tree.clone();
            multigraph.extend(&run.join.edges);
            check_walk(n, &multigraph, &run.walk, 0, 1);
            assert!(is_hamiltonian_path(&run.order, n, 0, 1));
            assert!(run.path_cost <= walk_cost(&run.walk, &inst) + 1e-12);
            assert!(run.path_cost >= opt - 1e-9);
        }
    }
}

#[test]
fn shortcut_examples() {
    let inst = generate_random_metric(5, 9).unwrap();
    let (order, cost) = shortcut(&[0, 3, 2, 4, 1], &inst).unwrap();
    assert_eq!(order, vec![0, 3, 2, 4, 1]);
    assert_abs_diff_eq!(cost, order_cost(&inst, &order), epsilon = 1e-12);

    let four = Instance::from_points(&[(0.0, 0.0), (3.0, 0.0), (1.0, 1.0), (2.0, -1.0)], 0, 1).unwrap();
    let walk = [0, 2, 3, 2, 1];
    let (order, cost) = shortcut(&walk, &four).unwrap();
    assert_eq!(order, vec![0, 2, 3, 1]);
    assert!(cost <= walk_cost(&walk, &four) + 1e-12);
    assert!(matches!(shortcut(&[0, 2, 1], &four), Err(Error::MissingVertices(v)) if v == vec![3]));
}

#[test]
fn every_wrong_parity_set_is_even() {
    let edges = all_edges(6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let mut tree = random_tree(6, &mut rng);
        // Relabel so s and t land anywhere.
        let perm: Vec<usize> = {
            let mut p: Vec<usize> = (0..6).collect();
            for i in (1..6).rev() {
                p.swap(i, rng.gen_range(0..=i));
            }
            p
        };
        for e in &mut tree {
            *e = (perm[e.0], perm[e.1]);
        }
        assert!(tree.iter().all(|&(u, v)| edges.contains(&(u.min(v), u.max(v)))));
        assert_eq!(wrong_parity_set(6, &tree, 0, 1).unwrap().len() % 2, 0);
    }
}
