//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use stpath::decompose::verify_combination;
use stpath::exact::{exact_pc_path, exact_path_tsp};
use stpath::graphical::{
    gap_bound_sup, graphical_ratio, solve_graphical, DEFAULT_KAPPA, DEFAULT_SIGMA, DEFAULT_THETA, GAP_KAPPA,
    GAP_SIGMA, GAP_THETA,
};
use stpath::instance::Instance;
use stpath::narrow::{
    compute_narrow_cuts, odd_cut_weights, solve_fractional_disjoint, verify_certificate, certificate_cost_bound,
    CertificateBuilder, Variant,
};
use stpath::prize::pc_solve;
use stpath::solver::{appendix_bounds_check, run_bom, solve_hoogeveen_from, BomRun, SolveOptions, GOLDEN_RATIO};
use stpath::tjoin::{min_tjoin, ParitySet};

const SLACK: f64 = 1e-6;

struct Suite {
    instances: Vec<Instance>,
    runs: Vec<BomRun>,
    elapsed: Duration,
}

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_golden_ratio(suite: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        let c = run.hk.value;
        let bound = 1.618_034_0 * c * (1.0 + SLACK);
        let avg = run.solution.average_tree_plus_join();
        ensure(avg <= bound, || format!("instance {i} (n={}): average {avg} > {bound}", inst.n()))?;
        ensure(run.solution.cost <= bound, || format!("instance {i}: output {} > {bound}", run.solution.cost))?;
        worst = worst.max(run.solution.cost / c);
    }
    let secs = suite.elapsed.as_secs_f64();
    ensure(secs < 60.0, || format!("pipeline took {secs:.1}s"))?;
    Ok(format!("{} instances, worst output/LP {worst:.5}, {secs:.2}s", suite.instances.len()))
}

fn c2_certificates(suite: &Suite) -> Check {
    let mut count = 0;
    let mut worst = f64::INFINITY;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        for variant in Variant::ALL {
            let builder = CertificateBuilder::new(&run.hk.x, inst.s(), inst.t(), variant)
                .map_err(|e| format!("instance {i} {variant}: {e}"))?;
            for tree in &run.combo.trees {
                let cert = builder.build(tree).map_err(|e| format!("instance {i} {variant}: {e}"))?;
                let report = verify_certificate(&cert, inst);
                let oracle = brute_force_min_odd_cut(&cert.y, cert.parity_set.vertices());
                ensure(report.exhaustive, || format!("instance {i}: verification not exhaustive"))?;
                ensure(oracle >= 1.0 - 1e-7 && report.worst_value >= 1.0 - 1e-7, || {
                    format!("instance {i} {variant}: odd cut {oracle} (reported {})", report.worst_value)
                })?;
                ensure((oracle - report.worst_value).abs() <= 1e-9 || oracle.is_infinite(), || {
                    format!("instance {i} {variant}: verifier {} disagrees with oracle {oracle}", report.worst_value)
                })?;
                worst = worst.min(oracle);
                count += 1;
            }
        }
    }
    Ok(format!("{count} certificates over 4 variants, smallest odd cut {worst:.9}"))
}

fn c3_cost_chains(suite: &Suite) -> Check {
    let mut ratios = [0.0f64; 4];
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        for (k, variant) in Variant::ALL.into_iter().enumerate() {
            let report = certificate_cost_bound(inst, &run.hk.x, &run.combo, variant)
                .map_err(|e| format!("instance {i} {variant}: {e}"))?;
            let bound = variant.guarantee() * run.hk.value * (1.0 + SLACK);
            ensure(report.average <= bound, || {
                format!("instance {i} {variant}: {} > {bound}", report.average)
            })?;
            ratios[k] = ratios[k].max(report.average / run.hk.value);
        }
    }
    Ok(format!(
        "worst ratios simple53 {:.5}, qi {:.5}, iint {:.5}, golden {:.5}",
        ratios[0], ratios[1], ratios[2], ratios[3]
    ))
}

fn c4_exact(suite: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        let opt = exact_path_tsp(inst).map_err(|e| e.to_string())?.optimum;
        if inst.n() <= 9 {
            let brute = brute_force_path(inst);
            ensure((brute - opt).abs() <= 1e-9, || format!("instance {i}: DP {opt} vs permutations {brute}"))?;
        }
        let out = run.solution.cost;
        ensure(out >= opt - 1e-9, || format!("instance {i}: output {out} below optimum {opt}"))?;
        ensure(out / opt <= 1.618_034_1, || format!("instance {i}: ratio {}", out / opt))?;
        ensure(run.hk.value <= opt * (1.0 + 1e-9), || format!("instance {i}: LP {} above optimum {opt}", run.hk.value))?;
        worst = worst.max(out / opt);
        gap = gap.max(opt / run.hk.value);
    }
    Ok(format!("worst output/OPT {worst:.5}, worst OPT/LP {gap:.5}"))
}

fn c5_decomposition(suite: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        let n = inst.n();
        let combo = &run.combo;
        let report = verify_combination(&run.hk.x, combo, 1e-6);
        ensure(report.valid, || format!("instance {i}: {:?}", report.problems))?;
        ensure(combo.residual <= 1e-6, || format!("instance {i}: residual {}", combo.residual))?;
        let total: f64 = combo.lambdas.iter().sum();
        ensure((total - 1.0).abs() <= 1e-9, || format!("instance {i}: Σλ = {total}"))?;
        let support = run.hk.x.support(1e-9).len();
        ensure(combo.trees.len() <= support + 1, || format!("instance {i}: {} trees", combo.trees.len()))?;
        for tree in &combo.trees {
            ensure(is_spanning_tree(n, tree), || format!("instance {i}: not a spanning tree"))?;
            ensure(tree.iter().all(|&(u, v)| run.hk.x.get(u, v) > 1e-9), || format!("instance {i}: tree leaves support"))?;
        }
        let err = tree_marginals(n, &combo.trees, &combo.lambdas).max_abs_diff(&run.hk.x);
        ensure(err <= 1e-6, || format!("instance {i}: marginal error {err}"))?;
        worst = worst.max(err);
    }
    Ok(format!("max marginal error {worst:.2e}"))
}

fn c6_narrow(suite: &Suite) -> Check {
    let taus = [1.0 / 7.0, 0.2, 1.0 - 0.12297];
    let mut cuts = 0;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        let x = &run.hk.x;
        for tau in taus {
            let structure = compute_narrow_cuts(x, inst.s(), inst.t(), tau).map_err(|e| format!("instance {i} τ={tau}: {e}"))?;
            let oracle = brute_force_narrow_cuts(x, inst.s(), inst.t(), tau);
            ensure(structure.prefixes() == oracle, || {
                format!("instance {i} τ={tau}: prefixes {:?} vs enumerated {oracle:?}", structure.prefixes())
            })?;
            for (k, m) in structure.representative_margins(x).into_iter().enumerate() {
                ensure(m >= -1e-7, || format!("instance {i} τ={tau}: representative mass short by {m} on cut {k}"))?;
            }
            let flow = solve_fractional_disjoint(&structure, x).map_err(|e| format!("instance {i} τ={tau}: {e}"))?;
            let need = structure.num_cuts() as f64;
            ensure((flow.value - need).abs() <= 1e-7, || format!("instance {i} τ={tau}: flow {} vs {need}", flow.value))?;
            cuts += structure.num_cuts();
        }
    }
    Ok(format!("{cuts} narrow cuts matched enumeration across 3 values of τ"))
}

fn c7_parity(suite: &Suite) -> Check {
    let taus = [1.0 / 7.0, 0.2, 1.0 - 0.12297, Variant::Golden.tau()];
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        for tau in taus {
            let structure = compute_narrow_cuts(&run.hk.x, inst.s(), inst.t(), tau).map_err(|e| e.to_string())?;
            let weights = odd_cut_weights(&structure, &run.combo, inst.s(), inst.t()).map_err(|e| e.to_string())?;
            for (k, (prefix, (w, rhs))) in structure.prefixes().iter().zip(weights).enumerate() {
                // Recompute the odd-parity mass independently.
                let mass: f64 = run
                    .combo
                    .trees
                    .iter()
                    .zip(&run.combo.lambdas)
                    .filter(|(tree, _)| {
                        wrong_parity(inst.n(), tree, inst.s(), inst.t()).iter().filter(|v| prefix.contains(v)).count() % 2 == 1
                    })
                    .map(|(_, &l)| l)
                    .sum();
                ensure((mass - w).abs() <= 1e-12, || format!("instance {i}: odd mass {w} vs recomputed {mass}"))?;
                ensure(mass <= rhs + 1e-6, || format!("instance {i} τ={tau} cut {k}: {mass} > {rhs}"))?;
                tightest = tightest.min(rhs - mass);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} narrow cuts, smallest slack {tightest:.3e}"))
}

fn c8_appendix(suite: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        let report = appendix_bounds_check(inst, &run.hk).map_err(|e| e.to_string())?;
        ensure(report.all_hold, || format!("instance {i}: {report:?}"))?;
        let base = solve_hoogeveen_from(inst, &run.hk).map_err(|e| e.to_string())?;
        let bound = 5.0 / 3.0 * run.hk.value * (1.0 + SLACK);
        ensure(base.cost <= bound, || format!("instance {i}: Hoogeveen {} > {bound}", base.cost))?;
        worst = worst.max(base.cost / run.hk.value);
    }
    Ok(format!("all three bounds hold; worst Hoogeveen/LP {worst:.5}"))
}

fn c9_prize(_: &Suite) -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let suite = pc_suite();
    for (i, pc) in suite.iter().enumerate() {
        let report = pc_solve(pc, GOLDEN_RATIO).map_err(|e| format!("instance {i}: {e}"))?;
        let bound = 1.9535 * report.lp_value * (1.0 + SLACK);
        ensure(report.expectation <= bound, || format!("instance {i}: E {} > {bound}", report.expectation))?;
        ensure(report.objective <= report.expectation + 1e-12, || {
            format!("instance {i}: output {} > E {}", report.objective, report.expectation)
        })?;
        let opt = exact_pc_path(pc).map_err(|e| e.to_string())?.optimum;
        if pc.instance().n() <= 7 {
            let brute = brute_force_pc(pc);
            ensure((brute - opt).abs() <= 1e-9, || format!("instance {i}: DP {opt} vs brute force {brute}"))?;
        }
        ensure(report.objective >= opt - 1e-9, || format!("instance {i}: output {} below optimum {opt}", report.objective))?;
        worst = worst.max(report.expectation / report.lp_value);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{} instances, worst E/LP {worst:.5}, {secs:.2}s", suite.len()))
}

fn c10_graphical(_: &Suite) -> Check {
    let rho = graphical_ratio(DEFAULT_THETA, DEFAULT_SIGMA, DEFAULT_KAPPA);
    ensure(rho < 1.5780, || format!("ρ = {rho}"))?;
    let gap = gap_bound_sup(GAP_THETA, GAP_SIGMA, GAP_KAPPA);
    ensure(gap < 1.6137, || format!("gap bound {gap}"))?;
    let mut count = 0;
    for (i, g) in graph_suite().iter().enumerate() {
        let report = solve_graphical(g, 0.12297, DEFAULT_SIGMA, DEFAULT_KAPPA, None).map_err(|e| format!("graph {i}: {e}"))?;
        let lt = report.traversal.as_ref().ok_or_else(|| format!("graph {i}: no traversal"))?;
        let n = g.n() as i64;
        // Recount from the parts: every P_LT edge once, every doubled edge twice.
        let d = bfs_distances(g.n(), g.edges());
        let plt: i64 = lt.plt.windows(2).map(|w| d[w[0]][w[1]] as i64).sum();
        let eta = plt - (lt.plt.len() as i64 - 1);
        let doubled = 2 * lt.doubled.len() as i64;
        ensure(lt.augmented_cost as i64 == plt + doubled, || format!("graph {i}: augmented cost mismatch"))?;
        ensure(plt + doubled == 2 * (n - 1) - plt + 2 * eta, || {
            format!("graph {i}: {} != 2(n-1) - {plt} + 2·{eta}", plt + doubled)
        })?;
        ensure(report.identity_holds, || format!("graph {i}: library identity flag false"))?;
        let lhs = 0.12297 * eta as f64;
        let rhs = report.hk_value - (n - 1) as f64 + 1e-6;
        ensure(lhs <= rhs, || format!("graph {i}: θη = {lhs} > {rhs}"))?;
        ensure(report.hk_graphical_ok, || format!("graph {i}: LP mass {} / value {}", report.hk_mass, report.hk_value))?;
        count += 1;
    }
    Ok(format!("{count} graphs; ρ = {rho:.5}, gap bound {gap:.5}"))
}

fn c11_tjoin(suite: &Suite) -> Check {
    let mut count = 0;
    for (i, (inst, run)) in suite.instances.iter().zip(&suite.runs).enumerate() {
        for tree in &run.combo.trees {
            let parity = wrong_parity(inst.n(), tree, inst.s(), inst.t());
            if parity.len() > 8 {
                continue;
            }
            let join = min_tjoin(inst, &ParitySet::new(parity.clone()).unwrap()).map_err(|e| e.to_string())?;
            let brute = brute_force_pairing(&parity, &|u, v| inst.cost(u, v));
            ensure((join.cost - brute).abs() <= 1e-9 * (1.0 + brute), || {
                format!("instance {i}: join {} vs pairing {brute} for T = {parity:?}", join.cost)
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} parity sets with |T| <= 8"))
}

fn main() {
    let instances = metric_suite();
    let start = Instant::now();
    let runs: Vec<BomRun> = instances
        .iter()
        .map(|inst| run_bom(inst, &SolveOptions::default()).expect("pipeline"))
        .collect();
    let suite = Suite { instances, runs, elapsed: start.elapsed() };

    let criteria: [(&str, fn(&Suite) -> Check); 11] = [
        ("golden-ratio guarantee", c1_golden_ratio),
        ("certificate feasibility", c2_certificates),
        ("cost-chain bounds per variant", c3_cost_chains),
        ("sanity vs exact oracle", c4_exact),
        ("tree decomposition", c5_decomposition),
        ("narrow-cut structure", c6_narrow),
        ("parity-probability invariant", c7_parity),
        ("spanning tree and join bounds", c8_appendix),
        ("prize-collecting", c9_prize),
        ("graphical metrics", c10_graphical),
        ("T-join optimality", c11_tjoin),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&suite))).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
