use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use stpath::decompose::{decompose, verify_combination, DECOMPOSE_TOL};
use stpath::exact::{exact_pc_path, exact_path_tsp};
use stpath::graphical::{gap_bound, solve_graphical, DEFAULT_KAPPA, DEFAULT_SIGMA, DEFAULT_THETA};
use stpath::instance::{generate_random_graph, generate_random_metric, validate_metric, Instance};
use stpath::io::{
    certificate_json, combination_json, graph_json, hk_json, instance_json, pc_instance_json, read_graph,
    read_instance, read_instance_file, read_pc_instance,
};
use stpath::lp::hk_solve;
use stpath::narrow::{
    certificate_cost_bound, compute_narrow_cuts, solve_fractional_disjoint, verify_certificate, CertificateBuilder,
    Variant,
};
use stpath::prize::{pc_solve, PcInstance};
use stpath::solver::{solve_bom, solve_hoogeveen, GOLDEN_RATIO};
use stpath::Error;

/// Metric s-t path TSP toolkit. Every command prints one JSON document on stdout.
#[derive(Parser)]
#[command(name = "stpath", version)]
struct Cli {
    /// Human-readable summary on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Instance file (`metric` or `graph`).
    instance: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Best-of-many Christofides path.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Minimum spanning tree baseline instead.
        #[arg(long)]
        hoogeveen: bool,
    },
    /// Held-Karp relaxation.
    Hk {
        #[command(flatten)]
        input: Input,
    },
    /// Spanning-tree decomposition of the Held-Karp optimum.
    Decompose {
        #[command(flatten)]
        input: Input,
    },
    /// Narrow-cut layers of the Held-Karp optimum.
    Narrow {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        tau: f64,
    },
    /// Builds and verifies a dominator certificate for every tree.
    Certify {
        #[command(flatten)]
        input: Input,
        /// simple53, qi, iint or golden.
        #[arg(long, default_value = "golden")]
        variant: String,
    },
    /// Prize-collecting path; the file carries a `prizes` array.
    Pc {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = GOLDEN_RATIO)]
        rho: f64,
    },
    /// Unit-weight graph instance.
    Graphical {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_KAPPA)]
        kappa: f64,
    },
    /// Exact optimum by subset dynamic programming (prize-collecting if the file has prizes).
    Exact {
        #[command(flatten)]
        input: Input,
    },
    /// Random instance: Euclidean by default.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Connected graph with this extra-edge probability instead.
        #[arg(long)]
        graph: Option<f64>,
        /// Add prizes drawn uniformly from [0, MAX).
        #[arg(long, value_name = "MAX")]
        prizes: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Checks the triangle inequality.
    Validate {
        #[command(flatten)]
        input: Input,
    },
}

/// A command result: JSON to print and the exit status to return.
struct Outcome {
    value: Value,
    code: u8,
    summary: String,
}

impl Outcome {
    fn ok(value: Value, summary: String) -> Self {
        Self { value, code: 0, summary }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::NotConnected
        | Error::Parse(_)
        | Error::Io(_)
        | Error::Infeasible
        | Error::Unbounded
        | Error::NotATree(_)
        | Error::OddCardinality(_)
        | Error::TooLarge { .. } => 2,
        _ => 3,
    }
}

fn in_range(name: &str, value: f64, ok: bool, range: &str) -> stpath::Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("--{name} must be in {range}, got {value}")))
    }
}

fn solve(path: &Path, hoogeveen: bool) -> stpath::Result<Outcome> {
    let inst = read_instance(path)?;
    let sol = if hoogeveen { solve_hoogeveen(&inst)? } else { solve_bom(&inst)? };
    let ratio = if sol.hk_value > 0.0 { sol.cost / sol.hk_value } else { 1.0 };
    let value = json!({
        "algorithm": if hoogeveen { "hoogeveen" } else { "best_of_many" },
        "order": sol.order,
        "cost": sol.cost,
        "hk_value": sol.hk_value,
        "ratio": ratio,
        "average_path_cost": sol.average_path_cost(),
        "average_tree_plus_join": sol.average_tree_plus_join(),
        "chosen_tree": sol.chosen_tree,
        "per_tree": sol.per_tree,
    });
    let summary = format!("path cost {:.6}, LP {:.6}, ratio {ratio:.5}, {} tree(s)", sol.cost, sol.hk_value, sol.per_tree.len());
    Ok(Outcome::ok(value, summary))
}

fn hk(path: &Path) -> stpath::Result<Outcome> {
    let sol = hk_solve(&read_instance(path)?)?;
    let summary = format!("LP value {:.6} after {} separation rounds", sol.value, sol.iterations);
    Ok(Outcome::ok(hk_json(&sol), summary))
}

fn decompose_cmd(path: &Path) -> stpath::Result<Outcome> {
    let sol = hk_solve(&read_instance(path)?)?;
    let combo = decompose(&sol.x, DECOMPOSE_TOL)?;
    let report = verify_combination(&sol.x, &combo, DECOMPOSE_TOL);
    let mut value = combination_json(&combo);
    value["hk_value"] = json!(sol.value);
    value["valid"] = json!(report.valid);
    value["problems"] = json!(report.problems);
    let summary = format!("{} trees, residual {:.2e}", combo.len(), combo.residual);
    Ok(Outcome { value, code: if report.valid { 0 } else { 3 }, summary })
}

fn narrow(path: &Path, tau: f64) -> stpath::Result<Outcome> {
    in_range("tau", tau, tau > 0.0 && tau <= 1.0, "(0, 1]")?;
    let inst = read_instance(path)?;
    let sol = hk_solve(&inst)?;
    let st = compute_narrow_cuts(&sol.x, inst.s(), inst.t(), tau)?;
    let flow = solve_fractional_disjoint(&st, &sol.x)?;
    let value = json!({
        "tau": tau,
        "layers": st.layers,
        "prefix_capacity": st.prefix_capacity,
        "representatives": st.representatives,
        "flow_value": flow.value,
        "flow": flow.vectors,
    });
    let summary = format!("{} layers, {} narrow cuts, flow value {:.6}", st.num_layers(), st.num_cuts(), flow.value);
    Ok(Outcome::ok(value, summary))
}

fn certify(path: &Path, variant: &str) -> stpath::Result<Outcome> {
    let variant: Variant = variant.parse()?;
    let inst = read_instance(path)?;
    let sol = hk_solve(&inst)?;
    let combo = decompose(&sol.x, DECOMPOSE_TOL)?;
    let builder = CertificateBuilder::new(&sol.x, inst.s(), inst.t(), variant)?;
    let mut certificates = Vec::with_capacity(combo.len());
    let mut feasible = 0;
    for tree in &combo.trees {
        let cert = builder.build(tree)?;
        let report = verify_certificate(&cert, &inst);
        feasible += usize::from(report.feasible);
        certificates.push(certificate_json(&cert, &report));
    }
    let bound = certificate_cost_bound(&inst, &sol.x, &combo, variant)?;
    let all_ok = feasible == combo.len() && bound.holds;
    let value = json!({
        "variant": variant.name(),
        "hk_value": sol.value,
        "lambdas": combo.lambdas,
        "certificates": certificates,
        "cost_bound": bound,
    });
    let summary = format!(
        "{variant}: {feasible}/{} certificates feasible, average {:.6} vs bound {:.6}",
        combo.len(),
        bound.average,
        bound.bound
    );
    Ok(Outcome { value, code: if all_ok { 0 } else { 3 }, summary })
}

fn pc(path: &Path, rho: f64) -> stpath::Result<Outcome> {
    in_range("rho", rho, (1.5..2.0).contains(&rho), "[1.5, 2)")?;
    let pc = read_pc_instance(path)?;
    let report = pc_solve(&pc, rho)?;
    let bounds_ok = report.pd_bound_holds && report.intervals.iter().all(|c| c.bound_holds);
    let summary = format!(
        "objective {:.6} (path {:.6} + missed {:.6}), LP {:.6}, expectation {:.6}",
        report.objective, report.path_cost, report.missed_prize, report.lp_value, report.expectation
    );
    let value = serde_json::to_value(&report).map_err(|e| Error::Invariant(e.to_string()))?;
    Ok(Outcome { value, code: if bounds_ok { 0 } else { 3 }, summary })
}

fn graphical(path: &Path, theta: f64, sigma: f64, kappa: f64) -> stpath::Result<Outcome> {
    in_range("theta", theta, theta > 0.0 && theta < 1.0, "(0, 1)")?;
    in_range("sigma", sigma, sigma >= 0.0, "[0, inf)")?;
    in_range("kappa", kappa, (0.0..=2.0).contains(&kappa), "[0, 2]")?;
    let g = read_graph(path)?;
    let report = solve_graphical(&g, theta, sigma, kappa, None)?;
    let ok = report.identity_holds && report.eta_bound_holds && report.hk_graphical_ok;
    let summary = format!(
        "{} path cost {} via {}, LP {:.6}, ratio bound {:.5}",
        if ok { "ok:" } else { "INVARIANT FAILURE:" },
        report.cost,
        report.chosen,
        report.hk_value,
        report.rho
    );
    let mut value = serde_json::to_value(&report).map_err(|e| Error::Invariant(e.to_string()))?;
    value["gap_bound"] = json!(gap_bound(theta, sigma, kappa, g.n()));
    Ok(Outcome { value, code: if ok { 0 } else { 3 }, summary })
}

fn exact(path: &Path) -> stpath::Result<Outcome> {
    let text = std::fs::read_to_string(path)?;
    let has_prizes = serde_json::from_str::<Value>(&text).is_ok_and(|v| v.get("prizes").is_some());
    if has_prizes {
        let r = exact_pc_path(&read_pc_instance(path)?)?;
        let summary = format!("optimum {:.6} over {} states", r.optimum, r.explored);
        return Ok(Outcome::ok(json!(r), summary));
    }
    let r = exact_path_tsp(&read_instance(path)?)?;
    let summary = format!("optimum {:.6} over {} states", r.optimum, r.explored);
    Ok(Outcome::ok(json!(r), summary))
}

fn gen(n: usize, seed: u64, graph: Option<f64>, prizes: Option<f64>, output: Option<&Path>) -> stpath::Result<Outcome> {
    let value = match (graph, prizes) {
        (Some(p), None) => {
            in_range("graph", p, (0.0..=1.0).contains(&p), "[0, 1]")?;
            graph_json(&generate_random_graph(n, p, seed)?)
        }
        (None, None) => instance_json(&generate_random_metric(n, seed)?),
        (graph, Some(max)) => {
            in_range("prizes", max, max.is_finite() && max >= 0.0, "[0, inf)")?;
            let inst: Instance = match graph {
                Some(p) => stpath::metric_closure(&generate_random_graph(n, p, seed)?)?,
                None => generate_random_metric(n, seed)?,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let values: Vec<f64> = (0..n.saturating_sub(2)).map(|_| rng.gen::<f64>() * max).collect();
            pc_instance_json(&PcInstance::new(inst, &values)?)
        }
    };
    let summary = format!("generated n = {n} from seed {seed}");
    if let Some(path) = output {
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::Invariant(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        return Ok(Outcome::ok(json!({"written": path, "n": n, "seed": seed}), summary));
    }
    Ok(Outcome::ok(value, summary))
}

fn validate(path: &Path) -> stpath::Result<Outcome> {
    let file = read_instance_file(path)?;
    let report = validate_metric(&file.to_metric()?);
    let violations: Vec<Value> =
        report.violations.iter().map(|v| json!({"u": v.u, "v": v.v, "w": v.w, "excess": v.excess})).collect();
    let valid = report.is_valid();
    let summary = if valid { "metric is valid".to_string() } else { format!("{} triangle violations", violations.len()) };
    Ok(Outcome { value: json!({"valid": valid, "violations": violations}), code: if valid { 0 } else { 2 }, summary })
}

fn run(cli: &Cli) -> stpath::Result<Outcome> {
    match &cli.command {
        Command::Solve { input, hoogeveen } => solve(&input.instance, *hoogeveen),
        Command::Hk { input } => hk(&input.instance),
        Command::Decompose { input } => decompose_cmd(&input.instance),
        Command::Narrow { input, tau } => narrow(&input.instance, *tau),
        Command::Certify { input, variant } => certify(&input.instance, variant),
        Command::Pc { input, rho } => pc(&input.instance, *rho),
        Command::Graphical { input, theta, sigma, kappa } => graphical(&input.instance, *theta, *sigma, *kappa),
        Command::Exact { input } => exact(&input.instance),
        Command::Gen { n, seed, graph, prizes, output } => gen(*n, *seed, *graph, *prizes, output.as_deref()),
        Command::Validate { input } => validate(&input.instance),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            emit(&serde_json::to_string_pretty(&out.value).expect("JSON values always serialize"));
            if cli.verbose {
                eprintln!("{}", out.summary);
            }
            if out.code == 3 {
                eprintln!("error: invariant check failed");
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = error_code(&e);
            emit(&json!({"error": e.to_string(), "exit_code": code}).to_string());
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
