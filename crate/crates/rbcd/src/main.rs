use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use rbcd::config::{load_config, FileConfig};
use rbcd::experiment::{
    certify, resolve_instance, run_replicas, BoundOverrides, EpsSpec, ExperimentConfig, Instance,
};
use rbcd::report::{bounds_csv, dist_csv, fmt_g17, summary_csv, trajectory_csv};
use rbcd::solver::{run, RecordPlan, RunOptions, StoppingRule};
use rbcd::verify::run_suite;
use rbcd::{
    build_distribution, complexity_report, BoundInputs, BoundSet, ComplexityInputs, Error, Result,
    RngState,
};

#[derive(Parser)]
#[command(
    name = "rbcd",
    version,
    about = "Randomized pairwise block coordinate descent with bound certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver trajectory and emit it as CSV
    Solve(CommonArgs),
    /// Print the pair-selection probabilities as CSV
    Dist(CommonArgs),
    /// Run the seeded property suite
    Verify(VerifyArgs),
    /// Emit the expected-gap envelopes as CSV plus iteration complexities
    Bounds(CommonArgs),
    /// Run a Monte Carlo replica experiment and certify the bounds
    Mc(McArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (INI-style sections)
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Base seed for the property suite
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Overrides [experiment] replicas
    #[arg(long)]
    replicas: Option<usize>,
    /// Overrides [experiment] iterations
    #[arg(long)]
    iters: Option<usize>,
    /// Absolute accuracy target; overrides [experiment] eps / eps_rel
    #[arg(long)]
    eps: Option<f64>,
    /// Failure probability for the success-fraction check
    #[arg(long)]
    rho: Option<f64>,
    /// Comma-separated checkpoint iterations
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Dist(args) => cmd_dist(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Mc(args) => cmd_mc(args),
    }
}

/// CSV goes to `--out` when given, otherwise to stdout; auxiliary key=value
/// lines go to stdout when the CSV was written to a file, otherwise to
/// stderr, so the CSV stream stays clean either way.
fn emit(out: &Option<PathBuf>, csv: &str, aux: &[String]) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, csv)?;
            for line in aux {
                println!("{line}");
            }
        }
        None => {
            print!("{csv}");
            for line in aux {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn overrides_from(cfg: &FileConfig) -> BoundOverrides {
    let b = cfg.bounds.clone().unwrap_or_default();
    BoundOverrides { tilde_r_sq: b.tilde_r_sq, r_sq: b.r_sq, mu_f: b.mu_f, f_star: b.f_star }
}

fn instance_from(cfg: &FileConfig) -> Result<Instance> {
    let problem = cfg.require_problem()?;
    let solver = cfg.require_solver()?;
    let x0 = solver
        .x0
        .as_ref()
        .ok_or_else(|| Error::Config("missing x0 in [solver]".into()))?;
    resolve_instance(&problem.spec, problem.lipschitz_multiplier, x0, &overrides_from(cfg))
}

fn seed_from(cfg: &FileConfig, flag: Option<u64>) -> u64 {
    flag.or_else(|| cfg.experiment.as_ref().and_then(|e| e.seed)).unwrap_or(0)
}

fn opt_line(name: &str, v: Option<f64>) -> Option<String> {
    v.map(|v| format!("{name} = {}", fmt_g17(v)))
}

fn cmd_solve(args: CommonArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    let instance = instance_from(&cfg)?;
    let solver = cfg.require_solver()?;
    let max_iters = solver
        .max_iters
        .ok_or_else(|| Error::Config("missing max_iters in [solver]".into()))?;
    let record = match solver.record_stride {
        Some(stride) => RecordPlan::Stride(stride),
        None => RecordPlan::default_stride(max_iters),
    };
    let seed = seed_from(&cfg, args.seed);
    let opts = RunOptions {
        stop: StoppingRule {
            max_iters,
            gap_tol: solver.gap_tol,
            residual_tol: solver.residual_tol,
        },
        record,
        f_star: instance.f_star,
        x_star: instance.x_star.clone(),
    };
    let mut rng = RngState::new(seed);
    let traj = run(&instance.problem, &instance.dist, &instance.x0, &mut rng, &opts)?;

    let last = traj.records.last().expect("trajectory always has records");
    let mut aux = vec![
        format!("seed = {seed}"),
        format!("steps = {}", traj.steps),
        format!("f_final = {}", fmt_g17(last.f_value)),
        format!("residual_final = {}", fmt_g17(last.residual)),
    ];
    aux.extend(opt_line("f_star", instance.f_star));
    aux.extend(opt_line("gap_final", last.gap));
    emit(&args.out, &trajectory_csv(&traj), &aux)?;
    Ok(0)
}

fn cmd_dist(args: CommonArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    let problem_sec = cfg.require_problem()?;
    let problem = problem_sec.spec.to_problem(problem_sec.lipschitz_multiplier)?;
    let dist = build_distribution(problem.lipschitz())?;
    let aux = vec![
        format!("kind = {}", problem_sec.spec.kind_name()),
        format!("n_blocks = {}", problem.n_blocks()),
        format!("pairs = {}", dist.pairs().len()),
    ];
    emit(&args.out, &dist_csv(&dist), &aux)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let outcome = run_suite(args.seed, &mut |name| println!("ok {name}"));
    match outcome {
        Ok(count) => {
            println!("all {count} checks passed (seed {})", args.seed);
            Ok(0)
        }
        Err(violation) => {
            eprintln!("{violation}");
            Ok(2)
        }
    }
}

fn cmd_bounds(args: CommonArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    let problem_sec = cfg.require_problem()?;
    // an x0 lets quadratics fill the radii analytically; otherwise the
    // [bounds] overrides must carry them
    let has_x0 = cfg.solver.as_ref().is_some_and(|s| s.x0.is_some());
    let (n_blocks, tilde_r_sq, r_sq, mu_f, gap0) = if has_x0 {
        let inst = instance_from(&cfg)?;
        (inst.problem.n_blocks(), inst.tilde_r_sq, inst.r_sq, inst.mu_f, inst.gap0)
    } else {
        let o = overrides_from(&cfg);
        (problem_sec.spec.n_blocks(), o.tilde_r_sq, o.r_sq, o.mu_f, None)
    };
    let tilde_r_sq = tilde_r_sq.ok_or_else(|| {
        Error::Config("tilde_r_sq unknown: supply it in [bounds] or give a quadratic an x0".into())
    })?;

    let bounds_sec = cfg.bounds.clone().unwrap_or_default();
    let exp = cfg.experiment.clone().unwrap_or_default();
    let max_k = bounds_sec.max_k.or(exp.iterations).unwrap_or(100);
    let ks: Vec<usize> = (0..=max_k).collect();
    let set = BoundSet::compute(
        BoundInputs {
            n_blocks,
            tilde_r_sq,
            r_sq,
            mu_f,
            gap0: gap0.filter(|g| *g > 0.0),
        },
        &ks,
    )?;

    let mut aux = vec![
        format!("n_blocks = {n_blocks}"),
        format!("tilde_r_sq = {}", fmt_g17(tilde_r_sq)),
    ];
    aux.extend(opt_line("r_sq", r_sq));
    aux.extend(opt_line("mu_f", mu_f));
    aux.extend(opt_line("gap0", gap0));

    let eps = exp.eps.or(match (exp.eps_rel, gap0) {
        (Some(frac), Some(g)) if g > 0.0 => Some(frac * g),
        _ => None,
    });
    if let (Some(eps), Some(rho), Some(gap0)) = (eps, exp.rho, gap0.filter(|g| *g > 0.0)) {
        let report = complexity_report(&ComplexityInputs {
            n_blocks,
            tilde_r_sq,
            r_sq,
            mu_f,
            gap0,
            eps,
            rho,
        })?;
        aux.push(format!("eps = {}", fmt_g17(eps)));
        aux.push(format!("rho = {}", fmt_g17(rho)));
        let floats = [
            ("complexity_ours_sublinear", report.ours_sublinear),
            ("complexity_ours_linear", report.ours_linear),
            ("complexity_nng_sublinear", report.nng_sublinear),
            ("complexity_nng_linear", report.nng_linear),
            ("complexity_nng_minus_ours_sublinear", report.nng_minus_ours_sublinear),
            ("complexity_nng_over_ours_linear", report.nng_over_ours_linear),
        ];
        for (name, v) in floats {
            aux.extend(opt_line(name, v));
        }
        let iters = [
            ("iters_ours_sublinear", report.ours_sublinear_iters),
            ("iters_ours_linear", report.ours_linear_iters),
            ("iters_nng_sublinear", report.nng_sublinear_iters),
            ("iters_nng_linear", report.nng_linear_iters),
        ];
        for (name, v) in iters {
            if let Some(v) = v {
                aux.push(format!("{name} = {v}"));
            }
        }
    }
    emit(&args.out, &bounds_csv(&set.rows), &aux)?;
    Ok(0)
}

fn cmd_mc(args: McArgs) -> Result<i32> {
    let cfg = load_config(&args.common.config)?;
    let problem = cfg.require_problem()?;
    let solver = cfg.require_solver()?;
    let x0 = solver
        .x0
        .clone()
        .ok_or_else(|| Error::Config("missing x0 in [solver]".into()))?;
    let exp = cfg.experiment.clone().unwrap_or_default();
    let replicas = args
        .replicas
        .or(exp.replicas)
        .ok_or_else(|| Error::Config("replicas not set (--replicas or [experiment])".into()))?;
    let iterations = args
        .iters
        .or(exp.iterations)
        .ok_or_else(|| Error::Config("iterations not set (--iters or [experiment])".into()))?;
    let eps = match (args.eps, exp.eps, exp.eps_rel) {
        (Some(v), _, _) | (None, Some(v), _) => Some(EpsSpec::Abs(v)),
        (None, None, Some(frac)) => Some(EpsSpec::RelGap0(frac)),
        (None, None, None) => None,
    };
    let config = ExperimentConfig {
        problem_spec: problem.spec.clone(),
        lipschitz_multiplier: problem.lipschitz_multiplier,
        x0,
        replicas,
        iterations,
        base_seed: seed_from(&cfg, args.common.seed),
        checkpoints: args.checkpoints.clone().or_else(|| exp.checkpoints.clone()),
        eps,
        rho: args.rho.or(exp.rho),
        overrides: overrides_from(&cfg),
    };

    let summary = run_replicas(&config)?;
    let report = certify(&summary);

    let mut aux = vec![
        format!("kind = {}", summary.kind),
        format!("n_blocks = {}", summary.n_blocks),
        format!("block_dim = {}", summary.block_dim),
        format!("replicas = {}", summary.replicas),
        format!("iterations = {}", summary.iterations),
        format!("seed = {}", summary.base_seed),
        format!("f_star = {}", fmt_g17(summary.f_star)),
        format!("gap0 = {}", fmt_g17(summary.gap0)),
        format!("tilde_r_sq = {}", fmt_g17(summary.tilde_r_sq)),
    ];
    aux.extend(opt_line("r_sq", summary.r_sq));
    aux.extend(opt_line("mu_f", summary.mu_f));
    aux.extend(opt_line("eps", summary.eps));
    aux.extend(opt_line("rho", summary.rho));
    aux.extend(opt_line("success_fraction", summary.success_fraction));
    aux.extend(report.lines());
    aux.push(format!("certified = {}", if report.passed { "yes" } else { "no" }));

    emit(&args.common.out, &summary_csv(&summary), &aux)?;
    Ok(if report.passed { 0 } else { 2 })
}
