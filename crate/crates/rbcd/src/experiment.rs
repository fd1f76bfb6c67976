//! Monte Carlo replica runs and bound certification.
//!
//! A replica set runs `M` independent trajectories of the solver from one
//! fixed starting point, differing only in their pair-sampling streams, and
//! estimates `E[f(x^k)] − f*` at a list of checkpoint iterations. The
//! estimates are then compared against the theoretical envelopes with a
//! three-standard-error allowance so that Monte Carlo noise cannot produce
//! false failures.
//!
//! Replicas execute in parallel, but every statistic is accumulated by a
//! sequential fold in replica-index order, so output is byte-identical for
//! any worker count.

use rayon::prelude::*;

use crate::bounds::{linear_factor, nng_linear_factor, BoundInputs, BoundRow, BoundSet};
use crate::config::{default_checkpoints, VectorGen};
use crate::error::{Error, Result};
use crate::families::{
    kkt_solve_quadratic, level_radius_sq_quadratic, mu_f_quadratic, ProblemSpec,
};
use crate::problem::{l_norm_sq, project_to_s, weighted_dist_sq, BlockProblem, FeasiblePoint};
use crate::sampler::{build_distribution, PairDistribution, RngState};
use crate::solver::{run, RecordPlan, RunOptions, StepRecord, StoppingRule};

/// Target accuracy for the success-fraction experiment, either absolute or
/// relative to the initial gap.
#[derive(Debug, Clone, Copy)]
pub enum EpsSpec {
    Abs(f64),
    RelGap0(f64),
}

/// Manual values that replace the analytic ones when both exist, enabling
/// bound certification on families without closed-form optima.
#[derive(Debug, Clone, Default)]
pub struct BoundOverrides {
    pub tilde_r_sq: Option<f64>,
    pub r_sq: Option<f64>,
    pub mu_f: Option<f64>,
    pub f_star: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem_spec: ProblemSpec,
    pub lipschitz_multiplier: f64,
    pub x0: VectorGen,
    pub replicas: usize,
    pub iterations: usize,
    pub base_seed: u64,
    /// Iteration indices at which statistics are computed; defaults to a
    /// log-spaced set ending at `iterations`.
    pub checkpoints: Option<Vec<usize>>,
    /// Enables the success-fraction experiment together with `rho`.
    pub eps: Option<EpsSpec>,
    pub rho: Option<f64>,
    pub overrides: BoundOverrides,
}

/// A fully materialized problem instance with whatever analytic quantities
/// its family admits, after applying overrides.
pub struct Instance {
    pub problem: BlockProblem,
    pub dist: PairDistribution,
    pub x0: FeasiblePoint,
    pub x_star: Option<FeasiblePoint>,
    pub f_star: Option<f64>,
    pub gap0: Option<f64>,
    pub tilde_r_sq: Option<f64>,
    pub r_sq: Option<f64>,
    pub mu_f: Option<f64>,
}

/// Builds the problem, pair distribution, and projected starting point, and
/// fills in analytic optimum data (quadratics only) before overrides.
pub fn resolve_instance(
    spec: &ProblemSpec,
    lipschitz_multiplier: f64,
    x0_gen: &VectorGen,
    overrides: &BoundOverrides,
) -> Result<Instance> {
    let problem = spec.to_problem(lipschitz_multiplier)?;
    let dist = build_distribution(problem.lipschitz())?;
    let flat = x0_gen.materialize(problem.n_blocks() * problem.block_dim())?;
    let x0 = project_to_s(problem.n_blocks(), problem.block_dim(), &flat)?;

    let mut x_star = None;
    let mut f_star = None;
    let mut tilde_r_sq = None;
    let mut r_sq = None;
    let mut mu_f = None;
    if let ProblemSpec::Quadratic(q) = spec {
        let (xs, fs, _) = kkt_solve_quadratic(q)?;
        tilde_r_sq = Some(weighted_dist_sq(&x0, &xs, problem.lipschitz())?);
        r_sq = Some(level_radius_sq_quadratic(q, problem.lipschitz(), &x0)?);
        mu_f = Some(mu_f_quadratic(q, problem.lipschitz())?);
        x_star = Some(xs);
        f_star = Some(fs);
    }

    let f_star = overrides.f_star.or(f_star);
    let gap0 = f_star.map(|fs| problem.value(&x0) - fs);
    Ok(Instance {
        problem,
        dist,
        x0,
        x_star,
        f_star,
        gap0,
        tilde_r_sq: overrides.tilde_r_sq.or(tilde_r_sq),
        r_sq: overrides.r_sq.or(r_sq),
        mu_f: overrides.mu_f.or(mu_f),
    })
}

/// Statistics at one checkpoint, with the envelope values alongside.
#[derive(Debug, Clone)]
pub struct CheckpointStat {
    pub k: usize,
    pub mean_gap: f64,
    /// Sample standard deviation over replicas divided by √M; zero when M = 1.
    pub stderr_gap: f64,
    /// Mean of `½‖x^k − x*‖_L² + gap`; present only when `x*` is known.
    pub mean_lyapunov: Option<f64>,
    pub bounds: BoundRow,
}

/// Paired difference of the Lyapunov quantity between consecutive
/// checkpoints, averaged over replicas.
#[derive(Debug, Clone)]
pub struct LyapunovDiff {
    pub from_k: usize,
    pub to_k: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub kind: &'static str,
    pub n_blocks: usize,
    pub block_dim: usize,
    pub replicas: usize,
    pub iterations: usize,
    pub base_seed: u64,
    pub f_star: f64,
    pub gap0: f64,
    pub tilde_r_sq: f64,
    pub r_sq: Option<f64>,
    pub mu_f: Option<f64>,
    pub eps: Option<f64>,
    pub rho: Option<f64>,
    pub checkpoint_stats: Vec<CheckpointStat>,
    pub lyapunov_diffs: Vec<LyapunovDiff>,
    /// Fraction of replicas with `gap ≤ eps` at the final iteration.
    pub success_fraction: Option<f64>,
    /// Resolution of the gap measurement: once the iterates stall one ulp
    /// from the optimum the distance form saturates near `ε²‖x*‖_L²`, and the
    /// `f(x) − f*` form near `ε|f*|`. Envelopes below this are untestable in
    /// f64, so certification treats the floor as part of the noise allowance.
    pub gap_floor: f64,
}

struct ReplicaOutcome {
    gaps: Vec<f64>,
    lyapunovs: Option<Vec<f64>>,
    final_gap: f64,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    let mean = values.iter().sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let var = ss / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Runs `M` decorrelated replicas and aggregates checkpoint statistics.
///
/// Requires a known (or overridden) `f*` and `R̃²`, since certification is
/// meaningless without them.
pub fn run_replicas(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    if config.replicas == 0 {
        return Err(Error::Config("replicas must be at least 1".into()));
    }
    if config.iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    let instance = resolve_instance(
        &config.problem_spec,
        config.lipschitz_multiplier,
        &config.x0,
        &config.overrides,
    )?;
    let f_star = instance.f_star.ok_or_else(|| {
        Error::Config("bound certification needs f_star; supply it in [bounds] for this family".into())
    })?;
    let tilde_r_sq = instance.tilde_r_sq.ok_or_else(|| {
        Error::Config("bound certification needs tilde_r_sq; supply it in [bounds] for this family".into())
    })?;
    let gap0 = instance.gap0.expect("gap0 follows from f_star");

    let k_max = config.iterations;
    let mut checkpoints = match &config.checkpoints {
        Some(cs) if cs.is_empty() => {
            return Err(Error::Config("checkpoint list must be non-empty".into()))
        }
        Some(cs) => cs.clone(),
        None => default_checkpoints(k_max),
    };
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if let Some(&beyond) = checkpoints.iter().find(|&&k| k > k_max) {
        return Err(Error::Config(format!(
            "checkpoint {beyond} exceeds the iteration budget {k_max}"
        )));
    }

    let eps = match (config.eps, config.rho) {
        (None, None) => None,
        (Some(spec), Some(rho)) => {
            let eps = match spec {
                EpsSpec::Abs(v) => v,
                EpsSpec::RelGap0(frac) => frac * gap0,
            };
            if !(eps > 0.0 && eps < gap0) {
                return Err(Error::Config(format!(
                    "eps must lie in (0, gap0), got eps = {eps} with gap0 = {gap0}"
                )));
            }
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::Config(format!("rho must lie in (0, 1), got {rho}")));
            }
            Some(eps)
        }
        _ => {
            return Err(Error::Config(
                "the success-fraction experiment needs both eps and rho".into(),
            ))
        }
    };

    // For a quadratic, feasibility of both points and stationarity of x* make
    // f(x) − f* equal ½Σᵢaᵢ‖xᵢ − xᵢ*‖² exactly, and the distance form stays
    // accurate long after direct subtraction of two O(1) objective values has
    // sunk into rounding noise. The recorded r² is weighted by L = m·a, so the
    // gap is r²/(2m). An overridden f* switches the gap's meaning, so only the
    // analytic path may use this.
    let gap_divisor = match (&config.problem_spec, config.overrides.f_star) {
        (ProblemSpec::Quadratic(_), None) => Some(2.0 * config.lipschitz_multiplier),
        _ => None,
    };
    let read_gap = move |rec: &StepRecord| -> f64 {
        match (gap_divisor, rec.r_sq) {
            (Some(div), Some(r_sq)) => r_sq / div,
            _ => rec.gap.expect("f_star was supplied"),
        }
    };

    let outcomes: Vec<Result<ReplicaOutcome>> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngState::for_replica(config.base_seed, r as u64);
            let opts = RunOptions {
                stop: StoppingRule {
                    max_iters: k_max,
                    gap_tol: None,
                    residual_tol: None,
                },
                record: RecordPlan::Checkpoints(checkpoints.clone()),
                f_star: Some(f_star),
                x_star: instance.x_star.clone(),
            };
            let traj = run(&instance.problem, &instance.dist, &instance.x0, &mut rng, &opts)?;
            let mut gaps = Vec::with_capacity(checkpoints.len());
            let mut lyapunovs = instance.x_star.as_ref().map(|_| Vec::with_capacity(checkpoints.len()));
            for &k in &checkpoints {
                let rec = traj
                    .record_at(k)
                    .ok_or_else(|| Error::InvalidInput(format!("no record at checkpoint {k}")))?;
                let gap = read_gap(rec);
                gaps.push(gap);
                if let Some(ls) = &mut lyapunovs {
                    ls.push(0.5 * rec.r_sq.expect("x_star was supplied") + gap);
                }
            }
            let final_gap =
                read_gap(traj.record_at(k_max).expect("final iterate is always recorded"));
            Ok(ReplicaOutcome { gaps, lyapunovs, final_gap })
        })
        .collect();
    let mut replicas = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        replicas.push(outcome?);
    }

    let bound_set = BoundSet::compute(
        BoundInputs {
            n_blocks: instance.problem.n_blocks(),
            tilde_r_sq,
            r_sq: instance.r_sq,
            mu_f: instance.mu_f,
            gap0: Some(gap0).filter(|g| *g > 0.0),
        },
        &checkpoints,
    )?;

    let m = config.replicas;
    let mut checkpoint_stats = Vec::with_capacity(checkpoints.len());
    let mut per_k_lyap: Vec<Vec<f64>> = Vec::new();
    for (t, (&k, bounds)) in checkpoints.iter().zip(bound_set.rows).enumerate() {
        let gaps: Vec<f64> = replicas.iter().map(|r| r.gaps[t]).collect();
        let (mean_gap, stderr_gap) = mean_stderr(&gaps);
        let lyaps: Option<Vec<f64>> = replicas
            .iter()
            .map(|r| r.lyapunovs.as_ref().map(|ls| ls[t]))
            .collect();
        let mean_lyapunov = lyaps.as_ref().map(|ls| mean_stderr(ls).0);
        if let Some(ls) = lyaps {
            per_k_lyap.push(ls);
        }
        checkpoint_stats.push(CheckpointStat { k, mean_gap, stderr_gap, mean_lyapunov, bounds });
    }

    let mut lyapunov_diffs = Vec::new();
    for t in 1..per_k_lyap.len() {
        let diffs: Vec<f64> = (0..m).map(|r| per_k_lyap[t][r] - per_k_lyap[t - 1][r]).collect();
        let (mean, stderr) = mean_stderr(&diffs);
        lyapunov_diffs.push(LyapunovDiff {
            from_k: checkpoints[t - 1],
            to_k: checkpoints[t],
            mean,
            stderr,
        });
    }

    let success_fraction = eps.map(|eps| {
        replicas.iter().filter(|r| r.final_gap <= eps).count() as f64 / m as f64
    });

    let gap_floor = match gap_divisor {
        Some(_) => {
            let x_star = instance.x_star.as_ref().expect("quadratics have an analytic optimum");
            let norm = l_norm_sq(x_star.as_slice(), instance.problem.lipschitz())?;
            64.0 * f64::EPSILON * f64::EPSILON * (tilde_r_sq + norm)
        }
        None => 8.0 * f64::EPSILON * (f_star.abs() + gap0),
    };

    Ok(ExperimentSummary {
        kind: config.problem_spec.kind_name(),
        n_blocks: instance.problem.n_blocks(),
        block_dim: instance.problem.block_dim(),
        replicas: m,
        iterations: k_max,
        base_seed: config.base_seed,
        f_star,
        gap0,
        tilde_r_sq,
        r_sq: instance.r_sq,
        mu_f: instance.mu_f,
        eps,
        rho: config.rho,
        checkpoint_stats,
        lyapunov_diffs,
        success_fraction,
        gap_floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
pub struct CertCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CertifyReport {
    pub checks: Vec<CertCheck>,
    /// True when no check failed (skipped checks do not count against it).
    pub passed: bool,
}

impl CertifyReport {
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let status = match c.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skip => "SKIP",
                };
                if c.detail.is_empty() {
                    format!("{status} {}", c.name)
                } else {
                    format!("{status} {}: {}", c.name, c.detail)
                }
            })
            .collect()
    }
}

fn push_check(checks: &mut Vec<CertCheck>, name: &'static str, failures: Vec<String>) {
    if failures.is_empty() {
        checks.push(CertCheck { name, status: CheckStatus::Pass, detail: String::new() });
    } else {
        checks.push(CertCheck { name, status: CheckStatus::Fail, detail: failures.join("; ") });
    }
}

fn skip_check(checks: &mut Vec<CertCheck>, name: &'static str, why: &str) {
    checks.push(CertCheck { name, status: CheckStatus::Skip, detail: why.to_string() });
}

/// Checks the summary against the theory: the replica mean must sit under
/// the envelopes (within 3 standard errors), our envelopes must dominate the
/// classical ones, the success fraction must clear its binomial floor, and
/// the Lyapunov mean must be non-increasing across checkpoints.
pub fn certify(summary: &ExperimentSummary) -> CertifyReport {
    let mut checks = Vec::new();

    let mut failures = Vec::new();
    for stat in &summary.checkpoint_stats {
        let allowance = 3.0 * stat.stderr_gap + summary.gap_floor;
        if stat.mean_gap > stat.bounds.ours_sublinear + allowance {
            failures.push(format!(
                "k={}: mean_gap {:.6e} > sublinear envelope {:.6e} + 3se",
                stat.k, stat.mean_gap, stat.bounds.ours_sublinear
            ));
        }
        if let Some(lin) = stat.bounds.ours_linear {
            if stat.mean_gap > lin + allowance {
                failures.push(format!(
                    "k={}: mean_gap {:.6e} > linear envelope {:.6e} + 3se",
                    stat.k, stat.mean_gap, lin
                ));
            }
        }
    }
    push_check(&mut checks, "expectation_within_bounds", failures);

    if summary.r_sq.is_none() && summary.mu_f.is_none() {
        skip_check(&mut checks, "bound_dominance", "needs r_sq or mu_f");
    } else {
        let mut failures = Vec::new();
        if let Some(r_sq) = summary.r_sq {
            // r_sq and tilde_r_sq coincide for tight quadratics but arrive
            // through different arithmetic, so allow ulp-level slack
            if r_sq < summary.tilde_r_sq * (1.0 - 1e-9) {
                failures.push(format!(
                    "inputs inconsistent: r_sq {r_sq:.6e} < tilde_r_sq {:.6e}",
                    summary.tilde_r_sq
                ));
            }
            for stat in &summary.checkpoint_stats {
                if let Some(nng) = stat.bounds.nng_sublinear {
                    if stat.bounds.ours_sublinear > nng {
                        failures.push(format!(
                            "k={}: sublinear envelope {:.6e} > classical {:.6e}",
                            stat.k, stat.bounds.ours_sublinear, nng
                        ));
                    }
                }
            }
        }
        if let Some(mu) = summary.mu_f {
            let ours = linear_factor(summary.n_blocks, mu);
            let nng = nng_linear_factor(summary.n_blocks, mu);
            match (ours, nng) {
                (Ok(a), Ok(b)) if a > b => {
                    failures.push(format!("linear factor {a:.6} > classical factor {b:.6}"));
                }
                (Err(e), _) | (_, Err(e)) => failures.push(format!("factor evaluation: {e}")),
                _ => {}
            }
        }
        push_check(&mut checks, "bound_dominance", failures);
    }

    match (summary.success_fraction, summary.rho) {
        (Some(frac), Some(rho)) => {
            let m = summary.replicas as f64;
            let floor = (1.0 - rho) - 3.0 * (rho * (1.0 - rho) / m).sqrt();
            let failures = if frac >= floor {
                vec![]
            } else {
                vec![format!("success fraction {frac:.4} below floor {floor:.4}")]
            };
            push_check(&mut checks, "high_probability_success", failures);
        }
        _ => skip_check(&mut checks, "high_probability_success", "eps/rho not configured"),
    }

    if summary.lyapunov_diffs.is_empty() {
        let why = if summary.checkpoint_stats.iter().any(|s| s.mean_lyapunov.is_some()) {
            "fewer than two checkpoints"
        } else {
            "x_star unknown"
        };
        skip_check(&mut checks, "lyapunov_non_increasing", why);
    } else {
        let mut failures = Vec::new();
        for diff in &summary.lyapunov_diffs {
            // tiny absolute slack so a fully converged stretch (all diffs
            // rounding to 0, stderr 0) cannot fail on the last ulp
            let allowance = 3.0 * diff.stderr + 1e-12 * summary.gap0.abs().max(1.0);
            if diff.mean > allowance {
                failures.push(format!(
                    "k={}→{}: mean Lyapunov change {:+.6e} > 3se",
                    diff.from_k, diff.to_k, diff.mean
                ));
            }
        }
        push_check(&mut checks, "lyapunov_non_increasing", failures);
    }

    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    CertifyReport { checks, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::QuadraticSpec;
    use crate::report::summary_csv;

    fn two_block_config() -> ExperimentConfig {
        ExperimentConfig {
            problem_spec: ProblemSpec::Quadratic(QuadraticSpec {
                n_blocks: 2,
                block_dim: 1,
                curvature: vec![1.0, 1.0],
                linear: vec![0.0, 0.0],
            }),
            lipschitz_multiplier: 1.0,
            x0: VectorGen::List(vec![1.0, -1.0]),
            replicas: 1,
            iterations: 1,
            base_seed: 7,
            checkpoints: Some(vec![0, 1]),
            eps: None,
            rho: None,
            overrides: BoundOverrides::default(),
        }
    }

    fn desk_config() -> ExperimentConfig {
        ExperimentConfig {
            problem_spec: ProblemSpec::Quadratic(QuadraticSpec {
                n_blocks: 3,
                block_dim: 2,
                curvature: vec![1.0, 2.0, 4.0],
                linear: vec![0.5, -1.0, 2.0, 0.0, -0.5, 1.0],
            }),
            lipschitz_multiplier: 1.0,
            x0: VectorGen::Gaussian { seed: 11, scale: 1.0 },
            replicas: 16,
            iterations: 60,
            base_seed: 123,
            checkpoints: Some(vec![0, 5, 20, 60]),
            eps: Some(EpsSpec::RelGap0(0.5)),
            rho: Some(0.2),
            overrides: BoundOverrides::default(),
        }
    }

    #[test]
    fn two_block_instance_is_optimal_after_one_step() {
        let summary = run_replicas(&two_block_config()).unwrap();
        assert_eq!(summary.checkpoint_stats.len(), 2);
        assert_eq!(summary.checkpoint_stats[0].k, 0);
        assert!((summary.checkpoint_stats[0].mean_gap - 1.0).abs() < 1e-15);
        let final_stat = &summary.checkpoint_stats[1];
        assert_eq!(final_stat.k, 1);
        assert!(final_stat.mean_gap.abs() <= 1e-15);
        assert_eq!(final_stat.stderr_gap, 0.0, "single replica has no spread");
        let report = certify(&summary);
        assert!(report.passed, "{:?}", report.lines());
    }

    #[test]
    fn certify_passes_on_a_small_quadratic_experiment() {
        let summary = run_replicas(&desk_config()).unwrap();
        let report = certify(&summary);
        assert!(report.passed, "{:?}", report.lines());
        assert!(summary.success_fraction.is_some());
        assert_eq!(summary.lyapunov_diffs.len(), 3);
    }

    #[test]
    fn summaries_are_deterministic() {
        let a = summary_csv(&run_replicas(&desk_config()).unwrap());
        let b = summary_csv(&run_replicas(&desk_config()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let reference = summary_csv(&run_replicas(&desk_config()).unwrap());
        for threads in [1, 2, 7] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = pool.install(|| summary_csv(&run_replicas(&desk_config()).unwrap()));
            assert_eq!(got, reference, "output changed with {threads} worker(s)");
        }
    }

    #[test]
    fn stats_match_direct_recomputation_from_trajectories() {
        let cfg = desk_config();
        let summary = run_replicas(&cfg).unwrap();
        let instance = resolve_instance(
            &cfg.problem_spec,
            cfg.lipschitz_multiplier,
            &cfg.x0,
            &cfg.overrides,
        )
        .unwrap();
        let k_probe = 20;
        let mut gaps = Vec::new();
        for r in 0..cfg.replicas {
            let mut rng = RngState::for_replica(cfg.base_seed, r as u64);
            let opts = RunOptions {
                stop: StoppingRule { max_iters: 60, gap_tol: None, residual_tol: None },
                record: RecordPlan::Checkpoints(vec![k_probe]),
                f_star: instance.f_star,
                x_star: instance.x_star.clone(),
            };
            let traj = run(&instance.problem, &instance.dist, &instance.x0, &mut rng, &opts).unwrap();
            gaps.push(traj.record_at(k_probe).unwrap().r_sq.unwrap() / 2.0);
        }
        let mean: f64 = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let stat = summary.checkpoint_stats.iter().find(|s| s.k == k_probe).unwrap();
        assert_eq!(stat.mean_gap, mean, "aggregation must match a by-hand pass");
    }

    #[test]
    fn replica_order_does_not_affect_the_mean_beyond_roundoff() {
        let cfg = desk_config();
        let summary = run_replicas(&cfg).unwrap();
        let instance = resolve_instance(
            &cfg.problem_spec,
            cfg.lipschitz_multiplier,
            &cfg.x0,
            &cfg.overrides,
        )
        .unwrap();
        let mut gaps = Vec::new();
        for r in (0..cfg.replicas).rev() {
            let mut rng = RngState::for_replica(cfg.base_seed, r as u64);
            let opts = RunOptions {
                stop: StoppingRule { max_iters: 60, gap_tol: None, residual_tol: None },
                record: RecordPlan::Checkpoints(vec![0, 5, 20, 60]),
                f_star: instance.f_star,
                x_star: instance.x_star.clone(),
            };
            let traj = run(&instance.problem, &instance.dist, &instance.x0, &mut rng, &opts).unwrap();
            gaps.push(traj.record_at(60).unwrap().r_sq.unwrap() / 2.0);
        }
        let reversed_mean: f64 = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let stat = summary.checkpoint_stats.iter().find(|s| s.k == 60).unwrap();
        let scale = stat.mean_gap.abs().max(1e-30);
        assert!(
            (stat.mean_gap - reversed_mean).abs() <= 1e-12 * scale,
            "permutation moved the mean: {} vs {reversed_mean}",
            stat.mean_gap
        );
    }

    #[test]
    fn certify_flags_a_violated_envelope() {
        let mut summary = run_replicas(&desk_config()).unwrap();
        let stat = &mut summary.checkpoint_stats[2];
        stat.mean_gap = stat.bounds.ours_sublinear + 3.0 * stat.stderr_gap + 1.0;
        let report = certify(&summary);
        assert!(!report.passed);
        let check = report.checks.iter().find(|c| c.name == "expectation_within_bounds").unwrap();
        assert_eq!(check.status, CheckStatus::Fail);
        assert!(check.detail.contains("k=20"), "{}", check.detail);
    }

    #[test]
    fn families_without_analytic_optimum_need_overrides() {
        let cfg = ExperimentConfig {
            problem_spec: ProblemSpec::PseudoHuber(crate::families::PseudoHuberSpec {
                n_blocks: 3,
                block_dim: 1,
                weight: vec![1.0, 1.0, 1.0],
            }),
            lipschitz_multiplier: 1.0,
            x0: VectorGen::List(vec![1.0, 0.0, -1.0]),
            replicas: 2,
            iterations: 5,
            base_seed: 3,
            checkpoints: None,
            eps: None,
            rho: None,
            overrides: BoundOverrides::default(),
        };
        let err = run_replicas(&cfg).unwrap_err();
        assert!(err.to_string().contains("f_star"), "{err}");

        let with_overrides = ExperimentConfig {
            overrides: BoundOverrides {
                f_star: Some(0.0),
                tilde_r_sq: Some(4.0),
                ..BoundOverrides::default()
            },
            ..cfg
        };
        let summary = run_replicas(&with_overrides).unwrap();
        // no x*, so the Lyapunov column is absent and its check skips
        assert!(summary.checkpoint_stats.iter().all(|s| s.mean_lyapunov.is_none()));
        let report = certify(&summary);
        let lyap = report.checks.iter().find(|c| c.name == "lyapunov_non_increasing").unwrap();
        assert_eq!(lyap.status, CheckStatus::Skip);
        assert!(report.passed);
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let mut cfg = desk_config();
        cfg.replicas = 0;
        assert!(run_replicas(&cfg).is_err());

        let mut cfg = desk_config();
        cfg.checkpoints = Some(vec![0, 61]);
        assert!(run_replicas(&cfg).unwrap_err().to_string().contains("61"));

        let mut cfg = desk_config();
        cfg.eps = Some(EpsSpec::Abs(1e9));
        assert!(run_replicas(&cfg).is_err(), "eps above gap0 must be rejected");

        let mut cfg = desk_config();
        cfg.rho = None;
        assert!(run_replicas(&cfg).is_err(), "eps without rho must be rejected");

        let mut cfg = desk_config();
        cfg.checkpoints = Some(vec![]);
        assert!(run_replicas(&cfg).is_err());
    }

    #[test]
    fn default_checkpoints_cover_the_final_iterate() {
        let mut cfg = desk_config();
        cfg.checkpoints = None;
        cfg.eps = None;
        cfg.rho = None;
        let summary = run_replicas(&cfg).unwrap();
        assert_eq!(summary.checkpoint_stats.first().unwrap().k, 0);
        assert_eq!(summary.checkpoint_stats.last().unwrap().k, 60);
    }
}
