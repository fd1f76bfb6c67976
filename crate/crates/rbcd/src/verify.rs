//! Seeded property suite behind the `verify` subcommand.
//!
//! Each check draws its instances from a stream derived from the base seed,
//! so a reported violation is reproducible by rerunning with the same seed.
//! Checks are ordered cheapest-first and the suite stops at the first
//! violation.

use std::fmt;

use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};

use crate::bounds::{
    bound_nng_sublinear, bound_sublinear, complexity_report, linear_factor, nng_linear_factor,
    ComplexityInputs,
};
use crate::error::{Error, Result};
use crate::families::{
    kkt_solve_quadratic, level_radius_sq_quadratic, mu_f_quadratic, ProblemSpec, PseudoHuberSpec,
    QuadraticSpec, SoftplusSpec,
};
use crate::problem::{checks, project_to_s, weighted_dist_sq, FeasiblePoint};
use crate::sampler::{build_distribution, RngState};
use crate::solver::{run, step, RecordPlan, RunOptions, StoppingRule};
use crate::theory::{descent_check, initial_gap_check, pair_operator_deviation, BasisSet};

/// First failing check of a suite run, with enough context to reproduce it.
#[derive(Debug, Clone)]
pub struct Violation {
    pub check: &'static str,
    /// Base seed the suite was started with; rerunning `verify` with it
    /// reproduces the failure.
    pub seed: u64,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed (seed {}): {}", self.check, self.seed, self.message)
    }
}

type Check = fn(&mut RngState) -> std::result::Result<(), String>;

const CHECKS: &[(&str, Check)] = &[
    ("projection_properties", check_projection),
    ("family_oracles", check_family_oracles),
    ("quadratic_analytics", check_quadratic_analytics),
    ("subspace_basis_roundtrip", check_basis_roundtrip),
    ("pair_operator_identity", check_pair_operator),
    ("descent_inequality", check_descent),
    ("pair_sampling_chi_square", check_sampling),
    ("solver_contracts", check_solver_contracts),
    ("bound_dominance", check_bound_dominance),
    ("complexity_constants", check_complexity_constants),
];

/// Runs every check, reporting each passed name through `progress`. Returns
/// the number of checks run, or the first violation.
pub fn run_suite(
    base_seed: u64,
    progress: &mut dyn FnMut(&str),
) -> std::result::Result<usize, Violation> {
    for (idx, (name, check)) in CHECKS.iter().enumerate() {
        let mut rng = RngState::for_replica(base_seed, idx as u64);
        check(&mut rng).map_err(|message| Violation { check: name, seed: base_seed, message })?;
        progress(name);
    }
    Ok(CHECKS.len())
}

/// Names of the suite's checks, in execution order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _)| *name).collect()
}

/// Outcome of a chi-square goodness-of-fit test at a fixed significance.
#[derive(Debug, Clone)]
pub struct GofOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub df: usize,
    pub passed: bool,
}

/// Pearson chi-square test of observed counts against cell probabilities.
/// With a single cell there is nothing to test; the outcome passes with a
/// zero statistic.
pub fn chi_square_gof(counts: &[u64], probs: &[f64], alpha: f64) -> Result<GofOutcome> {
    if counts.len() != probs.len() || counts.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} counts against {} probabilities",
            counts.len(),
            probs.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("significance must lie in (0,1), got {alpha}")));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("no samples".into()));
    }
    if probs.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
        return Err(Error::InvalidInput("cell probabilities must lie in (0, 1]".into()));
    }
    let df = counts.len() - 1;
    if df == 0 {
        return Ok(GofOutcome { statistic: 0.0, threshold: 0.0, df, passed: true });
    }
    let statistic = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let expected = total as f64 * p;
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let threshold = chi_square_quantile(df, alpha)?;
    Ok(GofOutcome { statistic, threshold, df, passed: statistic <= threshold })
}

/// Upper quantile of the chi-square distribution: the `x` with
/// `P(X > x) = alpha`. The library's generic quantile search stops at about
/// six digits, so its output is polished with Newton steps on the survival
/// function, which is accurately scaled near small `alpha`.
pub fn chi_square_quantile(df: usize, alpha: f64) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidInput("chi-square needs at least one degree of freedom".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("significance must lie in (0,1), got {alpha}")));
    }
    let dist = ChiSquared::new(df as f64)
        .map_err(|e| Error::InvalidInput(format!("chi-square with {df} dof: {e}")))?;
    let mut x = dist.inverse_cdf(1.0 - alpha).max(f64::MIN_POSITIVE);
    for _ in 0..50 {
        let density = dist.pdf(x);
        if density <= 0.0 {
            break;
        }
        let step = (dist.sf(x) - alpha) / density;
        x += step;
        if step.abs() <= 1e-13 * x.abs() {
            break;
        }
    }
    Ok(x)
}

fn gaussian_vec(rng: &mut RngState, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    rng.fill_standard_normal(&mut v);
    v
}

fn log_uniform(rng: &mut RngState, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(rng.next_uniform())
}

fn pick(rng: &mut RngState, lo: usize, hi: usize) -> usize {
    lo + (rng.next_uniform() * (hi - lo + 1) as f64) as usize % (hi - lo + 1)
}

fn random_feasible(rng: &mut RngState, n_blocks: usize, block_dim: usize) -> FeasiblePoint {
    let v = gaussian_vec(rng, n_blocks * block_dim);
    project_to_s(n_blocks, block_dim, &v).expect("gaussian draws are finite")
}

fn random_quadratic(rng: &mut RngState, n_blocks: usize, block_dim: usize) -> QuadraticSpec {
    let curvature = (0..n_blocks).map(|_| log_uniform(rng, 0.2, 5.0)).collect();
    let linear = gaussian_vec(rng, n_blocks * block_dim);
    QuadraticSpec { n_blocks, block_dim, curvature, linear }
}

fn random_softplus(rng: &mut RngState, n_blocks: usize, block_dim: usize) -> SoftplusSpec {
    let mut direction = gaussian_vec(rng, n_blocks * block_dim);
    for b in direction.chunks_mut(block_dim) {
        if b.iter().all(|v| *v == 0.0) {
            b[0] = 1.0;
        }
    }
    SoftplusSpec { n_blocks, block_dim, direction }
}

fn check_projection(rng: &mut RngState) -> std::result::Result<(), String> {
    for rep in 0..200 {
        let n_blocks = pick(rng, 2, 8);
        let block_dim = pick(rng, 1, 4);
        let v = gaussian_vec(rng, n_blocks * block_dim);
        let p = project_to_s(n_blocks, block_dim, &v)
            .map_err(|e| format!("rep {rep}: projection failed: {e}"))?;
        if !p.is_feasible() {
            return Err(format!("rep {rep}: projected point infeasible"));
        }
        let again = project_to_s(n_blocks, block_dim, p.as_slice()).unwrap();
        let scale = p.max_block_inf().max(1.0);
        for (a, b) in again.as_slice().iter().zip(p.as_slice()) {
            if (a - b).abs() > 1e-12 * scale {
                return Err(format!("rep {rep}: projection is not idempotent ({a} vs {b})"));
            }
        }

        // identical integer blocks sit in S-perp and must map exactly to zero
        let c = pick(rng, 1, 100) as f64;
        let constant = vec![c; n_blocks * block_dim];
        let z = project_to_s(n_blocks, block_dim, &constant).unwrap();
        if z.as_slice().iter().any(|v| *v != 0.0) {
            return Err(format!("rep {rep}: constant blocks did not project to zero"));
        }
    }
    Ok(())
}

fn random_family_specs(rng: &mut RngState) -> Vec<(ProblemSpec, f64)> {
    let mut out = Vec::new();
    for _ in 0..3 {
        let n_blocks = pick(rng, 2, 5);
        let block_dim = pick(rng, 1, 3);
        let multiplier = if rng.next_uniform() < 0.5 { 1.0 } else { 1.0 + rng.next_uniform() };
        out.push((
            ProblemSpec::Quadratic(random_quadratic(rng, n_blocks, block_dim)),
            multiplier,
        ));
        out.push((
            ProblemSpec::PseudoHuber(PseudoHuberSpec {
                n_blocks,
                block_dim,
                weight: (0..n_blocks).map(|_| log_uniform(rng, 0.5, 2.0)).collect(),
            }),
            multiplier,
        ));
        out.push((ProblemSpec::Softplus(random_softplus(rng, n_blocks, block_dim)), multiplier));
    }
    out
}

fn check_family_oracles(rng: &mut RngState) -> std::result::Result<(), String> {
    for (spec, multiplier) in random_family_specs(rng) {
        let p = spec
            .to_problem(multiplier)
            .map_err(|e| format!("{} construction: {e}", spec.kind_name()))?;
        checks::smoothness(&p, rng, 100)
            .map_err(|m| format!("{} smoothness: {m}", spec.kind_name()))?;
        checks::convexity(&p, rng, 100)
            .map_err(|m| format!("{} convexity: {m}", spec.kind_name()))?;
        checks::gradient_consistency(&p, rng, 50)
            .map_err(|m| format!("{} gradients: {m}", spec.kind_name()))?;
        checks::strong_convexity(&p, rng, 50)
            .map_err(|m| format!("{} strong convexity: {m}", spec.kind_name()))?;
    }
    Ok(())
}

fn check_quadratic_analytics(rng: &mut RngState) -> std::result::Result<(), String> {
    for rep in 0..100 {
        let n_blocks = pick(rng, 2, 8);
        let block_dim = pick(rng, 1, 4);
        let spec = random_quadratic(rng, n_blocks, block_dim);
        let multiplier = if rep % 2 == 0 { 1.0 } else { 1.0 + rng.next_uniform() };
        let p = ProblemSpec::Quadratic(spec.clone())
            .to_problem(multiplier)
            .map_err(|e| format!("rep {rep}: {e}"))?;

        let (x_star, f_star, _) = kkt_solve_quadratic(&spec).map_err(|e| format!("rep {rep}: {e}"))?;
        if !x_star.is_feasible() {
            return Err(format!("rep {rep}: optimizer infeasible"));
        }
        let residual = p.grad_residual(&x_star);
        if residual > 1e-10 {
            return Err(format!("rep {rep}: gradient residual {residual:.3e} at the optimum"));
        }

        let x0 = random_feasible(rng, n_blocks, block_dim);
        let (gap0, half_dist) = initial_gap_check(&p, &x0, &x_star, f_star)
            .map_err(|e| format!("rep {rep}: {e}"))?;
        if gap0 > half_dist + 1e-10 {
            return Err(format!(
                "rep {rep}: initial gap {gap0:.6e} exceeds half squared distance {half_dist:.6e}"
            ));
        }

        let mu = mu_f_quadratic(&spec, p.lipschitz()).map_err(|e| format!("rep {rep}: {e}"))?;
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(format!("rep {rep}: modulus {mu} outside (0, 1]"));
        }

        let tilde = weighted_dist_sq(&x0, &x_star, p.lipschitz()).unwrap();
        let level = level_radius_sq_quadratic(&spec, p.lipschitz(), &x0)
            .map_err(|e| format!("rep {rep}: {e}"))?;
        if level < tilde - 1e-9 * tilde.max(1.0) {
            return Err(format!(
                "rep {rep}: level-set radius bound {level:.6e} below distance {tilde:.6e}"
            ));
        }
    }
    Ok(())
}

fn check_basis_roundtrip(rng: &mut RngState) -> std::result::Result<(), String> {
    for n_blocks in 2..=6 {
        for block_dim in 1..=4 {
            let basis = BasisSet::new(n_blocks, block_dim).map_err(|e| e.to_string())?;
            for (idx, v) in basis.vectors().iter().enumerate() {
                for m in 0..block_dim {
                    let sum: f64 = (0..n_blocks).map(|i| v[i * block_dim + m]).sum();
                    if sum != 0.0 {
                        return Err(format!(
                            "basis vector {idx} of ({n_blocks},{block_dim}) leaves the subspace"
                        ));
                    }
                }
            }
            for rep in 0..50 {
                let x = random_feasible(rng, n_blocks, block_dim);
                let coeffs = basis.decompose(x.as_slice()).map_err(|e| e.to_string())?;
                let back = basis.reconstruct(&coeffs).map_err(|e| e.to_string())?;
                let err = x
                    .as_slice()
                    .iter()
                    .zip(&back)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if err > 1e-12 {
                    return Err(format!(
                        "({n_blocks},{block_dim}) rep {rep}: roundtrip error {err:.3e}"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn check_pair_operator(rng: &mut RngState) -> std::result::Result<(), String> {
    for rep in 0..1000 {
        let n_blocks = pick(rng, 2, 12);
        let block_dim = pick(rng, 1, 5);
        let lipschitz: Vec<f64> =
            (0..n_blocks).map(|_| log_uniform(rng, 1e-3, 1e3)).collect();
        let x = random_feasible(rng, n_blocks, block_dim);
        let norm = x.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
        let dev = pair_operator_deviation(&lipschitz, &x).map_err(|e| format!("rep {rep}: {e}"))?;
        if dev > 1e-10 * norm.max(1.0) {
            return Err(format!(
                "rep {rep}: operator deviates by {dev:.3e} on N={n_blocks}, n={block_dim}"
            ));
        }
    }
    Ok(())
}

fn check_descent(rng: &mut RngState) -> std::result::Result<(), String> {
    for (spec, multiplier) in random_family_specs(rng) {
        let p = spec.to_problem(multiplier).map_err(|e| e.to_string())?;
        let n_blocks = p.n_blocks();
        let tight_quadratic = multiplier == 1.0 && spec.kind_name() == "quadratic";
        for rep in 0..40 {
            let x = random_feasible(rng, n_blocks, p.block_dim());
            let i = pick(rng, 0, n_blocks - 2);
            let j = pick(rng, i + 1, n_blocks - 1);
            let (actual, model) =
                descent_check(&p, &x, i, j).map_err(|e| format!("rep {rep}: {e}"))?;
            let f = p.value(&x);
            if actual < model - 1e-9 * (1.0 + f.abs()) {
                return Err(format!(
                    "{} rep {rep}: decrease {actual:.6e} under the model {model:.6e}",
                    spec.kind_name()
                ));
            }
            if tight_quadratic && (actual - model).abs() > 1e-9 {
                return Err(format!(
                    "quadratic rep {rep}: decrease {actual:.6e} not tight against {model:.6e}"
                ));
            }
        }
    }
    Ok(())
}

fn check_sampling(rng: &mut RngState) -> std::result::Result<(), String> {
    for &n_blocks in &[2usize, 3, 10] {
        for geometric in [false, true] {
            let lipschitz: Vec<f64> = (0..n_blocks)
                .map(|i| if geometric { 2f64.powi(i as i32) } else { 1.0 })
                .collect();
            let dist = build_distribution(&lipschitz).map_err(|e| e.to_string())?;

            let draws = 100_000usize;
            let mut counts = vec![0u64; dist.pairs().len()];
            let mut stream = RngState::new(rng.next_u64());
            for _ in 0..draws {
                let pair = dist.sample(&mut stream);
                let idx = dist.pairs().iter().position(|p| *p == pair).unwrap();
                counts[idx] += 1;
            }
            let outcome = chi_square_gof(&counts, dist.probs(), 1e-6).map_err(|e| e.to_string())?;
            if !outcome.passed {
                return Err(format!(
                    "N={n_blocks} geometric={geometric}: chi-square {:.3} over threshold {:.3}",
                    outcome.statistic, outcome.threshold
                ));
            }
            if n_blocks == 2 && counts[0] as usize != draws {
                return Err("two blocks must always draw the only pair".into());
            }

            // inverse-CDF lookup agrees with a linear scan of the table
            for _ in 0..2000 {
                let u = rng.next_uniform();
                let fast = dist.index_for(u);
                let slow = dist
                    .cumulative()
                    .iter()
                    .position(|c| u < *c)
                    .unwrap_or(dist.pairs().len() - 1);
                if fast != slow {
                    return Err(format!(
                        "N={n_blocks} geometric={geometric}: index_for({u}) = {fast}, scan = {slow}"
                    ));
                }
            }

            // identical seeds give identical streams
            let seed = rng.next_u64();
            let mut a = RngState::new(seed);
            let mut b = RngState::new(seed);
            for t in 0..1000 {
                if dist.sample(&mut a) != dist.sample(&mut b) {
                    return Err(format!("seed {seed}: streams diverge at draw {t}"));
                }
            }
        }
    }
    Ok(())
}

fn check_solver_contracts(rng: &mut RngState) -> std::result::Result<(), String> {
    let spec = random_quadratic(rng, 10, 2);
    let p = ProblemSpec::Quadratic(spec.clone()).to_problem(1.0).map_err(|e| e.to_string())?;
    let dist = build_distribution(p.lipschitz()).map_err(|e| e.to_string())?;
    let (x_star, f_star, _) = kkt_solve_quadratic(&spec).map_err(|e| e.to_string())?;
    let x0 = random_feasible(rng, 10, 2);

    let opts = RunOptions {
        stop: StoppingRule { max_iters: 100_000, gap_tol: None, residual_tol: None },
        record: RecordPlan::Stride(1),
        f_star: Some(f_star),
        x_star: None,
    };
    let seed = rng.next_u64();
    let mut stream = RngState::new(seed);
    let traj = run(&p, &dist, &x0, &mut stream, &opts).map_err(|e| e.to_string())?;

    let drift = traj.final_point.block_sum_inf();
    if drift > 1e-9 {
        return Err(format!("feasibility drift {drift:.3e} after {} steps", traj.steps));
    }
    for pair in traj.records.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        if next.f_value > prev.f_value + 1e-12 * (1.0 + prev.f_value.abs()) {
            return Err(format!(
                "objective rose from {:.12e} to {:.12e} at step {}",
                prev.f_value, next.f_value, next.k
            ));
        }
    }

    // the optimum is a fixed point of every pairwise step
    let scale = x_star.max_block_inf().max(1.0);
    for i in 0..10 {
        for j in (i + 1)..10 {
            let moved = step(&p, &x_star, i, j).map_err(|e| e.to_string())?;
            let shift = moved
                .as_slice()
                .iter()
                .zip(x_star.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if shift > 1e-12 * scale {
                return Err(format!("pair ({i},{j}) moved the optimum by {shift:.3e}"));
            }
        }
    }

    // bit-identical rerun under the same seed
    let mut stream = RngState::new(seed);
    let again = run(&p, &dist, &x0, &mut stream, &opts).map_err(|e| e.to_string())?;
    if again.final_point.as_slice() != traj.final_point.as_slice() {
        return Err("rerun with the same seed changed the final point".into());
    }
    let pairs_match = again
        .records
        .iter()
        .zip(&traj.records)
        .all(|(a, b)| a.pair == b.pair && a.f_value == b.f_value);
    if !(pairs_match && again.records.len() == traj.records.len()) {
        return Err("rerun with the same seed changed the trajectory".into());
    }
    Ok(())
}

fn check_bound_dominance(rng: &mut RngState) -> std::result::Result<(), String> {
    for rep in 0..10_000 {
        let n_blocks = pick(rng, 2, 50);
        let mu = (rng.next_uniform() + f64::MIN_POSITIVE).min(1.0);
        let ours = linear_factor(n_blocks, mu).map_err(|e| format!("rep {rep}: {e}"))?;
        let nng = nng_linear_factor(n_blocks, mu).map_err(|e| format!("rep {rep}: {e}"))?;
        if ours > nng + 1e-15 {
            return Err(format!(
                "rep {rep}: linear factor {ours:.17} over classical {nng:.17} at N={n_blocks}, mu={mu}"
            ));
        }
        if mu <= 1.0 - 1e-12 && ours >= nng {
            return Err(format!(
                "rep {rep}: dominance not strict at N={n_blocks}, mu={mu}"
            ));
        }
    }

    for rep in 0..2000 {
        let n_blocks = pick(rng, 2, 30);
        let tilde = log_uniform(rng, 1e-2, 1e2);
        let r_sq = tilde * (1.0 + rng.next_uniform() * 3.0);
        let k = pick(rng, 1, 400);
        let ours = bound_sublinear(k, n_blocks, tilde).map_err(|e| format!("rep {rep}: {e}"))?;
        let nng = bound_nng_sublinear(k, n_blocks, r_sq).map_err(|e| format!("rep {rep}: {e}"))?;
        if ours > nng {
            return Err(format!(
                "rep {rep}: sublinear value {ours:.6e} over classical {nng:.6e} at k={k}"
            ));
        }
    }

    for rep in 0..100 {
        let n_blocks = pick(rng, 2, 20);
        let tilde = log_uniform(rng, 1e-1, 1e1);
        let r_sq = tilde * (1.0 + rng.next_uniform());
        let gap0 = 0.5 * tilde;
        let eps = gap0 * (0.05 + 0.5 * rng.next_uniform());
        let rho = 0.05 + 0.9 * rng.next_uniform();
        let report = complexity_report(&ComplexityInputs {
            n_blocks,
            tilde_r_sq: tilde,
            r_sq: Some(r_sq),
            mu_f: None,
            gap0,
            eps,
            rho,
        })
        .map_err(|e| format!("rep {rep}: {e}"))?;
        let diff = report.nng_minus_ours_sublinear.ok_or("missing complexity difference")?;
        let floor = (n_blocks - 1) as f64 * r_sq * 4f64.ln() / eps + n_blocks as f64 - 1.0;
        if diff < floor - 1e-9 * floor.abs().max(1.0) {
            return Err(format!(
                "rep {rep}: complexity difference {diff:.6e} under its floor {floor:.6e}"
            ));
        }
    }
    Ok(())
}

fn check_complexity_constants(_rng: &mut RngState) -> std::result::Result<(), String> {
    let report = complexity_report(&ComplexityInputs {
        n_blocks: 3,
        tilde_r_sq: 1.0,
        r_sq: Some(1.0),
        mu_f: Some(1.0),
        gap0: 0.5,
        eps: 0.1,
        rho: 0.1,
    })
    .map_err(|e| e.to_string())?;
    let pins = [
        ("ours_sublinear", report.ours_sublinear, 104.37751649736401),
        ("ours_linear", report.ours_linear, 9.210340371976184),
        ("nng_sublinear", report.nng_sublinear, 134.10340371976184),
    ];
    for (name, got, want) in pins {
        let got = got.ok_or_else(|| format!("{name} missing"))?;
        if ((got - want) / want).abs() > 1e-12 {
            return Err(format!("{name} = {got:.17}, expected {want:.17}"));
        }
    }
    if report.ours_sublinear_iters != Some(105) || report.ours_linear_iters != Some(10) {
        return Err(format!(
            "iteration counts {:?}/{:?}, expected 105/10",
            report.ours_sublinear_iters, report.ours_linear_iters
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_a_fixed_seed() {
        let mut seen = Vec::new();
        let ran = run_suite(0xC0FFEE, &mut |name| seen.push(name.to_string())).unwrap();
        assert_eq!(ran, CHECKS.len());
        assert_eq!(seen.len(), ran);
        assert_eq!(seen.first().map(String::as_str), Some("projection_properties"));
    }

    #[test]
    fn chi_square_matches_frozen_threshold() {
        // df = 2 at significance 1e-6
        let outcome = chi_square_gof(&[30, 30, 40], &[0.3, 0.3, 0.4], 1e-6).unwrap();
        assert_eq!(outcome.df, 2);
        let want = 27.631021115871036;
        assert!(
            ((outcome.threshold - want) / want).abs() < 1e-9,
            "threshold {}",
            outcome.threshold
        );
    }

    #[test]
    fn chi_square_accepts_exact_and_rejects_lopsided_counts() {
        let exact = chi_square_gof(&[500, 500], &[0.5, 0.5], 1e-6).unwrap();
        assert_eq!(exact.statistic, 0.0);
        assert!(exact.passed);

        let lopsided = chi_square_gof(&[1000, 0], &[0.5, 0.5], 1e-6).unwrap();
        assert!(!lopsided.passed, "statistic {}", lopsided.statistic);

        let single = chi_square_gof(&[777], &[1.0], 1e-6).unwrap();
        assert!(single.passed);
        assert_eq!(single.df, 0);
    }

    #[test]
    fn chi_square_validates_inputs() {
        assert!(chi_square_gof(&[1, 2], &[0.5], 1e-6).is_err());
        assert!(chi_square_gof(&[], &[], 1e-6).is_err());
        assert!(chi_square_gof(&[0, 0], &[0.5, 0.5], 1e-6).is_err());
        assert!(chi_square_gof(&[1, 1], &[0.5, 0.5], 2.0).is_err());
    }

    #[test]
    fn violations_describe_the_seed() {
        let v = Violation { check: "example", seed: 42, message: "details".into() };
        let text = v.to_string();
        assert!(text.contains("example") && text.contains("42"), "{text}");
    }
}
