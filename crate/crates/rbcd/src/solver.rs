//! The randomized pairwise descent iteration.
//!
//! Given the current iterate and a sampled pair `(i, j)`, the update moves
//! the two blocks in opposite directions along
//!
//! ```text
//! d = −(∇fᵢ(xᵢ) − ∇fⱼ(xⱼ)) / (Lᵢ + Lⱼ),    xᵢ ← xᵢ + d,   xⱼ ← xⱼ − d
//! ```
//!
//! which minimizes the separable quadratic model of `f` over the pair while
//! preserving the block sum exactly (the same array is added and
//! subtracted). Each step decreases the objective by at least
//! `‖∇fᵢ − ∇fⱼ‖² / (2(Lᵢ + Lⱼ))`, with equality for quadratics with tight
//! Lipschitz declarations.

use crate::error::{Error, Result};
use crate::problem::{weighted_dist_sq, BlockProblem, FeasiblePoint};
use crate::sampler::{PairDistribution, RngState};

/// Termination conditions for [`run`]. `max_iters` is always enforced; the
/// optional tolerances stop early when the optimality gap or the gradient
/// residual falls to the threshold.
#[derive(Debug, Clone)]
pub struct StoppingRule {
    pub max_iters: usize,
    /// Stop when `f(x) − f* ≤ gap_tol`; requires a known `f*`.
    pub gap_tol: Option<f64>,
    /// Stop when `max_{i<j} ‖∇fᵢ − ∇fⱼ‖ ≤ residual_tol`.
    pub residual_tol: Option<f64>,
}

/// Which iterates get a [`StepRecord`]. The final iterate is always recorded.
#[derive(Debug, Clone)]
pub enum RecordPlan {
    /// Record every `stride` iterations, including the initial point.
    Stride(usize),
    /// Record exactly the listed iteration indices (sorted internally).
    Checkpoints(Vec<usize>),
}

impl RecordPlan {
    /// Default stride for a run of the given length.
    pub fn default_stride(max_iters: usize) -> RecordPlan {
        RecordPlan::Stride((max_iters / 1000).max(1))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stop: StoppingRule,
    pub record: RecordPlan,
    /// Optimal value, when known; enables `gap` in records and `gap_tol`.
    pub f_star: Option<f64>,
    /// Optimum, when known; enables `r_sq` in records.
    pub x_star: Option<FeasiblePoint>,
}

/// State snapshot at iterate `k`.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub k: usize,
    /// Pair applied by the step that produced this iterate; `None` at `k = 0`.
    pub pair: Option<(usize, usize)>,
    pub f_value: f64,
    /// `f(x) − f*`, when the optimal value is known.
    pub gap: Option<f64>,
    /// `‖x − x*‖_L²`, when the optimum is known.
    pub r_sq: Option<f64>,
    /// `max_{i<j} ‖∇fᵢ − ∇fⱼ‖` at this iterate.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub final_point: FeasiblePoint,
    /// Number of steps actually taken.
    pub steps: usize,
}

impl Trajectory {
    /// Record at iteration `k`, if one was kept.
    pub fn record_at(&self, k: usize) -> Option<&StepRecord> {
        self.records.iter().find(|r| r.k == k)
    }
}

fn check_pair(n_blocks: usize, i: usize, j: usize) -> Result<()> {
    if i >= j || j >= n_blocks {
        return Err(Error::InvalidInput(format!(
            "pair ({i}, {j}) is not an ordered pair of distinct block indices below {n_blocks}"
        )));
    }
    Ok(())
}

/// The paired descent direction `d` for blocks `(i, j)` at `x`.
///
/// Block `i` moves by `+d` and block `j` by `−d`.
pub fn direction(p: &BlockProblem, x: &FeasiblePoint, i: usize, j: usize) -> Result<Vec<f64>> {
    p.check_point(x)?;
    check_pair(p.n_blocks(), i, j)?;
    let n = p.block_dim();
    let mut gi = vec![0.0; n];
    let mut gj = vec![0.0; n];
    p.block_gradient(i, x.block(i), &mut gi);
    p.block_gradient(j, x.block(j), &mut gj);
    let denom = p.lipschitz()[i] + p.lipschitz()[j];
    Ok(gi.iter().zip(&gj).map(|(a, b)| -(a - b) / denom).collect())
}

/// One descent step on the pair `(i, j)`. The returned point has the same
/// block sum as `x`.
pub fn step(p: &BlockProblem, x: &FeasiblePoint, i: usize, j: usize) -> Result<FeasiblePoint> {
    let d = direction(p, x, i, j)?;
    let mut out = x.clone();
    for (v, dv) in out.block_mut(i).iter_mut().zip(&d) {
        *v += dv;
    }
    for (v, dv) in out.block_mut(j).iter_mut().zip(&d) {
        *v -= dv;
    }
    Ok(out)
}

/// Runs the randomized method from `x0`, drawing pairs from `dist` with the
/// caller's stream, until a stopping condition fires.
pub fn run(
    p: &BlockProblem,
    dist: &PairDistribution,
    x0: &FeasiblePoint,
    rng: &mut RngState,
    opts: &RunOptions,
) -> Result<Trajectory> {
    p.check_point(x0)?;
    if dist.n_blocks() != p.n_blocks() {
        return Err(Error::InvalidInput(format!(
            "distribution over {} blocks used with a {}-block problem",
            dist.n_blocks(),
            p.n_blocks()
        )));
    }
    if opts.stop.max_iters == 0 {
        return Err(Error::InvalidInput("max_iters must be at least 1".into()));
    }
    if opts.stop.gap_tol.is_some() && opts.f_star.is_none() {
        return Err(Error::InvalidInput("gap_tol requires a known optimal value".into()));
    }
    if let Some(xs) = &opts.x_star {
        p.check_point(xs)?;
    }
    let schedule = Schedule::new(&opts.record, opts.stop.max_iters)?;

    let n = p.block_dim();
    let mut x = x0.clone();
    let mut block_vals = p.block_values(&x);
    let mut gi = vec![0.0; n];
    let mut gj = vec![0.0; n];
    let mut records = Vec::new();
    let mut last_pair: Option<(usize, usize)> = None;
    let mut k = 0usize;

    let make_record = |k: usize,
                       pair: Option<(usize, usize)>,
                       x: &FeasiblePoint,
                       block_vals: &[f64]|
     -> StepRecord {
        let f_value: f64 = block_vals.iter().sum();
        StepRecord {
            k,
            pair,
            f_value,
            gap: opts.f_star.map(|fs| f_value - fs),
            r_sq: opts
                .x_star
                .as_ref()
                .map(|xs| weighted_dist_sq(x, xs, p.lipschitz()).expect("shapes checked")),
            residual: p.grad_residual(x),
        }
    };

    if schedule.wants(0) {
        records.push(make_record(0, None, &x, &block_vals));
    }

    loop {
        if k >= opts.stop.max_iters {
            break;
        }
        if let Some(tol) = opts.stop.gap_tol {
            let f: f64 = block_vals.iter().sum();
            if f - opts.f_star.expect("validated above") <= tol {
                break;
            }
        }
        if let Some(tol) = opts.stop.residual_tol {
            if p.grad_residual(&x) <= tol {
                break;
            }
        }

        let (i, j) = dist.sample(rng);
        p.block_gradient(i, x.block(i), &mut gi);
        p.block_gradient(j, x.block(j), &mut gj);
        let denom = p.lipschitz()[i] + p.lipschitz()[j];
        for m in 0..n {
            let d = -(gi[m] - gj[m]) / denom;
            x.block_mut(i)[m] += d;
            x.block_mut(j)[m] -= d;
        }
        block_vals[i] = p.block_value(i, x.block(i));
        block_vals[j] = p.block_value(j, x.block(j));
        if !block_vals[i].is_finite() || !block_vals[j].is_finite() {
            return Err(Error::NonFinite { what: "block value", iteration: k });
        }
        last_pair = Some((i, j));
        k += 1;

        if schedule.wants(k) {
            records.push(make_record(k, Some((i, j)), &x, &block_vals));
        }
    }

    if records.last().map(|r| r.k) != Some(k) {
        records.push(make_record(k, last_pair, &x, &block_vals));
    }
    Ok(Trajectory { records, final_point: x, steps: k })
}

enum Schedule {
    Stride(usize),
    Sorted(Vec<usize>),
}

impl Schedule {
    fn new(plan: &RecordPlan, max_iters: usize) -> Result<Schedule> {
        match plan {
            RecordPlan::Stride(s) => {
                if *s == 0 {
                    return Err(Error::InvalidInput("record stride must be at least 1".into()));
                }
                Ok(Schedule::Stride(*s))
            }
            RecordPlan::Checkpoints(ks) => {
                let mut sorted = ks.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if let Some(&last) = sorted.last() {
                    if last > max_iters {
                        return Err(Error::InvalidInput(format!(
                            "checkpoint {last} exceeds max_iters {max_iters}"
                        )));
                    }
                }
                Ok(Schedule::Sorted(sorted))
            }
        }
    }

    fn wants(&self, k: usize) -> bool {
        match self {
            Schedule::Stride(s) => k.is_multiple_of(*s),
            Schedule::Sorted(ks) => ks.binary_search(&k).is_ok(),
        }
    }
}
