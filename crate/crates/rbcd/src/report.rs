//! CSV renderers for solver and experiment output.
//!
//! Every float is printed with 17 significant digits so a round-trip through
//! text reproduces the exact binary value. Block indices are printed 1-based
//! in all tables; missing values become empty cells.

use crate::bounds::BoundRow;
use crate::experiment::ExperimentSummary;
use crate::sampler::PairDistribution;
use crate::solver::Trajectory;

/// Shortest-exact-style float formatting: 17 significant digits, scientific.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_g17).unwrap_or_default()
}

/// Columns: `k,i,j,f,gap,r_sq,residual`. The pair columns hold the blocks
/// updated by the step that produced row `k` (empty at `k = 0`).
pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::from("k,i,j,f,gap,r_sq,residual\n");
    for rec in &t.records {
        let (i, j) = match rec.pair {
            Some((i, j)) => ((i + 1).to_string(), (j + 1).to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.k,
            i,
            j,
            fmt_g17(rec.f_value),
            fmt_opt(rec.gap),
            fmt_opt(rec.r_sq),
            fmt_g17(rec.residual),
        ));
    }
    out
}

/// Columns: `i,j,p_ij` over all block pairs with `i < j`, 1-based.
pub fn dist_csv(dist: &PairDistribution) -> String {
    let mut out = String::from("i,j,p_ij\n");
    for (idx, &(i, j)) in dist.pairs().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, j + 1, fmt_g17(dist.probs()[idx])));
    }
    out
}

/// Columns: `k,ours_sublinear,ours_linear,nng_sublinear,nng_linear`.
pub fn bounds_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("k,ours_sublinear,ours_linear,nng_sublinear,nng_linear\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.k,
            fmt_g17(row.ours_sublinear),
            fmt_opt(row.ours_linear),
            fmt_opt(row.nng_sublinear),
            fmt_opt(row.nng_linear),
        ));
    }
    out
}

/// Columns: `k,mean_gap,stderr_gap,mean_lyapunov,bound_ours_sublinear,
/// bound_ours_linear,bound_nng_sublinear,bound_nng_linear`, one row per
/// checkpoint.
pub fn summary_csv(summary: &ExperimentSummary) -> String {
    let mut out = String::from(
        "k,mean_gap,stderr_gap,mean_lyapunov,bound_ours_sublinear,bound_ours_linear,bound_nng_sublinear,bound_nng_linear\n",
    );
    for stat in &summary.checkpoint_stats {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            stat.k,
            fmt_g17(stat.mean_gap),
            fmt_g17(stat.stderr_gap),
            fmt_opt(stat.mean_lyapunov),
            fmt_g17(stat.bounds.ours_sublinear),
            fmt_opt(stat.bounds.ours_linear),
            fmt_opt(stat.bounds.nng_sublinear),
            fmt_opt(stat.bounds.nng_linear),
        ));
    }
    out
}
