//! Convergence rate envelopes and iteration complexity calculators.
//!
//! Two families of expected-gap bounds are computed side by side. The
//! sharper pair, derived from the pairwise sampling analysis:
//!
//! ```text
//! E[f(x^k)] − f* ≤ (N−1)/(N+k−1) · R̃²           (convex)
//! E[f(x^k)] − f* ≤ (1 − 2μ/((N−1)(1+μ)))^k · R̃² (strongly convex, μ ∈ (0,1])
//! ```
//!
//! and the classical pair they refine (the `nng` columns in the output,
//! after Necoara, Nesterov, and Glineur's analysis of random pairwise
//! coordinate descent):
//!
//! ```text
//! E[f(x^k)] − f* ≤ 2(N−1)R²/k                    (convex, k ≥ 1)
//! E[f(x^k)] − f* ≤ (1 − μ/(N−1))^k · (f(x⁰) − f*) (strongly convex)
//! ```
//!
//! Here `R̃² = ‖x⁰ − x*‖_L²` is the initial squared weighted distance and
//! `R²` bounds the squared weighted radius of the initial level set, so
//! `R̃ ≤ R` always. The corresponding iteration counts for reaching an
//! `ε`-gap with probability `1 − ρ` are exposed by [`complexity_report`].

use crate::error::{Error, Result};

fn check_blocks(n_blocks: usize) -> Result<()> {
    if n_blocks < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 blocks, got {n_blocks}")));
    }
    Ok(())
}

fn check_radius(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::InvalidInput(format!("{name} must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "strong convexity modulus must lie in (0, 1], got {mu}"
        )));
    }
    Ok(())
}

/// Sharper convex envelope `(N−1)/(N+k−1) · tilde_r_sq`.
pub fn bound_sublinear(k: usize, n_blocks: usize, tilde_r_sq: f64) -> Result<f64> {
    check_blocks(n_blocks)?;
    check_radius("tilde_r_sq", tilde_r_sq)?;
    Ok((n_blocks - 1) as f64 / (n_blocks + k - 1) as f64 * tilde_r_sq)
}

/// Per-iteration contraction factor `1 − 2μ/((N−1)(1+μ))` of the sharper
/// strongly convex envelope. Lies in `[0, 1)`; zero only for `N = 2, μ = 1`.
pub fn linear_factor(n_blocks: usize, mu: f64) -> Result<f64> {
    check_blocks(n_blocks)?;
    check_mu(mu)?;
    Ok(1.0 - 2.0 * mu / ((n_blocks - 1) as f64 * (1.0 + mu)))
}

/// Sharper strongly convex envelope `factor^k · tilde_r_sq`.
pub fn bound_linear(k: usize, n_blocks: usize, mu: f64, tilde_r_sq: f64) -> Result<f64> {
    check_radius("tilde_r_sq", tilde_r_sq)?;
    Ok(linear_factor(n_blocks, mu)?.powi(k as i32) * tilde_r_sq)
}

/// Classical convex envelope `2(N−1)R²/k`, defined for `k ≥ 1`.
pub fn bound_nng_sublinear(k: usize, n_blocks: usize, r_sq: f64) -> Result<f64> {
    check_blocks(n_blocks)?;
    check_radius("r_sq", r_sq)?;
    if k == 0 {
        return Err(Error::InvalidInput("the classical convex bound is undefined at k = 0".into()));
    }
    Ok(2.0 * (n_blocks - 1) as f64 * r_sq / k as f64)
}

/// Per-iteration contraction factor `1 − μ/(N−1)` of the classical strongly
/// convex envelope. Never smaller than [`linear_factor`] for the same inputs.
pub fn nng_linear_factor(n_blocks: usize, mu: f64) -> Result<f64> {
    check_blocks(n_blocks)?;
    check_mu(mu)?;
    Ok(1.0 - mu / (n_blocks - 1) as f64)
}

/// Classical strongly convex envelope `factor^k · (f(x⁰) − f*)`.
pub fn bound_nng_linear(k: usize, n_blocks: usize, mu: f64, gap0: f64) -> Result<f64> {
    check_radius("gap0", gap0)?;
    Ok(nng_linear_factor(n_blocks, mu)?.powi(k as i32) * gap0)
}

/// Ratio of the classical to the sharper convex envelope at iteration `k`:
/// `2((N−1)/k + 1) · R²/R̃²`. At least `2((N−1)/k + 1)` whenever `R ≥ R̃`,
/// approaching `2R²/R̃²` as `k → ∞`.
pub fn bound_ratio_sublinear(
    n_blocks: usize,
    k: usize,
    r_sq: f64,
    tilde_r_sq: f64,
) -> Result<f64> {
    check_blocks(n_blocks)?;
    if k == 0 {
        return Err(Error::InvalidInput("the envelope ratio is undefined at k = 0".into()));
    }
    if !(tilde_r_sq > 0.0 && tilde_r_sq.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tilde_r_sq must be positive and finite, got {tilde_r_sq}"
        )));
    }
    if !(r_sq.is_finite() && r_sq >= tilde_r_sq) {
        return Err(Error::InvalidInput(format!(
            "level radius r_sq = {r_sq} cannot be below the initial distance tilde_r_sq = {tilde_r_sq}"
        )));
    }
    let ratio = 2.0 * ((n_blocks - 1) as f64 / k as f64 + 1.0) * r_sq / tilde_r_sq;
    debug_assert!(ratio >= 2.0 * ((n_blocks - 1) as f64 / k as f64 + 1.0) * (1.0 - 1e-12));
    Ok(ratio)
}

/// Scalar inputs the envelopes are evaluated from. `r_sq`, `mu_f`, and
/// `gap0` are optional; envelopes needing them are omitted when absent.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub n_blocks: usize,
    /// Initial squared weighted distance to the optimum, `R̃²`.
    pub tilde_r_sq: f64,
    /// Squared weighted radius bound of the initial level set, `R²`.
    pub r_sq: Option<f64>,
    pub mu_f: Option<f64>,
    /// Initial optimality gap `f(x⁰) − f*`.
    pub gap0: Option<f64>,
}

/// All available envelopes at one iteration index.
#[derive(Debug, Clone)]
pub struct BoundRow {
    pub k: usize,
    pub ours_sublinear: f64,
    pub ours_linear: Option<f64>,
    /// Absent at `k = 0` or without `r_sq`.
    pub nng_sublinear: Option<f64>,
    pub nng_linear: Option<f64>,
}

/// Envelope table over a set of iteration indices.
#[derive(Debug, Clone)]
pub struct BoundSet {
    pub inputs: BoundInputs,
    pub rows: Vec<BoundRow>,
}

impl BoundSet {
    pub fn compute(inputs: BoundInputs, ks: &[usize]) -> Result<BoundSet> {
        check_blocks(inputs.n_blocks)?;
        check_radius("tilde_r_sq", inputs.tilde_r_sq)?;
        if let Some(r) = inputs.r_sq {
            check_radius("r_sq", r)?;
        }
        if let Some(mu) = inputs.mu_f {
            check_mu(mu)?;
        }
        if let Some(g) = inputs.gap0 {
            check_radius("gap0", g)?;
        }
        let rows = ks
            .iter()
            .map(|&k| {
                Ok(BoundRow {
                    k,
                    ours_sublinear: bound_sublinear(k, inputs.n_blocks, inputs.tilde_r_sq)?,
                    ours_linear: inputs
                        .mu_f
                        .map(|mu| bound_linear(k, inputs.n_blocks, mu, inputs.tilde_r_sq))
                        .transpose()?,
                    nng_sublinear: match inputs.r_sq {
                        Some(r) if k >= 1 => Some(bound_nng_sublinear(k, inputs.n_blocks, r)?),
                        _ => None,
                    },
                    nng_linear: match (inputs.mu_f, inputs.gap0) {
                        (Some(mu), Some(g)) => Some(bound_nng_linear(k, inputs.n_blocks, mu, g)?),
                        _ => None,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundSet { inputs, rows })
    }
}

/// Inputs for [`complexity_report`]: the envelope quantities plus the target
/// accuracy `eps` and failure probability `rho`.
#[derive(Debug, Clone)]
pub struct ComplexityInputs {
    pub n_blocks: usize,
    pub tilde_r_sq: f64,
    pub r_sq: Option<f64>,
    pub mu_f: Option<f64>,
    /// Initial gap `f(x⁰) − f*`; must exceed `eps`.
    pub gap0: f64,
    pub eps: f64,
    pub rho: f64,
}

/// Iteration counts sufficient for `P(f(x^k) − f* ≤ ε) ≥ 1 − ρ`, for both
/// envelope families. Raw values may be negative for easy targets; the
/// `*_iters` fields clamp to `max(0, ceil(raw))`.
#[derive(Debug, Clone)]
pub struct ComplexityReport {
    pub ours_sublinear: Option<f64>,
    pub ours_linear: Option<f64>,
    pub nng_sublinear: Option<f64>,
    pub nng_linear: Option<f64>,
    pub ours_sublinear_iters: Option<u64>,
    pub ours_linear_iters: Option<u64>,
    pub nng_sublinear_iters: Option<u64>,
    pub nng_linear_iters: Option<u64>,
    /// `nng_sublinear − ours_sublinear`; at least `(N−1)R²ln4/ε + N − 1`
    /// whenever `R ≥ R̃`.
    pub nng_minus_ours_sublinear: Option<f64>,
    /// `nng_linear / ours_linear`, about `2/(1+μ)` for demanding targets.
    pub nng_over_ours_linear: Option<f64>,
}

fn clamp_iters(raw: f64) -> u64 {
    raw.ceil().max(0.0) as u64
}

pub fn complexity_report(inputs: &ComplexityInputs) -> Result<ComplexityReport> {
    check_blocks(inputs.n_blocks)?;
    let nm1 = (inputs.n_blocks - 1) as f64;
    if !(inputs.tilde_r_sq > 0.0 && inputs.tilde_r_sq.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tilde_r_sq must be positive and finite, got {}",
            inputs.tilde_r_sq
        )));
    }
    if !(inputs.gap0 > 0.0 && inputs.gap0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "initial gap must be positive and finite, got {}",
            inputs.gap0
        )));
    }
    if !(inputs.eps > 0.0 && inputs.eps < inputs.gap0) {
        return Err(Error::InvalidInput(format!(
            "eps must lie in (0, initial gap), got eps = {} with gap0 = {}",
            inputs.eps, inputs.gap0
        )));
    }
    if !(inputs.rho > 0.0 && inputs.rho < 1.0) {
        return Err(Error::InvalidInput(format!("rho must lie in (0, 1), got {}", inputs.rho)));
    }
    if let Some(r) = inputs.r_sq {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("r_sq must be positive and finite, got {r}")));
        }
    }
    if let Some(mu) = inputs.mu_f {
        check_mu(mu)?;
    }

    let (eps, rho) = (inputs.eps, inputs.rho);
    let ours_sublinear = inputs.r_sq.map(|r_sq| {
        2.0 * nm1 * r_sq / eps * (1.0 + (inputs.tilde_r_sq / (2.0 * r_sq * rho)).ln())
            - inputs.n_blocks as f64
            + 3.0
    });
    let ours_linear = inputs
        .mu_f
        .map(|mu| nm1 * (1.0 + mu) / (2.0 * mu) * (inputs.tilde_r_sq / (rho * eps)).ln());
    let nng_sublinear =
        inputs.r_sq.map(|r_sq| 2.0 * nm1 * r_sq / eps * (1.0 + (1.0 / rho).ln()) + 2.0);
    let nng_linear = inputs.mu_f.map(|mu| nm1 / mu * (inputs.gap0 / (eps * rho)).ln());

    Ok(ComplexityReport {
        ours_sublinear,
        ours_linear,
        nng_sublinear,
        nng_linear,
        ours_sublinear_iters: ours_sublinear.map(clamp_iters),
        ours_linear_iters: ours_linear.map(clamp_iters),
        nng_sublinear_iters: nng_sublinear.map(clamp_iters),
        nng_linear_iters: nng_linear.map(clamp_iters),
        nng_minus_ours_sublinear: match (nng_sublinear, ours_sublinear) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        },
        nng_over_ours_linear: match (nng_linear, ours_linear) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sublinear_bound_hand_values() {
        assert_eq!(bound_sublinear(0, 3, 1.0).unwrap(), 1.0);
        assert_eq!(bound_sublinear(2, 3, 1.0).unwrap(), 0.5);
        assert_relative_eq!(bound_sublinear(90, 10, 2.0).unwrap(), 2.0 / 11.0, max_relative = 1e-15);
    }

    #[test]
    fn sublinear_bound_is_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let b = bound_sublinear(k, 7, 3.5).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn linear_bound_hand_values() {
        assert_eq!(bound_linear(0, 3, 1.0, 4.0).unwrap(), 4.0);
        assert_eq!(bound_linear(3, 3, 1.0, 1.0).unwrap(), 0.125);
        // two blocks with modulus one converge in a single step
        assert_eq!(linear_factor(2, 1.0).unwrap(), 0.0);
        assert_eq!(bound_linear(5, 2, 1.0, 9.0).unwrap(), 0.0);
    }

    #[test]
    fn factors_stay_inside_the_unit_interval() {
        for n in [2usize, 3, 5, 20] {
            for mu in [0.01, 0.25, 0.5, 0.99, 1.0] {
                let ours = linear_factor(n, mu).unwrap();
                let nng = nng_linear_factor(n, mu).unwrap();
                assert!((0.0..1.0).contains(&ours));
                assert!((0.0..1.0).contains(&nng));
                assert!(ours <= nng + 1e-15, "N={n} mu={mu}: {ours} > {nng}");
                if mu < 1.0 {
                    assert!(ours > 0.0);
                }
            }
        }
    }

    #[test]
    fn factor_hand_values() {
        assert_relative_eq!(linear_factor(3, 0.5).unwrap(), 2.0 / 3.0, max_relative = 1e-15);
        assert_eq!(nng_linear_factor(3, 0.5).unwrap(), 0.75);
    }

    #[test]
    fn nng_sublinear_hand_values_and_domain() {
        assert_eq!(bound_nng_sublinear(4, 3, 1.0).unwrap(), 1.0);
        assert!(bound_nng_sublinear(0, 3, 1.0).is_err());
    }

    #[test]
    fn nng_linear_hand_values() {
        assert_eq!(bound_nng_linear(0, 3, 1.0, 0.7).unwrap(), 0.7);
        assert_eq!(bound_nng_linear(2, 3, 1.0, 1.0).unwrap(), 0.25);
    }

    #[test]
    fn mu_outside_unit_interval_is_rejected() {
        assert!(linear_factor(3, 0.0).is_err());
        assert!(linear_factor(3, 1.5).is_err());
        assert!(nng_linear_factor(3, -0.1).is_err());
    }

    #[test]
    fn envelope_ratio_hand_values() {
        assert_eq!(bound_ratio_sublinear(3, 2, 1.0, 1.0).unwrap(), 4.0);
        assert_eq!(bound_ratio_sublinear(10, 9, 2.0, 1.0).unwrap(), 8.0);
        let tail = bound_ratio_sublinear(3, 1_000_000_000, 3.0, 1.0).unwrap();
        assert_relative_eq!(tail, 6.0, max_relative = 1e-8);
        assert!(bound_ratio_sublinear(3, 2, 0.5, 1.0).is_err());
        assert!(bound_ratio_sublinear(3, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn complexity_reproduces_frozen_hand_values() {
        let inputs = ComplexityInputs {
            n_blocks: 3,
            tilde_r_sq: 1.0,
            r_sq: Some(1.0),
            mu_f: Some(1.0),
            gap0: 0.5,
            eps: 0.1,
            rho: 0.1,
        };
        let rep = complexity_report(&inputs).unwrap();
        assert_relative_eq!(rep.ours_sublinear.unwrap(), 104.37751649736401, max_relative = 1e-12);
        assert_relative_eq!(rep.ours_linear.unwrap(), 9.210340371976184, max_relative = 1e-12);
        assert_relative_eq!(rep.nng_sublinear.unwrap(), 134.10340371976184, max_relative = 1e-12);
        assert_eq!(rep.ours_sublinear_iters, Some(105));
        assert_eq!(rep.ours_linear_iters, Some(10));
    }

    #[test]
    fn easy_targets_clamp_to_zero_iterations() {
        let inputs = ComplexityInputs {
            n_blocks: 3,
            tilde_r_sq: 1e-6,
            r_sq: Some(1.0),
            mu_f: None,
            gap0: 1.0,
            eps: 0.9,
            rho: 0.5,
        };
        let rep = complexity_report(&inputs).unwrap();
        // the log term is hugely negative here
        assert!(rep.ours_sublinear.unwrap() < 0.0);
        assert_eq!(rep.ours_sublinear_iters, Some(0));
    }

    #[test]
    fn classical_count_dominates_by_the_guard_margin() {
        let mut checked = 0;
        for n_blocks in [2usize, 3, 6, 11, 24] {
            for (r_sq, tilde_r_sq) in [(1.0, 1.0), (2.0, 1.0), (5.0, 0.25), (10.0, 10.0)] {
                for (eps, rho) in [(0.1, 0.1), (0.01, 0.3), (0.05, 0.01), (0.2, 0.5), (0.3, 0.9)] {
                    let inputs = ComplexityInputs {
                        n_blocks,
                        tilde_r_sq,
                        r_sq: Some(r_sq),
                        mu_f: None,
                        gap0: 0.5 * tilde_r_sq,
                        eps: eps * tilde_r_sq,
                        rho,
                    };
                    let rep = complexity_report(&inputs).unwrap();
                    let diff = rep.nng_minus_ours_sublinear.unwrap();
                    let guard = (n_blocks - 1) as f64 * r_sq * 4.0f64.ln() / (eps * tilde_r_sq)
                        + (n_blocks - 1) as f64;
                    assert!(
                        diff >= guard * (1.0 - 1e-12),
                        "N={n_blocks} R2={r_sq} T2={tilde_r_sq} eps={eps} rho={rho}: {diff} < {guard}"
                    );
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn linear_count_ratio_approaches_two_over_one_plus_mu() {
        for mu in [0.2, 0.5, 1.0] {
            let inputs = ComplexityInputs {
                n_blocks: 5,
                tilde_r_sq: 1.0,
                r_sq: None,
                mu_f: Some(mu),
                gap0: 0.5,
                eps: 1e-9,
                rho: 1e-6,
            };
            let rep = complexity_report(&inputs).unwrap();
            let ratio = rep.nng_over_ours_linear.unwrap();
            assert_relative_eq!(ratio, 2.0 / (1.0 + mu), max_relative = 0.05);
            if mu < 1.0 {
                assert!(ratio > 1.0);
            }
        }
    }

    #[test]
    fn complexity_validates_targets() {
        let base = ComplexityInputs {
            n_blocks: 3,
            tilde_r_sq: 1.0,
            r_sq: Some(1.0),
            mu_f: Some(1.0),
            gap0: 0.5,
            eps: 0.1,
            rho: 0.1,
        };
        let mut bad = base.clone();
        bad.eps = 0.6; // above the initial gap
        assert!(complexity_report(&bad).is_err());
        let mut bad = base.clone();
        bad.rho = 1.0;
        assert!(complexity_report(&bad).is_err());
        let mut bad = base;
        bad.mu_f = Some(2.0);
        assert!(complexity_report(&bad).is_err());
    }

    #[test]
    fn bound_set_fills_available_columns() {
        let inputs = BoundInputs {
            n_blocks: 3,
            tilde_r_sq: 1.0,
            r_sq: Some(2.0),
            mu_f: Some(1.0),
            gap0: Some(0.5),
        };
        let set = BoundSet::compute(inputs, &[0, 1, 2]).unwrap();
        assert_eq!(set.rows.len(), 3);
        assert_eq!(set.rows[0].nng_sublinear, None);
        assert_eq!(set.rows[1].nng_sublinear, Some(8.0));
        assert_eq!(set.rows[0].ours_sublinear, 1.0);
        assert_eq!(set.rows[2].ours_linear, Some(0.25));
        assert_eq!(set.rows[2].nng_linear, Some(0.125));

        let sparse = BoundInputs { n_blocks: 3, tilde_r_sq: 1.0, r_sq: None, mu_f: None, gap0: None };
        let set = BoundSet::compute(sparse, &[0, 5]).unwrap();
        assert!(set.rows.iter().all(|r| r.ours_linear.is_none() && r.nng_sublinear.is_none()));
    }

    #[test]
    fn sharper_sublinear_never_exceeds_classical_when_radii_are_ordered() {
        for n_blocks in [2usize, 3, 8, 16] {
            for ratio in [1.0, 1.5, 4.0] {
                let tilde = 0.7;
                let r_sq = tilde * ratio;
                for k in 1..400usize {
                    let ours = bound_sublinear(k, n_blocks, tilde).unwrap();
                    let nng = bound_nng_sublinear(k, n_blocks, r_sq).unwrap();
                    assert!(ours <= nng * (1.0 + 1e-12), "N={n_blocks} k={k}: {ours} > {nng}");
                }
            }
        }
    }
}
