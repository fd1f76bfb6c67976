//! Structural identities behind the convergence analysis.
//!
//! Two facts do the heavy lifting:
//!
//! * The zero-sum subspace `S` has the explicit basis
//!   `v_{l,m} = (e_l − e_{l+1}) ⊗ ẽ_m` for `l = 1..N−1`, `m = 1..n`, and any
//!   `x ∈ S` decomposes with coefficients `c_{l,m} = ⟨ẽ_m, x_1 + ⋯ + x_l⟩`
//!   (prefix block sums, componentwise).
//! * The expectation of the per-pair rank-one update maps, weighted by the
//!   pair distribution, acts on `S` as multiplication by `1/(N−1)`:
//!
//!   ```text
//!   Σ_{i<j} [p_ij/(Lᵢ+Lⱼ)] (e_i − e_j)(Lᵢe_iᵀ − Lⱼe_jᵀ) ⊗ I_n  =  I/(N−1)  on S
//!   ```
//!
//! The second identity is what contracts the expected weighted distance to
//! the optimum by `(N−1)⁻¹` per iteration and drives every rate bound here.

use crate::error::{Error, Result};
use crate::problem::{BlockProblem, FeasiblePoint, FEAS_TOL};
use crate::sampler::build_distribution;
use crate::solver::step;

/// Materialized basis of the zero-sum subspace for a given shape.
#[derive(Debug, Clone)]
pub struct BasisSet {
    n_blocks: usize,
    block_dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl BasisSet {
    pub fn new(n_blocks: usize, block_dim: usize) -> Result<Self> {
        if n_blocks < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 blocks, got {n_blocks}")));
        }
        if block_dim < 1 {
            return Err(Error::InvalidInput("block dimension must be at least 1".into()));
        }
        let mut vectors = Vec::with_capacity((n_blocks - 1) * block_dim);
        for l in 0..n_blocks - 1 {
            for m in 0..block_dim {
                let mut v = vec![0.0; n_blocks * block_dim];
                v[l * block_dim + m] = 1.0;
                v[(l + 1) * block_dim + m] = -1.0;
                vectors.push(v);
            }
        }
        Ok(BasisSet { n_blocks, block_dim, vectors })
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    /// Basis vectors in `(l, m)` lexicographic order.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Coefficients of a zero-sum vector in this basis: prefix block sums.
    ///
    /// Errors if the input is not in the subspace within the feasibility
    /// tolerance.
    pub fn decompose(&self, data: &[f64]) -> Result<Vec<f64>> {
        let (nb, n) = (self.n_blocks, self.block_dim);
        if data.len() != nb * n {
            return Err(Error::InvalidInput(format!(
                "vector has {} entries, expected {}",
                data.len(),
                nb * n
            )));
        }
        let mut scale = 0.0f64;
        for v in data {
            scale = scale.max(v.abs());
        }
        for m in 0..n {
            let s: f64 = (0..nb).map(|i| data[i * n + m]).sum();
            if s.abs() > FEAS_TOL * scale.max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "vector is not in the zero-sum subspace: component {m} sums to {s:.3e}"
                )));
            }
        }
        let mut coeffs = vec![0.0; (nb - 1) * n];
        for m in 0..n {
            let mut prefix = 0.0;
            for l in 0..nb - 1 {
                prefix += data[l * n + m];
                coeffs[l * n + m] = prefix;
            }
        }
        Ok(coeffs)
    }

    /// Linear combination `Σ c_{l,m} v_{l,m}` of the basis vectors.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.vectors.len() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for {} basis vectors",
                coeffs.len(),
                self.vectors.len()
            )));
        }
        let mut out = vec![0.0; self.n_blocks * self.block_dim];
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            for (o, vv) in out.iter_mut().zip(v) {
                *o += c * vv;
            }
        }
        Ok(out)
    }
}

/// Applies the pair-expectation operator induced by the Lipschitz constants:
/// the sum over pairs of `p_ij/(Lᵢ+Lⱼ)` times the rank-one update map. On
/// the zero-sum subspace the result equals `x/(N−1)`.
pub fn pair_operator_apply(lipschitz: &[f64], x: &FeasiblePoint) -> Result<Vec<f64>> {
    if lipschitz.len() != x.n_blocks() {
        return Err(Error::InvalidInput(format!(
            "{} Lipschitz constants for {} blocks",
            lipschitz.len(),
            x.n_blocks()
        )));
    }
    let dist = build_distribution(lipschitz)?;
    let n = x.block_dim();
    let mut out = vec![0.0; x.n_blocks() * n];
    for (&(i, j), &p) in dist.pairs().iter().zip(dist.probs()) {
        let w = p / (lipschitz[i] + lipschitz[j]);
        let xi = x.block(i);
        let xj = x.block(j);
        for m in 0..n {
            let g = lipschitz[i] * xi[m] - lipschitz[j] * xj[m];
            out[i * n + m] += w * g;
            out[j * n + m] -= w * g;
        }
    }
    Ok(out)
}

/// Euclidean deviation `‖A x − x/(N−1)‖` of the pair-expectation operator
/// from its subspace action.
pub fn pair_operator_deviation(lipschitz: &[f64], x: &FeasiblePoint) -> Result<f64> {
    let image = pair_operator_apply(lipschitz, x)?;
    let scale = (x.n_blocks() - 1) as f64;
    let dev: f64 = image
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| {
            let d = a - b / scale;
            d * d
        })
        .sum();
    Ok(dev.sqrt())
}

/// Actual decrease and guaranteed model decrease of one step on `(i, j)`:
/// `(f(x) − f(x⁺), ‖∇fᵢ − ∇fⱼ‖²/(2(Lᵢ+Lⱼ)))`. The first component is never
/// smaller than the second (up to roundoff); they agree for quadratics with
/// tight declared constants.
pub fn descent_check(
    p: &BlockProblem,
    x: &FeasiblePoint,
    i: usize,
    j: usize,
) -> Result<(f64, f64)> {
    let n = p.block_dim();
    let mut gi = vec![0.0; n];
    let mut gj = vec![0.0; n];
    p.check_point(x)?;
    let x_next = step(p, x, i, j)?;
    p.block_gradient(i, x.block(i), &mut gi);
    p.block_gradient(j, x.block(j), &mut gj);
    let grad_gap_sq: f64 = gi
        .iter()
        .zip(&gj)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    let model = grad_gap_sq / (2.0 * (p.lipschitz()[i] + p.lipschitz()[j]));
    // only blocks i and j change, so difference the two block terms directly
    let actual = p.block_value(i, x.block(i)) + p.block_value(j, x.block(j))
        - p.block_value(i, x_next.block(i))
        - p.block_value(j, x_next.block(j));
    Ok((actual, model))
}

/// Initial gap against half the squared weighted distance to the optimum:
/// returns `(f(x⁰) − f*, ‖x⁰ − x*‖_L²/2)`. Convexity and smoothness make the
/// first at most the second.
pub fn initial_gap_check(
    p: &BlockProblem,
    x0: &FeasiblePoint,
    x_star: &FeasiblePoint,
    f_star: f64,
) -> Result<(f64, f64)> {
    p.check_point(x0)?;
    p.check_point(x_star)?;
    let lhs = p.value(x0) - f_star;
    let rhs = 0.5 * crate::problem::weighted_dist_sq(x0, x_star, p.lipschitz())?;
    Ok((lhs, rhs))
}
