//! Block-separable problems on the zero-sum subspace.
//!
//! The objective is `f(x) = Σᵢ fᵢ(xᵢ)` over `N` blocks `xᵢ ∈ ℝⁿ`, minimized
//! subject to the coupling constraint `Σᵢ xᵢ = 0`. Each block term `fᵢ` is
//! convex with an `Lᵢ`-Lipschitz gradient. The feasible set
//! `S = {x : Σᵢ xᵢ = 0}` is a linear subspace; its orthogonal complement is
//! the set of points whose blocks are all equal, so first-order optimality on
//! `S` is exactly the condition that all block gradients agree.
//!
//! Points are stored flat as `[x₁, x₂, …, x_N]` with block `i` occupying
//! `data[i*n .. (i+1)*n]`.

use crate::error::{Error, Result};
use crate::sampler::RngState;

/// Relative tolerance for membership in the constraint subspace.
pub const FEAS_TOL: f64 = 1e-9;

/// Value and gradient oracle for one block term `fᵢ`.
///
/// Implementations must be deterministic pure functions of the block value.
pub trait BlockOracle: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// Writes `∇fᵢ(x)` into `out`; `out.len() == x.len()`.
    fn gradient(&self, x: &[f64], out: &mut [f64]);
}

/// A point satisfying the coupling constraint `Σᵢ xᵢ = 0` up to [`FEAS_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint {
    n_blocks: usize,
    block_dim: usize,
    data: Vec<f64>,
}

impl FeasiblePoint {
    /// Wraps an explicit coordinate vector, checking shape and feasibility.
    pub fn from_vec(n_blocks: usize, block_dim: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(n_blocks, block_dim)?;
        if data.len() != n_blocks * block_dim {
            return Err(Error::InvalidInput(format!(
                "point has {} entries, expected {} ({} blocks of dim {})",
                data.len(),
                n_blocks * block_dim,
                n_blocks,
                block_dim
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("point has non-finite entries".into()));
        }
        let p = FeasiblePoint { n_blocks, block_dim, data };
        if !p.is_feasible() {
            return Err(Error::InvalidInput(format!(
                "point violates the zero-sum constraint: |sum| = {:.3e}",
                p.block_sum_inf()
            )));
        }
        Ok(p)
    }

    /// The origin, which is always feasible.
    pub fn zeros(n_blocks: usize, block_dim: usize) -> Result<Self> {
        check_shape(n_blocks, block_dim)?;
        Ok(FeasiblePoint { n_blocks, block_dim, data: vec![0.0; n_blocks * block_dim] })
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.block_dim..(i + 1) * self.block_dim]
    }

    pub(crate) fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.block_dim..(i + 1) * self.block_dim]
    }

    /// `‖Σᵢ xᵢ‖_∞`, the feasibility defect.
    pub fn block_sum_inf(&self) -> f64 {
        let n = self.block_dim;
        (0..n)
            .map(|m| {
                let s: f64 = (0..self.n_blocks).map(|i| self.data[i * n + m]).sum();
                s.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest block infinity norm, `maxᵢ ‖xᵢ‖_∞`.
    pub fn max_block_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_feasible(&self) -> bool {
        self.block_sum_inf() <= FEAS_TOL * self.max_block_inf().max(1.0)
    }
}

fn check_shape(n_blocks: usize, block_dim: usize) -> Result<()> {
    if n_blocks < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 blocks, got {n_blocks}")));
    }
    if block_dim < 1 {
        return Err(Error::InvalidInput("block dimension must be at least 1".into()));
    }
    Ok(())
}

/// Orthogonal projection of an arbitrary vector onto the zero-sum subspace:
/// each component has the across-block mean of that component subtracted.
pub fn project_to_s(n_blocks: usize, block_dim: usize, v: &[f64]) -> Result<FeasiblePoint> {
    check_shape(n_blocks, block_dim)?;
    if v.len() != n_blocks * block_dim {
        return Err(Error::InvalidInput(format!(
            "vector has {} entries, expected {}",
            v.len(),
            n_blocks * block_dim
        )));
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("cannot project non-finite vector".into()));
    }
    let mut data = v.to_vec();
    for m in 0..block_dim {
        let mean: f64 =
            (0..n_blocks).map(|i| v[i * block_dim + m]).sum::<f64>() / n_blocks as f64;
        for i in 0..n_blocks {
            data[i * block_dim + m] -= mean;
        }
    }
    Ok(FeasiblePoint { n_blocks, block_dim, data })
}

/// Squared weighted norm `‖x‖_L² = Σᵢ Lᵢ ‖xᵢ‖²` over a flat block array.
///
/// The block dimension is inferred from the lengths; they must divide evenly.
pub fn l_norm_sq(data: &[f64], lipschitz: &[f64]) -> Result<f64> {
    let n_blocks = lipschitz.len();
    if n_blocks == 0 || data.is_empty() || !data.len().is_multiple_of(n_blocks) {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} entries across {} weights",
            data.len(),
            n_blocks
        )));
    }
    let n = data.len() / n_blocks;
    let mut total = 0.0;
    for (i, &l) in lipschitz.iter().enumerate() {
        let sq: f64 = data[i * n..(i + 1) * n].iter().map(|v| v * v).sum();
        total += l * sq;
    }
    Ok(total)
}

/// Squared weighted distance `‖x − y‖_L²` between two feasible points.
pub fn weighted_dist_sq(x: &FeasiblePoint, y: &FeasiblePoint, lipschitz: &[f64]) -> Result<f64> {
    if x.n_blocks != y.n_blocks || x.block_dim != y.block_dim {
        return Err(Error::InvalidInput("points have different shapes".into()));
    }
    let diff: Vec<f64> = x.data.iter().zip(&y.data).map(|(a, b)| a - b).collect();
    l_norm_sq(&diff, lipschitz)
}

/// A block-separable objective together with declared gradient Lipschitz
/// constants and, when known analytically, a strong convexity modulus with
/// respect to `‖·‖_L`.
pub struct BlockProblem {
    block_dim: usize,
    blocks: Vec<Box<dyn BlockOracle>>,
    lipschitz: Vec<f64>,
    mu_f: Option<f64>,
}

impl BlockProblem {
    pub fn new(
        block_dim: usize,
        blocks: Vec<Box<dyn BlockOracle>>,
        lipschitz: Vec<f64>,
        mu_f: Option<f64>,
    ) -> Result<Self> {
        check_shape(blocks.len(), block_dim)?;
        if lipschitz.len() != blocks.len() {
            return Err(Error::InvalidInput(format!(
                "{} Lipschitz constants for {} blocks",
                lipschitz.len(),
                blocks.len()
            )));
        }
        if !lipschitz.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::InvalidInput(
                "Lipschitz constants must be finite and positive".into(),
            ));
        }
        if let Some(mu) = mu_f {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "strong convexity modulus must lie in (0, 1], got {mu}"
                )));
            }
        }
        Ok(BlockProblem { block_dim, blocks, lipschitz, mu_f })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    /// Strong convexity modulus w.r.t. `‖·‖_L`, when known analytically.
    pub fn mu_f(&self) -> Option<f64> {
        self.mu_f
    }

    pub fn check_point(&self, x: &FeasiblePoint) -> Result<()> {
        if x.n_blocks() != self.n_blocks() || x.block_dim() != self.block_dim {
            return Err(Error::InvalidInput(format!(
                "point shape ({}, {}) does not match problem shape ({}, {})",
                x.n_blocks(),
                x.block_dim(),
                self.n_blocks(),
                self.block_dim
            )));
        }
        Ok(())
    }

    pub fn block_value(&self, i: usize, xi: &[f64]) -> f64 {
        self.blocks[i].value(xi)
    }

    pub fn block_gradient(&self, i: usize, xi: &[f64], out: &mut [f64]) {
        self.blocks[i].gradient(xi, out)
    }

    /// Per-block objective values `fᵢ(xᵢ)`.
    pub fn block_values(&self, x: &FeasiblePoint) -> Vec<f64> {
        (0..self.n_blocks()).map(|i| self.blocks[i].value(x.block(i))).collect()
    }

    /// Total objective `f(x) = Σᵢ fᵢ(xᵢ)`.
    pub fn value(&self, x: &FeasiblePoint) -> f64 {
        self.block_values(x).iter().sum()
    }

    /// All block gradients, flattened in block order.
    pub fn gradients(&self, x: &FeasiblePoint) -> Vec<f64> {
        let n = self.block_dim;
        let mut g = vec![0.0; self.n_blocks() * n];
        for i in 0..self.n_blocks() {
            self.blocks[i].gradient(x.block(i), &mut g[i * n..(i + 1) * n]);
        }
        g
    }

    /// First-order optimality residual on the constraint subspace:
    /// `max_{i<j} ‖∇fᵢ(xᵢ) − ∇fⱼ(xⱼ)‖`. Zero exactly at constrained optima.
    pub fn grad_residual(&self, x: &FeasiblePoint) -> f64 {
        let n = self.block_dim;
        let g = self.gradients(x);
        let mut worst = 0.0f64;
        for i in 0..self.n_blocks() {
            for j in (i + 1)..self.n_blocks() {
                let sq: f64 = (0..n)
                    .map(|m| {
                        let d = g[i * n + m] - g[j * n + m];
                        d * d
                    })
                    .sum();
                worst = worst.max(sq.sqrt());
            }
        }
        worst
    }
}

/// Sampled diagnostics for a problem's declared smoothness and convexity.
///
/// These are randomized spot checks, not proofs: each draws points from the
/// given stream and verifies the defining inequalities within small slack.
/// On failure the returned message describes the offending sample.
pub mod checks {
    use super::*;

    /// `‖∇fᵢ(x+d) − ∇fᵢ(x)‖ ≤ Lᵢ‖d‖` and the induced quadratic upper bound
    /// `fᵢ(x+d) ≤ fᵢ(x) + ⟨∇fᵢ(x), d⟩ + Lᵢ‖d‖²/2`, per block.
    pub fn smoothness(
        p: &BlockProblem,
        rng: &mut RngState,
        samples_per_block: usize,
    ) -> std::result::Result<(), String> {
        let n = p.block_dim();
        let mut x = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut g2 = vec![0.0; n];
        for i in 0..p.n_blocks() {
            let l = p.lipschitz()[i];
            for s in 0..samples_per_block {
                rng.fill_standard_normal(&mut x);
                rng.fill_standard_normal(&mut d);
                let xd: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
                p.block_gradient(i, &x, &mut g);
                p.block_gradient(i, &xd, &mut g2);
                let gdiff = norm2(g.iter().zip(&g2).map(|(a, b)| a - b));
                let dnorm = norm2(d.iter().copied());
                if gdiff > l * dnorm * (1.0 + 1e-8) {
                    return Err(format!(
                        "block {i} sample {s}: gradient jump {gdiff:.6e} exceeds L*step {:.6e}",
                        l * dnorm
                    ));
                }
                let lhs = p.block_value(i, &xd);
                let dot: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                let rhs = p.block_value(i, &x) + dot + 0.5 * l * dnorm * dnorm;
                if lhs > rhs + 1e-8 * (1.0 + rhs.abs()) {
                    return Err(format!(
                        "block {i} sample {s}: quadratic upper bound violated, {lhs:.6e} > {rhs:.6e}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Midpoint convexity of each block term on sampled pairs.
    pub fn convexity(
        p: &BlockProblem,
        rng: &mut RngState,
        samples_per_block: usize,
    ) -> std::result::Result<(), String> {
        let n = p.block_dim();
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for i in 0..p.n_blocks() {
            for s in 0..samples_per_block {
                rng.fill_standard_normal(&mut x);
                rng.fill_standard_normal(&mut y);
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                let rhs = 0.5 * p.block_value(i, &x) + 0.5 * p.block_value(i, &y);
                let lhs = p.block_value(i, &mid);
                if lhs > rhs + 1e-10 * (1.0 + rhs.abs()) {
                    return Err(format!(
                        "block {i} sample {s}: midpoint convexity violated, {lhs:.6e} > {rhs:.6e}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Gradient oracle against central finite differences of the value oracle.
    pub fn gradient_consistency(
        p: &BlockProblem,
        rng: &mut RngState,
        points_per_block: usize,
    ) -> std::result::Result<(), String> {
        let n = p.block_dim();
        let mut x = vec![0.0; n];
        let mut g = vec![0.0; n];
        for i in 0..p.n_blocks() {
            for s in 0..points_per_block {
                rng.fill_standard_normal(&mut x);
                p.block_gradient(i, &x, &mut g);
                let scale = norm2(g.iter().copied()).max(1.0);
                for m in 0..n {
                    let h = 1e-5 * (1.0 + x[m].abs());
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[m] += h;
                    xm[m] -= h;
                    let fd = (p.block_value(i, &xp) - p.block_value(i, &xm)) / (2.0 * h);
                    if (fd - g[m]).abs() > 1e-6 * scale {
                        return Err(format!(
                            "block {i} sample {s} coord {m}: finite difference {fd:.9e} vs gradient {:.9e}",
                            g[m]
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Strong convexity `f(y) ≥ f(x) + ⟨∇f(x), y−x⟩ + μ‖y−x‖_L²/2` with the
    /// problem's declared modulus. The inequality holds over the whole space,
    /// so the sampled pairs are unconstrained.
    pub fn strong_convexity(
        p: &BlockProblem,
        rng: &mut RngState,
        samples: usize,
    ) -> std::result::Result<(), String> {
        let mu = match p.mu_f() {
            Some(m) => m,
            None => return Ok(()),
        };
        let n = p.block_dim();
        let total = p.n_blocks() * n;
        let mut xv = vec![0.0; total];
        let mut yv = vec![0.0; total];
        let mut g = vec![0.0; n];
        for s in 0..samples {
            rng.fill_standard_normal(&mut xv);
            rng.fill_standard_normal(&mut yv);
            let mut fx = 0.0;
            let mut fy = 0.0;
            let mut dot = 0.0;
            for i in 0..p.n_blocks() {
                let xi = &xv[i * n..(i + 1) * n];
                let yi = &yv[i * n..(i + 1) * n];
                fx += p.block_value(i, xi);
                fy += p.block_value(i, yi);
                p.block_gradient(i, xi, &mut g);
                dot += g.iter().zip(yi.iter().zip(xi)).map(|(gk, (yk, xk))| gk * (yk - xk)).sum::<f64>();
            }
            let diff: Vec<f64> = yv.iter().zip(&xv).map(|(a, b)| a - b).collect();
            let dist = l_norm_sq(&diff, p.lipschitz()).expect("matching lengths");
            let rhs = fx + dot + 0.5 * mu * dist;
            if fy < rhs - 1e-9 * (1.0 + rhs.abs()) {
                return Err(format!(
                    "sample {s}: strong convexity with mu={mu} violated, {fy:.6e} < {rhs:.6e}"
                ));
            }
        }
        Ok(())
    }

    fn norm2(it: impl Iterator<Item = f64>) -> f64 {
        it.map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_centers_each_component() {
        let p = project_to_s(3, 1, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn projection_of_constant_blocks_is_zero() {
        let p = project_to_s(4, 2, &[7.0, -3.0, 7.0, -3.0, 7.0, -3.0, 7.0, -3.0]).unwrap();
        assert!(p.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn projection_fixes_feasible_points() {
        let v = [0.5, -1.5, 1.0, 2.0, -1.5, -0.5];
        let p = project_to_s(3, 2, &v).unwrap();
        let q = project_to_s(3, 2, p.as_slice()).unwrap();
        let scale = p.max_block_inf();
        for (a, b) in p.as_slice().iter().zip(q.as_slice()) {
            assert!((a - b).abs() <= f64::EPSILON * scale);
        }
    }

    #[test]
    fn projection_rejects_non_finite() {
        assert!(matches!(
            project_to_s(2, 1, &[f64::NAN, 1.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn l_norm_sq_weights_blocks() {
        let v = l_norm_sq(&[1.0, 0.0, -1.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(l_norm_sq(&[0.0, 0.0], &[3.0, 9.0]).unwrap(), 0.0);
        // unit weights reduce to the Euclidean norm
        let e = l_norm_sq(&[3.0, 4.0], &[1.0, 1.0]).unwrap();
        assert_eq!(e, 25.0);
    }

    #[test]
    fn l_norm_sq_rejects_length_mismatch() {
        assert!(matches!(
            l_norm_sq(&[1.0, 2.0, 3.0], &[1.0, 1.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn feasible_point_rejects_violations() {
        assert!(FeasiblePoint::from_vec(2, 1, vec![1.0, -1.0]).is_ok());
        assert!(matches!(
            FeasiblePoint::from_vec(2, 1, vec![1.0, 1.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn feasibility_defect_is_inf_norm_of_block_sums() {
        let p = FeasiblePoint { n_blocks: 2, block_dim: 2, data: vec![1.0, 2.0, -1.0, -2.0] };
        assert_eq!(p.block_sum_inf(), 0.0);
        assert_eq!(p.max_block_inf(), 2.0);
    }

    #[test]
    fn weighted_dist_matches_hand_value() {
        let x = FeasiblePoint::from_vec(2, 1, vec![1.0, -1.0]).unwrap();
        let y = FeasiblePoint::from_vec(2, 1, vec![-1.0, 1.0]).unwrap();
        assert_eq!(weighted_dist_sq(&x, &y, &[1.0, 3.0]).unwrap(), 16.0);
        assert_eq!(weighted_dist_sq(&x, &x, &[1.0, 3.0]).unwrap(), 0.0);
    }
}
