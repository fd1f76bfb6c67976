//! Built-in problem families.
//!
//! Three block-term families cover the test surface:
//!
//! * quadratic: `fᵢ(x) = aᵢ‖x‖²/2 + ⟨bᵢ, x⟩`, tight constant `Lᵢ = aᵢ`;
//! * pseudo-Huber: `fᵢ(x) = wᵢ(√(1+‖x‖²) − 1)`, `Lᵢ = wᵢ`;
//! * softplus: `fᵢ(x) = log(1 + exp(⟨cᵢ, x⟩))`, `Lᵢ = ‖cᵢ‖²/4`.
//!
//! The quadratic family has a closed-form constrained optimum: stationarity
//! on the zero-sum subspace forces all block gradients `aᵢxᵢ + bᵢ` to equal a
//! shared multiplier `ν`, and the constraint pins it to
//! `ν = (Σᵢ bᵢ/aᵢ) / (Σᵢ 1/aᵢ)` componentwise, `xᵢ* = (ν − bᵢ)/aᵢ`.

use crate::error::{Error, Result};
use crate::problem::{BlockOracle, BlockProblem, FeasiblePoint};

#[derive(Debug, Clone)]
pub struct QuadraticSpec {
    pub n_blocks: usize,
    pub block_dim: usize,
    /// Per-block curvatures `aᵢ > 0`.
    pub curvature: Vec<f64>,
    /// Linear terms, all blocks flattened (`n_blocks * block_dim` entries).
    pub linear: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PseudoHuberSpec {
    pub n_blocks: usize,
    pub block_dim: usize,
    /// Per-block weights `wᵢ > 0`.
    pub weight: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SoftplusSpec {
    pub n_blocks: usize,
    pub block_dim: usize,
    /// Per-block direction vectors, flattened; each must be nonzero.
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum ProblemSpec {
    Quadratic(QuadraticSpec),
    PseudoHuber(PseudoHuberSpec),
    Softplus(SoftplusSpec),
}

impl ProblemSpec {
    pub fn n_blocks(&self) -> usize {
        match self {
            ProblemSpec::Quadratic(s) => s.n_blocks,
            ProblemSpec::PseudoHuber(s) => s.n_blocks,
            ProblemSpec::Softplus(s) => s.n_blocks,
        }
    }

    pub fn block_dim(&self) -> usize {
        match self {
            ProblemSpec::Quadratic(s) => s.block_dim,
            ProblemSpec::PseudoHuber(s) => s.block_dim,
            ProblemSpec::Softplus(s) => s.block_dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProblemSpec::Quadratic(_) => "quadratic",
            ProblemSpec::PseudoHuber(_) => "pseudo_huber",
            ProblemSpec::Softplus(_) => "softplus",
        }
    }

    /// Tight per-block Lipschitz constants of the gradient.
    pub fn tight_lipschitz(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match self {
            ProblemSpec::Quadratic(s) => s.curvature.clone(),
            ProblemSpec::PseudoHuber(s) => s.weight.clone(),
            ProblemSpec::Softplus(s) => (0..s.n_blocks)
                .map(|i| {
                    let c = &s.direction[i * s.block_dim..(i + 1) * s.block_dim];
                    c.iter().map(|v| v * v).sum::<f64>() / 4.0
                })
                .collect(),
        })
    }

    /// Builds the runnable problem, declaring `Lᵢ = multiplier · tightᵢ`.
    ///
    /// The multiplier must be at least 1 so the declared constants stay
    /// valid. Quadratics get their strong convexity modulus
    /// `μ = minᵢ aᵢ/Lᵢ` populated analytically.
    pub fn to_problem(&self, lipschitz_multiplier: f64) -> Result<BlockProblem> {
        if !(lipschitz_multiplier.is_finite() && lipschitz_multiplier >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "lipschitz multiplier must be >= 1, got {lipschitz_multiplier}"
            )));
        }
        let lipschitz: Vec<f64> =
            self.tight_lipschitz()?.into_iter().map(|l| l * lipschitz_multiplier).collect();
        let mu = match self {
            ProblemSpec::Quadratic(s) => Some(mu_f_quadratic(s, &lipschitz)?),
            _ => None,
        };
        let n = self.block_dim();
        let blocks: Vec<Box<dyn BlockOracle>> = match self {
            ProblemSpec::Quadratic(s) => (0..s.n_blocks)
                .map(|i| {
                    Box::new(QuadraticBlock {
                        curvature: s.curvature[i],
                        linear: s.linear[i * n..(i + 1) * n].to_vec(),
                    }) as Box<dyn BlockOracle>
                })
                .collect(),
            ProblemSpec::PseudoHuber(s) => (0..s.n_blocks)
                .map(|i| Box::new(PseudoHuberBlock { weight: s.weight[i] }) as Box<dyn BlockOracle>)
                .collect(),
            ProblemSpec::Softplus(s) => (0..s.n_blocks)
                .map(|i| {
                    Box::new(SoftplusBlock { direction: s.direction[i * n..(i + 1) * n].to_vec() })
                        as Box<dyn BlockOracle>
                })
                .collect(),
        };
        BlockProblem::new(n, blocks, lipschitz, mu)
    }

    fn validate(&self) -> Result<()> {
        let (n_blocks, block_dim) = (self.n_blocks(), self.block_dim());
        if n_blocks < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 blocks, got {n_blocks}")));
        }
        if block_dim < 1 {
            return Err(Error::InvalidInput("block dimension must be at least 1".into()));
        }
        match self {
            ProblemSpec::Quadratic(s) => {
                expect_len("curvature", s.curvature.len(), n_blocks)?;
                expect_len("linear", s.linear.len(), n_blocks * block_dim)?;
                if !s.curvature.iter().all(|a| a.is_finite() && *a > 0.0) {
                    return Err(Error::InvalidInput("curvatures must be positive".into()));
                }
                all_finite("linear", &s.linear)?;
            }
            ProblemSpec::PseudoHuber(s) => {
                expect_len("weight", s.weight.len(), n_blocks)?;
                if !s.weight.iter().all(|w| w.is_finite() && *w > 0.0) {
                    return Err(Error::InvalidInput("weights must be positive".into()));
                }
            }
            ProblemSpec::Softplus(s) => {
                expect_len("direction", s.direction.len(), n_blocks * block_dim)?;
                all_finite("direction", &s.direction)?;
                for i in 0..n_blocks {
                    let c = &s.direction[i * block_dim..(i + 1) * block_dim];
                    if c.iter().all(|v| *v == 0.0) {
                        return Err(Error::InvalidInput(format!(
                            "softplus direction for block {i} is zero, gradient constant vanishes"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn expect_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::InvalidInput(format!("{name} has {got} entries, expected {want}")));
    }
    Ok(())
}

fn all_finite(name: &str, v: &[f64]) -> Result<()> {
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Closed-form constrained optimum of a quadratic problem.
///
/// Returns `(x*, f*, ν)` where `ν ∈ ℝⁿ` is the shared gradient value at the
/// optimum. Errors if any curvature is nonpositive (the optimum would not be
/// unique or not exist).
pub fn kkt_solve_quadratic(spec: &QuadraticSpec) -> Result<(FeasiblePoint, f64, Vec<f64>)> {
    ProblemSpec::Quadratic(spec.clone()).validate()?;
    let (nb, n) = (spec.n_blocks, spec.block_dim);
    let inv_sum: f64 = spec.curvature.iter().map(|a| 1.0 / a).sum();
    let mut nu = vec![0.0; n];
    for (m, nu_m) in nu.iter_mut().enumerate() {
        let s: f64 = (0..nb).map(|i| spec.linear[i * n + m] / spec.curvature[i]).sum();
        *nu_m = s / inv_sum;
    }
    let mut data = vec![0.0; nb * n];
    for i in 0..nb {
        for m in 0..n {
            data[i * n + m] = (nu[m] - spec.linear[i * n + m]) / spec.curvature[i];
        }
    }
    let x_star = FeasiblePoint::from_vec(nb, n, data)?;
    let mut f_star = 0.0;
    for i in 0..nb {
        let xi = x_star.block(i);
        let sq: f64 = xi.iter().map(|v| v * v).sum();
        let dot: f64 = xi.iter().zip(&spec.linear[i * n..(i + 1) * n]).map(|(x, b)| x * b).sum();
        f_star += 0.5 * spec.curvature[i] * sq + dot;
    }
    Ok((x_star, f_star, nu))
}

/// Strong convexity modulus `μ = minᵢ aᵢ/Lᵢ` of a quadratic w.r.t. `‖·‖_L`.
///
/// Requires `Lᵢ ≥ aᵢ` for every block; a declared constant below the true
/// curvature is an invalid Lipschitz declaration.
pub fn mu_f_quadratic(spec: &QuadraticSpec, lipschitz: &[f64]) -> Result<f64> {
    expect_len("lipschitz", lipschitz.len(), spec.n_blocks)?;
    for (i, (&a, &l)) in spec.curvature.iter().zip(lipschitz).enumerate() {
        if a.is_nan() || a <= 0.0 {
            return Err(Error::Unsupported(format!("block {i} curvature {a} is not positive")));
        }
        if l < a * (1.0 - 1e-12) {
            return Err(Error::InvalidInput(format!(
                "block {i} declares L = {l} below its curvature {a}"
            )));
        }
    }
    let mu = spec
        .curvature
        .iter()
        .zip(lipschitz)
        .map(|(a, l)| a / l)
        .fold(f64::INFINITY, f64::min);
    Ok(mu.min(1.0))
}

/// Upper bound on the squared `‖·‖_L` radius of the initial level set of a
/// quadratic, measured from the optimum:
/// `R² ≤ 2 (f(x⁰) − f*) · maxᵢ (Lᵢ/aᵢ)`.
///
/// On the level set `f(x) ≤ f(x⁰)`, the identity
/// `f(x) − f* = Σᵢ aᵢ‖xᵢ − xᵢ*‖²/2` bounds each weighted distance.
pub fn level_radius_sq_quadratic(
    spec: &QuadraticSpec,
    lipschitz: &[f64],
    x0: &FeasiblePoint,
) -> Result<f64> {
    expect_len("lipschitz", lipschitz.len(), spec.n_blocks)?;
    if x0.n_blocks() != spec.n_blocks || x0.block_dim() != spec.block_dim {
        return Err(Error::InvalidInput("initial point shape does not match spec".into()));
    }
    let (_, f_star, _) = kkt_solve_quadratic(spec)?;
    let problem = ProblemSpec::Quadratic(spec.clone()).to_problem(1.0)?;
    let gap0 = (problem.value(x0) - f_star).max(0.0);
    let ratio = spec
        .curvature
        .iter()
        .zip(lipschitz)
        .map(|(a, l)| l / a)
        .fold(0.0f64, f64::max);
    Ok(2.0 * gap0 * ratio)
}

struct QuadraticBlock {
    curvature: f64,
    linear: Vec<f64>,
}

impl BlockOracle for QuadraticBlock {
    fn value(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let dot: f64 = x.iter().zip(&self.linear).map(|(a, b)| a * b).sum();
        0.5 * self.curvature * sq + dot
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, (xv, b)) in out.iter_mut().zip(x.iter().zip(&self.linear)) {
            *o = self.curvature * xv + b;
        }
    }
}

struct PseudoHuberBlock {
    weight: f64,
}

impl BlockOracle for PseudoHuberBlock {
    fn value(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        // sqrt(1+s) - 1 written without cancellation for small s
        self.weight * sq / ((1.0 + sq).sqrt() + 1.0)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let scale = self.weight / (1.0 + sq).sqrt();
        for (o, xv) in out.iter_mut().zip(x) {
            *o = scale * xv;
        }
    }
}

struct SoftplusBlock {
    direction: Vec<f64>,
}

impl BlockOracle for SoftplusBlock {
    fn value(&self, x: &[f64]) -> f64 {
        let t: f64 = x.iter().zip(&self.direction).map(|(a, b)| a * b).sum();
        t.max(0.0) + (-t.abs()).exp().ln_1p()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let t: f64 = x.iter().zip(&self.direction).map(|(a, b)| a * b).sum();
        let sigma = if t >= 0.0 { 1.0 / (1.0 + (-t).exp()) } else { let e = t.exp(); e / (1.0 + e) };
        for (o, c) in out.iter_mut().zip(&self.direction) {
            *o = sigma * c;
        }
    }
}
