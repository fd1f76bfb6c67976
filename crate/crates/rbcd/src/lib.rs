//! Randomized pairwise block coordinate descent for problems of the form
//!
//! ```text
//! minimize  f(x) = Σᵢ fᵢ(xᵢ)   subject to   Σᵢ xᵢ = 0
//! ```
//!
//! where each convex block term `fᵢ` has an `Lᵢ`-Lipschitz gradient. Every
//! iteration draws one pair of blocks, non-uniformly weighted by
//! `1/Lᵢ + 1/Lⱼ`, and moves the two blocks oppositely along the gradient
//! difference, preserving the constraint exactly.
//!
//! Alongside the solver the crate ships the analysis toolkit used to keep it
//! honest: the constraint-subspace basis and averaging identity behind the
//! rates ([`theory`]), sharper-vs-classical expected-gap envelopes and
//! iteration complexities ([`bounds`]), seeded Monte Carlo replication with
//! statistical certification ([`experiment`]), and a randomized property
//! suite ([`verify`]). The `rbcd` binary exposes the same functionality as
//! `solve`, `dist`, `verify`, `bounds`, and `mc` subcommands.

pub mod bounds;
pub mod config;
pub mod error;
pub mod experiment;
pub mod families;
pub mod problem;
pub mod report;
pub mod sampler;
pub mod solver;
pub mod theory;
pub mod verify;

pub use bounds::{
    bound_linear, bound_nng_linear, bound_nng_sublinear, bound_ratio_sublinear, bound_sublinear,
    complexity_report, linear_factor, nng_linear_factor, BoundInputs, BoundRow, BoundSet,
    ComplexityInputs, ComplexityReport,
};
pub use config::{default_checkpoints, load_config, parse_config, FileConfig, ScalarGen, VectorGen};
pub use error::{Error, Result};
pub use experiment::{
    certify, resolve_instance, run_replicas, BoundOverrides, CertifyReport, CheckStatus,
    CheckpointStat, EpsSpec, ExperimentConfig, ExperimentSummary, Instance,
};
pub use report::{bounds_csv, dist_csv, fmt_g17, summary_csv, trajectory_csv};
pub use families::{
    kkt_solve_quadratic, level_radius_sq_quadratic, mu_f_quadratic, ProblemSpec, PseudoHuberSpec,
    QuadraticSpec, SoftplusSpec,
};
pub use problem::{
    l_norm_sq, project_to_s, weighted_dist_sq, BlockOracle, BlockProblem, FeasiblePoint, FEAS_TOL,
};
pub use sampler::{build_distribution, replica_seed, splitmix64, PairDistribution, RngState};
pub use solver::{
    direction, run, step, RecordPlan, RunOptions, StepRecord, StoppingRule, Trajectory,
};
pub use theory::{
    descent_check, initial_gap_check, pair_operator_apply, pair_operator_deviation, BasisSet,
};
