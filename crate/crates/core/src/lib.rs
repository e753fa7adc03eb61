//! Sequential Bayesian discovery in the experiment-rich regime.
//!
//! When candidate experiments are plentiful and observations are the scarce
//! resource, the question at every step is whether the current experiment is
//! still worth another sample or should be abandoned for a fresh one. This
//! crate computes the policies that settle that question and the machinery
//! to benchmark them:
//!
//! - [`model`]: the Beta-Bernoulli and Normal known-variance conjugate
//!   models — posteriors, predictive transitions, samplers.
//! - [`boundary`]: acceptance boundaries a_n for the discovery criterion
//!   P(μ < s | data) < α, plus the plausibility-based heuristic rejection
//!   boundary and fixed-horizon acceptance probabilities.
//! - [`dp`]: backward induction for the k-truncated single-experiment
//!   problem with rejection cost κ, and bisection to the fixed point κ*
//!   where κ* equals the optimal expected time per discovery.
//! - [`policy`]: one decision interface over the optimal, heuristic,
//!   fixed-sample, early-stopping, and Bayes-sequential procedures.
//! - [`sim`]: a deterministic, replication-parallel Monte Carlo harness
//!   measuring time to discovery, false discovery proportion, and power.
//! - [`prior`]: method-of-moments Beta prior fitting from empirical rates.
//!
//! The crate is `no_std` (with `alloc`); everything deterministic given a
//! seed, with IO and orchestration left to the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod boundary;
pub mod dp;
pub mod error;
pub mod model;
pub mod policy;
pub mod prior;
pub mod sample;
pub mod sim;
pub mod special;

pub use boundary::{
    acceptance_boundary, acceptance_boundary_normal_closed, fixed_horizon_accept_prob,
    heuristic_boundary, BoundarySeries,
};
pub use dp::{
    solve_optimal, BisectionStep, DpSolver, GridSpec, InductionOutcome, PolicyTable,
    TruncatedProblem,
};
pub use error::{Error, Result};
pub use model::{DiscoveryCriterion, ExperimentState, ModelSpec};
pub use policy::{make_policy, Action, Policy, PolicySpec};
pub use prior::{fit_beta_mom, synthetic_records, RateRecord};
pub use sim::{
    compare_policies, run_until_discovery, simulate, MetricsReport, SimulationConfig, TruthSource,
};
