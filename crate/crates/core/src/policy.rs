//! Uniform decision interface over the benchmarked testing procedures.
//!
//! Everything shares one discovery rule — posterior tail below α — and
//! differs only in when it abandons the current experiment:
//!
//! - `Optimal`: thresholds from a converged [`PolicyTable`].
//! - `Heuristic`: plausibility thresholds looking `t_h` steps ahead.
//! - `FixedN`: verdict after exactly N observations, no early action.
//! - `FixedNEarlyStop`: as `FixedN`, but discoveries may stop early.
//! - `BayesSequential`: rejects once P(μ > s | data) drops below a level,
//!   with a hard cap on observations.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::boundary::{heuristic_boundary, BoundarySeries};
use crate::dp::PolicyTable;
use crate::error::{Error, Result};
use crate::model::{DiscoveryCriterion, ExperimentState, ModelSpec};

/// Decision at a state of the current experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Discover,
    Continue,
    Reject,
}

/// Serializable policy description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PolicySpec {
    Optimal { table: Box<PolicyTable> },
    Heuristic { t_h: u32, beta: f64, k: u32 },
    FixedN { n: u32 },
    FixedNEarlyStop { n: u32 },
    BayesSequential { beta_reject: f64, cap: u32 },
}

impl PolicySpec {
    /// Stable short label used in reports.
    pub fn label(&self) -> String {
        match self {
            Self::Optimal { .. } => "optimal".into(),
            Self::Heuristic { .. } => "heuristic".into(),
            Self::FixedN { n } => format!("fixed_n_{n}"),
            Self::FixedNEarlyStop { n } => format!("fixed_n_early_{n}"),
            Self::BayesSequential { cap, .. } => format!("bayes_seq_{cap}"),
        }
    }
}

/// An immutable decision rule: a deterministic function of (n, S).
#[derive(Debug, Clone)]
pub struct Policy {
    model: ModelSpec,
    criterion: DiscoveryCriterion,
    label: String,
    kind: PolicyKind,
}

#[derive(Debug, Clone)]
enum PolicyKind {
    Thresholds {
        a: Vec<Option<f64>>,
        r: Vec<Option<f64>>,
        k: u32,
    },
    FixedN {
        n: u32,
        a: Vec<Option<f64>>,
        early_stop: bool,
    },
    BayesSequential {
        cap: u32,
        a: Vec<Option<f64>>,
        /// Largest statistic still rejected at each n (lattice) or the
        /// rejection root (continuous); `None` means no rejection at that n.
        reject_below: Vec<Option<f64>>,
    },
}

/// Builds an immutable [`Policy`] from its spec, computing whatever
/// boundary tables it needs.
pub fn make_policy(
    spec: &PolicySpec,
    model: ModelSpec,
    criterion: DiscoveryCriterion,
) -> Result<Policy> {
    criterion.validate_for(&model)?;
    let label = spec.label();
    let kind = match spec {
        PolicySpec::Optimal { table } => {
            if table.model != model {
                return Err(Error::Config(
                    "policy table was solved for a different model".into(),
                ));
            }
            if table.criterion != criterion {
                return Err(Error::Config(
                    "policy table was solved for a different criterion".into(),
                ));
            }
            PolicyKind::Thresholds {
                a: table.a.clone(),
                r: table.r.clone(),
                k: table.k,
            }
        }
        PolicySpec::Heuristic { t_h, beta, k } => {
            if *k == 0 {
                return Err(Error::Config("heuristic horizon k must be at least 1".into()));
            }
            if !(*beta > 0.0 && *beta < 1.0) {
                return Err(Error::Config(format!(
                    "heuristic beta must be in (0,1), got {beta}"
                )));
            }
            let mut r = Vec::with_capacity(*k as usize);
            for n in 1..=*k {
                r.push(heuristic_boundary(&model, &criterion, n, *t_h, *beta)?);
            }
            let series = BoundarySeries::compute(model, criterion, *k)?;
            PolicyKind::Thresholds {
                a: series.values().to_vec(),
                r,
                k: *k,
            }
        }
        PolicySpec::FixedN { n } | PolicySpec::FixedNEarlyStop { n } => {
            if *n == 0 {
                return Err(Error::Config("fixed sample size must be at least 1".into()));
            }
            let series = BoundarySeries::compute(model, criterion, *n)?;
            PolicyKind::FixedN {
                n: *n,
                a: series.values().to_vec(),
                early_stop: matches!(spec, PolicySpec::FixedNEarlyStop { .. }),
            }
        }
        PolicySpec::BayesSequential { beta_reject, cap } => {
            if *cap == 0 {
                return Err(Error::Config("observation cap must be at least 1".into()));
            }
            let prior_upper = 1.0 - model.prior_cdf(criterion.s);
            if !(*beta_reject > 0.0 && *beta_reject < prior_upper) {
                return Err(Error::Config(format!(
                    "beta_reject = {beta_reject} must lie in (0, {prior_upper}): at or above \
                     the prior probability P(mu > s) the test rejects every fresh experiment \
                     outright"
                )));
            }
            let series = BoundarySeries::compute(model, criterion, *cap)?;
            let mut reject_below = Vec::with_capacity(*cap as usize);
            for n in 1..=*cap {
                reject_below.push(bayes_reject_boundary(&model, &criterion, n, *beta_reject)?);
            }
            PolicyKind::BayesSequential {
                cap: *cap,
                a: series.values().to_vec(),
                reject_below,
            }
        }
    };
    Ok(Policy {
        model,
        criterion,
        label,
        kind,
    })
}

/// Boundary of the event P(μ > s | n, S) < β, i.e. tail > 1 − β.
///
/// Lattice: the largest hit count still rejected. Continuous: the root on
/// the statistic axis; rejection is S strictly below it.
fn bayes_reject_boundary(
    model: &ModelSpec,
    criterion: &DiscoveryCriterion,
    n: u32,
    beta_reject: f64,
) -> Result<Option<f64>> {
    let level = 1.0 - beta_reject;
    match model {
        ModelSpec::BetaBernoulli { .. } => {
            let tail = |s: u32| model.posterior_tail(ExperimentState::new(n, s as f64), criterion.s);
            if tail(0)? <= level {
                return Ok(None); // nothing rejected at this n
            }
            if tail(n)? > level {
                return Ok(Some(n as f64)); // everything rejected
            }
            // invariant: tail(lo) > level >= tail(hi)
            let (mut lo, mut hi) = (0u32, n);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if tail(mid)? > level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(Some(lo as f64))
        }
        ModelSpec::NormalKnownVariance { mu0, sigma, .. } => {
            let gamma = model.gamma().expect("normal model");
            let m = n as f64 + gamma;
            let z = crate::special::normal_quantile(level);
            Ok(Some(
                m * criterion.s - gamma * mu0 - z * sigma * libm::sqrt(m),
            ))
        }
    }
}

impl Policy {
    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn criterion(&self) -> DiscoveryCriterion {
        self.criterion
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Last observation index at which the policy can still act; every
    /// experiment resolves by this count.
    pub fn horizon(&self) -> u32 {
        match &self.kind {
            PolicyKind::Thresholds { k, .. } => *k,
            PolicyKind::FixedN { n, .. } => *n,
            PolicyKind::BayesSequential { cap, .. } => *cap,
        }
    }

    /// Whether a rejection at the horizon is a truncation rather than a
    /// verdict of the procedure itself.
    pub fn truncates_at_horizon(&self) -> bool {
        !matches!(self.kind, PolicyKind::FixedN { .. })
    }

    fn is_discovery(&self, a: &[Option<f64>], state: ExperimentState) -> bool {
        match a[state.n as usize - 1] {
            None => false,
            Some(a_n) => {
                if self.model.is_discrete() {
                    state.s >= a_n
                } else {
                    state.s > a_n
                }
            }
        }
    }

    fn is_rejected(&self, r: &[Option<f64>], state: ExperimentState) -> bool {
        match r[state.n as usize - 1] {
            None => false,
            Some(r_n) => {
                if self.model.is_discrete() {
                    state.s <= r_n
                } else {
                    state.s < r_n
                }
            }
        }
    }

    /// The decision at a state. Deterministic; repeated calls agree.
    pub fn decide(&self, state: ExperimentState) -> Result<Action> {
        state.validate_for(&self.model)?;
        if state.n > self.horizon() {
            return Err(Error::HorizonExceeded {
                n: state.n,
                horizon: self.horizon(),
            });
        }
        if state.n == 0 {
            // prior nondegeneracy: no experiment starts discovered
            return Ok(Action::Continue);
        }
        Ok(match &self.kind {
            PolicyKind::Thresholds { a, r, k } => {
                if self.is_discovery(a, state) {
                    Action::Discover
                } else if state.n == *k || self.is_rejected(r, state) {
                    Action::Reject
                } else {
                    Action::Continue
                }
            }
            PolicyKind::FixedN { n, a, early_stop } => {
                if state.n == *n {
                    if self.is_discovery(a, state) {
                        Action::Discover
                    } else {
                        Action::Reject
                    }
                } else if *early_stop && self.is_discovery(a, state) {
                    Action::Discover
                } else {
                    Action::Continue
                }
            }
            PolicyKind::BayesSequential {
                cap,
                a,
                reject_below,
            } => {
                // discovery takes precedence when both events hold
                if self.is_discovery(a, state) {
                    Action::Discover
                } else if state.n == *cap || self.is_rejected(reject_below, state) {
                    Action::Reject
                } else {
                    Action::Continue
                }
            }
        })
    }
}
