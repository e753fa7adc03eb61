//! The two conjugate observation models and their exact posterior algebra.
//!
//! Both models expose the same surface: a posterior tail probability
//! P(μ < s | n, S), a MAP estimate, the one-step transition of the
//! sufficient statistic, and samplers for effects and observations. The
//! sufficient statistic is the identity S(x) = x in both cases, so the
//! state of an experiment is just `(n, S_n)`.

use alloc::format;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample;
use crate::special::{beta_reg, normal_cdf};

/// Conjugate model specification.
///
/// `BetaBernoulli` pairs a Beta(a, b) prior with Bernoulli outcomes;
/// `NormalKnownVariance` pairs a Normal(μ₀, σ₀²) prior with Normal(μ, σ²)
/// outcomes. The Normal prior mean defaults to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    BetaBernoulli {
        a: f64,
        b: f64,
    },
    #[serde(rename = "normal")]
    NormalKnownVariance {
        #[serde(default)]
        mu0: f64,
        sigma0: f64,
        sigma: f64,
    },
}

impl ModelSpec {
    pub fn beta_bernoulli(a: f64, b: f64) -> Result<Self> {
        let model = Self::BetaBernoulli { a, b };
        model.validate()?;
        Ok(model)
    }

    pub fn normal(mu0: f64, sigma0: f64, sigma: f64) -> Result<Self> {
        let model = Self::NormalKnownVariance { mu0, sigma0, sigma };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::BetaBernoulli { a, b } => {
                if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                    return Err(Error::Model(format!(
                        "Beta shapes must be positive and finite, got a = {a}, b = {b}"
                    )));
                }
            }
            Self::NormalKnownVariance { mu0, sigma0, sigma } => {
                if !mu0.is_finite() {
                    return Err(Error::Model(format!("mu0 must be finite, got {mu0}")));
                }
                if !(sigma0 > 0.0 && sigma0.is_finite() && sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Model(format!(
                        "standard deviations must be positive and finite, got sigma0 = {sigma0}, sigma = {sigma}"
                    )));
                }
                let gamma = (sigma * sigma) / (sigma0 * sigma0);
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Model(format!(
                        "gamma = sigma^2/sigma0^2 must be positive and finite, got {gamma}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Prior-to-observation precision ratio γ = σ²/σ₀² (Normal model only).
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Self::BetaBernoulli { .. } => None,
            Self::NormalKnownVariance { sigma0, sigma, .. } => {
                Some((sigma * sigma) / (sigma0 * sigma0))
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::BetaBernoulli { .. })
    }

    /// Prior CDF of the effect at `s`: P(μ < s | no data).
    pub fn prior_cdf(&self, s: f64) -> f64 {
        match *self {
            Self::BetaBernoulli { a, b } => beta_reg(a, b, s),
            Self::NormalKnownVariance { mu0, sigma0, .. } => normal_cdf((s - mu0) / sigma0),
        }
    }

    /// Posterior tail P(μ < s | n, S).
    ///
    /// Strictly decreasing in S for fixed n; at n = 0 it equals the prior
    /// CDF at `s`.
    pub fn posterior_tail(&self, state: ExperimentState, s: f64) -> Result<f64> {
        state.validate_for(self)?;
        Ok(match *self {
            Self::BetaBernoulli { a, b } => {
                beta_reg(a + state.s, b + state.n as f64 - state.s, s)
            }
            Self::NormalKnownVariance { sigma, .. } => {
                let gamma = self.gamma().expect("normal model has gamma");
                let precision_n = state.n as f64 + gamma;
                let mean = self.posterior_mean_unchecked(state);
                normal_cdf((s - mean) * libm::sqrt(precision_n) / sigma)
            }
        })
    }

    /// Posterior mean of the effect.
    ///
    /// For the Normal model this is the martingale Y_n = (γμ₀ + S_n)/(n + γ),
    /// which reduces to S_n/(n + γ) for a zero prior mean.
    pub fn posterior_mean(&self, state: ExperimentState) -> Result<f64> {
        state.validate_for(self)?;
        Ok(self.posterior_mean_unchecked(state))
    }

    pub(crate) fn posterior_mean_unchecked(&self, state: ExperimentState) -> f64 {
        match *self {
            Self::BetaBernoulli { a, b } => (a + state.s) / (a + b + state.n as f64),
            Self::NormalKnownVariance { mu0, .. } => {
                let gamma = self.gamma().expect("normal model has gamma");
                (gamma * mu0 + state.s) / (state.n as f64 + gamma)
            }
        }
    }

    /// Posterior MAP estimate of the effect.
    ///
    /// Beta posteriors with a boundary shape (a + S ≤ 1 or b + n − S ≤ 1)
    /// take their mode at the support edge; the edge point is returned so
    /// all-success and all-failure paths stay well defined.
    pub fn posterior_map(&self, state: ExperimentState) -> Result<f64> {
        state.validate_for(self)?;
        Ok(match *self {
            Self::BetaBernoulli { a, b } => {
                let alpha = a + state.s;
                let beta = b + state.n as f64 - state.s;
                if alpha > 1.0 && beta > 1.0 {
                    (alpha - 1.0) / (alpha + beta - 2.0)
                } else if alpha <= 1.0 && beta <= 1.0 {
                    // degenerate sub-uniform posterior: pick the heavier edge
                    if alpha < beta {
                        0.0
                    } else if alpha > beta {
                        1.0
                    } else {
                        0.5
                    }
                } else if alpha <= 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Self::NormalKnownVariance { .. } => self.posterior_mean_unchecked(state),
        })
    }

    /// Distribution of the sufficient statistic after one more observation.
    pub fn transition_distribution(&self, state: ExperimentState) -> Result<Transition> {
        state.validate_for(self)?;
        Ok(match *self {
            Self::BetaBernoulli { .. } => Transition::BernoulliStep {
                success_prob: self.posterior_mean_unchecked(state),
            },
            Self::NormalKnownVariance { sigma, .. } => {
                let gamma = self.gamma().expect("normal model has gamma");
                let m = state.n as f64 + gamma;
                Transition::GaussianMeanStep {
                    mean: self.posterior_mean_unchecked(state),
                    var: sigma * sigma / (m * (m + 1.0)),
                }
            }
        })
    }

    /// Marginal distribution of the first observation (equivalently of S₁).
    pub fn prior_predictive_first(&self) -> FirstObservation {
        match *self {
            Self::BetaBernoulli { a, b } => FirstObservation::Bernoulli { p: a / (a + b) },
            Self::NormalKnownVariance { mu0, sigma0, sigma } => FirstObservation::Gaussian {
                mean: mu0,
                var: sigma0 * sigma0 + sigma * sigma,
            },
        }
    }

    /// Draw a true effect from the prior.
    pub fn sample_effect<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::BetaBernoulli { a, b } => sample::sample_beta(rng, a, b),
            Self::NormalKnownVariance { mu0, sigma0, .. } => {
                mu0 + sigma0 * sample::standard_normal(rng)
            }
        }
    }

    /// Draw one observation from an experiment with true effect `mu`.
    pub fn sample_observation<R: RngCore + ?Sized>(&self, mu: f64, rng: &mut R) -> Result<f64> {
        match *self {
            Self::BetaBernoulli { .. } => {
                if !(0.0..=1.0).contains(&mu) {
                    return Err(Error::Domain(format!(
                        "Bernoulli effect must lie in [0,1], got {mu}"
                    )));
                }
                // degenerate endpoints stay deterministic but still consume
                // one draw so streams align across effects
                let u = sample::uniform_open01(rng);
                Ok(if u < mu { 1.0 } else { 0.0 })
            }
            Self::NormalKnownVariance { sigma, .. } => {
                if !mu.is_finite() {
                    return Err(Error::Domain(format!("effect must be finite, got {mu}")));
                }
                Ok(mu + sigma * sample::standard_normal(rng))
            }
        }
    }
}

/// One-step transition of the sufficient statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transition {
    /// S_{n+1} ∈ {S, S+1}; the increment is the posterior predictive draw.
    BernoulliStep { success_prob: f64 },
    /// Posterior-mean step Y_{n+1} | Y_n ~ Normal(mean, var).
    GaussianMeanStep { mean: f64, var: f64 },
}

/// Marginal law of S₁ under the prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstObservation {
    Bernoulli { p: f64 },
    Gaussian { mean: f64, var: f64 },
}

/// State of the current experiment: observation count and sufficient
/// statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentState {
    pub n: u32,
    pub s: f64,
}

impl ExperimentState {
    pub fn new(n: u32, s: f64) -> Self {
        Self { n, s }
    }

    /// The state before any observation.
    pub fn fresh() -> Self {
        Self { n: 0, s: 0.0 }
    }

    pub fn validate_for(&self, model: &ModelSpec) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::State(format!("statistic must be finite, got {}", self.s)));
        }
        if self.n == 0 && self.s != 0.0 {
            return Err(Error::State(format!(
                "n = 0 requires S = 0, got S = {}",
                self.s
            )));
        }
        if model.is_discrete() {
            if self.s != libm::round(self.s) {
                return Err(Error::State(format!(
                    "Bernoulli hit count must be an integer, got {}",
                    self.s
                )));
            }
            if self.s < 0.0 || self.s > self.n as f64 {
                return Err(Error::State(format!(
                    "hit count {} outside [0, {}]",
                    self.s, self.n
                )));
            }
        }
        Ok(())
    }
}

/// Discovery criterion of the stopping problem: an experiment is a
/// discovery once P(μ < s | data) < α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryCriterion {
    pub s: f64,
    pub alpha: f64,
}

impl DiscoveryCriterion {
    /// Builds the criterion and checks prior nondegeneracy:
    /// P(μ < s | no data) must lie strictly between α and 1, otherwise
    /// every experiment (or none) would qualify before any trial.
    pub fn new(s: f64, alpha: f64, model: &ModelSpec) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Criterion(format!("alpha must be in (0,1), got {alpha}")));
        }
        if !s.is_finite() {
            return Err(Error::Criterion(format!("threshold s must be finite, got {s}")));
        }
        model.validate()?;
        let prior_tail = model.prior_cdf(s);
        if prior_tail <= alpha || prior_tail >= 1.0 {
            return Err(Error::Criterion(format!(
                "prior P(mu < s) = {prior_tail} must lie in (alpha, 1) = ({alpha}, 1)"
            )));
        }
        Ok(Self { s, alpha })
    }

    /// Re-checks an already constructed (e.g. deserialized) criterion.
    pub fn validate_for(&self, model: &ModelSpec) -> Result<()> {
        Self::new(self.s, self.alpha, model).map(|_| ())
    }
}
