//! Acceptance and heuristic rejection boundaries on the sufficient statistic.
//!
//! Because the posterior tail P(μ < s | n, S) is strictly decreasing in S,
//! the discovery region at each n is an upper threshold a_n. For the
//! Bernoulli lattice a_n is stored as the smallest integer hit count that
//! qualifies, so discovery means S ≥ a_n; for the Normal model a_n is the
//! real root of tail = α and discovery means S > a_n.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DiscoveryCriterion, ExperimentState, ModelSpec};
use crate::special::{binomial_cdf, ln_beta, ln_choose, normal_cdf, normal_quantile};

/// Smallest sufficient-statistic value certifying a discovery after `n`
/// observations, or `None` when even the extreme path falls short.
pub fn acceptance_boundary(
    model: &ModelSpec,
    criterion: &DiscoveryCriterion,
    n: u32,
) -> Result<Option<f64>> {
    if n == 0 {
        return Err(Error::Domain("acceptance boundary requires n >= 1".into()));
    }
    match model {
        ModelSpec::BetaBernoulli { .. } => {
            Ok(bb_acceptance(model, criterion, n)?.map(|s| s as f64))
        }
        ModelSpec::NormalKnownVariance { .. } => {
            normal_acceptance_root(model, criterion, n).map(Some)
        }
    }
}

/// Minimal integer hit count with posterior tail below α (Bernoulli lattice).
fn bb_acceptance(
    model: &ModelSpec,
    criterion: &DiscoveryCriterion,
    n: u32,
) -> Result<Option<u32>> {
    let tail = |s: u32| model.posterior_tail(ExperimentState::new(n, s as f64), criterion.s);
    if tail(n)? >= criterion.alpha {
        return Ok(None);
    }
    if tail(0)? < criterion.alpha {
        return Ok(Some(0));
    }
    // invariant: tail(lo) >= alpha > tail(hi)
    let (mut lo, mut hi) = (0u32, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid)? < criterion.alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Bisection root of posterior tail = α on the statistic axis (Normal).
fn normal_acceptance_root(
    model: &ModelSpec,
    criterion: &DiscoveryCriterion,
    n: u32,
) -> Result<f64> {
    let ModelSpec::NormalKnownVariance { mu0, sigma, .. } = *model else {
        return Err(Error::Domain("normal boundary requires the normal model".into()));
    };
    let gamma = model.gamma().expect("normal model");
    let m = n as f64 + gamma;
    let center = m * criterion.s - gamma * mu0;
    let span = 10.0 * sigma * libm::sqrt(m);
    let tail = |s: f64| model.posterior_tail(ExperimentState::new(n, s), criterion.s);

    let (mut lo, mut hi) = (center - span, center + span);
    debug_assert!(tail(lo)? >= criterion.alpha && tail(hi)? <= criterion.alpha);
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval is at floating-point resolution
        }
        if tail(mid)? < criterion.alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form Normal acceptance boundary
/// a_n = (n+γ)(s−μ₀) + n·... expressed on the statistic axis:
/// a_n = (n+γ)s − γμ₀ − z_α σ √(n+γ).
///
/// Must agree with the bisection route to 1e-9; keeping both is the
/// cross-check for the root-finder.
pub fn acceptance_boundary_normal_closed(
    model: &ModelSpec,
    criterion: &DiscoveryCriterion,
    n: u32,
) -> Result<f64> {
    let ModelSpec::NormalKnownVariance { mu0, sigma, .. } = *model else {
        return Err(Error::Domain(
            "closed-form boundary requires the normal model".into(),
        ));
    };
    let gamma = model.gamma().expect("normal model");
    let m = n as f64 + gamma;
    let z = normal_quantile(criterion.alpha);
    Ok(m * criterion.s - gamma * mu0 - z * sigma * libm::sqrt(m))
}

/// β-quantile of the sampling distribution of S_n under a fixed effect.
///
/// Bernoulli lattice: the largest integer q with P(Bin(n, μ̂) ≤ q) ≤ β,
/// or `None` when even q = 0 carries more than β mass (reject nothing).
/// Normal: the exact quantile of Normal(nμ̂, nσ²).
pub fn sampling_quantile(
    model: &ModelSpec,
    n: u32,
    mu_hat: f64,
    beta: f64,
) -> Result<Option<f64>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta must be in (0,1), got {beta}")));
    }
    if n == 0 {
        return Err(Error::Domain("sampling quantile requires n >= 1".into()));
    }
    match *model {
        ModelSpec::BetaBernoulli { .. } => {
            if !(0.0..=1.0).contains(&mu_hat) {
                return Err(Error::Domain(format!("effect {mu_hat} outside [0,1]")));
            }
            let cdf = |q: u32| binomial_cdf(n as u64, mu_hat, q as i64);
            if cdf(0) > beta {
                return Ok(None);
            }
            // cdf(n) = 1 > beta, so the largest feasible q is in [0, n)
            let (mut lo, mut hi) = (0u32, n);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if cdf(mid) <= beta {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(Some(lo as f64))
        }
        ModelSpec::NormalKnownVariance { sigma, .. } => {
            let nf = n as f64;
            Ok(Some(nf * mu_hat + normal_quantile(beta) * sigma * libm::sqrt(nf)))
        }
    }
}

/// Heuristic rejection boundary r̄_n.
///
/// Looks `t_h` steps ahead, takes the MAP effect μ̂ implied by sitting
/// exactly on the acceptance boundary there, and rejects statistics that
/// are implausible (lower β-tail) under μ̂. The discrete quantile keeps at
/// most β mass below it, erring toward continuing.
pub fn heuristic_boundary(
    model: &ModelSpec,
    criterion: &DiscoveryCriterion,
    n: u32,
    t_h: u32,
    beta: f64,
) -> Result<Option<f64>> {
    let future_n = n
        .checked_add(t_h)
        .ok_or_else(|| Error::Domain("n + t_h overflows".into()))?;
    let Some(a_future) = acceptance_boundary(model, criterion, future_n)? else {
        return Err(Error::BoundaryUnreachable { n: future_n });
    };
    let mu_hat = model.posterior_map(ExperimentState::new(future_n, a_future))?;
    sampling_quantile(model, n, mu_hat, beta)
}

/// Marginal probability, under the prior, that a fresh experiment meets
/// the discovery criterion after exactly `n` observations.
pub fn fixed_horizon_accept_prob(
    model: &ModelSpec,
    criterion: &DiscoveryCriterion,
    n: u32,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("fixed horizon requires n >= 1".into()));
    }
    match *model {
        ModelSpec::BetaBernoulli { a, b } => {
            let Some(a_n) = bb_acceptance(model, criterion, n)? else {
                return Ok(0.0);
            };
            // P(S_n >= a_n) under the Beta-Binomial prior predictive
            let ln_b0 = ln_beta(a, b);
            let mut below = 0.0;
            for j in 0..a_n {
                let term = ln_choose(n as u64, j as u64)
                    + ln_beta(a + j as f64, b + (n - j) as f64)
                    - ln_b0;
                below += libm::exp(term);
            }
            Ok((1.0 - below).clamp(0.0, 1.0))
        }
        ModelSpec::NormalKnownVariance { mu0, sigma0, sigma } => {
            let gamma = model.gamma().expect("normal model");
            let nf = n as f64;
            let m = nf + gamma;
            let z = normal_quantile(criterion.alpha);
            // S_n is marginally Normal(n mu0, sigma0^2 n^2 + sigma^2 n)
            let numer = m * (criterion.s - mu0) - z * sigma * libm::sqrt(m);
            let denom = libm::sqrt(sigma0 * sigma0 * nf * nf + sigma * sigma * nf);
            Ok(1.0 - normal_cdf(numer / denom))
        }
    }
}

// ---------------------------------------------------------------------------
// BoundarySeries
// ---------------------------------------------------------------------------

/// Precomputed acceptance boundaries a_1..a_horizon for one model and
/// criterion. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "BoundarySeriesRepr", into = "BoundarySeriesRepr")]
pub struct BoundarySeries {
    model: ModelSpec,
    criterion: DiscoveryCriterion,
    values: Vec<Option<f64>>,
}

#[derive(Serialize, Deserialize)]
struct BoundarySeriesRepr {
    model: ModelSpec,
    s: f64,
    alpha: f64,
    a: Vec<Option<f64>>,
}

impl From<BoundarySeriesRepr> for BoundarySeries {
    fn from(repr: BoundarySeriesRepr) -> Self {
        Self {
            model: repr.model,
            criterion: DiscoveryCriterion {
                s: repr.s,
                alpha: repr.alpha,
            },
            values: repr.a,
        }
    }
}

impl From<BoundarySeries> for BoundarySeriesRepr {
    fn from(series: BoundarySeries) -> Self {
        Self {
            model: series.model,
            s: series.criterion.s,
            alpha: series.criterion.alpha,
            a: series.values,
        }
    }
}

impl BoundarySeries {
    pub fn compute(
        model: ModelSpec,
        criterion: DiscoveryCriterion,
        horizon: u32,
    ) -> Result<Self> {
        criterion.validate_for(&model)?;
        if horizon == 0 {
            return Err(Error::Domain("horizon must be at least 1".into()));
        }
        let mut values = Vec::with_capacity(horizon as usize);
        for n in 1..=horizon {
            values.push(acceptance_boundary(&model, &criterion, n)?);
        }
        Ok(Self {
            model,
            criterion,
            values,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn criterion(&self) -> DiscoveryCriterion {
        self.criterion
    }

    pub fn horizon(&self) -> u32 {
        self.values.len() as u32
    }

    /// a_n, for 1 ≤ n ≤ horizon.
    pub fn acceptance(&self, n: u32) -> Result<Option<f64>> {
        if n == 0 || n > self.horizon() {
            return Err(Error::HorizonExceeded {
                n,
                horizon: self.horizon(),
            });
        }
        Ok(self.values[(n - 1) as usize])
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Whether a state satisfies the discovery criterion, by boundary
    /// comparison (S ≥ a_n on the lattice, S > a_n on the real line).
    pub fn is_discovery(&self, state: ExperimentState) -> Result<bool> {
        if state.n == 0 {
            return Ok(false);
        }
        match self.acceptance(state.n)? {
            None => Ok(false),
            Some(a) => Ok(if self.model.is_discrete() {
                state.s >= a
            } else {
                state.s > a
            }),
        }
    }
}
