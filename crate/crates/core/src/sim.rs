//! Monte Carlo engine: streams observations through a policy over a
//! sequence of experiments and aggregates discovery metrics.
//!
//! Experiments are visited strictly sequentially — a rejected experiment is
//! never revisited — and every replication draws its randomness from two
//! dedicated ChaCha streams derived from the master seed, so runs are
//! reproducible bit for bit regardless of execution order or thread count.

use alloc::string::String;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DiscoveryCriterion, ExperimentState, ModelSpec};
use crate::policy::{make_policy, Action, Policy, PolicySpec};
use crate::sample;

/// Number of per-effect histogram buckets in a report.
pub const EFFECT_BUCKETS: usize = 40;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Where true effects come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthSource {
    /// Effects drawn from the model prior; a replication runs until its
    /// first discovery.
    PriorSampled,
    /// A fixed list of ground-truth effects; a replication sweeps the whole
    /// list once, optionally in a freshly shuffled order.
    EmpiricalList { effects: Vec<f64>, shuffle: bool },
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: ModelSpec,
    pub criterion: DiscoveryCriterion,
    pub policy: PolicySpec,
    pub truth: TruthSource,
    pub replications: u32,
    pub seed: u64,
    /// Fixed cost charged per started experiment in the reported total.
    pub cost_c: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.criterion.validate_for(&self.model)?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.cost_c >= 0.0 && self.cost_c.is_finite()) {
            return Err(Error::Config("cost_c must be finite and non-negative".into()));
        }
        if let TruthSource::EmpiricalList { effects, .. } = &self.truth {
            if effects.is_empty() {
                return Err(Error::Config("empirical effect list is empty".into()));
            }
            for &mu in effects {
                let ok = match self.model {
                    ModelSpec::BetaBernoulli { .. } => (0.0..=1.0).contains(&mu),
                    ModelSpec::NormalKnownVariance { .. } => mu.is_finite(),
                };
                if !ok {
                    return Err(Error::Config(alloc::format!(
                        "effect {mu} outside the model support"
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Records and reports
// ---------------------------------------------------------------------------

/// How an experiment ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentOutcome {
    Discovered,
    Rejected,
    /// Rejected only because the policy hit its truncation horizon.
    Exhausted,
}

/// One experiment's result inside a replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryRecord {
    /// 1-based position in the experiment sequence; strictly increasing.
    pub experiment_index: u64,
    pub true_effect: f64,
    pub samples_used: u32,
    pub outcome: ExperimentOutcome,
    /// Present exactly when the experiment was discovered.
    pub map_estimate: Option<f64>,
    /// Global observation count when the experiment resolved.
    pub cumulative_time: u64,
}

/// Per-effect discovery frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectBucket {
    pub lo: f64,
    pub hi: f64,
    pub started: u64,
    pub discovered: u64,
}

/// Aggregated metrics of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub policy: String,
    pub s: f64,
    pub alpha: f64,
    /// Total observations divided by discoveries.
    pub mean_time_to_discovery: Option<f64>,
    /// Fraction of discoveries whose true effect lies below s.
    pub fdp: Option<f64>,
    /// Fraction of started true alternatives (effect above s) discovered.
    pub power: Option<f64>,
    pub n_discoveries: u64,
    pub n_experiments_started: u64,
    pub mean_samples_rejected: Option<f64>,
    pub mean_samples_discovered: Option<f64>,
    pub mean_map_discovered: Option<f64>,
    pub total_observations: u64,
    /// Accumulated τ + c·m_τ.
    pub total_cost_with_c: f64,
    pub replications: u32,
    pub effect_buckets: Vec<EffectBucket>,
}

/// Commutative per-replication sums; merging is order independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepAggregate {
    pub total_observations: u64,
    pub n_started: u64,
    pub n_discoveries: u64,
    pub n_false_discoveries: u64,
    pub n_rejected: u64,
    pub sum_samples_rejected: u64,
    pub sum_samples_discovered: u64,
    pub sum_map_discovered: f64,
    pub n_true_alternatives_started: u64,
    pub n_true_alternatives_discovered: u64,
    pub bucket_started: Vec<u64>,
    pub bucket_discovered: Vec<u64>,
}

impl RepAggregate {
    pub fn empty() -> Self {
        Self {
            total_observations: 0,
            n_started: 0,
            n_discoveries: 0,
            n_false_discoveries: 0,
            n_rejected: 0,
            sum_samples_rejected: 0,
            sum_samples_discovered: 0,
            sum_map_discovered: 0.0,
            n_true_alternatives_started: 0,
            n_true_alternatives_discovered: 0,
            bucket_started: alloc::vec![0; EFFECT_BUCKETS],
            bucket_discovered: alloc::vec![0; EFFECT_BUCKETS],
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.total_observations += other.total_observations;
        self.n_started += other.n_started;
        self.n_discoveries += other.n_discoveries;
        self.n_false_discoveries += other.n_false_discoveries;
        self.n_rejected += other.n_rejected;
        self.sum_samples_rejected += other.sum_samples_rejected;
        self.sum_samples_discovered += other.sum_samples_discovered;
        self.sum_map_discovered += other.sum_map_discovered;
        self.n_true_alternatives_started += other.n_true_alternatives_started;
        self.n_true_alternatives_discovered += other.n_true_alternatives_discovered;
        for (acc, x) in self.bucket_started.iter_mut().zip(&other.bucket_started) {
            *acc += x;
        }
        for (acc, x) in self.bucket_discovered.iter_mut().zip(&other.bucket_discovered) {
            *acc += x;
        }
    }

    fn accumulate(
        &mut self,
        buckets: &BucketSpec,
        true_effect: f64,
        samples_used: u32,
        outcome: ExperimentOutcome,
        map_estimate: Option<f64>,
        threshold: f64,
    ) {
        let bucket = buckets.index_of(true_effect);
        self.n_started += 1;
        self.total_observations += samples_used as u64;
        self.bucket_started[bucket] += 1;
        if true_effect > threshold {
            self.n_true_alternatives_started += 1;
        }
        match outcome {
            ExperimentOutcome::Discovered => {
                self.n_discoveries += 1;
                self.sum_samples_discovered += samples_used as u64;
                self.sum_map_discovered += map_estimate.unwrap_or(0.0);
                self.bucket_discovered[bucket] += 1;
                if true_effect < threshold {
                    self.n_false_discoveries += 1;
                }
                if true_effect > threshold {
                    self.n_true_alternatives_discovered += 1;
                }
            }
            ExperimentOutcome::Rejected | ExperimentOutcome::Exhausted => {
                self.n_rejected += 1;
                self.sum_samples_rejected += samples_used as u64;
            }
        }
    }
}

/// Bucket layout over the effect axis.
struct BucketSpec {
    lo: f64,
    hi: f64,
}

impl BucketSpec {
    fn for_model(model: &ModelSpec) -> Self {
        match *model {
            ModelSpec::BetaBernoulli { .. } => Self { lo: 0.0, hi: 1.0 },
            ModelSpec::NormalKnownVariance { mu0, sigma0, .. } => Self {
                lo: mu0 - 4.0 * sigma0,
                hi: mu0 + 4.0 * sigma0,
            },
        }
    }

    fn index_of(&self, x: f64) -> usize {
        let pos = (x - self.lo) / (self.hi - self.lo) * EFFECT_BUCKETS as f64;
        (pos.max(0.0) as usize).min(EFFECT_BUCKETS - 1)
    }

    fn edges(&self, i: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / EFFECT_BUCKETS as f64;
        (self.lo + i as f64 * width, self.lo + (i + 1) as f64 * width)
    }
}

/// Collapses sums into the final report.
pub fn finalize_metrics(
    label: &str,
    config: &SimulationConfig,
    agg: &RepAggregate,
) -> MetricsReport {
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let buckets = BucketSpec::for_model(&config.model);
    let effect_buckets = (0..EFFECT_BUCKETS)
        .map(|i| {
            let (lo, hi) = buckets.edges(i);
            EffectBucket {
                lo,
                hi,
                started: agg.bucket_started[i],
                discovered: agg.bucket_discovered[i],
            }
        })
        .collect();
    MetricsReport {
        policy: label.into(),
        s: config.criterion.s,
        alpha: config.criterion.alpha,
        mean_time_to_discovery: ratio(agg.total_observations, agg.n_discoveries),
        fdp: ratio(agg.n_false_discoveries, agg.n_discoveries),
        power: ratio(
            agg.n_true_alternatives_discovered,
            agg.n_true_alternatives_started,
        ),
        n_discoveries: agg.n_discoveries,
        n_experiments_started: agg.n_started,
        mean_samples_rejected: ratio(agg.sum_samples_rejected, agg.n_rejected),
        mean_samples_discovered: ratio(agg.sum_samples_discovered, agg.n_discoveries),
        mean_map_discovered: if agg.n_discoveries == 0 {
            None
        } else {
            Some(agg.sum_map_discovered / agg.n_discoveries as f64)
        },
        total_observations: agg.total_observations,
        total_cost_with_c: agg.total_observations as f64 + config.cost_c * agg.n_started as f64,
        replications: config.replications,
        effect_buckets,
    }
}

// ---------------------------------------------------------------------------
// Effect sources
// ---------------------------------------------------------------------------

/// A stream of ground-truth effects for successive experiments.
pub trait EffectSource {
    fn next_effect(&mut self) -> Option<f64>;
}

/// Effects drawn from the model prior; never runs dry.
pub struct PriorEffects<'a, R: RngCore> {
    pub model: ModelSpec,
    pub rng: &'a mut R,
}

impl<R: RngCore> EffectSource for PriorEffects<'_, R> {
    fn next_effect(&mut self) -> Option<f64> {
        Some(self.model.sample_effect(self.rng))
    }
}

/// Effects taken from a fixed (possibly pre-shuffled) list, in order.
pub struct ListEffects<'a> {
    effects: &'a [f64],
    order: Vec<usize>,
    pos: usize,
}

impl<'a> ListEffects<'a> {
    pub fn new<R: RngCore + ?Sized>(effects: &'a [f64], shuffle: bool, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..effects.len()).collect();
        if shuffle {
            sample::shuffle(rng, &mut order);
        }
        Self {
            effects,
            order,
            pos: 0,
        }
    }
}

impl EffectSource for ListEffects<'_> {
    fn next_effect(&mut self) -> Option<f64> {
        let idx = *self.order.get(self.pos)?;
        self.pos += 1;
        Some(self.effects[idx])
    }
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

/// Result of running a single experiment to resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRun {
    pub samples_used: u32,
    pub outcome: ExperimentOutcome,
    pub map_estimate: Option<f64>,
}

/// Runs one experiment against an arbitrary observation stream. The stream
/// is only pulled while the policy keeps continuing, which is what pathwise
/// coupling tests rely on.
pub fn run_experiment_with<F>(policy: &Policy, mut next_obs: F) -> Result<ExperimentRun>
where
    F: FnMut() -> Result<f64>,
{
    let horizon = policy.horizon();
    let mut statistic = 0.0;
    for n in 1..=horizon {
        statistic += next_obs()?;
        let state = ExperimentState::new(n, statistic);
        match policy.decide(state)? {
            Action::Continue => {}
            Action::Discover => {
                return Ok(ExperimentRun {
                    samples_used: n,
                    outcome: ExperimentOutcome::Discovered,
                    map_estimate: Some(policy.model().posterior_map(state)?),
                });
            }
            Action::Reject => {
                let outcome = if n == horizon && policy.truncates_at_horizon() {
                    ExperimentOutcome::Exhausted
                } else {
                    ExperimentOutcome::Rejected
                };
                return Ok(ExperimentRun {
                    samples_used: n,
                    outcome,
                    map_estimate: None,
                });
            }
        }
    }
    Err(Error::Config(
        "policy continued past its own horizon; thresholds are inconsistent".into(),
    ))
}

/// Runs one experiment with observations sampled from the model.
pub fn run_experiment<R: RngCore + ?Sized>(
    policy: &Policy,
    true_effect: f64,
    rng: &mut R,
) -> Result<ExperimentRun> {
    let model = *policy.model();
    run_experiment_with(policy, || model.sample_observation(true_effect, rng))
}

/// Draws experiments sequentially until the first discovery; returns every
/// record up to and including the discovering one.
pub fn run_until_discovery<R: RngCore + ?Sized>(
    policy: &Policy,
    effects: &mut dyn EffectSource,
    rng: &mut R,
) -> Result<Vec<DiscoveryRecord>> {
    let mut records = Vec::new();
    let mut cumulative: u64 = 0;
    let mut index: u64 = 0;
    loop {
        index += 1;
        let Some(true_effect) = effects.next_effect() else {
            return Err(Error::TruthExhausted { records });
        };
        let run = run_experiment(policy, true_effect, rng)?;
        cumulative += run.samples_used as u64;
        let discovered = run.outcome == ExperimentOutcome::Discovered;
        records.push(DiscoveryRecord {
            experiment_index: index,
            true_effect,
            samples_used: run.samples_used,
            outcome: run.outcome,
            map_estimate: run.map_estimate,
            cumulative_time: cumulative,
        });
        if discovered {
            return Ok(records);
        }
    }
}

/// Deterministic per-replication RNG streams: truths on ChaCha stream
/// 2·rep, observations on 2·rep + 1, both keyed by the master seed.
pub fn replication_rngs(seed: u64, rep: u32) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut truth = ChaCha8Rng::seed_from_u64(seed);
    truth.set_stream(2 * rep as u64);
    let mut obs = ChaCha8Rng::seed_from_u64(seed);
    obs.set_stream(2 * rep as u64 + 1);
    (truth, obs)
}

/// Runs replication `rep` of a configured simulation. Pure in (policy,
/// config, rep), so replications may run in any order or in parallel and
/// fold into identical totals.
pub fn run_replication(
    policy: &Policy,
    config: &SimulationConfig,
    rep: u32,
) -> Result<RepAggregate> {
    let (mut truth_rng, mut obs_rng) = replication_rngs(config.seed, rep);
    let buckets = BucketSpec::for_model(&config.model);
    let mut agg = RepAggregate::empty();
    match &config.truth {
        TruthSource::PriorSampled => {
            let mut effects = PriorEffects {
                model: config.model,
                rng: &mut truth_rng,
            };
            let records = run_until_discovery(policy, &mut effects, &mut obs_rng)?;
            for record in &records {
                agg.accumulate(
                    &buckets,
                    record.true_effect,
                    record.samples_used,
                    record.outcome,
                    record.map_estimate,
                    config.criterion.s,
                );
            }
        }
        TruthSource::EmpiricalList { effects, shuffle } => {
            let mut source = ListEffects::new(effects, *shuffle, &mut truth_rng);
            while let Some(true_effect) = source.next_effect() {
                let run = run_experiment(policy, true_effect, &mut obs_rng)?;
                agg.accumulate(
                    &buckets,
                    true_effect,
                    run.samples_used,
                    run.outcome,
                    run.map_estimate,
                    config.criterion.s,
                );
            }
        }
    }
    Ok(agg)
}

/// Runs every replication serially and aggregates. Parallel drivers call
/// [`run_replication`] per index and fold the results in index order, which
/// reproduces this function bit for bit.
pub fn simulate(config: &SimulationConfig) -> Result<MetricsReport> {
    config.validate()?;
    let policy = make_policy(&config.policy, config.model, config.criterion)?;
    let mut agg = RepAggregate::empty();
    for rep in 0..config.replications {
        agg.merge(&run_replication(&policy, config, rep)?);
    }
    Ok(finalize_metrics(policy.label(), config, &agg))
}

/// Runs several policies on identical truth sequences (the truth streams
/// depend only on seed and replication, not on the policy).
pub fn compare_policies(configs: &[SimulationConfig]) -> Result<Vec<MetricsReport>> {
    let Some(first) = configs.first() else {
        return Err(Error::Config("no policies to compare".into()));
    };
    for other in &configs[1..] {
        let same = other.model == first.model
            && other.criterion == first.criterion
            && other.truth == first.truth
            && other.replications == first.replications
            && other.seed == first.seed
            && other.cost_c == first.cost_c;
        if !same {
            return Err(Error::Config(
                "compared configurations must share model, criterion, truth, replications, and seed"
                    .into(),
            ));
        }
    }
    configs.iter().map(simulate).collect()
}
