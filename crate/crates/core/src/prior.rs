//! Method-of-moments Beta prior fitting from empirical rate data.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample;

/// One empirical rate observation: `successes` hits over `trials` attempts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateRecord {
    pub id: String,
    pub trials: u64,
    pub successes: u64,
}

impl RateRecord {
    pub fn new(id: String, trials: u64, successes: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Domain(format!("record '{id}': trials must be at least 1")));
        }
        if successes > trials {
            return Err(Error::Domain(format!(
                "record '{id}': successes {successes} exceed trials {trials}"
            )));
        }
        Ok(Self {
            id,
            trials,
            successes,
        })
    }

    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Fits Beta shape parameters (a, b) matching the sample mean and unbiased
/// sample variance of `rates` exactly:
/// ν = m(1−m)/v − 1, a = mν, b = (1−m)ν.
pub fn fit_beta_mom(rates: &[f64]) -> Result<(f64, f64)> {
    if rates.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 rates to fit, got {}",
            rates.len()
        )));
    }
    for &r in rates {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("rate {r} outside (0, 1)")));
        }
    }
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let variance = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    if variance <= 0.0 {
        return Err(Error::Domain("rates have zero sample variance".into()));
    }
    let nu = mean * (1.0 - mean) / variance - 1.0;
    if nu <= 0.0 {
        return Err(Error::InfeasibleMoments { mean, variance });
    }
    Ok((mean * nu, (1.0 - mean) * nu))
}

/// Draws `count` rates from Beta(a, b) and quantizes each as a binomial
/// success count over `trials` attempts; a stand-in population for tests
/// and examples when no real rate data is at hand.
pub fn synthetic_records<R: RngCore + ?Sized>(
    a: f64,
    b: f64,
    count: usize,
    trials: u64,
    rng: &mut R,
) -> Vec<RateRecord> {
    (0..count)
        .map(|i| {
            let p = sample::sample_beta(rng, a, b);
            let mut successes = 0u64;
            for _ in 0..trials {
                if sample::uniform_open01(rng) < p {
                    successes += 1;
                }
            }
            RateRecord {
                id: format!("synthetic-{i:05}"),
                trials,
                successes,
            }
        })
        .collect()
}
