//! Seed-deterministic samplers on top of any [`RngCore`].
//!
//! The simulation contract is that identical seeds reproduce identical
//! streams bit for bit, so the samplers are fixed here rather than pulled
//! from a distribution crate whose algorithms may change between releases.

use libm::{log, pow};
use rand_core::RngCore;

use crate::special::normal_quantile;

/// Uniform draw strictly inside (0, 1) with 53 significant bits.
#[inline]
pub fn uniform_open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal draw by inverse-CDF; consumes exactly one `u64`.
#[inline]
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    normal_quantile(uniform_open01(rng))
}

/// Uniform index in `[0, bound)` without modulo bias.
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, bound: usize) -> usize {
    assert!(bound > 0);
    let bound = bound as u64;
    let zone = u64::MAX - u64::MAX % bound;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % bound) as usize;
        }
    }
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<R: RngCore + ?Sized, T>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Gamma(shape, 1) draw via Marsaglia–Tsang squeeze.
pub fn sample_gamma<R: RngCore + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    assert!(shape > 0.0, "gamma shape must be positive");
    if shape < 1.0 {
        // boost: X_a = X_{a+1} * U^{1/a}
        let x = sample_gamma(rng, shape + 1.0);
        let u = uniform_open01(rng);
        return x * pow(u, 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (3.0 * libm::sqrt(d));
    loop {
        let z = standard_normal(rng);
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = uniform_open01(rng);
        if u < 1.0 - 0.0331 * (z * z) * (z * z) {
            return d * v;
        }
        if log(u) < 0.5 * z * z + d * (1.0 - v + log(v)) {
            return d * v;
        }
    }
}

/// Beta(a, b) draw as a ratio of Gammas.
pub fn sample_beta<R: RngCore + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let x = sample_gamma(rng, a);
    let y = sample_gamma(rng, b);
    let r = x / (x + y);
    // guard against a 0/0 underflow for extreme shapes
    if r.is_nan() {
        0.5
    } else {
        r.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }
}
