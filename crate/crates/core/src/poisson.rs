//! Exact Poisson sampling.
//!
//! Two exact methods, split at `mu = 10`: inversion by sequential search for
//! small means, and Hörmann's PTRS transformed rejection for large ones. The
//! rejection test compares against the exact log-pmf, so no normal
//! approximation enters anywhere; the mean range in the receiver model spans
//! 0 to ~1e4 and the tails matter.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

const INVERSION_LIMIT: f64 = 10.0;

pub(crate) fn sample<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    debug_assert!(mu.is_finite() && mu >= 0.0);
    if mu == 0.0 {
        0
    } else if mu < INVERSION_LIMIT {
        inversion(mu, rng)
    } else {
        ptrs(mu, rng)
    }
}

/// Inversion by sequential search on the cdf (Devroye X.3.3).
fn inversion<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut term = (-mu).exp();
    let mut cdf = term;
    while u > cdf {
        k += 1;
        term *= mu / k as f64;
        cdf += term;
        if term < 1e-300 {
            break; // u landed in float noise past the entire support
        }
    }
    k
}

/// Hörmann's PTRS transformed rejection, valid for `mu >= 10`.
fn ptrs<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    let b = 0.931 + 2.53 * mu.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let log_mu = mu.ln();

    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let accept = (v * inv_alpha / (a / (us * us) + b)).ln();
        if accept <= k * log_mu - mu - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}
