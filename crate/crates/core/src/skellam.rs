//! Skellam (Poisson-difference) statistics.
//!
//! The photon-number difference `delta = n - m` between two independent
//! Poisson counters with means `mu_t` and `mu_r` follows
//!
//! ```text
//! S_delta(mu_t, mu_r) = exp(-mu_t - mu_r) (mu_t / mu_r)^(delta/2) I_delta(2 sqrt(mu_t mu_r))
//! ```
//!
//! with `I_delta` the modified Bessel function of the first kind. Evaluation
//! happens entirely in log space through the scaled Bessel routines in
//! [`crate::bessel`], so products `mu_t * mu_r` up to ~1e8 stay finite. The
//! degenerate cases `mu_t = 0` or `mu_r = 0` reduce to a (mirrored) Poisson
//! pmf and bypass the `(mu_t/mu_r)^(delta/2)` singularity.
//!
//! [`oracle_pmf`] is an independent brute-force convolution of the two
//! Poisson laws. It never touches the Bessel path and exists to cross-check
//! it, both in the test suites and in the `validate` command.

use std::fmt;

use statrs::function::gamma::ln_gamma;

use crate::bessel::log_bessel_i_scaled;

/// Largest per-port mean the convolution oracle accepts.
pub const ORACLE_MAX_MEAN: f64 = 50.0;

/// Individual tail terms below this absolute size terminate the outward
/// summation; the remainder is dominated by a fast-decaying geometric tail.
const TAIL_TERM_CUTOFF: f64 = 1e-16;

/// Poisson means of the two detector ports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkellamParams {
    mu_t: f64,
    mu_r: f64,
}

impl SkellamParams {
    pub fn new(mu_t: f64, mu_r: f64) -> Result<Self, SkellamError> {
        if mu_t < 0.0 || !mu_t.is_finite() {
            return Err(SkellamError::InvalidMean {
                name: "mu_t",
                value: mu_t,
            });
        }
        if mu_r < 0.0 || !mu_r.is_finite() {
            return Err(SkellamError::InvalidMean {
                name: "mu_r",
                value: mu_r,
            });
        }
        Ok(Self { mu_t, mu_r })
    }

    pub fn mu_t(&self) -> f64 {
        self.mu_t
    }

    pub fn mu_r(&self) -> f64 {
        self.mu_r
    }

    /// Mean of the difference, `mu_t - mu_r`.
    pub fn mean(&self) -> f64 {
        self.mu_t - self.mu_r
    }

    /// Variance of the difference, `mu_t + mu_r`.
    pub fn variance(&self) -> f64 {
        self.mu_t + self.mu_r
    }

    /// Mirror of `S_delta(a, b) = S_{-delta}(b, a)`.
    fn swapped(&self) -> Self {
        Self {
            mu_t: self.mu_r,
            mu_r: self.mu_t,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SkellamError {
    /// A port mean was negative, NaN or infinite.
    InvalidMean { name: &'static str, value: f64 },
    /// The requested outcome has probability exactly zero (log-pmf of an
    /// impossible event, e.g. `delta < 0` with `mu_r = 0`).
    ImpossibleEvent { delta: i64 },
    /// The convolution oracle refuses means beyond [`ORACLE_MAX_MEAN`].
    OracleScaleExceeded { mu_t: f64, mu_r: f64 },
}

impl fmt::Display for SkellamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkellamError::InvalidMean { name, value } => {
                write!(f, "{name} must be finite and nonnegative, got {value}")
            }
            SkellamError::ImpossibleEvent { delta } => {
                write!(f, "outcome delta = {delta} has probability zero")
            }
            SkellamError::OracleScaleExceeded { mu_t, mu_r } => write!(
                f,
                "oracle only covers means up to {ORACLE_MAX_MEAN}, got ({mu_t}, {mu_r})"
            ),
        }
    }
}

impl std::error::Error for SkellamError {}

/// `ln S_delta(mu_t, mu_r)`, finite wherever the linear-space pmf is nonzero
/// (including deep tails where it underflows). Impossible events signal
/// [`SkellamError::ImpossibleEvent`] instead of returning `-inf`.
pub fn log_pmf(delta: i64, params: &SkellamParams) -> Result<f64, SkellamError> {
    let (mu_t, mu_r) = (params.mu_t, params.mu_r);
    if mu_t == 0.0 && mu_r == 0.0 {
        return if delta == 0 {
            Ok(0.0)
        } else {
            Err(SkellamError::ImpossibleEvent { delta })
        };
    }
    if mu_r == 0.0 {
        return if delta < 0 {
            Err(SkellamError::ImpossibleEvent { delta })
        } else {
            Ok(poisson_log_pmf(delta as u64, mu_t))
        };
    }
    if mu_t == 0.0 {
        return if delta > 0 {
            Err(SkellamError::ImpossibleEvent { delta })
        } else {
            Ok(poisson_log_pmf((-delta) as u64, mu_r))
        };
    }
    let (st, sr) = (mu_t.sqrt(), mu_r.sqrt());
    // -(mu_t + mu_r) + x cancels catastrophically when written literally;
    // -(sqrt(mu_t) - sqrt(mu_r))^2 is the same quantity, computed stably.
    let scaled = log_bessel_i_scaled(delta.unsigned_abs(), 2.0 * st * sr);
    Ok(-(st - sr) * (st - sr) + 0.5 * delta as f64 * (mu_t / mu_r).ln() + scaled)
}

/// `S_delta(mu_t, mu_r)`.
pub fn pmf(delta: i64, params: &SkellamParams) -> f64 {
    match log_pmf(delta, params) {
        Ok(lp) => lp.exp(),
        Err(_) => 0.0,
    }
}

/// Which side of the outcome axis a tail sum covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// `sum_{delta <= bound} S_delta`
    Below,
    /// `sum_{delta >= bound} S_delta`
    Above,
}

/// Tail sum of the pmf, summed outward from the mode with the
/// [`TAIL_TERM_CUTOFF`] termination rule. The majority side is always
/// computed as one minus the opposite tail so its precision does not degrade.
pub fn tail(which: Tail, bound: i64, params: &SkellamParams) -> f64 {
    match which {
        Tail::Below => below(bound, params),
        // sum_{delta >= b} S_delta(t, r) = sum_{delta <= -b} S_delta(r, t)
        Tail::Above => below(-bound, &params.swapped()),
    }
}

fn below(bound: i64, params: &SkellamParams) -> f64 {
    if (bound as f64) < params.mean() {
        sum_descending(bound, params)
    } else {
        (1.0 - sum_descending(-(bound + 1), &params.swapped())).clamp(0.0, 1.0)
    }
}

/// `sum_{delta <= bound}` for a bound at or below the mean, walking away from
/// the mode so the terms decrease monotonically. Neumaier-compensated.
fn sum_descending(bound: i64, params: &SkellamParams) -> f64 {
    let mut acc = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut delta = bound;
    loop {
        let term = pmf(delta, params);
        let t = acc + term;
        comp += if acc.abs() >= term.abs() {
            (acc - t) + term
        } else {
            (term - t) + acc
        };
        acc = t;
        if term < TAIL_TERM_CUTOFF && bound - delta > 4 {
            break;
        }
        delta -= 1;
    }
    acc + comp
}

/// Brute-force `S_delta` by explicit convolution of the two Poisson pmfs,
/// truncated where terms drop below 1e-18. Limited to means at or below
/// [`ORACLE_MAX_MEAN`]; independent of the Bessel evaluation path.
pub fn oracle_pmf(delta: i64, params: &SkellamParams) -> Result<f64, SkellamError> {
    let (mu_t, mu_r) = (params.mu_t, params.mu_r);
    if mu_t > ORACLE_MAX_MEAN || mu_r > ORACLE_MAX_MEAN {
        return Err(SkellamError::OracleScaleExceeded { mu_t, mu_r });
    }
    if mu_t == 0.0 || mu_r == 0.0 {
        // The convolution collapses; reuse the exact Poisson branch.
        return Ok(pmf(delta, params));
    }
    // S_delta = sum_m  Pois(mu_t)[m + delta] * Pois(mu_r)[m]
    let m_start = if delta < 0 { (-delta) as u64 } else { 0 };
    // Peak of the product term: m (m + delta) = mu_t mu_r.
    let df = delta as f64;
    let m_peak = 0.5 * (-df + (df * df + 4.0 * mu_t * mu_r).sqrt());
    let mut total = 0.0_f64;
    let mut largest = 0.0_f64;
    let mut m = m_start;
    loop {
        let n = (m as i64 + delta) as u64;
        let term = (poisson_log_pmf(n, mu_t) + poisson_log_pmf(m, mu_r)).exp();
        total += term;
        largest = largest.max(term);
        // Truncate once past the peak and 18 orders below it; the cutoff is
        // relative so deep-tail pmf values keep full relative accuracy.
        if m as f64 > m_peak && term <= 1e-18 * largest {
            break;
        }
        m += 1;
        debug_assert!(m < 100_000, "oracle convolution failed to terminate");
    }
    Ok(total)
}

fn poisson_log_pmf(k: u64, mu: f64) -> f64 {
    k as f64 * mu.ln() - mu - ln_gamma(k as f64 + 1.0)
}
