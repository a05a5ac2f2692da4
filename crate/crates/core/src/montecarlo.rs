//! Shot-by-shot Monte Carlo simulation of the WFH channel.
//!
//! Each shot draws a symbol with its prior, two Poisson counts at the
//! symbol's port means, and decodes the difference with the configured rule.
//! The sampling protocol mirrors the measurement campaign: several
//! independent sets of fixed size, with error bars taken across sets.
//!
//! Reproducibility contract: the master seed keys a ChaCha12 generator and
//! set `i` draws from cipher stream `i`, consumed strictly sequentially
//! within the set. Sets are therefore independent units of work — evaluating
//! them concurrently or reordering them cannot change any draw.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::decision::DecisionRule;
use crate::poisson;
use crate::receiver::{port_means_for_symbol, BpskSource, ReceiverConfig, Symbol};

/// Sampling protocol: `n_sets` independent sets of `set_size` shots each.
/// The defaults (three sets of 5e4) reproduce the measurement protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McProtocol {
    set_size: u64,
    n_sets: u32,
    seed: u64,
}

pub const DEFAULT_SET_SIZE: u64 = 50_000;
pub const DEFAULT_N_SETS: u32 = 3;

impl McProtocol {
    pub fn new(set_size: u64, n_sets: u32, seed: u64) -> Result<Self, McError> {
        if set_size == 0 {
            return Err(McError::EmptySets);
        }
        if n_sets < 2 {
            return Err(McError::TooFewSets { n_sets });
        }
        Ok(Self {
            set_size,
            n_sets,
            seed,
        })
    }

    /// Three sets of 5e4 shots.
    pub fn with_defaults(seed: u64) -> Self {
        Self {
            set_size: DEFAULT_SET_SIZE,
            n_sets: DEFAULT_N_SETS,
            seed,
        }
    }

    pub fn set_size(&self) -> u64 {
        self.set_size
    }

    pub fn n_sets(&self) -> u32 {
        self.n_sets
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum McError {
    EmptySets,
    /// Error bars across sets need at least two sets.
    TooFewSets {
        n_sets: u32,
    },
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::EmptySets => write!(f, "set_size must be at least 1"),
            McError::TooFewSets { n_sets } => {
                write!(f, "error bars need at least 2 sets, got {n_sets}")
            }
        }
    }
}

impl std::error::Error for McError {}

/// A Monte Carlo estimate with its per-set values.
///
/// `error_bar` is the sample standard deviation across sets (n-1
/// denominator), not the standard error of the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub per_set: Vec<f64>,
    pub error_bar: f64,
}

impl McEstimate {
    fn from_per_set(per_set: Vec<f64>) -> Self {
        let n = per_set.len() as f64;
        let mean = per_set.iter().sum::<f64>() / n;
        let ss: f64 = per_set.iter().map(|x| (x - mean) * (x - mean)).sum();
        let error_bar = (ss / (n - 1.0)).sqrt();
        Self {
            mean,
            per_set,
            error_bar,
        }
    }
}

/// Estimates produced by one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct McRun {
    pub p_err: McEstimate,
    pub mi: McEstimate,
}

/// Draw one shot: the sent symbol and the photon-number difference.
pub fn sample_shot<R: Rng + ?Sized>(
    source: &BpskSource,
    cfg: &ReceiverConfig,
    rng: &mut R,
) -> (Symbol, i64) {
    let symbol = if rng.gen::<f64>() < source.q0() {
        Symbol::Zero
    } else {
        Symbol::One
    };
    let means = port_means_for_symbol(source, cfg, symbol);
    let n = poisson::sample(means.mu_t, rng);
    let m = poisson::sample(means.mu_r, rng);
    (symbol, n as i64 - m as i64)
}

/// Apply a resolved decision rule to an outcome. Randomized branches draw
/// from the same stream as the shot that produced the outcome.
pub fn decide<R: Rng + ?Sized>(rule: &DecisionRule, delta: i64, q0: f64, rng: &mut R) -> Symbol {
    match rule {
        DecisionRule::SignRandomized => {
            if delta < 0 {
                Symbol::Zero
            } else if delta > 0 {
                Symbol::One
            } else if rng.gen::<f64>() < q0 {
                Symbol::Zero
            } else {
                Symbol::One
            }
        }
        DecisionRule::MapThreshold {
            delta_th,
            randomized_ties,
        } => {
            if randomized_ties.contains(&delta) {
                if rng.gen::<f64>() < q0 {
                    Symbol::Zero
                } else {
                    Symbol::One
                }
            } else if delta <= *delta_th {
                Symbol::Zero
            } else {
                Symbol::One
            }
        }
    }
}

/// Run the full sampling protocol and aggregate per-set empirical error
/// probability and plug-in mutual information.
///
/// The plug-in MI estimator carries the usual O(1/N) positive bias; no
/// correction is applied, matching what a counting measurement can compute.
pub fn run_protocol(
    source: &BpskSource,
    cfg: &ReceiverConfig,
    rule: &DecisionRule,
    protocol: &McProtocol,
) -> McRun {
    let mut p_err = Vec::with_capacity(protocol.n_sets as usize);
    let mut mi = Vec::with_capacity(protocol.n_sets as usize);
    for set_index in 0..protocol.n_sets {
        let (pe, m) = run_set(source, cfg, rule, protocol, set_index);
        p_err.push(pe);
        mi.push(m);
    }
    McRun {
        p_err: McEstimate::from_per_set(p_err),
        mi: McEstimate::from_per_set(mi),
    }
}

fn run_set(
    source: &BpskSource,
    cfg: &ReceiverConfig,
    rule: &DecisionRule,
    protocol: &McProtocol,
    set_index: u32,
) -> (f64, f64) {
    let mut rng = ChaCha12Rng::seed_from_u64(protocol.seed);
    rng.set_stream(set_index as u64);
    let mut joint = [[0u64; 2]; 2]; // joint[sent][decided]
    for _ in 0..protocol.set_size {
        let (sent, delta) = sample_shot(source, cfg, &mut rng);
        let decided = decide(rule, delta, source.q0(), &mut rng);
        joint[sent.index()][decided.index()] += 1;
    }
    let total = protocol.set_size as f64;
    let errors = joint[0][1] + joint[1][0];
    (errors as f64 / total, plug_in_mi(&joint, total))
}

/// Plug-in mutual information of a 2x2 joint count table, in bits,
/// with `0 log 0 = 0`.
fn plug_in_mi(joint: &[[u64; 2]; 2], total: f64) -> f64 {
    let row = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let col = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut bits = 0.0;
    for k in 0..2 {
        for j in 0..2 {
            let n = joint[k][j];
            if n > 0 {
                let p = n as f64 / total;
                let marginal = (row[k] as f64 / total) * (col[j] as f64 / total);
                bits += p * (p / marginal).log2();
            }
        }
    }
    bits.max(0.0)
}
