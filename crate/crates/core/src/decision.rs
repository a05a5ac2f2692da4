//! Decision rules and figures of merit for the binary channel.
//!
//! Two decoders are modeled. The randomized sign rule infers symbol zero on
//! negative photon-number differences, symbol one on positive ones, and
//! resolves the inconclusive `delta = 0` outcome randomly with the prior
//! probabilities; it is only meaningful on a balanced beam splitter. The MAP
//! rule compares prior-weighted Skellam likelihoods outcome by outcome and is
//! equivalent to an integer threshold `delta_th` once the weighted likelihood
//! ratio is monotone, which is verified at runtime rather than assumed.

use std::fmt;
use std::ops::RangeInclusive;

use crate::receiver::{port_means_for_symbol, BpskSource, ReceiverConfig, Symbol};
use crate::skellam::{self, SkellamParams, Tail};

/// Half-width factor of the truncated outcome grid: `12 sqrt(variance) + 12`
/// on each side of the mean bounds the neglected tails far below 1e-12.
const GRID_SIGMAS: f64 = 12.0;
const GRID_PAD: f64 = 12.0;

#[derive(Clone, Debug, PartialEq)]
pub enum DecisionRule {
    /// Sign of the difference, ties broken randomly with the priors (balanced
    /// beam splitter only).
    SignRandomized,
    /// Infer symbol zero iff `delta <= delta_th`. `randomized_ties` holds
    /// outcomes where the weighted likelihoods tie exactly at equal priors;
    /// those fall back to the randomized rule so the balanced analytics stay
    /// consistent with the sign rule. It is empty off the symmetric point.
    MapThreshold {
        delta_th: i64,
        randomized_ties: Vec<i64>,
    },
}

/// Conditional probabilities `p(j|k)` of deciding `j` when `k` was sent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelMatrix {
    p: [[f64; 2]; 2],
}

impl ChannelMatrix {
    fn new(p: [[f64; 2]; 2]) -> Self {
        for (k, sum) in [p[0][0] + p[1][0], p[0][1] + p[1][1]]
            .into_iter()
            .enumerate()
        {
            debug_assert!((sum - 1.0).abs() < 1e-10, "column {k} not normalized");
        }
        Self { p }
    }

    pub fn prob(&self, output: Symbol, input: Symbol) -> f64 {
        self.p[output.index()][input.index()]
    }
}

/// Scalar figures of merit of a decoded channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiguresOfMerit {
    pub p_err: f64,
    /// Mutual information in bits.
    pub mi_bits: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecisionError {
    /// MAP thresholding needs a strictly interior prior.
    PriorOutOfRange { q0: f64 },
    /// The two symbols produce identical count statistics; there is nothing
    /// to threshold.
    DegenerateChannel,
    /// The randomized sign rule is stated only for `tau = 1/2`.
    RuleRequiresBalancedSplitter { tau: f64 },
    /// The MAP decisions on the scanned grid do not form a threshold; the
    /// model assumptions broke down.
    ThresholdNotMonotone { delta: i64 },
    /// Both likelihoods vanish at this outcome.
    UndefinedPosterior { delta: i64 },
}

impl fmt::Display for DecisionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionError::PriorOutOfRange { q0 } => {
                write!(f, "MAP threshold needs q0 strictly inside (0, 1), got {q0}")
            }
            DecisionError::DegenerateChannel => {
                write!(
                    f,
                    "symbol distributions are identical; no decision boundary exists"
                )
            }
            DecisionError::RuleRequiresBalancedSplitter { tau } => {
                write!(f, "the randomized sign rule requires tau = 1/2, got {tau}")
            }
            DecisionError::ThresholdNotMonotone { delta } => {
                write!(
                    f,
                    "MAP decisions are not threshold-shaped near delta = {delta}"
                )
            }
            DecisionError::UndefinedPosterior { delta } => {
                write!(
                    f,
                    "posterior undefined: both likelihoods vanish at delta = {delta}"
                )
            }
        }
    }
}

impl std::error::Error for DecisionError {}

fn symbol_params(source: &BpskSource, cfg: &ReceiverConfig, symbol: Symbol) -> SkellamParams {
    port_means_for_symbol(source, cfg, symbol).into()
}

/// Truncated outcome grid covering both symbol distributions.
pub fn delta_grid(source: &BpskSource, cfg: &ReceiverConfig) -> RangeInclusive<i64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for symbol in Symbol::BOTH {
        let p = symbol_params(source, cfg, symbol);
        let half = GRID_SIGMAS * p.variance().sqrt() + GRID_PAD;
        lo = lo.min(p.mean() - half);
        hi = hi.max(p.mean() + half);
    }
    (lo.floor() as i64)..=(hi.ceil() as i64)
}

/// Posterior probability of `symbol` given the outcome `delta`, by Bayes'
/// rule over the two prior-weighted Skellam likelihoods.
pub fn map_posterior(
    symbol: Symbol,
    delta: i64,
    source: &BpskSource,
    cfg: &ReceiverConfig,
) -> Result<f64, DecisionError> {
    let w0 = source.q0() * skellam::pmf(delta, &symbol_params(source, cfg, Symbol::Zero));
    let w1 = source.q1() * skellam::pmf(delta, &symbol_params(source, cfg, Symbol::One));
    let norm = w0 + w1;
    if norm == 0.0 {
        return Err(DecisionError::UndefinedPosterior { delta });
    }
    Ok(match symbol {
        Symbol::Zero => w0 / norm,
        Symbol::One => w1 / norm,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MapChoice {
    Zero,
    One,
    Tie,
}

/// Resolve the MAP rule to an integer threshold by brute-force scan of the
/// truncated grid.
///
/// Exact ties (they arise at the balanced symmetric point) go to the symbol
/// with the larger prior; at `q0 = 1/2` exactly they stay randomized. The
/// scan verifies that the decisions form a `zero.. tie.. one..` pattern and
/// reports [`DecisionError::ThresholdNotMonotone`] otherwise instead of
/// returning a silently wrong threshold.
pub fn map_threshold(
    source: &BpskSource,
    cfg: &ReceiverConfig,
) -> Result<DecisionRule, DecisionError> {
    let q0 = source.q0();
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(DecisionError::PriorOutOfRange { q0 });
    }
    let p0 = symbol_params(source, cfg, Symbol::Zero);
    let p1 = symbol_params(source, cfg, Symbol::One);
    if p0 == p1 {
        return Err(DecisionError::DegenerateChannel);
    }

    let grid = delta_grid(source, cfg);
    let mut delta_th = *grid.start() - 1;
    let mut ties = Vec::new();
    // 0 while seeing zeros, 1 inside a tie run, 2 once ones begin.
    let mut stage = 0u8;
    for delta in grid {
        let w0 = q0 * skellam::pmf(delta, &p0);
        let w1 = source.q1() * skellam::pmf(delta, &p1);
        if w0 == 0.0 && w1 == 0.0 {
            continue; // unreachable outcome, carries no mass on either side
        }
        let choice = if w0 > w1 {
            MapChoice::Zero
        } else if w1 > w0 {
            MapChoice::One
        } else if q0 > 0.5 {
            MapChoice::Zero
        } else if q0 < 0.5 {
            MapChoice::One
        } else {
            MapChoice::Tie
        };
        match choice {
            MapChoice::Zero => {
                if stage > 0 {
                    return Err(DecisionError::ThresholdNotMonotone { delta });
                }
                delta_th = delta;
            }
            MapChoice::Tie => {
                if stage > 1 {
                    return Err(DecisionError::ThresholdNotMonotone { delta });
                }
                stage = 1;
                ties.push(delta);
            }
            MapChoice::One => stage = 2,
        }
    }
    Ok(DecisionRule::MapThreshold {
        delta_th,
        randomized_ties: ties,
    })
}

/// Conditional probabilities of the decoded binary channel under `rule`.
pub fn channel_matrix(
    rule: &DecisionRule,
    source: &BpskSource,
    cfg: &ReceiverConfig,
) -> Result<ChannelMatrix, DecisionError> {
    let mut p = [[0.0; 2]; 2];
    match rule {
        DecisionRule::SignRandomized => {
            if cfg.tau() != 0.5 {
                return Err(DecisionError::RuleRequiresBalancedSplitter { tau: cfg.tau() });
            }
            for symbol in Symbol::BOTH {
                let params = symbol_params(source, cfg, symbol);
                let s0 = skellam::pmf(0, &params);
                let k = symbol.index();
                p[0][k] = skellam::tail(Tail::Below, -1, &params) + source.q0() * s0;
                p[1][k] = skellam::tail(Tail::Above, 1, &params) + source.q1() * s0;
            }
        }
        DecisionRule::MapThreshold {
            delta_th,
            randomized_ties,
        } => {
            let above_from = randomized_ties.iter().max().map_or(delta_th + 1, |t| t + 1);
            for symbol in Symbol::BOTH {
                let params = symbol_params(source, cfg, symbol);
                let tie_mass: f64 = randomized_ties
                    .iter()
                    .map(|&d| skellam::pmf(d, &params))
                    .sum();
                let k = symbol.index();
                p[0][k] = skellam::tail(Tail::Below, *delta_th, &params) + source.q0() * tie_mass;
                p[1][k] = skellam::tail(Tail::Above, above_from, &params) + source.q1() * tie_mass;
            }
        }
    }
    Ok(ChannelMatrix::new(p))
}

/// `P_err = q0 p(1|0) + q1 p(0|1)`.
pub fn error_probability(matrix: &ChannelMatrix, q0: f64) -> f64 {
    q0 * matrix.prob(Symbol::One, Symbol::Zero)
        + (1.0 - q0) * matrix.prob(Symbol::Zero, Symbol::One)
}

/// Mutual information of the decoded binary channel, in bits, with the
/// convention `0 log 0 = 0`.
pub fn mutual_information(matrix: &ChannelMatrix, q0: f64) -> f64 {
    let q = [q0, 1.0 - q0];
    let marginal = [
        q[0] * matrix.p[0][0] + q[1] * matrix.p[0][1],
        q[0] * matrix.p[1][0] + q[1] * matrix.p[1][1],
    ];
    let mut bits = 0.0;
    for (row, m) in matrix.p.iter().zip(marginal) {
        for (&pjk, &qk) in row.iter().zip(q.iter()) {
            if pjk > 0.0 && m > 0.0 {
                bits += qk * pjk * (pjk / m).log2();
            }
        }
    }
    bits.max(0.0)
}

/// Mutual information between the symbol and the raw (unbinned) integer
/// outcome, over the truncated grid. Any binary decision rule on the same
/// channel is bounded above by this quantity.
pub fn mutual_information_full(source: &BpskSource, cfg: &ReceiverConfig) -> f64 {
    let q = [source.q0(), source.q1()];
    let params = [
        symbol_params(source, cfg, Symbol::Zero),
        symbol_params(source, cfg, Symbol::One),
    ];
    let mut bits = 0.0;
    for delta in delta_grid(source, cfg) {
        let s = [
            skellam::pmf(delta, &params[0]),
            skellam::pmf(delta, &params[1]),
        ];
        let marginal = q[0] * s[0] + q[1] * s[1];
        for k in 0..2 {
            if s[k] > 0.0 && marginal > 0.0 {
                bits += q[k] * s[k] * (s[k] / marginal).log2();
            }
        }
    }
    bits.max(0.0)
}

/// Error probability and mutual information of a decoded channel.
pub fn figures_of_merit(matrix: &ChannelMatrix, q0: f64) -> FiguresOfMerit {
    FiguresOfMerit {
        p_err: error_probability(matrix, q0),
        mi_bits: mutual_information(matrix, q0),
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen high-precision reference values
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fig_balanced(z_sq: f64) -> (BpskSource, ReceiverConfig) {
        (
            BpskSource::new(1.97, 0.5).unwrap(),
            ReceiverConfig::new(z_sq, 0.5, 0.91).unwrap(),
        )
    }

    fn fig_unbalanced(q0: f64) -> (BpskSource, ReceiverConfig) {
        (
            BpskSource::new(2.37, q0).unwrap(),
            ReceiverConfig::new(10.88, 0.545, 0.86).unwrap(),
        )
    }

    #[test]
    fn posterior_is_half_at_the_inconclusive_outcome() {
        let source = BpskSource::new(1.5, 0.5).unwrap();
        let cfg = ReceiverConfig::new(4.0, 0.5, 0.8).unwrap();
        let p0 = map_posterior(Symbol::Zero, 0, &source, &cfg).unwrap();
        let p1 = map_posterior(Symbol::One, 0, &source, &cfg).unwrap();
        assert_abs_diff_eq!(p0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p0 + p1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn posterior_follows_a_certain_prior() {
        let source = BpskSource::new(1.5, 1.0).unwrap();
        let cfg = ReceiverConfig::new(4.0, 0.5, 0.8).unwrap();
        for delta in [-3, 0, 2] {
            assert_eq!(
                map_posterior(Symbol::Zero, delta, &source, &cfg).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn posterior_unbalanced_reference() {
        // mpmath: q0 = 0.7, delta = 0 on the unbalanced figure point
        let (source, cfg) = fig_unbalanced(0.7);
        let p0 = map_posterior(Symbol::Zero, 0, &source, &cfg).unwrap();
        assert_relative_eq!(p0, 0.395_700_510_592_888_77, max_relative = 1e-11);
    }

    #[test]
    fn balanced_symmetric_threshold_ties_at_zero() {
        let source = BpskSource::new(2.0, 0.5).unwrap();
        let cfg = ReceiverConfig::new(8.0, 0.5, 1.0).unwrap();
        match map_threshold(&source, &cfg).unwrap() {
            DecisionRule::MapThreshold {
                delta_th,
                randomized_ties,
            } => {
                assert_eq!(delta_th, -1);
                assert_eq!(randomized_ties, vec![0]);
            }
            other => panic!("unexpected rule {other:?}"),
        }
    }

    #[test]
    fn unbalanced_thresholds_match_scan_references() {
        // mpmath brute-force scan over delta in [-60, 60]
        for (q0, expected) in [(0.5, -1), (0.6, -1), (0.7, -1), (0.8, 0), (0.9, 0)] {
            let (source, cfg) = fig_unbalanced(q0);
            match map_threshold(&source, &cfg).unwrap() {
                DecisionRule::MapThreshold {
                    delta_th,
                    randomized_ties,
                } => {
                    assert_eq!(delta_th, expected, "q0 = {q0}");
                    assert!(
                        randomized_ties.is_empty(),
                        "no exact ties off the symmetric point"
                    );
                }
                other => panic!("unexpected rule {other:?}"),
            }
        }
    }

    #[test]
    fn threshold_non_decreasing_in_prior() {
        let cfg = ReceiverConfig::new(10.88, 0.545, 0.86).unwrap();
        let mut prev = i64::MIN;
        for i in 1..20 {
            let q0 = i as f64 / 20.0;
            let source = BpskSource::new(2.37, q0).unwrap();
            let DecisionRule::MapThreshold { delta_th, .. } = map_threshold(&source, &cfg).unwrap()
            else {
                unreachable!()
            };
            assert!(delta_th >= prev, "q0 = {q0}: {delta_th} < {prev}");
            prev = delta_th;
        }
    }

    #[test]
    fn map_threshold_error_paths() {
        let cfg = ReceiverConfig::new(10.88, 0.545, 0.86).unwrap();
        let certain = BpskSource::new(2.37, 1.0).unwrap();
        assert!(matches!(
            map_threshold(&certain, &cfg),
            Err(DecisionError::PriorOutOfRange { .. })
        ));
        let dark_source = BpskSource::new(0.0, 0.5).unwrap();
        assert!(matches!(
            map_threshold(&dark_source, &cfg),
            Err(DecisionError::DegenerateChannel)
        ));
    }

    #[test]
    fn sign_rule_rejects_unbalanced_splitter() {
        let (source, cfg) = fig_unbalanced(0.5);
        assert!(matches!(
            channel_matrix(&DecisionRule::SignRandomized, &source, &cfg),
            Err(DecisionError::RuleRequiresBalancedSplitter { .. })
        ));
    }

    #[test]
    fn dark_signal_gives_symmetric_columns() {
        // alpha = 0: the symbols are indistinguishable and
        // p(0|k) = (1 - S_0)/2 + q0 S_0.
        let source = BpskSource::new(0.0, 0.3).unwrap();
        let cfg = ReceiverConfig::new(6.0, 0.5, 0.9).unwrap();
        let m = channel_matrix(&DecisionRule::SignRandomized, &source, &cfg).unwrap();
        let s0 = skellam::pmf(0, &symbol_params(&source, &cfg, Symbol::Zero));
        let expected = (1.0 - s0) / 2.0 + 0.3 * s0;
        for k in Symbol::BOTH {
            assert_relative_eq!(m.prob(Symbol::Zero, k), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn columns_sum_to_one() {
        let (source, cfg) = fig_balanced(10.0);
        let m = channel_matrix(&DecisionRule::SignRandomized, &source, &cfg).unwrap();
        for k in Symbol::BOTH {
            let sum = m.prob(Symbol::Zero, k) + m.prob(Symbol::One, k);
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
        }
        let (source, cfg) = fig_unbalanced(0.7);
        let rule = map_threshold(&source, &cfg).unwrap();
        let m = channel_matrix(&rule, &source, &cfg).unwrap();
        for k in Symbol::BOTH {
            let sum = m.prob(Symbol::Zero, k) + m.prob(Symbol::One, k);
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn balanced_figure_point_matches_reference() {
        // mpmath on the LO-sweep figure point, z^2 = 10
        let (source, cfg) = fig_balanced(10.0);
        let m = channel_matrix(&DecisionRule::SignRandomized, &source, &cfg).unwrap();
        assert_relative_eq!(
            m.prob(Symbol::One, Symbol::Zero),
            0.006_730_245_881_932_415,
            max_relative = 1e-10
        );
        let fom = figures_of_merit(&m, source.q0());
        assert_relative_eq!(fom.p_err, 0.006_730_245_881_932_415, max_relative = 1e-10);
        assert_relative_eq!(fom.mi_bits, 0.941_763_489_699_427_2, max_relative = 1e-10);
    }

    #[test]
    fn no_signal_or_no_lo_is_a_coin_flip() {
        for (alpha_sq, z_sq) in [(0.0, 10.0), (1.97, 0.0)] {
            let source = BpskSource::new(alpha_sq, 0.5).unwrap();
            let cfg = ReceiverConfig::new(z_sq, 0.5, 0.91).unwrap();
            let m = channel_matrix(&DecisionRule::SignRandomized, &source, &cfg).unwrap();
            let fom = figures_of_merit(&m, 0.5);
            assert_abs_diff_eq!(fom.p_err, 0.5, epsilon = 1e-10);
            assert_abs_diff_eq!(fom.mi_bits, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn deterministic_input_carries_no_information() {
        let (source, cfg) = fig_balanced(10.0);
        let m = channel_matrix(&DecisionRule::SignRandomized, &source, &cfg).unwrap();
        assert_eq!(mutual_information(&m, 1.0), 0.0);
        assert_eq!(mutual_information(&m, 0.0), 0.0);
    }

    #[test]
    fn near_perfect_channel_approaches_one_bit() {
        let source = BpskSource::new(25.0, 0.5).unwrap();
        let cfg = ReceiverConfig::new(25.0, 0.5, 1.0).unwrap();
        let m = channel_matrix(&DecisionRule::SignRandomized, &source, &cfg).unwrap();
        let mi = mutual_information(&m, 0.5);
        assert!((1.0 - mi).abs() < 1e-6, "mi = {mi}");
    }

    #[test]
    fn balanced_map_equals_sign_rule() {
        let (source, cfg) = fig_balanced(10.0);
        let sign = channel_matrix(&DecisionRule::SignRandomized, &source, &cfg).unwrap();
        let rule = map_threshold(&source, &cfg).unwrap();
        let map = channel_matrix(&rule, &source, &cfg).unwrap();
        for j in Symbol::BOTH {
            for k in Symbol::BOTH {
                assert_relative_eq!(sign.prob(j, k), map.prob(j, k), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn unbinned_outcome_reference_and_dominance() {
        // mpmath: MI of the raw outcome at the unbalanced figure point
        let (source, cfg) = fig_unbalanced(0.5);
        let full = mutual_information_full(&source, &cfg);
        assert_relative_eq!(full, 0.978_040_175_350_682_65, max_relative = 1e-10);
        let rule = map_threshold(&source, &cfg).unwrap();
        let m = channel_matrix(&rule, &source, &cfg).unwrap();
        assert!(mutual_information(&m, 0.5) < full);
    }

    #[test]
    fn unbinned_outcome_vanishes_without_signal() {
        let source = BpskSource::new(0.0, 0.5).unwrap();
        let cfg = ReceiverConfig::new(10.0, 0.5, 0.9).unwrap();
        assert_abs_diff_eq!(mutual_information_full(&source, &cfg), 0.0, epsilon = 1e-12);
    }
}
