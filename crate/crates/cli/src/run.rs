//! Point evaluation and sweep orchestration.

use rayon::prelude::*;

use wfh_core::baselines::{helstrom_bound, homodyne_limit};
use wfh_core::decision::{channel_matrix, figures_of_merit, map_threshold, DecisionError};
use wfh_core::montecarlo::{run_protocol, McProtocol, McRun};
use wfh_core::receiver::ReceiverError;
use wfh_core::{BpskSource, DecisionRule, FiguresOfMerit, ReceiverConfig};

use crate::config::{with_swept_value, RuleKind, RunConfig, SweepParam};
use crate::CliError;

/// Everything one CSV row needs.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub sweep: Option<(SweepParam, f64)>,
    pub fom: FiguresOfMerit,
    pub mc: Option<McRun>,
    pub p_err_helstrom: f64,
    pub p_err_homodyne: f64,
    pub delta_th: Option<i64>,
}

impl From<ReceiverError> for CliError {
    fn from(e: ReceiverError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        match e {
            // A non-threshold MAP scan means the model broke down, not the
            // configuration.
            DecisionError::ThresholdNotMonotone { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Evaluate one parameter point: analytic figures of merit, baselines, and
/// optional Monte Carlo estimates seeded with `mc_seed`.
pub fn evaluate_point(
    cfg: &RunConfig,
    sweep: Option<(SweepParam, f64)>,
    mc_seed: u64,
) -> Result<PointResult, CliError> {
    let source = BpskSource::new(cfg.alpha_sq, cfg.q0)?;
    let receiver = ReceiverConfig::new(cfg.z_sq, cfg.tau, cfg.xi)?.with_dark_mean(cfg.dark_mean)?;

    let rule = match cfg.rule {
        RuleKind::Sign => DecisionRule::SignRandomized,
        RuleKind::Map => match cfg.delta_th {
            Some(pinned) => DecisionRule::MapThreshold {
                delta_th: pinned,
                randomized_ties: vec![],
            },
            None => map_threshold(&source, &receiver)?,
        },
    };
    let delta_th = match &rule {
        DecisionRule::MapThreshold { delta_th, .. } => Some(*delta_th),
        DecisionRule::SignRandomized => None,
    };

    let matrix = channel_matrix(&rule, &source, &receiver)?;
    let fom = figures_of_merit(&matrix, cfg.q0);

    let mc = if cfg.mc {
        let protocol = McProtocol::new(cfg.set_size, cfg.n_sets, mc_seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Some(run_protocol(&source, &receiver, &rule, &protocol))
    } else {
        None
    };

    Ok(PointResult {
        sweep,
        fom,
        mc,
        p_err_helstrom: helstrom_bound(cfg.alpha_sq, cfg.q0),
        p_err_homodyne: homodyne_limit(cfg.alpha_sq, cfg.q0),
        delta_th,
    })
}

/// splitmix64; derives independent per-point Monte Carlo seeds from the
/// master seed and the grid index, so worker scheduling cannot reorder draws.
pub fn point_seed(master: u64, index: usize) -> u64 {
    let mut x = master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Evaluate every grid point, concurrently up to `cfg.workers` threads,
/// assembling results strictly in grid order.
pub fn evaluate_sweep(
    cfg: &RunConfig,
    param: SweepParam,
    grid: &[f64],
) -> Result<Vec<PointResult>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Failure(format!("worker pool: {e}")))?;
    pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(index, &value)| {
                let point_cfg = with_swept_value(cfg, param, value);
                crate::config::validate(&point_cfg).map_err(|e| match e {
                    CliError::Config(msg) => {
                        CliError::Config(format!("{msg} (sweep point {index})"))
                    }
                    other => other,
                })?;
                evaluate_point(
                    &point_cfg,
                    Some((param, value)),
                    point_seed(cfg.seed, index),
                )
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_seeds_differ_and_are_stable() {
        let a = point_seed(7, 0);
        let b = point_seed(7, 1);
        assert_ne!(a, b);
        assert_eq!(a, point_seed(7, 0));
    }

    #[test]
    fn null_point_is_a_coin_flip() {
        let cfg = RunConfig {
            alpha_sq: 0.0,
            ..Default::default()
        };
        let r = evaluate_point(&cfg, None, 1).unwrap();
        assert!((r.fom.p_err - 0.5).abs() < 1e-10);
        assert!(r.fom.mi_bits.abs() < 1e-10);
        assert_eq!(r.delta_th, None);
    }

    #[test]
    fn figure_point_with_map_rule_reports_threshold() {
        let cfg = RunConfig {
            alpha_sq: 2.37,
            z_sq: 10.88,
            tau: 0.545,
            xi: 0.86,
            q0: 0.7,
            rule: RuleKind::Map,
            ..Default::default()
        };
        let r = evaluate_point(&cfg, None, 1).unwrap();
        assert_eq!(r.delta_th, Some(-1));
        assert!(r.p_err_helstrom <= r.fom.p_err);
    }

    #[test]
    fn pinned_threshold_is_honored() {
        let base = RunConfig {
            alpha_sq: 2.37,
            z_sq: 10.88,
            tau: 0.545,
            xi: 0.86,
            q0: 0.7,
            rule: RuleKind::Map,
            ..Default::default()
        };
        let pinned = RunConfig {
            delta_th: Some(3),
            ..base.clone()
        };
        let r = evaluate_point(&pinned, None, 1).unwrap();
        assert_eq!(r.delta_th, Some(3));
        // Off-optimum threshold cannot beat the optimized one.
        let optimal = evaluate_point(&base, None, 1).unwrap();
        assert!(r.fom.p_err >= optimal.fom.p_err);
    }

    #[test]
    fn sweep_rows_follow_grid_order() {
        let cfg = RunConfig {
            workers: 2,
            ..Default::default()
        };
        let grid = [2.0, 5.0, 9.0, 14.0];
        let rows = evaluate_sweep(&cfg, SweepParam::ZSq, &grid).unwrap();
        assert_eq!(rows.len(), 4);
        for (row, &value) in rows.iter().zip(&grid) {
            assert_eq!(row.sweep, Some((SweepParam::ZSq, value)));
        }
        // Stronger LO discriminates better on this channel.
        assert!(rows[3].fom.p_err < rows[0].fom.p_err);
    }

    #[test]
    fn invalid_sweep_point_names_the_field() {
        let cfg = RunConfig {
            ..Default::default()
        };
        let err = evaluate_sweep(&cfg, SweepParam::Q0, &[0.5, 1.5]).unwrap_err();
        match err {
            CliError::Config(msg) => assert!(msg.contains("q0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
