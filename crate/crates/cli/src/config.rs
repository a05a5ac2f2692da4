//! Run configuration: JSON config files, command-line overrides, defaults.
//!
//! Precedence per field is flag > config file > environment (`WFH_SEED`, for
//! the seed only) > built-in default.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_SET_SIZE: u64 = 50_000;
pub const DEFAULT_N_SETS: u32 = 3;
pub const DEFAULT_SEED: u64 = 1;
pub const SEED_ENV_VAR: &str = "WFH_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Randomized sign rule (balanced beam splitter only).
    Sign,
    /// Maximum a posteriori threshold.
    Map,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[clap(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    AlphaSq,
    ZSq,
    Q0,
    Tau,
    Xi,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::AlphaSq => "alpha_sq",
            SweepParam::ZSq => "z_sq",
            SweepParam::Q0 => "q0",
            SweepParam::Tau => "tau",
            SweepParam::Xi => "xi",
        }
    }
}

/// Grid specification: either explicit values or a `start:stop:n` /
/// comma-list expression.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Expr(String),
}

/// JSON config file contents; every field optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha_sq: Option<f64>,
    pub q0: Option<f64>,
    pub z_sq: Option<f64>,
    pub tau: Option<f64>,
    pub xi: Option<f64>,
    pub dark_mean: Option<f64>,
    pub rule: Option<RuleKind>,
    pub delta_th: Option<i64>,
    pub sweep: Option<SweepParam>,
    pub grid: Option<GridSpec>,
    pub mc: Option<bool>,
    pub set_size: Option<u64>,
    pub n_sets: Option<u32>,
    pub seed: Option<u64>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("config: cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config: {}: {e}", path.display())))
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub alpha_sq: f64,
    pub q0: f64,
    pub z_sq: f64,
    pub tau: f64,
    pub xi: f64,
    pub dark_mean: f64,
    pub rule: RuleKind,
    /// Pin the MAP threshold instead of optimizing it (fixed-threshold
    /// comparison mode).
    pub delta_th: Option<i64>,
    pub sweep: Option<SweepParam>,
    pub grid: Option<Vec<f64>>,
    pub mc: bool,
    pub set_size: u64,
    pub n_sets: u32,
    pub seed: u64,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha_sq: 1.97,
            q0: 0.5,
            z_sq: 10.0,
            tau: 0.5,
            xi: 1.0,
            dark_mean: 0.0,
            rule: RuleKind::Sign,
            delta_th: None,
            sweep: None,
            grid: None,
            mc: false,
            set_size: DEFAULT_SET_SIZE,
            n_sets: DEFAULT_N_SETS,
            seed: DEFAULT_SEED,
            csv: None,
            svg: None,
            workers: 0,
        }
    }
}

/// Parse a grid expression: `start:stop:n` or a comma-separated list.
pub fn parse_grid(expr: &str) -> Result<Vec<f64>, CliError> {
    let bad = |detail: &str| CliError::Config(format!("grid: {detail} (got {expr:?})"));
    let parts: Vec<&str> = expr.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("bad stop"))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("bad point count"))?;
        if n == 0 {
            return Err(bad("point count must be positive"));
        }
        if n == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (n - 1) as f64;
        return Ok((0..n).map(|i| start + i as f64 * step).collect());
    }
    if parts.len() != 1 {
        return Err(bad("expected start:stop:n or a comma-separated list"));
    }
    expr.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad("bad value in list"))
        })
        .collect()
}

fn resolve_grid(spec: GridSpec) -> Result<Vec<f64>, CliError> {
    match spec {
        GridSpec::Values(v) => Ok(v),
        GridSpec::Expr(e) => parse_grid(&e),
    }
}

/// Built-in default grids mirroring the explored parameter ranges: the
/// mesoscopic LO regime for `z_sq` and the skewed-prior band for `q0`.
fn default_grid(param: SweepParam) -> Option<Vec<f64>> {
    match param {
        SweepParam::ZSq => parse_grid("0.5:30:50").ok(),
        SweepParam::Q0 => parse_grid("0.5:0.95:10").ok(),
        _ => None,
    }
}

/// Merge CLI flags over a config file over defaults.
pub struct Overrides {
    pub alpha_sq: Option<f64>,
    pub q0: Option<f64>,
    pub z_sq: Option<f64>,
    pub tau: Option<f64>,
    pub xi: Option<f64>,
    pub dark_mean: Option<f64>,
    pub rule: Option<RuleKind>,
    pub delta_th: Option<i64>,
    pub sweep: Option<SweepParam>,
    pub grid: Option<String>,
    pub mc: bool,
    pub set_size: Option<u64>,
    pub n_sets: Option<u32>,
    pub seed: Option<u64>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub workers: Option<usize>,
}

pub fn resolve(file: FileConfig, flags: Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();

    macro_rules! pick {
        ($field:ident) => {
            if let Some(v) = flags.$field.or(file.$field) {
                cfg.$field = v;
            }
        };
    }
    pick!(alpha_sq);
    pick!(q0);
    pick!(z_sq);
    pick!(tau);
    pick!(xi);
    pick!(dark_mean);
    pick!(rule);
    pick!(set_size);
    pick!(n_sets);
    pick!(workers);
    cfg.delta_th = flags.delta_th.or(file.delta_th);
    cfg.sweep = flags.sweep.or(file.sweep);
    cfg.csv = flags.csv.or(file.csv);
    cfg.svg = flags.svg.or(file.svg);
    cfg.mc = flags.mc || file.mc.unwrap_or(false);

    let env_seed = std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|s| s.parse::<u64>().ok());
    if let Some(seed) = flags.seed.or(file.seed).or(env_seed) {
        cfg.seed = seed;
    }

    cfg.grid = match (flags.grid, file.grid) {
        (Some(expr), _) => Some(parse_grid(&expr)?),
        (None, Some(spec)) => Some(resolve_grid(spec)?),
        (None, None) => None,
    };

    Ok(cfg)
}

/// Domain validation; diagnostics name the offending field.
pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let field = |name: &str, value: f64, ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "{name}: value {value} out of domain"
            )))
        }
    };
    field(
        "alpha_sq",
        cfg.alpha_sq,
        cfg.alpha_sq.is_finite() && cfg.alpha_sq >= 0.0,
    )?;
    field(
        "q0",
        cfg.q0,
        cfg.q0.is_finite() && (0.0..=1.0).contains(&cfg.q0),
    )?;
    field("z_sq", cfg.z_sq, cfg.z_sq.is_finite() && cfg.z_sq >= 0.0)?;
    field(
        "tau",
        cfg.tau,
        cfg.tau.is_finite() && cfg.tau > 0.0 && cfg.tau < 1.0,
    )?;
    field(
        "xi",
        cfg.xi,
        cfg.xi.is_finite() && (0.0..=1.0).contains(&cfg.xi),
    )?;
    field(
        "dark_mean",
        cfg.dark_mean,
        cfg.dark_mean.is_finite() && cfg.dark_mean >= 0.0,
    )?;
    if cfg.mc {
        if cfg.set_size == 0 {
            return Err(CliError::Config("set_size: must be at least 1".into()));
        }
        if cfg.n_sets < 2 {
            return Err(CliError::Config(format!(
                "n_sets: error bars need at least 2 sets, got {}",
                cfg.n_sets
            )));
        }
    }
    if cfg.delta_th.is_some() && cfg.rule != RuleKind::Map {
        return Err(CliError::Config(
            "delta_th: only meaningful with rule = map".into(),
        ));
    }
    if let Some(grid) = &cfg.grid {
        if grid.is_empty() {
            return Err(CliError::Config("grid: must not be empty".into()));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(CliError::Config(
                "grid: values must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Resolve the sweep request into a parameter and grid; used by `sweep` only.
pub fn sweep_request(cfg: &RunConfig) -> Result<(SweepParam, Vec<f64>), CliError> {
    let param = cfg
        .sweep
        .ok_or_else(|| CliError::Config("sweep: no swept parameter given".into()))?;
    match cfg.grid.clone().or_else(|| default_grid(param)) {
        Some(grid) if grid.is_empty() => Err(CliError::Config("grid: must not be empty".into())),
        Some(grid) => Ok((param, grid)),
        None => Err(CliError::Config(format!(
            "grid: no grid given and no default exists for {}",
            param.name()
        ))),
    }
}

/// Apply a swept value to a copy of the base configuration.
pub fn with_swept_value(cfg: &RunConfig, param: SweepParam, value: f64) -> RunConfig {
    let mut point = cfg.clone();
    match param {
        SweepParam::AlphaSq => point.alpha_sq = value,
        SweepParam::ZSq => point.z_sq = value,
        SweepParam::Q0 => point.q0 = value,
        SweepParam::Tau => point.tau = value,
        SweepParam::Xi => point.xi = value,
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_overrides() -> Overrides {
        Overrides {
            alpha_sq: None,
            q0: None,
            z_sq: None,
            tau: None,
            xi: None,
            dark_mean: None,
            rule: None,
            delta_th: None,
            sweep: None,
            grid: None,
            mc: false,
            set_size: None,
            n_sets: None,
            seed: None,
            csv: None,
            svg: None,
            workers: None,
        }
    }

    #[test]
    fn grid_expressions() {
        assert_eq!(parse_grid("1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("0.5, 1.5, 7").unwrap(), vec![0.5, 1.5, 7.0]);
        assert_eq!(parse_grid("4.25").unwrap(), vec![4.25]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:5:0").is_err());
    }

    #[test]
    fn flag_beats_file() {
        let file = FileConfig {
            tau: Some(0.545),
            ..Default::default()
        };
        let mut flags = no_overrides();
        flags.tau = Some(0.4);
        let cfg = resolve(file, flags).unwrap();
        assert_eq!(cfg.tau, 0.4);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "alpha_sq": 2.37, "q0": 0.7, "z_sq": 10.88, "tau": 0.545, "xi": 0.86,
            "rule": "map", "sweep": "q0", "grid": [0.5, 0.7, 0.9],
            "mc": true, "set_size": 1000, "n_sets": 3, "seed": 7
        }"#;
        let file: FileConfig = serde_json::from_str(text).unwrap();
        let cfg = resolve(file, no_overrides()).unwrap();
        assert_eq!(cfg.rule, RuleKind::Map);
        assert_eq!(cfg.sweep, Some(SweepParam::Q0));
        assert_eq!(cfg.grid.as_deref(), Some(&[0.5, 0.7, 0.9][..]));
        assert!(cfg.mc);
        validate(&cfg).unwrap();
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = serde_json::from_str::<FileConfig>(r#"{"alpha2": 1.0}"#);
        assert!(err.is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let cfg = RunConfig {
            tau: 1.2,
            ..Default::default()
        };
        match validate(&cfg) {
            Err(CliError::Config(msg)) => assert!(msg.contains("tau"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn default_grids_exist_for_the_standard_sweeps() {
        let cfg = RunConfig {
            sweep: Some(SweepParam::ZSq),
            ..Default::default()
        };
        let (_, grid) = sweep_request(&cfg).unwrap();
        assert_eq!(grid.len(), 50);
        assert_eq!(grid[0], 0.5);
        assert_eq!(*grid.last().unwrap(), 30.0);
        let cfg = RunConfig {
            sweep: Some(SweepParam::Tau),
            ..Default::default()
        };
        assert!(sweep_request(&cfg).is_err());
    }
}
