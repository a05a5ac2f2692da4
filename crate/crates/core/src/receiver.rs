//! Physical model of the weak-field homodyne interferometer.
//!
//! A BPSK source emits coherent pulses of energy `alpha_sq` with phase 0 or
//! pi; the receiver mixes them with a local oscillator of energy `z_sq` on a
//! beam splitter of transmissivity `tau` and counts photons at both outputs.
//! Mode mismatch between signal and LO enters through a single visibility
//! scalar `xi` that scales the interference term of the port means.

use std::f64::consts::PI;
use std::fmt;

use crate::skellam::SkellamParams;

/// The two classical symbols, encoded as coherent states of opposite phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// Phase pi: the state `|-alpha>`.
    Zero,
    /// Phase 0: the state `|alpha>`.
    One,
}

impl Symbol {
    pub const BOTH: [Symbol; 2] = [Symbol::Zero, Symbol::One];

    pub fn phase(self) -> f64 {
        match self {
            Symbol::Zero => PI,
            Symbol::One => 0.0,
        }
    }

    /// `cos` of the encoding phase, exact (`cos(pi)` carries no rounding).
    pub fn cos_phase(self) -> f64 {
        match self {
            Symbol::Zero => -1.0,
            Symbol::One => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Symbol::Zero => 0,
            Symbol::One => 1,
        }
    }

    pub fn other(self) -> Symbol {
        match self {
            Symbol::Zero => Symbol::One,
            Symbol::One => Symbol::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReceiverError {
    /// A source or receiver parameter is outside its domain.
    InvalidParameter { name: &'static str, value: f64 },
    /// An observed transmitted-port mean falls outside the band reachable by
    /// any phase.
    MeanOutOfBand { observed: f64, low: f64, high: f64 },
    /// Phase retrieval is undefined when the interference amplitude is zero.
    NoInterference,
}

impl fmt::Display for ReceiverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReceiverError::InvalidParameter { name, value } => {
                write!(f, "parameter {name} out of domain: {value}")
            }
            ReceiverError::MeanOutOfBand {
                observed,
                low,
                high,
            } => write!(
                f,
                "observed mean {observed} outside the reachable band [{low}, {high}]"
            ),
            ReceiverError::NoInterference => {
                write!(f, "interference amplitude is zero; phase is undefined")
            }
        }
    }
}

impl std::error::Error for ReceiverError {}

/// BPSK sender: signal energy and the prior of symbol zero. Phases are fixed
/// to `phi_0 = pi`, `phi_1 = 0`, with `alpha = +sqrt(alpha_sq)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpskSource {
    alpha_sq: f64,
    q0: f64,
}

impl BpskSource {
    pub fn new(alpha_sq: f64, q0: f64) -> Result<Self, ReceiverError> {
        if !alpha_sq.is_finite() || alpha_sq < 0.0 {
            return Err(ReceiverError::InvalidParameter {
                name: "alpha_sq",
                value: alpha_sq,
            });
        }
        if !q0.is_finite() || !(0.0..=1.0).contains(&q0) {
            return Err(ReceiverError::InvalidParameter {
                name: "q0",
                value: q0,
            });
        }
        Ok(Self { alpha_sq, q0 })
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_sq.sqrt()
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn q1(&self) -> f64 {
        1.0 - self.q0
    }

    pub fn prior(&self, symbol: Symbol) -> f64 {
        match symbol {
            Symbol::Zero => self.q0(),
            Symbol::One => self.q1(),
        }
    }
}

/// The WFH apparatus: LO energy, beam-splitter transmissivity, visibility,
/// and an optional additive dark-count mean per port (zero by default; the
/// analytic model of the measured device treats dark counts as negligible).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceiverConfig {
    z_sq: f64,
    tau: f64,
    xi: f64,
    dark_mean: f64,
}

impl ReceiverConfig {
    pub fn new(z_sq: f64, tau: f64, xi: f64) -> Result<Self, ReceiverError> {
        if !z_sq.is_finite() || z_sq < 0.0 {
            return Err(ReceiverError::InvalidParameter {
                name: "z_sq",
                value: z_sq,
            });
        }
        if !tau.is_finite() || tau <= 0.0 || tau >= 1.0 {
            return Err(ReceiverError::InvalidParameter {
                name: "tau",
                value: tau,
            });
        }
        if !xi.is_finite() || !(0.0..=1.0).contains(&xi) {
            return Err(ReceiverError::InvalidParameter {
                name: "xi",
                value: xi,
            });
        }
        Ok(Self {
            z_sq,
            tau,
            xi,
            dark_mean: 0.0,
        })
    }

    pub fn with_dark_mean(mut self, dark_mean: f64) -> Result<Self, ReceiverError> {
        if !dark_mean.is_finite() || dark_mean < 0.0 {
            return Err(ReceiverError::InvalidParameter {
                name: "dark_mean",
                value: dark_mean,
            });
        }
        self.dark_mean = dark_mean;
        Ok(self)
    }

    pub fn z_sq(&self) -> f64 {
        self.z_sq
    }

    pub fn z(&self) -> f64 {
        self.z_sq.sqrt()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn dark_mean(&self) -> f64 {
        self.dark_mean
    }
}

/// Mean detected photon numbers at the transmitted and reflected ports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortMeans {
    pub mu_t: f64,
    pub mu_r: f64,
}

impl From<PortMeans> for SkellamParams {
    fn from(means: PortMeans) -> Self {
        SkellamParams::new(means.mu_t, means.mu_r)
            .expect("port means are nonnegative by construction")
    }
}

/// Port means for an arbitrary relative phase:
///
/// ```text
/// mu_t = tau alpha^2 + (1-tau) z^2 + 2 xi sqrt(tau(1-tau)) z alpha cos(phi) + dark
/// mu_r = (1-tau) alpha^2 + tau z^2 - 2 xi sqrt(tau(1-tau)) z alpha cos(phi) + dark
/// ```
pub fn port_means(source: &BpskSource, cfg: &ReceiverConfig, phi: f64) -> PortMeans {
    port_means_cos(source, cfg, phi.cos())
}

/// Port means at a symbol's encoding phase, with the exact `cos = +/-1`.
pub fn port_means_for_symbol(
    source: &BpskSource,
    cfg: &ReceiverConfig,
    symbol: Symbol,
) -> PortMeans {
    port_means_cos(source, cfg, symbol.cos_phase())
}

fn port_means_cos(source: &BpskSource, cfg: &ReceiverConfig, cos_phi: f64) -> PortMeans {
    let interference = interference_amplitude(source, cfg) * cos_phi;
    let mu_t = cfg.tau * source.alpha_sq + (1.0 - cfg.tau) * cfg.z_sq + interference;
    let mu_r = (1.0 - cfg.tau) * source.alpha_sq + cfg.tau * cfg.z_sq - interference;
    // Full destructive interference can land at -0.0 or a few ulp below zero.
    PortMeans {
        mu_t: (mu_t + cfg.dark_mean).max(0.0),
        mu_r: (mu_r + cfg.dark_mean).max(0.0),
    }
}

fn interference_amplitude(source: &BpskSource, cfg: &ReceiverConfig) -> f64 {
    2.0 * cfg.xi * (cfg.tau * (1.0 - cfg.tau)).sqrt() * cfg.z() * source.alpha()
}

/// Invert the transmitted-port mean for the relative phase on `[0, pi]`.
///
/// The reflected port is deliberately not fused in; it serves as an
/// independent consistency check for callers that have it.
pub fn phase_from_means(
    source: &BpskSource,
    cfg: &ReceiverConfig,
    mu_t_observed: f64,
) -> Result<f64, ReceiverError> {
    let amplitude = interference_amplitude(source, cfg);
    if amplitude == 0.0 {
        return Err(ReceiverError::NoInterference);
    }
    let baseline = cfg.tau * source.alpha_sq + (1.0 - cfg.tau) * cfg.z_sq + cfg.dark_mean;
    let cos_phi = (mu_t_observed - baseline) / amplitude;
    // Endpoint evaluations of port_means can overshoot |cos| = 1 by rounding.
    const SLACK: f64 = 1e-9;
    if !cos_phi.is_finite() || cos_phi.abs() > 1.0 + SLACK {
        return Err(ReceiverError::MeanOutOfBand {
            observed: mu_t_observed,
            low: baseline - amplitude,
            high: baseline + amplitude,
        });
    }
    Ok(cos_phi.clamp(-1.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fig_unbalanced() -> (BpskSource, ReceiverConfig) {
        (
            BpskSource::new(2.37, 0.5).unwrap(),
            ReceiverConfig::new(10.88, 0.545, 0.86).unwrap(),
        )
    }

    #[test]
    fn parameter_domains() {
        assert!(matches!(
            BpskSource::new(-1.0, 0.5),
            Err(ReceiverError::InvalidParameter {
                name: "alpha_sq",
                ..
            })
        ));
        assert!(matches!(
            BpskSource::new(1.0, 1.2),
            Err(ReceiverError::InvalidParameter { name: "q0", .. })
        ));
        assert!(matches!(
            ReceiverConfig::new(1.0, 1.0, 0.5),
            Err(ReceiverError::InvalidParameter { name: "tau", .. })
        ));
        assert!(matches!(
            ReceiverConfig::new(1.0, 0.5, 1.5),
            Err(ReceiverError::InvalidParameter { name: "xi", .. })
        ));
        assert!(matches!(
            ReceiverConfig::new(1.0, 0.5, 0.5)
                .unwrap()
                .with_dark_mean(-0.1),
            Err(ReceiverError::InvalidParameter {
                name: "dark_mean",
                ..
            })
        ));
    }

    #[test]
    fn complete_interference_at_matched_energies() {
        let source = BpskSource::new(1.0, 0.5).unwrap();
        let cfg = ReceiverConfig::new(1.0, 0.5, 1.0).unwrap();
        let m = port_means(&source, &cfg, 0.0);
        assert_eq!(m.mu_t, 2.0);
        assert_eq!(m.mu_r, 0.0);
    }

    #[test]
    fn quadrature_phase_kills_interference() {
        let source = BpskSource::new(2.0, 0.5).unwrap();
        let cfg = ReceiverConfig::new(4.0, 0.5, 0.7).unwrap();
        let m = port_means(&source, &cfg, PI / 2.0);
        assert_abs_diff_eq!(m.mu_t, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.mu_r, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn unbalanced_figure_point() {
        // mpmath: 10.5913665461879180, 2.65863345381208198
        let (source, cfg) = fig_unbalanced();
        let m = port_means_for_symbol(&source, &cfg, Symbol::One);
        assert_relative_eq!(m.mu_t, 10.591_366_546_187_918, max_relative = 1e-12);
        assert_relative_eq!(m.mu_r, 2.658_633_453_812_082, max_relative = 1e-12);
        assert_relative_eq!(m.mu_t + m.mu_r, 2.37 + 10.88, max_relative = 1e-12);
    }

    #[test]
    fn energy_is_conserved_for_any_phase() {
        let source = BpskSource::new(3.1, 0.25).unwrap();
        let cfg = ReceiverConfig::new(7.7, 0.41, 0.83)
            .unwrap()
            .with_dark_mean(0.2)
            .unwrap();
        for i in 0..32 {
            let phi = i as f64 * PI / 16.0;
            let m = port_means(&source, &cfg, phi);
            assert_relative_eq!(
                m.mu_t + m.mu_r - 2.0 * cfg.dark_mean(),
                source.alpha_sq() + cfg.z_sq(),
                max_relative = 1e-12
            );
            assert!(m.mu_t >= 0.0 && m.mu_r >= 0.0);
        }
    }

    #[test]
    fn zero_interference_observation_maps_to_quadrature() {
        let source = BpskSource::new(2.0, 0.5).unwrap();
        let cfg = ReceiverConfig::new(4.0, 0.5, 0.7).unwrap();
        let baseline = 0.5 * 2.0 + 0.5 * 4.0;
        let phi = phase_from_means(&source, &cfg, baseline).unwrap();
        assert_abs_diff_eq!(phi, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn phase_roundtrip_on_grid() {
        let (source, cfg) = fig_unbalanced();
        for phi in [0.0, 0.1, 0.5, 1.0, 2.0, 3.0, PI] {
            let m = port_means(&source, &cfg, phi);
            let back = phase_from_means(&source, &cfg, m.mu_t).unwrap();
            assert_abs_diff_eq!(back, phi, epsilon = 1e-10);
        }
    }

    #[test]
    fn phase_retrieval_error_paths() {
        let (source, cfg) = fig_unbalanced();
        assert!(matches!(
            phase_from_means(&source, &cfg, 1e3),
            Err(ReceiverError::MeanOutOfBand { .. })
        ));
        let dark = ReceiverConfig::new(10.88, 0.545, 0.0).unwrap();
        assert!(matches!(
            phase_from_means(&source, &dark, 5.0),
            Err(ReceiverError::NoInterference)
        ));
    }

    #[test]
    fn balanced_splitter_swaps_ports_under_phase_flip() {
        let source = BpskSource::new(1.3, 0.5).unwrap();
        let cfg = ReceiverConfig::new(9.0, 0.5, 0.9).unwrap();
        for i in 0..16 {
            let phi = i as f64 * PI / 8.0;
            let a = port_means(&source, &cfg, phi);
            let b = port_means(&source, &cfg, phi + PI);
            assert_abs_diff_eq!(a.mu_t, b.mu_r, epsilon = 1e-12);
        }
    }

    #[test]
    fn interference_monotone_in_visibility() {
        let source = BpskSource::new(1.97, 0.5).unwrap();
        let mut prev_t = f64::NEG_INFINITY;
        let mut prev_r = f64::INFINITY;
        for i in 0..=10 {
            let xi = i as f64 / 10.0;
            let cfg = ReceiverConfig::new(10.0, 0.5, xi).unwrap();
            let m = port_means(&source, &cfg, 0.0);
            assert!(m.mu_t >= prev_t && m.mu_r <= prev_r);
            prev_t = m.mu_t;
            prev_r = m.mu_r;
        }
    }
}
