//! Reference discrimination bounds: the quantum-optimal (Helstrom) error and
//! the large-LO homodyne limit.
//!
//! Both assume unit visibility. The homodyne limit is a closed-form Gaussian
//! computation rather than a large-`z_sq` evaluation of the count model, so
//! it can serve as an independent convergence target for the latter.

use statrs::function::erf::erfc;

/// Minimum error probability allowed by quantum mechanics for discriminating
/// `|alpha>` from `|-alpha>` with priors `(q0, 1 - q0)`:
/// `(1 - sqrt(1 - 4 q0 q1 e^{-4 alpha^2})) / 2`.
pub fn helstrom_bound(alpha_sq: f64, q0: f64) -> f64 {
    debug_assert!(alpha_sq >= 0.0 && (0.0..=1.0).contains(&q0));
    let overlap_sq = (-4.0 * alpha_sq).exp();
    let x = 4.0 * q0 * (1.0 - q0) * overlap_sq;
    // (1 - sqrt(1 - x)) / 2 without cancellation for small x.
    0.5 * x / (1.0 + (1.0 - x).sqrt())
}

/// Ideal-homodyne discrimination error in the high-intensity LO limit, with
/// the MAP threshold on the Gaussian quadrature outcome. Reduces to
/// `erfc(sqrt(2) alpha) / 2` at equal priors.
pub fn homodyne_limit(alpha_sq: f64, q0: f64) -> f64 {
    debug_assert!(alpha_sq >= 0.0 && (0.0..=1.0).contains(&q0));
    let q1 = 1.0 - q0;
    if q0 == 0.0 || q1 == 0.0 {
        return 0.0;
    }
    if alpha_sq == 0.0 {
        // Identical states: guess the likelier symbol.
        return q0.min(q1);
    }
    let alpha = alpha_sq.sqrt();
    // Quadrature outcomes are N(-alpha, 1/4) and N(+alpha, 1/4); the MAP
    // threshold sits at ln(q0/q1) / (8 alpha).
    let x_th = (q0 / q1).ln() / (8.0 * alpha);
    let sqrt2 = std::f64::consts::SQRT_2;
    0.5 * (q0 * erfc(sqrt2 * (x_th + alpha)) + q1 * erfc(sqrt2 * (alpha - x_th)))
}
