//! Closed forms for the quadratic-volatility bubble `dX = σ X² dW`.
//!
//! `1/X` is a (time-changed) three-dimensional Bessel process, which makes
//! the transition law, the stock-option price `E X(T)` and its convexity
//! explicit. All functions take time to expiry `tau = T − t`.

use crate::special::{ln_normal_pdf, normal_pdf};

/// E_{x,t} X(T) = x (1 − 2Φ(−1/(xσ√τ))).
///
/// Evaluated as `x·erf(1/(xσ√(2τ)))` so the large-x regime, where the
/// bracket is tiny, keeps full relative precision.
pub fn price_x2(x: f64, tau: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if tau <= 0.0 {
        return x;
    }
    let z = 1.0 / (x * sigma * (2.0 * tau).sqrt());
    x * libm::erf(z)
}

/// Transition density of X(T) at `y` given X(t) = x.
pub fn density_x2(x: f64, tau: f64, sigma: f64, y: f64) -> f64 {
    if !(x > 0.0 && tau > 0.0 && y > 0.0) {
        return 0.0;
    }
    let var = sigma * sigma * tau;
    let a = (1.0 / y - 1.0 / x).powi(2) / (2.0 * var);
    let b = (1.0 / y + 1.0 / x).powi(2) / (2.0 * var);
    // e^{-a} − e^{-b} = e^{-a}(1 − e^{-(b−a)}), with b − a = 2/(xy·var).
    let bracket = (-a).exp() * -(-(b - a)).exp_m1();
    x / (y.powi(3) * (2.0 * std::f64::consts::PI * var).sqrt()) * bracket
}

/// ∂²/∂x² of [`price_x2`]: −2/(x⁴σ³τ^{3/2}) φ(−1/(xσ√τ)). Strictly negative.
pub fn gamma_x2(x: f64, tau: f64, sigma: f64) -> f64 {
    if !(x > 0.0 && tau > 0.0) {
        return 0.0;
    }
    let z = 1.0 / (x * sigma * tau.sqrt());
    if z < 30.0 {
        return -2.0 / (x.powi(4) * sigma.powi(3) * tau.powf(1.5)) * normal_pdf(z);
    }
    // Log space keeps x → 0⁺ from producing 0·∞.
    let ln_mag = std::f64::consts::LN_2 - 4.0 * x.ln() - 3.0 * sigma.ln() - 1.5 * tau.ln()
        + ln_normal_pdf(z);
    -ln_mag.exp()
}

/// Large-x limit of [`price_x2`]: √(2/π)/(σ√τ).
pub fn price_x2_limit(tau: f64, sigma: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() / (sigma * tau.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    #[test]
    fn price_examples() {
        // 2Φ(1) − 1 and 1 − 2Φ(−2).
        assert!((price_x2(1.0, 1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-14);
        assert!((price_x2(1.0, 0.25, 1.0) - 0.954_499_736_103_641_6).abs() < 1e-14);
        assert_eq!(price_x2(5.0, 0.0, 1.0), 5.0);
        assert_eq!(price_x2(0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn price_agrees_with_cdf_form() {
        for &x in &[0.1, 0.7, 1.0, 3.0, 20.0] {
            for &tau in &[0.05f64, 0.5, 2.0] {
                let direct = x * (1.0 - 2.0 * normal_cdf(-1.0 / (x * tau.sqrt())));
                assert!((price_x2(x, tau, 1.0) - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn density_example() {
        let want = (1.0 - (-2.0f64).exp()) / (2.0 * std::f64::consts::PI).sqrt();
        assert!((density_x2(1.0, 1.0, 1.0, 1.0) - want).abs() < 1e-15);
        assert!((want - 0.344_951).abs() < 1e-6);
    }

    #[test]
    fn gamma_examples() {
        let want = -2.0 * normal_pdf(1.0);
        assert!((gamma_x2(1.0, 1.0, 1.0) - want).abs() < 1e-15);
        assert!((want + 0.483_941).abs() < 1e-6);
        assert_eq!(gamma_x2(1e-80, 1.0, 1.0), -0.0);
        assert!(gamma_x2(1e-3, 1.0, 1.0).abs() < 1e-300);
        for &x in &[0.05, 0.3, 1.0, 4.0, 100.0] {
            for &tau in &[1e-3, 0.1, 1.0, 10.0] {
                let g = gamma_x2(x, tau, 0.7);
                assert!(g <= 0.0 && g.is_finite());
            }
        }
    }

    #[test]
    fn large_x_limit() {
        let u = price_x2(1e4, 1.0, 1.0);
        assert!((u - 0.797_885).abs() < 1e-3);
        assert!(u < price_x2_limit(1.0, 1.0));
    }
}
