//! Standard normal distribution function and density.
//!
//! Both are built on the C-library-grade `erf`/`erfc` from `libm`, which are
//! accurate to a few ulps over the whole real line.

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal cumulative distribution function Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density φ.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Natural log of φ, finite for every finite argument.
pub(crate) fn ln_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI.ln() - 0.5 * x * x
}
