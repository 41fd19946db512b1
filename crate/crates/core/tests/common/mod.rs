//! Test-only oracles, independent of the library's own numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Transition density of `dX = σX² dW`, written out directly (no shared code
/// with the library).
pub fn density(x: f64, tau: f64, sigma: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma * tau;
    let a = (1.0 / y - 1.0 / x).powi(2) / (2.0 * s2);
    let b = (1.0 / y + 1.0 / x).powi(2) / (2.0 * s2);
    x / (y.powi(3) * (2.0 * PI * s2).sqrt()) * ((-a).exp() - (-b).exp())
}

/// Composite Simpson on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// `∫_0^∞ w(y) p(y) dy`, integrated in `ln y` over `[1e-4, 1e6]`.
pub fn density_moment(x: f64, tau: f64, sigma: f64, w: impl Fn(f64) -> f64) -> f64 {
    simpson(
        |u| {
            let y = u.exp();
            w(y) * density(x, tau, sigma, y) * y
        },
        (1e-4f64).ln(),
        (1e6f64).ln(),
        200_000,
    )
}

/// CDF of X(T) tabulated on a log grid by cumulative Simpson, queried by
/// linear interpolation in `ln y`.
pub struct DensityCdf {
    u0: f64,
    du: f64,
    values: Vec<f64>,
}

impl DensityCdf {
    pub fn new(x: f64, tau: f64, sigma: f64) -> Self {
        let (u0, u1, n) = ((1e-4f64).ln(), (1e6f64).ln(), 40_000usize);
        let du = (u1 - u0) / n as f64;
        let f = |u: f64| {
            let y = u.exp();
            density(x, tau, sigma, y) * y
        };
        let mut values = vec![0.0; n + 1];
        for k in 0..n {
            let a = u0 + k as f64 * du;
            values[k + 1] = values[k] + simpson(f, a, a + du, 8);
        }
        Self { u0, du, values }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let t = (y.ln() - self.u0) / self.du;
        if t <= 0.0 {
            return 0.0;
        }
        let k = t.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let w = t - k as f64;
        (1.0 - w) * self.values[k] + w * self.values[k + 1]
    }

    /// Kolmogorov–Smirnov distance between the sample and this law.
    pub fn ks(&self, samples: &[f64]) -> f64 {
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        s.iter()
            .enumerate()
            .map(|(i, &y)| {
                let f = self.cdf(y);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Standard normal CDF from an independent erfc (Numerical Recipes erfcc,
/// refined by one Newton-free series switch). Accuracy ~1e-7, enough for
/// oracle values quoted to 4–6 digits.
pub fn phi_cdf(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
        .exp();
    if x >= 0.0 {
        1.0 - 0.5 * r
    } else {
        0.5 * r
    }
}

/// Zero-rate lognormal call.
pub fn lognormal_call(x: f64, strike: f64, sigma: f64, tau: f64) -> f64 {
    let s = sigma * tau.sqrt();
    let d1 = ((x / strike).ln() + 0.5 * s * s) / s;
    x * phi_cdf(d1) - strike * phi_cdf(d1 - s)
}
