//! Supersolution witness `h(x, τ) = e^{Mτ} x / (1 + x^β τ^m)`.
//!
//! If `h_t + ½α² h_xx ≤ 0` then `h(X, t)` is a supermartingale and
//! `E X(T) = E h(X(T), T) ≤ h(x, t) < x`, so the price process is a strict
//! local martingale. Multiplying the generator by `e^{-Mτ}(1 + x^β τ^m)³` and
//! weakening `Mx(1 + x^β τ^m)²` to `Mx` gives the sufficient polynomial
//! inequality checked by [`verify_supersolution`].

use serde::{Deserialize, Serialize};

use crate::classify::{classify_martingale, Probe, Verdict};
use crate::error::{domain, Result};
use crate::model::VolModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionParams {
    pub beta: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

impl SupersolutionParams {
    pub fn new(beta: f64, m: f64, big_m: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("beta = {beta} must lie in (0, 1]"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return domain(format!("m = {m} must be positive"));
        }
        if !(big_m > 0.0 && big_m.is_finite()) {
            return domain(format!("M = {big_m} must be positive"));
        }
        Ok(Self { beta, m, big_m })
    }
}

pub fn supersolution_h(x: f64, tau: f64, params: &SupersolutionParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let denom = 1.0 + x.powf(params.beta) * tau.max(0.0).powf(params.m);
    (params.big_m * tau).exp() * x / denom
}

/// Left minus right side of the scaled supersolution inequality at `(x, τ)`.
pub fn inequality_residual(model: &VolModel, params: &SupersolutionParams, x: f64, tau: f64) -> f64 {
    if x <= 0.0 {
        // h vanishes identically on the absorbing boundary.
        return 0.0;
    }
    let SupersolutionParams { beta, m, big_m } = *params;
    let a2 = model.alpha2(x);
    let tm = tau.powf(m);
    let lhs = big_m * x
        + 0.5 * (1.0 + beta) * beta * a2 * x.powf(beta - 1.0) * tm
        + 0.5 * beta * (1.0 - beta) * a2 * x.powf(2.0 * beta - 1.0) * tm * tm;
    let rhs = m * x.powf(beta + 1.0) * tau.powf(m - 1.0)
        + m * x.powf(2.0 * beta + 1.0) * tau.powf(2.0 * m - 1.0);
    lhs - rhs
}

/// Rectangular `(x, τ)` grid, both axes uniform and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckGrid {
    pub x_range: (f64, f64),
    pub tau_range: (f64, f64),
    pub nx: usize,
    pub ntau: usize,
}

impl CheckGrid {
    pub fn new(x_range: (f64, f64), tau_range: (f64, f64), nx: usize, ntau: usize) -> Self {
        Self {
            x_range,
            tau_range,
            nx,
            ntau,
        }
    }

    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![range.0];
        }
        (0..n)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_range, self.nx)
    }

    pub fn taus(&self) -> Vec<f64> {
        Self::axis(self.tau_range, self.ntau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionReport {
    pub min_residual: f64,
    /// `(x, τ, residual)` for every node with a negative residual.
    pub failing_points: Vec<(f64, f64, f64)>,
    pub n_checked: usize,
}

impl SupersolutionReport {
    pub fn is_clean(&self) -> bool {
        self.failing_points.is_empty()
    }
}

pub fn verify_supersolution(
    model: &VolModel,
    params: &SupersolutionParams,
    grid: &CheckGrid,
) -> SupersolutionReport {
    let mut min_residual = f64::INFINITY;
    let mut failing_points = Vec::new();
    let taus = grid.taus();
    let xs = grid.xs();
    for &x in &xs {
        for &tau in &taus {
            let r = inequality_residual(model, params, x, tau);
            min_residual = min_residual.min(r);
            if r < 0.0 {
                failing_points.push((x, tau, r));
            }
        }
    }
    SupersolutionReport {
        min_residual,
        failing_points,
        n_checked: xs.len() * taus.len(),
    }
}

/// Parameter recipe for a model with variance growth exponent η > 2.
///
/// With `η' = (2 + η)/2`, `m` is set half a unit above the threshold
/// `1 + β/(η' − 2)`. The large-x threshold `c` is the first grid point beyond
/// which the inequality holds with `M = 1`; then
/// `M = max(1, m c^β T^{m−1} + m c^{2β} T^{2m−1})` covers `x < c`.
pub fn default_params(
    model: &VolModel,
    beta: f64,
    horizon: f64,
    grid: &CheckGrid,
) -> Result<SupersolutionParams> {
    let verdict = classify_martingale(model, &Probe::default())?;
    if verdict.verdict != Verdict::StrictLocalMartingale {
        return domain(format!(
            "supersolution recipe needs super-quadratic variance growth; classifier says {}",
            verdict.verdict.as_str()
        ));
    }
    let eta = verdict.evidence.fitted_eta;
    let eta_prime = 0.5 * (2.0 + eta);
    let m = 1.0 + beta / (eta_prime - 2.0) + 0.5;
    let trial = SupersolutionParams::new(beta, m, 1.0)?;

    let xs = grid.xs();
    let taus = grid.taus();
    let mut c = xs[0];
    for &x in &xs {
        if taus
            .iter()
            .any(|&tau| inequality_residual(model, &trial, x, tau) < 0.0)
        {
            c = x;
        }
    }
    let big_m = m * c.powf(beta) * horizon.powf(m - 1.0)
        + m * c.powf(2.0 * beta) * horizon.powf(2.0 * m - 1.0);
    SupersolutionParams::new(beta, m, big_m.max(1.0))
}
