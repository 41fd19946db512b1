//! Monte Carlo for `dX = r X dt + α(X) dW` with absorption at zero.
//!
//! Every path draws from its own ChaCha8 stream, selected by the path index
//! under a common seed, so a sample array does not depend on how many paths
//! were requested before it or on the number of worker threads.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{MarketSpec, Payoff, VolModel};

/// Largest Euler increment, as a multiple of the current state.
pub const INCREMENT_CLAMP: f64 = 50.0;

const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathScheme {
    EulerAbsorbed,
    /// Exact terminal law of `dX = σX² dW` through a three-dimensional
    /// Brownian motion. Ignores `n_steps`.
    ExactReciprocalBessel3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub scheme: PathScheme,
    /// Absorbing upper level: a path reaching it is frozen there. Euler only.
    #[serde(default)]
    pub upper_barrier: Option<f64>,
}

impl PathConfig {
    pub fn euler(n_paths: usize, n_steps: usize, seed: u64) -> Self {
        Self {
            n_paths,
            n_steps,
            seed,
            scheme: PathScheme::EulerAbsorbed,
            upper_barrier: None,
        }
    }

    pub fn exact(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            n_steps: 1,
            seed,
            scheme: PathScheme::ExactReciprocalBessel3,
            upper_barrier: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return domain("n_paths and n_steps must be at least 1");
        }
        if let Some(b) = self.upper_barrier {
            if !(b > 0.0) {
                return domain(format!("upper barrier {b} must be positive"));
            }
            if self.scheme == PathScheme::ExactReciprocalBessel3 {
                return domain("the exact sampler has no barrier variant");
            }
        }
        Ok(())
    }
}

/// Terminal values in path order.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSamples {
    pub values: Vec<f64>,
    /// Some Euler increment hit [`INCREMENT_CLAMP`].
    pub clamped: bool,
}

impl TerminalSamples {
    /// One value per line.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub n: usize,
    /// Share of samples exactly at 0.
    pub absorbed_fraction: f64,
    pub clamped: bool,
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn euler_path(vol: &VolModel, rate: f64, x0: f64, dt: f64, steps: usize, barrier: Option<f64>, rng: &mut ChaCha8Rng) -> (f64, bool) {
    let sq = dt.sqrt();
    let mut x = x0;
    let mut clamped = false;
    for _ in 0..steps {
        if x <= 0.0 {
            return (0.0, clamped);
        }
        if let Some(b) = barrier.filter(|&b| x >= b) {
            return (b, clamped);
        }
        let z: f64 = rng.sample(StandardNormal);
        let mut dx = rate * x * dt + vol.value(x) * sq * z;
        let lim = INCREMENT_CLAMP * x;
        if dx.abs() > lim {
            dx = dx.signum() * lim;
            clamped = true;
        }
        x += dx;
        if x <= 0.0 {
            x = 0.0;
        }
    }
    if let Some(b) = barrier {
        x = x.min(b);
    }
    (x, clamped)
}

fn exact_x2_draw(x0: f64, sd: f64, rng: &mut ChaCha8Rng) -> f64 {
    let b1: f64 = rng.sample(StandardNormal);
    let b2: f64 = rng.sample(StandardNormal);
    let b3: f64 = rng.sample(StandardNormal);
    let y1 = 1.0 / x0 + sd * b1;
    let (y2, y3) = (sd * b2, sd * b3);
    1.0 / (y1 * y1 + y2 * y2 + y3 * y3).sqrt()
}

/// `n` exact draws of X(T) for `dX = σX² dW`, `X(t) = x0`, `T − t = tau`:
/// `1/|(1/x0 + B₁, B₂, B₃)|` with `Bᵢ ~ N(0, σ²τ)` independent.
pub fn exact_sample_x2(x0: f64, tau: f64, sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(x0 > 0.0 && tau > 0.0 && sigma > 0.0) {
        return domain(format!(
            "exact sampler needs x0, tau, sigma > 0 (got {x0}, {tau}, {sigma})"
        ));
    }
    let sd = sigma * tau.sqrt();
    Ok((0..n)
        .into_par_iter()
        .map(|i| exact_x2_draw(x0, sd, &mut path_rng(seed, i)))
        .collect())
}

/// Terminal samples of X(T) started at `x0` at time 0.
pub fn simulate_terminal(market: &MarketSpec, x0: f64, config: &PathConfig) -> Result<TerminalSamples> {
    config.validate()?;
    if !(x0 >= 0.0 && x0.is_finite()) {
        return domain(format!("x0 = {x0} must be nonnegative"));
    }
    let n = config.n_paths;
    if x0 == 0.0 {
        return Ok(TerminalSamples {
            values: vec![0.0; n],
            clamped: false,
        });
    }
    match config.scheme {
        PathScheme::ExactReciprocalBessel3 => {
            let Some(sigma) = market.vol.quadratic_sigma() else {
                return domain("the exact sampler needs a Power(sigma, 2) model");
            };
            market.require_zero_rate()?;
            Ok(TerminalSamples {
                values: exact_sample_x2(x0, market.horizon, sigma, n, config.seed)?,
                clamped: false,
            })
        }
        PathScheme::EulerAbsorbed => {
            let dt = market.horizon / config.n_steps as f64;
            let draws: Vec<(f64, bool)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = path_rng(config.seed, i);
                    euler_path(&market.vol, market.rate, x0, dt, config.n_steps, config.upper_barrier, &mut rng)
                })
                .collect();
            Ok(TerminalSamples {
                clamped: draws.iter().any(|d| d.1),
                values: draws.into_iter().map(|d| d.0).collect(),
            })
        }
    }
}

// Fixed-size blocks summed left to right, then combined pairwise, so the
// result only depends on the input order.
fn blocked_sum(values: &[f64]) -> f64 {
    let mut partial: Vec<f64> = values.chunks(BLOCK).map(|c| c.iter().sum()).collect();
    while partial.len() > 1 {
        partial = partial
            .chunks(2)
            .map(|p| p.iter().sum())
            .collect();
    }
    partial.first().copied().unwrap_or(0.0)
}

/// Mean and standard error of `g(X(T))`.
pub fn estimate_price(samples: &TerminalSamples, payoff: &Payoff) -> Result<MCEstimate> {
    let xs = &samples.values;
    if xs.is_empty() {
        return domain("cannot estimate from an empty sample");
    }
    payoff.validate()?;
    let n = xs.len();
    let gs: Vec<f64> = xs.par_iter().map(|&x| payoff.eval(x)).collect();
    let mean = blocked_sum(&gs) / n as f64;
    let stderr = if n > 1 {
        let dev: Vec<f64> = gs.par_iter().map(|g| (g - mean) * (g - mean)).collect();
        (blocked_sum(&dev) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    let absorbed = xs.iter().filter(|&&x| x == 0.0).count();
    Ok(MCEstimate {
        mean,
        stderr,
        n,
        absorbed_fraction: absorbed as f64 / n as f64,
        clamped: samples.clamped,
    })
}

/// Median over `groups` equal blocks (in path order) of the block means of
/// `g(X(T))`. Coarse Euler runs of fast-growing volatilities produce a few
/// astronomically large terminal values; this estimator ignores them where
/// the plain mean does not.
pub fn median_of_means(samples: &TerminalSamples, payoff: &Payoff, groups: usize) -> Result<f64> {
    let n = samples.values.len();
    if groups == 0 || n < groups {
        return domain(format!("cannot split {n} samples into {groups} groups"));
    }
    let size = n / groups;
    let mut means: Vec<f64> = samples.values[..size * groups]
        .chunks(size)
        .map(|c| blocked_sum(&c.iter().map(|&x| payoff.eval(x)).collect::<Vec<_>>()) / size as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let mid = groups / 2;
    Ok(if groups % 2 == 1 {
        means[mid]
    } else {
        0.5 * (means[mid - 1] + means[mid])
    })
}

/// `x0 − E X(t + tau)` estimated from simulated paths. Zero rate only.
pub fn martingale_defect(market: &MarketSpec, x0: f64, tau: f64, config: &PathConfig) -> Result<MCEstimate> {
    market.require_zero_rate()?;
    let horizon_market = MarketSpec::zero_rate(market.vol.clone(), tau)?;
    let samples = simulate_terminal(&horizon_market, x0, config)?;
    let est = estimate_price(&samples, &Payoff::Identity)?;
    Ok(MCEstimate {
        mean: x0 - est.mean,
        ..est
    })
}
