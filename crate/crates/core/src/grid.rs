use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Node placement in x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Stretching {
    Uniform,
    /// `x(ξ) = c + sinh(κ(ξ)) / intensity` with κ affine in ξ, which clusters
    /// nodes around `center` and thins them out geometrically towards `x_max`.
    Sinh { center: f64, intensity: f64 },
}

/// Space-time grid on `[0, x_max] × [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_max: f64,
    /// Nodes including both ends.
    pub nx: usize,
    /// Time levels including t = 0 and t = T.
    pub nt: usize,
    pub stretching: Stretching,
}

impl Grid1D {
    pub fn new(x_max: f64, nx: usize, nt: usize, stretching: Stretching) -> Result<Self> {
        let g = Self {
            x_max,
            nx,
            nt,
            stretching,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(x_max: f64, nx: usize, nt: usize) -> Result<Self> {
        Self::new(x_max, nx, nt, Stretching::Uniform)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max.is_finite() && self.x_max > 0.0) {
            return domain(format!("x_max = {} must be positive", self.x_max));
        }
        if self.nx < 16 || self.nt < 16 {
            return domain(format!(
                "grid needs nx, nt >= 16 (got nx = {}, nt = {})",
                self.nx, self.nt
            ));
        }
        if let Stretching::Sinh { center, intensity } = self.stretching {
            if !(center >= 0.0 && center < self.x_max) {
                return domain(format!("sinh center {center} must lie in [0, x_max)"));
            }
            if !(intensity > 0.0 && intensity.is_finite()) {
                return domain(format!("sinh intensity {intensity} must be positive"));
            }
        }
        Ok(())
    }

    /// Node coordinates, strictly increasing from 0 to `x_max`.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.nx;
        let last = (n - 1) as f64;
        let mut xs: Vec<f64> = match self.stretching {
            Stretching::Uniform => (0..n).map(|i| self.x_max * i as f64 / last).collect(),
            Stretching::Sinh { center, intensity } => {
                let lo = (-center * intensity).asinh();
                let hi = ((self.x_max - center) * intensity).asinh();
                (0..n)
                    .map(|i| {
                        let xi = i as f64 / last;
                        center + (lo + (hi - lo) * xi).sinh() / intensity
                    })
                    .collect()
            }
        };
        xs[0] = 0.0;
        xs[n - 1] = self.x_max;
        xs
    }

    /// Time levels `t_j = j T/(nt − 1)`.
    pub fn times(&self, horizon: f64) -> Vec<f64> {
        let last = (self.nt - 1) as f64;
        (0..self.nt).map(|j| horizon * j as f64 / last).collect()
    }
}
