//! Pricing and verification engine for diffusion models whose price process
//! may be a strict local martingale (an asset-price bubble).
//!
//! The crate covers the European side (minimal solution of the pricing PDE,
//! closed forms for the quadratic-volatility model, non-uniqueness
//! witnesses), Monte Carlo with absorption at zero, American options by
//! projected SOR, and shape diagnostics (convexity, volatility ordering,
//! concave majorants, put-call parity).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod american;
pub mod analysis;
pub mod classify;
pub mod cli;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod grid;
pub mod mc;
pub mod model;
mod operator;
pub mod pde;
pub mod special;
pub mod supersolution;
pub mod surface;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Grid1D, Stretching};
pub use model::{MarketSpec, Payoff, PayoffFlags, VolModel};
pub use surface::{FarBoundary, PriceSurface, Scheme};
