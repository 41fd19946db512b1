//! Shape diagnostics on solved surfaces: convexity of x-slices, ordering in
//! the volatility, concave majorants, put-call parity and the large-x
//! behaviour of the quadratic-volatility price.

use serde::{Deserialize, Serialize};

use crate::closed_form::{price_x2, price_x2_limit};
use crate::error::{domain, Result};
use crate::mc::{estimate_price, simulate_terminal, PathConfig};
use crate::model::{MarketSpec, Payoff, VolModel};
use crate::pde::{solve_minimal, CapSchedule, GridPolicy, SolveConfig};
use crate::surface::PriceSurface;

/// Multiplier in the grid-scaled shape tolerance `c·Δx²·max|u|`.
pub const SHAPE_TOL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Convex,
    Concave,
    Linear,
    Mixed,
}

impl Shape {
    pub fn as_str(&self) -> &'static str {
        match self {
            Shape::Convex => "convex",
            Shape::Concave => "concave",
            Shape::Linear => "linear",
            Shape::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeVerdict {
    pub verdict: Shape,
    /// How far the slice is from the reported shape (for `Mixed`, from the
    /// nearer of convex and concave). Zero when the verdict holds exactly.
    pub worst_violation: f64,
    /// Node index of that violation.
    pub location: usize,
    pub tol: f64,
}

fn window_nodes(surface: &PriceSurface, window: (f64, f64)) -> (usize, usize) {
    let n = surface.xs.len();
    let lo = (2..n - 2).find(|&i| surface.xs[i] >= window.0).unwrap_or(n - 2);
    let hi = (2..n - 2).rev().find(|&i| surface.xs[i] <= window.1).map_or(lo, |i| i + 1);
    (lo, hi.max(lo))
}

/// `c·Δx²·max|u|` on the slice, with `Δx` the widest spacing among the
/// trimmed interior nodes.
pub fn grid_tolerance(surface: &PriceSurface, t_index: usize) -> f64 {
    grid_tolerance_in(surface, t_index, (f64::NEG_INFINITY, f64::INFINITY))
}

/// As [`grid_tolerance`], with spacing and `max|u|` taken over the stencils
/// of the nodes in `window`.
pub fn grid_tolerance_in(surface: &PriceSurface, t_index: usize, window: (f64, f64)) -> f64 {
    let (lo, hi) = window_nodes(surface, window);
    let (a, b) = (lo.saturating_sub(1), (hi + 1).min(surface.xs.len()));
    let xs = &surface.xs[a..b];
    let dx = xs[1..].iter().zip(xs).map(|(b, a)| b - a).fold(0.0, f64::max);
    let umax = surface.values[a..b].iter().map(|r| r[t_index].abs()).fold(0.0, f64::max);
    SHAPE_TOL_FACTOR * dx * dx * umax
}

/// Size of a second difference produced by rounding alone:
/// `64·ε·max|u| / h_min²` over the slice.
pub fn rounding_tolerance(surface: &PriceSurface, t_index: usize) -> f64 {
    let n = surface.xs.len();
    let h = surface.xs[1..n].iter().zip(&surface.xs[..n - 1]).map(|(b, a)| b - a).fold(f64::INFINITY, f64::min);
    let umax = surface.values.iter().map(|r| r[t_index].abs()).fold(0.0, f64::max);
    64.0 * f64::EPSILON * umax / (h * h)
}

/// Classifies the slice `t_index` by the signs of its second differences,
/// skipping two nodes at each end.
pub fn convexity_profile(surface: &PriceSurface, t_index: usize, tol: f64) -> Result<ShapeVerdict> {
    convexity_profile_in(surface, t_index, tol, (f64::NEG_INFINITY, f64::INFINITY))
}

/// As [`convexity_profile`], restricted to nodes with `x` in `window`.
pub fn convexity_profile_in(surface: &PriceSurface, t_index: usize, tol: f64, window: (f64, f64)) -> Result<ShapeVerdict> {
    if surface.xs.len() < 5 {
        return domain("shape profile needs at least 5 nodes");
    }
    if t_index >= surface.ts.len() {
        return domain(format!("time index {t_index} out of range"));
    }
    let (lo, hi) = window_nodes(surface, window);
    if lo >= hi {
        return domain(format!("window [{}, {}] holds no interior node", window.0, window.1));
    }
    let (mut dmin, mut imin) = (f64::INFINITY, lo);
    let (mut dmax, mut imax) = (f64::NEG_INFINITY, lo);
    for i in lo..hi {
        let d = surface.second_difference(i, t_index);
        if d < dmin {
            (dmin, imin) = (d, i);
        }
        if d > dmax {
            (dmax, imax) = (d, i);
        }
    }
    let convex = dmin >= -tol;
    let concave = dmax <= tol;
    let (verdict, worst_violation, location) = match (convex, concave) {
        (true, true) => (Shape::Linear, dmax.abs().max(dmin.abs()), if dmax.abs() > dmin.abs() { imax } else { imin }),
        (true, false) => (Shape::Convex, (-dmin).max(0.0), imin),
        (false, true) => (Shape::Concave, dmax.max(0.0), imax),
        (false, false) if -dmin < dmax => (Shape::Mixed, -dmin, imin),
        (false, false) => (Shape::Mixed, dmax, imax),
    };
    Ok(ShapeVerdict {
        verdict,
        worst_violation,
        location,
        tol,
    })
}

/// Shared solver settings for comparisons between markets.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveInputs {
    pub policy: GridPolicy,
    pub schedule: CapSchedule,
    pub config: SolveConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotonicityBranch {
    /// Concave payoff: the price falls as volatility rises.
    Concave,
    /// Bounded convex payoff: the price rises with volatility.
    BoundedConvex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub branch: MonotonicityBranch,
    /// min over nodes of `u_lo − u_hi` (concave) or `u_hi − u_lo` (convex);
    /// the predicted ordering holds when this is ≥ −tol.
    pub worst_gap: f64,
    /// `(x, t)` of the worst gap.
    pub location: (f64, f64),
    pub direction: String,
    pub lo: PriceSurface,
    pub hi: PriceSurface,
}

/// Solves the same payoff under `model_lo ≤ model_hi` (checked on the grid
/// nodes) and reports the gap in the predicted direction.
pub fn vol_monotonicity(
    model_lo: &VolModel,
    model_hi: &VolModel,
    payoff: &Payoff,
    horizon: f64,
    inputs: &SolveInputs,
) -> Result<MonotonicityReport> {
    let flags = payoff.flags();
    let branch = if flags.concave {
        MonotonicityBranch::Concave
    } else if flags.convex && flags.bounded {
        MonotonicityBranch::BoundedConvex
    } else {
        return domain("volatility ordering is only predicted for concave or bounded convex payoffs");
    };
    let grid = inputs
        .policy
        .grid_for(payoff, *inputs.schedule.caps().last().unwrap_or(&inputs.schedule.m0))?;
    for &x in &grid.nodes() {
        if model_lo.alpha(x)? > model_hi.alpha(x)? * (1.0 + 1e-12) {
            return domain(format!("volatilities are not ordered at x = {x}"));
        }
    }
    let solve = |vol: &VolModel| -> Result<PriceSurface> {
        let market = MarketSpec::zero_rate(vol.clone(), horizon)?;
        Ok(solve_minimal(&market, payoff, &inputs.policy, &inputs.schedule, &inputs.config)?.0)
    };
    let lo = solve(model_lo)?;
    let hi = solve(model_hi)?;
    let sign = match branch {
        MonotonicityBranch::Concave => 1.0,
        MonotonicityBranch::BoundedConvex => -1.0,
    };
    let mut worst = (f64::INFINITY, (0.0, 0.0));
    for (i, (a, b)) in lo.values.iter().zip(&hi.values).enumerate() {
        for (j, (u_lo, u_hi)) in a.iter().zip(b).enumerate() {
            let gap = sign * (u_lo - u_hi);
            if gap < worst.0 {
                worst = (gap, (lo.xs[i], lo.ts[j]));
            }
        }
    }
    Ok(MonotonicityReport {
        branch,
        worst_gap: worst.0,
        location: worst.1,
        direction: match branch {
            MonotonicityBranch::Concave => "u_lo >= u_hi".into(),
            MonotonicityBranch::BoundedConvex => "u_hi >= u_lo".into(),
        },
        lo,
        hi,
    })
}

/// Piecewise-linear concave curve: linear interpolation through `knots`,
/// then a ray with `terminal_slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantCurve {
    pub knots: Vec<(f64, f64)>,
    pub terminal_slope: f64,
}

impl MajorantCurve {
    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let last = k[k.len() - 1];
        if x >= last.0 {
            return last.1 + self.terminal_slope * (x - last.0);
        }
        let j = k.partition_point(|p| p.0 <= x).max(1);
        let (a, b) = (k[j - 1], k[j]);
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    }

    pub fn to_payoff(&self) -> Result<Payoff> {
        Payoff::piecewise_linear(self.knots.clone(), self.terminal_slope)
    }
}

const MAJORANT_SAMPLES: usize = 4096;

// Upper hull of points sorted by x; collinear middle points are dropped.
fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Height of b below the chord a–p; b is dropped unless it sits
            // clearly above.
            let chord = a.1 + (p.1 - a.1) * (b.0 - a.0) / (p.0 - a.0);
            let scale = 1.0 + a.1.abs().max(b.1.abs()).max(p.1.abs());
            if b.1 - chord <= 1e-12 * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Smallest concave majorant of a strictly sublinear payoff, from the upper
/// hull of a dense sampling of `[0, x_max]` (payoff kinks included). The
/// curve is flat from its first maximal knot on.
pub fn concave_majorant(payoff: &Payoff, x_max: f64) -> Result<MajorantCurve> {
    payoff.validate()?;
    if !payoff.flags().sublinear {
        return domain("the concave majorant is only used for strictly sublinear payoffs");
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return domain(format!("x_max = {x_max} must be positive"));
    }
    let mut xs: Vec<f64> = (0..=MAJORANT_SAMPLES)
        .map(|i| x_max * i as f64 / MAJORANT_SAMPLES as f64)
        .chain(payoff.breakpoints().into_iter().filter(|&b| b <= x_max))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let points: Vec<(f64, f64)> = xs.iter().map(|&x| (x, payoff.eval(x))).collect();
    let mut knots = upper_hull(&points);
    let top = knots.iter().map(|k| k.1).fold(f64::NEG_INFINITY, f64::max);
    let first_max = knots.iter().position(|k| k.1 == top).unwrap();
    knots.truncate(first_max + 1);
    Ok(MajorantCurve {
        knots,
        terminal_slope: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub passed: bool,
    /// max over nodes of `u − ḡ(x)`.
    pub worst_excess: f64,
    /// `(i, j)` of that node.
    pub worst_node: (usize, usize),
}

/// `u(x, t) ≤ ḡ(x) + tol` at every node.
pub fn sublinear_bound_check(surface: &PriceSurface, majorant: &MajorantCurve, tol: f64) -> BoundCheck {
    let mut worst = (f64::NEG_INFINITY, (0, 0));
    for (i, (row, &x)) in surface.values.iter().zip(&surface.xs).enumerate() {
        let bound = majorant.eval(x);
        for (j, &u) in row.iter().enumerate() {
            if u - bound > worst.0 {
                worst = (u - bound, (i, j));
            }
        }
    }
    BoundCheck {
        passed: worst.0 <= tol,
        worst_excess: worst.0,
        worst_node: worst.1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum ParityRoute {
    Pde(SolveInputs),
    /// One set of terminal samples prices call, put and forward.
    MonteCarlo(PathConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityGap {
    /// `C − P − (x0 − K)`.
    pub gap: f64,
    pub call: f64,
    pub put: f64,
    /// Standard error of the gap on the Monte Carlo route, 0 otherwise.
    pub stderr: f64,
}

/// Put-call parity gap at `(x0, t = 0)` with expiry `market.horizon`.
pub fn parity_gap(market: &MarketSpec, strike: f64, x0: f64, route: &ParityRoute) -> Result<ParityGap> {
    let call = Payoff::call(strike)?;
    let put = Payoff::put(strike)?;
    if !(x0 >= 0.0) {
        return domain(format!("x0 = {x0} must be nonnegative"));
    }
    match route {
        ParityRoute::Pde(inputs) => {
            let price = |g: &Payoff| -> Result<f64> {
                let (s, _) = solve_minimal(market, g, &inputs.policy, &inputs.schedule, &inputs.config)?;
                Ok(s.price(x0))
            };
            let (c, p) = (price(&call)?, price(&put)?);
            Ok(ParityGap {
                gap: c - p - (x0 - strike),
                call: c,
                put: p,
                stderr: 0.0,
            })
        }
        ParityRoute::MonteCarlo(cfg) => {
            market.require_zero_rate()?;
            let samples = simulate_terminal(market, x0, cfg)?;
            let c = estimate_price(&samples, &call)?;
            let p = estimate_price(&samples, &put)?;
            // C − P prices x − K path by path.
            let lin = estimate_price(&samples, &Payoff::Identity)?;
            Ok(ParityGap {
                gap: lin.mean - x0,
                call: c.mean,
                put: p.mean,
                stderr: lin.stderr,
            })
        }
    }
}

/// [`parity_gap`] under `dX = σX² dW`, zero rate, expiry `tau`.
pub fn parity_gap_x2(sigma: f64, strike: f64, x0: f64, tau: f64, route: &ParityRoute) -> Result<ParityGap> {
    let market = MarketSpec::zero_rate(VolModel::power(sigma, 2.0)?, tau)?;
    parity_gap(&market, strike, x0, route)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    /// max of `E X(T)` over the probes.
    pub sup: f64,
    /// `√(2/π)/(σ√τ)`.
    pub bound: f64,
    /// `bound·1.01 − sup`; nonnegative when the check passes.
    pub margin: f64,
    /// `(x, u(x)/x^0.1)` per probe, in probe order.
    pub ratios: Vec<(f64, f64)>,
    pub ratios_decreasing: bool,
}

impl AsymptoteReport {
    pub fn passed(&self) -> bool {
        self.margin >= 0.0 && self.ratios_decreasing
    }
}

pub const ASYMPTOTE_DELTA: f64 = 0.1;

/// Large-x behaviour of the quadratic-volatility price at expiry `tau`.
pub fn asymptote_check_x2(sigma: f64, tau: f64, probes: &[f64]) -> Result<AsymptoteReport> {
    if !(sigma > 0.0 && tau > 0.0) {
        return domain("asymptote check needs sigma, tau > 0");
    }
    if probes.is_empty() || probes.iter().any(|&x| !(x > 0.0)) || probes.windows(2).any(|w| w[1] <= w[0]) {
        return domain("probes must be positive and strictly increasing");
    }
    let us: Vec<f64> = probes.iter().map(|&x| price_x2(x, tau, sigma)).collect();
    let sup = us.iter().copied().fold(0.0, f64::max);
    let bound = price_x2_limit(tau, sigma);
    let ratios: Vec<(f64, f64)> = probes
        .iter()
        .zip(&us)
        .map(|(&x, &u)| (x, u / x.powf(ASYMPTOTE_DELTA)))
        .collect();
    let ratios_decreasing = ratios.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(AsymptoteReport {
        sup,
        bound,
        margin: bound * 1.01 - sup,
        ratios,
        ratios_decreasing,
    })
}
