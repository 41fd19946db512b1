//! Volatility models, payoffs and market specifications.
//!
//! The price process follows `dX = r X dt + α(X) dW` on `[0, ∞)` with `x = 0`
//! absorbing. Every consumer of these types (PDE, Monte Carlo, LCP) honours
//! that convention: the value at the origin is pinned to `g(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Tabulated local volatility: linear between knots, power-law beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedVol {
    knots: Vec<(f64, f64)>,
    exponent: f64,
}

impl TabulatedVol {
    pub fn new(knots: Vec<(f64, f64)>, exponent: f64) -> Result<Self> {
        if knots.is_empty() {
            return domain("tabulated volatility needs at least one knot");
        }
        if !exponent.is_finite() {
            return domain("tabulated extrapolation exponent must be finite");
        }
        for (i, &(x, a)) in knots.iter().enumerate() {
            if !(x.is_finite() && x >= 0.0) {
                return domain(format!("knot {i}: x = {x} must be finite and nonnegative"));
            }
            if !(a.is_finite() && a > 0.0) {
                return domain(format!("knot {i}: alpha = {a} must be positive"));
            }
            if i > 0 && x <= knots[i - 1].0 {
                return domain(format!("knot {i}: x values must be strictly increasing"));
            }
        }
        if knots[0].0 == 0.0 && knots.len() == 1 {
            return domain("a single knot at x = 0 does not define a volatility");
        }
        Ok(Self { knots, exponent })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    fn value(&self, x: f64) -> f64 {
        let (x0, a0) = self.knots[0];
        if x <= x0 {
            // Linear ramp from the origin; the origin itself is absorbing.
            return if x0 == 0.0 { a0 } else { a0 * x / x0 };
        }
        let (xl, al) = *self.knots.last().unwrap();
        if x >= xl {
            return al * (x / xl).powf(self.exponent);
        }
        let k = self.knots.partition_point(|&(kx, _)| kx <= x);
        let (xa, aa) = self.knots[k - 1];
        let (xb, ab) = self.knots[k];
        aa + (ab - aa) * (x - xa) / (xb - xa)
    }
}

/// Volatility coefficient α(x). Time-homogeneous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum VolModel {
    /// α(x) = σ x^p.
    Power { sigma: f64, p: f64 },
    /// α(x) = σ x sqrt(ln(e + x)).
    PowerLog { sigma: f64 },
    Tabulated(TabulatedVol),
}

impl VolModel {
    pub fn power(sigma: f64, p: f64) -> Result<Self> {
        let m = VolModel::Power { sigma, p };
        m.validate()?;
        Ok(m)
    }

    /// Geometric Brownian motion, the p = 1 member of the power family.
    pub fn gbm(sigma: f64) -> Result<Self> {
        Self::power(sigma, 1.0)
    }

    pub fn power_log(sigma: f64) -> Result<Self> {
        let m = VolModel::PowerLog { sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(knots: Vec<(f64, f64)>, exponent: f64) -> Result<Self> {
        Ok(VolModel::Tabulated(TabulatedVol::new(knots, exponent)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            VolModel::Power { sigma, p } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return domain(format!("sigma = {sigma} must be positive"));
                }
                if !(p.is_finite() && *p >= 1.0) {
                    return domain(format!("p = {p} must be at least 1"));
                }
            }
            VolModel::PowerLog { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return domain(format!("sigma = {sigma} must be positive"));
                }
            }
            VolModel::Tabulated(t) => {
                TabulatedVol::new(t.knots.clone(), t.exponent)?;
            }
        }
        Ok(())
    }

    /// α(x), rejecting negative coordinates.
    pub fn alpha(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return domain(format!("alpha evaluated at x = {x} < 0"));
        }
        Ok(self.value(x))
    }

    /// α(x) for `x >= 0`; callers guarantee the domain.
    pub(crate) fn value(&self, x: f64) -> f64 {
        match self {
            VolModel::Power { sigma, p } => {
                if *p == 2.0 {
                    sigma * x * x
                } else if *p == 1.0 {
                    sigma * x
                } else {
                    sigma * x.powf(*p)
                }
            }
            VolModel::PowerLog { sigma } => sigma * x * (std::f64::consts::E + x).ln().sqrt(),
            VolModel::Tabulated(t) => t.value(x),
        }
    }

    /// α²(x).
    pub(crate) fn alpha2(&self, x: f64) -> f64 {
        let a = self.value(x);
        a * a
    }

    /// σ when the model is the σx² bubble example.
    pub fn quadratic_sigma(&self) -> Option<f64> {
        match self {
            VolModel::Power { sigma, p } if *p == 2.0 => Some(*sigma),
            _ => None,
        }
    }
}

/// Structural properties of a payoff on all of `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffFlags {
    pub convex: bool,
    pub concave: bool,
    pub bounded: bool,
    /// g(x)/x → 0 as x → ∞.
    pub sublinear: bool,
}

/// Nonnegative, continuous payoff of at most linear growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payoff {
    Identity,
    Call { strike: f64 },
    Put { strike: f64 },
    /// min((x − K)⁺, C).
    CappedCall { strike: f64, cap: f64 },
    Constant { value: f64 },
    /// Linear interpolation through `knots` (first knot at x = 0), then a
    /// straight ray with `terminal_slope`.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
        terminal_slope: f64,
    },
}

impl Payoff {
    pub fn call(strike: f64) -> Result<Self> {
        let g = Payoff::Call { strike };
        g.validate()?;
        Ok(g)
    }

    pub fn put(strike: f64) -> Result<Self> {
        let g = Payoff::Put { strike };
        g.validate()?;
        Ok(g)
    }

    pub fn capped_call(strike: f64, cap: f64) -> Result<Self> {
        let g = Payoff::CappedCall { strike, cap };
        g.validate()?;
        Ok(g)
    }

    pub fn constant(value: f64) -> Result<Self> {
        let g = Payoff::Constant { value };
        g.validate()?;
        Ok(g)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>, terminal_slope: f64) -> Result<Self> {
        let g = Payoff::PiecewiseLinear {
            knots,
            terminal_slope,
        };
        g.validate()?;
        Ok(g)
    }

    /// min(x, level), the canonical concave test payoff.
    pub fn min_with(level: f64) -> Result<Self> {
        Self::piecewise_linear(vec![(0.0, 0.0), (level, level)], 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                domain(format!("{name} = {v} must be finite and nonnegative"))
            }
        };
        match self {
            Payoff::Identity => Ok(()),
            Payoff::Call { strike } => finite_nonneg("strike", *strike),
            Payoff::Put { strike } => {
                if strike.is_finite() && *strike > 0.0 {
                    Ok(())
                } else {
                    domain(format!("put strike = {strike} must be positive"))
                }
            }
            Payoff::CappedCall { strike, cap } => {
                finite_nonneg("strike", *strike)?;
                if cap.is_finite() && *cap > 0.0 {
                    Ok(())
                } else {
                    domain(format!("cap = {cap} must be positive"))
                }
            }
            Payoff::Constant { value } => finite_nonneg("constant", *value),
            Payoff::PiecewiseLinear {
                knots,
                terminal_slope,
            } => {
                if knots.is_empty() {
                    return domain("piecewise-linear payoff needs at least one knot");
                }
                if knots[0].0 != 0.0 {
                    return domain("piecewise-linear payoff must start with a knot at x = 0");
                }
                finite_nonneg("terminal slope", *terminal_slope)?;
                for (i, &(x, g)) in knots.iter().enumerate() {
                    finite_nonneg(&format!("knot {i} value"), g)?;
                    if !x.is_finite() {
                        return domain(format!("knot {i}: x must be finite"));
                    }
                    if i > 0 && x <= knots[i - 1].0 {
                        return domain(format!("knot {i}: x values must be strictly increasing"));
                    }
                }
                Ok(())
            }
        }
    }

    /// g(x). Negative inputs are treated as the absorbed state 0.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self {
            Payoff::Identity => x,
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Put { strike } => (strike - x).max(0.0),
            Payoff::CappedCall { strike, cap } => (x - strike).max(0.0).min(*cap),
            Payoff::Constant { value } => *value,
            Payoff::PiecewiseLinear {
                knots,
                terminal_slope,
            } => {
                let (xl, gl) = *knots.last().unwrap();
                if x >= xl {
                    return gl + terminal_slope * (x - xl);
                }
                let k = knots.partition_point(|&(kx, _)| kx <= x);
                let (xa, ga) = knots[k - 1];
                let (xb, gb) = knots[k];
                ga + (gb - ga) * (x - xa) / (xb - xa)
            }
        }
    }

    /// min(g(x), cap).
    pub fn eval_capped(&self, x: f64, cap: Option<f64>) -> f64 {
        match cap {
            Some(m) => self.eval(x).min(m),
            None => self.eval(x),
        }
    }

    /// Closed-form structural flags.
    pub fn flags(&self) -> PayoffFlags {
        match self {
            Payoff::Identity => PayoffFlags {
                convex: true,
                concave: true,
                bounded: false,
                sublinear: false,
            },
            Payoff::Call { strike } => PayoffFlags {
                convex: true,
                concave: *strike == 0.0,
                bounded: false,
                sublinear: false,
            },
            Payoff::Put { .. } => PayoffFlags {
                convex: true,
                concave: false,
                bounded: true,
                sublinear: true,
            },
            Payoff::CappedCall { strike, .. } => PayoffFlags {
                convex: false,
                concave: *strike == 0.0,
                bounded: true,
                sublinear: true,
            },
            Payoff::Constant { .. } => PayoffFlags {
                convex: true,
                concave: true,
                bounded: true,
                sublinear: true,
            },
            Payoff::PiecewiseLinear {
                knots,
                terminal_slope,
            } => {
                let mut slopes: Vec<f64> = knots
                    .windows(2)
                    .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                    .collect();
                slopes.push(*terminal_slope);
                let tol = 1e-12;
                let convex = slopes.windows(2).all(|s| s[1] >= s[0] - tol);
                let concave = slopes.windows(2).all(|s| s[1] <= s[0] + tol);
                let bounded = *terminal_slope == 0.0;
                PayoffFlags {
                    convex,
                    concave,
                    bounded,
                    sublinear: bounded,
                }
            }
        }
    }

    /// Nonincreasing on `[0, ∞)`.
    pub fn is_decreasing(&self) -> bool {
        match self {
            Payoff::Put { .. } | Payoff::Constant { .. } => true,
            Payoff::PiecewiseLinear {
                knots,
                terminal_slope,
            } => *terminal_slope == 0.0 && knots.windows(2).all(|w| w[1].1 <= w[0].1),
            _ => false,
        }
    }

    /// Kink locations, used to seed dense samplings.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Payoff::Identity | Payoff::Constant { .. } => vec![0.0],
            Payoff::Call { strike } | Payoff::Put { strike } => vec![0.0, *strike],
            Payoff::CappedCall { strike, cap } => vec![0.0, *strike, strike + cap],
            Payoff::PiecewiseLinear { knots, .. } => knots.iter().map(|k| k.0).collect(),
        }
    }

    /// Smallest x* with min(g, cap) constant on `[x*, ∞)`, if any.
    pub fn flat_beyond(&self, cap: Option<f64>) -> Option<f64> {
        let m = cap.unwrap_or(f64::INFINITY);
        match self {
            Payoff::Constant { .. } => Some(0.0),
            Payoff::Put { strike } => Some(*strike),
            Payoff::CappedCall { strike, cap: c } => Some(strike + c.min(m)),
            Payoff::Identity => m.is_finite().then_some(m),
            Payoff::Call { strike } => m.is_finite().then_some(strike + m),
            Payoff::PiecewiseLinear {
                knots,
                terminal_slope,
            } => {
                let (xl, gl) = *knots.last().unwrap();
                if *terminal_slope == 0.0 {
                    // The cap may bind earlier, but the last knot is always a valid bound.
                    Some(if gl <= m { xl } else { xl.min(self.first_crossing(m)) })
                } else if m.is_finite() {
                    Some(if gl >= m {
                        self.first_crossing(m)
                    } else {
                        xl + (m - gl) / terminal_slope
                    })
                } else {
                    None
                }
            }
        }
    }

    // Past the last knot at which g first reaches `level` on a nondecreasing
    // tail; conservative (returns the last knot) otherwise.
    fn first_crossing(&self, level: f64) -> f64 {
        if let Payoff::PiecewiseLinear { knots, .. } = self {
            let last = knots.last().unwrap().0;
            let tail_ok = |k: usize| knots[k..].windows(2).all(|w| w[1].1 >= w[0].1);
            for k in 1..knots.len() {
                let (xa, ga) = knots[k - 1];
                let (xb, gb) = knots[k];
                if gb >= level && tail_ok(k) {
                    return if ga >= level {
                        xa
                    } else {
                        xa + (level - ga) * (xb - xa) / (gb - ga)
                    };
                }
            }
            last
        } else {
            0.0
        }
    }

    /// Smallest C with g(x) ≤ C(1 + x) on the payoff's own scale.
    pub fn linear_growth_constant(&self) -> f64 {
        let mut c: f64 = 0.0;
        for x in self.breakpoints() {
            c = c.max(self.eval(x) / (1.0 + x));
        }
        let slope = match self {
            Payoff::Identity | Payoff::Call { .. } => 1.0,
            Payoff::PiecewiseLinear { terminal_slope, .. } => *terminal_slope,
            _ => 0.0,
        };
        c.max(slope)
    }

    pub fn sup(&self) -> f64 {
        if !self.flags().bounded {
            return f64::INFINITY;
        }
        self.breakpoints()
            .into_iter()
            .map(|x| self.eval(x))
            .fold(0.0, f64::max)
    }
}

/// Volatility, short rate and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub vol: VolModel,
    pub rate: f64,
    pub horizon: f64,
}

impl MarketSpec {
    pub fn new(vol: VolModel, rate: f64, horizon: f64) -> Result<Self> {
        vol.validate()?;
        if !(rate.is_finite() && rate >= 0.0) {
            return domain(format!("rate = {rate} must be nonnegative"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return domain(format!("horizon = {horizon} must be positive"));
        }
        Ok(Self { vol, rate, horizon })
    }

    /// Zero-rate market, the setting of every European result.
    pub fn zero_rate(vol: VolModel, horizon: f64) -> Result<Self> {
        Self::new(vol, 0.0, horizon)
    }

    pub(crate) fn require_zero_rate(&self) -> Result<()> {
        if self.rate != 0.0 {
            return domain(format!(
                "European operations assume a zero short rate, got r = {}",
                self.rate
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        let bubble = VolModel::power(1.0, 2.0).unwrap();
        assert_eq!(bubble.alpha(2.0).unwrap(), 4.0);
        assert_eq!(bubble.alpha(0.0).unwrap(), 0.0);
        let gbm = VolModel::gbm(0.2).unwrap();
        assert!((gbm.alpha(100.0).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(VolModel::power(0.3, 1.5).unwrap().alpha(0.0).unwrap(), 0.0);
        assert!(bubble.alpha(-1.0).is_err());
    }

    #[test]
    fn power_log_and_tabulated() {
        let m = VolModel::power_log(1.0).unwrap();
        let x: f64 = 3.0;
        assert!((m.alpha(x).unwrap() - x * (std::f64::consts::E + x).ln().sqrt()).abs() < 1e-14);

        let t = VolModel::tabulated(vec![(1.0, 0.5), (2.0, 1.0), (4.0, 4.0)], 2.0).unwrap();
        assert!((t.alpha(1.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((t.alpha(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((t.alpha(8.0).unwrap() - 16.0).abs() < 1e-12);
        assert_eq!(t.alpha(0.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(VolModel::power(-1.0, 2.0).is_err());
        assert!(VolModel::power(1.0, 0.5).is_err());
        assert!(VolModel::tabulated(vec![(1.0, 1.0), (1.0, 2.0)], 1.0).is_err());
        assert!(VolModel::tabulated(vec![(1.0, 0.0)], 1.0).is_err());
        assert!(MarketSpec::new(VolModel::gbm(0.2).unwrap(), -0.1, 1.0).is_err());
        assert!(MarketSpec::new(VolModel::gbm(0.2).unwrap(), 0.0, 0.0).is_err());
    }

    #[test]
    fn payoff_examples() {
        assert_eq!(Payoff::call(1.0).unwrap().eval(1.5), 0.5);
        assert_eq!(Payoff::capped_call(1.0, 2.0).unwrap().eval(10.0), 2.0);
        assert_eq!(Payoff::Identity.eval(0.0), 0.0);
        let g = Payoff::piecewise_linear(vec![(0.0, 1.0), (1.0, 0.0)], 0.0).unwrap();
        assert_eq!(g.eval(0.25), 0.75);
        assert_eq!(g.eval(5.0), 0.0);
        assert!(Payoff::put(0.0).is_err());
        assert!(Payoff::piecewise_linear(vec![(1.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn payoff_flag_examples() {
        let f = |convex, concave, bounded, sublinear| PayoffFlags {
            convex,
            concave,
            bounded,
            sublinear,
        };
        assert_eq!(Payoff::Identity.flags(), f(true, true, false, false));
        assert_eq!(
            Payoff::capped_call(1.0, 2.0).unwrap().flags(),
            f(false, false, true, true)
        );
        assert_eq!(Payoff::put(1.0).unwrap().flags(), f(true, false, true, true));
        assert_eq!(Payoff::min_with(1.0).unwrap().flags(), f(false, true, true, true));
        assert_eq!(Payoff::call(1.0).unwrap().flags(), f(true, false, false, false));
    }

    #[test]
    fn flat_beyond_matches_family() {
        assert_eq!(Payoff::Identity.flat_beyond(Some(4.0)), Some(4.0));
        assert_eq!(Payoff::Identity.flat_beyond(None), None);
        assert_eq!(Payoff::call(1.0).unwrap().flat_beyond(Some(4.0)), Some(5.0));
        assert_eq!(Payoff::put(2.0).unwrap().flat_beyond(None), Some(2.0));
        assert_eq!(
            Payoff::capped_call(1.0, 2.0).unwrap().flat_beyond(Some(10.0)),
            Some(3.0)
        );
        let g = Payoff::piecewise_linear(vec![(0.0, 0.0), (2.0, 2.0)], 1.0).unwrap();
        assert_eq!(g.flat_beyond(Some(5.0)), Some(5.0));
        assert_eq!(g.flat_beyond(Some(1.0)), Some(1.0));
    }
}
