//! Run configuration: a sectioned TOML file.
//!
//! ```toml
//! seed = 42
//!
//! [market]   # family = "power" | "power-log" | "tabulated"
//! family = "power"
//! sigma = 1.0
//! p = 2.0
//! rate = 0.0
//! horizon = 1.0
//!
//! [payoff]   # kind = "identity" | "call" | "put" | "capped-call" | "constant" | "min" | "piecewise-linear"
//! kind = "identity"
//! ```
//!
//! Every key has a default (see `config/reference.toml`); unknown keys are
//! rejected. Errors name the offending key as `section.key`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::american::LCPConfig;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::mc::{PathConfig, PathScheme};
use crate::model::{MarketSpec, Payoff, VolModel};
use crate::pde::{CapSchedule, GridPolicy, SolveConfig};
use crate::surface::{FarBoundary, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    pub family: String,
    pub sigma: f64,
    pub p: f64,
    /// Tabulated family: `[[x, alpha], ...]`.
    pub knots: Vec<[f64; 2]>,
    pub exponent: f64,
    pub rate: f64,
    pub horizon: f64,
}

impl Default for MarketSection {
    fn default() -> Self {
        Self {
            family: "power".into(),
            sigma: 1.0,
            p: 2.0,
            knots: Vec::new(),
            exponent: 1.0,
            rate: 0.0,
            horizon: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PayoffSection {
    pub kind: String,
    pub strike: f64,
    pub cap: f64,
    /// `constant` value, or the level of `min` (g = min(x, level)).
    pub value: f64,
    pub knots: Vec<[f64; 2]>,
    pub terminal_slope: f64,
}

impl Default for PayoffSection {
    fn default() -> Self {
        Self {
            kind: "identity".into(),
            strike: 1.0,
            cap: 1.0,
            value: 1.0,
            knots: Vec::new(),
            terminal_slope: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nx: usize,
    pub nt: usize,
    /// Right end of the reporting window.
    pub x_report: f64,
    /// European grids: `x_max = far_factor · max(4 x_report, x*)`.
    pub far_factor: f64,
    pub stretched: bool,
    /// Uniform grid end for the American solver.
    pub american_x_max: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let p = GridPolicy::default();
        Self {
            nx: p.nx,
            nt: p.nt,
            x_report: p.x_report,
            far_factor: p.far_factor,
            stretched: p.stretched,
            american_x_max: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// "crank-nicolson" | "implicit-euler".
    pub scheme: String,
    pub rannacher_steps: usize,
    /// "dirichlet-capped-payoff" | "neumann-zero" | "pinned-payoff".
    pub far_boundary: String,
    pub pivot_tol: f64,
    pub cap_m0: f64,
    pub cap_growth: f64,
    pub cap_tol: f64,
    pub max_rounds: usize,
    pub omega: f64,
    pub lcp_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = CapSchedule::default();
        let l = LCPConfig::default();
        Self {
            scheme: "crank-nicolson".into(),
            rannacher_steps: 2,
            far_boundary: "dirichlet-capped-payoff".into(),
            pivot_tol: SolveConfig::default().pivot_tol,
            cap_m0: s.m0,
            cap_growth: s.growth,
            cap_tol: s.tol,
            max_rounds: s.max_rounds,
            omega: l.omega,
            lcp_tol: l.tol,
            max_iterations: l.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub n_paths: usize,
    pub n_steps: usize,
    /// "exact" | "euler".
    pub scheme: String,
    pub x0: f64,
    pub upper_barrier: Option<f64>,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            n_steps: 800,
            scheme: "exact".into(),
            x0: 1.0,
            upper_barrier: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Directory for CSV artifacts; none are written when unset.
    pub dir: Option<PathBuf>,
    /// Spot values reported at t = 0.
    pub probes: Vec<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            probes: vec![0.5, 1.0, 2.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub market: MarketSection,
    pub payoff: PayoffSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub mc: McSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            market: MarketSection::default(),
            payoff: PayoffSection::default(),
            grid: GridSection::default(),
            solver: SolverSection::default(),
            mc: McSection::default(),
            output: OutputSection::default(),
        }
    }
}

fn keyed<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Domain(msg) | Error::Config(msg) => Error::Config(format!("{key}: {msg}")),
        other => other,
    })
}

fn bad<T>(key: &str, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Config(format!("{key}: {msg}")))
}

fn pairs(knots: &[[f64; 2]]) -> Vec<(f64, f64)> {
    knots.iter().map(|k| (k[0], k[1])).collect()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn vol(&self) -> Result<VolModel> {
        let m = &self.market;
        match m.family.as_str() {
            "power" => keyed("market.sigma", VolModel::power(m.sigma, m.p)),
            "gbm" => keyed("market.sigma", VolModel::gbm(m.sigma)),
            "power-log" => keyed("market.sigma", VolModel::power_log(m.sigma)),
            "tabulated" => keyed("market.knots", VolModel::tabulated(pairs(&m.knots), m.exponent)),
            other => bad("market.family", format!("unknown family {other:?}")),
        }
    }

    pub fn market(&self) -> Result<MarketSpec> {
        let vol = self.vol()?;
        if !(self.market.rate >= 0.0) {
            return bad("market.rate", format!("{} must be nonnegative", self.market.rate));
        }
        keyed("market.horizon", MarketSpec::new(vol, self.market.rate, self.market.horizon))
    }

    pub fn payoff(&self) -> Result<Payoff> {
        let p = &self.payoff;
        match p.kind.as_str() {
            "identity" => Ok(Payoff::Identity),
            "call" => keyed("payoff.strike", Payoff::call(p.strike)),
            "put" => keyed("payoff.strike", Payoff::put(p.strike)),
            "capped-call" => keyed("payoff.cap", Payoff::capped_call(p.strike, p.cap)),
            "constant" => keyed("payoff.value", Payoff::constant(p.value)),
            "min" => keyed("payoff.value", Payoff::min_with(p.value)),
            "piecewise-linear" => keyed(
                "payoff.knots",
                Payoff::piecewise_linear(pairs(&p.knots), p.terminal_slope),
            ),
            other => bad("payoff.kind", format!("unknown kind {other:?}")),
        }
    }

    pub fn policy(&self) -> GridPolicy {
        GridPolicy {
            nx: self.grid.nx,
            nt: self.grid.nt,
            x_report: self.grid.x_report,
            far_factor: self.grid.far_factor,
            stretched: self.grid.stretched,
        }
    }

    pub fn american_grid(&self) -> Result<Grid1D> {
        keyed(
            "grid.american_x_max",
            Grid1D::uniform(self.grid.american_x_max, self.grid.nx, self.grid.nt),
        )
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let s = &self.solver;
        let scheme = match s.scheme.as_str() {
            "crank-nicolson" => Scheme::CrankNicolson {
                rannacher_steps: s.rannacher_steps,
            },
            "implicit-euler" => Scheme::ImplicitEuler,
            other => return bad("solver.scheme", format!("unknown scheme {other:?}")),
        };
        let far_boundary = match s.far_boundary.as_str() {
            "dirichlet-capped-payoff" => FarBoundary::DirichletCappedPayoff,
            "neumann-zero" => FarBoundary::NeumannZero,
            "pinned-payoff" => FarBoundary::PinnedPayoff,
            other => return bad("solver.far_boundary", format!("unknown boundary {other:?}")),
        };
        if let Scheme::CrankNicolson { rannacher_steps } = scheme {
            if rannacher_steps > self.grid.nt / 4 {
                return bad("solver.rannacher_steps", "must not exceed grid.nt / 4");
            }
        }
        Ok(SolveConfig {
            scheme,
            far_boundary,
            pivot_tol: s.pivot_tol,
        })
    }

    pub fn schedule(&self) -> Result<CapSchedule> {
        let s = &self.solver;
        let c = CapSchedule {
            m0: s.cap_m0,
            growth: s.cap_growth,
            tol: s.cap_tol,
            max_rounds: s.max_rounds,
        };
        keyed("solver.cap_m0", c.validate())?;
        Ok(c)
    }

    pub fn lcp(&self) -> Result<LCPConfig> {
        let s = &self.solver;
        let c = LCPConfig {
            omega: s.omega,
            tol: s.lcp_tol,
            max_iterations: s.max_iterations,
        };
        keyed("solver.omega", c.validate())?;
        Ok(c)
    }

    pub fn path_config(&self) -> Result<PathConfig> {
        let m = &self.mc;
        let scheme = match m.scheme.as_str() {
            "exact" => PathScheme::ExactReciprocalBessel3,
            "euler" => PathScheme::EulerAbsorbed,
            other => return bad("mc.scheme", format!("unknown scheme {other:?}")),
        };
        let c = PathConfig {
            n_paths: m.n_paths,
            n_steps: m.n_steps,
            seed: self.seed,
            scheme,
            upper_barrier: m.upper_barrier,
        };
        keyed("mc", c.validate())?;
        Ok(c)
    }

    /// Checks every section.
    pub fn validate(&self) -> Result<()> {
        self.market()?;
        self.payoff()?;
        self.solve_config()?;
        self.schedule()?;
        self.lcp()?;
        self.path_config()?;
        if self.grid.nx < 16 || self.grid.nt < 16 {
            return bad("grid.nx", "nx and nt must be at least 16");
        }
        if !(self.grid.x_report > 0.0) {
            return bad("grid.x_report", "must be positive");
        }
        if self.output.probes.iter().any(|&x| !(x >= 0.0)) {
            return bad("output.probes", "probes must be nonnegative");
        }
        if !(self.mc.x0 >= 0.0) {
            return bad("mc.x0", "must be nonnegative");
        }
        Ok(())
    }
}
