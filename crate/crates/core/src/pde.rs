//! Backward finite-difference solver for `u_t + ½α²(x) u_xx = 0`,
//! `u(x, T) = g(x)`, `u(0, t) = g(0)`.
//!
//! When the underlying is a strict local martingale the equation has many
//! solutions of linear growth. The risk-neutral price is the minimal one and
//! is reached through capped terminal data `min(g, M)`, whose solutions are
//! unique and increase to the price as `M → ∞`. [`solve_minimal`] drives that
//! limit; [`solve_capped`] is a single round.

use serde::{Deserialize, Serialize};

use crate::closed_form::price_x2;
use crate::error::{domain, Error, Result};
use crate::grid::{Grid1D, Stretching};
use crate::model::{MarketSpec, Payoff, VolModel};
use crate::operator::Generator;
use crate::surface::{FarBoundary, PriceSurface, Scheme, SurfaceMeta};
use crate::tridiag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub scheme: Scheme,
    pub far_boundary: FarBoundary,
    /// Relative pivot threshold for the tridiagonal solves.
    pub pivot_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::CrankNicolson { rannacher_steps: 2 },
            far_boundary: FarBoundary::DirichletCappedPayoff,
            pivot_tol: 1e-14,
        }
    }
}

impl SolveConfig {
    pub fn with_far_boundary(mut self, far_boundary: FarBoundary) -> Self {
        self.far_boundary = far_boundary;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    fn validate(&self, grid: &Grid1D) -> Result<()> {
        if let Scheme::CrankNicolson { rannacher_steps } = self.scheme {
            if rannacher_steps > grid.nt / 4 {
                return domain(format!(
                    "rannacher_steps = {rannacher_steps} exceeds nt/4 = {}",
                    grid.nt / 4
                ));
            }
        }
        if !(self.pivot_tol >= 0.0 && self.pivot_tol < 1.0) {
            return domain(format!("pivot tolerance {} must lie in [0, 1)", self.pivot_tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum FarRow {
    Dirichlet(f64),
    Neumann,
}

struct StepSystem {
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl StepSystem {
    fn new(n: usize) -> Self {
        Self {
            lo: vec![0.0; n],
            di: vec![0.0; n],
            up: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: Vec::with_capacity(n),
        }
    }

    /// One theta-scheme step backward in time, overwriting `cur`.
    fn step(
        &mut self,
        cur: &mut Vec<f64>,
        op: &Generator,
        dt: f64,
        theta: f64,
        lower_value: f64,
        far: FarRow,
        pivot_tol: f64,
    ) -> Result<()> {
        let n = cur.len();
        let Self { lo, di, up, rhs, scratch } = self;
        for i in 1..n - 1 {
            lo[i] = -theta * dt * op.lower[i];
            di[i] = 1.0 - theta * dt * op.diag[i];
            up[i] = -theta * dt * op.upper[i];
            rhs[i] = cur[i];
            if theta < 1.0 {
                rhs[i] += (1.0 - theta) * dt * op.apply(cur, i);
            }
        }
        di[0] = 1.0;
        up[0] = 0.0;
        rhs[0] = lower_value;
        match far {
            FarRow::Dirichlet(v) => {
                lo[n - 1] = 0.0;
                di[n - 1] = 1.0;
                rhs[n - 1] = v;
            }
            FarRow::Neumann => {
                lo[n - 1] = -1.0;
                di[n - 1] = 1.0;
                rhs[n - 1] = 0.0;
            }
        }
        tridiag::solve_in_place(lo, di, up, rhs, scratch, pivot_tol)?;
        std::mem::swap(cur, rhs);
        Ok(())
    }
}

/// Time-marches terminal data back to t = 0. Returns `values[i][j]`.
pub(crate) fn march(
    xs: &[f64],
    ts: &[f64],
    op: &Generator,
    terminal: Vec<f64>,
    lower_value: f64,
    far: FarRow,
    scheme: Scheme,
    pivot_tol: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = xs.len();
    let nt = ts.len();
    let mut values = vec![vec![0.0; nt]; n];
    let mut cur = terminal;
    for (i, v) in cur.iter().enumerate() {
        values[i][nt - 1] = *v;
    }
    let mut sys = StepSystem::new(n);
    for step in 0..nt - 1 {
        let j = nt - 2 - step;
        let dt = ts[j + 1] - ts[j];
        match scheme {
            Scheme::ImplicitEuler => sys.step(&mut cur, op, dt, 1.0, lower_value, far, pivot_tol)?,
            // Rannacher start: each startup step is two implicit half-steps.
            Scheme::CrankNicolson { rannacher_steps } if step < rannacher_steps => {
                sys.step(&mut cur, op, 0.5 * dt, 1.0, lower_value, far, pivot_tol)?;
                sys.step(&mut cur, op, 0.5 * dt, 1.0, lower_value, far, pivot_tol)?;
            }
            Scheme::CrankNicolson { .. } => sys.step(&mut cur, op, dt, 0.5, lower_value, far, pivot_tol)?,
        }
        for (i, v) in cur.iter().enumerate() {
            values[i][j] = *v;
        }
    }
    Ok(values)
}

fn solve_with_cap(
    market: &MarketSpec,
    payoff: &Payoff,
    cap: Option<f64>,
    grid: &Grid1D,
    config: &SolveConfig,
) -> Result<PriceSurface> {
    market.require_zero_rate()?;
    payoff.validate()?;
    grid.validate()?;
    config.validate(grid)?;
    let xs = grid.nodes();
    let ts = grid.times(market.horizon);
    let terminal: Vec<f64> = xs.iter().map(|&x| payoff.eval_capped(x, cap)).collect();
    let x_max = grid.x_max;
    let far = match config.far_boundary {
        FarBoundary::DirichletCappedPayoff => FarRow::Dirichlet(payoff.eval_capped(x_max, cap)),
        FarBoundary::PinnedPayoff => FarRow::Dirichlet(payoff.eval(x_max)),
        FarBoundary::NeumannZero => FarRow::Neumann,
    };
    let vol = &market.vol;
    let op = Generator::new(&xs, |x| vol.alpha2(x), 0.0);
    let lower = payoff.eval_capped(0.0, cap);
    let values = march(&xs, &ts, &op, terminal, lower, far, config.scheme, config.pivot_tol)?;
    Ok(PriceSurface {
        grid: *grid,
        xs,
        ts,
        values,
        meta: SurfaceMeta {
            market: Some(market.clone()),
            payoff: Some(payoff.clone()),
            scheme: Some(config.scheme),
            far_boundary: Some(config.far_boundary),
            cap,
            cap_schedule: cap.into_iter().collect(),
            source: "pde".into(),
        },
    })
}

/// One round: terminal data `min(g, cap_m)`, lower boundary `min(g(0), cap_m)`.
pub fn solve_capped(
    market: &MarketSpec,
    payoff: &Payoff,
    cap_m: f64,
    grid: &Grid1D,
    config: &SolveConfig,
) -> Result<PriceSurface> {
    if !(cap_m > 0.0 && cap_m.is_finite()) {
        return domain(format!("cap M = {cap_m} must be positive"));
    }
    solve_with_cap(market, payoff, Some(cap_m), grid, config)
}

/// Uncapped solve. Only meaningful for bounded payoffs, or with the
/// diagnostic [`FarBoundary::PinnedPayoff`].
pub fn solve_uncapped(
    market: &MarketSpec,
    payoff: &Payoff,
    grid: &Grid1D,
    config: &SolveConfig,
) -> Result<PriceSurface> {
    if !payoff.flags().bounded && config.far_boundary != FarBoundary::PinnedPayoff {
        return domain("an uncapped solve of an unbounded payoff needs the pinned far boundary");
    }
    solve_with_cap(market, payoff, None, grid, config)
}

/// Cap sequence `M_k = M0 · growth^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapSchedule {
    pub m0: f64,
    pub growth: f64,
    /// Sup-norm tolerance between successive rounds on the reporting window.
    pub tol: f64,
    pub max_rounds: usize,
}

impl Default for CapSchedule {
    fn default() -> Self {
        Self {
            m0: 4.0,
            growth: 2.0,
            tol: 1e-3,
            max_rounds: 8,
        }
    }
}

impl CapSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.m0 > 0.0 && self.growth > 1.0 && self.tol > 0.0) {
            return domain("cap schedule needs M0 > 0, growth > 1 and tol > 0");
        }
        if self.max_rounds < 2 {
            return domain("cap schedule needs at least two rounds");
        }
        Ok(())
    }

    pub fn caps(&self) -> Vec<f64> {
        (0..self.max_rounds)
            .map(|k| self.m0 * self.growth.powi(k as i32))
            .collect()
    }
}

/// How [`solve_minimal`] lays out its grid.
///
/// The capped problem's far-field value is only approached at distances far
/// beyond the cap: a Dirichlet node at `x_max` is reached before expiry with
/// probability of order `(x − E X(T)) / x_max`. So `x_max` is set to
/// `far_factor · max(4 x_report, x*)` with `x*` the point beyond which the
/// largest capped payoff is flat, and nodes are sinh-clustered on the
/// reporting window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub nx: usize,
    pub nt: usize,
    pub x_report: f64,
    pub far_factor: f64,
    pub stretched: bool,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            nx: 800,
            nt: 800,
            x_report: 5.0,
            far_factor: 1e4,
            stretched: true,
        }
    }
}

impl GridPolicy {
    pub fn with_size(mut self, nx: usize, nt: usize) -> Self {
        self.nx = nx;
        self.nt = nt;
        self
    }

    /// Grid used for every round of a schedule whose largest cap is `cap_max`.
    pub fn grid_for(&self, payoff: &Payoff, cap_max: f64) -> Result<Grid1D> {
        if !(self.x_report > 0.0 && self.far_factor >= 1.0) {
            return domain("grid policy needs x_report > 0 and far_factor >= 1");
        }
        let x_star = payoff.flat_beyond(Some(cap_max)).unwrap_or(cap_max);
        let x_max = self.far_factor * (4.0 * self.x_report).max(x_star);
        let stretching = if self.stretched {
            Stretching::Sinh {
                center: self.x_report / 5.0,
                intensity: 5.0 / self.x_report,
            }
        } else {
            Stretching::Uniform
        };
        Grid1D::new(x_max, self.nx, self.nt, stretching)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub caps: Vec<f64>,
    /// Sup over the window `[0, x_report] × [0, T]` of |u_k − u_{k−1}|.
    pub sup_diffs: Vec<f64>,
    /// Min over every node of u_k − u_{k−1}; negative entries break monotonicity.
    pub min_increments: Vec<f64>,
    /// Window node coordinates and, per round, the t = 0 values there.
    pub window_xs: Vec<f64>,
    pub window_values: Vec<Vec<f64>>,
}

impl ConvergenceReport {
    /// Solves performed, the initial cap included.
    pub fn solves(&self) -> usize {
        self.caps.len()
    }

    /// Cap refinements after the initial solve.
    pub fn rounds(&self) -> usize {
        self.caps.len().saturating_sub(1)
    }

    /// Largest pointwise decrease between successive caps (0 when monotone).
    pub fn monotonicity_violation(&self) -> f64 {
        self.min_increments.iter().fold(0.0, |acc: f64, &d| acc.max(-d)).max(0.0)
    }
}

/// Minimal (stochastic-representation) solution via the capped-payoff limit.
pub fn solve_minimal(
    market: &MarketSpec,
    payoff: &Payoff,
    policy: &GridPolicy,
    schedule: &CapSchedule,
    config: &SolveConfig,
) -> Result<(PriceSurface, ConvergenceReport)> {
    schedule.validate()?;
    payoff.validate()?;
    let caps = schedule.caps();
    let grid = policy.grid_for(payoff, *caps.last().unwrap())?;
    let window_end = grid
        .nodes()
        .partition_point(|&x| x <= policy.x_report);

    let mut report = ConvergenceReport {
        caps: Vec::new(),
        sup_diffs: Vec::new(),
        min_increments: Vec::new(),
        window_xs: grid.nodes()[..window_end].to_vec(),
        window_values: Vec::new(),
    };
    let mut prev: Option<PriceSurface> = None;
    for &cap in &caps {
        let mut surface = solve_capped(market, payoff, cap, &grid, config)?;
        report.caps.push(cap);
        report
            .window_values
            .push(surface.values[..window_end].iter().map(|row| row[0]).collect());
        if let Some(p) = &prev {
            let mut sup: f64 = 0.0;
            let mut min_inc = f64::INFINITY;
            for (i, (new_row, old_row)) in surface.values.iter().zip(&p.values).enumerate() {
                for (a, b) in new_row.iter().zip(old_row) {
                    let d = a - b;
                    min_inc = min_inc.min(d);
                    if i < window_end {
                        sup = sup.max(d.abs());
                    }
                }
            }
            report.sup_diffs.push(sup);
            report.min_increments.push(min_inc);
            if sup < schedule.tol {
                surface.meta.cap_schedule = report.caps.clone();
                return Ok((surface, report));
            }
        }
        prev = Some(surface);
    }
    Err(Error::Convergence {
        history: report.sup_diffs,
    })
}

/// Discrete residual of `u_t + ½α² u_xx` on a surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    /// Same shape as the surface; zero where the stencil does not fit.
    pub field: Vec<Vec<f64>>,
    /// Sup over the trimmed interior: two nodes off each x boundary, two
    /// levels off t = 0 and the terminal layer, plus the last two steps.
    pub sup_norm: f64,
}

impl ResidualField {
    /// Sup over nodes with `x ∈ x_range`, `t ∈ t_range`, restricted to the
    /// trimmed interior.
    pub fn sup_norm_in(&self, surface: &PriceSurface, x_range: (f64, f64), t_range: (f64, f64)) -> f64 {
        let (nx, nt) = (surface.xs.len(), surface.ts.len());
        let mut sup: f64 = 0.0;
        for i in 2..nx - 2 {
            if surface.xs[i] < x_range.0 || surface.xs[i] > x_range.1 {
                continue;
            }
            for j in 2..nt - 2 {
                if surface.ts[j] < t_range.0 || surface.ts[j] > t_range.1 {
                    continue;
                }
                sup = sup.max(self.field[i][j].abs());
            }
        }
        sup
    }
}

/// Central differences in x (three-point, nonuniform) and t.
pub fn pde_residual(surface: &PriceSurface, model: &VolModel) -> Result<ResidualField> {
    let (nx, nt) = (surface.xs.len(), surface.ts.len());
    if nx < 5 || nt < 5 {
        return domain("residual needs at least 5 nodes in each direction");
    }
    let mut field = vec![vec![0.0; nt]; nx];
    for (i, row) in field.iter_mut().enumerate().take(nx - 1).skip(1) {
        let a2 = model.alpha2(surface.xs[i]);
        let vals = &surface.values[i];
        for j in 1..nt - 1 {
            let u_t = (vals[j + 1] - vals[j - 1]) / (surface.ts[j + 1] - surface.ts[j - 1]);
            row[j] = u_t + 0.5 * a2 * surface.second_difference(i, j);
        }
    }
    let mut r = ResidualField {
        field,
        sup_norm: 0.0,
    };
    r.sup_norm = r.sup_norm_in(surface, (f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY));
    Ok(r)
}

/// `v(x, t) = x − E_{x,t} X(T̃)` for `t < T̃`, `0` afterwards, under
/// `dX = σX² dW`. Solves the homogeneous problem with zero terminal and
/// boundary data, yet is not identically zero.
pub fn nonuniqueness_family(sigma: f64, t_tilde: f64, horizon: f64, grid: &Grid1D) -> Result<PriceSurface> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma = {sigma} must be positive"));
    }
    if !(horizon > 0.0 && t_tilde > 0.0 && t_tilde <= horizon) {
        return domain(format!("T~ = {t_tilde} must lie in (0, T = {horizon}]"));
    }
    grid.validate()?;
    let mut meta = SurfaceMeta::sampled("nonuniqueness-family");
    meta.market = Some(MarketSpec::zero_rate(VolModel::power(sigma, 2.0)?, horizon)?);
    Ok(PriceSurface::from_fn(*grid, horizon, meta, |x, t| {
        if t < t_tilde {
            x - price_x2(x, t_tilde - t, sigma)
        } else {
            0.0
        }
    }))
}
