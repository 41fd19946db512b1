//! American options as a discrete obstacle problem.
//!
//! Each implicit Euler step solves `max(L_h U, g − U) = 0` by projected SOR,
//! where `L_h` carries the drift `r x ∂x` and the discount `−r`. The
//! constructions `α ∧ M` with payoff `(1 − ε) g` and stopping at the first
//! passage above a level are exposed for comparison with the full problem.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::Grid1D;
use crate::model::{MarketSpec, Payoff};
use crate::operator::Generator;
use crate::pde::FarRow;
use crate::surface::{write_node_csv, FarBoundary, PriceSurface, Scheme, SurfaceMeta};
use crate::tridiag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LCPConfig {
    /// Over-relaxation factor in (1, 2).
    pub omega: f64,
    /// Stop when no node moves by more than this in one sweep.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for LCPConfig {
    fn default() -> Self {
        Self {
            omega: 1.5,
            tol: 1e-9,
            max_iterations: 10_000,
        }
    }
}

impl LCPConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 1.0 && self.omega < 2.0) {
            return domain(format!("omega = {} must lie in (1, 2)", self.omega));
        }
        if !(self.tol > 0.0) || self.max_iterations == 0 {
            return domain("PSOR needs tol > 0 and at least one iteration");
        }
        Ok(())
    }
}

/// Value surface plus the node-level exercise region.
#[derive(Debug, Clone, PartialEq)]
pub struct AmericanSurface {
    pub surface: PriceSurface,
    /// `exercised[i][j]`: U − g ≤ 10·tol at (x_i, t_j).
    pub exercised: Vec<Vec<bool>>,
    /// The obstacle the surface was solved against, per node.
    pub obstacle: Vec<f64>,
}

impl AmericanSurface {
    fn new(surface: PriceSurface, obstacle: Vec<f64>, tol: f64) -> Self {
        let exercised = surface
            .values
            .iter()
            .zip(&obstacle)
            .map(|(row, &g)| row.iter().map(|&u| u - g <= 10.0 * tol).collect())
            .collect();
        Self {
            surface,
            exercised,
            obstacle,
        }
    }

    /// Header `x,t,exercised`, cells `0`/`1`, same layout as the value CSV.
    pub fn write_exercise_csv(&self, out: impl Write) -> Result<()> {
        let s = &self.surface;
        write_node_csv(out, &s.xs, &s.ts, "exercised", |i, j| {
            u8::from(self.exercised[i][j]).to_string()
        })
    }

    pub fn save_exercise_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_exercise_csv(std::io::BufWriter::new(file))
    }

    /// min over nodes of U − g.
    pub fn obstacle_gap(&self) -> f64 {
        self.surface
            .values
            .iter()
            .zip(&self.obstacle)
            .flat_map(|(row, &g)| row.iter().map(move |&u| u - g))
            .fold(f64::INFINITY, f64::min)
    }
}

struct Problem<'a> {
    xs: Vec<f64>,
    ts: Vec<f64>,
    op: Generator,
    obstacle: Vec<f64>,
    far: FarRow,
    /// Time levels where exercise is allowed; `None` means all of them.
    dates: Option<&'a [bool]>,
}

fn psor_step(
    lo: &[f64],
    di: &[f64],
    up: &[f64],
    rhs: &[f64],
    obstacle: &[f64],
    far: FarRow,
    u: &mut [f64],
    config: &LCPConfig,
    step: usize,
) -> Result<()> {
    let n = u.len();
    let mut change = f64::INFINITY;
    for _ in 0..config.max_iterations {
        change = 0.0;
        for i in 1..n - 1 {
            let gs = (rhs[i] - lo[i] * u[i - 1] - up[i] * u[i + 1]) / di[i];
            let new = (u[i] + config.omega * (gs - u[i])).max(obstacle[i]);
            change = change.max((new - u[i]).abs());
            u[i] = new;
        }
        if let FarRow::Neumann = far {
            let new = u[n - 2].max(obstacle[n - 1]);
            change = change.max((new - u[n - 1]).abs());
            u[n - 1] = new;
        }
        if change <= config.tol {
            return Ok(());
        }
    }
    Err(Error::Psor {
        step,
        iterations: config.max_iterations,
        residual: change,
    })
}

fn solve_lcp(p: &Problem, config: &LCPConfig) -> Result<Vec<Vec<f64>>> {
    let (n, nt) = (p.xs.len(), p.ts.len());
    let mut values = vec![vec![0.0; nt]; n];
    let mut cur = p.obstacle.clone();
    for (i, v) in cur.iter().enumerate() {
        values[i][nt - 1] = *v;
    }
    let (mut lo, mut di, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut rhs = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    for step in 0..nt - 1 {
        let j = nt - 2 - step;
        let dt = p.ts[j + 1] - p.ts[j];
        for i in 1..n - 1 {
            lo[i] = -dt * p.op.lower[i];
            di[i] = 1.0 - dt * p.op.diag[i];
            up[i] = -dt * p.op.upper[i];
            rhs[i] = cur[i];
        }
        di[0] = 1.0;
        up[0] = 0.0;
        rhs[0] = p.obstacle[0];
        match p.far {
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
        // Continuation value, then the projected correction if exercise is
        // allowed at this level.
        let mut next = rhs.clone();
        tridiag::solve_in_place(&lo, &di, &up, &mut next, &mut scratch, 1e-14)?;
        if p.dates.is_none_or(|d| d[j]) {
            for (v, &g) in next.iter_mut().zip(&p.obstacle) {
                *v = v.max(g);
            }
            psor_step(&lo, &di, &up, &rhs, &p.obstacle, p.far, &mut next, config, step)?;
        }
        cur = next;
        for (i, v) in cur.iter().enumerate() {
            values[i][j] = *v;
        }
    }
    Ok(values)
}

fn far_row(payoff_at_max: f64, bounded: bool) -> (FarRow, FarBoundary) {
    if bounded {
        (FarRow::Neumann, FarBoundary::NeumannZero)
    } else {
        (FarRow::Dirichlet(payoff_at_max), FarBoundary::PinnedPayoff)
    }
}

fn run(
    market: &MarketSpec,
    payoff: &Payoff,
    scale: f64,
    vol_cap: Option<f64>,
    xs: Vec<f64>,
    grid: Grid1D,
    far: Option<(FarRow, FarBoundary)>,
    dates: Option<&[bool]>,
    config: &LCPConfig,
    source: &str,
) -> Result<AmericanSurface> {
    config.validate()?;
    payoff.validate()?;
    let ts = grid.times(market.horizon);
    let obstacle: Vec<f64> = xs.iter().map(|&x| scale * payoff.eval(x)).collect();
    let x_max = *xs.last().unwrap();
    let (far_row, far_kind) =
        far.unwrap_or_else(|| far_row(scale * payoff.eval(x_max), payoff.flags().bounded));
    let vol = &market.vol;
    let op = Generator::new(
        &xs,
        |x| match vol_cap {
            Some(m) => vol.value(x).min(m).powi(2),
            None => vol.alpha2(x),
        },
        market.rate,
    );
    let problem = Problem {
        xs,
        ts,
        op,
        obstacle,
        far: far_row,
        dates,
    };
    let values = solve_lcp(&problem, config)?;
    let Problem { xs, ts, obstacle, .. } = problem;
    let surface = PriceSurface {
        grid,
        xs,
        ts,
        values,
        meta: SurfaceMeta {
            market: Some(market.clone()),
            payoff: Some(payoff.clone()),
            scheme: Some(Scheme::ImplicitEuler),
            far_boundary: Some(far_kind),
            cap: vol_cap,
            cap_schedule: Vec::new(),
            source: source.into(),
        },
    };
    Ok(AmericanSurface::new(surface, obstacle, config.tol))
}

/// `U(x, t) = sup_τ E e^{−r(τ−t)} g(X(τ))` on the grid.
///
/// Far field: zero slope for bounded payoffs, `U(x_max) = g(x_max)` otherwise.
pub fn solve_american(market: &MarketSpec, payoff: &Payoff, grid: &Grid1D, config: &LCPConfig) -> Result<AmericanSurface> {
    grid.validate()?;
    run(market, payoff, 1.0, None, grid.nodes(), *grid, None, None, config, "american")
}

/// Exercise restricted to `k + 1` equispaced dates `iT/k`, `i = 0..=k`
/// (each rounded to the nearest time level).
///
/// The far field is the one of [`solve_american`]; for unbounded payoffs the
/// holder is also stopped at the first passage to `x_max`. The result then
/// approximates the stopped value with `M = x_max` from below.
pub fn solve_bermudan(
    market: &MarketSpec,
    payoff: &Payoff,
    k: usize,
    grid: &Grid1D,
    config: &LCPConfig,
) -> Result<AmericanSurface> {
    grid.validate()?;
    if k == 0 {
        return domain("a Bermudan option needs at least one exercise interval");
    }
    let nt = grid.nt;
    let mut dates = vec![false; nt];
    for i in 0..=k {
        let j = (i as f64 * (nt - 1) as f64 / k as f64).round() as usize;
        dates[j.min(nt - 1)] = true;
    }
    run(market, payoff, 1.0, None, grid.nodes(), *grid, None, Some(&dates), config, "bermudan")
}

/// American problem with volatility `α ∧ cap` and payoff `(1 − eps) g`.
pub fn capped_vol_american(
    market: &MarketSpec,
    payoff: &Payoff,
    cap: f64,
    eps: f64,
    grid: &Grid1D,
    config: &LCPConfig,
) -> Result<AmericanSurface> {
    grid.validate()?;
    if !payoff.flags().convex {
        return domain("the capped-volatility construction needs a convex payoff");
    }
    if !(cap > 0.0) {
        return domain(format!("volatility cap {cap} must be positive"));
    }
    if !(0.0..1.0).contains(&eps) {
        return domain(format!("eps = {eps} must lie in [0, 1)"));
    }
    run(market, payoff, 1.0 - eps, Some(cap), grid.nodes(), *grid, None, None, config, "american-capped-vol")
}

/// American problem stopped at the first passage above `level`: the grid
/// is cut to the nodes below `level`, `level` itself is appended, and
/// exercise is forced there (`U(level, t) = g(level)`).
pub fn stopped_american(
    market: &MarketSpec,
    payoff: &Payoff,
    level: f64,
    grid: &Grid1D,
    config: &LCPConfig,
) -> Result<AmericanSurface> {
    grid.validate()?;
    if !(payoff.is_decreasing() && payoff.flags().convex) {
        return domain("the stopped construction needs a decreasing convex payoff");
    }
    if !(level > 0.0 && level <= grid.x_max) {
        return domain(format!("level {level} must lie in (0, x_max = {}]", grid.x_max));
    }
    let mut xs: Vec<f64> = grid.nodes().into_iter().filter(|&x| x < level).collect();
    xs.push(level);
    if xs.len() < 4 {
        return domain(format!("level {level} leaves fewer than 4 nodes"));
    }
    let mut cut = *grid;
    cut.x_max = level;
    cut.nx = xs.len();
    let far = (FarRow::Dirichlet(payoff.eval(level)), FarBoundary::PinnedPayoff);
    run(market, payoff, 1.0, None, xs, cut, Some(far), None, config, "american-stopped")
}
