//! Price surfaces on a space-time grid and their CSV form.
//!
//! CSV layout: header `x,t,<column>`, then one row per node, time-major
//! (all x at t_0, then all x at t_1, ...). Values use the shortest
//! representation that round-trips exactly.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::{MarketSpec, Payoff};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    ImplicitEuler,
    /// Crank–Nicolson preceded by `rannacher_steps` implicit Euler steps.
    CrankNicolson { rannacher_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FarBoundary {
    /// u(x_max, t) = min(g, M)(x_max).
    DirichletCappedPayoff,
    /// Zero first difference at x_max.
    NeumannZero,
    /// u(x_max, t) = g(x_max), uncapped. Diagnostic only: for a bubble this
    /// selects the non-minimal solution.
    PinnedPayoff,
}

/// Where a surface came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeta {
    pub market: Option<MarketSpec>,
    pub payoff: Option<Payoff>,
    pub scheme: Option<Scheme>,
    pub far_boundary: Option<FarBoundary>,
    /// Cap applied to the terminal data, if any.
    pub cap: Option<f64>,
    /// Every cap solved on the way to this surface.
    pub cap_schedule: Vec<f64>,
    pub source: String,
}

impl SurfaceMeta {
    pub fn sampled(source: impl Into<String>) -> Self {
        Self {
            market: None,
            payoff: None,
            scheme: None,
            far_boundary: None,
            cap: None,
            cap_schedule: Vec::new(),
            source: source.into(),
        }
    }
}

/// `values[i][j]` is u(x_i, t_j).
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSurface {
    pub grid: Grid1D,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub meta: SurfaceMeta,
}

impl PriceSurface {
    /// Samples `f(x, t)` on the grid.
    pub fn from_fn(grid: Grid1D, horizon: f64, meta: SurfaceMeta, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.nodes();
        let ts = grid.times(horizon);
        let values = xs
            .iter()
            .map(|&x| ts.iter().map(|&t| f(x, t)).collect())
            .collect();
        Self {
            grid,
            xs,
            ts,
            values,
            meta,
        }
    }

    pub fn horizon(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// The x-slice at time level `j`.
    pub fn slice(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// u(x, t_j) by linear interpolation in x; clamps outside `[0, x_max]`.
    pub fn value_at(&self, x: f64, j: usize) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.values[0][j];
        }
        if x >= self.xs[n - 1] {
            return self.values[n - 1][j];
        }
        let k = self.xs.partition_point(|&xi| xi <= x);
        let (xa, xb) = (self.xs[k - 1], self.xs[k]);
        let w = (x - xa) / (xb - xa);
        (1.0 - w) * self.values[k - 1][j] + w * self.values[k][j]
    }

    /// u(x, 0).
    pub fn price(&self, x: f64) -> f64 {
        self.value_at(x, 0)
    }

    /// Index of the last node with `x_i <= x`.
    pub fn node_index_at_or_below(&self, x: f64) -> usize {
        self.xs.partition_point(|&xi| xi <= x).saturating_sub(1)
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let k = self.node_index_at_or_below(x);
        if k + 1 < self.xs.len() && (self.xs[k + 1] - x).abs() < (x - self.xs[k]).abs() {
            k + 1
        } else {
            k
        }
    }

    /// Three-point second divided difference at interior node `i`, level `j`.
    pub fn second_difference(&self, i: usize, j: usize) -> f64 {
        second_divided_difference(
            (self.xs[i - 1], self.values[i - 1][j]),
            (self.xs[i], self.values[i][j]),
            (self.xs[i + 1], self.values[i + 1][j]),
        )
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        write_node_csv(out, &self.xs, &self.ts, "u", |i, j| self.values[i][j].to_string())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

pub(crate) fn second_divided_difference(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let (hm, hp) = (b.0 - a.0, c.0 - b.0);
    2.0 * (a.1 / (hm * (hm + hp)) - b.1 / (hm * hp) + c.1 / (hp * (hm + hp)))
}

pub(crate) fn write_node_csv(
    mut out: impl Write,
    xs: &[f64],
    ts: &[f64],
    column: &str,
    cell: impl Fn(usize, usize) -> String,
) -> Result<()> {
    writeln!(out, "x,t,{column}")?;
    for (j, t) in ts.iter().enumerate() {
        for (i, x) in xs.iter().enumerate() {
            writeln!(out, "{x},{t},{}", cell(i, j))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Table read back from a node CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub column: String,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// `cells[i][j]` as written.
    pub cells: Vec<Vec<String>>,
}

impl NodeTable {
    pub fn numeric(&self) -> Result<Vec<Vec<f64>>> {
        self.cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.parse::<f64>().map_err(|e| Error::Numeric(format!("bad cell {c:?}: {e}"))))
                    .collect()
            })
            .collect()
    }
}

/// Parses a CSV written by [`PriceSurface::write_csv`] (or the exercise mask).
pub fn read_node_csv(input: impl Read) -> Result<NodeTable> {
    let bad = |msg: String| Error::Numeric(format!("malformed surface CSV: {msg}"));
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != 3 || cols[0] != "x" || cols[1] != "t" {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let column = cols[2].to_string();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(bad(format!("row {k} has {} fields", parts.len())));
        }
        let x: f64 = parts[0].parse().map_err(|e| bad(format!("row {k}: {e}")))?;
        let t: f64 = parts[1].parse().map_err(|e| bad(format!("row {k}: {e}")))?;
        rows.push((x, t, parts[2].to_string()));
    }
    let mut ts: Vec<f64> = Vec::new();
    for r in &rows {
        if ts.last() != Some(&r.1) {
            ts.push(r.1);
        }
    }
    if ts.is_empty() || rows.len() % ts.len() != 0 {
        return Err(bad("row count is not a multiple of the time levels".into()));
    }
    let nx = rows.len() / ts.len();
    let xs: Vec<f64> = rows[..nx].iter().map(|r| r.0).collect();
    let mut cells = vec![Vec::with_capacity(ts.len()); nx];
    for (k, (x, t, c)) in rows.into_iter().enumerate() {
        let (i, j) = (k % nx, k / nx);
        if x != xs[i] || t != ts[j] {
            return Err(bad(format!("row {k} breaks the time-major layout")));
        }
        cells[i].push(c);
    }
    Ok(NodeTable {
        column,
        xs,
        ts,
        cells,
    })
}
