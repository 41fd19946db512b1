//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `A x = rhs` in place, where row `i` of `A` is
/// `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. A pivot whose magnitude drops
/// below `pivot_tol` times the row scale is reported as a numeric error.
pub fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
    pivot_tol: f64,
) -> Result<()> {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    if n == 0 {
        return Ok(());
    }
    scratch.clear();
    scratch.resize(n, 0.0);

    let mut pivot = diag[0];
    check_pivot(0, pivot, diag[0].abs() + upper[0].abs(), pivot_tol)?;
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        check_pivot(i, pivot, lower[i].abs() + diag[i].abs() + upper[i].abs(), pivot_tol)?;
        scratch[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("tridiagonal solve produced non-finite values".into()));
    }
    Ok(())
}

fn check_pivot(row: usize, pivot: f64, scale: f64, tol: f64) -> Result<()> {
    if !pivot.is_finite() || pivot.abs() <= tol * scale {
        return Err(Error::Numeric(format!(
            "singular tridiagonal system: pivot {pivot:e} at row {row}"
        )));
    }
    Ok(())
}
