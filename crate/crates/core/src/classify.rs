//! Sufficient-condition martingality classifier.
//!
//! Two checks, neither of which is necessary:
//! * super-quadratic variance growth `α²(x) ≥ ε x^η` with `η > 2` forces a
//!   strict local martingale;
//! * linear growth `α(x) ≤ C(1 + x)` forces a true martingale.
//!
//! The classifier fits both on a geometric probe grid and only commits to a
//! verdict when the fitted bound actually holds at the probe points.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::VolModel;

/// η̂ must exceed 2 by this margin. Keeps log-corrected quadratic variance
/// (`x² ln x`, a true martingale) out of the strict verdict.
pub const ETA_MARGIN: f64 = 0.1;

/// Tolerated excess of the upper-half growth exponent of α over 1.
pub const LINEAR_GROWTH_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_points: usize,
}

impl Default for Probe {
    fn default() -> Self {
        Self {
            x_lo: 1.0,
            x_hi: 1e4,
            n_points: 64,
        }
    }
}

impl Probe {
    fn validate(&self) -> Result<()> {
        if !(self.x_lo >= 1.0 && self.x_hi > self.x_lo && self.x_hi.is_finite()) {
            return domain(format!(
                "probe range [{}, {}] must satisfy 1 <= x_lo < x_hi",
                self.x_lo, self.x_hi
            ));
        }
        if self.n_points < 16 {
            return domain(format!("probe needs at least 16 points, got {}", self.n_points));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.x_lo.ln(), self.x_hi.ln());
        let n = self.n_points;
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StrictLocalMartingale,
    TrueMartingale,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::StrictLocalMartingale => "strict-local-martingale",
            Verdict::TrueMartingale => "true-martingale",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub fitted_eta: f64,
    pub fitted_eps: f64,
    /// Max of α(x)/(1 + x) over the probe.
    pub linear_growth_c: f64,
    pub probe_range: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn classify_martingale(model: &VolModel, probe: &Probe) -> Result<ClassifierVerdict> {
    probe.validate()?;
    model.validate()?;
    let xs = probe.points();
    let alphas: Vec<f64> = xs.iter().map(|&x| model.value(x)).collect();
    let log_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let log_a2: Vec<f64> = alphas.iter().map(|a| 2.0 * a.ln()).collect();

    // Only the tail matters, so the fit uses the upper half of the probes.
    let mid = xs.len() / 2;
    let (eta, intercept) = least_squares(&log_x[mid..], &log_a2[mid..]);
    let eps = intercept.exp();
    let linear_growth_c = xs
        .iter()
        .zip(&alphas)
        .map(|(x, a)| a / (1.0 + x))
        .fold(0.0, f64::max);
    let evidence = Evidence {
        fitted_eta: eta,
        fitted_eps: eps,
        linear_growth_c,
        probe_range: (probe.x_lo, probe.x_hi),
    };

    if eta > 2.0 + ETA_MARGIN {
        // Bound must hold on the upper half and wherever x ≥ 1/ε̂.
        let from = xs[mid].min(1.0 / eps);
        let slack = 1.0 - 1e-9;
        let holds = xs
            .iter()
            .zip(&alphas)
            .filter(|(&x, _)| x >= from)
            .all(|(&x, &a)| a * a >= slack * eps * x.powf(eta));
        if holds {
            return Ok(ClassifierVerdict {
                verdict: Verdict::StrictLocalMartingale,
                evidence,
            });
        }
    }

    let (upper_slope, _) = least_squares(
        &log_x[mid..],
        &alphas[mid..].iter().map(|a| a.ln()).collect::<Vec<_>>(),
    );
    let verdict = if upper_slope <= 1.0 + LINEAR_GROWTH_MARGIN {
        Verdict::TrueMartingale
    } else {
        Verdict::Inconclusive
    };
    Ok(ClassifierVerdict { verdict, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(m: VolModel) -> ClassifierVerdict {
        classify_martingale(&m, &Probe::default()).unwrap()
    }

    #[test]
    fn quadratic_bubble_is_strict() {
        let v = run(VolModel::power(1.0, 2.0).unwrap());
        assert_eq!(v.verdict, Verdict::StrictLocalMartingale);
        assert!((v.evidence.fitted_eta - 4.0).abs() < 1e-9);
        assert!((v.evidence.fitted_eps - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gbm_is_true_martingale() {
        let v = run(VolModel::gbm(0.2).unwrap());
        assert_eq!(v.verdict, Verdict::TrueMartingale);
        assert!((v.evidence.fitted_eta - 2.0).abs() < 1e-9);
        assert!(v.evidence.linear_growth_c <= 0.2);
    }

    #[test]
    fn log_corrected_quadratic_is_inconclusive() {
        let v = run(VolModel::power_log(1.0).unwrap());
        assert_eq!(v.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn tabulated_tail_decides() {
        let knots = vec![(1.0, 1.0), (10.0, 100.0), (100.0, 10_000.0)];
        let v = run(VolModel::tabulated(knots.clone(), 2.0).unwrap());
        assert_eq!(v.verdict, Verdict::StrictLocalMartingale);
        assert!((v.evidence.fitted_eta - 4.0).abs() < 1e-9);
        let v = run(VolModel::tabulated(knots, -1.0).unwrap());
        assert_eq!(v.verdict, Verdict::TrueMartingale);
    }

    #[test]
    fn verdict_ignores_sigma() {
        for &p in &[1.0, 1.2, 1.5, 2.0, 3.0] {
            let base = run(VolModel::power(1.0, p).unwrap()).verdict;
            for &s in &[1e-3, 0.05, 0.7, 4.0, 300.0] {
                assert_eq!(run(VolModel::power(s, p).unwrap()).verdict, base, "p={p} s={s}");
            }
        }
    }

    #[test]
    fn strict_evidence_bound_holds() {
        for &(s, p) in &[(0.01, 2.0), (2.0, 1.3), (0.5, 1.6)] {
            let m = VolModel::power(s, p).unwrap();
            let v = run(m.clone());
            assert_eq!(v.verdict, Verdict::StrictLocalMartingale);
            let e = v.evidence;
            assert!(e.fitted_eta > 2.0);
            for x in Probe::default().points() {
                if x >= (1.0 / e.fitted_eps).max(1.0) {
                    assert!(m.alpha2(x) >= (1.0 - 1e-9) * e.fitted_eps * x.powf(e.fitted_eta));
                }
            }
        }
    }

    #[test]
    fn bad_probe_rejected() {
        let m = VolModel::gbm(0.2).unwrap();
        let bad = [
            Probe { x_lo: 0.5, x_hi: 10.0, n_points: 64 },
            Probe { x_lo: 10.0, x_hi: 10.0, n_points: 64 },
            Probe { x_lo: 1.0, x_hi: 10.0, n_points: 8 },
        ];
        for p in bad {
            assert!(classify_martingale(&m, &p).is_err());
        }
    }
}
