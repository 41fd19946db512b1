//! Spatial discretisation of `L u = ½α²(x) u_xx + r x u_x − r u` on a
//! nonuniform grid.

/// Row coefficients of the discrete generator at interior nodes:
/// `(L u)_i = lower[i] u_{i−1} + diag[i] u_i + upper[i] u_{i+1}`.
/// Entries at the two boundary rows are zero.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Generator {
    /// Central differences, except that the drift falls back to a forward
    /// (upwind) difference wherever the central stencil would make an
    /// off-diagonal negative.
    pub fn new(xs: &[f64], alpha2: impl Fn(f64) -> f64, rate: f64) -> Self {
        let n = xs.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            let (hm, hp) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            let d = 0.5 * alpha2(xs[i]);
            let mut lo = 2.0 * d / (hm * (hm + hp));
            let mut up = 2.0 * d / (hp * (hm + hp));
            let drift = rate * xs[i];
            if drift != 0.0 {
                let (c_lo, c_up) = (-drift * hp / (hm * (hm + hp)), drift * hm / (hp * (hm + hp)));
                if lo + c_lo >= 0.0 {
                    lo += c_lo;
                    up += c_up;
                } else {
                    up += drift / hp;
                }
            }
            lower[i] = lo;
            upper[i] = up;
            diag[i] = -(lo + up) - rate;
        }
        Self { lower, diag, upper }
    }

    pub fn apply(&self, u: &[f64], i: usize) -> f64 {
        self.lower[i] * u[i - 1] + self.diag[i] * u[i] + self.upper[i] * u[i + 1]
    }
}
