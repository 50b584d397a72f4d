//! The tracked square system
//!
//! ```text
//!   rows 0..d      ((1-t) A0^T + t A^T diag(u)) y
//!   rows d..n      R * (deformed circuit polynomials)(y, t)
//!   row  n         v . y - 1
//! ```
//!
//! with the arc `t(tau) = tau + gamma tau (1 - tau)` joining the start
//! system at tau = 0 to the target at tau = 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::ideal::CircuitPolynomial;

#[derive(Clone)]
pub struct HomotopySystem {
    pub d: usize,
    pub n: usize,
    pub a0t: DMatrix<Complex64>,
    pub at_u: DMatrix<Complex64>,
    pub polys: Vec<CircuitPolynomial>,
    pub squareup: DMatrix<Complex64>,
    pub patch: DVector<Complex64>,
    pub gamma: Complex64,
    /// Scale used to normalize residuals: max row 1-norm of the pieces.
    row_scale: f64,
    max_degree: usize,
}

impl HomotopySystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        n: usize,
        a0t: DMatrix<Complex64>,
        at_u: DMatrix<Complex64>,
        polys: Vec<CircuitPolynomial>,
        squareup: DMatrix<Complex64>,
        patch: DVector<Complex64>,
        gamma: Complex64,
    ) -> Self {
        assert_eq!(a0t.nrows(), d);
        assert_eq!(a0t.ncols(), n + 1);
        assert_eq!(at_u.nrows(), d);
        assert_eq!(squareup.nrows(), n - d);
        assert_eq!(squareup.ncols(), polys.len());
        assert_eq!(patch.len(), n + 1);
        let mut row_scale: f64 = 1.0;
        for i in 0..d {
            row_scale = row_scale.max(a0t.row(i).iter().map(|z| z.norm()).sum());
            row_scale = row_scale.max(at_u.row(i).iter().map(|z| z.norm()).sum());
        }
        let poly_scales: Vec<f64> = polys
            .iter()
            .map(|p| {
                p.terms
                    .iter()
                    .map(|t| crate::linalg::rat_to_f64(&t.coeff).abs())
                    .sum()
            })
            .collect();
        for r in 0..(n - d) {
            let s: f64 = (0..polys.len())
                .map(|c| squareup[(r, c)].norm() * poly_scales[c])
                .sum();
            row_scale = row_scale.max(s);
        }
        row_scale = row_scale.max(patch.iter().map(|z| z.norm()).sum());
        let max_degree = polys.iter().map(|p| p.degree()).max().unwrap_or(1);
        Self {
            d,
            n,
            a0t,
            at_u,
            polys,
            squareup,
            patch,
            gamma,
            row_scale,
            max_degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// The same system along a different arc. The endpoints at t = 1 do not
    /// depend on gamma, so a failed path may be re-tracked on a fresh arc.
    pub fn with_gamma(&self, gamma: Complex64) -> Self {
        let mut sys = self.clone();
        sys.gamma = gamma;
        sys
    }

    /// Arc value and derivative: `t(tau)`, `dt/dtau`.
    pub fn arc(&self, tau: f64) -> (Complex64, Complex64) {
        let tau_c = Complex64::new(tau, 0.0);
        let t = tau_c + self.gamma * tau_c * (1.0 - tau_c);
        let dt = Complex64::new(1.0, 0.0) + self.gamma * (1.0 - 2.0 * tau_c);
        (t, dt)
    }

    pub fn eval_at_t(&self, y: &DVector<Complex64>, t: Complex64) -> DVector<Complex64> {
        let dim = self.dim();
        let mut out = DVector::zeros(dim);
        let one_minus_t = Complex64::new(1.0, 0.0) - t;
        for i in 0..self.d {
            let mut v = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                v += (one_minus_t * self.a0t[(i, j)] + t * self.at_u[(i, j)]) * y[j];
            }
            out[i] = v;
        }
        let pvals: Vec<Complex64> = self
            .polys
            .iter()
            .map(|p| p.eval_deformed(y.as_slice(), t))
            .collect();
        for r in 0..(self.n - self.d) {
            out[self.d + r] = (0..pvals.len())
                .map(|c| self.squareup[(r, c)] * pvals[c])
                .sum();
        }
        out[dim - 1] = self.patch.dot(y) - Complex64::new(1.0, 0.0);
        out
    }

    pub fn jacobian_at_t(&self, y: &DVector<Complex64>, t: Complex64) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut jac = DMatrix::zeros(dim, dim);
        let one_minus_t = Complex64::new(1.0, 0.0) - t;
        for i in 0..self.d {
            for j in 0..dim {
                jac[(i, j)] = one_minus_t * self.a0t[(i, j)] + t * self.at_u[(i, j)];
            }
        }
        for (c, p) in self.polys.iter().enumerate() {
            for &j in &p.circuit.support {
                let dp = p.d_dy(y.as_slice(), t, j);
                for r in 0..(self.n - self.d) {
                    jac[(self.d + r, j)] += self.squareup[(r, c)] * dp;
                }
            }
        }
        for j in 0..dim {
            jac[(dim - 1, j)] = self.patch[j];
        }
        jac
    }

    /// `dS/dtau` at `(y, tau)` via the chain rule through the arc.
    pub fn dtau(&self, y: &DVector<Complex64>, tau: f64) -> DVector<Complex64> {
        let (t, dt) = self.arc(tau);
        let dim = self.dim();
        let mut out = DVector::zeros(dim);
        for i in 0..self.d {
            let mut v = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                v += (self.at_u[(i, j)] - self.a0t[(i, j)]) * y[j];
            }
            out[i] = v * dt;
        }
        let dts: Vec<Complex64> = self
            .polys
            .iter()
            .map(|p| p.d_dt(y.as_slice(), t))
            .collect();
        for r in 0..(self.n - self.d) {
            out[self.d + r] = (0..dts.len())
                .map(|c| self.squareup[(r, c)] * dts[c])
                .sum::<Complex64>()
                * dt;
        }
        out
    }

    pub fn eval(&self, y: &DVector<Complex64>, tau: f64) -> DVector<Complex64> {
        self.eval_at_t(y, self.arc(tau).0)
    }

    pub fn jacobian(&self, y: &DVector<Complex64>, tau: f64) -> DMatrix<Complex64> {
        self.jacobian_at_t(y, self.arc(tau).0)
    }

    /// Residual of the square system at `t = 1` normalized by the natural
    /// backward-error scale.
    pub fn endpoint_residual(&self, y: &DVector<Complex64>) -> f64 {
        let r = self.eval_at_t(y, Complex64::new(1.0, 0.0));
        let ynorm = y.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let scale = self.row_scale * ynorm.max(1.0).powi(self.max_degree as i32);
        r.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale.max(1.0)
    }
}
