//! The problem instance: a rational matrix `L` whose columns are the
//! coefficient vectors of affine-linear forms, together with evaluation of
//! the critical equations of the log-potential and the reciprocal embedding.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{parse_rat, rat_to_f64, Rat, RatMat};

/// Relative threshold deciding whether a coordinate counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Relative threshold guarding evaluations against points on the arrangement.
const ON_ARRANGEMENT_TOL: f64 = 1e-12;

/// A hyperplane arrangement given by a `(d+1) x (n+1)` rational matrix `L`
/// of rank `d+1`. The forms are `(l_0(x), ..., l_n(x)) = (1, x) * L`, so
/// `L^T = (-b | A)` and `l(x) = A x - b`.
#[derive(Clone, Debug)]
pub struct ArrangementMatrix {
    l: RatMat,
    d: usize,
    n: usize,
    a: RatMat,      // (n+1) x d
    b: Vec<Rat>,    // n+1
    a_c: DMatrix<Complex64>,
    b_c: DVector<Complex64>,
}

#[derive(Deserialize)]
struct InstanceDoc {
    d: usize,
    n: usize,
    #[serde(rename = "L")]
    l: Vec<Vec<String>>,
    u: Option<Vec<[f64; 2]>>,
}

impl ArrangementMatrix {
    /// Validate and derive `A`, `b` from `L`.
    pub fn from_l(l: RatMat) -> Result<Self> {
        if l.nrows() < 2 || l.ncols() < 1 {
            return Err(Error::MalformedInput(format!(
                "L must have at least 2 rows and 1 column, got {}x{}",
                l.nrows(),
                l.ncols()
            )));
        }
        let d = l.nrows() - 1;
        let n = l.ncols() - 1;
        for j in 0..=n {
            if (0..=d).all(|i| l.get(i, j).is_zero()) {
                return Err(Error::MalformedInput(format!(
                    "column {j} of L is zero; the form l_{j} would vanish identically"
                )));
            }
        }
        let rank = l.rank();
        if rank != d + 1 {
            return Err(Error::RankDeficient {
                achieved: rank,
                required: d + 1,
            });
        }
        let a = RatMat::from_fn(n + 1, d, |i, j| l.get(j + 1, i).clone());
        let b: Vec<Rat> = (0..=n).map(|i| -l.get(0, i).clone()).collect();
        let a_c = DMatrix::from_fn(n + 1, d, |i, j| Complex64::new(rat_to_f64(a.get(i, j)), 0.0));
        let b_c = DVector::from_fn(n + 1, |i, _| Complex64::new(rat_to_f64(&b[i]), 0.0));
        Ok(Self {
            l,
            d,
            n,
            a,
            b,
            a_c,
            b_c,
        })
    }

    /// Parse the JSON instance document
    /// `{"d": int, "n": int, "L": [[rational-string]], "u": [[re,im]]?}`.
    /// Returns the arrangement and the optional exponent vector.
    pub fn parse(text: &str) -> Result<(Self, Option<Vec<Complex64>>)> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
        if doc.l.len() != doc.d + 1 {
            return Err(Error::MalformedInput(format!(
                "L has {} rows, expected d+1 = {}",
                doc.l.len(),
                doc.d + 1
            )));
        }
        let mut rows = Vec::with_capacity(doc.d + 1);
        for (i, row) in doc.l.iter().enumerate() {
            if row.len() != doc.n + 1 {
                return Err(Error::MalformedInput(format!(
                    "row {i} of L has {} entries, expected n+1 = {}",
                    row.len(),
                    doc.n + 1
                )));
            }
            let parsed: Result<Vec<Rat>> = row
                .iter()
                .map(|s| parse_rat(s).map_err(Error::MalformedInput))
                .collect();
            rows.push(parsed?);
        }
        let u = match doc.u {
            Some(pairs) => {
                if pairs.len() != doc.n + 1 {
                    return Err(Error::MalformedInput(format!(
                        "u has {} entries, expected n+1 = {}",
                        pairs.len(),
                        doc.n + 1
                    )));
                }
                let v: Vec<Complex64> = pairs
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::MalformedInput("u contains non-finite entries".into()));
                }
                Some(v)
            }
            None => None,
        };
        Ok((Self::from_l(RatMat::from_rows(rows))?, u))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of forms / ground set size, `n + 1`.
    pub fn ground_size(&self) -> usize {
        self.n + 1
    }

    pub fn l(&self) -> &RatMat {
        &self.l
    }

    /// `A` of shape `(n+1) x d`, the variable coefficients of the forms.
    pub fn a(&self) -> &RatMat {
        &self.a
    }

    pub fn b(&self) -> &[Rat] {
        &self.b
    }

    /// `A^T` as a complex `d x (n+1)` matrix.
    pub fn a_transpose_c(&self) -> DMatrix<Complex64> {
        self.a_c.transpose()
    }

    /// `A^T diag(u)`, the coefficient matrix of the linear equations in y.
    pub fn linear_section(&self, u: &[Complex64]) -> DMatrix<Complex64> {
        assert_eq!(u.len(), self.n + 1);
        let mut m = self.a_c.transpose();
        for j in 0..=self.n {
            for i in 0..self.d {
                m[(i, j)] *= u[j];
            }
        }
        m
    }

    /// `(l_0(x), ..., l_n(x)) = (1, x) * L`.
    pub fn linear_forms_at(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.d);
        (0..=self.n)
            .map(|i| {
                let mut v = -self.b_c[i];
                for (j, xj) in x.iter().enumerate() {
                    v += self.a_c[(i, j)] * xj;
                }
                v
            })
            .collect()
    }

    /// Exact evaluation of the forms at a rational point.
    pub fn linear_forms_at_rat(&self, x: &[Rat]) -> Vec<Rat> {
        assert_eq!(x.len(), self.d);
        (0..=self.n)
            .map(|i| {
                let mut v = -self.b[i].clone();
                for (j, xj) in x.iter().enumerate() {
                    v += self.a.get(i, j) * xj;
                }
                v
            })
            .collect()
    }

    fn forms_off_arrangement(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let ell = self.linear_forms_at(x);
        let scale = ell.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        for (i, v) in ell.iter().enumerate() {
            if v.norm() <= ON_ARRANGEMENT_TOL * scale.max(1.0) {
                return Err(Error::OnArrangement {
                    index: i,
                    value: v.norm(),
                });
            }
        }
        Ok(ell)
    }

    /// Gradient of the log-potential: `g_j = sum_i u_i A_{ij} / l_i(x)`.
    pub fn gradient(&self, u: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
        assert_eq!(u.len(), self.n + 1);
        let ell = self.forms_off_arrangement(x)?;
        Ok((0..self.d)
            .map(|j| {
                (0..=self.n)
                    .map(|i| u[i] * self.a_c[(i, j)] / ell[i])
                    .sum()
            })
            .collect())
    }

    /// Max-norm of the gradient of the log-potential at `x`.
    pub fn scattering_residual(&self, u: &[Complex64], x: &[Complex64]) -> Result<f64> {
        Ok(self
            .gradient(u, x)?
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max))
    }

    /// Hessian `H_{jk} = -sum_i u_i A_{ij} A_{ik} / l_i(x)^2` and the
    /// scale-normalized nondegeneracy test: `|det H|` against `tol` times the
    /// product of row max-norms, which makes the verdict invariant under
    /// diagonal rescaling of `u`.
    pub fn hessian_nondegenerate(
        &self,
        u: &[Complex64],
        x: &[Complex64],
        tol: f64,
    ) -> Result<(bool, f64)> {
        let ell = self.forms_off_arrangement(x)?;
        let h = DMatrix::from_fn(self.d, self.d, |j, k| {
            -(0..=self.n)
                .map(|i| u[i] * self.a_c[(i, j)] * self.a_c[(i, k)] / (ell[i] * ell[i]))
                .sum::<Complex64>()
        });
        let det = h.clone().determinant().norm();
        let normalizer: f64 = (0..self.d)
            .map(|j| (0..self.d).map(|k| h[(j, k)].norm()).fold(0.0, f64::max))
            .product();
        if normalizer == 0.0 {
            return Ok((false, 0.0));
        }
        let cond = det / normalizer;
        Ok((cond > tol, cond))
    }

    /// The reciprocal embedding `phi(x) = (1/l_0(x) : ... : 1/l_n(x))`.
    pub fn phi(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self
            .forms_off_arrangement(x)?
            .iter()
            .map(|v| 1.0 / v)
            .collect())
    }

    /// Invert `phi` by least squares. Writing `l_i(x) = 1/(lambda y_i)`,
    /// `z = lambda x` and `mu = lambda` satisfy the overdetermined linear
    /// system `A_i . z - b_i mu = 1/y_i`; its residual doubles as a
    /// membership certificate for the image of `phi`.
    pub fn phi_inverse(&self, y: &[Complex64], tol: f64) -> Result<(Vec<Complex64>, f64)> {
        assert_eq!(y.len(), self.n + 1);
        let scale = y.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        for v in y {
            if v.norm() <= DEFAULT_ZERO_TOL * scale {
                // phi never takes a zero coordinate, so y cannot be in im(phi)
                return Err(Error::InconsistentPoint { residual: f64::INFINITY });
            }
        }
        let mut m = DMatrix::<Complex64>::zeros(self.n + 1, self.d + 1);
        for i in 0..=self.n {
            for j in 0..self.d {
                m[(i, j)] = self.a_c[(i, j)];
            }
            m[(i, self.d)] = -self.b_c[i];
        }
        let rhs = DVector::from_fn(self.n + 1, |i, _| 1.0 / y[i]);
        let svd = m.clone().svd(true, true);
        let w = svd
            .solve(&rhs, 1e-300)
            .map_err(|e| Error::InternalInconsistency(format!("least-squares solve: {e}")))?;
        let resid_vec = &m * &w - &rhs;
        let rhs_scale = rhs.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
        let residual = resid_vec.iter().map(|v| v.norm()).fold(0.0, f64::max) / rhs_scale;
        if residual > tol {
            return Err(Error::InconsistentPoint { residual });
        }
        let mu = w[self.d];
        let w_scale = w.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        if mu.norm() <= tol * w_scale {
            return Err(Error::DegenerateScale { value: mu.norm() });
        }
        let x: Vec<Complex64> = (0..self.d).map(|j| w[j] / mu).collect();
        Ok((x, residual))
    }
}

/// A solution candidate in the affine chart, with its certificates.
#[derive(Clone, Debug)]
pub struct AffinePoint {
    pub x: Vec<Complex64>,
    /// Max-norm of the gradient of the log-potential at `x`.
    pub residual: f64,
    pub hessian_ok: bool,
}

impl AffinePoint {
    /// Evaluate both certificates at `x`.
    pub fn certify(
        arr: &ArrangementMatrix,
        u: &[Complex64],
        x: Vec<Complex64>,
        hessian_tol: f64,
    ) -> Result<Self> {
        let residual = arr.scattering_residual(u, &x)?;
        let (hessian_ok, _) = arr.hessian_nondegenerate(u, &x, hessian_tol)?;
        Ok(Self {
            x,
            residual,
            hessian_ok,
        })
    }
}
