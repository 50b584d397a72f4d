//! Numerical and exact-combinatorial solver for the scattering equations of a
//! hyperplane arrangement.
//!
//! The arrangement is given by a rational matrix `L` whose columns hold the
//! coefficients of affine-linear forms. Solving proceeds on the reciprocal
//! linear space: a Gröbner degeneration of its ideal provides a start system
//! whose components are coordinate subspaces, and a predictor-corrector
//! tracker carries the start solutions to the target. Every numerical count
//! is cross-checked against exact matroid invariants.

pub mod arrangement;
pub mod chy;
pub mod error;
pub mod hilbert;
pub mod homotopy;
pub mod ideal;
pub mod linalg;
pub mod matroid;
pub mod report;

pub use arrangement::{AffinePoint, ArrangementMatrix};
pub use error::{Error, Result};

#[cfg(test)]
mod smoke {
    use nalgebra::{Complex, DMatrix, DVector};

    #[test]
    fn nalgebra_complex_svd_and_lu() {
        let m = DMatrix::<Complex<f64>>::from_row_slice(
            3,
            2,
            &[
                Complex::new(1.0, 0.5),
                Complex::new(0.0, 1.0),
                Complex::new(2.0, -1.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(3.0, 2.0),
            ],
        );
        let svd = m.clone().svd(true, true);
        assert_eq!(svd.singular_values.len(), 2);
        let rhs = DVector::<Complex<f64>>::from_element(3, Complex::new(1.0, 0.0));
        let ls = svd.solve(&rhs, 1e-14).unwrap();
        assert_eq!(ls.len(), 2);

        let sq = DMatrix::<Complex<f64>>::from_row_slice(
            2,
            2,
            &[
                Complex::new(2.0, 0.0),
                Complex::new(0.0, 1.0),
                Complex::new(-1.0, 0.0),
                Complex::new(1.0, 1.0),
            ],
        );
        let det = sq.determinant();
        assert!(det.norm() > 0.0);
        let lu = sq.lu();
        let x = lu.solve(&rhs.rows(0, 2).into_owned()).unwrap();
        assert_eq!(x.len(), 2);
    }
}
