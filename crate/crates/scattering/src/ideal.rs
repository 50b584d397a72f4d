//! Circuit polynomials, their weight deformation, and the initial monomial
//! ideal with its minimal prime decomposition.
//!
//! For a circuit C with kernel coefficients alpha, the polynomial is
//! `f_C = sum_{i in C} alpha_i prod_{j in C \ {i}} y_j`. All of these are
//! multilinear, so monomials are represented as index sets throughout.

use num_complex::Complex64;

use crate::arrangement::ArrangementMatrix;
use crate::error::{Error, Result};
use crate::linalg::{rat_to_f64, Rat};
use crate::matroid::{self, Circuit, WeightOrder};

/// One term of a circuit polynomial: the omitted index, its coefficient and
/// the squarefree monomial on the remaining circuit elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub omitted: usize,
    pub coeff: Rat,
    pub monomial: Vec<usize>,
}

/// A circuit polynomial, optionally carrying the integer t-exponents of its
/// weight deformation `f_t = sum c_i t^(w(f) - w_i) y^(m_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitPolynomial {
    pub circuit: Circuit,
    pub terms: Vec<Term>,
    pub t_exponents: Option<Vec<u32>>,
}

impl CircuitPolynomial {
    fn from_circuit(circuit: Circuit) -> Self {
        let terms = circuit
            .support
            .iter()
            .zip(&circuit.alpha)
            .map(|(&omitted, coeff)| Term {
                omitted,
                coeff: coeff.clone(),
                monomial: circuit
                    .support
                    .iter()
                    .copied()
                    .filter(|&j| j != omitted)
                    .collect(),
            })
            .collect();
        Self {
            circuit,
            terms,
            t_exponents: None,
        }
    }

    pub fn degree(&self) -> usize {
        self.circuit.support.len() - 1
    }

    /// Evaluate at t = 1 (the undeformed polynomial).
    pub fn eval(&self, y: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                t.monomial
                    .iter()
                    .fold(Complex64::new(rat_to_f64(&t.coeff), 0.0), |acc, &j| {
                        acc * y[j]
                    })
            })
            .sum()
    }

    fn exponents(&self) -> &[u32] {
        self.t_exponents
            .as_ref()
            .expect("polynomial has not been deformed")
            .as_slice()
    }

    /// Evaluate the deformed polynomial at `(y, t)`.
    pub fn eval_deformed(&self, y: &[Complex64], t: Complex64) -> Complex64 {
        self.terms
            .iter()
            .zip(self.exponents())
            .map(|(term, &e)| {
                let mut v = Complex64::new(rat_to_f64(&term.coeff), 0.0) * t.powu(e);
                for &j in &term.monomial {
                    v *= y[j];
                }
                v
            })
            .sum()
    }

    /// Partial derivative of the deformed polynomial with respect to `y_j`.
    pub fn d_dy(&self, y: &[Complex64], t: Complex64, j: usize) -> Complex64 {
        self.terms
            .iter()
            .zip(self.exponents())
            .filter(|(term, _)| term.monomial.contains(&j))
            .map(|(term, &e)| {
                let mut v = Complex64::new(rat_to_f64(&term.coeff), 0.0) * t.powu(e);
                for &l in &term.monomial {
                    if l != j {
                        v *= y[l];
                    }
                }
                v
            })
            .sum()
    }

    /// Partial derivative of the deformed polynomial with respect to `t`.
    pub fn d_dt(&self, y: &[Complex64], t: Complex64) -> Complex64 {
        self.terms
            .iter()
            .zip(self.exponents())
            .filter(|(_, &e)| e > 0)
            .map(|(term, &e)| {
                let mut v =
                    Complex64::new(rat_to_f64(&term.coeff) * e as f64, 0.0) * t.powu(e - 1);
                for &l in &term.monomial {
                    v *= y[l];
                }
                v
            })
            .sum()
    }
}

/// One polynomial per circuit, terms ordered by omitted index.
pub fn circuit_polynomials(arr: &ArrangementMatrix) -> Result<Vec<CircuitPolynomial>> {
    Ok(matroid::circuits(arr)?
        .into_iter()
        .map(CircuitPolynomial::from_circuit)
        .collect())
}

/// Fill in the t-exponents for the weight `omega`: the exponent of term i is
/// `w(f) - w(term_i)` where `w(f)` is the maximal term weight, so at least
/// one exponent is zero and t = 1 recovers the original polynomial.
pub fn deform(poly: &CircuitPolynomial, omega: &WeightOrder) -> CircuitPolynomial {
    let weights: Vec<i64> = poly
        .terms
        .iter()
        .map(|t| t.monomial.iter().map(|&j| omega.weight(j)).sum())
        .collect();
    let max = *weights.iter().max().expect("nonempty polynomial");
    let exps = weights.iter().map(|w| (max - w) as u32).collect();
    CircuitPolynomial {
        circuit: poly.circuit.clone(),
        terms: poly.terms.clone(),
        t_exponents: Some(exps),
    }
}

/// The initial monomial ideal `J = in_omega(I)` together with its minimal
/// primes. Generators are the minimal broken-circuit monomials; each minimal
/// prime is the coordinate ideal on the complement of an nbc basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitialIdeal {
    pub generators: Vec<Vec<usize>>,
    /// Complements `B^c` of the nbc bases: the prime `< y_i : i in B^c >`.
    pub minimal_primes: Vec<Vec<usize>>,
}

pub fn initial_ideal(arr: &ArrangementMatrix, omega: &WeightOrder) -> Result<InitialIdeal> {
    let circuits = matroid::circuits(arr)?;
    let generators = matroid::broken_circuits(&circuits, omega);
    let bases = matroid::nbc_bases(arr, omega)?;
    let ground = arr.ground_size();
    let minimal_primes: Vec<Vec<usize>> = bases
        .iter()
        .map(|b| (0..ground).filter(|i| !b.contains(i)).collect())
        .collect();
    let degree = matroid::reciprocal_degree(arr)?;
    if minimal_primes.len() != degree {
        return Err(Error::InternalInconsistency(format!(
            "{} minimal primes against reciprocal degree {degree}",
            minimal_primes.len()
        )));
    }
    Ok(InitialIdeal {
        generators,
        minimal_primes,
    })
}
