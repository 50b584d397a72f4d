//! Shared fixtures for the integration suites.
#![allow(dead_code)] // each test target uses a different subset

use num_complex::Complex64;
use rand::Rng;
use scattering::arrangement::ArrangementMatrix;
use scattering::linalg::{rat_int, RatMat};

pub fn intro_arrangement() -> ArrangementMatrix {
    let text = r#"{"d": 2, "n": 3,
        "L": [["0","0","2","2"],["1","0","-1","-2"],["0","1","-2","-1"]]}"#;
    ArrangementMatrix::parse(text).unwrap().0
}

pub fn boundary_arrangement() -> ArrangementMatrix {
    let text = r#"{"d": 2, "n": 3,
        "L": [["1","0","0","0"],["1","1","0","1"],["0","0","1","1"]]}"#;
    ArrangementMatrix::parse(text).unwrap().0
}

/// Random integer instance with entries in [-bound, bound], redrawn until
/// it is a valid arrangement (full rank, no zero column).
pub fn random_instance(d: usize, n: usize, bound: i64, rng: &mut impl Rng) -> ArrangementMatrix {
    loop {
        let l = RatMat::from_fn(d + 1, n + 1, |_, _| rat_int(rng.random_range(-bound..=bound)));
        if let Ok(arr) = ArrangementMatrix::from_l(l) {
            return arr;
        }
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Greedy nearest matching of two complex multisets within `tol`.
pub fn complex_multisets_match(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, p), (_, q)| (x - *p).norm().total_cmp(&(x - *q).norm()));
        match best {
            Some((j, y)) if (x - y).norm() < tol => used[j] = true,
            _ => return false,
        }
    }
    true
}
