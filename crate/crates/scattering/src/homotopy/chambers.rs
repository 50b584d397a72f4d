//! Bounded-chamber enumeration for real arrangements in dimension at most
//! two, by exact sign vectors on a rational grid.
//!
//! Chambers of a real arrangement are exactly the realized strict sign
//! vectors (each sign class is convex). A grid discovers the realized
//! classes; boundedness is decided exactly through the recession cone.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::arrangement::ArrangementMatrix;
use crate::error::{Error, Result};
use crate::linalg::{rat_int, Rat};

/// Sign vectors (entries +-1) of the bounded chambers. Supported for d <= 2.
pub fn bounded_chambers(arr: &ArrangementMatrix, grid: usize) -> Result<Vec<Vec<i8>>> {
    match arr.d() {
        1 => bounded_chambers_1d(arr),
        2 => bounded_chambers_2d(arr, grid),
        d => Err(Error::ChamberViolation(format!(
            "chamber enumeration supports d <= 2, got d = {d}"
        ))),
    }
}

fn sign_of(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn exact_sign_vector(arr: &ArrangementMatrix, x: &[Rat]) -> Option<Vec<i8>> {
    let vals = arr.linear_forms_at_rat(x);
    let mut out = Vec::with_capacity(vals.len());
    for v in &vals {
        let s = sign_of(v);
        if s == 0 {
            return None;
        }
        out.push(s);
    }
    Some(out)
}

fn bounded_chambers_1d(arr: &ArrangementMatrix) -> Result<Vec<Vec<i8>>> {
    let mut walls: Vec<Rat> = Vec::new();
    for i in 0..arr.ground_size() {
        let a = arr.a().get(i, 0);
        if !a.is_zero() {
            walls.push(arr.b()[i].clone() / a);
        }
    }
    walls.sort();
    walls.dedup();
    let mut out = Vec::new();
    for w in walls.windows(2) {
        let mid = (&w[0] + &w[1]) / rat_int(2);
        if let Some(sv) = exact_sign_vector(arr, &[mid]) {
            out.push(sv);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn bounded_chambers_2d(arr: &ArrangementMatrix, grid: usize) -> Result<Vec<Vec<i8>>> {
    let n1 = arr.ground_size();
    // vertices of the arrangement: pairwise transversal intersections
    let mut vertices: Vec<[Rat; 2]> = Vec::new();
    for i in 0..n1 {
        for j in (i + 1)..n1 {
            let a11 = arr.a().get(i, 0).clone();
            let a12 = arr.a().get(i, 1).clone();
            let a21 = arr.a().get(j, 0).clone();
            let a22 = arr.a().get(j, 1).clone();
            let det = &a11 * &a22 - &a12 * &a21;
            if det.is_zero() {
                continue;
            }
            let b1 = arr.b()[i].clone();
            let b2 = arr.b()[j].clone();
            let x = (&b1 * &a22 - &a12 * &b2) / &det;
            let y = (&a11 * &b2 - &b1 * &a21) / &det;
            vertices.push([x, y]);
        }
    }
    let margin = rat_int(1);
    let (lo_x, hi_x, lo_y, hi_y) = if vertices.is_empty() {
        (rat_int(-2), rat_int(2), rat_int(-2), rat_int(2))
    } else {
        let min = |k: usize| vertices.iter().map(|v| v[k].clone()).min().unwrap();
        let max = |k: usize| vertices.iter().map(|v| v[k].clone()).max().unwrap();
        (
            min(0) - &margin,
            max(0) + &margin,
            min(1) - &margin,
            max(1) + &margin,
        )
    };

    let steps = rat_int(grid.max(2) as i64);
    let dx = (&hi_x - &lo_x) / &steps;
    let dy = (&hi_y - &lo_y) / &steps;
    let mut seen: BTreeSet<Vec<i8>> = BTreeSet::new();
    for ix in 0..=grid {
        let x = &lo_x + &dx * rat_int(ix as i64);
        for iy in 0..=grid {
            let y = &lo_y + &dy * rat_int(iy as i64);
            if let Some(sv) = exact_sign_vector(arr, &[x.clone(), y]) {
                seen.insert(sv);
            }
        }
    }
    Ok(seen
        .into_iter()
        .filter(|sv| chamber_is_bounded(arr, sv))
        .collect())
}

/// Exact boundedness of the chamber with sign vector `sv`: its recession
/// cone `{v : sv_i (A_i . v) >= 0}` must be trivial. In the plane a
/// nontrivial cone contains a ray orthogonal to one of the normals.
fn chamber_is_bounded(arr: &ArrangementMatrix, sv: &[i8]) -> bool {
    let n1 = arr.ground_size();
    let consistent = |v: &[Rat; 2]| -> bool {
        (0..n1).all(|i| {
            let dot = arr.a().get(i, 0) * &v[0] + arr.a().get(i, 1) * &v[1];
            match sv[i] {
                1 => !dot.is_negative(),
                -1 => !dot.is_positive(),
                _ => true,
            }
        })
    };
    for i in 0..n1 {
        let a0 = arr.a().get(i, 0).clone();
        let a1 = arr.a().get(i, 1).clone();
        if a0.is_zero() && a1.is_zero() {
            continue;
        }
        let ray = [-a1.clone(), a0.clone()];
        let neg = [a1, -a0];
        if consistent(&ray) || consistent(&neg) {
            return false;
        }
    }
    true
}

/// Strict sign vector of a real point, or None if it is too close to a wall.
pub fn sign_vector_f64(arr: &ArrangementMatrix, x: &[f64]) -> Option<Vec<i8>> {
    let xc: Vec<num_complex::Complex64> = x
        .iter()
        .map(|&v| num_complex::Complex64::new(v, 0.0))
        .collect();
    let vals = arr.linear_forms_at(&xc);
    let scale = vals.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
    let mut out = Vec::with_capacity(vals.len());
    for v in &vals {
        if v.re.abs() < 1e-9 * scale {
            return None;
        }
        out.push(if v.re > 0.0 { 1 } else { -1 });
    }
    Some(out)
}
