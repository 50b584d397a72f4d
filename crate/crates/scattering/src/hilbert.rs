//! Exact Hilbert functions of the reciprocal coordinate ring and its
//! sections, Hilbert regularity, Macaulay matrices, and the univariate
//! eliminant obtained from a pencil of linear forms.
//!
//! The Hilbert function of the coordinate ring is read off the
//! broken-circuit complex: a flat degeneration identifies it with the
//! Stanley-Reisner ring, so `HF(q)` counts degree-q monomials whose support
//! is broken-circuit free.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::Rng;

use crate::arrangement::ArrangementMatrix;
use crate::error::{Error, Result};
use crate::linalg::{lagrange_interpolate, rat, rat_int, rat_to_f64, Rat, RatMat};
use crate::matroid::{self, WeightOrder};

/// Ambient monomial count above which Macaulay construction refuses to run.
pub const MAX_MONOMIALS: usize = 100_000;

pub type ExpVec = Vec<u32>;
/// Sparse exact polynomial: exponent vector to coefficient.
pub type Poly = BTreeMap<ExpVec, Rat>;

fn binom_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn binom(n: usize, k: usize) -> u64 {
    binom_u128(n as u128, k as u128) as u64
}

/// Face counts of the broken-circuit complex: `f[k]` is the number of
/// broken-circuit-free subsets of cardinality k.
fn face_counts(arr: &ArrangementMatrix, omega: &WeightOrder) -> Result<Vec<u64>> {
    let circuits = matroid::circuits(arr)?;
    let broken = matroid::broken_circuits(&circuits, omega);
    let faces = matroid::bc_face_masks(arr.ground_size(), &broken);
    let mut counts = vec![0u64; arr.ground_size() + 1];
    for f in faces {
        counts[f.count_ones() as usize] += 1;
    }
    Ok(counts)
}

/// `HF(q)` of the reciprocal coordinate ring: the number of degree-q
/// monomials with broken-circuit-free support,
/// `sum_k f_k * binom(q-1, k-1)`.
pub fn hilbert_function_rl(arr: &ArrangementMatrix, omega: &WeightOrder, q: usize) -> Result<u64> {
    if q == 0 {
        return Ok(1);
    }
    let f = face_counts(arr, omega)?;
    Ok((1..f.len())
        .map(|k| f[k] * binom(q - 1, k - 1))
        .sum())
}

/// Hilbert regularity of the reciprocal coordinate ring: the numerator of
/// the Hilbert series is `h(z) = sum_k f_k z^k (1-z)^(d+1-k)`, and the
/// regularity is `deg h - d`. It is at most 0, with equality exactly when
/// the matroid is connected; both facts are asserted.
pub fn hilbert_regularity_rl(arr: &ArrangementMatrix, omega: &WeightOrder) -> Result<i64> {
    let f = face_counts(arr, omega)?;
    let d = arr.d();
    let mut h = vec![0i128; d + 2];
    for (k, &fk) in f.iter().enumerate() {
        if fk == 0 || k > d + 1 {
            continue;
        }
        // z^k (1-z)^(d+1-k)
        let e = d + 1 - k;
        for j in 0..=e {
            let c = binom_u128(e as u128, j as u128) as i128 * if j % 2 == 0 { 1 } else { -1 };
            h[k + j] += c * fk as i128;
        }
    }
    let deg_h = (0..h.len()).rev().find(|&i| h[i] != 0).unwrap_or(0);
    let reg = deg_h as i64 - d as i64;
    if reg > 0 {
        return Err(Error::RegularityContradiction(format!(
            "regularity {reg} is positive (numerator degree {deg_h}, d = {d})"
        )));
    }
    let connected = matroid::is_connected(arr)?;
    if (reg == 0) != connected {
        return Err(Error::RegularityContradiction(format!(
            "regularity {reg} against connectivity {connected}"
        )));
    }
    Ok(reg)
}

/// Degree-q exponent vectors in `nvars` variables, lexicographic order.
pub fn monomials_of_degree(nvars: usize, q: usize) -> Vec<ExpVec> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(out: &mut Vec<ExpVec>, current: &mut ExpVec, var: usize, rest: u32) {
        if var + 1 == current.len() {
            current[var] = rest;
            out.push(current.clone());
            return;
        }
        for e in (0..=rest).rev() {
            current[var] = e;
            rec(out, current, var + 1, rest - e);
            current[var] = 0;
        }
    }
    if nvars == 0 {
        return out;
    }
    rec(&mut out, &mut current, 0, q as u32);
    out
}

fn support_mask(exp: &[u32]) -> u32 {
    exp.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .fold(0u32, |m, (i, _)| m | (1 << i))
}

/// The degree-q standard monomials: broken-circuit-free support.
pub fn standard_monomials(
    arr: &ArrangementMatrix,
    omega: &WeightOrder,
    q: usize,
) -> Result<Vec<ExpVec>> {
    let circuits = matroid::circuits(arr)?;
    let broken = matroid::broken_circuits(&circuits, omega);
    let bc_masks: Vec<u32> = broken.iter().map(|b| matroid::vec_to_mask(b)).collect();
    Ok(monomials_of_degree(arr.ground_size(), q)
        .into_iter()
        .filter(|m| !matroid::contains_subset(&bc_masks, support_mask(m)))
        .collect())
}

/// The linear generators of the section ideal: rows of `A^T diag(u)`.
fn linear_generators(arr: &ArrangementMatrix, u: &[Rat]) -> Vec<Poly> {
    let n1 = arr.ground_size();
    (0..arr.d())
        .map(|i| {
            let mut p = Poly::new();
            for j in 0..n1 {
                let c = arr.a().get(j, i) * &u[j];
                if !c.is_zero() {
                    let mut e = vec![0u32; n1];
                    e[j] = 1;
                    p.insert(e, c);
                }
            }
            p
        })
        .collect()
}

fn circuit_poly_exact(arr: &ArrangementMatrix) -> Result<Vec<Poly>> {
    Ok(crate::ideal::circuit_polynomials(arr)?
        .iter()
        .map(|cp| {
            let mut p = Poly::new();
            for term in &cp.terms {
                let mut e = vec![0u32; arr.ground_size()];
                for &j in &term.monomial {
                    e[j] = 1;
                }
                p.insert(e, term.coeff.clone());
            }
            p
        })
        .collect())
}

fn poly_degree(p: &Poly) -> usize {
    p.keys()
        .map(|e| e.iter().sum::<u32>() as usize)
        .max()
        .unwrap_or(0)
}

fn mul_monomial(p: &Poly, m: &[u32]) -> Poly {
    p.iter()
        .map(|(e, c)| {
            let prod: ExpVec = e.iter().zip(m).map(|(a, b)| a + b).collect();
            (prod, c.clone())
        })
        .collect()
}

/// Macaulay matrix at degree q over the ambient polynomial ring: the rows
/// are generator-times-monomial products expanded in the full degree-q
/// monomial basis, with exact rational coefficients.
pub struct MacaulayMatrix {
    pub degree: usize,
    pub rows: RatMat,
    pub tags: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum MacaulayRows {
    /// Only the circuit polynomials (the ideal of the reciprocal variety).
    CircuitsOnly,
    /// Circuit polynomials plus the d linear section generators.
    Full,
}

pub fn macaulay_matrix(
    arr: &ArrangementMatrix,
    u: &[Rat],
    q: usize,
    which: MacaulayRows,
    h: Option<&Poly>,
) -> Result<MacaulayMatrix> {
    let n1 = arr.ground_size();
    let ambient = binom_u128((q + n1 - 1) as u128, n1 as u128 - 1) as usize;
    if ambient > MAX_MONOMIALS {
        return Err(Error::MatrixTooLarge {
            size: ambient,
            limit: MAX_MONOMIALS,
        });
    }
    let basis = monomials_of_degree(n1, q);
    debug_assert_eq!(basis.len(), ambient);
    let index: HashMap<ExpVec, usize> = basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let mut rows = RatMat::zeros(0, ambient);
    let mut tags = Vec::new();
    let push_products = |p: &Poly, tag: &str, rows: &mut RatMat, tags: &mut Vec<String>| {
        let deg = poly_degree(p);
        if deg > q {
            return;
        }
        for m in monomials_of_degree(n1, q - deg) {
            let prod = mul_monomial(p, &m);
            let mut row = vec![Rat::zero(); ambient];
            for (e, c) in prod {
                row[index[&e]] = c;
            }
            rows.push_row(row);
            tags.push(tag.to_string());
        }
    };
    for (k, p) in circuit_poly_exact(arr)?.iter().enumerate() {
        push_products(p, &format!("circuit_{k}"), &mut rows, &mut tags);
    }
    if which == MacaulayRows::Full {
        for (k, p) in linear_generators(arr, u).iter().enumerate() {
            push_products(p, &format!("linear_{k}"), &mut rows, &mut tags);
        }
    }
    if let Some(hp) = h {
        push_products(hp, "h", &mut rows, &mut tags);
    }
    Ok(MacaulayMatrix {
        degree: q,
        rows,
        tags,
    })
}

/// `HF(q)` of the quotient by the section ideal (and optionally a form h):
/// the ambient dimension minus the exact rank of the Macaulay matrix.
pub fn quotient_hilbert_function(
    arr: &ArrangementMatrix,
    u: &[Rat],
    q: usize,
    h: Option<&Poly>,
) -> Result<u64> {
    let mac = macaulay_matrix(arr, u, q, MacaulayRows::Full, h)?;
    Ok(mac.rows.ncols() as u64 - mac.rows.rank() as u64)
}

/// Random rational of magnitude at most 100 with small denominator.
fn random_rat(rng: &mut impl Rng) -> Rat {
    let num = loop {
        let v: i64 = rng.random_range(-100..=100);
        if v != 0 {
            break v;
        }
    };
    let den: i64 = rng.random_range(1..=10);
    rat(num, den)
}

pub fn random_u_rational(n1: usize, rng: &mut impl Rng) -> Vec<Rat> {
    (0..n1).map(|_| random_rat(rng)).collect()
}

/// Quotient Hilbert function at a generic section: two independent random
/// rational specializations of u must agree.
pub fn quotient_hilbert_function_generic(
    arr: &ArrangementMatrix,
    q: usize,
    h: Option<&Poly>,
    rng: &mut impl Rng,
) -> Result<u64> {
    let u1 = random_u_rational(arr.ground_size(), rng);
    let u2 = random_u_rational(arr.ground_size(), rng);
    let a = quotient_hilbert_function(arr, &u1, q, h)?;
    let b = quotient_hilbert_function(arr, &u2, q, h)?;
    if a != b {
        return Err(Error::InternalInconsistency(format!(
            "quotient Hilbert function differs between specializations: {a} vs {b}"
        )));
    }
    Ok(a)
}

/// Rewriting rules for normal forms modulo the circuit ideal: the leading
/// (initial) term of each circuit polynomial is its broken-circuit
/// monomial, which gets replaced by the lower-weight terms.
type Rule = (u32, Rat, Vec<(ExpVec, Rat)>);

struct Reducer {
    /// (leading support mask, leading coefficient, remaining terms)
    rules: Vec<Rule>,
    omega: Vec<i64>,
    nvars: usize,
}

impl Reducer {
    fn new(arr: &ArrangementMatrix, omega: &WeightOrder) -> Result<Self> {
        let circuits = matroid::circuits(arr)?;
        let nvars = arr.ground_size();
        let mut rules = Vec::new();
        for c in &circuits {
            let drop = omega.argmin(&c.support);
            let mut lead_coeff = Rat::zero();
            let mut lead_mask = 0u32;
            let mut rest = Vec::new();
            for (&omitted, coeff) in c.support.iter().zip(&c.alpha) {
                let mono: Vec<usize> = c
                    .support
                    .iter()
                    .copied()
                    .filter(|&j| j != omitted)
                    .collect();
                let mut e = vec![0u32; nvars];
                for &j in &mono {
                    e[j] = 1;
                }
                if omitted == drop {
                    lead_coeff = coeff.clone();
                    lead_mask = matroid::vec_to_mask(&mono);
                } else {
                    rest.push((e, coeff.clone()));
                }
            }
            rules.push((lead_mask, lead_coeff, rest));
        }
        Ok(Self {
            rules,
            omega: omega.entries().to_vec(),
            nvars,
        })
    }

    fn weight(&self, e: &[u32]) -> i64 {
        e.iter()
            .enumerate()
            .map(|(i, &x)| self.omega[i] * x as i64)
            .sum()
    }

    /// Normal form onto the standard monomials (broken-circuit-free
    /// support). Each rewrite strictly lowers the weight of the replaced
    /// monomial, so this terminates; the result is the canonical coordinate
    /// vector in the flat-degeneration basis.
    fn normal_form(&self, p: &Poly) -> Poly {
        let mut work = p.clone();
        loop {
            let mut target: Option<(ExpVec, usize)> = None;
            let mut target_weight = i64::MIN;
            for e in work.keys() {
                let s = support_mask(e);
                for (idx, (lead, _, _)) in self.rules.iter().enumerate() {
                    if s & lead == *lead {
                        let w = self.weight(e);
                        if w > target_weight {
                            target_weight = w;
                            target = Some((e.clone(), idx));
                        }
                        break;
                    }
                }
            }
            let Some((e, rule_idx)) = target else {
                break;
            };
            let coeff = work.remove(&e).expect("monomial present");
            let (lead_mask, lead_coeff, rest) = &self.rules[rule_idx];
            // e = lead * gamma; replace lead by -(rest)/lead_coeff
            let mut gamma = e.clone();
            for (i, g) in gamma.iter_mut().enumerate().take(self.nvars) {
                if lead_mask & (1 << i) != 0 {
                    *g -= 1;
                }
            }
            let scale = -coeff / lead_coeff;
            for (re, rc) in rest {
                let key: ExpVec = gamma.iter().zip(re).map(|(a, b)| a + b).collect();
                let value = work.get(&key).cloned().unwrap_or_else(Rat::zero) + rc * &scale;
                if value.is_zero() {
                    work.remove(&key);
                } else {
                    work.insert(key, value);
                }
            }
        }
        work
    }
}

/// Build the linear form with the given coefficient vector as a `Poly`.
pub fn linear_poly(coeffs: &[Rat]) -> Poly {
    let mut p = Poly::new();
    for (i, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            let mut e = vec![0u32; coeffs.len()];
            e[i] = 1;
            p.insert(e, c.clone());
        }
    }
    p
}

/// The eliminant of the pencil `h2 - t h1` on the section: a monic
/// univariate polynomial (ascending coefficients) whose roots are the
/// values `h2(y)/h1(y)` at the intersection points.
///
/// The square matrix has `HF(q)` columns indexed by the standard monomials;
/// the top block is a row basis of the section ideal at degree q in normal
/// form, the bottom `deg` rows are `(h2 - t h1) * m_j` for greedily chosen
/// degree-(q-1) monomials. The determinant has degree at most `deg` in t
/// and is recovered exactly by evaluation and interpolation.
pub fn eliminant(
    arr: &ArrangementMatrix,
    u: &[Rat],
    h1: &[Rat],
    h2: &[Rat],
    q: Option<usize>,
    omega: &WeightOrder,
    rng: &mut impl Rng,
) -> Result<Vec<Rat>> {
    let q = q.unwrap_or(arr.d() + 1);
    let deg = matroid::reciprocal_degree(arr)?;
    let quotient = quotient_hilbert_function(arr, u, q, None)?;
    if quotient != deg as u64 {
        return Err(Error::SingularSelection(format!(
            "quotient Hilbert function at degree {q} is {quotient}, expected {deg}; \
             increase q or re-randomize u"
        )));
    }
    let std_basis = standard_monomials(arr, omega, q)?;
    let dim = std_basis.len();
    let index: HashMap<ExpVec, usize> = std_basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let reducer = Reducer::new(arr, omega)?;
    let to_row = |p: &Poly| -> Vec<Rat> {
        let nf = reducer.normal_form(p);
        let mut row = vec![Rat::zero(); dim];
        for (e, c) in nf {
            row[*index.get(&e).expect("normal form lies in the standard basis")] = c;
        }
        row
    };

    // top block: a row basis of the section ideal at degree q
    let lower_monomials = monomials_of_degree(arr.ground_size(), q - 1);
    let mut top = RatMat::zeros(0, dim);
    let mut rank = 0usize;
    'outer: for gen in linear_generators(arr, u) {
        for m in &lower_monomials {
            let row = to_row(&mul_monomial(&gen, m));
            top.push_row(row);
            let r = top.rank();
            if r > rank {
                rank = r;
            } else {
                // drop the dependent row again
                let keep: Vec<usize> = (0..top.nrows() - 1).collect();
                top = top.select_rows(&keep);
            }
            if rank == dim - deg {
                break 'outer;
            }
        }
    }
    if rank != dim - deg {
        return Err(Error::SingularSelection(format!(
            "section ideal spans rank {rank} at degree {q}, expected {}",
            dim - deg
        )));
    }

    // bottom block: greedy choice of deg monomials making M(t0) invertible
    let h1_rows: Vec<Vec<Rat>> = lower_monomials
        .iter()
        .map(|m| to_row(&mul_monomial(&linear_poly(h1), m)))
        .collect();
    let h2_rows: Vec<Vec<Rat>> = lower_monomials
        .iter()
        .map(|m| to_row(&mul_monomial(&linear_poly(h2), m)))
        .collect();
    let mut chosen: Option<Vec<usize>> = None;
    let mut t_anchor = Rat::zero();
    for _attempt in 0..2 {
        let t0 = random_rat(rng);
        let mut acc = top.clone();
        let mut rank = dim - deg;
        let mut picks = Vec::new();
        for j in 0..lower_monomials.len() {
            let row: Vec<Rat> = h2_rows[j]
                .iter()
                .zip(&h1_rows[j])
                .map(|(b, a)| b - &t0 * a)
                .collect();
            acc.push_row(row);
            if acc.rank() > rank {
                rank += 1;
                picks.push(j);
            } else {
                let keep: Vec<usize> = (0..acc.nrows() - 1).collect();
                acc = acc.select_rows(&keep);
            }
            if picks.len() == deg {
                break;
            }
        }
        if picks.len() == deg {
            chosen = Some(picks);
            t_anchor = t0;
            break;
        }
    }
    let Some(picks) = chosen else {
        return Err(Error::DegreeCollapse(format!(
            "no monomial selection makes the pencil matrix invertible; \
             h1 = {h1:?} likely vanishes at an intersection point"
        )));
    };

    // evaluate det at deg+1 nodes and interpolate
    let mut nodes: Vec<Rat> = vec![t_anchor.clone()];
    let mut k = 0i64;
    while nodes.len() < deg + 1 {
        let cand = rat_int(k);
        if cand != t_anchor {
            nodes.push(cand);
        }
        k += 1;
    }
    let mut points = Vec::new();
    for t in &nodes {
        let mut mat = top.clone();
        for &j in &picks {
            let row: Vec<Rat> = h2_rows[j]
                .iter()
                .zip(&h1_rows[j])
                .map(|(b, a)| b - t * a)
                .collect();
            mat.push_row(row);
        }
        points.push((t.clone(), mat.determinant()));
    }
    let det = lagrange_interpolate(&points);
    let lead = det.last().cloned().unwrap_or_else(Rat::zero);
    if lead.is_zero() {
        return Err(Error::DegreeCollapse(
            "interpolated determinant is identically zero".into(),
        ));
    }
    Ok(det.into_iter().map(|c| c / &lead).collect())
}

/// All complex roots of a rational polynomial (ascending coefficients) by
/// the Durand-Kerner iteration in f64.
pub fn poly_roots(coeffs: &[Rat]) -> Vec<Complex64> {
    let cf: Vec<f64> = coeffs.iter().map(rat_to_f64).collect();
    let deg = match cf.iter().rposition(|c| *c != 0.0) {
        Some(d) if d > 0 => d,
        _ => return Vec::new(),
    };
    let monic: Vec<f64> = cf[..=deg].iter().map(|c| c / cf[deg]).collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let radius = 1.0 + monic.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| seed.powu(k as u32 + 1) * radius)
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = moved.max(delta.norm() / (1.0 + roots[i].norm()));
        }
        if moved < 1e-14 {
            break;
        }
    }
    roots
}
