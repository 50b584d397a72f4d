//! CHY scattering equations on the moduli space of m marked points on the
//! line: instance construction, the census of boundary strata, and the
//! sub-system check for boundary solutions.
//!
//! The arrangement consists of the forms `x_i`, `x_i - 1` and `x_j - x_i`
//! (one per Mandelstam invariant), organized in m-3 blocks: block k holds
//! the forms involving `x_{k-1}`, in the order `x_{k-1}, x_{k-1} - x_0,
//! x_{k-1} - x_1, ..., x_{k-1} - x_{k-2}` with `x_0 = 1`.

use itertools::Itertools;
use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::ArrangementMatrix;
use crate::error::{Error, Result};
use crate::homotopy::{full_target_residual, random_u};
use crate::ideal::circuit_polynomials;
use crate::linalg::{rat_int, RatMat};
use crate::matroid::{self, FlatType};
use crate::report::{pairs_to_vec, SolutionReport};

#[derive(Clone, Debug)]
pub struct ChyInstance {
    pub m: usize,
    pub arr: ArrangementMatrix,
    /// The Mandelstam pair (i, j) named by each column: the minor p_ij.
    pub column_labels: Vec<(usize, usize)>,
    pub s: Vec<Complex64>,
}

/// Width-k blocks for k = 2..=m-2, giving d = m-3 and n+1 = m(m-3)/2.
pub fn build_chy(
    m: usize,
    s: Option<&[Complex64]>,
    rng: &mut impl Rng,
) -> Result<ChyInstance> {
    if !(4..=9).contains(&m) {
        return Err(Error::BadM(m));
    }
    let d = m - 3;
    let cols = m * (m - 3) / 2;
    let mut l = RatMat::zeros(d + 1, cols);
    let mut column_labels = Vec::with_capacity(cols);
    let mut col = 0;
    for k in 2..=(m - 2) {
        for c in 0..k {
            // form x_{k-1} - x_{c-1} (c = 0 means just x_{k-1}; x_0 = 1)
            l.set(k - 1, col, rat_int(1));
            if c >= 1 {
                l.set(c - 1, col, rat_int(-1));
            }
            column_labels.push((c + 1, k + 1));
            col += 1;
        }
    }
    let arr = ArrangementMatrix::from_l(l)?;
    let s = match s {
        Some(values) => {
            if values.len() != cols {
                return Err(Error::MalformedInput(format!(
                    "s has {} entries, expected {}",
                    values.len(),
                    cols
                )));
            }
            values.to_vec()
        }
        None => random_u(cols, rng),
    };
    Ok(ChyInstance {
        m,
        arr,
        column_labels,
        s,
    })
}

/// A type (ii) flat `I_r(W)`: the columns whose forms involve only the
/// variables `{x_0} union {x_i : i in W}`, for `W` of size `m-3-r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeTwoFlat {
    pub r: usize,
    pub w: Vec<usize>,
    pub support: Vec<usize>,
}

fn stratum_support(m: usize, w: &[usize]) -> Vec<usize> {
    let mut support = Vec::new();
    let mut col = 0;
    for k in 2..=(m - 2) {
        for c in 0..k {
            // column (k, c) is the form x_{k-1} - x_{c-1}
            let var = k - 1;
            let lower_ok = c == 0 || c == 1 || w.contains(&(c - 1));
            if w.contains(&var) && lower_ok {
                support.push(col);
            }
            col += 1;
        }
    }
    support
}

/// Enumerate all strata `I_r(W)` and verify each against the matroid: the
/// support must be a flat with `rank(A_I^T) = rank(L_I) - 1`, and there are
/// `binomial(m-3, r)` of them for each r.
pub fn type_two_flats(inst: &ChyInstance) -> Result<Vec<TypeTwoFlat>> {
    let m = inst.m;
    let mut out = Vec::new();
    for r in 0..=(m - 4) {
        let count_expected = binomial(m - 3, r);
        let mut count = 0usize;
        for w in (1..=(m - 3)).combinations(m - 3 - r) {
            let support = stratum_support(m, &w);
            let flat = matroid::flat_of(&inst.arr, &support).ok_or_else(|| {
                Error::CensusMismatch(format!(
                    "stratum support {support:?} for W = {w:?} is not a flat"
                ))
            })?;
            if flat.flat_type != FlatType::TypeII {
                return Err(Error::CensusMismatch(format!(
                    "stratum support {support:?} has type {:?}, expected type (ii)",
                    flat.flat_type
                )));
            }
            if flat.rank_l != w.len() + 1 {
                return Err(Error::CensusMismatch(format!(
                    "stratum support {support:?} has rank {}, expected {}",
                    flat.rank_l,
                    w.len() + 1
                )));
            }
            out.push(TypeTwoFlat { r, w, support });
            count += 1;
        }
        if count != count_expected {
            return Err(Error::CensusMismatch(format!(
                "{count} strata at r = {r}, expected {count_expected}"
            )));
        }
    }
    Ok(out)
}

/// Exhaustively compare the predicted strata with the full list of type (ii)
/// flats of the matroid. Returns any type (ii) flat that is not an I_r(W);
/// an empty result supports the multiplicity conjecture's flat census.
pub fn extra_type_two_flats(inst: &ChyInstance) -> Result<Vec<Vec<usize>>> {
    let predicted: Vec<Vec<usize>> = type_two_flats(inst)?
        .into_iter()
        .map(|f| f.support)
        .collect();
    let all = matroid::flats(&inst.arr)?;
    Ok(all
        .into_iter()
        .filter(|f| f.flat_type == FlatType::TypeII && !predicted.contains(&f.support))
        .map(|f| f.support)
        .collect())
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StratumCensus {
    pub r: usize,
    pub w: Vec<usize>,
    pub support: Vec<usize>,
    pub expected_points: usize,
    pub observed_points: usize,
    pub expected_multiplicity: usize,
    pub observed_multiplicities: Vec<usize>,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusRecord {
    pub m: usize,
    pub interior_expected: usize,
    pub interior_observed: usize,
    pub strata: Vec<StratumCensus>,
    pub expected_paths: usize,
    pub total_paths: usize,
    /// All strata carry the predicted point counts and multiplicities.
    pub conjecture_consistent: bool,
}

/// Match each boundary cluster of a solve report to its stratum and compare
/// observed counts and multiplicities with the predicted `(m-3-r)!` points
/// of multiplicity `r!`. Deviations are reported as data, not errors; only
/// a cluster that matches no stratum at all is an error.
pub fn boundary_census(inst: &ChyInstance, report: &SolutionReport) -> Result<CensusRecord> {
    let m = inst.m;
    let strata = type_two_flats(inst)?;
    let mut census: Vec<StratumCensus> = strata
        .iter()
        .filter(|s| s.r > 0)
        .map(|s| StratumCensus {
            r: s.r,
            w: s.w.clone(),
            support: s.support.clone(),
            expected_points: factorial(m - 3 - s.r),
            observed_points: 0,
            expected_multiplicity: factorial(s.r),
            observed_multiplicities: Vec::new(),
            matches: false,
        })
        .collect();
    for cluster in report.boundary() {
        let slot = census
            .iter_mut()
            .find(|s| s.support == cluster.support)
            .ok_or_else(|| Error::UnmatchedCluster(cluster.support.clone()))?;
        slot.observed_points += 1;
        slot.observed_multiplicities.push(cluster.multiplicity);
    }
    for s in &mut census {
        s.observed_multiplicities.sort_unstable();
        s.matches = s.observed_points == s.expected_points
            && s
                .observed_multiplicities
                .iter()
                .all(|&mult| mult == s.expected_multiplicity);
    }
    let interior_expected = factorial(m - 3);
    let conjecture_consistent =
        census.iter().all(|s| s.matches) && report.interior.len() == interior_expected;
    Ok(CensusRecord {
        m,
        interior_expected,
        interior_observed: report.interior.len(),
        strata: census,
        expected_paths: (m - 3) * factorial(m - 3),
        total_paths: report.path_stats.total,
        conjecture_consistent,
    })
}

/// The sub-arrangement carried by a stratum: the selected columns of L with
/// the zero rows removed. For `I_r(W)` this is the instance of `m - r`
/// points, with the Mandelstam values restricted accordingly.
pub fn sub_instance(inst: &ChyInstance, support: &[usize]) -> Result<(ArrangementMatrix, Vec<Complex64>)> {
    let l = inst.arr.l().select_cols(support);
    let keep: Vec<usize> = (0..l.nrows())
        .filter(|&i| (0..l.ncols()).any(|j| !l.get(i, j).is_zero()))
        .collect();
    let sub = ArrangementMatrix::from_l(l.select_rows(&keep))?;
    let s: Vec<Complex64> = support.iter().map(|&c| inst.s[c]).collect();
    Ok((sub, s))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubCheck {
    pub support: Vec<usize>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubScatteringRecord {
    pub checks: Vec<SubCheck>,
}

/// Verify that the nonzero coordinates of every boundary cluster solve the
/// scattering system of the corresponding sub-instance: the restricted
/// linear section and the sub-arrangement's circuit polynomials.
pub fn sub_scattering_check(
    inst: &ChyInstance,
    report: &SolutionReport,
    tol: f64,
) -> Result<SubScatteringRecord> {
    let mut checks = Vec::new();
    for cluster in report.boundary() {
        let (sub, s) = sub_instance(inst, &cluster.support)?;
        let y_full = pairs_to_vec(&cluster.representative);
        let y_sub: Vec<Complex64> = cluster.support.iter().map(|&c| y_full[c]).collect();
        let scale = y_sub.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let y_hat: Vec<Complex64> = y_sub.iter().map(|z| z / scale).collect();
        let at_s = sub.linear_section(&s);
        let polys = circuit_polynomials(&sub)?;
        let residual =
            full_target_residual(&at_s, &polys, &nalgebra::DVector::from_vec(y_hat));
        if residual > tol {
            return Err(Error::SubsystemViolation(format!(
                "boundary cluster on {:?}: sub-system residual {residual:.3e} above {tol:.1e}",
                cluster.support
            )));
        }
        checks.push(SubCheck {
            support: cluster.support.clone(),
            residual,
        });
    }
    Ok(SubScatteringRecord { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn l6_matches_the_displayed_matrix() {
        let inst = build_chy(6, None, &mut rng()).unwrap();
        let expect: [[i64; 9]; 4] = [
            [0, -1, 0, -1, 0, 0, -1, 0, 0],
            [1, 1, 0, 0, -1, 0, 0, -1, 0],
            [0, 0, 1, 1, 1, 0, 0, 0, -1],
            [0, 0, 0, 0, 0, 1, 1, 1, 1],
        ];
        assert_eq!(inst.arr.d(), 3);
        assert_eq!(inst.arr.ground_size(), 9);
        for (i, row) in expect.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(*inst.arr.l().get(i, j), rat_int(v), "entry ({i},{j})");
            }
        }
        assert_eq!(inst.arr.l().rank(), 4);
    }

    #[test]
    fn dimensions_for_all_m() {
        for m in 4..=8 {
            let inst = build_chy(m, None, &mut rng()).unwrap();
            assert_eq!(inst.arr.d(), m - 3);
            assert_eq!(inst.arr.ground_size(), m * (m - 3) / 2);
            assert_eq!(inst.arr.l().rank(), m - 2);
            assert_eq!(inst.column_labels.len(), inst.arr.ground_size());
        }
        assert!(matches!(build_chy(3, None, &mut rng()), Err(Error::BadM(3))));
        assert!(matches!(build_chy(10, None, &mut rng()), Err(Error::BadM(10))));
    }

    #[test]
    fn m4_is_a_single_block() {
        let inst = build_chy(4, None, &mut rng()).unwrap();
        assert_eq!(inst.arr.d(), 1);
        assert_eq!(inst.arr.ground_size(), 2);
        assert_eq!(inst.column_labels, vec![(1, 3), (2, 3)]);
    }

    #[test]
    fn strata_of_l6() {
        let inst = build_chy(6, None, &mut rng()).unwrap();
        let strata = type_two_flats(&inst).unwrap();
        let supports: Vec<Vec<usize>> = strata.iter().map(|s| s.support.clone()).collect();
        assert!(supports.contains(&vec![0, 1, 2, 3, 4, 5, 6, 7, 8])); // r = 0
        assert!(supports.contains(&vec![0, 1, 2, 3, 4]));
        assert!(supports.contains(&vec![2, 3, 5, 6, 8]));
        assert!(supports.contains(&vec![0, 1, 5, 6, 7]));
        assert!(supports.contains(&vec![0, 1]));
        assert!(supports.contains(&vec![2, 3]));
        assert!(supports.contains(&vec![5, 6]));
        assert_eq!(strata.len(), 1 + 3 + 3);
    }

    #[test]
    fn r_zero_stratum_is_the_full_ground_set() {
        for m in 4..=7 {
            let inst = build_chy(m, None, &mut rng()).unwrap();
            let strata = type_two_flats(&inst).unwrap();
            let full: Vec<&TypeTwoFlat> = strata.iter().filter(|s| s.r == 0).collect();
            assert_eq!(full.len(), 1);
            assert_eq!(full[0].support.len(), inst.arr.ground_size());
        }
    }

    #[test]
    fn extra_type_two_flats_carry_no_solutions() {
        // m = 4, 5: the strata I_r(W) are the only type (ii) flats.
        for m in [4, 5] {
            let inst = build_chy(m, None, &mut rng()).unwrap();
            assert!(extra_type_two_flats(&inst).unwrap().is_empty(), "m = {m}");
        }
        // m = 6: three further type (ii) flats exist, each a parallel pair
        // x_i, x_i - x_0 joined with a disjoint difference form. Their
        // sub-arrangement complements have zero Euler characteristic, so
        // they contribute no intersection points and stay invisible to the
        // boundary census.
        let inst = build_chy(6, None, &mut rng()).unwrap();
        let extras = extra_type_two_flats(&inst).unwrap();
        assert_eq!(
            extras,
            vec![vec![0, 1, 8], vec![2, 3, 7], vec![4, 5, 6]]
        );
        for support in &extras {
            assert_eq!(
                matroid::stratum_ml_degree(&inst.arr, support).unwrap(),
                0,
                "stratum {support:?}"
            );
        }
        // the census strata do carry points: (m-3-r)! of them
        for s in type_two_flats(&inst).unwrap() {
            assert_eq!(
                matroid::stratum_ml_degree(&inst.arr, &s.support).unwrap(),
                factorial(6 - 3 - s.r),
                "stratum {:?}",
                s.support
            );
        }
    }

    #[test]
    fn stratum_lattice_is_closed_under_intersection() {
        let inst = build_chy(6, None, &mut rng()).unwrap();
        let strata = type_two_flats(&inst).unwrap();
        for a in &strata {
            for b in &strata {
                let inter: Vec<usize> = a
                    .support
                    .iter()
                    .copied()
                    .filter(|i| b.support.contains(i))
                    .collect();
                let w_inter: Vec<usize> = a
                    .w
                    .iter()
                    .copied()
                    .filter(|i| b.w.contains(i))
                    .collect();
                assert_eq!(inter, stratum_support(6, &w_inter));
            }
        }
    }

    #[test]
    fn circuits_use_at_most_two_columns_per_block() {
        for m in [4, 5, 6] {
            let inst = build_chy(m, None, &mut rng()).unwrap();
            let block_of: Vec<usize> = {
                let mut v = Vec::new();
                for k in 2..=(m - 2) {
                    v.extend(std::iter::repeat_n(k, k));
                }
                v
            };
            for c in matroid::circuits(&inst.arr).unwrap() {
                for k in 2..=(m - 2) {
                    let in_block = c.support.iter().filter(|&&i| block_of[i] == k).count();
                    assert!(in_block <= 2, "m = {m}, circuit {:?}", c.support);
                }
            }
        }
    }

    #[test]
    fn mass_identity() {
        for m in 4..=9 {
            let total: usize = (0..=(m - 4))
                .map(|r| binomial(m - 3, r) * factorial(r) * factorial(m - 3 - r))
                .sum();
            assert_eq!(total, (m - 3) * factorial(m - 3), "m = {m}");
        }
    }

    #[test]
    fn degree_formulas_small_m() {
        for m in [4, 5, 6] {
            let inst = build_chy(m, None, &mut rng()).unwrap();
            assert_eq!(
                matroid::reciprocal_degree(&inst.arr).unwrap(),
                (m - 3) * factorial(m - 3),
                "reciprocal degree at m = {m}"
            );
            assert_eq!(
                matroid::ml_degree(&inst.arr).unwrap(),
                factorial(m - 3),
                "ML degree at m = {m}"
            );
        }
    }

    #[test]
    fn m5_boundary_points_solve_the_four_point_systems() {
        // each boundary cluster of the 5-point instance restricts to a
        // solution of a single linear condition, the 4-point system
        let mut r = rng();
        let inst = build_chy(5, None, &mut r).unwrap();
        let report = crate::homotopy::track_all(
            &inst.arr,
            Some(&inst.s),
            &crate::homotopy::HomotopyConfig::with_seed(55),
        )
        .unwrap();
        assert_eq!(report.interior.len(), 2);
        assert_eq!(report.boundary().len(), 2);
        let record = sub_scattering_check(&inst, &report, 1e-6).unwrap();
        assert_eq!(record.checks.len(), 2);
        let mut supports: Vec<Vec<usize>> =
            record.checks.iter().map(|ch| ch.support.clone()).collect();
        supports.sort();
        assert_eq!(supports, vec![vec![0, 1], vec![2, 3]]);
        for ch in &record.checks {
            let (sub, _) = sub_instance(&inst, &ch.support).unwrap();
            assert_eq!(sub.d(), 1);
            assert_eq!(sub.ground_size(), 2);
        }
    }

    #[test]
    fn m4_census_has_no_boundary() {
        let mut r = rng();
        let inst = build_chy(4, None, &mut r).unwrap();
        let report = crate::homotopy::track_all(
            &inst.arr,
            Some(&inst.s),
            &crate::homotopy::HomotopyConfig::with_seed(4),
        )
        .unwrap();
        let census = boundary_census(&inst, &report).unwrap();
        assert_eq!(census.interior_observed, 1);
        assert_eq!(census.total_paths, 1);
        assert!(census.strata.is_empty());
        assert!(census.conjecture_consistent);
    }

    #[test]
    fn l6_degree_criterion_is_strict_with_nine_witnesses() {
        // the six strata equivalent to smaller moduli instances plus the
        // three zero-characteristic extras
        let inst = build_chy(6, None, &mut rng()).unwrap();
        let (verdict, witnesses) = matroid::degree_criterion(&inst.arr).unwrap();
        assert_eq!(verdict, matroid::CriterionVerdict::Strict);
        assert_eq!(witnesses.len(), 9);
        let supports: Vec<Vec<usize>> = witnesses.iter().map(|f| f.support.clone()).collect();
        for expected in [
            vec![0usize, 1, 2, 3, 4],
            vec![2, 3, 5, 6, 8],
            vec![0, 1, 5, 6, 7],
            vec![0, 1],
            vec![2, 3],
            vec![5, 6],
        ] {
            assert!(supports.contains(&expected), "{expected:?}");
        }
    }

    #[test]
    fn sub_instance_of_l6_stratum_is_l5() {
        let mut r = rng();
        let inst = build_chy(6, None, &mut r).unwrap();
        let l5 = build_chy(5, None, &mut r).unwrap();
        for support in [vec![0usize, 1, 2, 3, 4], vec![2, 3, 5, 6, 8], vec![0, 1, 5, 6, 7]] {
            let (sub, s) = sub_instance(&inst, &support).unwrap();
            assert_eq!(sub.l(), l5.arr.l(), "support {support:?}");
            assert_eq!(s.len(), 5);
        }
    }
}
