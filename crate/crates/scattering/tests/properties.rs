//! Spec-level invariants: round trips, scaling invariance, weight-order
//! independence, degree inequalities and criterion consistency, deformation
//! identities, and certification guarantees on random instances.

mod common;

use common::{boundary_arrangement, c, complex_multisets_match, intro_arrangement, random_instance};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scattering::arrangement::ArrangementMatrix;
use scattering::chy::{build_chy, factorial};
use scattering::hilbert;
use scattering::homotopy::{self, HomotopyConfig};
use scattering::ideal;
use scattering::linalg::{rat, rat_int, rat_to_f64, Rat};
use scattering::matroid::{self, CriterionVerdict, FlatType, WeightOrder};
use scattering::report::pairs_to_vec;

#[test]
fn phi_round_trip_100_rational_points() {
    let arr = intro_arrangement();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut done = 0;
    while done < 100 {
        let x_rat: Vec<Rat> = (0..2)
            .map(|_| rat(rng.random_range(-40..=40), rng.random_range(1..=7)))
            .collect();
        let ell = arr.linear_forms_at_rat(&x_rat);
        if ell.iter().any(num_traits::Zero::is_zero) {
            continue;
        }
        let x: Vec<Complex64> = x_rat.iter().map(|r| c(rat_to_f64(r), 0.0)).collect();
        let y = arr.phi(&x).unwrap();
        let (back, _) = arr.phi_inverse(&y, 1e-8).unwrap();
        let scale = x.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() < 1e-9 * scale, "{a} vs {b}");
        }
        done += 1;
    }
}

#[test]
fn gradient_matches_finite_differences_in_chamber() {
    // points in the all-positive chamber of the four-line example, real
    // positive exponents: compare the analytic gradient with central
    // differences of sum u_i log l_i
    let arr = intro_arrangement();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(0.3..0.6)).collect();
        let u: Vec<f64> = (0..4).map(|_| rng.random_range(0.5..2.0)).collect();
        let uc: Vec<Complex64> = u.iter().map(|&v| c(v, 0.0)).collect();
        let xc: Vec<Complex64> = x.iter().map(|&v| c(v, 0.0)).collect();
        let grad = arr.gradient(&uc, &xc).unwrap();
        let potential = |p: &[f64]| -> f64 {
            let pc: Vec<Complex64> = p.iter().map(|&v| c(v, 0.0)).collect();
            arr.linear_forms_at(&pc)
                .iter()
                .zip(&u)
                .map(|(l, w)| w * l.re.ln())
                .sum()
        };
        let h = 1e-5;
        for j in 0..2 {
            let mut plus = x.clone();
            plus[j] += h;
            let mut minus = x.clone();
            minus[j] -= h;
            let fd = (potential(&plus) - potential(&minus)) / (2.0 * h);
            assert!(
                (grad[j].re - fd).abs() < 1e-6,
                "partial {j}: analytic {} vs fd {fd}",
                grad[j].re
            );
        }
    }
}

#[test]
fn residual_and_solutions_invariant_under_column_scaling() {
    let arr = intro_arrangement();
    let mut l = arr.l().clone();
    for i in 0..3 {
        l.set(i, 2, l.get(i, 2) * rat_int(7));
    }
    let scaled = ArrangementMatrix::from_l(l).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let u: Vec<Complex64> = (0..4)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    for _ in 0..20 {
        let x: Vec<Complex64> = (0..2)
            .map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let (Ok(a), Ok(b)) = (
            arr.scattering_residual(&u, &x),
            scaled.scattering_residual(&u, &x),
        ) else {
            continue;
        };
        assert!((a - b).abs() <= 1e-10 * a.max(1.0), "{a} vs {b}");
    }
    // the solution sets agree as well
    let ra = homotopy::track_all(&arr, Some(&u), &HomotopyConfig::with_seed(5)).unwrap();
    let rb = homotopy::track_all(&scaled, Some(&u), &HomotopyConfig::with_seed(5)).unwrap();
    let xs = |r: &scattering::report::SolutionReport, k: usize| -> Vec<Complex64> {
        r.interior
            .iter()
            .map(|s| pairs_to_vec(&s.x)[k])
            .collect()
    };
    for k in 0..2 {
        assert!(complex_multisets_match(&xs(&ra, k), &xs(&rb, k), 1e-8));
    }
}

#[test]
fn reciprocal_degree_independent_of_weight_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for arr in [intro_arrangement(), boundary_arrangement()] {
        let reference = matroid::reciprocal_degree(&arr).unwrap();
        for _ in 0..5 {
            let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
            assert_eq!(matroid::nbc_bases(&arr, &omega).unwrap().len(), reference);
        }
    }
}

#[test]
fn nbc_bases_have_cardinality_d_plus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for iter in 0..30 {
        let d = 1 + iter % 3;
        let n = d + 1 + iter % 4;
        let arr = random_instance(d, n, 4, &mut rng);
        let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
        for basis in matroid::nbc_bases(&arr, &omega).unwrap() {
            assert_eq!(basis.len(), d + 1);
        }
    }
}

#[test]
fn criterion_consistency_on_named_and_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let mut named: Vec<ArrangementMatrix> = vec![intro_arrangement(), boundary_arrangement()];
    named.push(build_chy(5, None, &mut rng).unwrap().arr);
    named.push(build_chy(6, None, &mut rng).unwrap().arr);
    for iter in 0..20 {
        let d = 1 + iter % 3;
        let n = d + 1 + iter % 4;
        named.push(random_instance(d, n, 4, &mut rng));
    }
    for (k, arr) in named.iter().enumerate() {
        let ml = matroid::ml_degree(arr).unwrap();
        let reciprocal = matroid::reciprocal_degree(arr).unwrap();
        assert!(ml <= reciprocal, "instance {k}: {ml} > {reciprocal}");
        let (verdict, witnesses) = matroid::degree_criterion(arr).unwrap();
        assert_eq!(
            verdict == CriterionVerdict::Equal,
            ml == reciprocal,
            "instance {k}: verdict {verdict:?} against ml {ml}, reciprocal {reciprocal}"
        );
        if verdict == CriterionVerdict::Strict {
            assert!(!witnesses.is_empty());
        }
    }
}

#[test]
fn deformation_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for arr in [intro_arrangement(), boundary_arrangement()] {
        let polys = ideal::circuit_polynomials(&arr).unwrap();
        for _ in 0..5 {
            let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
            for p in &polys {
                let d = ideal::deform(p, &omega);
                // t = 1 reproduces the polynomial: same terms, same exact
                // coefficients
                assert_eq!(d.terms, p.terms);
                let exps = d.t_exponents.as_ref().unwrap();
                assert!(exps.contains(&0));
                // exponent-zero terms are exactly the terms of maximal
                // omega-weight
                let weights: Vec<i64> = d
                    .terms
                    .iter()
                    .map(|t| t.monomial.iter().map(|&j| omega.weight(j)).sum())
                    .collect();
                let max = *weights.iter().max().unwrap();
                for (w, &e) in weights.iter().zip(exps) {
                    assert_eq!(*w == max, e == 0);
                }
            }
        }
    }
}

#[test]
fn minimal_primes_count_equals_reciprocal_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    for iter in 0..10 {
        let d = 1 + iter % 3;
        let n = d + 1 + iter % 3;
        let arr = random_instance(d, n, 4, &mut rng);
        let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
        let j = ideal::initial_ideal(&arr, &omega).unwrap();
        assert_eq!(
            j.minimal_primes.len(),
            matroid::reciprocal_degree(&arr).unwrap()
        );
    }
}

#[test]
fn path_count_and_certificates_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for iter in 0..12u64 {
        let d = 1 + (iter as usize) % 3;
        let n = d + 1 + (iter as usize) % 3;
        let arr = random_instance(d, n, 5, &mut rng);
        let report =
            homotopy::track_all(&arr, None, &HomotopyConfig::with_seed(2900 + iter)).unwrap();
        // path count always equals the reciprocal degree
        assert_eq!(
            report.path_stats.total,
            matroid::reciprocal_degree(&arr).unwrap()
        );
        // endpoint certification and dedup soundness
        for sol in &report.interior {
            assert!(sol.residual < 1e-8);
            assert!(sol.hessian_ok);
        }
        for (a, i) in report.interior.iter().zip(0..) {
            for b in report.interior.iter().skip(i + 1) {
                let ya = pairs_to_vec(&a.y);
                let yb = pairs_to_vec(&b.y);
                let dist = ya
                    .iter()
                    .zip(&yb)
                    .map(|(p, q)| (p - q).norm())
                    .fold(0.0_f64, f64::max);
                assert!(dist > 1e-4, "interior dedup violated: distance {dist:.3e}");
            }
        }
        // boundary supports are type (ii) flats
        for cluster in report.boundary() {
            assert!(cluster.support_is_type_ii_flat, "support {:?}", cluster.support);
            let flat = matroid::flat_of(&arr, &cluster.support).unwrap();
            assert_eq!(flat.flat_type, FlatType::TypeII);
        }
    }
}

#[test]
fn ml_degree_matches_whitney_rank_sum() {
    // independent count oracle: the characteristic polynomial of an affine
    // arrangement is chi(t) = sum over subsets S with nonempty
    // intersection of (-1)^|S| t^(d - rank(A_S)); at t = 1 the signed sum
    // of (-1)^|S| over consistent subsets gives the critical-point count
    let whitney_ml = |arr: &ArrangementMatrix| -> i64 {
        use scattering::linalg::RatMat;
        let ground = arr.ground_size();
        let aug = RatMat::from_fn(ground, arr.d() + 1, |i, j| {
            if j < arr.d() {
                arr.a().get(i, j).clone()
            } else {
                arr.b()[i].clone()
            }
        });
        let mut chi_at_one = 0i64;
        for mask in 0u32..(1 << ground) {
            let s: Vec<usize> = (0..ground).filter(|i| mask & (1 << i) != 0).collect();
            let rank_a = arr.a().select_rows(&s).rank();
            if aug.select_rows(&s).rank() != rank_a {
                continue; // empty intersection
            }
            chi_at_one += if s.len() % 2 == 0 { 1 } else { -1 };
        }
        chi_at_one.abs()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let mut instances = vec![intro_arrangement(), boundary_arrangement()];
    instances.push(build_chy(5, None, &mut rng).unwrap().arr);
    instances.push(build_chy(6, None, &mut rng).unwrap().arr);
    for iter in 0..30 {
        let d = 1 + iter % 3;
        let n = d + 1 + iter % 4;
        instances.push(random_instance(d, n, 4, &mut rng));
    }
    for (k, arr) in instances.iter().enumerate() {
        assert_eq!(
            matroid::ml_degree(arr).unwrap() as i64,
            whitney_ml(arr),
            "instance {k}"
        );
    }
}

#[test]
fn optimality_on_criterion_equal_instances() {
    // random generic instances with d in {2,3} and n in 4..=7: when the
    // degree criterion holds, every path succeeds and is classified
    // interior
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut run = 0u64;
    while run < 12 {
        let d = 2 + (run as usize % 2);
        let n = 4 + (run as usize % 4);
        if n <= d + 1 {
            run += 1;
            continue;
        }
        let arr = random_instance(d, n, 10, &mut rng);
        let (verdict, _) = matroid::degree_criterion(&arr).unwrap();
        if verdict != CriterionVerdict::Equal {
            continue;
        }
        let report =
            homotopy::track_all(&arr, None, &HomotopyConfig::with_seed(3300 + run)).unwrap();
        assert!(report.counts_check.optimal, "run {run} (d={d}, n={n})");
        assert_eq!(report.path_stats.success, report.path_stats.total);
        assert_eq!(report.interior.len(), report.path_stats.total);
        run += 1;
    }
}

#[test]
fn hilbert_stabilization_and_leading_behavior() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let instances = vec![
        intro_arrangement(),
        boundary_arrangement(),
        build_chy(5, None, &mut rng).unwrap().arr,
    ];
    for arr in &instances {
        let d = arr.d();
        let deg = matroid::reciprocal_degree(arr).unwrap() as u64;
        let u = hilbert::random_u_rational(arr.ground_size(), &mut rng);
        for q in [d, d + 1, d + 2] {
            assert_eq!(
                hilbert::quotient_hilbert_function(arr, &u, q, None).unwrap(),
                deg,
                "stabilization at q = {q}"
            );
        }
        // leading behavior: HF(q) d! / q^d tends to the degree
        let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
        let hf12 = hilbert::hilbert_function_rl(arr, &omega, 12).unwrap() as f64;
        let approx = hf12 * factorial(d) as f64 / 12f64.powi(d as i32);
        let ratio = approx / deg as f64;
        assert!(
            (0.8..1.25).contains(&ratio),
            "leading coefficient ratio {ratio:.3}"
        );
    }
}

#[test]
fn boundary_eliminant_cross_check() {
    // valid pencil base h1 = y0 on the boundary example: the degree-2
    // eliminant's roots are the interior ratio y3/y0 and 0 from the
    // boundary point (y2 = y3 = 0)
    let arr = boundary_arrangement();
    let omega = WeightOrder::new(vec![1, 2, 3, 4]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let u_rat = hilbert::random_u_rational(4, &mut rng);
    let h1 = [rat_int(1), rat_int(0), rat_int(0), rat_int(0)];
    let h2 = [rat_int(0), rat_int(0), rat_int(0), rat_int(1)];
    let coeffs = hilbert::eliminant(&arr, &u_rat, &h1, &h2, None, &omega, &mut rng).unwrap();
    assert_eq!(coeffs.len(), 3, "degree-2 factor expected");
    let roots = hilbert::poly_roots(&coeffs);

    let u_c: Vec<Complex64> = u_rat.iter().map(|r| c(rat_to_f64(r), 0.0)).collect();
    let report = homotopy::track_all(&arr, Some(&u_c), &HomotopyConfig::with_seed(32)).unwrap();
    assert_eq!(report.interior.len(), 1);
    let mut expected: Vec<Complex64> = report
        .interior
        .iter()
        .map(|s| {
            let y = pairs_to_vec(&s.y);
            y[3] / y[0]
        })
        .collect();
    // the boundary point contributes the ratio 0/y0 = 0
    expected.push(c(0.0, 0.0));
    assert!(
        complex_multisets_match(&roots, &expected, 1e-6),
        "roots {roots:?} vs {expected:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Round trip through phi on random valid instances and random points.
    #[test]
    fn prop_phi_round_trip(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 + (seed as usize) % 3;
        let n = d + (seed as usize) % 3 + 1;
        let arr = random_instance(d, n, 5, &mut rng);
        let x: Vec<Complex64> = (0..d)
            .map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        if let Ok(y) = arr.phi(&x) {
            if let Ok((back, _)) = arr.phi_inverse(&y, 1e-8) {
                let scale = x.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
                for (a, b) in back.iter().zip(&x) {
                    prop_assert!((a - b).norm() < 1e-9 * scale);
                }
            }
        }
    }

    /// The ML degree never exceeds the reciprocal degree.
    #[test]
    fn prop_ml_at_most_reciprocal(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 + (seed as usize) % 3;
        let n = d + (seed as usize) % 4 + 1;
        let arr = random_instance(d, n, 3, &mut rng);
        let ml = matroid::ml_degree(&arr).unwrap();
        let reciprocal = matroid::reciprocal_degree(&arr).unwrap();
        prop_assert!(ml <= reciprocal);
    }

    /// Scaling a column by a nonzero rational never changes the counts.
    #[test]
    fn prop_column_scaling_preserves_degrees(seed in 0u64..5000, num in 1i64..9, col in 0usize..4) {
        let arr = intro_arrangement();
        let mut l = arr.l().clone();
        for i in 0..3 {
            l.set(i, col, l.get(i, col) * rat(num, 3));
        }
        let scaled = ArrangementMatrix::from_l(l).unwrap();
        prop_assert_eq!(
            matroid::ml_degree(&scaled).unwrap(),
            matroid::ml_degree(&arr).unwrap()
        );
        prop_assert_eq!(
            matroid::reciprocal_degree(&scaled).unwrap(),
            matroid::reciprocal_degree(&arr).unwrap()
        );
        let _ = seed;
    }
}
