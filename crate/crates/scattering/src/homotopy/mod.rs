//! The degeneration homotopy: start solutions on the components of the
//! initial-ideal variety, path tracking to the target section, endpoint
//! classification and certification, and chamber-level verification.

pub mod chambers;
pub mod system;
pub mod tracker;

use std::collections::HashSet;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::arrangement::{AffinePoint, ArrangementMatrix};
use crate::error::{Error, Result};
use crate::ideal::{self, CircuitPolynomial, InitialIdeal};
use crate::matroid::{self, FlatType, WeightOrder};
use crate::report::{
    vec_to_pairs, BoundaryCluster, CertificateRecord, CountsCheck, InteriorSolution, PathStats,
    PathStatus, PhaseTimings, SolutionReport,
};

pub use system::HomotopySystem;
pub use tracker::{track_one, TrackedPath, TrackerConfig};

/// Relative distance below which two start points count as coincident.
const START_DUPLICATE_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct HomotopyConfig {
    pub seed: u64,
    /// Newton corrector tolerance (relative step), also the endpoint
    /// residual acceptance threshold.
    pub tol_corrector: f64,
    /// Relative threshold separating zero from nonzero y-coordinates.
    pub tol_zero: f64,
    /// Endpoint clustering and dedup radius in patch coordinates.
    pub tol_cluster: f64,
    /// Full-system verification and certificate tolerance.
    pub tol_residual: f64,
    pub max_steps: usize,
    pub min_step: f64,
    pub initial_step: f64,
    pub gamma: Option<Complex64>,
    pub a0: Option<DMatrix<Complex64>>,
    pub omega: Option<Vec<i64>>,
    pub parallel: bool,
    pub record_timings: bool,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol_corrector: 1e-12,
            tol_zero: 1e-8,
            tol_cluster: 1e-4,
            tol_residual: 1e-8,
            max_steps: 10_000,
            min_step: 1e-14,
            initial_step: 0.1,
            gamma: None,
            a0: None,
            omega: None,
            parallel: true,
            record_timings: false,
        }
    }
}

impl HomotopyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn tracker(&self) -> TrackerConfig {
        TrackerConfig {
            tol_corrector: self.tol_corrector,
            max_steps: self.max_steps,
            min_step: self.min_step,
            initial_step: self.initial_step,
            ..TrackerConfig::default()
        }
    }
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_u(n1: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..n1).map(|_| complex_normal(rng)).collect()
}

/// A random arc parameter with dominant imaginary part and |gamma| <= 0.3,
/// steering the path around real discriminant crossings.
fn random_gamma(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.random_range(-0.1..0.1);
    let im: f64 = rng.random_range(0.15..0.28);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    Complex64::new(re, sign * im)
}

fn inf_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A path feeds classification if it converged at t = 1, or stalled at a
/// singular endpoint essentially at the end of the deformation.
fn path_is_usable(path: &TrackedPath) -> bool {
    path.status == PathStatus::Success || (path.stalled && path.t_reached >= 0.999)
}

fn dist_inf(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kernel vector of a full-row-rank `d x (d+1)` complex matrix by Gaussian
/// elimination with full pivoting; also returns the pivot-magnitude ratio
/// `|p_min| / |p_max|` as a degeneracy measure.
fn kernel_vector(m: &DMatrix<Complex64>) -> (DVector<Complex64>, f64) {
    let rows = m.nrows();
    let cols = m.ncols();
    debug_assert_eq!(cols, rows + 1);
    let mut w = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut p_min = f64::INFINITY;
    let mut p_max = 0.0_f64;
    for s in 0..rows {
        let mut best = (s, s, 0.0_f64);
        for i in s..rows {
            for j in s..cols {
                let v = w[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (bi, bj, mag) = best;
        p_min = p_min.min(mag);
        p_max = p_max.max(mag);
        if mag == 0.0 {
            return (DVector::zeros(cols), 0.0);
        }
        w.swap_rows(s, bi);
        w.swap_columns(s, bj);
        perm.swap(s, bj);
        let pivot = w[(s, s)];
        for i in (s + 1)..rows {
            let factor = w[(i, s)] / pivot;
            for j in s..cols {
                let v = w[(s, j)];
                w[(i, j)] -= factor * v;
            }
        }
    }
    // back substitution with the last permuted coordinate free
    let mut x = DVector::zeros(cols);
    x[cols - 1] = Complex64::new(1.0, 0.0);
    for s in (0..rows).rev() {
        let mut acc = w[(s, cols - 1)];
        for j in (s + 1)..rows {
            acc += w[(s, j)] * x[j];
        }
        x[s] = -acc / w[(s, s)];
    }
    let mut out = DVector::zeros(cols);
    for (permuted, &original) in perm.iter().enumerate() {
        out[original] = x[permuted];
    }
    (out, if p_max > 0.0 { p_min / p_max } else { 0.0 })
}

/// Start solutions with diagnostics, one candidate per nbc basis.
#[derive(Clone, Debug)]
pub struct StartReport {
    pub points: Vec<DVector<Complex64>>,
    /// Bases whose restricted `d x (d+1)` system was rank deficient.
    pub rank_deficient: Vec<usize>,
    /// Bases whose kernel vector could not be normalized onto the patch.
    pub patch_degenerate: Vec<usize>,
    /// Pairs of coincident start points (multiplicity on the start variety).
    pub duplicate_pairs: Vec<(usize, usize)>,
}

impl StartReport {
    pub fn is_regular(&self) -> bool {
        self.rank_deficient.is_empty()
            && self.patch_degenerate.is_empty()
            && self.duplicate_pairs.is_empty()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} rank-deficient restricted systems, {} patch failures, {} coincident start pairs",
            self.rank_deficient.len(),
            self.patch_degenerate.len(),
            self.duplicate_pairs.len()
        )
    }
}

/// Solve `A0^T y = 0` on each component of the start variety: restrict to
/// the columns of an nbc basis, take the one-dimensional kernel, embed with
/// zeros and normalize onto the patch `v . y = 1`.
pub fn start_report(
    a0t: &DMatrix<Complex64>,
    bases: &[Vec<usize>],
    patch: &DVector<Complex64>,
) -> StartReport {
    let d = a0t.nrows();
    let dim = a0t.ncols();
    let mut points = Vec::with_capacity(bases.len());
    let mut rank_deficient = Vec::new();
    let mut patch_degenerate = Vec::new();
    for (k, basis) in bases.iter().enumerate() {
        let sub = DMatrix::from_fn(d, d + 1, |i, j| a0t[(i, basis[j])]);
        let (kern, pivot_ratio) = kernel_vector(&sub);
        if pivot_ratio < 1e-10 {
            rank_deficient.push(k);
        }
        let mut y = DVector::zeros(dim);
        for (j, &col) in basis.iter().enumerate() {
            y[col] = kern[j];
        }
        let c = patch.dot(&y);
        if c.norm() < 1e-13 * inf_norm(&y) * patch.iter().map(|z| z.norm()).sum::<f64>().max(1.0)
        {
            patch_degenerate.push(k);
            points.push(y);
        } else {
            points.push(y / c);
        }
    }
    let mut duplicate_pairs = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let scale = inf_norm(&points[i]).max(1.0);
            if dist_inf(&points[i], &points[j]) < START_DUPLICATE_TOL * scale {
                duplicate_pairs.push((i, j));
            }
        }
    }
    StartReport {
        points,
        rank_deficient,
        patch_degenerate,
        duplicate_pairs,
    }
}

/// One start point per minimal prime of the initial ideal; errors if the
/// given `A0` is not generic for this decomposition.
pub fn start_solutions(
    arr: &ArrangementMatrix,
    a0t: &DMatrix<Complex64>,
    initial: &InitialIdeal,
    patch: &DVector<Complex64>,
) -> Result<Vec<DVector<Complex64>>> {
    let ground = arr.ground_size();
    let bases: Vec<Vec<usize>> = initial
        .minimal_primes
        .iter()
        .map(|prime| (0..ground).filter(|i| !prime.contains(i)).collect())
        .collect();
    let report = start_report(a0t, &bases, patch);
    if !report.is_regular() {
        return Err(Error::StartDegenerate(report.describe()));
    }
    Ok(report.points)
}

enum Classified {
    Interior(InteriorSolution),
    Boundary {
        support: Vec<usize>,
        is_type_ii: bool,
        point: DVector<Complex64>,
        path: usize,
    },
    Failed(String),
}

/// Support of the endpoint by the relative zero threshold. For stalled
/// (singular) endpoints the accuracy is only about sqrt(eps), so thresholds
/// descend from the cluster scale until the support is the full set or a
/// type (ii) flat.
fn classify_support(
    arr: &ArrangementMatrix,
    y: &DVector<Complex64>,
    stalled: bool,
    tol_zero: f64,
    tol_cluster: f64,
) -> (Vec<usize>, Option<FlatType>, bool) {
    let scale = inf_norm(y);
    let support_at = |thr: f64| -> Vec<usize> {
        (0..y.len()).filter(|&i| y[i].norm() > thr * scale).collect()
    };
    let thresholds: Vec<f64> = if stalled {
        let mut t = Vec::new();
        let mut thr = tol_cluster;
        while thr > tol_zero * 0.999 {
            t.push(thr);
            thr /= 10.0;
        }
        t
    } else {
        vec![tol_zero]
    };
    for thr in thresholds {
        let support = support_at(thr);
        if support.len() == y.len() {
            return (support, None, true);
        }
        if let Some(flat) = matroid::flat_of(arr, &support) {
            if flat.flat_type == FlatType::TypeII {
                return (support, Some(FlatType::TypeII), true);
            }
        }
    }
    let support = support_at(tol_zero);
    let is_full = support.len() == y.len();
    (support, None, is_full)
}

/// Residual of the full overdetermined target system (linear section plus
/// all circuit polynomials at t = 1), relative to coefficient scales.
pub fn full_target_residual(
    at_u: &DMatrix<Complex64>,
    polys: &[CircuitPolynomial],
    y: &DVector<Complex64>,
) -> f64 {
    let ynorm = inf_norm(y).max(1e-300);
    let mut worst = 0.0_f64;
    for i in 0..at_u.nrows() {
        let row_scale: f64 = at_u.row(i).iter().map(|z| z.norm()).sum::<f64>() * ynorm;
        let v: Complex64 = (0..at_u.ncols()).map(|j| at_u[(i, j)] * y[j]).sum();
        if row_scale > 0.0 {
            worst = worst.max(v.norm() / row_scale);
        }
    }
    for p in polys {
        let coeff_scale: f64 = p
            .terms
            .iter()
            .map(|t| crate::linalg::rat_to_f64(&t.coeff).abs())
            .sum();
        let scale = coeff_scale * ynorm.powi(p.degree() as i32);
        if scale > 0.0 {
            worst = worst.max(p.eval(y.as_slice()).norm() / scale);
        }
    }
    worst
}

/// Run the complete pipeline: combinatorics, start system, tracking,
/// classification and count checks. Failed paths are recorded in the path
/// statistics rather than aborting the run.
///
/// The exact ML degree tells exactly when a run came back incomplete (lost
/// or merged paths); in that case the numerical dressing (weight order,
/// start matrix, square-up, patch, arc) is redrawn and the run repeated,
/// up to three attempts. The problem data `u` is never redrawn.
pub fn track_all(
    arr: &ArrangementMatrix,
    u_given: Option<&[Complex64]>,
    cfg: &HomotopyConfig,
) -> Result<SolutionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = arr.ground_size();

    // draw order is fixed: u, then per attempt omega, patch, A0, R, gamma
    let u: Vec<Complex64> = match u_given {
        Some(u) => {
            assert_eq!(u.len(), dim, "u must have n+1 entries");
            u.to_vec()
        }
        None => random_u(dim, &mut rng),
    };
    for attempt in 1..=3u32 {
        let omega = match &cfg.omega {
            Some(w) => WeightOrder::new(w.clone())?,
            None => WeightOrder::random_permutation(dim, &mut rng),
        };
        let mut report = run_attempt(arr, &u, &omega, cfg, &mut rng)?;
        if attempt > 1 {
            report.warnings.insert(
                0,
                format!("numerical configuration redrawn ({attempt} attempts)"),
            );
        }
        let complete = report.counts_check.interior_matches_ml
            && report.path_stats.unclassified == 0;
        if complete || attempt == 3 {
            return Ok(report);
        }
    }
    unreachable!("attempt loop always returns")
}

fn run_attempt(
    arr: &ArrangementMatrix,
    u: &[Complex64],
    omega: &WeightOrder,
    cfg: &HomotopyConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SolutionReport> {
    let total_t0 = Instant::now();
    let dim = arr.ground_size();
    let d = arr.d();
    let n = arr.n();

    let comb_t0 = Instant::now();
    let polys = ideal::circuit_polynomials(arr)?;
    let deformed: Vec<CircuitPolynomial> =
        polys.iter().map(|p| ideal::deform(p, omega)).collect();
    let bases = matroid::nbc_bases(arr, omega)?;
    let reciprocal_degree = matroid::reciprocal_degree(arr)?;
    let ml_degree = matroid::ml_degree(arr)?;
    if bases.len() != reciprocal_degree {
        return Err(Error::InternalInconsistency(format!(
            "{} start components against reciprocal degree {reciprocal_degree}",
            bases.len()
        )));
    }
    let combinatorics_s = comb_t0.elapsed().as_secs_f64();

    let start_t0 = Instant::now();
    let patch = DVector::from_fn(dim, |_, _| complex_normal(rng));
    let (a0t, starts) = match &cfg.a0 {
        Some(a0) => {
            if a0.nrows() != d || a0.ncols() != dim {
                return Err(Error::MalformedInput(format!(
                    "A0 override must be {d} x {dim}, got {} x {}",
                    a0.nrows(),
                    a0.ncols()
                )));
            }
            let report = start_report(a0, &bases, &patch);
            if !report.is_regular() {
                return Err(Error::StartDegenerate(format!(
                    "user-provided A0: {}",
                    report.describe()
                )));
            }
            (a0.clone(), report.points)
        }
        None => {
            let mut found = None;
            for _ in 0..3 {
                let a0 = DMatrix::from_fn(d, dim, |_, _| complex_normal(rng));
                let report = start_report(&a0, &bases, &patch);
                if report.is_regular() {
                    found = Some((a0, report.points));
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::StartDegenerate("three random draws of A0 were degenerate".into())
            })?
        }
    };
    let squareup = DMatrix::from_fn(n - d, deformed.len(), |_, _| complex_normal(rng));
    let gamma = cfg.gamma.unwrap_or_else(|| random_gamma(rng));
    let at_u = arr.linear_section(u);
    let sys = HomotopySystem::new(
        d,
        n,
        a0t,
        at_u.clone(),
        deformed,
        squareup,
        patch,
        gamma,
    );
    let start_s = start_t0.elapsed().as_secs_f64();

    let track_t0 = Instant::now();
    let tracker_cfg = cfg.tracker();
    let mut paths: Vec<TrackedPath> = if cfg.parallel {
        starts
            .par_iter()
            .map(|s| track_one(&sys, s, &tracker_cfg))
            .collect()
    } else {
        starts.iter().map(|s| track_one(&sys, s, &tracker_cfg)).collect()
    };
    let mut warnings: Vec<String> = Vec::new();

    // Repair pass. Two failure modes call for re-tracking from the same
    // start: a path lost in a near-discriminant stretch of its arc, and a
    // path that jumped onto a neighbor (two full-support endpoints
    // coinciding). The endpoints at t = 1 do not depend on the arc, so a
    // fresh generic arc with cautious steps recovers the true endpoint.
    // A user-pinned gamma disables this.
    if cfg.gamma.is_none() {
        let conservative = tracker_cfg.conservative();
        let full_support = |p: &TrackedPath| -> bool {
            let scale = inf_norm(&p.endpoint);
            (0..dim).all(|k| p.endpoint[k].norm() > cfg.tol_zero * scale)
        };
        for round in 0..3u64 {
            let mut targets: Vec<usize> =
                (0..paths.len()).filter(|&i| !path_is_usable(&paths[i])).collect();
            for i in 0..paths.len() {
                if !path_is_usable(&paths[i]) || !full_support(&paths[i]) {
                    continue;
                }
                for j in (i + 1)..paths.len() {
                    if path_is_usable(&paths[j])
                        && full_support(&paths[j])
                        && dist_inf(&paths[i].endpoint, &paths[j].endpoint)
                            <= cfg.tol_cluster * inf_norm(&paths[i].endpoint).max(1.0)
                    {
                        targets.push(j);
                    }
                }
            }
            targets.sort_unstable();
            targets.dedup();
            if targets.is_empty() {
                break;
            }
            let mut changed = false;
            for idx in targets {
                let mut retry_rng = ChaCha8Rng::seed_from_u64(
                    cfg.seed ^ 0x5eed_a12c_u64
                        .wrapping_add((idx as u64) << 32)
                        .wrapping_add(round << 16),
                );
                for _ in 0..2 {
                    let retry_sys = sys.with_gamma(random_gamma(&mut retry_rng));
                    let candidate = track_one(&retry_sys, &starts[idx], &conservative);
                    if path_is_usable(&candidate) {
                        warnings
                            .push(format!("path {idx} was re-tracked along a fresh arc"));
                        paths[idx] = candidate;
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    let tracking_s = track_t0.elapsed().as_secs_f64();

    let classify_t0 = Instant::now();
    let mut stats = PathStats {
        total: paths.len(),
        ..PathStats::default()
    };
    let mut classified: Vec<(usize, Classified)> = Vec::new();
    for (idx, path) in paths.iter().enumerate() {
        match path.status {
            PathStatus::Success => stats.success += 1,
            PathStatus::Diverged => stats.diverged += 1,
            PathStatus::MinStep => stats.min_step += 1,
            PathStatus::MaxSteps => stats.max_steps += 1,
        }
        if !path_is_usable(path) {
            classified.push((
                idx,
                Classified::Failed(format!(
                    "path {idx}: status {:?} at tau = {:.6}",
                    path.status, path.t_reached
                )),
            ));
            continue;
        }
        let (support, _, recognized) = classify_support(
            arr,
            &path.endpoint,
            path.stalled,
            cfg.tol_zero,
            cfg.tol_cluster,
        );
        if support.len() == dim {
            // interior candidate: verify against the full target system,
            // then pull back through phi and certify
            let full_res = full_target_residual(&at_u, &polys, &path.endpoint);
            if full_res > cfg.tol_residual {
                classified.push((
                    idx,
                    Classified::Failed(format!(
                        "path {idx}: full-system residual {full_res:.3e} at interior endpoint"
                    )),
                ));
                continue;
            }
            let y_slice: Vec<Complex64> = path.endpoint.iter().copied().collect();
            match arr.phi_inverse(&y_slice, cfg.tol_residual) {
                Ok((x, phi_residual)) => {
                    match AffinePoint::certify(arr, u, x, cfg.tol_residual) {
                        Ok(pt) => {
                            let (_, cond) = arr
                                .hessian_nondegenerate(u, &pt.x, cfg.tol_residual)
                                .unwrap_or((false, 0.0));
                            classified.push((
                                idx,
                                Classified::Interior(InteriorSolution {
                                    x: vec_to_pairs(&pt.x),
                                    y: vec_to_pairs(&y_slice),
                                    residual: pt.residual,
                                    hessian_ok: pt.hessian_ok,
                                    hessian_cond: cond,
                                    phi_residual,
                                    path: idx,
                                }),
                            ));
                        }
                        Err(e) => classified.push((
                            idx,
                            Classified::Failed(format!("path {idx}: certification: {e}")),
                        )),
                    }
                }
                Err(e) => classified.push((
                    idx,
                    Classified::Failed(format!("path {idx}: phi inverse: {e}")),
                )),
            }
        } else {
            classified.push((
                idx,
                Classified::Boundary {
                    is_type_ii: recognized,
                    support,
                    point: path.endpoint.clone(),
                    path: idx,
                },
            ));
        }
    }

    // dedup interior solutions and cluster boundary points
    let mut interior: Vec<InteriorSolution> = Vec::new();
    let mut clusters: Vec<BoundaryCluster> = Vec::new();
    let mut cluster_points: Vec<DVector<Complex64>> = Vec::new();
    for (idx, c) in classified {
        match c {
            Classified::Interior(sol) => {
                let y = DVector::from_vec(crate::report::pairs_to_vec(&sol.y));
                let duplicate = interior.iter().any(|other| {
                    let oy = DVector::from_vec(crate::report::pairs_to_vec(&other.y));
                    dist_inf(&y, &oy) <= cfg.tol_cluster * inf_norm(&y).max(1.0)
                });
                if duplicate {
                    warnings.push(format!(
                        "path {idx} converged to an already reported interior solution"
                    ));
                    stats.unclassified += 1;
                } else {
                    interior.push(sol);
                }
            }
            Classified::Boundary {
                support,
                is_type_ii,
                point,
                path,
            } => {
                let scale = inf_norm(&point).max(1.0);
                let existing = (0..clusters.len()).find(|&k| {
                    clusters[k].support == support
                        && dist_inf(&cluster_points[k], &point) <= cfg.tol_cluster * scale
                });
                match existing {
                    Some(k) => {
                        clusters[k].multiplicity += 1;
                        clusters[k].paths.push(path);
                    }
                    None => {
                        clusters.push(BoundaryCluster {
                            support,
                            representative: vec_to_pairs(point.as_slice()),
                            multiplicity: 1,
                            paths: vec![path],
                            support_is_type_ii_flat: is_type_ii,
                        });
                        cluster_points.push(point);
                    }
                }
            }
            Classified::Failed(msg) => {
                stats.unclassified += 1;
                warnings.push(msg);
            }
        }
    }

    let failed = stats.total - stats.success;
    if failed * 10 > stats.total {
        warnings.push(format!(
            "too many path failures: {failed} of {} paths did not reach t = 1",
            stats.total
        ));
    }

    let counts_check = CountsCheck {
        interior: interior.len(),
        ml_degree,
        paths: stats.total,
        reciprocal_degree,
        interior_matches_ml: interior.len() == ml_degree,
        paths_match_reciprocal: stats.total == reciprocal_degree,
        optimal: stats.success == stats.total && interior.len() == stats.total,
    };
    let classify_s = classify_t0.elapsed().as_secs_f64();

    let timings = cfg.record_timings.then(|| PhaseTimings {
        combinatorics_s,
        start_s,
        tracking_s,
        classify_s,
        total_s: total_t0.elapsed().as_secs_f64(),
    });

    Ok(SolutionReport {
        d,
        n,
        seed: cfg.seed,
        omega: omega.entries().to_vec(),
        u: vec_to_pairs(u),
        interior,
        boundary_clusters: Some(clusters),
        path_stats: stats,
        counts_check,
        warnings,
        timings,
    })
}

/// Assert the exact count, and for real positive data the Varchenko
/// picture: real solutions, one per bounded chamber.
pub fn verify_solution_set(
    arr: &ArrangementMatrix,
    u: &[Complex64],
    report: &SolutionReport,
    grid: usize,
) -> Result<CertificateRecord> {
    let ml = matroid::ml_degree(arr)?;
    if report.interior.len() != ml {
        return Err(Error::CountMismatch(format!(
            "{} interior solutions against ML degree {ml}",
            report.interior.len()
        )));
    }
    let positive_real = u
        .iter()
        .all(|z| z.re > 0.0 && z.im.abs() <= 1e-12 * z.re.abs().max(1.0));
    let mut record = CertificateRecord {
        interior: report.interior.len(),
        ml_degree: ml,
        count_ok: true,
        reality_branch: positive_real,
        reality_ok: None,
        bounded_chambers: None,
        chambers_ok: None,
    };
    if !positive_real {
        return Ok(record);
    }
    for (k, sol) in report.interior.iter().enumerate() {
        let worst_im = sol.x.iter().map(|p| p[1].abs()).fold(0.0, f64::max);
        if worst_im >= 1e-8 {
            return Err(Error::RealityViolation(format!(
                "solution {k} has imaginary part {worst_im:.3e}"
            )));
        }
    }
    record.reality_ok = Some(true);
    if arr.d() <= 2 {
        let bounded = chambers::bounded_chambers(arr, grid)?;
        let mut seen: HashSet<Vec<i8>> = HashSet::new();
        for (k, sol) in report.interior.iter().enumerate() {
            let x: Vec<f64> = sol.x.iter().map(|p| p[0]).collect();
            let sv = chambers::sign_vector_f64(arr, &x).ok_or_else(|| {
                Error::ChamberViolation(format!("solution {k} lies on a chamber wall"))
            })?;
            if !bounded.contains(&sv) {
                return Err(Error::ChamberViolation(format!(
                    "solution {k} lies in an unbounded chamber"
                )));
            }
            if !seen.insert(sv) {
                return Err(Error::ChamberViolation(format!(
                    "two solutions share the chamber of solution {k}"
                )));
            }
        }
        if bounded.len() != report.interior.len() {
            return Err(Error::ChamberViolation(format!(
                "{} bounded chambers against {} solutions",
                bounded.len(),
                report.interior.len()
            )));
        }
        record.bounded_chambers = Some(bounded.len());
        record.chambers_ok = Some(true);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::fixtures::{boundary_arrangement, intro_arrangement};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kernel_vector_of_generic_matrix() {
        let m = DMatrix::from_row_slice(
            2,
            3,
            &[
                c(1.0, 0.2),
                c(0.5, -0.1),
                c(2.0, 0.0),
                c(0.0, 1.0),
                c(1.4, 0.3),
                c(-0.7, 0.9),
            ],
        );
        let (k, ratio) = kernel_vector(&m);
        assert!(ratio > 1e-6);
        let prod = &m * &k;
        assert!(prod.iter().all(|z| z.norm() < 1e-12));
        assert!(inf_norm(&k) > 0.1);
    }

    #[test]
    fn intro_example_three_interior_solutions() {
        let arr = intro_arrangement();
        let cfg = HomotopyConfig::with_seed(11);
        let report = track_all(&arr, None, &cfg).unwrap();
        assert_eq!(report.path_stats.total, 3);
        assert_eq!(report.interior.len(), 3);
        assert!(report.boundary().is_empty());
        assert!(report.counts_check.optimal);
        for sol in &report.interior {
            assert!(sol.residual < 1e-8, "residual {}", sol.residual);
            assert!(sol.hessian_ok);
        }
    }

    #[test]
    fn boundary_example_splits_interior_and_boundary() {
        let arr = boundary_arrangement();
        let cfg = HomotopyConfig::with_seed(5);
        let report = track_all(&arr, None, &cfg).unwrap();
        assert_eq!(report.path_stats.total, 2);
        assert_eq!(report.interior.len(), 1);
        let boundary = report.boundary();
        assert_eq!(boundary.len(), 1);
        assert_eq!(boundary[0].support, vec![0, 1]);
        assert!(boundary[0].support_is_type_ii_flat);
        assert_eq!(boundary[0].multiplicity, 1);
    }

    #[test]
    fn start_solutions_with_special_a0_on_intro_example() {
        // A0 = A^T diag(u) is generic enough for the four-line example: one
        // start point per coordinate plane, each with exactly one zero
        // coordinate, solving the restricted linear system
        let arr = intro_arrangement();
        let u = [c(1.3, 0.4), c(-0.2, 1.1), c(0.8, -0.6), c(0.5, 0.9)];
        let a0 = arr.linear_section(&u);
        let omega = crate::matroid::WeightOrder::new(vec![1, 2, 3, 4]).unwrap();
        let initial = ideal::initial_ideal(&arr, &omega).unwrap();
        let patch = DVector::from_column_slice(&[c(0.9, 0.1), c(0.4, -0.3), c(0.7, 0.2), c(0.3, 0.5)]);
        let starts = start_solutions(&arr, &a0, &initial, &patch).unwrap();
        assert_eq!(starts.len(), 3);
        for (start, prime) in starts.iter().zip(&initial.minimal_primes) {
            let zeros: Vec<usize> = (0..4).filter(|&i| start[i].norm() < 1e-14).collect();
            assert_eq!(&zeros, prime);
            let lin = &a0 * start;
            assert!(lin.iter().all(|z| z.norm() < 1e-12));
            let on_patch: Complex64 = (0..4).map(|j| patch[j] * start[j]).sum();
            assert!((on_patch - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn start_solutions_on_boundary_example_match_prime_structure() {
        // V(J) = V(y2 y3) is a union of two coordinate hyperplanes, so each
        // of the two start points has exactly one zero coordinate, on its
        // prime's support
        let arr = boundary_arrangement();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a0 = DMatrix::from_fn(2, 4, |_, _| complex_normal(&mut rng));
        let omega = crate::matroid::WeightOrder::new(vec![1, 2, 3, 4]).unwrap();
        let initial = ideal::initial_ideal(&arr, &omega).unwrap();
        let patch = DVector::from_fn(4, |_, _| complex_normal(&mut rng));
        let starts = start_solutions(&arr, &a0, &initial, &patch).unwrap();
        assert_eq!(starts.len(), 2);
        for (start, prime) in starts.iter().zip(&initial.minimal_primes) {
            let zeros: Vec<usize> = (0..4).filter(|&i| start[i].norm() < 1e-14).collect();
            assert_eq!(&zeros, prime);
            assert_eq!(zeros.len(), arr.n() - arr.d());
        }
    }

    #[test]
    fn varchenko_reality_on_boundary_example() {
        // positive real exponents: the single solution is real and sits in
        // the unique bounded chamber
        let arr = boundary_arrangement();
        let u = vec![c(1.0, 0.0), c(2.0, 0.0), c(1.5, 0.0), c(0.5, 0.0)];
        let report = track_all(&arr, Some(&u), &HomotopyConfig::with_seed(8)).unwrap();
        assert_eq!(report.interior.len(), 1);
        let cert = verify_solution_set(&arr, &u, &report, 150).unwrap();
        assert_eq!(cert.bounded_chambers, Some(1));
        assert_eq!(cert.chambers_ok, Some(true));
    }

    #[test]
    fn verify_on_one_dimensional_arrangement() {
        // forms x, x-1, x-3 on the line: two bounded intervals, two real
        // solutions, one in each
        let l = crate::linalg::RatMat::from_rows(vec![
            vec![
                crate::linalg::rat_int(0),
                crate::linalg::rat_int(-1),
                crate::linalg::rat_int(-3),
            ],
            vec![
                crate::linalg::rat_int(1),
                crate::linalg::rat_int(1),
                crate::linalg::rat_int(1),
            ],
        ]);
        let arr = ArrangementMatrix::from_l(l).unwrap();
        let u = vec![c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let report = track_all(&arr, Some(&u), &HomotopyConfig::with_seed(9)).unwrap();
        assert_eq!(report.interior.len(), 2);
        let cert = verify_solution_set(&arr, &u, &report, 0).unwrap();
        assert_eq!(cert.bounded_chambers, Some(2));
        assert_eq!(cert.chambers_ok, Some(true));
    }

    #[test]
    fn varchenko_reality_on_intro_example() {
        let arr = intro_arrangement();
        let u = vec![c(1.0, 0.0); 4];
        let cfg = HomotopyConfig::with_seed(3);
        let report = track_all(&arr, Some(&u), &cfg).unwrap();
        assert_eq!(report.interior.len(), 3);
        let cert = verify_solution_set(&arr, &u, &report, 150).unwrap();
        assert!(cert.reality_branch);
        assert_eq!(cert.reality_ok, Some(true));
        assert_eq!(cert.bounded_chambers, Some(3));
        assert_eq!(cert.chambers_ok, Some(true));
    }

    #[test]
    fn max_steps_truncation_is_reported() {
        let arr = intro_arrangement();
        let cfg = HomotopyConfig {
            max_steps: 2,
            ..HomotopyConfig::with_seed(11)
        };
        let report = track_all(&arr, None, &cfg).unwrap();
        assert_eq!(report.path_stats.max_steps, 3);
        assert!(report.interior.is_empty());
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let arr = intro_arrangement();
        let cfg = HomotopyConfig::with_seed(42);
        let a = track_all(&arr, None, &cfg).unwrap();
        let b = track_all(&arr, None, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn complex_u_skips_the_reality_branch() {
        let arr = intro_arrangement();
        let cfg = HomotopyConfig::with_seed(12);
        let report = track_all(&arr, None, &cfg).unwrap();
        let u = crate::report::pairs_to_vec(&report.u);
        let cert = verify_solution_set(&arr, &u, &report, 100).unwrap();
        assert_eq!(cert.interior, 3);
        assert!(!cert.reality_branch);
        assert_eq!(cert.reality_ok, None);
        assert_eq!(cert.chambers_ok, None);
    }
}
