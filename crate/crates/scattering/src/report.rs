//! Serializable result records. Complex numbers serialize as `[re, im]`
//! pairs; every collection is a plain vector so that reports with a fixed
//! seed are byte-identical across runs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub fn complex_to_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn pair_to_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn vec_to_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(complex_to_pair).collect()
}

pub fn pairs_to_vec(p: &[[f64; 2]]) -> Vec<Complex64> {
    p.iter().copied().map(pair_to_complex).collect()
}

/// A certified interior solution: the affine point, its reciprocal-space
/// representative in the patch chart, and the certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteriorSolution {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    /// Max-norm of the gradient of the log-potential at x.
    pub residual: f64,
    pub hessian_ok: bool,
    /// Scale-normalized Hessian determinant used for the nondegeneracy call.
    pub hessian_cond: f64,
    /// Least-squares residual of the inverse parametrization solve.
    pub phi_residual: f64,
    /// Index of the start solution whose path produced this point.
    pub path: usize,
}

/// One distinct boundary point: paths that converged together within the
/// cluster tolerance, sharing a support pattern. The observed multiplicity
/// is the number of merged paths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCluster {
    pub support: Vec<usize>,
    pub representative: Vec<[f64; 2]>,
    pub multiplicity: usize,
    pub paths: Vec<usize>,
    /// Whether the support is a flat of M(L) with rank(A_I^T) = rank(L_I) - 1.
    pub support_is_type_ii_flat: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Success,
    Diverged,
    MinStep,
    MaxSteps,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PathStats {
    pub total: usize,
    pub success: usize,
    pub diverged: usize,
    pub min_step: usize,
    pub max_steps: usize,
    /// Paths whose endpoint failed interior certification or support
    /// classification.
    pub unclassified: usize,
}

/// Cross-check of the numerical output against the exact matroid counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsCheck {
    pub interior: usize,
    pub ml_degree: usize,
    pub paths: usize,
    pub reciprocal_degree: usize,
    pub interior_matches_ml: bool,
    pub paths_match_reciprocal: bool,
    /// Every path succeeded and landed on an interior solution.
    pub optimal: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub combinatorics_s: f64,
    pub start_s: f64,
    pub tracking_s: f64,
    pub classify_s: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionReport {
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub omega: Vec<i64>,
    pub u: Vec<[f64; 2]>,
    pub interior: Vec<InteriorSolution>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundary_clusters: Option<Vec<BoundaryCluster>>,
    pub path_stats: PathStats,
    pub counts_check: CountsCheck,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    /// Populated only in bench mode; excluded otherwise so that reports with
    /// equal seeds are byte-identical.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<PhaseTimings>,
}

impl SolutionReport {
    pub fn boundary(&self) -> &[BoundaryCluster] {
        self.boundary_clusters.as_deref().unwrap_or(&[])
    }
}

/// Output of the solution-set verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub interior: usize,
    pub ml_degree: usize,
    pub count_ok: bool,
    /// True when L is real and u is a positive real vector, so the reality
    /// and chamber assertions apply.
    pub reality_branch: bool,
    pub reality_ok: Option<bool>,
    pub bounded_chambers: Option<usize>,
    pub chambers_ok: Option<bool>,
}
