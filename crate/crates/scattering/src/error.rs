//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("rank deficient: rank(L) = {achieved}, expected {required}")]
    RankDeficient { achieved: usize, required: usize },

    #[error("point lies on the arrangement: |l_{index}(x)| = {value:.3e} below zero tolerance")]
    OnArrangement { index: usize, value: f64 },

    #[error("point is not in the image of phi: least-squares residual {residual:.3e}")]
    InconsistentPoint { residual: f64 },

    #[error("degenerate scale in phi inverse: |mu| = {value:.3e}")]
    DegenerateScale { value: f64 },

    #[error("ground set too large: {size} elements, supported up to {max}")]
    GroundSetTooLarge { size: usize, max: usize },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("arrangement is not essential: rank(A) = {rank_a} < d = {d}")]
    NotEssential { rank_a: usize, d: usize },

    #[error("degenerate start system: {0}")]
    StartDegenerate(String),

    #[error("count mismatch: {0}")]
    CountMismatch(String),

    #[error("reality violation: {0}")]
    RealityViolation(String),

    #[error("chamber violation: {0}")]
    ChamberViolation(String),

    #[error("invalid point count m = {0}: supported range is 4..=9")]
    BadM(usize),

    #[error("census mismatch: {0}")]
    CensusMismatch(String),

    #[error("boundary cluster with support {0:?} matches no known stratum")]
    UnmatchedCluster(Vec<usize>),

    #[error("subsystem violation: {0}")]
    SubsystemViolation(String),

    #[error("Macaulay matrix too large: {size} monomials at this degree, limit {limit}")]
    MatrixTooLarge { size: usize, limit: usize },

    #[error("singular row selection in eliminant: {0}")]
    SingularSelection(String),

    #[error("eliminant determinant vanishes identically: {0}")]
    DegreeCollapse(String),

    #[error("Hilbert regularity contradiction: {0}")]
    RegularityContradiction(String),
}

impl Error {
    /// Process exit code used by the CLI: 1 for bad instances, 2 for numerical
    /// failures, 3 for count mismatches.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            MalformedInput(_) | RankDeficient { .. } | GroundSetTooLarge { .. }
            | NotEssential { .. } | BadM(_) | MatrixTooLarge { .. } => 1,
            OnArrangement { .. } | InconsistentPoint { .. } | DegenerateScale { .. }
            | InternalInconsistency(_) | StartDegenerate(_) | SubsystemViolation(_)
            | SingularSelection(_) | DegreeCollapse(_) | RegularityContradiction(_) => 2,
            CountMismatch(_) | RealityViolation(_) | ChamberViolation(_)
            | CensusMismatch(_) | UnmatchedCluster(_) => 3,
        }
    }

    /// Stable machine-readable tag for JSON error bodies.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            MalformedInput(_) => "malformed_input",
            RankDeficient { .. } => "rank_deficient",
            OnArrangement { .. } => "on_arrangement",
            InconsistentPoint { .. } => "inconsistent_point",
            DegenerateScale { .. } => "degenerate_scale",
            GroundSetTooLarge { .. } => "ground_set_too_large",
            InternalInconsistency(_) => "internal_inconsistency",
            NotEssential { .. } => "not_essential",
            StartDegenerate(_) => "start_degenerate",
            CountMismatch(_) => "count_mismatch",
            RealityViolation(_) => "reality_violation",
            ChamberViolation(_) => "chamber_violation",
            BadM(_) => "bad_m",
            CensusMismatch(_) => "census_mismatch",
            UnmatchedCluster(_) => "unmatched_cluster",
            SubsystemViolation(_) => "subsystem_violation",
            MatrixTooLarge { .. } => "matrix_too_large",
            SingularSelection(_) => "singular_selection",
            DegreeCollapse(_) => "degree_collapse",
            RegularityContradiction(_) => "regularity_contradiction",
        }
    }
}
