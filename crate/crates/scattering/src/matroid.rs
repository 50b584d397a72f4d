//! Exact combinatorics of the column matroid M(L): circuits with their
//! coefficient vectors, flats with their rank classification, broken
//! circuits, nbc bases, beta invariant, connectivity, and the reciprocal
//! and ML degrees.

use std::collections::{HashMap, HashSet, VecDeque};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::arrangement::ArrangementMatrix;
use crate::error::{Error, Result};
use crate::linalg::{Rat, RatMat};

/// Exhaustive subset enumeration stays practical up to this ground set size.
pub const MAX_GROUND: usize = 24;

/// A minimal dependent column set together with the (unique up to scale)
/// kernel vector of the corresponding columns of L, normalized so that the
/// first nonzero entry is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub support: Vec<usize>,
    pub alpha: Vec<Rat>,
}

impl Circuit {
    pub fn mask(&self) -> u32 {
        vec_to_mask(&self.support)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatType {
    TypeI,
    TypeII,
    Neither,
}

/// A flat of M(L) with the ranks of `L_I` and `A_I^T` and the resulting
/// classification: type (i) when the ranks agree, type (ii) when
/// `rank(A_I^T) = rank(L_I) - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flat {
    pub support: Vec<usize>,
    pub rank_l: usize,
    pub rank_a: usize,
    pub flat_type: FlatType,
}

/// Integer weight vector with pairwise distinct entries; defines the linear
/// order used for broken circuits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightOrder {
    omega: Vec<i64>,
}

impl WeightOrder {
    pub fn new(omega: Vec<i64>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &w in &omega {
            if !seen.insert(w) {
                return Err(Error::MalformedInput(format!(
                    "weight vector entries must be pairwise distinct, {w} repeats"
                )));
            }
        }
        Ok(Self { omega })
    }

    /// Random permutation of `1..=len`.
    pub fn random_permutation(len: usize, rng: &mut impl Rng) -> Self {
        let mut omega: Vec<i64> = (1..=len as i64).collect();
        omega.shuffle(rng);
        Self { omega }
    }

    pub fn entries(&self) -> &[i64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn weight(&self, i: usize) -> i64 {
        self.omega[i]
    }

    /// Index of the omega-minimal element of a nonempty set.
    pub fn argmin(&self, support: &[usize]) -> usize {
        *support
            .iter()
            .min_by_key(|&&i| self.omega[i])
            .expect("argmin of empty support")
    }
}

/// Is some mask in the list a subset of `set`?
#[allow(clippy::manual_contains)] // the masked comparison is not an equality test
pub(crate) fn contains_subset(masks: &[u32], set: u32) -> bool {
    masks.iter().any(|&c| set & c == c)
}

pub fn vec_to_mask(v: &[usize]) -> u32 {
    v.iter().fold(0u32, |m, &i| m | (1 << i))
}

pub fn mask_to_vec(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

fn check_ground(arr: &ArrangementMatrix) -> Result<()> {
    let size = arr.ground_size();
    if size > MAX_GROUND {
        return Err(Error::GroundSetTooLarge {
            size,
            max: MAX_GROUND,
        });
    }
    Ok(())
}

/// Memoized exact rank of column subsets of L.
struct RankCache<'a> {
    arr: &'a ArrangementMatrix,
    map: HashMap<u32, usize>,
}

impl<'a> RankCache<'a> {
    fn new(arr: &'a ArrangementMatrix) -> Self {
        Self {
            arr,
            map: HashMap::new(),
        }
    }

    fn rank(&mut self, mask: u32) -> usize {
        if let Some(&r) = self.map.get(&mask) {
            return r;
        }
        let cols = mask_to_vec(mask);
        let r = self.arr.l().select_cols(&cols).rank();
        self.map.insert(mask, r);
        r
    }

    fn closure(&mut self, mask: u32) -> u32 {
        let r = self.rank(mask);
        let mut cl = mask;
        for i in 0..self.arr.ground_size() {
            let bit = 1u32 << i;
            if mask & bit == 0 && self.rank(mask | bit) == r {
                cl |= bit;
            }
        }
        cl
    }
}

/// All circuits of M(L), enumerated by ascending cardinality with pruning of
/// supersets of circuits already found.
pub fn circuits(arr: &ArrangementMatrix) -> Result<Vec<Circuit>> {
    check_ground(arr)?;
    let ground = arr.ground_size();
    let max_size = (arr.d() + 2).min(ground);
    let mut found_masks: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for size in 1..=max_size {
        enumerate_circuits(arr, ground, size, 0, &mut stack, &mut found_masks, &mut out);
    }
    Ok(out)
}

fn enumerate_circuits(
    arr: &ArrangementMatrix,
    ground: usize,
    size: usize,
    next: usize,
    stack: &mut Vec<usize>,
    found_masks: &mut Vec<u32>,
    out: &mut Vec<Circuit>,
) {
    if stack.len() == size {
        let mask = vec_to_mask(stack);
        if contains_subset(found_masks, mask) {
            return;
        }
        let sub = arr.l().select_cols(stack);
        if sub.rank() < size {
            // minimal by construction: every smaller circuit is already in
            // found_masks, so no proper subset of this set is dependent
            let kernel = sub.kernel_basis();
            debug_assert_eq!(kernel.len(), 1, "circuit kernel must be one-dimensional");
            let mut alpha = kernel.into_iter().next().expect("kernel vector");
            let lead = alpha
                .iter()
                .find(|c| !c.is_zero())
                .expect("nonzero kernel vector")
                .clone();
            for c in alpha.iter_mut() {
                *c = c.clone() / &lead;
            }
            found_masks.push(mask);
            out.push(Circuit {
                support: stack.clone(),
                alpha,
            });
        }
        return;
    }
    let remaining = size - stack.len();
    for e in next..=(ground - remaining) {
        stack.push(e);
        enumerate_circuits(arr, ground, size, e + 1, stack, found_masks, out);
        stack.pop();
    }
}

fn classify(rank_l: usize, rank_a: usize) -> FlatType {
    if rank_a == rank_l {
        FlatType::TypeI
    } else if rank_a + 1 == rank_l {
        FlatType::TypeII
    } else {
        FlatType::Neither
    }
}

fn make_flat(arr: &ArrangementMatrix, mask: u32, rank_l: usize) -> Flat {
    let support = mask_to_vec(mask);
    let rank_a = arr.a().select_rows(&support).rank();
    Flat {
        support,
        rank_l,
        rank_a,
        flat_type: classify(rank_l, rank_a),
    }
}

/// All flats of M(L), including the empty set (when closed) and the full
/// ground set, found by closing independent extensions level by level.
pub fn flats(arr: &ArrangementMatrix) -> Result<Vec<Flat>> {
    check_ground(arr)?;
    let ground = arr.ground_size();
    let mut cache = RankCache::new(arr);
    let bottom = cache.closure(0);
    let mut seen: HashSet<u32> = HashSet::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    seen.insert(bottom);
    queue.push_back(bottom);
    while let Some(mask) = queue.pop_front() {
        for i in 0..ground {
            let bit = 1u32 << i;
            if mask & bit != 0 {
                continue;
            }
            let cl = cache.closure(mask | bit);
            if seen.insert(cl) {
                queue.push_back(cl);
            }
        }
    }
    let mut masks: Vec<u32> = seen.into_iter().collect();
    masks.sort_by_key(|&m| (m.count_ones(), mask_to_vec(m)));
    Ok(masks
        .into_iter()
        .map(|m| {
            let rank_l = cache.rank(m);
            make_flat(arr, m, rank_l)
        })
        .collect())
}

/// Check whether an index set is a flat; if so return it with its ranks.
pub fn flat_of(arr: &ArrangementMatrix, support: &[usize]) -> Option<Flat> {
    let mut cache = RankCache::new(arr);
    let mask = vec_to_mask(support);
    if cache.closure(mask) != mask {
        return None;
    }
    let rank_l = cache.rank(mask);
    Some(make_flat(arr, mask, rank_l))
}

/// Broken circuits: each circuit minus its omega-minimal element, reduced to
/// the inclusion-minimal sets.
pub fn broken_circuits(circuits: &[Circuit], omega: &WeightOrder) -> Vec<Vec<usize>> {
    let mut masks: Vec<u32> = circuits
        .iter()
        .map(|c| {
            let drop = omega.argmin(&c.support);
            c.mask() & !(1u32 << drop)
        })
        .collect();
    masks.sort();
    masks.dedup();
    let minimal: Vec<u32> = masks
        .iter()
        .filter(|&&m| !masks.iter().any(|&other| other != m && m & other == other))
        .copied()
        .collect();
    let mut out: Vec<Vec<usize>> = minimal.into_iter().map(mask_to_vec).collect();
    out.sort_by_key(|v| (v.len(), v.clone()));
    out
}

/// Facets of the broken-circuit complex: the maximal subsets of the ground
/// set containing no broken circuit. All facets must have cardinality `d+1`.
pub fn nbc_bases(arr: &ArrangementMatrix, omega: &WeightOrder) -> Result<Vec<Vec<usize>>> {
    let circuits = circuits(arr)?;
    let broken = broken_circuits(&circuits, omega);
    let facets = bc_facets(arr.ground_size(), &broken);
    let expected = arr.d() + 1;
    for f in &facets {
        if f.len() != expected {
            return Err(Error::InternalInconsistency(format!(
                "nbc facet {:?} has cardinality {}, expected {}",
                f,
                f.len(),
                expected
            )));
        }
    }
    Ok(facets)
}

/// All broken-circuit-free subsets of `{0..ground-1}`, as masks.
pub(crate) fn bc_face_masks(ground: usize, broken: &[Vec<usize>]) -> Vec<u32> {
    let bc_masks: Vec<u32> = broken.iter().map(|b| vec_to_mask(b)).collect();
    let mut faces: Vec<u32> = Vec::new();
    let mut stack_faces: Vec<(u32, usize)> = vec![(0, 0)];
    while let Some((mask, next)) = stack_faces.pop() {
        faces.push(mask);
        for e in next..ground {
            let new = mask | (1 << e);
            if !contains_subset(&bc_masks, new) {
                stack_faces.push((new, e + 1));
            }
        }
    }
    faces
}

/// Maximal broken-circuit-free subsets of `{0..ground-1}`.
fn bc_facets(ground: usize, broken: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let bc_masks: Vec<u32> = broken.iter().map(|b| vec_to_mask(b)).collect();
    let mut facets: Vec<Vec<usize>> = bc_face_masks(ground, broken)
        .into_iter()
        .filter(|&f| {
            (0..ground).all(|e| {
                let bit = 1u32 << e;
                f & bit != 0 || contains_subset(&bc_masks, f | bit)
            })
        })
        .map(mask_to_vec)
        .collect();
    facets.sort();
    facets
}

/// Degree of the reciprocal linear space: the number of nbc bases, checked
/// to be independent of the weight order across three random choices.
pub fn reciprocal_degree(arr: &ArrangementMatrix) -> Result<usize> {
    let mut rng = deterministic_rng(arr.ground_size() as u64);
    let mut count: Option<usize> = None;
    for _ in 0..3 {
        let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
        let bases = nbc_bases(arr, &omega)?;
        match count {
            None => count = Some(bases.len()),
            Some(c) if c != bases.len() => {
                return Err(Error::InternalInconsistency(format!(
                    "nbc basis count depends on the weight order: {c} vs {}",
                    bases.len()
                )));
            }
            _ => {}
        }
    }
    Ok(count.expect("three omega draws"))
}

fn deterministic_rng(salt: u64) -> impl Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(0x5ca7_7e21 ^ salt)
}

/// Generic number of critical points: the absolute value of the
/// characteristic polynomial of the affine arrangement evaluated at 1,
/// computed via the Möbius function of the intersection semilattice.
pub fn ml_degree(arr: &ArrangementMatrix) -> Result<usize> {
    check_ground(arr)?;
    let rank_a = arr.a().rank();
    if rank_a != arr.d() {
        return Err(Error::NotEssential {
            rank_a,
            d: arr.d(),
        });
    }
    let ground = arr.ground_size();
    // augmented rows (A_i | b_i); the hyperplane l_i = 0 is A_i x = b_i
    let aug = RatMat::from_fn(ground, arr.d() + 1, |i, j| {
        if j < arr.d() {
            arr.a().get(i, j).clone()
        } else {
            arr.b()[i].clone()
        }
    });
    let a_only = arr.a();

    let consistent = |s: &[usize]| -> bool {
        a_only.select_rows(s).rank() == aug.select_rows(s).rank()
    };
    let aff_closure = |s: &[usize]| -> u32 {
        let span = aug.select_rows(s);
        let mut cl = 0u32;
        for j in 0..ground {
            if span.rowspan_contains(aug.row(j)) {
                cl |= 1 << j;
            }
        }
        cl
    };

    // breadth-first construction of the semilattice of closed sets
    let mut elems: HashMap<u32, usize> = HashMap::new(); // mask -> codim
    let bottom = aff_closure(&[]);
    elems.insert(bottom, 0);
    let mut queue: VecDeque<u32> = VecDeque::new();
    queue.push_back(bottom);
    while let Some(mask) = queue.pop_front() {
        for i in 0..ground {
            let bit = 1u32 << i;
            if mask & bit != 0 {
                continue;
            }
            let s = mask_to_vec(mask | bit);
            if !consistent(&s) {
                continue;
            }
            let cl = aff_closure(&s);
            if let std::collections::hash_map::Entry::Vacant(slot) = elems.entry(cl) {
                slot.insert(a_only.select_rows(&mask_to_vec(cl)).rank());
                queue.push_back(cl);
            }
        }
    }

    // Möbius function by increasing codimension; order is inclusion of
    // closed sets
    let mut order: Vec<(u32, usize)> = elems.into_iter().collect();
    order.sort_by_key(|&(mask, codim)| (codim, mask));
    let mut mu: HashMap<u32, i64> = HashMap::new();
    for (i, &(mask, _)) in order.iter().enumerate() {
        let mut value = if i == 0 { 1i64 } else { 0i64 };
        if i > 0 {
            for &(below, _) in &order[..i] {
                if below != mask && mask & below == below {
                    value -= mu[&below];
                }
            }
        }
        mu.insert(mask, value);
    }
    let chi_at_one: i64 = mu.values().sum();
    Ok(chi_at_one.unsigned_abs() as usize)
}

/// Crapo's beta invariant via the alternating sum
/// `(-1)^rank(E) * sum_{S subset E} (-1)^|S| rank(S)` with exact ranks.
pub fn beta_invariant(arr: &ArrangementMatrix) -> Result<i64> {
    check_ground(arr)?;
    let ground = arr.ground_size();
    let mut cache = RankCache::new(arr);
    let mut sum: i64 = 0;
    for mask in 0u32..(1u32 << ground) {
        let r = cache.rank(mask) as i64;
        if mask.count_ones() % 2 == 0 {
            sum += r;
        } else {
            sum -= r;
        }
    }
    let rank_e = cache.rank((1u32 << ground) - 1);
    Ok(if rank_e.is_multiple_of(2) { sum } else { -sum })
}

/// Connectivity of M(L): beta invariant nonzero, cross-checked against the
/// transitive closure of "two elements share a circuit".
pub fn is_connected(arr: &ArrangementMatrix) -> Result<bool> {
    let beta = beta_invariant(arr)?;
    let by_beta = beta != 0;

    let ground = arr.ground_size();
    let circs = circuits(arr)?;
    let mut parent: Vec<usize> = (0..ground).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in &circs {
        let root = find(&mut parent, c.support[0]);
        for &e in &c.support[1..] {
            let r = find(&mut parent, e);
            parent[r] = root;
        }
    }
    let mut roots: HashSet<usize> = HashSet::new();
    for i in 0..ground {
        let r = find(&mut parent, i);
        roots.insert(r);
    }
    let by_circuits = ground <= 1 || roots.len() == 1;

    if by_beta != by_circuits {
        return Err(Error::InternalInconsistency(format!(
            "beta invariant ({beta}) and circuit connectivity ({by_circuits}) disagree"
        )));
    }
    Ok(by_beta)
}

/// Number of intersection points carried by the stratum of a type (ii)
/// flat: the ML degree of the reduced sub-arrangement `(-b_I | \hat A_I)`,
/// where `\hat A_I^T` spans the same rows as `A_I^T`. Type (ii) flats whose
/// sub-arrangement complement has zero Euler characteristic carry no
/// solutions even though the rank condition holds.
pub fn stratum_ml_degree(arr: &ArrangementMatrix, support: &[usize]) -> Result<usize> {
    let flat = flat_of(arr, support).ok_or_else(|| {
        Error::InternalInconsistency(format!("{support:?} is not a flat"))
    })?;
    if flat.flat_type != FlatType::TypeII {
        return Err(Error::InternalInconsistency(format!(
            "{support:?} is a type (i) flat; its stratum misses the section"
        )));
    }
    // row-reduce A_I^T and keep its nonzero rows
    let mut a_t = arr.a().select_rows(support).transpose();
    let pivots = a_t.rref();
    let mut rows = vec![(0..support.len())
        .map(|j| -arr.b()[support[j]].clone())
        .collect::<Vec<Rat>>()];
    for r in 0..pivots.len() {
        rows.push(a_t.row(r).to_vec());
    }
    let sub = ArrangementMatrix::from_l(RatMat::from_rows(rows))?;
    ml_degree(&sub)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionVerdict {
    /// No proper type (ii) flat: intersection count equals the ML degree.
    Equal,
    /// Proper type (ii) flats exist: the linear section meets boundary strata.
    Strict,
}

/// The degree criterion: `equal` iff every proper flat is type (i);
/// otherwise `strict` together with the type (ii) witnesses.
pub fn degree_criterion(arr: &ArrangementMatrix) -> Result<(CriterionVerdict, Vec<Flat>)> {
    let all = flats(arr)?;
    let full_len = arr.ground_size();
    let witnesses: Vec<Flat> = all
        .into_iter()
        .filter(|f| f.support.len() != full_len && f.flat_type == FlatType::TypeII)
        .collect();
    if witnesses.is_empty() {
        Ok((CriterionVerdict::Equal, witnesses))
    } else {
        Ok((CriterionVerdict::Strict, witnesses))
    }
}
