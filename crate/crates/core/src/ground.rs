//! Exact finite-sums algebra over ground sets of positive integers.
//!
//! A [`GroundSet`] is a strictly increasing finite sequence of integers
//! `>= 1`. `FS(D)` is the set of all sums of nonempty subsets of distinct
//! elements. A set is *sparse* when every FS value has a unique witnessing
//! subset, and *very sparse* when additionally the sum of any two FS values
//! with overlapping witnesses escapes `FS(D)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Caps, Error, Result};

/// A strictly increasing sequence of integers, each `>= 1`, whose total sum
/// fits in a `u64`. Zero is excluded: `0 ∈ D` would collapse distinct
/// decompositions (`x` and `x + 0`) and break sparseness semantics.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct GroundSet {
    elements: Vec<u64>,
}

impl TryFrom<Vec<u64>> for GroundSet {
    type Error = Error;
    fn try_from(elements: Vec<u64>) -> Result<Self> {
        GroundSet::new(elements)
    }
}

impl From<GroundSet> for Vec<u64> {
    fn from(d: GroundSet) -> Vec<u64> {
        d.elements
    }
}

impl GroundSet {
    /// Builds a ground set from an already strictly increasing sequence.
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.first().is_some_and(|&e| e == 0) {
            return Err(Error::InvalidInput("ground elements must be >= 1".into()));
        }
        for w in elements.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput(format!(
                    "elements must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        let mut total: u64 = 0;
        for &e in &elements {
            total = total.checked_add(e).ok_or(Error::ArithmeticOverflow)?;
        }
        Ok(GroundSet { elements })
    }

    /// Sorts and validates arbitrary input values (duplicates rejected).
    pub fn from_values(mut values: Vec<u64>) -> Result<Self> {
        values.sort_unstable();
        GroundSet::new(values)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.elements.first().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    /// Sum of all elements; the largest value of `FS(D)`.
    pub fn total(&self) -> u64 {
        self.elements.iter().sum()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Drops the first `k` elements (element-count prefix).
    pub fn drop_first(&self, k: usize) -> GroundSet {
        GroundSet {
            elements: self.elements[k.min(self.len())..].to_vec(),
        }
    }

    /// Keeps elements `>= threshold`: the set-difference convention
    /// `A ∖ n = A ∖ {0, 1, …, n−1}`.
    pub fn drop_below(&self, threshold: u64) -> GroundSet {
        let at = self.elements.partition_point(|&e| e < threshold);
        self.drop_first(at)
    }

    /// Sum of the subset selected by `mask` (bit `i` picks element `i`).
    pub fn subset_sum(&self, mask: u32) -> u64 {
        let mut m = mask;
        let mut acc = 0u64;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            acc += self.elements[i];
            m &= m - 1;
        }
        acc
    }

    /// Elements selected by `mask`, ascending.
    pub fn subset(&self, mask: u32) -> Vec<u64> {
        (0..self.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.elements[i])
            .collect()
    }
}

/// `FS(D)` together with the ground set it was computed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SumSet {
    values: Vec<u64>,
    origin: GroundSet,
}

impl SumSet {
    /// Sorted, deduplicated values of `FS(D)`.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn origin(&self) -> &GroundSet {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.values.binary_search(&x).is_ok()
    }

    pub fn is_subset_of(&self, other: &SumSet) -> bool {
        self.values.iter().all(|&v| other.contains(v))
    }
}

/// All subset sums indexed by mask; `sums[m] = Σ D[i] for i ∈ m`.
/// Index 0 is the empty subset and is skipped by callers.
fn mask_sums(d: &GroundSet) -> Vec<u64> {
    let n = d.len();
    let mut sums = vec![0u64; 1usize << n];
    for m in 1..sums.len() {
        // Overflow-free: the constructor guarantees the total fits.
        sums[m] = sums[m & (m - 1)] + d.elements()[m.trailing_zeros() as usize];
    }
    sums
}

/// `FS(D)`: the deduplicated sorted set of all nonempty subset sums.
/// `FS(∅) = ∅` by convention.
pub fn fs_set(d: &GroundSet, caps: &Caps) -> Result<SumSet> {
    caps.check_fs_len(d.len())?;
    let sums = mask_sums(d);
    let mut values: Vec<u64> = sums[1..].to_vec();
    if values.len() > 1 << 16 {
        use rayon::slice::ParallelSliceMut;
        values.par_sort_unstable();
    } else {
        values.sort_unstable();
    }
    values.dedup();
    Ok(SumSet {
        values,
        origin: d.clone(),
    })
}

/// Maps every `x ∈ FS(D)` to all subsets of `D` summing to `x`,
/// stored as bit masks in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTable {
    origin: GroundSet,
    entries: BTreeMap<u64, Vec<u32>>,
}

impl DecompositionTable {
    pub fn origin(&self) -> &GroundSet {
        &self.origin
    }

    pub fn entries(&self) -> &BTreeMap<u64, Vec<u32>> {
        &self.entries
    }

    /// Witnessing subsets of `x` as element lists.
    pub fn subsets_of(&self, x: u64) -> Vec<Vec<u64>> {
        self.entries
            .get(&x)
            .map(|masks| masks.iter().map(|&m| self.origin.subset(m)).collect())
            .unwrap_or_default()
    }

    /// The unique witnessing mask, when there is exactly one.
    pub fn unique_mask(&self, x: u64) -> Option<u32> {
        match self.entries.get(&x).map(Vec::as_slice) {
            Some([m]) => Some(*m),
            _ => None,
        }
    }

    pub fn all_unique(&self) -> bool {
        self.entries.values().all(|v| v.len() == 1)
    }

    /// JSON object keyed by the decimal value with arrays of element arrays.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        for (&x, masks) in &self.entries {
            let lists: Vec<Vec<u64>> = masks.iter().map(|&m| self.origin.subset(m)).collect();
            obj.insert(x.to_string(), serde_json::json!(lists));
        }
        serde_json::Value::Object(obj)
    }
}

/// Full decomposition table of `D` (caps as [`fs_set`]).
pub fn decompositions(d: &GroundSet, caps: &Caps) -> Result<DecompositionTable> {
    caps.check_fs_len(d.len())?;
    let sums = mask_sums(d);
    let mut entries: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for (m, &s) in sums.iter().enumerate().skip(1) {
        entries.entry(s).or_default().push(m as u32);
    }
    Ok(DecompositionTable {
        origin: d.clone(),
        entries,
    })
}

/// `D` is sparse iff every FS value has a unique decomposition, i.e.
/// `|FS(D)| = 2^|D| − 1`.
pub fn is_sparse(d: &GroundSet, caps: &Caps) -> Result<bool> {
    let fs = fs_set(d, caps)?;
    Ok(fs.len() == (1usize << d.len()) - 1)
}

/// `D` is very sparse iff it is sparse and for all nonempty `F, F' ⊆ D`
/// with `F ∩ F' ≠ ∅`, `ΣF + ΣF' ∉ FS(D)`. The pair scan is quadratic in
/// `|FS(D)|`, hence the lower cap.
pub fn is_very_sparse(d: &GroundSet, caps: &Caps) -> Result<bool> {
    caps.check_very_sparse_len(d.len())?;
    if !is_sparse(d, caps)? {
        return Ok(false);
    }
    let sums = mask_sums(d);
    let fs = fs_set(d, caps)?;
    let n_masks = sums.len();
    let total = d.total() as u128;

    use rayon::prelude::*;
    let violation = (1..n_masks).into_par_iter().any(|a| {
        let sa = sums[a] as u128;
        (a..n_masks).any(|b| {
            if a & b == 0 {
                return false;
            }
            let s = sa + sums[b] as u128;
            s <= total && fs.contains(s as u64)
        })
    });
    Ok(!violation)
}

/// Greedily picks the lexicographically least length-`length` subsequence
/// of `source` satisfying `d_n > 2·Σ_{i<n} d_i`. The source is scanned in
/// order; for ascending sources this is the numerically smallest admissible
/// choice at every step.
pub fn greedy_very_sparse<I>(source: I, length: usize) -> Result<GroundSet>
where
    I: IntoIterator<Item = u64>,
{
    if length == 0 {
        return Err(Error::InvalidInput("requested length must be >= 1".into()));
    }
    let mut picked: Vec<u64> = Vec::with_capacity(length);
    let mut total: u64 = 0;
    for cand in source {
        if picked.len() == length {
            break;
        }
        let Some(double) = total.checked_mul(2) else {
            return Err(Error::ArithmeticOverflow);
        };
        if cand > double {
            total = total.checked_add(cand).ok_or(Error::ArithmeticOverflow)?;
            picked.push(cand);
        }
    }
    if picked.len() < length {
        return Err(Error::InsufficientSource {
            needed: length,
            got: picked.len(),
        });
    }
    GroundSet::new(picked)
}

/// Result of a tail-shift computation: the minimal threshold `e` with
/// `FS(E ∖ e) ⊆ FS(D ∖ d)`, the number of surviving elements of `E`, and
/// whether the containment is vacuous (no elements survive).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailShift {
    pub shift: u64,
    pub surviving: usize,
    pub vacuous: bool,
}

/// Minimal `e` such that `FS(E ∖ {0..e−1}) ⊆ FS(D ∖ {0..d−1})`, for `D`
/// very sparse and `FS(E) ⊆ FS(D)`. Always exists with `e ≤ max(E) + 1`
/// (empty FS is vacuously contained).
pub fn tail_shift(
    d: &GroundSet,
    e: &GroundSet,
    drop_below_d: u64,
    caps: &Caps,
) -> Result<TailShift> {
    if !is_very_sparse(d, caps)? {
        return Err(Error::InvalidInput(
            "tail_shift requires a very sparse D".into(),
        ));
    }
    let fs_e = fs_set(e, caps)?;
    let fs_d = fs_set(d, caps)?;
    if !fs_e.is_subset_of(&fs_d) {
        return Err(Error::InvalidInput(
            "tail_shift requires FS(E) ⊆ FS(D)".into(),
        ));
    }
    let host = fs_set(&d.drop_below(drop_below_d), caps)?;
    tail_shift_unchecked(&host, e, caps)
}

/// Tail-shift core without precondition re-verification; `host` must be
/// `FS(D ∖ d)`. Containment is monotone in the threshold, and it can only
/// change just past an element of `E`, so the minimum is attained at a
/// candidate in `{0} ∪ {x + 1 : x ∈ E}`.
pub(crate) fn tail_shift_unchecked(host: &SumSet, e: &GroundSet, caps: &Caps) -> Result<TailShift> {
    let mut candidates: Vec<u64> = vec![0];
    candidates.extend(e.elements().iter().map(|&x| x + 1));
    for cand in candidates {
        let tail = e.drop_below(cand);
        let fs_tail = fs_set(&tail, caps)?;
        if fs_tail.is_subset_of(host) {
            return Ok(TailShift {
                shift: cand,
                surviving: tail.len(),
                vacuous: tail.is_empty(),
            });
        }
    }
    unreachable!("empty tail is always contained");
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    fn gs(v: &[u64]) -> GroundSet {
        GroundSet::new(v.to_vec()).unwrap()
    }

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn fs_binary_ground() {
        let fs = fs_set(&gs(&[1, 2, 4]), &caps()).unwrap();
        assert_eq!(fs.values(), &[1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn fs_singleton() {
        let fs = fs_set(&gs(&[5]), &caps()).unwrap();
        assert_eq!(fs.values(), &[5]);
    }

    #[test]
    fn fs_with_collision() {
        // 2+3 collides with the element 5.
        let fs = fs_set(&gs(&[2, 3, 5]), &caps()).unwrap();
        assert_eq!(fs.values(), &[2, 3, 5, 7, 8, 10]);
    }

    #[test]
    fn fs_empty_is_empty() {
        let fs = fs_set(&gs(&[]), &caps()).unwrap();
        assert!(fs.is_empty());
    }

    #[test]
    fn fs_min_max_invariant() {
        let d = gs(&[3, 7, 21]);
        let fs = fs_set(&d, &caps()).unwrap();
        assert_eq!(fs.values().first().copied(), d.min());
        assert_eq!(fs.values().last().copied(), Some(d.total()));
    }

    #[test]
    fn fs_cap_enforced() {
        let d = gs(&(1..=30).map(|i| 1 << i).collect::<Vec<u64>>());
        let tight = Caps {
            fs_elements: 24,
            ..caps()
        };
        assert!(matches!(
            fs_set(&d, &tight),
            Err(Error::EnumerationTooLarge { size: 30, cap: 24 })
        ));
    }

    #[test]
    fn ground_rejects_zero_and_disorder() {
        assert!(GroundSet::new(vec![0, 1]).is_err());
        assert!(GroundSet::new(vec![2, 2]).is_err());
        assert!(GroundSet::new(vec![3, 1]).is_err());
        assert!(GroundSet::new(vec![u64::MAX, u64::MAX - 1]).is_err());
    }

    #[test]
    fn ground_rejects_overflowing_total() {
        assert!(matches!(
            GroundSet::new(vec![u64::MAX - 1, u64::MAX]),
            Err(Error::ArithmeticOverflow)
        ));
    }

    #[test]
    fn decompositions_collision_listed() {
        let table = decompositions(&gs(&[2, 3, 5]), &caps()).unwrap();
        assert_eq!(table.subsets_of(5), vec![vec![2, 3], vec![5]]);
        assert!(!table.all_unique());
    }

    #[test]
    fn decompositions_unique_binary() {
        let table = decompositions(&gs(&[1, 2, 4]), &caps()).unwrap();
        assert_eq!(table.subsets_of(7), vec![vec![1, 2, 4]]);
        let table = decompositions(&gs(&[1, 3, 9]), &caps()).unwrap();
        assert_eq!(table.subsets_of(13), vec![vec![1, 3, 9]]);
        assert!(table.all_unique());
    }

    #[test]
    fn sparse_examples() {
        assert!(is_sparse(&gs(&[1, 2, 4]), &caps()).unwrap());
        assert!(!is_sparse(&gs(&[2, 3, 5]), &caps()).unwrap());
        assert!(is_sparse(&gs(&[1, 3, 9, 27]), &caps()).unwrap());
    }

    #[test]
    fn very_sparse_examples() {
        // F = F' = {1} gives 2 ∈ FS({1,2,4}).
        assert!(!is_very_sparse(&gs(&[1, 2, 4]), &caps()).unwrap());
        assert!(is_very_sparse(&gs(&[1, 3, 9]), &caps()).unwrap());
        // FS({1}) = {1} and no doubled sum lands in it.
        assert!(is_very_sparse(&gs(&[1]), &caps()).unwrap());
    }

    #[test]
    fn greedy_from_naturals() {
        assert_eq!(
            greedy_very_sparse(1u64.., 4).unwrap().elements(),
            &[1, 3, 9, 27]
        );
    }

    #[test]
    fn greedy_from_five() {
        assert_eq!(
            greedy_very_sparse(5u64.., 3).unwrap().elements(),
            &[5, 11, 33]
        );
    }

    #[test]
    fn greedy_insufficient() {
        assert_eq!(
            greedy_very_sparse(vec![4, 8], 3),
            Err(Error::InsufficientSource { needed: 3, got: 1 })
        );
    }

    #[test]
    fn greedy_output_is_very_sparse() {
        let d = greedy_very_sparse(1u64.., 10).unwrap();
        assert!(is_very_sparse(&d, &caps()).unwrap());
        assert!(naive_very_sparse(d.elements()));
    }

    #[test]
    fn tail_shift_identity() {
        let d = gs(&[1, 3, 9, 27]);
        let r = tail_shift(&d, &d, 0, &caps()).unwrap();
        assert_eq!((r.shift, r.surviving), (0, 4));
    }

    #[test]
    fn tail_shift_same_set() {
        let d = gs(&[1, 3, 9, 27]);
        let r = tail_shift(&d, &d, 2, &caps()).unwrap();
        assert_eq!((r.shift, r.surviving), (2, 3));
    }

    #[test]
    fn tail_shift_composite_elements() {
        // 4 = 1+3 uses the element 1 < 2, so every tail containing 4 fails.
        let d = gs(&[1, 3, 9, 27]);
        let e = gs(&[4, 36]);
        let r = tail_shift(&d, &e, 2, &caps()).unwrap();
        assert_eq!((r.shift, r.surviving, r.vacuous), (5, 1, false));
    }

    #[test]
    fn tail_shift_rejects_bad_inputs() {
        let d = gs(&[1, 2, 4]); // not very sparse
        assert!(tail_shift(&d, &d, 0, &caps()).is_err());
        let d = gs(&[1, 3, 9]);
        let e = gs(&[2]);
        assert!(tail_shift(&d, &e, 0, &caps()).is_err());
    }

    #[test]
    fn tail_shift_is_minimal() {
        let d = greedy_very_sparse(1u64.., 6).unwrap();
        let c = caps();
        for e_masks in [0b111000u32, 0b110110, 0b101010, 0b011111] {
            let e = GroundSet::new(d.subset(e_masks)).unwrap();
            for drop in [0u64, 2, 4, 10, 28] {
                let host = fs_set(&d.drop_below(drop), &c).unwrap();
                let r = tail_shift(&d, &e, drop, &c).unwrap();
                let tail = fs_set(&e.drop_below(r.shift), &c).unwrap();
                assert!(tail.is_subset_of(&host));
                if r.shift > 0 {
                    let prev = fs_set(&e.drop_below(r.shift - 1), &c).unwrap();
                    assert!(!prev.is_subset_of(&host), "shift {} not minimal", r.shift);
                }
            }
        }
    }

    #[test]
    fn fs_monotone_under_prefix_drop() {
        let d = gs(&[2, 5, 9, 20, 47]);
        let full = fs_set(&d, &caps()).unwrap();
        for k in 0..=d.len() {
            let part = fs_set(&d.drop_first(k), &caps()).unwrap();
            assert!(part.is_subset_of(&full));
        }
    }

    #[test]
    fn fast_fs_matches_naive_small() {
        for d in [
            vec![1],
            vec![1, 2],
            vec![2, 3, 5],
            vec![1, 2, 4, 8, 16],
            vec![3, 4, 9, 11, 30],
            vec![7, 13, 19, 26, 29],
        ] {
            let ground = gs(&d);
            let fast = fs_set(&ground, &caps()).unwrap();
            let naive: Vec<u64> = naive_fs(&d).into_iter().collect();
            assert_eq!(fast.values(), naive.as_slice());
        }
    }

    #[test]
    fn sumset_cardinality_iff_sparse() {
        for d in [
            vec![1, 2, 3],
            vec![1, 2, 4],
            vec![2, 3, 5, 11],
            vec![1, 10, 100],
            vec![4, 6, 10],
        ] {
            let ground = gs(&d);
            let fs = fs_set(&ground, &caps()).unwrap();
            let sparse = is_sparse(&ground, &caps()).unwrap();
            assert_eq!(fs.len() == (1 << d.len()) - 1, sparse);
            assert_eq!(sparse, naive_sparse(&d));
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_ground(max_len: usize, max_val: u64) -> impl Strategy<Value = GroundSet> {
            proptest::collection::btree_set(1..=max_val, 1..=max_len)
                .prop_map(|s| GroundSet::new(s.into_iter().collect()).unwrap())
        }

        proptest! {
            #[test]
            fn fs_matches_naive(d in arb_ground(9, 200)) {
                let fast = fs_set(&d, &Caps::default()).unwrap();
                let naive: Vec<u64> = naive_fs(d.elements()).into_iter().collect();
                prop_assert_eq!(fast.values(), naive.as_slice());
            }

            #[test]
            fn very_sparse_implies_sparse(d in arb_ground(8, 120)) {
                let c = Caps::default();
                if is_very_sparse(&d, &c).unwrap() {
                    prop_assert!(is_sparse(&d, &c).unwrap());
                }
                prop_assert_eq!(
                    is_very_sparse(&d, &c).unwrap(),
                    naive_very_sparse(d.elements())
                );
            }

            #[test]
            fn greedy_rule_and_predicate(start in 1u64..60, step_hint in 1u64..5, len in 1usize..8) {
                let d = greedy_very_sparse((start..).step_by(step_hint as usize), len).unwrap();
                let mut total = 0u64;
                for &e in d.elements() {
                    prop_assert!(e > 2 * total);
                    total += e;
                }
                prop_assert!(is_very_sparse(&d, &Caps::default()).unwrap());
            }

            #[test]
            fn drop_below_matches_drop_first_on_elements(d in arb_ground(8, 100), k in 0usize..8) {
                let k = k.min(d.len());
                let by_count = d.drop_first(k);
                let threshold = if k == 0 { 0 } else { d.elements()[k - 1] + 1 };
                let by_value = d.drop_below(threshold);
                prop_assert_eq!(by_count, by_value);
            }
        }
    }
}
