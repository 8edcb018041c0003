//! Backtracking witness searches with sound pruning.
//!
//! All searches are exhaustive at the stated depth: a `None` result means
//! the full candidate space was scanned. Ties are resolved by trying the
//! numerically smallest candidate first, so the first hit is the
//! lexicographically least witness.

use serde::{Deserialize, Serialize};

use crate::ground::{fs_set, GroundSet};
use crate::katetov::KatetovMap;
use crate::{Caps, Error, Result};

/// A depth-`k` ground set certifying that its host is IP-positive at that
/// depth: `FS(ground) ⊆ host`, with all `2^k − 1` sums distinct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsWitness {
    pub ground: GroundSet,
}

impl FsWitness {
    /// Definition-level re-check, independent of the search path.
    pub fn verify(&self, host: &[u64]) -> bool {
        let naive = all_subset_sums(self.ground.elements());
        let distinct = naive.len() == (1 << self.ground.len()) - 1;
        distinct && naive.iter().all(|v| host.binary_search(v).is_ok())
    }
}

/// An arithmetic progression `start, start+step, …` of `length` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ApWitness {
    pub start: u64,
    pub step: u64,
    pub length: usize,
}

impl ApWitness {
    pub fn terms(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.length as u64).map(move |i| self.start + i * self.step)
    }

    pub fn verify(&self, host: &[u64]) -> bool {
        self.step >= 1 && self.length >= 1 && self.terms().all(|t| host.binary_search(&t).is_ok())
    }
}

fn all_subset_sums(elements: &[u64]) -> Vec<u64> {
    let mut sums = vec![0u64];
    for &e in elements {
        let with: Vec<u64> = sums.iter().map(|s| s + e).collect();
        sums.extend(with);
    }
    sums.remove(0);
    sums.sort_unstable();
    sums.dedup();
    sums
}

/// Membership structure over a sorted slice.
struct Host<'a> {
    values: &'a [u64],
    max: u64,
}

impl<'a> Host<'a> {
    fn new(values: &'a [u64]) -> Self {
        Host {
            values,
            max: values.last().copied().unwrap_or(0),
        }
    }

    fn contains(&self, x: u64) -> bool {
        x <= self.max && self.values.binary_search(&x).is_ok()
    }
}

/// Generic depth-first search for the least `k`-element ground set whose
/// FS values are pairwise distinct and all satisfy `admit`. Candidates are
/// ascending; `sums` holds the sorted FS of the chosen prefix and grows by
/// `{c} ∪ {s + c}` per chosen element `c`.
fn dfs_least<F>(
    candidates: &[u64],
    k: usize,
    admit: &F,
    chosen: &mut Vec<u64>,
    sums: &mut Vec<u64>,
    start: usize,
    budget_max: u64,
) -> Option<Vec<u64>>
where
    F: Fn(u64) -> bool,
{
    if chosen.len() == k {
        return Some(chosen.clone());
    }
    let need = k - chosen.len();
    for idx in start..candidates.len() {
        if candidates.len() - idx < need {
            break;
        }
        let c = candidates[idx];
        // Cheapest completion from here uses the next `need` candidates;
        // if even that total escapes the admissible maximum, nothing to
        // the right can work either.
        let current_total: u64 = chosen.iter().sum();
        let min_total: u64 = current_total + candidates[idx..idx + need].iter().sum::<u64>();
        if min_total > budget_max {
            break;
        }
        let mut new_sums = Vec::with_capacity(sums.len() + 1);
        new_sums.push(c);
        new_sums.extend(sums.iter().map(|&s| s + c));
        let ok = new_sums
            .iter()
            .all(|&s| admit(s) && sums.binary_search(&s).is_err());
        if ok {
            chosen.push(c);
            sums.extend(new_sums);
            sums.sort_unstable();
            if let Some(hit) = dfs_least(candidates, k, admit, chosen, sums, idx + 1, budget_max) {
                return Some(hit);
            }
            chosen.pop();
            // Rebuild the prefix FS rather than tracking removals.
            *sums = all_subset_sums(chosen);
        }
    }
    None
}

/// Least `D ⊆ A` with `|D| = k` and `FS(D) ⊆ A` (all sums distinct), or
/// `None` after exhausting the candidate space. Candidates are drawn from
/// `A` itself: every witness element lies in `FS(D) ⊆ A`.
pub fn fs_witness(
    host: &[u64],
    k: usize,
    universe_cap: u64,
    caps: &Caps,
) -> Result<Option<FsWitness>> {
    if k == 0 {
        return Err(Error::InvalidInput("witness depth must be >= 1".into()));
    }
    caps.check_depth(k)?;
    debug_assert!(host.windows(2).all(|w| w[0] < w[1]), "host must be sorted");
    if host.last().is_some_and(|&m| m > universe_cap) {
        return Err(Error::SearchTooLarge(format!(
            "host reaches {} beyond universe cap {universe_cap}",
            host.last().unwrap()
        )));
    }
    let h = Host::new(host);
    let candidates: Vec<u64> = host.iter().copied().filter(|&x| x >= 1).collect();
    let admit = |s: u64| h.contains(s);
    let hit = dfs_least(
        &candidates,
        k,
        &admit,
        &mut Vec::new(),
        &mut Vec::new(),
        0,
        h.max,
    );
    Ok(hit.map(|elements| FsWitness {
        ground: GroundSet::new(elements).expect("ascending by construction"),
    }))
}

/// Longest arithmetic progression inside `host`; ties broken by smallest
/// step, then smallest start. Singletons count as length 1 with step 1.
/// Classic quadratic dynamic program over pairs.
pub fn longest_ap(host: &[u64]) -> Result<ApWitness> {
    if host.is_empty() {
        return Err(Error::InvalidInput(
            "longest_ap needs a nonempty set".into(),
        ));
    }
    debug_assert!(host.windows(2).all(|w| w[0] < w[1]), "host must be sorted");
    let n = host.len();
    let mut best = ApWitness {
        start: host[0],
        step: 1,
        length: 1,
    };
    if n == 1 {
        return Ok(best);
    }
    // lengths[j] maps a step to the longest AP with that step ending at
    // host[j].
    let mut lengths: Vec<std::collections::HashMap<u64, usize>> = vec![Default::default(); n];
    for j in 1..n {
        for i in 0..j {
            let step = host[j] - host[i];
            let len = lengths[i].get(&step).copied().unwrap_or(1) + 1;
            let entry = lengths[j].entry(step).or_insert(1);
            if len > *entry {
                *entry = len;
            }
            let start = host[j] - (len as u64 - 1) * step;
            let better = len > best.length
                || (len == best.length && (step, start) < (best.step, best.start));
            if better {
                best = ApWitness {
                    start,
                    step,
                    length: len,
                };
            }
        }
    }
    Ok(best)
}

fn check_translate_domain(f: &KatetovMap, t: u64, ground: &GroundSet) -> Result<()> {
    let required = t
        .checked_add(ground.total())
        .ok_or(Error::ArithmeticOverflow)?;
    if required >= f.domain_size() {
        return Err(Error::DomainExceeded {
            required,
            domain: f.domain_size(),
        });
    }
    Ok(())
}

/// Least `C` with `|C| = k`, `FS(C) ⊆ FS(ground)`, and `f` constant on
/// `t + FS(C)`; returns the witness together with the constant value.
pub fn translate_constant_witness(
    f: &KatetovMap,
    t: u64,
    ground: &GroundSet,
    k: usize,
    caps: &Caps,
) -> Result<Option<(GroundSet, u64)>> {
    if k == 0 {
        return Err(Error::InvalidInput("witness depth must be >= 1".into()));
    }
    caps.check_depth(k)?;
    check_translate_domain(f, t, ground)?;
    let fs = fs_set(ground, caps)?;
    let candidates: Vec<u64> = fs.values().to_vec();
    let budget = fs.values().last().copied().unwrap_or(0);
    // The constant is pinned by the first chosen element; try first
    // elements in ascending order, then search the remainder under that
    // constant. The first completed hit is lexicographically least.
    for (idx, &first) in candidates.iter().enumerate() {
        if candidates.len() - idx < k {
            break;
        }
        let c = f.eval(t + first).expect("within domain by precondition");
        let admit = |s: u64| fs.contains(s) && f.eval(t + s) == Some(c);
        let mut chosen = vec![first];
        let mut sums = vec![first];
        if let Some(hit) = dfs_least(
            &candidates,
            k,
            &admit,
            &mut chosen,
            &mut sums,
            idx + 1,
            budget,
        ) {
            let ground = GroundSet::new(hit).expect("ascending by construction");
            return Ok(Some((ground, c)));
        }
    }
    Ok(None)
}

/// Least `C` with `|C| = k`, `FS(C) ⊆ FS(ground)`, and `f(t + s) > bound`
/// for every `s ∈ FS(C)`.
pub fn avoid_witness(
    f: &KatetovMap,
    t: u64,
    bound: u64,
    ground: &GroundSet,
    k: usize,
    caps: &Caps,
) -> Result<Option<GroundSet>> {
    if k == 0 {
        return Err(Error::InvalidInput("witness depth must be >= 1".into()));
    }
    caps.check_depth(k)?;
    check_translate_domain(f, t, ground)?;
    let fs = fs_set(ground, caps)?;
    let candidates: Vec<u64> = fs.values().to_vec();
    let admit = |s: u64| fs.contains(s) && f.eval(t + s).is_some_and(|v| v > bound);
    let hit = dfs_least(
        &candidates,
        k,
        &admit,
        &mut Vec::new(),
        &mut Vec::new(),
        0,
        fs.values().last().copied().unwrap_or(0),
    );
    Ok(hit.map(|elements| GroundSet::new(elements).expect("ascending by construction")))
}
