//! Finite coloring tables and probe-based testing of reduction witnesses
//! between ideal oracles.
//!
//! A [`KatetovMap`] is a total function `[0, N) → [0, M)`. A map passes a
//! probe family for a source/target oracle pair when every probe judged
//! small by the source pulls back to a set judged small by the target.
//! A pass is always relative to the probe family; the universal quantifier
//! over an ideal is not finitely checkable.

use serde::Serialize;

use crate::ideals::{judge, Judgement, OracleConfig};
use crate::{Caps, Error, Result};

/// A total function table `[0, N) → [0, M)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KatetovMap {
    table: Vec<u64>,
    codomain: u64,
}

impl KatetovMap {
    pub fn new(table: Vec<u64>, codomain: u64) -> Result<Self> {
        if codomain == 0 {
            return Err(Error::InvalidInput("codomain must be >= 1".into()));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= codomain) {
            return Err(Error::InvalidInput(format!(
                "table value {bad} outside codomain [0, {codomain})"
            )));
        }
        Ok(KatetovMap { table, codomain })
    }

    /// `f(x) = x` on `[0, n)`.
    pub fn identity(n: u64) -> Self {
        KatetovMap {
            table: (0..n).collect(),
            codomain: n.max(1),
        }
    }

    /// Constant map onto `value`.
    pub fn constant(n: u64, value: u64, codomain: u64) -> Result<Self> {
        KatetovMap::new(vec![value; n as usize], codomain)
    }

    /// `f(x) = ⌊log2 x⌋` for `x >= 1`, with `f(0) = 0`; the fibers are the
    /// dyadic blocks `[2^b, 2^{b+1})`.
    pub fn log2(n: u64) -> Self {
        let table: Vec<u64> = (0..n)
            .map(|x| {
                if x == 0 {
                    0
                } else {
                    63 - u64::from(x.leading_zeros())
                }
            })
            .collect();
        let codomain = table.iter().copied().max().unwrap_or(0) + 1;
        KatetovMap { table, codomain }
    }

    /// `f(x) = x mod m`.
    pub fn modulo(n: u64, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("modulus must be >= 1".into()));
        }
        Ok(KatetovMap {
            table: (0..n).map(|x| x % m).collect(),
            codomain: m,
        })
    }

    /// `f(x) = ⌊x / width⌋`: consecutive blocks of the given width.
    pub fn block(n: u64, width: u64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidInput("block width must be >= 1".into()));
        }
        let codomain = if n == 0 { 1 } else { (n - 1) / width + 1 };
        Ok(KatetovMap {
            table: (0..n).map(|x| x / width).collect(),
            codomain,
        })
    }

    pub fn domain_size(&self) -> u64 {
        self.table.len() as u64
    }

    pub fn codomain_size(&self) -> u64 {
        self.codomain
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn eval(&self, x: u64) -> Option<u64> {
        self.table.get(x as usize).copied()
    }

    /// `f^{-1}[{v}]`, ascending.
    pub fn fiber(&self, v: u64) -> Vec<u64> {
        (0..self.domain_size())
            .filter(|&x| self.table[x as usize] == v)
            .collect()
    }

    /// `f^{-1}[A]` for a set of codomain values, ascending.
    pub fn preimage(&self, values: &[u64]) -> Vec<u64> {
        let mut member = vec![false; self.codomain as usize];
        for &v in values {
            if let Some(slot) = member.get_mut(v as usize) {
                *slot = true;
            }
        }
        (0..self.domain_size())
            .filter(|&x| member[self.table[x as usize] as usize])
            .collect()
    }
}

/// Search spaces for [`search_witness`]. The full space `M^N` explodes
/// quickly; blockwise and monotone families keep structured searches
/// tractable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapFamily {
    Exhaustive,
    Monotone,
    Blockwise { width: u64 },
}

/// A probe that witnesses failure: source-small, but its preimage is
/// target-positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub probe_index: usize,
    pub probe: Vec<u64>,
    pub preimage: Vec<u64>,
    pub source_judgement: Judgement,
    pub target_judgement: Judgement,
}

/// Outcome of [`verify_witness`] over one probe family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub passed: bool,
    pub probes_checked: usize,
    /// Probes the source oracle judged positive; the reduction condition
    /// says nothing about them.
    pub skipped_source_positive: usize,
    pub counterexample: Option<Counterexample>,
}

/// Checks `f` as a reduction witness from the source oracle to the target
/// oracle: for every probe `A` judged source-small, `f^{-1}[A]` must be
/// target-small. Reports the first counterexample in probe order.
pub fn verify_witness(
    f: &KatetovMap,
    source: &OracleConfig,
    target: &OracleConfig,
    probes: &[Vec<u64>],
    caps: &Caps,
) -> Result<WitnessReport> {
    let mut skipped = 0usize;
    for (i, probe) in probes.iter().enumerate() {
        if let Some(&bad) = probe.iter().find(|&&v| v >= f.codomain_size()) {
            return Err(Error::InvalidProbe {
                value: bad,
                codomain: f.codomain_size(),
            });
        }
        let mut sorted = probe.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let source_judgement = judge(&sorted, source, caps)?;
        if source_judgement.is_positive() {
            skipped += 1;
            continue;
        }
        let preimage = f.preimage(&sorted);
        let target_judgement = judge(&preimage, target, caps)?;
        if target_judgement.is_positive() {
            return Ok(WitnessReport {
                passed: false,
                probes_checked: i + 1,
                skipped_source_positive: skipped,
                counterexample: Some(Counterexample {
                    probe_index: i,
                    probe: sorted,
                    preimage,
                    source_judgement,
                    target_judgement,
                }),
            });
        }
    }
    Ok(WitnessReport {
        passed: true,
        probes_checked: probes.len(),
        skipped_source_positive: skipped,
        counterexample: None,
    })
}

/// Number of maps in a family, saturating at `u64::MAX`.
fn family_size(n: u64, m: u64, family: MapFamily) -> u64 {
    let pow = |base: u64, exp: u64| -> u64 {
        let mut acc: u128 = 1;
        for _ in 0..exp {
            acc = acc.saturating_mul(base as u128);
            if acc > u64::MAX as u128 {
                return u64::MAX;
            }
        }
        acc as u64
    };
    match family {
        MapFamily::Exhaustive => pow(m, n),
        MapFamily::Blockwise { width } => pow(m, n.div_ceil(width.max(1))),
        MapFamily::Monotone => {
            // C(n + m - 1, m - 1), saturating.
            let mut acc: u128 = 1;
            for i in 0..(m - 1).min(n + m - 1) {
                acc = acc.saturating_mul((n + m - 1 - i) as u128) / (i + 1) as u128;
                if acc > u64::MAX as u128 {
                    return u64::MAX;
                }
            }
            acc as u64
        }
    }
}

/// Decodes candidate index `idx` into a map table for the family.
/// Exhaustive and blockwise tables are base-`m` digit strings with the
/// leftmost entry most significant, so ascending indices enumerate tables
/// in ascending lexicographic order.
fn unrank(n: u64, m: u64, family: MapFamily, idx: u64) -> Vec<u64> {
    match family {
        MapFamily::Exhaustive => {
            let mut digits = vec![0u64; n as usize];
            let mut rest = idx;
            for slot in digits.iter_mut().rev() {
                *slot = rest % m;
                rest /= m;
            }
            digits
        }
        MapFamily::Blockwise { width } => {
            let blocks = n.div_ceil(width.max(1));
            let g = unrank(blocks, m, MapFamily::Exhaustive, idx);
            (0..n).map(|x| g[(x / width) as usize]).collect()
        }
        MapFamily::Monotone => unreachable!("monotone maps are enumerated directly"),
    }
}

/// First map (canonical ascending order) in the family that passes
/// [`verify_witness`] against the probes, or `None` once the family is
/// exhausted. The family size must fit the configured budget.
pub fn search_witness(
    n: u64,
    m: u64,
    source: &OracleConfig,
    target: &OracleConfig,
    probes: &[Vec<u64>],
    family: MapFamily,
    caps: &Caps,
) -> Result<Option<KatetovMap>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(
            "domain and codomain must be >= 1".into(),
        ));
    }
    let size = family_size(n, m, family);
    if size > caps.map_search_budget {
        return Err(Error::SearchTooLarge(format!(
            "family holds {size} maps, budget {}",
            caps.map_search_budget
        )));
    }

    let passes = |table: Vec<u64>| -> Result<Option<KatetovMap>> {
        let map = KatetovMap::new(table, m)?;
        let report = verify_witness(&map, source, target, probes, caps)?;
        Ok(report.passed.then_some(map))
    };

    match family {
        MapFamily::Exhaustive | MapFamily::Blockwise { .. } => {
            use rayon::prelude::*;
            // Deterministic first hit: find_first returns the lowest index.
            let hit = (0..size)
                .into_par_iter()
                .map(|idx| passes(unrank(n, m, family, idx)))
                .find_first(|r| !matches!(r, Ok(None)));
            match hit {
                None => Ok(None),
                Some(r) => r,
            }
        }
        MapFamily::Monotone => {
            // Nondecreasing tables in ascending lexicographic order.
            let mut table = vec![0u64; n as usize];
            loop {
                if let Some(map) = passes(table.clone())? {
                    return Ok(Some(map));
                }
                // Advance: bump the rightmost entry below m-1, reset the
                // tail to the bumped value to stay nondecreasing.
                let mut i = n as usize;
                loop {
                    if i == 0 {
                        return Ok(None);
                    }
                    i -= 1;
                    if table[i] + 1 < m {
                        let v = table[i] + 1;
                        for slot in table.iter_mut().skip(i) {
                            *slot = v;
                        }
                        break;
                    }
                }
            }
        }
    }
}
