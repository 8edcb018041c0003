//! The cell partition `P_k = {n·2^{k+1} + 2^k : n ∈ ω}` of the positive
//! integers: `x ∈ P_k` exactly when the 2-adic valuation of `x` is `k`.
//! The primary implementation is bit arithmetic (lowest set bit); the
//! defining arithmetic form is kept as a cross-check.

use serde::Serialize;

use crate::ground::{fs_set, GroundSet};
use crate::{Caps, Error, Result};

/// The unique `k` with `x ∈ P_k`: the exponent of the largest power of two
/// dividing `x`.
pub fn partition_index(x: u64) -> Result<u32> {
    if x == 0 {
        return Err(Error::InvalidInput("partition_index needs x >= 1".into()));
    }
    Ok(x.trailing_zeros())
}

/// Cross-check via the defining form: the `k` with `x mod 2^{k+1} = 2^k`.
pub fn partition_index_arithmetic(x: u64) -> Result<u32> {
    if x == 0 {
        return Err(Error::InvalidInput("partition_index needs x >= 1".into()));
    }
    for k in 0..64u32 {
        let cell = 1u64 << k;
        let modulus = cell << 1;
        if x % modulus == cell {
            return Ok(k);
        }
    }
    unreachable!("every positive integer has a lowest set bit")
}

/// Per-cell census of `FS(D)` against the `P_k` partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionProfile {
    /// `(k, |FS(D) ∩ P_k|, |FS(D) ∖ P_k|)` for every `k` up to the largest
    /// occupied cell.
    pub per_cell: Vec<(u32, u64, u64)>,
    pub total: u64,
    /// Smallest cell index attaining the maximal in-cell count.
    pub max_cell: u32,
    pub max_cell_count: u64,
    pub min_complement: u64,
}

impl PartitionProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,in_cell,complement\n");
        for (k, inc, comp) in &self.per_cell {
            out.push_str(&format!("{k},{inc},{comp}\n"));
        }
        out
    }
}

/// Classifies every FS value of `D` by its cell (caps as `fs_set`).
pub fn h1_profile(d: &GroundSet, caps: &Caps) -> Result<PartitionProfile> {
    let fs = fs_set(d, caps)?;
    if fs.is_empty() {
        return Err(Error::InvalidInput("h1_profile needs a nonempty D".into()));
    }
    let max_k = fs
        .values()
        .iter()
        .map(|&v| v.trailing_zeros())
        .max()
        .unwrap();
    let mut counts = vec![0u64; max_k as usize + 1];
    for &v in fs.values() {
        counts[v.trailing_zeros() as usize] += 1;
    }
    let total = fs.len() as u64;
    let per_cell: Vec<(u32, u64, u64)> = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| (k as u32, c, total - c))
        .collect();
    let (max_cell, max_cell_count) = per_cell
        .iter()
        .map(|&(k, c, _)| (k, c))
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .unwrap();
    let min_complement = per_cell.iter().map(|&(_, _, comp)| comp).min().unwrap();
    Ok(PartitionProfile {
        per_cell,
        total,
        max_cell,
        max_cell_count,
        min_complement,
    })
}
