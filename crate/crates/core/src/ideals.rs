//! Finite-depth oracles for the four concrete ideals: the summable ideal
//! (reciprocal weight), the van der Waerden ideal (AP-freeness), the
//! Hindman ideal (IP-freeness) and the Folkman ideal (uniform FS-witness
//! bound).
//!
//! A `small` verdict is exhaustion evidence at the configured depth, not
//! ideal membership; every judgement records the depth it used.

use num::BigRational;
use num::{BigInt, Zero};
use serde::Serialize;

use crate::search::{fs_witness, longest_ap, ApWitness, FsWitness};
use crate::{Caps, Result};

/// Parameters fixing finite-depth semantics for one ideal. Exactly the
/// parameters relevant to the ideal are present.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "ideal", rename_all = "snake_case")]
pub enum OracleConfig {
    /// `I_{1/n}`: positive when `Σ 1/(n+1) ≥ threshold`.
    Summable {
        #[serde(with = "crate::separation::rational_serde")]
        threshold: BigRational,
    },
    /// `W`: positive when the set contains an AP of the given length.
    VanDerWaerden { ap_length: usize },
    /// `H`: positive when a depth-`fs_depth` FS-witness exists.
    Hindman { fs_depth: usize },
    /// `F`: small at depth `fs_depth` when no FS-witness of that size
    /// exists inside the set.
    Folkman { fs_depth: usize },
}

impl OracleConfig {
    pub fn summable_default() -> Self {
        OracleConfig::Summable {
            threshold: BigRational::from_integer(BigInt::from(10)),
        }
    }

    pub fn vdw_default() -> Self {
        OracleConfig::VanDerWaerden { ap_length: 5 }
    }

    pub fn hindman_default() -> Self {
        OracleConfig::Hindman { fs_depth: 4 }
    }

    pub fn folkman_default() -> Self {
        OracleConfig::Folkman { fs_depth: 4 }
    }

    pub fn depth(&self) -> usize {
        match self {
            OracleConfig::Summable { .. } => 0,
            OracleConfig::VanDerWaerden { ap_length } => *ap_length,
            OracleConfig::Hindman { fs_depth } | OracleConfig::Folkman { fs_depth } => *fs_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Small,
    Positive,
}

/// What backs a verdict: a weight value, a checkable witness, or an
/// exhaustion record.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Weight {
        #[serde(with = "crate::separation::rational_serde")]
        value: BigRational,
    },
    Fs(FsWitness),
    Ap(ApWitness),
    /// No FS-witness of the recorded size exists in the set.
    FsExhausted {
        depth: usize,
    },
    /// The longest AP found, shorter than the configured length.
    ApLongest(ApWitness),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Judgement {
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub depth_used: usize,
}

impl Judgement {
    pub fn is_positive(&self) -> bool {
        self.verdict == Verdict::Positive
    }
}

/// `Σ_{n ∈ A} 1/(n+1)` as an exact rational; the empty set weighs 0.
pub fn summable_weight(a: &[u64]) -> BigRational {
    let mut acc = BigRational::zero();
    for &n in a {
        acc += BigRational::new(BigInt::from(1), BigInt::from(n) + 1);
    }
    acc
}

/// Judges a finite set against one ideal oracle.
///
/// * summable: positive iff the exact weight reaches the threshold;
/// * van der Waerden: positive iff the longest AP reaches the configured
///   length (evidence trimmed to exactly that length);
/// * Hindman: positive iff a depth-`k` FS-witness exists;
/// * Folkman: the same search, with `small` meaning no size-`k` ground set
///   has all its sums inside the set.
pub fn judge(a: &[u64], cfg: &OracleConfig, caps: &Caps) -> Result<Judgement> {
    debug_assert!(a.windows(2).all(|w| w[0] < w[1]), "input must be sorted");
    match cfg {
        OracleConfig::Summable { threshold } => {
            let value = summable_weight(a);
            let verdict = if value >= *threshold {
                Verdict::Positive
            } else {
                Verdict::Small
            };
            Ok(Judgement {
                verdict,
                evidence: Evidence::Weight { value },
                depth_used: 0,
            })
        }
        OracleConfig::VanDerWaerden { ap_length } => {
            if a.is_empty() {
                return Ok(Judgement {
                    verdict: Verdict::Small,
                    evidence: Evidence::ApLongest(ApWitness {
                        start: 0,
                        step: 1,
                        length: 0,
                    }),
                    depth_used: *ap_length,
                });
            }
            let longest = longest_ap(a)?;
            if longest.length >= *ap_length {
                Ok(Judgement {
                    verdict: Verdict::Positive,
                    evidence: Evidence::Ap(ApWitness {
                        start: longest.start,
                        step: longest.step,
                        length: *ap_length,
                    }),
                    depth_used: *ap_length,
                })
            } else {
                Ok(Judgement {
                    verdict: Verdict::Small,
                    evidence: Evidence::ApLongest(longest),
                    depth_used: *ap_length,
                })
            }
        }
        OracleConfig::Hindman { fs_depth } | OracleConfig::Folkman { fs_depth } => {
            let cap = a.last().copied().unwrap_or(0);
            let witness = fs_witness(a, *fs_depth, cap, caps)?;
            Ok(match witness {
                Some(w) => Judgement {
                    verdict: Verdict::Positive,
                    evidence: Evidence::Fs(w),
                    depth_used: *fs_depth,
                },
                None => Judgement {
                    verdict: Verdict::Small,
                    evidence: Evidence::FsExhausted { depth: *fs_depth },
                    depth_used: *fs_depth,
                },
            })
        }
    }
}
