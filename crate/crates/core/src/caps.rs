use serde::{Deserialize, Serialize};

/// Enumeration and search ceilings. Exceeding a cap is an error, never a
/// silent truncation: a negative search result must mean the whole space
/// at the stated depth was exhausted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Maximum ground-set size for FS enumeration (2^n sums).
    pub fs_elements: usize,
    /// Maximum ground-set size for the quadratic very-sparse pair check.
    pub very_sparse_elements: usize,
    /// Maximum witness depth for FS/translate searches.
    pub witness_depth: usize,
    /// Maximum number of candidate maps a Katetov witness search may visit.
    pub map_search_budget: u64,
    /// Maximum number of stages for the separation engine.
    pub separation_stages: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            fs_elements: 24,
            very_sparse_elements: 16,
            witness_depth: 8,
            map_search_budget: 1 << 20,
            separation_stages: 6,
        }
    }
}

impl Caps {
    pub fn check_fs_len(&self, len: usize) -> crate::Result<()> {
        if len > self.fs_elements {
            return Err(crate::Error::EnumerationTooLarge {
                size: len,
                cap: self.fs_elements,
            });
        }
        Ok(())
    }

    pub fn check_very_sparse_len(&self, len: usize) -> crate::Result<()> {
        self.check_fs_len(len)?;
        if len > self.very_sparse_elements {
            return Err(crate::Error::EnumerationTooLarge {
                size: len,
                cap: self.very_sparse_elements,
            });
        }
        Ok(())
    }

    pub fn check_depth(&self, depth: usize) -> crate::Result<()> {
        if depth > self.witness_depth {
            return Err(crate::Error::SearchTooLarge(format!(
                "witness depth {depth} exceeds cap {}",
                self.witness_depth
            )));
        }
        Ok(())
    }
}
