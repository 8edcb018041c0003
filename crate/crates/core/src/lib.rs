//! Finite-sums set algebra and the combinatorics behind Hindman-type ideals.
//!
//! The crate is organized around finite ground sets `D` of positive integers
//! and the sum set `FS(D)` of all nonempty subset sums of distinct elements:
//!
//! * [`ground`] — exact FS computation, decompositions, (very) sparse
//!   predicates, the greedy very-sparse constructor and tail shifts;
//! * [`search`] — backtracking witness searches (FS witnesses, longest
//!   arithmetic progressions, translate searches used by the separation
//!   engine);
//! * [`ideals`] — finite-depth oracles for the summable, van der Waerden,
//!   Hindman and Folkman ideals;
//! * [`partition`] — the 2-adic cell partition `P_k` and FS profiles;
//! * [`refine`] — FS-refinement procedures through nested chains and
//!   avoidance families;
//! * [`katetov`] — finite coloring tables and probe-based reduction-witness
//!   testing between ideal oracles;
//! * [`separation`] — the constructive engine that, given a coloring with
//!   Hindman-small fibers, builds a set `X` with a certified small summable
//!   weight of `f[FS(X)]`.
//!
//! Everything is deterministic: ties are broken by the numerically smallest
//! admissible choice, so identical inputs produce identical outputs.

pub mod caps;
pub mod error;
pub mod ground;
pub mod ideals;
pub mod katetov;
pub mod partition;
pub mod refine;
pub mod search;
pub mod separation;

pub use caps::Caps;
pub use error::{Error, Result};
pub use ground::{DecompositionTable, GroundSet, SumSet};
pub use katetov::KatetovMap;
