//! Report envelope shared by every subcommand: versioned, seeded, and
//! carrying a hash of the canonical input so identical runs produce
//! byte-identical output.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub input_hash: String,
    pub result: T,
}

pub fn input_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

pub fn envelope<T: Serialize>(
    subcommand: &str,
    seed: Option<u64>,
    canonical_input: &str,
    result: T,
) -> Report<T> {
    Report {
        tool: "finsum",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: subcommand.to_string(),
        seed,
        input_hash: input_hash(canonical_input),
        result,
    }
}
