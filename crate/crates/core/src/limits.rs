use serde::{Deserialize, Serialize};

/// Resource caps shared by the exhaustive procedures. Exceeding a cap is an
/// error, never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Tuple sequences examined by a preservation check.
    pub preservation_checks: u64,
    /// Terms produced by universal-operation enumeration.
    pub terms: u64,
    /// Tuples held by an explicit relation (closures, materialized states).
    pub tuples: u64,
    /// Operation applications performed while computing a closure.
    pub applications: u64,
    /// Assignments scanned by the brute-force solver.
    pub assignments: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            preservation_checks: 10_000_000,
            terms: 100_000,
            tuples: 1_000_000,
            applications: 100_000_000,
            assignments: 1 << 24,
        }
    }
}
