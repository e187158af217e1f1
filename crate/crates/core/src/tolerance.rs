use serde::{Deserialize, Serialize};

/// Numerical tolerances used throughout the crate.
///
/// Every comparison threshold lives here so a run configuration can override
/// them in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// State normalization.
    pub norm: f64,
    /// Hermiticity, entrywise max norm of `M - M†`.
    pub herm: f64,
    /// Smallest admissible eigenvalue of a density matrix (as `-psd`).
    pub psd: f64,
    /// Unitarity, entrywise max norm of `U†U - I`.
    pub unit: f64,
    /// General numerical comparison.
    pub num: f64,
    /// Probability mass allowed on the top 10% of Fock levels.
    pub tail: f64,
    /// Allowed change of a reported scalar when the truncation is doubled.
    pub conv: f64,
    /// Below this, `2 + 2 Re z^N` counts as a vanishing superposition.
    pub degen: f64,
    /// Largest total Hilbert-space dimension that will be materialized.
    pub max_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: 1e-10,
            herm: 1e-10,
            psd: 1e-9,
            unit: 1e-9,
            num: 1e-9,
            tail: 1e-10,
            conv: 1e-8,
            degen: 1e-12,
            max_dim: 16384,
        }
    }
}
