//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Errors produced by geometry, topology, and dynamics operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The requested point is within the gap floor of a band degeneracy;
    /// ground states and QGT denominators are not defined there.
    #[error("band gap {gap:.3e} below floor {floor:.3e}: state undefined at a monopole")]
    MonopoleProximity { gap: f64, floor: f64 },

    /// A 2D slice hit a band touching, so its invariant is undefined.
    #[error("slice gap closed: minimum gap {min_gap:.3e} over the grid")]
    GapClosed { min_gap: f64 },

    /// A real-orthogonal gauge was requested for a genuinely complex
    /// subspace, or a real-gauge operation was applied to the wrong family.
    #[error("gauge error: {0}")]
    Gauge(String),

    /// Invalid input: non-Hermitian matrix, unknown parameter index,
    /// unnormalized coefficients, out-of-range configuration.
    #[error("validation error: {0}")]
    Validation(String),

    /// Wilson eigenphase unwrapping hit a jump ≥ π; increase sampling.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Hopping extraction could not reassemble the Bloch Hamiltonian.
    #[error("hopping range error: reassembly residual {residual:.3e}")]
    HoppingRange { residual: f64 },

    /// Time integration lost more norm than the contract allows.
    #[error("norm drift {drift:.3e} exceeds budget {budget:.3e}; reduce dt")]
    NormDrift { drift: f64, budget: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
