//! Numerical laboratory for non-Abelian quantum geometry in globally
//! degenerate four-band Dirac models.
//!
//! The crate is organized around a family of Hamiltonians of the form
//! H(k) = d₁(k)Γ₁ + d₂(k)Γ₂ + d₃(k)Γ₃, built from anticommuting 4×4
//! Clifford matrices. Every such Hamiltonian squares to a multiple of the
//! identity, so both the valence and conduction pairs are degenerate across
//! the whole parameter space. On top of that structure the crate computes
//!
//! - the non-Abelian quantum geometric tensor Q_μν over the ground doublet,
//!   split into the quantum metric g_μν and Berry curvature F_μν ([`qgt`]),
//! - Chern numbers, Euler classes, monopole charges, Wilson loops, and
//!   mass-parameter phase sweeps ([`topology`]),
//! - open-boundary slab spectra with edge-localization weights ([`slab`]),
//! - time-dependent Schrödinger simulation of quadratic parameter ramps and
//!   the reconstruction of every g/F component from generalized-force and
//!   energy-fluctuation responses ([`dynamics`]).
//!
//! Units: ħ = Ω₀ = 1, energies in ħΩ₀, time in 2π/Ω₀, momenta dimensionless
//! in (−π, π], angles in radians. All computations are deterministic; grid
//! maps parallelize over points with a fixed reduction order, so results do
//! not depend on the number of worker threads.

pub mod clifford;
pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod models;
pub mod qgt;
pub mod slab;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use matrix::{Matrix2, Matrix4, Vector4, C64};
pub use models::{BlochVector, Family, ModelSpec, SphereCoords};
pub use qgt::{GeometryScalars, QgtBlock};
pub use spectral::{DegenerateSubspace, GaugeMode};
pub use topology::{InvariantMethod, InvariantResult, WilsonResult};

/// Crate version string, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
