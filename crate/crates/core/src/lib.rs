//! Simulation and verification of quantum forking-based sampling (QFS).
//!
//! A target state is forked into `d` trajectories by a controlled-swap
//! network driven by a control qudit; each trajectory runs its own channel
//! pipeline, the network is reversed, and a single measurement on the target
//! slots returns the weighted power sum `Σᵢ pᵢ ∏ⱼ ⟨M⟩` of the trajectories.
//!
//! Module map:
//!
//! * [`tensor`]: dense complex linear algebra on mixed-radix spaces.
//! * [`state`]: register layouts, pure and mixed states, measurement.
//! * [`gates`], [`channel`]: fixed gates and CPTP maps.
//! * [`fork`]: the forking engine (register construction, fork, pipelines,
//!   unfork, measurement, circuit record).
//! * [`protocols`]: ready-made instances (mixed unitary channels, twirling,
//!   entanglement witness, purity benchmarking, axis discrimination).
//! * [`oracle`]: per-trajectory brute-force references.
//! * [`sampler`]: finite-shot estimation and preparation-cost sweeps.
//! * [`config`]: JSON schema for fork specifications.

pub mod channel;
pub mod config;
pub mod error;
pub mod fork;
pub mod format;
pub mod gates;
pub mod oracle;
pub mod protocols;
pub mod random;
pub mod sampler;
pub mod state;
pub mod tensor;

pub use error::{QforkError, Result};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Structural validation (norms, Hermiticity, unitarity).
    pub const STRUCTURAL: f64 = 1e-10;
    /// Agreement between an implementation and its oracle.
    pub const ORACLE: f64 = 1e-9;
    /// Σ K†K = I check for channels.
    pub const CHANNEL: f64 = 1e-9;
    /// Window in which probabilities are clipped into [0, 1].
    pub const PROBABILITY_CLIP: f64 = 1e-9;
    /// Sum-to-one check for branch weights.
    pub const WEIGHTS: f64 = 1e-12;
}
