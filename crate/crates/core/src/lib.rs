//! Bounds on the private capacity of noiseless bosonic wiretap channels.
//!
//! * [`entropy`]: thermal entropy `g`, the single-mode lower and upper bounds
//!   `L` and `U`, and their low-photon and infinite-photon limits.
//! * [`modes`]: unitary transition matrices, their reduction to parallel
//!   single-mode channels, and the degraded beam-splitter cascade.
//! * [`allocation`]: optimal photon allocation across modes (`L^M`, `U^M`).
//! * [`turbulence`]: random channels, second-moment bounds and Monte Carlo.
//! * [`figure`]: CSV data for photon-efficiency curves.
//!
//! Everything is computed in nats; bits appear only at output boundaries.

pub mod allocation;
pub mod cli;
pub mod eigen;
pub mod entropy;
pub mod error;
pub mod figure;
pub mod haar;
pub mod matrix;
pub mod modes;
pub mod stats;
pub mod turbulence;

pub use allocation::{
    allocate, allocate_bruteforce, asymptotic_multimode, marginal_rate, multi_mode_bound, Allocation, BoundKind,
};
pub use eigen::{hermitian_eigen, HermitianEigen};
pub use entropy::{
    asymptotic_coefficients, capacity_infinite, g_entropy, lower_bound_single, photon_efficiency,
    upper_bound_single, AsymptoticCoefficients, BoundValue, PhotonBudget, Transmissivity, Unit,
};
pub use error::{Error, Result};
pub use haar::haar_unitary;
pub use matrix::ComplexMatrix;
pub use modes::{
    cascade_moments, degraded_splitter, mode_decompose, validate_unitary, CascadeInput, CascadeMoments,
    Decomposition, ModeSpectrum, UnitaryTransition,
};
pub use stats::MonteCarloEstimate;
pub use turbulence::{
    majorizes, monte_carlo_lower, sample_channel, second_moment, turbulence_lower_bound, Basis, ChannelSampler,
    EnsembleKind, EnsembleSpec, SecondMomentMatrix, TurbulenceReport,
};
