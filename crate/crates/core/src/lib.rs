//! Pure-state tomography by quantum ptychography.
//!
//! A `d`-level pure state is sliced by overlapping rank-`r` diagonal
//! projectors, each slice is measured in the Fourier basis, and the
//! ptychographic iterative engine (PIE) recovers the state from the measured
//! amplitudes.
//!
//! - [`hilbert`]: states, density matrices, the Fourier transform, fidelity.
//! - [`projectors`]: projector families and their coverage/overlap checks.
//! - [`forward_model`]: detection probabilities, shot noise, dataset CSV.
//! - [`optics`]: slit-array near and far fields, detector positions.
//! - [`pie`]: the reconstruction engine.
//! - [`campaign`]: fidelity campaigns, purity sweeps, timing fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod error;
pub mod forward_model;
pub mod hilbert;
pub mod optics;
pub mod pie;
pub mod projectors;

pub use error::{Error, Result};
pub use forward_model::{
    assemble_dataset, exact_dataset, ideal_probabilities, ingest_csv, mixed_probabilities, sample_counts,
    white_noise_probabilities, Calibration, IngestOptions, ProbabilityGrid, Provenance, PtychographicDataset,
};
pub use hilbert::{
    fidelity, haar_random_state, mix_with_white_noise, purity, qft, qft_inverse, DensityMatrix, StateFile, StateVector,
};
pub use optics::{detector_positions, sample_at_detectors, Envelope, OpticalGeometry};
pub use pie::{pie_sweep, reconstruct, residual, PieConfig, ReconstructionResult};
pub use projectors::{build_family, validate_set, FamilyKind, ProjectorFamily, RankProjector};

/// Seed of the `index`-th independent task derived from a master seed.
pub fn split_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index)
}
