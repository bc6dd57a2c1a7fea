//! Simulation and automated analysis of CPMG dynamical-decoupling spectroscopy
//! for a single electron-spin sensor coupled to a bath of nuclear spins.
//!
//! The crate covers the full chain from closed-form signal physics to an
//! end-to-end detection pipeline:
//!
//! * [`signal`] — coherence traces `P_x(tau)` for arbitrary spin sets,
//!   decoherence envelopes and their inversion, truncated-Gaussian noise,
//!   and trace file I/O.
//! * [`imaging`] — the period-sliced 2D image representation: a trace is cut
//!   at a candidate target period and the slices are stacked so an on-period
//!   spin appears as a vertical dip line; includes the target-period
//!   dictionary (A grid -> period).
//! * [`data`] — labeled dataset generation for the denoiser, the hyperfine
//!   parameter classifiers (HPC), broad-dip counting, and regression, plus
//!   the bundled DFT strong-coupling table and binary shard I/O.
//! * [`nn`] — a minimal self-contained neural-network engine (dense and 1D
//!   convolutional layers, batch norm, bounded adaptive-moment optimizer,
//!   training loop, gradient checking, model serialization with reuse keys).
//! * [`peaks`] — peak extraction from confidence curves with height,
//!   distance, prominence, and width-at-half-prominence filtering.
//! * [`pipeline`] — orchestration: denoise, decoherence recovery, per-period
//!   confidence sweep, peak picking, broad-dip counting, regression,
//!   sequential per-spin fine-tuning, metrics, and report emission.
//!
//! Numeric code is generic over the [`Scalar`] trait; [`Real`] (`f64`) is
//! used for physics and [`ModelScalar`] (`f32`) for network parameters and
//! dataset payloads.

pub mod data;
pub mod error;
pub mod imaging;
pub mod nn;
pub mod peaks;
pub mod pipeline;
pub mod scalar;
pub mod signal;

pub use error::CoreError;
pub use scalar::Scalar;

/// Scalar type used for physics and fitting.
pub type Real = f64;
/// Scalar type used for network parameters, activations, and dataset payloads.
pub type ModelScalar = f32;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
