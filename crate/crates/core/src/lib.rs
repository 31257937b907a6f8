//! Spectral analysis of one-dimensional tight-binding lattices with
//! asymmetric (non-reciprocal) nearest-neighbour coupling.
//!
//! - [`lattice`]: model variants, Hamiltonian matrices, imaginary gauge transform
//! - [`spectral`]: closed-form spectra, dense eigensolver, defect-ring momenta
//! - [`phase`]: real/complex classification, critical couplings, J–φ sweeps
//! - [`localization`]: Dirac and biorthogonal inverse participation ratios

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lattice;
pub mod localization;
pub mod phase;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{build_hamiltonian, derived_params, gauge_transform_to_corner, HamiltonianMatrix, Model, ModelSpec, Variant};
pub use spectral::{Spectrum, SpectrumSource};
