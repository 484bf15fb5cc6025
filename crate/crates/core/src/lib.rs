//! Relativistic two-particle superradiance.
//!
//! The pipeline runs kernel quadrature ([`kernel`]), propagator integration
//! ([`propagators`]), diagram assembly into density-operator diagonals and the
//! emission rate ([`density`]), and finally the velocity coherence metric
//! `G(Δv)` with its FWHM ([`coherence`]). [`spectrum`] holds the
//! single-particle emission propagators and Doppler-shifted line shape.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN.

pub mod cli;
pub mod coherence;
pub mod config;
pub mod density;
pub mod error;
pub mod kernel;
pub mod output;
pub mod params;
pub mod propagators;
pub mod quadrature;
pub mod spectrum;
pub mod validate;

pub use error::{Error, Result};
pub use params::{QGrid, SampleParams};
