//! Spectral bounds and threshold-resonance certification for star
//! waveguide junctions.
//!
//! The crate computes and bounds Dirichlet Laplacian eigenvalues of junction
//! centers and truncated waveguides, and decides whether the number of
//! discrete eigenvalues below the threshold is pinned down exactly (which
//! rules out a threshold resonance).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod bounds;
pub mod certify;
pub mod error;
pub mod exact;
pub mod fem;
pub mod geom;
pub mod report;

pub use error::{Error, Result};
