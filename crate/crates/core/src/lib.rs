//! Weyl-Heisenberg SICs across dimension towers d -> d(d-2).
//!
//! The crate builds displacement and Clifford operators, finds and verifies
//! SIC fiducials, decides whether SICs in dimensions d and d(d-2) are
//! aligned, and checks the structures an aligned pair carries: reduced
//! density spectra, embedded equiangular tight frames, mutually unbiased
//! bases and the extra symmetry of the upper fiducial.

pub mod alignment;
pub mod entangle;
pub mod error;
pub mod frames;
pub mod heisenberg;
pub mod io;
pub mod linalg;
pub mod mub;
pub mod numtheory;
pub mod pipeline;
pub mod sic;
pub mod symmetry;

pub use error::{Error, Result};
