//! Backstepping feedback for the heat equation on the circle with two scalar controls.
//!
//! Functions live in coefficient space against the orthonormal Laplacian eigenbasis
//! (see [`spectral`]). [`gains`] synthesizes the feedback and the transform,
//! [`diagnostics`] checks the structural identities at finite truncation, [`sim`]
//! integrates the closed loops, [`moments`] builds open-loop null controls, and
//! [`scenario`] ties everything to config files and reports.

pub mod diagnostics;
pub mod error;
pub mod gains;
pub mod linalg;
pub mod moments;
pub mod scenario;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
