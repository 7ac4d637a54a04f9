//! Forward and inverse scattering laboratory for massless charged Dirac
//! fields on the exterior of Kerr-Newman-de-Sitter black holes.
//!
//! The crate is organised around the pipeline
//! geometry -> angular spectrum -> radial Jost/scattering data ->
//! large-coupling asymptotics -> parameter reconstruction.

pub mod error;
pub mod numerics;
pub mod special;

pub mod angular;
pub mod asymptotics;
pub mod geometry;
pub mod inverse;
pub mod radial;

pub use error::{Error, Result};
