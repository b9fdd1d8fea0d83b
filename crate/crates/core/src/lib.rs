//! Scattering of counter-propagating photons on arrays of chiral giant-transmon
//! molecules coupled to a waveguide.
//!
//! Units: rates and frequencies are in multiples of the waveguide decay rate
//! `Γ`, times in `1/Γ`, and the group velocity is 1. [`UnitScale`] converts to
//! and from physical units.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod error;
pub mod imperfections;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod single_photon;
pub mod two_photon;

mod linalg;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::*;
