//! Geometry of excursion sets and critical points of Gaussian random
//! spherical eigenfunctions.
//!
//! The crate synthesizes single-multipole random fields on an iso-latitude
//! grid, measures area, half boundary length, Euler characteristic and
//! critical points of their excursion sets, and compares the measurements
//! with closed-form predictions through a seeded Monte Carlo harness.
//!
//! ```
//! use std::sync::Arc;
//! use sphgeom::{grid, lkc, synth};
//!
//! let ell = synth::Multipole::new(50).unwrap();
//! let spec = Arc::new(grid::GridSpec::for_multipole(ell.ell, 6).unwrap());
//! let map = synth::simulate(ell, 7, &spec).unwrap();
//! let est = lkc::estimate(&map, 1.0.into());
//! println!("{est:?}");
//! ```

pub mod cli;
pub mod critical;
pub mod error;
pub mod grid;
pub mod harness;
pub mod lkc;
pub mod specfun;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
