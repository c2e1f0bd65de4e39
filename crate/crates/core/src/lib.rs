//! Pseudospectral incompressible Navier-Stokes on a periodic box, advanced by
//! a truncated time-Taylor (Lie series) propagator, plus a small symbolic
//! engine for the same generator on 1-D scalar fields.

pub mod calculus;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod leray;
pub mod lie;
pub mod oracles;
pub mod snapshot;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, RealVectorField, SpectralScalarField, SpectralVectorField};
pub use leray::Viscosity;
