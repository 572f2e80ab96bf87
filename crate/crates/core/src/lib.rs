//! Spectral analysis of particle-on-a-line clock Hamiltonians.

pub mod adiabatic;
pub mod count;
pub mod error;
pub mod feynman;
pub mod fit;
pub mod idling;
pub mod kitaev;
pub mod linalg;
pub mod multicog;
pub mod spin;
pub mod tuning;
pub mod walk;

pub use error::{Error, Result};
