//! Contraction certificates, spectra and simulation for driven-dissipative
//! Lindblad dynamics.

pub mod error;
pub mod linalg;
pub mod operators;
pub mod frames;
pub mod superop;
pub mod algebra;
pub mod certificates;
pub mod ladder;
pub mod perturbation;
pub mod evolution;
pub mod scenarios;

pub use error::{Error, Result};
