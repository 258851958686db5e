//! Simulation and estimation toolkit for the epsilon-entropy of randomly
//! perturbed one-dimensional maps.
//!
//! Orbits of a map under output or dynamical noise are coded by a uniform
//! partition of diameter `eps`; the complexity of the resulting symbolic
//! orbits is estimated with reversible compressors and plug-in block
//! entropies, compared with analytic upper and lower bounds, and the noise
//! amplitude is read off the knee of the entropy-versus-`eps` curve.

pub mod bounds;
pub mod cli;
pub mod compressor;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod partition;
pub mod rng;
pub mod selftest;
pub mod sweep;

pub use error::{Error, Result};
