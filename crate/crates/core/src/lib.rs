//! Spectral-gap tools for Gibbs measures `exp(−a N^p)` on Carnot groups.

pub mod catalog;
pub mod diffops;
pub mod error;
pub mod field;
pub mod group;
pub mod hyperdual;
pub mod io;
pub mod lp;
pub mod measure;
pub mod poly;
pub mod quasinorm;
pub mod rng;
pub mod spectral;
pub mod verifier;

pub use error::{CarnotError, Result};
