//! Exact Fock-state simulation of two Mach-Zehnder interferometers coupled by
//! photon bunching, with the local-hidden-variable analysis of their
//! coincidence counts.

pub mod detection;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod lhv;
pub mod network;
pub mod source;

pub use error::{Error, Result};
