//! Numerics for entanglement-assisted classical communication: entropic
//! entanglement witnesses built from minimum output entropy, Holevo
//! quantities of the Weyl-twirled (Shor) extension, channel discrimination
//! distances, capacity bounds for the two-register feedback memory channel,
//! and a Monte Carlo simulation of its feedback protocol.
//!
//! All entropies are in bits.

pub mod channels;
pub mod discrimination;
pub mod entropy;
pub mod error;
pub mod format;
pub mod memsim;
pub mod optim;
pub mod qcore;
pub mod random;
pub mod witness;

pub use error::{Error, Result};
