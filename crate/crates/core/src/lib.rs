//! Link-level simulation of MCMC receivers for large-scale uplink multiuser
//! MIMO: randomized Gibbs detection with restarts, Gibbs-sampling channel
//! estimation, and frequency-domain equalization of cyclic-prefixed single
//! carrier transmissions.

pub mod chanest;
pub mod cpsc;
pub mod detect;
pub mod error;
pub mod harness;
pub mod rng;
pub mod system;

pub use error::{Error, Result};
pub use system::{ModAlphabet, NoiseStats, RealSystem};
