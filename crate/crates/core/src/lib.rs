//! Simulation and analysis of rhythms in networks of conductance-based and
//! theta-model neurons.
//!
//! [`cells`] describes single neurons and synapses, [`network`] assembles
//! populations into a coupled system, [`dynamics`] integrates it, and
//! [`analysis`] measures what comes out.

pub mod analysis;
pub mod cells;
pub mod dynamics;
pub mod error;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
