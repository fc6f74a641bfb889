use thiserror::Error;

use crate::dynamics::SimulationResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("state dimension mismatch: system expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical blowup in neuron {neuron} at t = {t} ms")]
    Blowup {
        neuron: usize,
        t: f64,
        partial: Option<Box<SimulationResult>>,
    },

    #[error("under-resolved run: gate clamping in {clamped} of {steps} steps")]
    UnderResolved { clamped: u64, steps: u64 },

    #[error("empty system")]
    EmptySystem,

    #[error("fewer than 3 population cycles in the analysis window")]
    UndefinedFrequency,

    #[error("neuron is not periodic at drive {drive}")]
    NotPeriodic { drive: f64 },

    #[error("no firing anywhere in drive interval [{low}, {high}]")]
    NoFiring { low: f64, high: f64 },

    #[error("ensemble member {member} did not spike within {limit_ms} ms")]
    NoSpike { member: usize, limit_ms: f64 },

    #[error("template parse error: {0}")]
    Template(String),
}

pub type Result<T> = std::result::Result<T, Error>;
