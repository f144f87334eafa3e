use thiserror::Error;

use crate::neuron::Mode;

/// Errors raised by the simulation primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("operation requires {expected:?} mode but neuron is in {actual:?} mode")]
    WrongMode { expected: Mode, actual: Mode },

    #[error("timestep {dt:e}s is too coarse for the spike head (limit {limit:e}s)")]
    Resolution { dt: f64, limit: f64 },

    #[error("infeasible spike shape: {0}")]
    InfeasibleShape(String),

    #[error("equivalent load of an empty resistor list is undefined")]
    EmptyLoad,

    #[error("resistance must be positive, got {0:e} ohm")]
    NonPositiveResistance(f64),

    #[error("efficiency is undefined when both currents are zero")]
    UndefinedEfficiency,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
