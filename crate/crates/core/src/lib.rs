//! Memristive spiking network simulator: threshold-drift synapses between
//! dual-mode integrate-and-fire neurons, local STDP from overlapping spike
//! waveforms, and a supply-current model for the neuron driver.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod device;
pub mod error;
pub mod netlist;
pub mod network;
pub mod neuron;
pub mod power;
pub mod presets;
pub mod rng;
pub mod waveform;

pub use device::{calibrate_kappa, stdp_feasible, DeviceParams, MemristorState};
pub use error::{Result, SimError};
pub use netlist::{parse, serialize, Netlist, ParseError};
pub use network::{
    pair_delta_g, stdp_window_sweep, Network, RecordSelection, RunOutput, Selection, Stimulus, TraceSet,
};
pub use neuron::{DriveState, Mode, NeuronParams, NeuronState};
pub use power::{ClaimCheck, PowerReport, SupplyModel};
pub use waveform::{validate_shape, ShapeCheck, SpikeShape};
