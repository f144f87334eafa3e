//! Dual-mode leaky integrate-and-fire neuron.
//!
//! In integration mode the summing node is held at rest and input current
//! pushes the membrane excursion negative; crossing `-v_thr` switches the
//! neuron to firing mode, where both terminals are driven with the spike
//! waveform and the membrane is held at rest until the spike completes.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::waveform::SpikeShape;

pub const DEFAULT_C_MEM: f64 = 1e-12;
pub const DEFAULT_R_LEAKY: f64 = 10e6;
pub const DEFAULT_V_THR: f64 = 0.3;

/// Firing-phase time is kept on this grid so repeated `dt` additions land
/// exactly on waveform segment boundaries.
/// Grid steps per second; dividing by an exact integer keeps `n / 1e15`
/// correctly rounded, so `1e9` steps is exactly the double `1e-6`.
const STEPS_PER_SECOND: f64 = 1e15;

#[inline]
pub(crate) fn quantize_time(t: f64) -> f64 {
    (t * STEPS_PER_SECOND).round() / STEPS_PER_SECOND
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Integration,
    Firing,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Integration => "integration",
            Mode::Firing => "firing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub c_mem: f64,
    pub r_leaky: f64,
    /// Threshold as a positive magnitude below rest.
    pub v_thr: f64,
    pub shape: SpikeShape,
}

impl NeuronParams {
    pub fn new(c_mem: f64, r_leaky: f64, v_thr: f64, shape: SpikeShape) -> Result<Self> {
        let p = Self { c_mem, r_leaky, v_thr, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn with_defaults(shape: SpikeShape) -> Self {
        Self { c_mem: DEFAULT_C_MEM, r_leaky: DEFAULT_R_LEAKY, v_thr: DEFAULT_V_THR, shape }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.c_mem) && pos(self.r_leaky) && pos(self.v_thr)) {
            return Err(SimError::InvalidParameter(format!(
                "neuron needs positive c_mem, r_leaky, v_thr; got {}, {}, {}",
                self.c_mem, self.r_leaky, self.v_thr
            )));
        }
        self.shape.validate()
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.r_leaky * self.c_mem
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    /// Membrane excursion from rest (V); negative while charging.
    pub v_mem: f64,
    pub mode: Mode,
    /// Time since firing began; meaningful only in firing mode.
    pub fire_elapsed: f64,
    pub spike_count: u64,
}

impl Default for NeuronState {
    fn default() -> Self {
        Self { v_mem: 0.0, mode: Mode::Integration, fire_elapsed: 0.0, spike_count: 0 }
    }
}

/// What a neuron terminal presents to the synapses attached to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveState {
    Driven(f64),
    /// Held at rest by the integrator feedback; sinks current.
    VirtualGround,
    /// Switch open, no current path.
    Floating,
}

impl DriveState {
    /// Node voltage when the node is part of a closed circuit.
    #[inline]
    pub fn voltage(&self) -> Option<f64> {
        match *self {
            DriveState::Driven(v) => Some(v),
            DriveState::VirtualGround => Some(0.0),
            DriveState::Floating => None,
        }
    }

    #[inline]
    pub fn is_driven(&self) -> bool {
        matches!(self, DriveState::Driven(_))
    }
}

/// Drives of a neuron's two terminals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalDrive {
    /// Summing node; synapses from upstream neurons land here.
    pub input: DriveState,
    /// Output node; synapses to downstream neurons start here.
    pub output: DriveState,
}

impl NeuronState {
    pub fn integrate_step(&self, params: &NeuronParams, i_in: f64, dt: f64) -> Result<Self> {
        if self.mode != Mode::Integration {
            return Err(SimError::WrongMode { expected: Mode::Integration, actual: self.mode });
        }
        let decay = (-dt / params.tau()).exp();
        Ok(Self { v_mem: self.v_mem * decay - i_in / params.c_mem * dt, ..*self })
    }

    pub fn check_and_fire(&self, params: &NeuronParams) -> Self {
        if self.mode == Mode::Integration && self.v_mem <= -params.v_thr {
            self.start_firing()
        } else {
            *self
        }
    }

    /// Enter firing mode regardless of the membrane; used for stimulus
    /// injection and by [`check_and_fire`](Self::check_and_fire).
    pub fn start_firing(&self) -> Self {
        Self { v_mem: 0.0, mode: Mode::Firing, fire_elapsed: 0.0, spike_count: self.spike_count + 1 }
    }

    pub fn advance_fire(&self, params: &NeuronParams, dt: f64) -> Result<Self> {
        if self.mode != Mode::Firing {
            return Err(SimError::WrongMode { expected: Mode::Firing, actual: self.mode });
        }
        let elapsed = quantize_time(self.fire_elapsed + dt);
        if elapsed >= quantize_time(params.shape.duration()) {
            Ok(Self { v_mem: 0.0, mode: Mode::Integration, fire_elapsed: 0.0, ..*self })
        } else {
            Ok(Self { v_mem: 0.0, fire_elapsed: elapsed, ..*self })
        }
    }

    pub fn terminal_drive(&self, params: &NeuronParams) -> TerminalDrive {
        match self.mode {
            Mode::Integration => TerminalDrive { input: DriveState::VirtualGround, output: DriveState::Floating },
            Mode::Firing => {
                let v = params.shape.voltage(self.fire_elapsed);
                TerminalDrive { input: DriveState::Driven(v), output: DriveState::Driven(v) }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::reference_shape;

    fn params() -> NeuronParams {
        NeuronParams::with_defaults(reference_shape())
    }

    fn integrating(v_mem: f64) -> NeuronState {
        NeuronState { v_mem, ..Default::default() }
    }

    #[test]
    fn pure_leak_one_tau() {
        let p = params();
        let s = integrating(-0.1).integrate_step(&p, 0.0, p.tau()).unwrap();
        assert!((s.v_mem - (-0.1 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((s.v_mem + 0.036_787_944).abs() < 1e-9);
    }

    #[test]
    fn charge_step() {
        let p = NeuronParams { r_leaky: 1e18, ..params() };
        let s = integrating(0.0).integrate_step(&p, 140e-9, 1e-6).unwrap();
        // dV = -I t / C = -140nA * 1us / 1pF
        assert!((s.v_mem + 0.14).abs() < 1e-9);
    }

    #[test]
    fn rest_is_fixed_point() {
        let s = integrating(0.0).integrate_step(&params(), 0.0, 1e-8).unwrap();
        assert_eq!(s.v_mem, 0.0);
    }

    #[test]
    fn wrong_mode_errors() {
        let p = params();
        let firing = integrating(0.0).start_firing();
        assert!(matches!(firing.integrate_step(&p, 0.0, 1e-8), Err(SimError::WrongMode { .. })));
        assert!(matches!(integrating(0.0).advance_fire(&p, 1e-8), Err(SimError::WrongMode { .. })));
    }

    #[test]
    fn threshold_crossing() {
        let p = params();
        let s = integrating(-0.31).check_and_fire(&p);
        assert_eq!(s.mode, Mode::Firing);
        assert_eq!(s.v_mem, 0.0);
        assert_eq!(s.fire_elapsed, 0.0);
        assert_eq!(s.spike_count, 1);

        let s = integrating(-0.29).check_and_fire(&p);
        assert_eq!(s.mode, Mode::Integration);
        assert_eq!(s.spike_count, 0);

        let firing = integrating(0.0).start_firing();
        let weird = NeuronState { v_mem: -5.0, ..firing };
        assert_eq!(weird.check_and_fire(&p), weird);
    }

    #[test]
    fn fire_window_ends_on_duration() {
        let p = params();
        let s = NeuronState { mode: Mode::Firing, fire_elapsed: 3.99e-6, ..Default::default() };
        let s = s.advance_fire(&p, 10e-9).unwrap();
        assert_eq!(s.mode, Mode::Integration);
        assert_eq!(s.v_mem, 0.0);

        let s = integrating(0.0).start_firing().advance_fire(&p, 10e-9).unwrap();
        assert_eq!(s.mode, Mode::Firing);
        assert!((s.fire_elapsed - 10e-9).abs() < 1e-21);
    }

    #[test]
    fn whole_window_is_refractory() {
        let p = params();
        let dt = 10e-9;
        let mut s = integrating(0.0).start_firing();
        let mut steps = 0;
        while s.mode == Mode::Firing {
            // Strong input arriving mid-spike never retriggers.
            s = NeuronState { v_mem: -1.0, ..s }.check_and_fire(&p);
            s = s.advance_fire(&p, dt).unwrap();
            steps += 1;
        }
        assert_eq!(steps, 400);
        assert_eq!(s.spike_count, 1);
    }

    #[test]
    fn elapsed_lands_on_segment_boundary() {
        let p = params();
        let mut s = integrating(0.0).start_firing();
        for _ in 0..100 {
            s = s.advance_fire(&p, 10e-9).unwrap();
        }
        assert_eq!(s.fire_elapsed, 1e-6);
        assert_eq!(s.terminal_drive(&p).output, DriveState::Driven(-0.03));
    }

    #[test]
    fn drives_by_mode() {
        let p = params();
        let d = integrating(-0.1).terminal_drive(&p);
        assert_eq!(d.input, DriveState::VirtualGround);
        assert_eq!(d.output, DriveState::Floating);

        let s = NeuronState { mode: Mode::Firing, fire_elapsed: 0.5e-6, ..Default::default() };
        let d = s.terminal_drive(&p);
        assert_eq!(d.input, DriveState::Driven(0.14));
        assert_eq!(d.output, DriveState::Driven(0.14));

        let eps = 5e-9;
        let s = NeuronState { mode: Mode::Firing, fire_elapsed: 1e-6 + eps, ..Default::default() };
        let expect = -0.03 * (-eps / p.shape.tau_minus).exp();
        match s.terminal_drive(&p).input {
            DriveState::Driven(v) => assert!((v - expect).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn leak_matches_closed_form() {
        let p = params();
        let dt = 10e-9;
        let v0 = -0.2;
        let mut s = integrating(v0);
        for n in 1..=2000 {
            s = s.integrate_step(&p, 0.0, dt).unwrap();
            let exact = v0 * (-(n as f64) * dt / p.tau()).exp();
            assert!(((s.v_mem - exact) / exact).abs() < 1e-12, "step {n}");
        }
    }

    #[test]
    fn charge_to_threshold() {
        let p = NeuronParams { r_leaky: 1e15, ..params() };
        let i = 100e-9;
        let t_fire = p.v_thr * p.c_mem / i;
        let dt = t_fire / 1000.0;
        let mut s = integrating(0.0);
        let mut t = 0.0;
        while s.mode == Mode::Integration {
            s = s.integrate_step(&p, i, dt).unwrap().check_and_fire(&p);
            t += dt;
            assert!(t < 2.0 * t_fire);
        }
        assert!(((t - t_fire) / t_fire).abs() < 0.01);
    }
}
