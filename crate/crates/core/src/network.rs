//! Crossbar topology and the fixed-timestep engine.
//!
//! Every step runs the same phases in the same order:
//!
//! 1. due stimuli force their neurons into firing mode;
//! 2. terminal drives are resolved for every neuron;
//! 3. each synapse sees `V_net = V(post input) - V(pre output)` and drifts;
//! 4. summing-node and driver currents are accumulated in synapse order;
//! 5. integrating neurons integrate their input current;
//! 6. integrating neurons that crossed threshold start firing;
//! 7. neurons that drove during this step advance their spike.
//!
//! Phases 3 and 5-7 touch disjoint elements and run in parallel for large
//! networks. Phase 4 is a sequential reduction, so results do not depend on
//! the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, MemristorState};
use crate::error::{Result, SimError};
use crate::neuron::{DriveState, Mode, NeuronParams, NeuronState, TerminalDrive};
use crate::power::{PowerAccumulator, PowerReport, SupplyModel};
use crate::rng::SplitMix64;
use crate::waveform::SpikeShape;

/// Default timestep: a hundredth of the reference spike head.
pub const DEFAULT_DT: f64 = 10e-9;

/// Finest timestep relative to the spike head that `run` accepts.
pub const MIN_HEAD_SAMPLES: f64 = 20.0;

const PAR_THRESHOLD: usize = 2048;

pub type NeuronId = usize;
pub type SynapseId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stimulus {
    Periodic { t0: f64, period: f64 },
    Times(Vec<f64>),
    Poisson { rate: f64, seed: u64 },
}

impl Stimulus {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::InvalidParameter(m));
        match self {
            Stimulus::Periodic { t0, period } => {
                if !(t0.is_finite() && *t0 >= 0.0) {
                    return bad(format!("periodic t0 must be >= 0, got {t0}"));
                }
                if !(period.is_finite() && *period > 0.0) {
                    return bad(format!("periodic period must be > 0, got {period}"));
                }
            }
            Stimulus::Times(ts) => {
                if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    return bad("stimulus times must be finite and >= 0".into());
                }
                if ts.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("stimulus times must be strictly increasing".into());
                }
            }
            Stimulus::Poisson { rate, .. } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return bad(format!("poisson rate must be >= 0, got {rate}"));
                }
            }
        }
        Ok(())
    }

    fn cursor(&self) -> StimulusCursor {
        let inner = match self {
            Stimulus::Periodic { t0, period } => CursorKind::Periodic { t0: *t0, period: *period, k: 0 },
            Stimulus::Times(ts) => CursorKind::Times { times: ts.clone(), next: 0 },
            Stimulus::Poisson { rate, seed } => {
                let mut rng = SplitMix64::new(*seed);
                let next = if *rate > 0.0 { Some(rng.next_exp(*rate)) } else { None };
                CursorKind::Poisson { rate: *rate, rng, next }
            }
        };
        StimulusCursor { inner }
    }

    /// Same program with its random seed replaced. Non-random programs are unchanged.
    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            Stimulus::Poisson { rate, .. } => Stimulus::Poisson { rate: *rate, seed },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone)]
struct StimulusCursor {
    inner: CursorKind,
}

#[derive(Debug, Clone)]
enum CursorKind {
    Periodic { t0: f64, period: f64, k: u64 },
    Times { times: Vec<f64>, next: usize },
    Poisson { rate: f64, rng: SplitMix64, next: Option<f64> },
}

impl StimulusCursor {
    fn peek(&self) -> Option<f64> {
        match &self.inner {
            CursorKind::Periodic { t0, period, k } => Some(t0 + *k as f64 * period),
            CursorKind::Times { times, next } => times.get(*next).copied(),
            CursorKind::Poisson { next, .. } => *next,
        }
    }

    fn advance(&mut self) {
        match &mut self.inner {
            CursorKind::Periodic { k, .. } => *k += 1,
            CursorKind::Times { next, .. } => *next += 1,
            CursorKind::Poisson { rate, rng, next } => {
                if let Some(t) = *next {
                    *next = Some(t + rng.next_exp(*rate));
                }
            }
        }
    }

    /// Consumes every event due by step time `t`; true if any was due.
    fn take_due(&mut self, t: f64, dt: f64) -> bool {
        let horizon = t + 1e-6 * dt;
        let mut due = false;
        while let Some(s) = self.peek() {
            if s > horizon {
                break;
            }
            due = true;
            self.advance();
        }
        due
    }
}

#[derive(Debug, Clone)]
pub struct NeuronSlot {
    pub name: String,
    pub params: NeuronParams,
    pub state: NeuronState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synapse {
    pub pre: NeuronId,
    pub post: NeuronId,
    pub state: MemristorState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpikeEvent {
    pub neuron: NeuronId,
    /// Time of the first driven sample of the spike.
    pub time: f64,
    pub forced: bool,
}

/// Per-step outputs, valid after each call to [`Network::step`].
#[derive(Debug, Clone, Default)]
struct Scratch {
    drives: Vec<TerminalDrive>,
    was_firing: Vec<bool>,
    i_in: Vec<f64>,
    i_mr: Vec<f64>,
    snapshot: Vec<NeuronState>,
    g_before: Vec<f64>,
    v_net: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct StepEvents {
    pub spikes: Vec<SpikeEvent>,
    /// Stimulus events that arrived while their neuron was already firing.
    pub dropped_stimuli: Vec<NeuronId>,
}

#[derive(Debug, Clone)]
pub struct Network {
    neurons: Vec<NeuronSlot>,
    synapses: Vec<Synapse>,
    stimuli: Vec<Option<Stimulus>>,
    cursors: Vec<Option<StimulusCursor>>,
    device: DeviceParams,
    shape: SpikeShape,
    time: f64,
    scratch: Scratch,
}

/// Synapse voltage for a synapse from `pre_output` to `post_input`, or `None`
/// when either end is open.
#[inline]
pub fn synapse_voltage(pre_output: DriveState, post_input: DriveState) -> Option<f64> {
    match (pre_output.voltage(), post_input.voltage()) {
        (Some(v_pre), Some(v_post)) => Some(v_post - v_pre),
        _ => None,
    }
}

impl Network {
    pub fn new(device: DeviceParams, shape: SpikeShape) -> Result<Self> {
        device.validate()?;
        shape.validate()?;
        Ok(Self {
            neurons: Vec::new(),
            synapses: Vec::new(),
            stimuli: Vec::new(),
            cursors: Vec::new(),
            device,
            shape,
            time: 0.0,
            scratch: Scratch::default(),
        })
    }

    /// Adds a neuron; `params.shape` is replaced by the network's shape.
    pub fn add_neuron(&mut self, name: impl Into<String>, params: NeuronParams) -> Result<NeuronId> {
        let params = NeuronParams { shape: self.shape, ..params };
        params.validate()?;
        let name = name.into();
        if self.neurons.iter().any(|n| n.name == name) {
            return Err(SimError::InvalidParameter(format!("duplicate neuron name {name}")));
        }
        self.neurons.push(NeuronSlot { name, params, state: NeuronState::default() });
        self.stimuli.push(None);
        self.cursors.push(None);
        Ok(self.neurons.len() - 1)
    }

    pub fn add_synapse(&mut self, pre: NeuronId, post: NeuronId, resistance: f64) -> Result<SynapseId> {
        if pre >= self.neurons.len() || post >= self.neurons.len() {
            return Err(SimError::InvalidParameter(format!("synapse {pre}->{post} references unknown neuron")));
        }
        if pre == post {
            return Err(SimError::InvalidParameter(format!("self-synapse on neuron {pre}")));
        }
        if self.synapses.iter().any(|s| s.pre == pre && s.post == post) {
            return Err(SimError::InvalidParameter(format!("duplicate synapse {pre}->{post}")));
        }
        if !(resistance >= self.device.r_on && resistance <= self.device.r_off) {
            return Err(SimError::InvalidParameter(format!(
                "synapse resistance {resistance:e} outside [{:e}, {:e}]",
                self.device.r_on, self.device.r_off
            )));
        }
        let state = MemristorState::from_resistance(&self.device, resistance);
        self.synapses.push(Synapse { pre, post, state });
        Ok(self.synapses.len() - 1)
    }

    pub fn set_stimulus(&mut self, neuron: NeuronId, stimulus: Stimulus) -> Result<()> {
        stimulus.validate()?;
        let slot = self
            .stimuli
            .get_mut(neuron)
            .ok_or_else(|| SimError::InvalidParameter(format!("unknown neuron {neuron}")))?;
        self.cursors[neuron] = Some(stimulus.cursor());
        *slot = Some(stimulus);
        Ok(())
    }

    pub fn neurons(&self) -> &[NeuronSlot] {
        &self.neurons
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn neuron_state_mut(&mut self, id: NeuronId) -> &mut NeuronState {
        &mut self.neurons[id].state
    }

    pub fn neuron_id(&self, name: &str) -> Option<NeuronId> {
        self.neurons.iter().position(|n| n.name == name)
    }

    pub fn stimulus(&self, id: NeuronId) -> Option<&Stimulus> {
        self.stimuli.get(id).and_then(|s| s.as_ref())
    }

    pub fn device(&self) -> &DeviceParams {
        &self.device
    }

    pub fn shape(&self) -> &SpikeShape {
        &self.shape
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn conductance(&self, id: SynapseId) -> f64 {
        self.device.conductance(self.synapses[id].state)
    }

    pub fn resistance(&self, id: SynapseId) -> f64 {
        1.0 / self.conductance(id)
    }

    /// Summing-node current of each neuron in the last step.
    pub fn last_i_in(&self) -> &[f64] {
        &self.scratch.i_in
    }

    /// Current each neuron sourced into driven synapses in the last step.
    pub fn last_i_mr(&self) -> &[f64] {
        &self.scratch.i_mr
    }

    /// `V_net` of each synapse in the last step.
    pub fn last_v_net(&self) -> &[Option<f64>] {
        &self.scratch.v_net
    }

    fn ensure_scratch(&mut self) {
        let n = self.neurons.len();
        let m = self.synapses.len();
        let s = &mut self.scratch;
        s.drives.resize(n, TerminalDrive { input: DriveState::VirtualGround, output: DriveState::Floating });
        s.was_firing.resize(n, false);
        s.i_in.resize(n, 0.0);
        s.i_mr.resize(n, 0.0);
        s.snapshot.resize(n, NeuronState::default());
        s.g_before.resize(m, 0.0);
        s.v_net.resize(m, None);
    }

    /// Advances the network by one step of length `dt` from [`time`](Self::time).
    pub fn step(&mut self, dt: f64) -> StepEvents {
        self.step_at(self.time, dt)
    }

    fn step_at(&mut self, t: f64, dt: f64) -> StepEvents {
        self.ensure_scratch();
        let mut events = StepEvents::default();

        // 1. stimuli
        for (id, cursor) in self.cursors.iter_mut().enumerate() {
            let Some(cursor) = cursor else { continue };
            if cursor.take_due(t, dt) {
                let state = &mut self.neurons[id].state;
                if state.mode == Mode::Integration {
                    *state = state.start_firing();
                    events.spikes.push(SpikeEvent { neuron: id, time: t, forced: true });
                } else {
                    events.dropped_stimuli.push(id);
                }
            }
        }

        // 2. drives
        let scratch = &mut self.scratch;
        for (i, n) in self.neurons.iter().enumerate() {
            scratch.drives[i] = n.state.terminal_drive(&n.params);
            scratch.was_firing[i] = n.state.mode == Mode::Firing;
            scratch.snapshot[i] = n.state;
        }

        // 3. synapse voltages and drift
        let device = self.device;
        let drives = &scratch.drives;
        let update = |(syn, (g, v)): (&mut Synapse, (&mut f64, &mut Option<f64>))| {
            let v_net = synapse_voltage(drives[syn.pre].output, drives[syn.post].input);
            *g = device.conductance(syn.state);
            *v = v_net;
            syn.state = device.step(syn.state, v_net.unwrap_or(0.0), dt);
        };
        if self.synapses.len() >= PAR_THRESHOLD {
            self.synapses
                .par_iter_mut()
                .zip(scratch.g_before.par_iter_mut().zip(scratch.v_net.par_iter_mut()))
                .for_each(update);
        } else {
            self.synapses.iter_mut().zip(scratch.g_before.iter_mut().zip(scratch.v_net.iter_mut())).for_each(update);
        }

        // 4. current accumulation, fixed synapse order
        scratch.i_in.iter_mut().for_each(|i| *i = 0.0);
        scratch.i_mr.iter_mut().for_each(|i| *i = 0.0);
        for (k, syn) in self.synapses.iter().enumerate() {
            let Some(v_net) = scratch.v_net[k] else { continue };
            let g = scratch.g_before[k];
            let pre = drives[syn.pre].output;
            let post = drives[syn.post].input;
            if let (DriveState::Driven(v_pre), DriveState::VirtualGround) = (pre, post) {
                scratch.i_in[syn.post] += g * v_pre;
            }
            let load = g * v_net.abs();
            if pre.is_driven() {
                scratch.i_mr[syn.pre] += load;
            }
            if post.is_driven() {
                scratch.i_mr[syn.post] += load;
            }
        }

        // 5-7. neuron updates
        let i_in = &scratch.i_in;
        let was_firing = &scratch.was_firing;
        let update_neuron = |(id, n): (usize, &mut NeuronSlot)| -> bool {
            let mut s = n.state;
            let mut fired = false;
            if s.mode == Mode::Integration {
                s = s.integrate_step(&n.params, i_in[id], dt).expect("integration mode checked");
                let after = s.check_and_fire(&n.params);
                fired = after.mode == Mode::Firing;
                s = after;
            }
            if was_firing[id] {
                s = s.advance_fire(&n.params, dt).expect("firing mode checked");
            }
            n.state = s;
            fired
        };
        let fired: Vec<NeuronId> = if self.neurons.len() >= PAR_THRESHOLD {
            let flags: Vec<bool> = self.neurons.par_iter_mut().enumerate().map(update_neuron).collect();
            flags.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| i).collect()
        } else {
            self.neurons
                .iter_mut()
                .enumerate()
                .map(|e| (e.0, update_neuron(e)))
                .filter(|(_, f)| *f)
                .map(|(i, _)| i)
                .collect()
        };
        for id in fired {
            events.spikes.push(SpikeEvent { neuron: id, time: t + dt, forced: false });
        }
        self.time = t + dt;
        events
    }

    /// Runs for `t_end` seconds from the current time.
    pub fn run(&mut self, t_end: f64, dt: f64, record: &RecordSelection, supply: &SupplyModel) -> Result<RunOutput> {
        check_resolution(&self.shape, dt)?;
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(SimError::InvalidParameter(format!("t_end must be >= 0, got {t_end}")));
        }
        let every = record.every.max(1);
        let n_steps = if t_end > 0.0 { (t_end / dt - 1e-9).ceil() as u64 } else { 0 };
        let t0 = self.time;

        let neuron_ids = record.neurons.resolve(self.neurons.len());
        let synapse_ids = record.synapses.resolve(self.synapses.len());
        let mut traces = TraceSet {
            dt: dt * every as f64,
            times: Vec::new(),
            neurons: neuron_ids.iter().map(|&id| NeuronTrace::new(id, &self.neurons[id].name)).collect(),
            synapses: synapse_ids
                .iter()
                .map(|&id| {
                    let s = &self.synapses[id];
                    SynapseTrace::new(id, s.pre, s.post)
                })
                .collect(),
            spikes: Vec::new(),
        };
        let mut power = PowerAccumulator::new(*supply, self.neurons.iter().map(|n| n.name.clone()).collect());

        for k in 0..n_steps {
            let t = t0 + k as f64 * dt;
            let events = self.step_at(t, dt);
            let s = &self.scratch;
            for (id, state) in s.snapshot.iter().enumerate() {
                power.observe(id, t, state.mode, s.i_mr[id], dt);
            }
            if k % every as u64 == 0 {
                traces.times.push(t);
                for tr in traces.neurons.iter_mut() {
                    let st = &s.snapshot[tr.id];
                    tr.v_mem.push(st.v_mem);
                    tr.mode.push(st.mode);
                    tr.i_in.push(s.i_in[tr.id]);
                    tr.i_mr.push(s.i_mr[tr.id]);
                }
                for tr in traces.synapses.iter_mut() {
                    tr.resistance.push(1.0 / s.g_before[tr.id]);
                    tr.v_net.push(s.v_net[tr.id]);
                }
            }
            traces.spikes.extend(events.spikes);
        }
        self.time = t0 + n_steps as f64 * dt;
        Ok(RunOutput { traces, power: power.finish() })
    }
}

/// Rejects timesteps too coarse to resolve the spike head.
pub fn check_resolution(shape: &SpikeShape, dt: f64) -> Result<()> {
    let limit = shape.tail_plus / MIN_HEAD_SAMPLES;
    if !(dt > 0.0 && dt.is_finite()) || dt > limit * (1.0 + 1e-12) {
        return Err(SimError::Resolution { dt, limit });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Selection {
    #[default]
    All,
    None,
    Only(Vec<usize>),
}

impl Selection {
    fn resolve(&self, len: usize) -> Vec<usize> {
        match self {
            Selection::All => (0..len).collect(),
            Selection::None => Vec::new(),
            Selection::Only(ids) => ids.iter().copied().filter(|&i| i < len).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordSelection {
    pub neurons: Selection,
    pub synapses: Selection,
    /// Keep one sample every `every` steps.
    pub every: usize,
}

impl Default for RecordSelection {
    fn default() -> Self {
        Self::all()
    }
}

impl RecordSelection {
    pub fn all() -> Self {
        Self { neurons: Selection::All, synapses: Selection::All, every: 1 }
    }

    pub fn none() -> Self {
        Self { neurons: Selection::None, synapses: Selection::None, every: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeuronTrace {
    pub id: NeuronId,
    pub name: String,
    pub v_mem: Vec<f64>,
    pub mode: Vec<Mode>,
    pub i_in: Vec<f64>,
    /// Current sourced into driven synapses.
    pub i_mr: Vec<f64>,
}

impl NeuronTrace {
    fn new(id: NeuronId, name: &str) -> Self {
        Self { id, name: name.to_string(), v_mem: vec![], mode: vec![], i_in: vec![], i_mr: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynapseTrace {
    pub id: SynapseId,
    pub pre: NeuronId,
    pub post: NeuronId,
    /// Resistance at the start of each sampled step.
    pub resistance: Vec<f64>,
    pub v_net: Vec<Option<f64>>,
}

impl SynapseTrace {
    fn new(id: SynapseId, pre: NeuronId, post: NeuronId) -> Self {
        Self { id, pre, post, resistance: vec![], v_net: vec![] }
    }
}

/// Sampled time series. Sample `k` of every series describes the step that
/// started at `times[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSet {
    pub dt: f64,
    pub times: Vec<f64>,
    pub neurons: Vec<NeuronTrace>,
    pub synapses: Vec<SynapseTrace>,
    pub spikes: Vec<SpikeEvent>,
}

impl TraceSet {
    pub fn neuron(&self, id: NeuronId) -> Option<&NeuronTrace> {
        self.neurons.iter().find(|n| n.id == id)
    }

    pub fn synapse(&self, id: SynapseId) -> Option<&SynapseTrace> {
        self.synapses.iter().find(|s| s.id == id)
    }

    pub fn spike_times(&self, neuron: NeuronId) -> Vec<f64> {
        self.spikes.iter().filter(|s| s.neuron == neuron).map(|s| s.time).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub traces: TraceSet,
    pub power: PowerReport,
}

/// Conductance change of one synapse, starting at resistance `r0`, under an
/// isolated pre spike and a post spike `delta_t` later (negative: post first).
pub fn pair_delta_g(device: &DeviceParams, shape: &SpikeShape, r0: f64, delta_t: f64, dt: f64) -> Result<f64> {
    let mut net = Network::new(*device, *shape)?;
    // Thresholds far out of reach keep the pair isolated from integration.
    let isolated = NeuronParams { v_thr: 1e6, ..NeuronParams::with_defaults(*shape) };
    let pre = net.add_neuron("pre", isolated)?;
    let post = net.add_neuron("post", isolated)?;
    let syn = net.add_synapse(pre, post, r0)?;
    let (t_pre, t_post) = if delta_t >= 0.0 { (0.0, delta_t) } else { (-delta_t, 0.0) };
    net.set_stimulus(pre, Stimulus::Times(vec![t_pre]))?;
    net.set_stimulus(post, Stimulus::Times(vec![t_post]))?;
    let g0 = net.conductance(syn);
    let t_end = t_pre.max(t_post) + shape.duration() + 2.0 * dt;
    net.run(t_end, dt, &RecordSelection::none(), &SupplyModel::default())?;
    Ok(net.conductance(syn) - g0)
}

/// STDP window: `(delta_t, delta_g)` for each offset, from a synapse at 1 MOhm.
pub fn stdp_window_sweep(
    device: &DeviceParams,
    shape: &SpikeShape,
    delta_ts: &[f64],
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    let r0 = crate::device::CALIBRATION_R0.clamp(device.r_on, device.r_off);
    delta_ts.par_iter().map(|&d| pair_delta_g(device, shape, r0, d, dt).map(|g| (d, g))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{reference_device, reference_shape};

    fn uncalibrated() -> DeviceParams {
        reference_device().with_kappa(0.0, 0.0)
    }

    #[test]
    fn voltage_cases() {
        use DriveState::*;
        assert_eq!(synapse_voltage(Driven(0.14), VirtualGround), Some(-0.14));
        assert_eq!(synapse_voltage(Floating, Driven(0.14)), None);
        let v = synapse_voltage(Driven(-0.03), Driven(0.14)).unwrap();
        assert!((v - 0.17).abs() < 1e-15);
    }

    #[test]
    fn quiescent_network_decays() {
        let shape = reference_shape();
        let mut net = Network::new(uncalibrated(), shape).unwrap();
        let a = net.add_neuron("a", NeuronParams::with_defaults(shape)).unwrap();
        let b = net.add_neuron("b", NeuronParams::with_defaults(shape)).unwrap();
        net.add_synapse(a, b, 1e6).unwrap();
        net.neuron_state_mut(b).v_mem = -0.1;
        for _ in 0..100 {
            net.step(DEFAULT_DT);
            assert!(net.last_i_in().iter().all(|&i| i == 0.0));
            assert_eq!(net.last_v_net()[0], None);
        }
        let v = net.neurons()[b].state.v_mem;
        assert!(v > -0.1 && v < 0.0);
    }

    #[test]
    fn firing_pre_feeds_post() {
        let shape = reference_shape();
        let mut net = Network::new(uncalibrated(), shape).unwrap();
        let a = net.add_neuron("a", NeuronParams::with_defaults(shape)).unwrap();
        let b = net.add_neuron("b", NeuronParams::with_defaults(shape)).unwrap();
        net.add_synapse(a, b, 1e6).unwrap();
        net.set_stimulus(a, Stimulus::Times(vec![0.0])).unwrap();
        let ev = net.step(DEFAULT_DT);
        assert_eq!(ev.spikes.len(), 1);
        assert!((net.last_i_in()[b] - 140e-9).abs() < 1e-18);
        assert!((net.last_i_mr()[a] - 140e-9).abs() < 1e-18);
        assert_eq!(net.last_v_net()[0], Some(-0.14));
    }

    #[test]
    fn large_fanout_peak_current() {
        let shape = reference_shape();
        let mut net = Network::new(uncalibrated(), shape).unwrap();
        let quiet = NeuronParams { v_thr: 100.0, ..NeuronParams::with_defaults(shape) };
        let src = net.add_neuron("src", quiet).unwrap();
        for k in 0..10_000 {
            let id = net.add_neuron(format!("n{k}"), quiet).unwrap();
            net.add_synapse(src, id, 1e6).unwrap();
        }
        net.set_stimulus(src, Stimulus::Times(vec![0.0])).unwrap();
        net.step(DEFAULT_DT);
        let i = net.last_i_mr()[src];
        assert!((i - 1.4e-3).abs() / 1.4e-3 < 1e-9, "{i}");
    }

    #[test]
    fn topology_errors() {
        let shape = reference_shape();
        let mut net = Network::new(uncalibrated(), shape).unwrap();
        let a = net.add_neuron("a", NeuronParams::with_defaults(shape)).unwrap();
        let b = net.add_neuron("b", NeuronParams::with_defaults(shape)).unwrap();
        assert!(net.add_neuron("a", NeuronParams::with_defaults(shape)).is_err());
        assert!(net.add_synapse(a, a, 1e6).is_err());
        assert!(net.add_synapse(a, 7, 1e6).is_err());
        assert!(net.add_synapse(a, b, 1.0).is_err());
        net.add_synapse(a, b, 1e6).unwrap();
        assert!(net.add_synapse(a, b, 1e6).is_err());
        assert!(net.set_stimulus(a, Stimulus::Periodic { t0: 0.0, period: 0.0 }).is_err());
        assert!(net.set_stimulus(a, Stimulus::Times(vec![1e-6, 1e-6])).is_err());
    }

    #[test]
    fn resolution_guard() {
        let shape = reference_shape();
        let mut net = Network::new(uncalibrated(), shape).unwrap();
        let res = net.run(1e-6, 100e-9, &RecordSelection::all(), &SupplyModel::default());
        assert!(matches!(res, Err(SimError::Resolution { .. })));
        assert!(net.run(1e-6, 50e-9, &RecordSelection::all(), &SupplyModel::default()).is_ok());
    }

    #[test]
    fn null_run() {
        let shape = reference_shape();
        let mut net = Network::new(uncalibrated(), shape).unwrap();
        net.add_neuron("a", NeuronParams::with_defaults(shape)).unwrap();
        let out = net.run(0.0, DEFAULT_DT, &RecordSelection::all(), &SupplyModel::default()).unwrap();
        assert!(out.traces.times.is_empty());
        assert!(out.traces.neurons[0].v_mem.is_empty());
        assert_eq!(net.time(), 0.0);
    }

    #[test]
    fn stimulus_while_firing_is_dropped() {
        let shape = reference_shape();
        let mut net = Network::new(uncalibrated(), shape).unwrap();
        let a = net.add_neuron("a", NeuronParams::with_defaults(shape)).unwrap();
        net.set_stimulus(a, Stimulus::Times(vec![0.0, 1e-6, 5e-6])).unwrap();
        let out = net.run(8e-6, DEFAULT_DT, &RecordSelection::all(), &SupplyModel::default()).unwrap();
        assert_eq!(out.traces.spike_times(a).len(), 2);
        assert_eq!(net.neurons()[a].state.spike_count, 2);
    }

    #[test]
    fn poisson_is_seeded() {
        let times = |seed| {
            let shape = reference_shape();
            let mut net = Network::new(uncalibrated(), shape).unwrap();
            let a = net.add_neuron("a", NeuronParams::with_defaults(shape)).unwrap();
            net.set_stimulus(a, Stimulus::Poisson { rate: 1e5, seed }).unwrap();
            let out = net.run(200e-6, DEFAULT_DT, &RecordSelection::all(), &SupplyModel::default()).unwrap();
            out.traces.spike_times(a)
        };
        assert_eq!(times(1), times(1));
        assert_ne!(times(1), times(2));
        assert!(!times(1).is_empty());
    }

    #[test]
    fn no_overlap_no_change() {
        let dev = uncalibrated().with_kappa(1e7, 1e7);
        let g = pair_delta_g(&dev, &reference_shape(), 1e6, 4e-6, DEFAULT_DT).unwrap();
        assert_eq!(g, 0.0);
        let g = pair_delta_g(&dev, &reference_shape(), 1e6, -4.5e-6, DEFAULT_DT).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn window_signs() {
        let dev = uncalibrated().with_kappa(1e7, 1e7);
        let sweep =
            stdp_window_sweep(&dev, &reference_shape(), &[-1e-6, -0.3e-6, 0.0, 0.3e-6, 1e-6], DEFAULT_DT).unwrap();
        assert!(sweep[0].1 < 0.0);
        assert!(sweep[1].1 < 0.0);
        assert_eq!(sweep[2].1, 0.0);
        assert!(sweep[3].1 > 0.0);
        assert!(sweep[4].1 > 0.0);
    }
}
