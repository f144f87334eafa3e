//! Memristor synapse model.
//!
//! Conductance is linear in a bounded state variable `x`, and `x` drifts only
//! while the applied voltage exceeds one of the two programming thresholds.
//! Drift speed grows linearly with the overdrive past the threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::network::{pair_delta_g, DEFAULT_DT};
use crate::waveform::SpikeShape;

/// Conductance change one calibrated spike pair should produce.
pub const CALIBRATION_TARGET_DG: f64 = 0.2e-6;
/// Resistance the calibration pair starts from.
pub const CALIBRATION_R0: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Positive programming threshold (V).
    pub v_p: f64,
    /// Negative programming threshold, stored as a magnitude (V).
    pub v_n: f64,
    /// Fully potentiated resistance (ohm).
    pub r_on: f64,
    /// Fully depressed resistance (ohm).
    pub r_off: f64,
    /// Drift rate above `+v_p`, state units per volt-second.
    pub kappa_p: f64,
    /// Drift rate below `-v_n`, state units per volt-second.
    pub kappa_n: f64,
}

impl DeviceParams {
    pub fn new(v_p: f64, v_n: f64, r_on: f64, r_off: f64, kappa_p: f64, kappa_n: f64) -> Result<Self> {
        let params = Self { v_p, v_n, r_on, r_off, kappa_p, kappa_n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::InvalidParameter(msg));
        if !(self.v_p > 0.0 && self.v_p.is_finite()) {
            return bad(format!("v_p must be positive, got {}", self.v_p));
        }
        if !(self.v_n > 0.0 && self.v_n.is_finite()) {
            return bad(format!("v_n must be positive, got {}", self.v_n));
        }
        if !(self.r_on > 0.0 && self.r_on < self.r_off && self.r_off.is_finite()) {
            return bad(format!("need 0 < r_on < r_off, got r_on={} r_off={}", self.r_on, self.r_off));
        }
        if !(self.kappa_p >= 0.0 && self.kappa_p.is_finite()) {
            return bad(format!("kappa_p must be non-negative, got {}", self.kappa_p));
        }
        if !(self.kappa_n >= 0.0 && self.kappa_n.is_finite()) {
            return bad(format!("kappa_n must be non-negative, got {}", self.kappa_n));
        }
        Ok(())
    }

    pub fn with_kappa(self, kappa_p: f64, kappa_n: f64) -> Self {
        Self { kappa_p, kappa_n, ..self }
    }

    #[inline]
    pub fn g_min(&self) -> f64 {
        1.0 / self.r_off
    }

    #[inline]
    pub fn g_max(&self) -> f64 {
        1.0 / self.r_on
    }

    #[inline]
    pub fn conductance(&self, state: MemristorState) -> f64 {
        self.g_min() + state.x * (self.g_max() - self.g_min())
    }

    /// Ohmic current for voltage `v` across the device.
    #[inline]
    pub fn current(&self, state: MemristorState, v: f64) -> f64 {
        self.conductance(state) * v
    }

    /// `dx/dt` for voltage `v`; positive means potentiation (resistance falls).
    #[inline]
    pub fn drift_rate(&self, _x: f64, v: f64) -> f64 {
        if v > self.v_p {
            self.kappa_p * (v - self.v_p)
        } else if v < -self.v_n {
            -self.kappa_n * (-v - self.v_n)
        } else {
            0.0
        }
    }

    /// Forward-Euler update of the state under a constant voltage for `dt`.
    #[inline]
    pub fn step(&self, state: MemristorState, v: f64, dt: f64) -> MemristorState {
        let rate = self.drift_rate(state.x, v);
        if rate == 0.0 {
            return state;
        }
        MemristorState { x: (state.x + rate * dt).clamp(0.0, 1.0) }
    }

    /// Larger of the two thresholds; a spike pair must exceed this to program.
    pub fn max_threshold(&self) -> f64 {
        self.v_p.max(self.v_n)
    }

    pub fn min_threshold(&self) -> f64 {
        self.v_p.min(self.v_n)
    }
}

/// Normalized device state. Always within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristorState {
    x: f64,
}

impl MemristorState {
    pub fn new(x: f64) -> Self {
        Self { x: x.clamp(0.0, 1.0) }
    }

    /// State whose conductance equals `1/r`, clamped to the device range.
    pub fn from_resistance(params: &DeviceParams, r: f64) -> Self {
        let g = 1.0 / r;
        Self::new((g - params.g_min()) / (params.g_max() - params.g_min()))
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn resistance(&self, params: &DeviceParams) -> f64 {
        1.0 / params.conductance(*self)
    }
}

/// Symmetric-spike STDP feasibility: `|v_p - v_n| < min(v_p, v_n)`.
pub fn stdp_feasible(v_p: f64, v_n: f64) -> bool {
    (v_p - v_n).abs() < v_p.min(v_n)
}

/// Drift rates that make one spike pair at `±delta_t` move conductance by
/// `±target_dg`, starting from [`CALIBRATION_R0`]. Uses the default timestep.
pub fn calibrate_kappa(params: &DeviceParams, shape: &SpikeShape, target_dg: f64, delta_t: f64) -> Result<(f64, f64)> {
    calibrate_kappa_with_dt(params, shape, target_dg, delta_t, DEFAULT_DT)
}

/// As [`calibrate_kappa`], with the pair simulated at timestep `dt`.
///
/// Each polarity is bisected independently against the pair simulation. The
/// pair response is linear in kappa until clamping, so doubling from 1 brackets
/// the root quickly.
pub fn calibrate_kappa_with_dt(
    params: &DeviceParams,
    shape: &SpikeShape,
    target_dg: f64,
    delta_t: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    params.validate()?;
    shape.validate()?;
    if !(target_dg > 0.0) {
        return Err(SimError::InvalidParameter(format!("target_dg must be positive, got {target_dg}")));
    }
    let report = crate::waveform::validate_shape(shape, params);
    if let Some(check) = report.first_failure() {
        return Err(SimError::InfeasibleShape(format!("{check} check failed")));
    }
    let r0 = CALIBRATION_R0.clamp(params.r_on, params.r_off);
    let delta_t = delta_t.abs();

    let potentiation = |k: f64| pair_delta_g(&params.with_kappa(k, 0.0), shape, r0, delta_t, dt);
    let depression = |k: f64| pair_delta_g(&params.with_kappa(0.0, k), shape, r0, -delta_t, dt).map(|g| -g);

    let kappa_p = bisect_kappa(potentiation, target_dg, "potentiation", delta_t)?;
    let kappa_n = bisect_kappa(depression, target_dg, "depression", delta_t)?;
    Ok((kappa_p, kappa_n))
}

fn bisect_kappa<F>(response: F, target: f64, branch: &str, delta_t: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const REL_TOL: f64 = 1e-6;
    let unreachable = || {
        SimError::InfeasibleShape(format!(
            "no {branch} overdrive for a spike pair at |dT|={delta_t:e}s; calibration target unreachable"
        ))
    };

    let mut hi = 1.0;
    let mut g_hi = response(hi)?;
    if g_hi <= 0.0 {
        return Err(unreachable());
    }
    while g_hi < target {
        hi *= 2.0;
        if hi > 1e30 {
            return Err(unreachable());
        }
        g_hi = response(hi)?;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = response(mid)?;
        if ((g - target) / target).abs() <= REL_TOL {
            return Ok(mid);
        }
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
