//! STDP action potential: a narrow positive head followed by a longer negative
//! tail that relaxes back to rest.
//!
//! Voltages are relative to the neuron's rest (refractory) potential, so the
//! waveform is 0 outside `[0, duration)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadStyle {
    #[default]
    Flat,
    /// Decays from `va_plus` with time constant `tail_plus / 3`.
    ExpDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStyle {
    Flat,
    /// Starts at `-va_minus` and relaxes toward rest with `tau_minus`.
    #[default]
    ExpRelax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeShape {
    pub va_plus: f64,
    /// Tail amplitude, stored as a magnitude.
    pub va_minus: f64,
    pub tail_plus: f64,
    pub tail_minus: f64,
    pub tau_minus: f64,
    pub head_style: HeadStyle,
    pub tail_style: TailStyle,
}

impl SpikeShape {
    /// Shape with default styles (flat head, relaxing tail) and
    /// `tau_minus = tail_minus / 3`.
    pub fn new(va_plus: f64, va_minus: f64, tail_plus: f64, tail_minus: f64) -> Result<Self> {
        let shape = Self {
            va_plus,
            va_minus,
            tail_plus,
            tail_minus,
            tau_minus: default_tau_minus(tail_plus, tail_minus),
            head_style: HeadStyle::default(),
            tail_style: TailStyle::default(),
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.va_plus > 0.0
            && self.va_minus >= 0.0
            && self.tail_plus > 0.0
            && self.tail_minus >= 0.0
            && self.tau_minus > 0.0
            && [self.va_plus, self.va_minus, self.tail_plus, self.tail_minus, self.tau_minus]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidParameter(format!("invalid spike shape {self:?}")))
        }
    }

    #[inline]
    pub fn duration(&self) -> f64 {
        self.tail_plus + self.tail_minus
    }

    #[inline]
    pub fn head_tau(&self) -> f64 {
        self.tail_plus / 3.0
    }

    /// Largest absolute voltage the shape reaches.
    pub fn peak_magnitude(&self) -> f64 {
        self.va_plus.max(self.va_minus)
    }

    /// Voltage at time `t` after spike onset.
    #[inline]
    pub fn voltage(&self, t: f64) -> f64 {
        if !(t >= 0.0) || t >= self.duration() {
            return 0.0;
        }
        if t < self.tail_plus {
            match self.head_style {
                HeadStyle::Flat => self.va_plus,
                HeadStyle::ExpDecay => self.va_plus * (-t / self.head_tau()).exp(),
            }
        } else {
            match self.tail_style {
                TailStyle::Flat => -self.va_minus,
                TailStyle::ExpRelax => -self.va_minus * (-(t - self.tail_plus) / self.tau_minus).exp(),
            }
        }
    }
}

/// `tail_minus / 3`, or `tail_plus` when the tail is empty and the value is unused.
pub fn default_tau_minus(tail_plus: f64, tail_minus: f64) -> f64 {
    if tail_minus > 0.0 {
        tail_minus / 3.0
    } else {
        tail_plus
    }
}

pub fn spike_voltage(shape: &SpikeShape, t: f64) -> f64 {
    shape.voltage(t)
}

pub fn spike_duration(shape: &SpikeShape) -> f64 {
    shape.duration()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeCheck {
    NoDisturb,
    Learnability,
}

impl fmt::Display for ShapeCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeCheck::NoDisturb => f.write_str("no-disturb"),
            ShapeCheck::Learnability => f.write_str("learnability"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    /// A lone spike stays inside the device dead zone.
    pub no_disturb: bool,
    /// A head/tail overlap can exceed both programming thresholds.
    pub learnability: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.no_disturb && self.learnability
    }

    pub fn first_failure(&self) -> Option<ShapeCheck> {
        if !self.no_disturb {
            Some(ShapeCheck::NoDisturb)
        } else if !self.learnability {
            Some(ShapeCheck::Learnability)
        } else {
            None
        }
    }

    pub fn failures(&self) -> Vec<ShapeCheck> {
        let mut out = Vec::new();
        if !self.no_disturb {
            out.push(ShapeCheck::NoDisturb);
        }
        if !self.learnability {
            out.push(ShapeCheck::Learnability);
        }
        out
    }
}

pub fn validate_shape(shape: &SpikeShape, device: &DeviceParams) -> ValidationReport {
    ValidationReport {
        no_disturb: shape.va_plus.max(shape.va_minus) < device.min_threshold(),
        learnability: shape.va_plus + shape.va_minus > device.max_threshold(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> SpikeShape {
        SpikeShape::new(0.14, 0.03, 1e-6, 3e-6).unwrap()
    }

    fn device(v_p: f64, v_n: f64) -> DeviceParams {
        DeviceParams::new(v_p, v_n, 1e5, 1e8, 0.0, 0.0).unwrap()
    }

    #[test]
    fn head_and_rest() {
        let s = reference();
        assert_eq!(s.voltage(0.5e-6), 0.14);
        assert_eq!(s.voltage(0.0), 0.14);
        assert_eq!(s.voltage(-1e-6), 0.0);
        assert_eq!(s.voltage(10e-6), 0.0);
        assert_eq!(s.voltage(4e-6), 0.0);
    }

    #[test]
    fn tail_relaxation() {
        let s = reference();
        assert_eq!(s.tau_minus, 1e-6);
        assert_eq!(s.voltage(1e-6), -0.03);
        let v = s.voltage(1e-6 + s.tau_minus);
        // -30mV * e^-1
        assert!((v - (-0.011_036_383)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn flat_tail_and_exp_head() {
        let s = SpikeShape { tail_style: TailStyle::Flat, head_style: HeadStyle::ExpDecay, ..reference() };
        assert_eq!(s.voltage(3.9e-6), -0.03);
        let v = s.voltage(s.head_tau());
        assert!((v - 0.14 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn durations() {
        assert!((reference().duration() - 4e-6).abs() < 1e-21);
        let s = SpikeShape::new(0.14, 0.03, 1e-6, 0.0).unwrap();
        assert_eq!(s.duration(), 1e-6);
        assert_eq!(s.voltage(1e-6), 0.0);
        let s = SpikeShape::new(0.14, 0.03, 2e-6, 2e-6).unwrap();
        assert_eq!(s.duration(), 4e-6);
    }

    #[test]
    fn validation() {
        let r = validate_shape(&reference(), &device(0.16, 0.15));
        assert!(r.no_disturb && r.learnability && r.passed());

        let r = validate_shape(&reference(), &device(1.5, 0.5));
        assert!(!r.learnability);
        assert_eq!(r.first_failure(), Some(ShapeCheck::Learnability));

        let null = SpikeShape { va_plus: 0.0, va_minus: 0.0, ..reference() };
        let r = validate_shape(&null, &device(0.16, 0.15));
        assert!(r.no_disturb);
        assert!(!r.learnability);
    }

    #[test]
    fn invalid_shapes() {
        assert!(SpikeShape::new(0.0, 0.03, 1e-6, 3e-6).is_err());
        assert!(SpikeShape::new(0.14, -0.03, 1e-6, 3e-6).is_err());
        assert!(SpikeShape::new(0.14, 0.03, 0.0, 3e-6).is_err());
        assert!(SpikeShape::new(0.14, 0.03, 1e-6, -1.0).is_err());
    }

    #[test]
    fn pairing_drive_opens_window() {
        // Post head starts as the pre tail starts.
        let s = reference();
        let dt = s.tail_plus;
        let t = dt;
        let v_net = s.voltage(t - dt) - s.voltage(t);
        assert!((v_net - 0.17).abs() < 1e-15);
        assert!(v_net > 0.16);
    }

    proptest! {
        #[test]
        fn zero_outside_window(t in -1e-3f64..1e-3, va in 0.001f64..1.0, vm in 0.0f64..1.0,
                               tp in 1e-9f64..1e-5, tm in 0.0f64..1e-5) {
            let s = SpikeShape::new(va, vm, tp, tm).unwrap();
            if t < 0.0 || t >= s.duration() {
                prop_assert_eq!(s.voltage(t), 0.0);
            }
            prop_assert!(s.voltage(t).abs() <= s.peak_magnitude());
        }
    }
}
