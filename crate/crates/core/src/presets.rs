//! Reference parameter sets.
//!
//! Device drift rates are never typed in by hand: [`reference_device`] runs the
//! calibration once per process and caches the result.

use std::sync::OnceLock;

use crate::device::{calibrate_kappa, DeviceParams, CALIBRATION_TARGET_DG};
use crate::neuron::NeuronParams;
use crate::waveform::SpikeShape;

/// 140 mV / 30 mV, 1 us head, 3 us relaxing tail.
pub fn reference_shape() -> SpikeShape {
    SpikeShape::new(0.14, 0.03, 1e-6, 3e-6).expect("reference shape is valid")
}

/// Thresholds 0.16 V / 0.15 V over a 100 kOhm - 100 MOhm range, no drift.
pub fn reference_device_uncalibrated() -> DeviceParams {
    DeviceParams::new(0.16, 0.15, 100e3, 100e6, 0.0, 0.0).expect("reference device is valid")
}

/// Reference device with drift rates calibrated to 0.2 uS per pair at 1 us.
pub fn reference_device() -> DeviceParams {
    static CALIBRATED: OnceLock<DeviceParams> = OnceLock::new();
    *CALIBRATED.get_or_init(|| {
        let base = reference_device_uncalibrated();
        let shape = reference_shape();
        let (kp, kn) = calibrate_kappa(&base, &shape, CALIBRATION_TARGET_DG, shape.tail_plus)
            .expect("reference device calibrates");
        base.with_kappa(kp, kn)
    })
}

pub fn reference_neuron() -> NeuronParams {
    NeuronParams::with_defaults(reference_shape())
}
