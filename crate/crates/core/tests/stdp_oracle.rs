//! The STDP window produced by the network engine, checked against a direct
//! quadrature of the threshold overdrive of the analytic spike waveforms.

use snnsim_core::device::DeviceParams;
use snnsim_core::network::{pair_delta_g, stdp_window_sweep, DEFAULT_DT};
use snnsim_core::presets::{reference_device, reference_shape};
use snnsim_core::waveform::SpikeShape;

/// Synapse voltage while both ends may be driven: post input minus pre output.
/// An idle pre output is floating, which leaves no current path.
fn v_net(shape: &SpikeShape, t: f64, t_pre: f64, t_post: f64) -> Option<f64> {
    let active = |t0: f64| t >= t0 && t < t0 + shape.duration();
    if !active(t_pre) {
        return None;
    }
    let v_pre = shape.voltage(t - t_pre);
    let v_post = if active(t_post) { shape.voltage(t - t_post) } else { 0.0 };
    Some(v_post - v_pre)
}

/// Midpoint rule over `n` cells. Drift does not depend on state, so the
/// conductance change is the integrated rate times the conductance span.
fn oracle_delta_g(device: &DeviceParams, shape: &SpikeShape, delta_t: f64, n: usize) -> f64 {
    let (t_pre, t_post) = if delta_t >= 0.0 { (0.0, delta_t) } else { (-delta_t, 0.0) };
    let t_end = t_pre.max(t_post) + shape.duration();
    let h = t_end / n as f64;
    let mut dx = 0.0;
    for k in 0..n {
        let t = (k as f64 + 0.5) * h;
        if let Some(v) = v_net(shape, t, t_pre, t_post) {
            dx += device.drift_rate(0.0, v) * h;
        }
    }
    dx * (device.g_max() - device.g_min())
}

#[test]
fn calibrated_pair_hits_target() {
    let d = reference_device();
    let s = reference_shape();
    let plus = pair_delta_g(&d, &s, 1e6, 1e-6, DEFAULT_DT).unwrap();
    let minus = pair_delta_g(&d, &s, 1e6, -1e-6, DEFAULT_DT).unwrap();
    assert!((plus - 0.2e-6).abs() < 0.2e-6 * 1e-4, "{plus:e}");
    assert!((minus + 0.2e-6).abs() < 0.2e-6 * 1e-4, "{minus:e}");
}

#[test]
fn engine_matches_quadrature() {
    let d = reference_device();
    let s = reference_shape();
    for &delta_t in &[-3e-6, -2e-6, -1e-6, -0.5e-6, 0.3e-6, 1e-6, 1.5e-6, 2e-6, 3e-6] {
        let oracle = oracle_delta_g(&d, &s, delta_t, 2_000_000);
        let fine = pair_delta_g(&d, &s, 1e6, delta_t, 1e-9).unwrap();
        let coarse = pair_delta_g(&d, &s, 1e6, delta_t, DEFAULT_DT).unwrap();
        println!("dT={delta_t:e} oracle={oracle:e} dt=1ns {fine:e} dt=10ns {coarse:e}");
        // Errors are judged against the calibration target: near the window
        // edge the overdrive lasts only a few samples.
        let scale = 0.2e-6;
        assert!((fine - oracle).abs() < 0.005 * scale, "dT={delta_t:e}: {fine:e} vs {oracle:e}");
        assert!((coarse - oracle).abs() < 0.03 * scale, "dT={delta_t:e}: {coarse:e} vs {oracle:e}");
    }
}

#[test]
fn window_shape() {
    let d = reference_device();
    let s = reference_shape();
    let dts: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.1e-6).collect();
    let curve = stdp_window_sweep(&d, &s, &dts, DEFAULT_DT).unwrap();
    for &(dt, dg) in &curve {
        if dt.abs() >= 4e-6 - 1e-12 {
            assert_eq!(dg, 0.0, "no overlap at {dt:e}");
        }
        if dt > 0.0 {
            assert!(dg >= 0.0, "potentiation at {dt:e}: {dg:e}");
        }
        if dt < 0.0 {
            assert!(dg <= 0.0, "depression at {dt:e}: {dg:e}");
        }
    }
    let positive: Vec<f64> = curve.iter().filter(|p| p.0 >= 1e-6 - 1e-12).map(|p| p.1).collect();
    for w in positive.windows(2) {
        assert!(w[1] <= w[0], "{:e} then {:e}", w[0], w[1]);
    }
}
