use std::fmt::Write as _;
use std::io::Write;

use snnsim_core::device::{calibrate_kappa_with_dt, DeviceParams, CALIBRATION_TARGET_DG};
use snnsim_core::network::{check_resolution, stdp_window_sweep, DEFAULT_DT};
use snnsim_core::power::{fanout_point, ClaimCheck, SupplyModel};
use snnsim_core::presets::{reference_device_uncalibrated, reference_shape};
use snnsim_core::waveform::{default_tau_minus, validate_shape, SpikeShape};

use crate::output::{emit, num};
use crate::run::load_netlist;
use crate::{si_arg, CliError, CliResult, DeviceWaveformArgs, PowerArgs, StdpArgs};

/// Expands `start:stop:step` into points `start + k * step` up to `stop`,
/// snapped to a 1 fs grid so `-4u:4u:0.5u` yields exactly `-1e-6`.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("range must be start:stop:step, got {spec:?}"));
    };
    let (start, stop, step) = (si_arg(start)?, si_arg(stop)?, si_arg(step)?);
    if !(step > 0.0) {
        return Err(format!("range step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("range stop {stop} is below start {start}"));
    }
    let n = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
    if n > 10_000_000 {
        return Err(format!("range has too many points ({n})"));
    }
    Ok((0..=n)
        .map(|k| {
            let x = ((start + k as f64 * step) * 1e15).round() / 1e15;
            x + 0.0 // turns -0 into 0
        })
        .collect())
}

/// Device (kappas may be absent) and waveform from flags over the reference set.
fn from_flags(a: &DeviceWaveformArgs) -> CliResult<(DeviceParams, Option<f64>, Option<f64>, SpikeShape)> {
    let d = reference_device_uncalibrated();
    let device = DeviceParams {
        v_p: a.vp.unwrap_or(d.v_p),
        v_n: a.vn.unwrap_or(d.v_n),
        r_on: a.r_on.unwrap_or(d.r_on),
        r_off: a.r_off.unwrap_or(d.r_off),
        kappa_p: a.kappa_p.unwrap_or(0.0),
        kappa_n: a.kappa_n.unwrap_or(0.0),
    };
    device.validate().map_err(|e| CliError::Io(e.to_string()))?;
    let s = reference_shape();
    let tail_plus = a.tail_plus.unwrap_or(s.tail_plus);
    let tail_minus = a.tail_minus.unwrap_or(s.tail_minus);
    let shape = SpikeShape {
        va_plus: a.va_plus.unwrap_or(s.va_plus),
        va_minus: a.va_minus.unwrap_or(s.va_minus),
        tail_plus,
        tail_minus,
        tau_minus: a.tau_minus.unwrap_or_else(|| default_tau_minus(tail_plus, tail_minus)),
        ..s
    };
    shape.validate().map_err(|e| CliError::Io(e.to_string()))?;
    Ok((device, a.kappa_p, a.kappa_n, shape))
}

pub(crate) fn cmd_stdp_sweep(args: &StdpArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<u8> {
    let delta_ts = parse_range(&args.range).map_err(CliError::Io)?;
    let (mut device, kappa_p, kappa_n, shape, netlist_dt) = match &args.netlist {
        Some(path) => {
            let n = load_netlist(path)?;
            (n.device.params(), n.device.kappa_p, n.device.kappa_n, n.waveform, Some(n.sim.dt))
        }
        None => {
            let (d, kp, kn, s) = from_flags(&args.params)?;
            (d, kp, kn, s, None)
        }
    };
    let dt = args.dt.or(netlist_dt).unwrap_or(DEFAULT_DT);
    check_resolution(&shape, dt)?;

    let report = validate_shape(&shape, &device);
    if let Some(check) = report.first_failure() {
        return Err(CliError::Infeasible(format!("{check} check failed")));
    }
    if kappa_p.is_none() || kappa_n.is_none() {
        let (kp, kn) = calibrate_kappa_with_dt(&device, &shape, CALIBRATION_TARGET_DG, shape.tail_plus, dt)?;
        device = device.with_kappa(kappa_p.unwrap_or(kp), kappa_n.unwrap_or(kn));
        writeln!(err, "calibrated kappa_p={} kappa_n={}", num(device.kappa_p), num(device.kappa_n))?;
    }

    let curve = stdp_window_sweep(&device, &shape, &delta_ts, dt)?;
    let mut csv = String::from("delta_t_s,delta_g_s\n");
    for (t, g) in curve {
        writeln!(csv, "{},{}", num(t), num(g)).unwrap();
    }
    emit(args.out.as_deref(), &csv, out)?;
    Ok(0)
}

pub(crate) fn claim_text(check: &ClaimCheck, n: u64) -> String {
    let yes = |b: bool| if b { "yes" } else { "no" };
    format!(
        "claim check at {n} synapses: eta(drive only)={:.4} eta(base+drive)={:.4} claimed={:.2}\n  \
         within 1 percentage point: {}\n  \
         bracket [{}, {}] spans both readings: {}\n  \
         strict equality: {}\n",
        check.eta_driver_only,
        check.eta_total,
        check.claimed_eta,
        yes(check.within_one_point),
        check.bracket.0,
        check.bracket.1,
        yes(check.in_bracket),
        yes(check.strict_match),
    )
}

pub(crate) fn cmd_power_sweep(args: &PowerArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<u8> {
    let supply = SupplyModel::new(args.i_base, args.i_drive, args.vdd).map_err(|e| CliError::Io(e.to_string()))?;
    if args.fanout.is_empty() || args.fanout.contains(&0) {
        return Err(CliError::Io("fanout values must be at least 1".into()));
    }
    let i_ifn = args.i_ifn.unwrap_or(supply.i_drive);
    let mut csv = String::from("n_synapses,r_eq_ohm,i_mr_peak_a,i_ifn_a,eta,firing_power_w,baseline_power_w\n");
    for &n in &args.fanout {
        let p = fanout_point(n, args.r, args.va_plus, i_ifn, &supply).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            p.n_synapses,
            num(p.r_eq),
            num(p.i_mr_peak),
            num(p.i_ifn),
            num(p.eta),
            num(p.firing_power),
            num(p.baseline_power)
        )
        .unwrap();
    }
    emit(args.out.as_deref(), &csv, out)?;

    let n_max = *args.fanout.iter().max().expect("non-empty");
    let peak = fanout_point(n_max, args.r, args.va_plus, i_ifn, &supply).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(check) = ClaimCheck::new(peak.i_mr_peak, &supply) {
        // Keep stdout clean for CSV when no output path is given.
        let sink: &mut dyn Write = if args.out.is_some() { out } else { err };
        write!(sink, "{}", claim_text(&check, n_max))?;
    }
    Ok(0)
}
