use std::io::Write;

use snnsim_core::device::{stdp_feasible, DeviceParams};
use snnsim_core::presets::{reference_device_uncalibrated, reference_shape};
use snnsim_core::waveform::{validate_shape, SpikeShape};

use crate::{CheckArgs, CliError, CliResult};

pub(crate) fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> CliResult<u8> {
    let (vp, vn) = (args.vp, args.vn);
    if !(vp > 0.0 && vn > 0.0) {
        return Err(CliError::Io(format!("thresholds must be positive, got vp={vp} vn={vn}")));
    }
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    let feasible = stdp_feasible(vp, vn);
    writeln!(
        out,
        "stdp feasibility: {} (|vp - vn| = {:.6} vs min(vp, vn) = {:.6})",
        if feasible { "feasible" } else { "infeasible" },
        (vp - vn).abs(),
        vp.min(vn)
    )?;
    let mut all = feasible;
    if let (Some(va_plus), Some(va_minus)) = (args.va_plus, args.va_minus) {
        let device = DeviceParams { v_p: vp, v_n: vn, ..reference_device_uncalibrated() };
        let shape = SpikeShape { va_plus, va_minus, ..reference_shape() };
        let report = validate_shape(&shape, &device);
        writeln!(
            out,
            "no-disturb: {} (max(va+, va-) = {:.6} vs min(vp, vn) = {:.6})",
            verdict(report.no_disturb),
            va_plus.max(va_minus),
            vp.min(vn)
        )?;
        writeln!(
            out,
            "learnability: {} (va+ + va- = {:.6} vs max(vp, vn) = {:.6})",
            verdict(report.learnability),
            va_plus + va_minus,
            vp.max(vn)
        )?;
        all &= report.passed();
    }
    Ok(if all { 0 } else { 4 })
}
