use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use serde::Serialize;

use snnsim_core::device::DeviceParams;
use snnsim_core::netlist::{self, Netlist};
use snnsim_core::network::{check_resolution, TraceSet};
use snnsim_core::power::{PowerReport, SupplyModel};

use crate::output::{num, StagedFiles};
use crate::{CliError, CliResult, RunArgs};

#[derive(Debug, Serialize)]
pub struct NeuronSummary {
    pub name: String,
    pub spike_count: usize,
    pub spike_times_s: Vec<f64>,
    /// Spikes injected by stimuli rather than reached by integration.
    pub forced_spikes: usize,
}

#[derive(Debug, Serialize)]
pub struct SynapseSummary {
    pub synapse: String,
    pub initial_resistance_ohm: f64,
    pub final_resistance_ohm: f64,
    pub delta_g_s: f64,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub dt_s: f64,
    pub t_end_s: f64,
    /// Device as simulated, with calibrated drift rates filled in.
    pub device: DeviceParams,
    pub neurons: Vec<NeuronSummary>,
    pub synapses: Vec<SynapseSummary>,
    pub power: PowerReport,
    pub warnings: Vec<String>,
    /// Canonical form of the input netlist.
    pub config: String,
}

pub(crate) fn load_netlist(path: &std::path::Path) -> CliResult<Netlist> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    netlist::parse(&text).map_err(|errors| CliError::Parse { path: path.display().to_string(), errors })
}

fn neuron_csv(traces: &TraceSet) -> String {
    let mut s = String::from("time_s,neuron,v_mem_v,mode,i_in_a\n");
    for (k, &t) in traces.times.iter().enumerate() {
        for n in &traces.neurons {
            writeln!(s, "{},{},{},{},{}", num(t), n.name, num(n.v_mem[k]), n.mode[k].as_str(), num(n.i_in[k])).unwrap();
        }
    }
    s
}

fn synapse_csv(traces: &TraceSet, labels: &[String]) -> String {
    let mut s = String::from("time_s,synapse,resistance_ohm,v_net_v\n");
    for (k, &t) in traces.times.iter().enumerate() {
        for syn in &traces.synapses {
            let v = syn.v_net[k].map(num).unwrap_or_default();
            writeln!(s, "{},{},{},{v}", num(t), labels[syn.id], num(syn.resistance[k])).unwrap();
        }
    }
    s
}

pub(crate) fn cmd_run(args: &RunArgs, _out: &mut dyn Write, err: &mut dyn Write) -> CliResult<u8> {
    let netlist = load_netlist(&args.netlist)?;
    let warnings = netlist.warnings();
    for w in &warnings {
        writeln!(err, "warning: {w}")?;
    }
    let dt = args.dt.unwrap_or(netlist.sim.dt);
    check_resolution(&netlist.waveform, dt)?;
    let mut net = netlist.to_network(dt, args.seed)?;
    let labels = netlist.synapse_labels();
    let initial: Vec<f64> = netlist.synapses.values().copied().collect();

    let output = net.run(netlist.sim.t_end, dt, &netlist.record_selection(), &SupplyModel::default())?;
    let traces = &output.traces;

    let neurons = net
        .neurons()
        .iter()
        .enumerate()
        .map(|(id, n)| {
            let spikes: Vec<_> = traces.spikes.iter().filter(|s| s.neuron == id).collect();
            NeuronSummary {
                name: n.name.clone(),
                spike_count: spikes.len(),
                spike_times_s: spikes.iter().map(|s| s.time).collect(),
                forced_spikes: spikes.iter().filter(|s| s.forced).count(),
            }
        })
        .collect();
    let synapses = labels
        .iter()
        .enumerate()
        .map(|(id, label)| {
            let r_final = net.resistance(id);
            SynapseSummary {
                synapse: label.clone(),
                initial_resistance_ohm: initial[id],
                final_resistance_ohm: r_final,
                delta_g_s: 1.0 / r_final - 1.0 / initial[id],
            }
        })
        .collect();
    let summary = RunSummary {
        tool: "snnsim",
        version: env!("CARGO_PKG_VERSION"),
        seed: args.seed,
        dt_s: dt,
        t_end_s: netlist.sim.t_end,
        device: *net.device(),
        neurons,
        synapses,
        power: output.power,
        warnings,
        config: netlist::serialize(&netlist),
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');

    fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    let mut files = StagedFiles::default();
    files.stage(&args.out.join("traces_neurons.csv"), neuron_csv(traces).as_bytes())?;
    files.stage(&args.out.join("traces_synapses.csv"), synapse_csv(traces, &labels).as_bytes())?;
    files.stage(&args.out.join("summary.json"), json.as_bytes())?;
    files.commit()?;
    Ok(0)
}
