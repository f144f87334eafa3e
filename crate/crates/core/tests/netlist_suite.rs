use std::collections::BTreeMap;

use proptest::prelude::*;

use snnsim_core::netlist::{parse, parse_si, serialize, DeviceSpec, Netlist, NeuronSpec, SimSpec};
use snnsim_core::network::Stimulus;
use snnsim_core::waveform::{HeadStyle, SpikeShape, TailStyle};

fn positive() -> impl Strategy<Value = f64> {
    (1e-15f64..1e12).prop_map(|v| v)
}

fn name() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_.-]{0,7}"
}

fn stimulus() -> impl Strategy<Value = Stimulus> {
    prop_oneof![
        (0.0f64..1e-3, 1e-9f64..1e-3).prop_map(|(t0, period)| Stimulus::Periodic { t0, period }),
        prop::collection::vec(1e-9f64..1e-6, 0..6).prop_map(|gaps| {
            let mut t = 0.0;
            Stimulus::Times(
                gaps.into_iter()
                    .map(|g| {
                        t += g;
                        t
                    })
                    .collect(),
            )
        }),
        (0.0f64..1e7, any::<u64>()).prop_map(|(rate, seed)| Stimulus::Poisson { rate, seed }),
    ]
}

prop_compose! {
    fn netlist()(
        v_p in positive(), v_n in positive(),
        r_on in 1.0f64..1e6, span in 1.001f64..1e4,
        kappa_p in proptest::option::of(0.0f64..1e12),
        kappa_n in proptest::option::of(0.0f64..1e12),
        va_plus in positive(), va_minus in 0.0f64..1.0,
        tail_plus in positive(), tail_minus in 0.0f64..1e-3, tau_minus in positive(),
        head_exp in any::<bool>(), tail_flat in any::<bool>(),
        neurons in prop::collection::btree_map(name(), (positive(), positive(), positive()), 1..8),
        edges in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0.0f64..=1.0), 0..12),
        stims in prop::collection::vec((any::<prop::sample::Index>(), stimulus()), 0..5),
        dt in positive(), t_end in 0.0f64..1.0,
        record in prop::collection::vec(any::<prop::sample::Index>(), 0..4),
    ) -> Netlist {
        let r_off = r_on * span;
        let names: Vec<String> = neurons.keys().cloned().collect();
        let mut synapses = BTreeMap::new();
        for (a, b, f) in edges {
            let (a, b) = (a.get(&names).clone(), b.get(&names).clone());
            if a != b {
                synapses.insert((a, b), r_on + f * (r_off - r_on));
            }
        }
        let stimuli = stims.into_iter().map(|(i, s)| (i.get(&names).clone(), s)).collect();
        let mut rec: Vec<String> = Vec::new();
        for i in record {
            let item = i.get(&names).clone();
            if !rec.contains(&item) {
                rec.push(item);
            }
        }
        if let Some((a, b)) = synapses.keys().next() {
            rec.push(format!("{a}:{b}"));
        }
        Netlist {
            device: DeviceSpec { v_p, v_n, r_on, r_off, kappa_p, kappa_n },
            waveform: SpikeShape {
                va_plus, va_minus, tail_plus, tail_minus, tau_minus,
                head_style: if head_exp { HeadStyle::ExpDecay } else { HeadStyle::Flat },
                tail_style: if tail_flat { TailStyle::Flat } else { TailStyle::ExpRelax },
            },
            neurons: neurons
                .into_iter()
                .map(|(k, (v_thr, c_mem, r_leak))| (k, NeuronSpec { v_thr, c_mem, r_leak }))
                .collect(),
            synapses,
            stimuli,
            sim: SimSpec { dt, t_end, record: rec },
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn serialize_parse_round_trip(n in netlist()) {
        let text = serialize(&n);
        let parsed = parse(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(&parsed, &n);
        prop_assert_eq!(serialize(&parsed), text);
    }

    #[test]
    fn parse_never_panics(text in "[ -~\n\r\t]{0,200}") {
        // Either a netlist or at least one error, with positions in range.
        let lines = text.split('\n').count();
        if let Err(errors) = parse(&text) {
            prop_assert!(!errors.is_empty());
            for e in errors {
                prop_assert!(e.line >= 1 && e.line <= lines.max(1));
                prop_assert!(e.column >= 1);
            }
        }
    }
}

const BASE: &str = "\
device vp=160m vn=150m r_on=100k r_off=100M
waveform va_plus=140m va_minus=30m tail_plus=1u tail_minus=3u
neuron a
neuron b
neuron c r_leak=10G
synapse a c r=1M
synapse b c r=1M
stim a periodic t0=0 period=5u
stim b times 2u 9u
sim dt=10n t_end=50u
";

/// Faults that each break exactly the line they are written on.
const FAULTS: &[&str] = &[
    "bogus x=1",
    "neuron a",
    "synapse a a r=1M",
    "synapse a ghost r=1M",
    "synapse b a r=1",
    "synapse c a r=1M extra",
    "neuron d v_thr=0.3x",
    "neuron e c_mem=",
    "neuron f v_thr = 1",
    "stim ghost times 1u",
    "stim a times 1u",
    "stim c poisson rate=1k seed=-4",
    "device vp=1 vn=1 r_on=100k r_off=100M",
    "waveform va_plus=1 va_minus=1 tail_plus=1 tail_minus=1",
    "sim dt=1n t_end=1u",
    "neuron 9lives",
    "stim c times 3u 1u",
    "neuron g r_leak=-5",
];

#[test]
fn injected_faults_report_their_line() {
    let base: Vec<&str> = BASE.lines().collect();
    for fault in FAULTS {
        for at in 0..=base.len() {
            let mut lines = base.clone();
            lines.insert(at, fault);
            let text = lines.join("\n");
            let errors = parse(&text).expect_err(fault);
            let mut lines_hit: Vec<usize> = errors.iter().map(|e| e.line).collect();
            lines_hit.dedup();
            // Duplicates are reported on the later occurrence.
            let expected = match *fault {
                "neuron a" if at <= 2 => 4,
                "stim a times 1u" if at <= 7 => 9,
                "device vp=1 vn=1 r_on=100k r_off=100M" if at == 0 => 2,
                "waveform va_plus=1 va_minus=1 tail_plus=1 tail_minus=1" if at <= 1 => 3,
                "sim dt=1n t_end=1u" if at <= 9 => 11,
                _ => at + 1,
            };
            assert_eq!(lines_hit, vec![expected], "fault `{fault}` at line {}: {errors:?}", at + 1);
        }
    }
}

#[test]
fn si_table_is_exact() {
    let table = [
        ("1p", 1e-12),
        ("1n", 1e-9),
        ("10n", 1e-8),
        ("1u", 1e-6),
        ("140m", 0.14),
        ("30m", 0.03),
        ("1", 1.0),
        ("100k", 1e5),
        ("1M", 1e6),
        ("100M", 1e8),
        ("10G", 1e10),
        ("2.5u", 2.5e-6),
        ("0.1u", 1e-7),
        ("56u", 56e-6),
        ("13u", 13e-6),
        ("1.8", 1.8),
    ];
    for (text, value) in table {
        assert_eq!(parse_si(text), Some(value), "{text}");
    }
}
