//! Line-oriented network description (`.snn`).
//!
//! ```text
//! # comment
//! device vp=160m vn=150m r_on=100k r_off=100M [kappa_p=..] [kappa_n=..]
//! waveform va_plus=140m va_minus=30m tail_plus=1u tail_minus=3u [tau_minus=1u] [head=flat|exp] [tail=flat|exp]
//! neuron <name> [v_thr=0.3] [c_mem=1p] [r_leak=10M]
//! synapse <pre> <post> r=1M
//! stim <name> periodic t0=0 period=5u
//! stim <name> times 1u 7u 12u
//! stim <name> poisson rate=100k seed=7
//! sim dt=10n t_end=100u [record=name,pre:post,...]
//! ```
//!
//! Keywords and keys are case sensitive and `key=value` takes no spaces.
//! Numbers accept one SI suffix out of `p n u m k M G`. The parser collects
//! every error it finds instead of stopping at the first one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::device::{calibrate_kappa_with_dt, stdp_feasible, DeviceParams};
use crate::error::{Result as SimResult, SimError};
use crate::network::{Network, RecordSelection, Selection, Stimulus};
use crate::neuron::{NeuronParams, DEFAULT_C_MEM, DEFAULT_R_LEAKY, DEFAULT_V_THR};
use crate::waveform::{default_tau_minus, validate_shape, HeadStyle, SpikeShape, TailStyle};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceSpec {
    pub v_p: f64,
    pub v_n: f64,
    pub r_on: f64,
    pub r_off: f64,
    /// Absent drift rates are calibrated when the network is built.
    pub kappa_p: Option<f64>,
    pub kappa_n: Option<f64>,
}

impl DeviceSpec {
    /// Device with absent drift rates set to zero.
    pub fn params(&self) -> DeviceParams {
        DeviceParams {
            v_p: self.v_p,
            v_n: self.v_n,
            r_on: self.r_on,
            r_off: self.r_off,
            kappa_p: self.kappa_p.unwrap_or(0.0),
            kappa_n: self.kappa_n.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronSpec {
    pub v_thr: f64,
    pub c_mem: f64,
    pub r_leak: f64,
}

impl Default for NeuronSpec {
    fn default() -> Self {
        Self { v_thr: DEFAULT_V_THR, c_mem: DEFAULT_C_MEM, r_leak: DEFAULT_R_LEAKY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub dt: f64,
    pub t_end: f64,
    /// Neuron names and `pre:post` synapse labels; empty records everything.
    pub record: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub device: DeviceSpec,
    pub waveform: SpikeShape,
    pub neurons: BTreeMap<String, NeuronSpec>,
    /// Initial resistance keyed by `(pre, post)`.
    pub synapses: BTreeMap<(String, String), f64>,
    pub stimuli: BTreeMap<String, Stimulus>,
    pub sim: SimSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.token.is_empty() {
            write!(f, " (`{}`)", self.token)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

fn si_exponent(c: char) -> Option<i32> {
    Some(match c {
        'p' => -12,
        'n' => -9,
        'u' => -6,
        'm' => -3,
        'k' => 3,
        'M' => 6,
        'G' => 9,
        _ => return None,
    })
}

/// Parses a number with an optional SI suffix. The suffix is folded into the
/// decimal exponent before conversion, so `140m` is exactly the double nearest
/// 0.14.
pub fn parse_si(text: &str) -> Option<f64> {
    let (mantissa, suffix_exp) = match text.chars().last().and_then(si_exponent) {
        Some(e) => (&text[..text.len() - 1], e),
        None => (text, 0),
    };
    if mantissa.is_empty() || !mantissa.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return None;
    }
    let (digits, exp) = match mantissa.find(['e', 'E']) {
        Some(i) => (&mantissa[..i], mantissa[i + 1..].parse::<i32>().ok()?),
        None => (mantissa, 0),
    };
    if digits.is_empty() || !digits.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    let value: f64 = format!("{digits}e{}", exp.checked_add(suffix_exp)?).parse().ok()?;
    value.is_finite().then_some(value)
}

fn fmt_num(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token { text: &line[b..byte], col: c + 1 });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { text: &line[b..], col: c + 1 });
    }
    out
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

struct KeyVal<'a> {
    key: &'a str,
    value: &'a str,
    value_col: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Positivity {
    Positive,
    NonNegative,
}

struct LineCtx<'a, 'e> {
    line: usize,
    keyword: Token<'a>,
    errors: &'e mut Vec<ParseError>,
}

impl LineCtx<'_, '_> {
    fn error(&mut self, col: usize, message: impl Into<String>, token: &str) {
        self.errors.push(ParseError { line: self.line, column: col, message: message.into(), token: token.into() });
    }

    fn at_keyword(&mut self, message: impl Into<String>) {
        let kw = self.keyword;
        self.error(kw.col, message, kw.text);
    }

    /// Splits `key=value` tokens, rejecting malformed, unknown and repeated keys.
    fn key_values<'b>(&mut self, tokens: &[Token<'b>], allowed: &[&str]) -> Vec<KeyVal<'b>> {
        let mut out: Vec<KeyVal<'b>> = Vec::new();
        for tok in tokens {
            let Some((key, value)) = tok.text.split_once('=') else {
                self.error(tok.col, "expected key=value", tok.text);
                continue;
            };
            if key.is_empty() || value.is_empty() {
                self.error(tok.col, "expected key=value with no spaces around '='", tok.text);
                continue;
            }
            if !allowed.contains(&key) {
                self.error(tok.col, format!("unknown key {key} for {}", self.keyword.text), tok.text);
                continue;
            }
            if out.iter().any(|kv| kv.key == key) {
                self.error(tok.col, format!("duplicate key {key}"), tok.text);
                continue;
            }
            out.push(KeyVal { key, value, value_col: tok.col + key.chars().count() + 1 });
        }
        out
    }

    fn number(&mut self, kv: &KeyVal<'_>, sign: Positivity) -> Option<f64> {
        let Some(v) = parse_si(kv.value) else {
            self.error(kv.value_col, format!("malformed number for {}", kv.key), kv.value);
            return None;
        };
        let ok = match sign {
            Positivity::Positive => v > 0.0,
            Positivity::NonNegative => v >= 0.0,
        };
        if !ok {
            let need = if sign == Positivity::Positive { "positive" } else { "non-negative" };
            self.error(kv.value_col, format!("{} must be {need}", kv.key), kv.value);
            return None;
        }
        Some(v)
    }

    /// Required numeric key; reports a missing key at the keyword.
    fn required(&mut self, kvs: &[KeyVal<'_>], key: &str, sign: Positivity) -> Option<f64> {
        match kvs.iter().find(|kv| kv.key == key) {
            Some(kv) => self.number(kv, sign),
            None => {
                self.at_keyword(format!("missing required key {key}"));
                None
            }
        }
    }

    fn optional(&mut self, kvs: &[KeyVal<'_>], key: &str, sign: Positivity) -> Result<Option<f64>, ()> {
        match kvs.iter().find(|kv| kv.key == key) {
            Some(kv) => self.number(kv, sign).map(Some).ok_or(()),
            None => Ok(None),
        }
    }
}

type RecordPositions = Vec<(String, usize)>;

/// A synapse line awaiting name and bounds resolution.
struct PendingSynapse {
    pre: String,
    post: String,
    r: f64,
    line: usize,
    pre_col: usize,
    post_col: usize,
    r_col: usize,
    r_text: String,
}

#[derive(Default)]
struct Partial {
    device: Option<(usize, DeviceSpec)>,
    waveform: Option<(usize, SpikeShape)>,
    /// Sim block line and the column of each record entry.
    sim: Option<(usize, SimSpec, RecordPositions)>,
    neurons: BTreeMap<String, NeuronSpec>,
    synapses: Vec<PendingSynapse>,
    stimuli: Vec<(String, Stimulus, usize, usize)>,
    /// Any block keyword seen, even if its contents were invalid.
    seen_device: bool,
    seen_waveform: bool,
    seen_sim: bool,
}

/// Parses a netlist, returning every error found.
pub fn parse(text: &str) -> Result<Netlist, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut p = Partial::default();
    let mut line_count = 0;

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if !raw.is_empty() {
            line_count = line_no;
        }
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let tokens = tokenize(content);
        let Some((&keyword, args)) = tokens.split_first() else { continue };
        let mut ctx = LineCtx { line: line_no, keyword, errors: &mut errors };
        match keyword.text {
            "device" => parse_device(&mut ctx, args, &mut p),
            "waveform" => parse_waveform(&mut ctx, args, &mut p),
            "neuron" => parse_neuron(&mut ctx, args, &mut p),
            "synapse" => parse_synapse(&mut ctx, args, &mut p),
            "stim" => parse_stim(&mut ctx, args, &mut p),
            "sim" => parse_sim(&mut ctx, args, &mut p),
            other => ctx.error(keyword.col, format!("unknown keyword {other}"), other),
        }
    }

    let end_line = line_count.max(1);
    let mut missing = |seen: bool, what: &str| {
        if !seen {
            errors.push(ParseError {
                line: end_line,
                column: 1,
                message: format!("missing mandatory {what} block"),
                token: String::new(),
            });
        }
    };
    missing(p.seen_device, "device");
    missing(p.seen_waveform, "waveform");
    missing(p.seen_sim, "sim");

    let netlist = cross_validate(p, &mut errors);
    match netlist {
        Some(n) if errors.is_empty() => Ok(n),
        _ => {
            errors.sort_by_key(|e| (e.line, e.column));
            Err(errors)
        }
    }
}

fn parse_device(ctx: &mut LineCtx<'_, '_>, args: &[Token<'_>], p: &mut Partial) {
    if p.seen_device {
        ctx.at_keyword("duplicate device block");
        return;
    }
    p.seen_device = true;
    let kvs = ctx.key_values(args, &["vp", "vn", "r_on", "r_off", "kappa_p", "kappa_n"]);
    let v_p = ctx.required(&kvs, "vp", Positivity::Positive);
    let v_n = ctx.required(&kvs, "vn", Positivity::Positive);
    let r_on = ctx.required(&kvs, "r_on", Positivity::Positive);
    let r_off = ctx.required(&kvs, "r_off", Positivity::Positive);
    let kappa_p = ctx.optional(&kvs, "kappa_p", Positivity::NonNegative);
    let kappa_n = ctx.optional(&kvs, "kappa_n", Positivity::NonNegative);
    let (Some(v_p), Some(v_n), Some(r_on), Some(r_off), Ok(kappa_p), Ok(kappa_n)) =
        (v_p, v_n, r_on, r_off, kappa_p, kappa_n)
    else {
        return;
    };
    if r_on >= r_off {
        ctx.at_keyword("device needs r_on < r_off");
        return;
    }
    p.device = Some((ctx.line, DeviceSpec { v_p, v_n, r_on, r_off, kappa_p, kappa_n }));
}

fn parse_style<T>(ctx: &mut LineCtx<'_, '_>, kvs: &[KeyVal<'_>], key: &str, flat: T, exp: T, default: T) -> Option<T> {
    match kvs.iter().find(|kv| kv.key == key) {
        None => Some(default),
        Some(kv) => match kv.value {
            "flat" => Some(flat),
            "exp" => Some(exp),
            other => {
                ctx.error(kv.value_col, format!("{key} must be flat or exp"), other);
                None
            }
        },
    }
}

fn parse_waveform(ctx: &mut LineCtx<'_, '_>, args: &[Token<'_>], p: &mut Partial) {
    if p.seen_waveform {
        ctx.at_keyword("duplicate waveform block");
        return;
    }
    p.seen_waveform = true;
    let kvs = ctx.key_values(args, &["va_plus", "va_minus", "tail_plus", "tail_minus", "tau_minus", "head", "tail"]);
    let va_plus = ctx.required(&kvs, "va_plus", Positivity::Positive);
    let va_minus = ctx.required(&kvs, "va_minus", Positivity::NonNegative);
    let tail_plus = ctx.required(&kvs, "tail_plus", Positivity::Positive);
    let tail_minus = ctx.required(&kvs, "tail_minus", Positivity::NonNegative);
    let tau_minus = ctx.optional(&kvs, "tau_minus", Positivity::Positive);
    let head = parse_style(ctx, &kvs, "head", HeadStyle::Flat, HeadStyle::ExpDecay, HeadStyle::Flat);
    let tail = parse_style(ctx, &kvs, "tail", TailStyle::Flat, TailStyle::ExpRelax, TailStyle::ExpRelax);
    let (
        Some(va_plus),
        Some(va_minus),
        Some(tail_plus),
        Some(tail_minus),
        Ok(tau_minus),
        Some(head_style),
        Some(tail_style),
    ) = (va_plus, va_minus, tail_plus, tail_minus, tau_minus, head, tail)
    else {
        return;
    };
    let shape = SpikeShape {
        va_plus,
        va_minus,
        tail_plus,
        tail_minus,
        tau_minus: tau_minus.unwrap_or_else(|| default_tau_minus(tail_plus, tail_minus)),
        head_style,
        tail_style,
    };
    p.waveform = Some((ctx.line, shape));
}

fn name_token(ctx: &mut LineCtx<'_, '_>, tok: Option<&Token<'_>>, what: &str) -> Option<String> {
    match tok {
        None => {
            ctx.at_keyword(format!("missing {what}"));
            None
        }
        Some(t) if !valid_name(t.text) => {
            ctx.error(t.col, format!("invalid {what}"), t.text);
            None
        }
        Some(t) => Some(t.text.to_string()),
    }
}

fn parse_neuron(ctx: &mut LineCtx<'_, '_>, args: &[Token<'_>], p: &mut Partial) {
    let name = name_token(ctx, args.first(), "neuron name");
    let kvs = ctx.key_values(args.get(1..).unwrap_or(&[]), &["v_thr", "c_mem", "r_leak"]);
    let d = NeuronSpec::default();
    let v_thr = ctx.optional(&kvs, "v_thr", Positivity::Positive);
    let c_mem = ctx.optional(&kvs, "c_mem", Positivity::Positive);
    let r_leak = ctx.optional(&kvs, "r_leak", Positivity::Positive);
    let Some(name) = name else { return };
    if p.neurons.contains_key(&name) {
        let tok = args[0];
        ctx.error(tok.col, format!("duplicate name {name}"), tok.text);
        return;
    }
    let (Ok(v_thr), Ok(c_mem), Ok(r_leak)) = (v_thr, c_mem, r_leak) else {
        // Reserve the name so later references resolve.
        p.neurons.insert(name, d);
        return;
    };
    let spec = NeuronSpec {
        v_thr: v_thr.unwrap_or(d.v_thr),
        c_mem: c_mem.unwrap_or(d.c_mem),
        r_leak: r_leak.unwrap_or(d.r_leak),
    };
    p.neurons.insert(name, spec);
}

fn parse_synapse(ctx: &mut LineCtx<'_, '_>, args: &[Token<'_>], p: &mut Partial) {
    let pre = name_token(ctx, args.first(), "synapse pre neuron");
    let post = if args.is_empty() { None } else { name_token(ctx, args.get(1), "synapse post neuron") };
    let kvs = ctx.key_values(args.get(2..).unwrap_or(&[]), &["r"]);
    let r = ctx.required(&kvs, "r", Positivity::Positive);
    let (Some(pre), Some(post), Some(r)) = (pre, post, r) else { return };
    let (r_col, r_text) = kvs
        .iter()
        .find(|kv| kv.key == "r")
        .map_or((ctx.keyword.col, String::new()), |kv| (kv.value_col, kv.value.to_string()));
    if pre == post {
        let tok = args[1];
        ctx.error(tok.col, "self-synapse", tok.text);
        return;
    }
    if p.synapses.iter().any(|s| s.pre == pre && s.post == post) {
        ctx.at_keyword(format!("duplicate synapse {pre} {post}"));
        return;
    }
    p.synapses.push(PendingSynapse {
        pre,
        post,
        r,
        line: ctx.line,
        pre_col: args[0].col,
        post_col: args[1].col,
        r_col,
        r_text,
    });
}

fn parse_stim(ctx: &mut LineCtx<'_, '_>, args: &[Token<'_>], p: &mut Partial) {
    let Some(name) = name_token(ctx, args.first(), "stimulus neuron") else { return };
    let name_col = args[0].col;
    let Some(kind) = args.get(1) else {
        ctx.at_keyword("missing stimulus kind (periodic, times, poisson)");
        return;
    };
    let rest = &args[2..];
    let stim = match kind.text {
        "periodic" => {
            let kvs = ctx.key_values(rest, &["t0", "period"]);
            let t0 = ctx.required(&kvs, "t0", Positivity::NonNegative);
            let period = ctx.required(&kvs, "period", Positivity::Positive);
            match (t0, period) {
                (Some(t0), Some(period)) => Stimulus::Periodic { t0, period },
                _ => return,
            }
        }
        "times" => {
            let mut times = Vec::with_capacity(rest.len());
            let mut ok = true;
            for tok in rest {
                match parse_si(tok.text) {
                    Some(t) if t >= 0.0 => {
                        if times.last().is_some_and(|&last| t <= last) {
                            ctx.error(tok.col, "stimulus times must be strictly increasing", tok.text);
                            ok = false;
                        }
                        times.push(t);
                    }
                    Some(_) => {
                        ctx.error(tok.col, "stimulus time must be non-negative", tok.text);
                        ok = false;
                    }
                    None => {
                        ctx.error(tok.col, "malformed number", tok.text);
                        ok = false;
                    }
                }
            }
            if !ok {
                return;
            }
            Stimulus::Times(times)
        }
        "poisson" => {
            let kvs = ctx.key_values(rest, &["rate", "seed"]);
            let rate = ctx.required(&kvs, "rate", Positivity::NonNegative);
            let seed = match kvs.iter().find(|kv| kv.key == "seed") {
                Some(kv) => match kv.value.parse::<u64>() {
                    Ok(s) => Some(s),
                    Err(_) => {
                        ctx.error(kv.value_col, "seed must be an unsigned 64-bit integer", kv.value);
                        None
                    }
                },
                None => {
                    ctx.at_keyword("missing required key seed");
                    None
                }
            };
            match (rate, seed) {
                (Some(rate), Some(seed)) => Stimulus::Poisson { rate, seed },
                _ => return,
            }
        }
        other => {
            ctx.error(kind.col, format!("unknown stimulus kind {other}"), other);
            return;
        }
    };
    if p.stimuli.iter().any(|s| s.0 == name) {
        ctx.error(name_col, format!("duplicate stimulus for {name}"), &name);
        return;
    }
    p.stimuli.push((name, stim, ctx.line, name_col));
}

fn parse_sim(ctx: &mut LineCtx<'_, '_>, args: &[Token<'_>], p: &mut Partial) {
    if p.seen_sim {
        ctx.at_keyword("duplicate sim block");
        return;
    }
    p.seen_sim = true;
    let kvs = ctx.key_values(args, &["dt", "t_end", "record"]);
    let dt = ctx.required(&kvs, "dt", Positivity::Positive);
    let t_end = ctx.required(&kvs, "t_end", Positivity::NonNegative);
    let mut record = Vec::new();
    let mut positions = Vec::new();
    let mut ok = true;
    if let Some(kv) = kvs.iter().find(|kv| kv.key == "record") {
        let mut col = kv.value_col;
        for item in kv.value.split(',') {
            let valid = match item.split_once(':') {
                Some((a, b)) => valid_name(a) && valid_name(b),
                None => valid_name(item),
            };
            if !valid {
                ctx.error(col, "invalid record entry", item);
                ok = false;
            } else if record.iter().any(|r| r == item) {
                ctx.error(col, format!("duplicate record entry {item}"), item);
                ok = false;
            } else {
                record.push(item.to_string());
                positions.push((item.to_string(), col));
            }
            col += item.chars().count() + 1;
        }
    }
    if let (Some(dt), Some(t_end), true) = (dt, t_end, ok) {
        p.sim = Some((ctx.line, SimSpec { dt, t_end, record }, positions));
    }
}

fn cross_validate(p: Partial, errors: &mut Vec<ParseError>) -> Option<Netlist> {
    let mut err = |line: usize, column: usize, message: String, token: &str| {
        errors.push(ParseError { line, column, message, token: token.to_string() });
    };

    let mut synapses = BTreeMap::new();
    for s in &p.synapses {
        let mut ok = true;
        if !p.neurons.contains_key(&s.pre) {
            err(s.line, s.pre_col, format!("unresolved endpoint {}", s.pre), &s.pre);
            ok = false;
        }
        if !p.neurons.contains_key(&s.post) {
            err(s.line, s.post_col, format!("unresolved endpoint {}", s.post), &s.post);
            ok = false;
        }
        if let Some((_, d)) = &p.device {
            if !(s.r >= d.r_on && s.r <= d.r_off) {
                let msg = format!("resistance {:e} out of [{:e}, {:e}]", s.r, d.r_on, d.r_off);
                err(s.line, s.r_col, msg, &s.r_text);
                ok = false;
            }
        }
        if ok {
            synapses.insert((s.pre.clone(), s.post.clone()), s.r);
        }
    }

    let mut stimuli = BTreeMap::new();
    for (name, stim, line, col) in p.stimuli {
        if !p.neurons.contains_key(&name) {
            err(line, col, format!("stimulus for unknown neuron {name}"), &name);
        } else {
            stimuli.insert(name, stim);
        }
    }

    if let Some((line, _, positions)) = &p.sim {
        for (item, col) in positions {
            let resolved = match item.split_once(':') {
                Some((a, b)) => p.synapses.iter().any(|s| s.pre == a && s.post == b),
                None => p.neurons.contains_key(item),
            };
            if !resolved {
                err(*line, *col, format!("record entry {item} does not resolve"), item);
            }
        }
    }

    let (_, device) = p.device?;
    let (_, waveform) = p.waveform?;
    let (_, sim, _) = p.sim?;
    Some(Netlist { device, waveform, neurons: p.neurons, synapses, stimuli, sim })
}

/// Canonical text: fixed block order, sorted names, shortest round-trip
/// numbers, every neuron option spelled out.
pub fn serialize(net: &Netlist) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let d = &net.device;
    write!(
        out,
        "device vp={} vn={} r_on={} r_off={}",
        fmt_num(d.v_p),
        fmt_num(d.v_n),
        fmt_num(d.r_on),
        fmt_num(d.r_off)
    )
    .unwrap();
    if let Some(k) = d.kappa_p {
        write!(out, " kappa_p={}", fmt_num(k)).unwrap();
    }
    if let Some(k) = d.kappa_n {
        write!(out, " kappa_n={}", fmt_num(k)).unwrap();
    }
    out.push('\n');

    let w = &net.waveform;
    let head = match w.head_style {
        HeadStyle::Flat => "flat",
        HeadStyle::ExpDecay => "exp",
    };
    let tail = match w.tail_style {
        TailStyle::Flat => "flat",
        TailStyle::ExpRelax => "exp",
    };
    writeln!(
        out,
        "waveform va_plus={} va_minus={} tail_plus={} tail_minus={} tau_minus={} head={head} tail={tail}",
        fmt_num(w.va_plus),
        fmt_num(w.va_minus),
        fmt_num(w.tail_plus),
        fmt_num(w.tail_minus),
        fmt_num(w.tau_minus),
    )
    .unwrap();

    for (name, n) in &net.neurons {
        writeln!(
            out,
            "neuron {name} v_thr={} c_mem={} r_leak={}",
            fmt_num(n.v_thr),
            fmt_num(n.c_mem),
            fmt_num(n.r_leak)
        )
        .unwrap();
    }
    for ((pre, post), r) in &net.synapses {
        writeln!(out, "synapse {pre} {post} r={}", fmt_num(*r)).unwrap();
    }
    for (name, s) in &net.stimuli {
        match s {
            Stimulus::Periodic { t0, period } => {
                writeln!(out, "stim {name} periodic t0={} period={}", fmt_num(*t0), fmt_num(*period)).unwrap()
            }
            Stimulus::Times(ts) => {
                write!(out, "stim {name} times").unwrap();
                for t in ts {
                    write!(out, " {}", fmt_num(*t)).unwrap();
                }
                out.push('\n');
            }
            Stimulus::Poisson { rate, seed } => {
                writeln!(out, "stim {name} poisson rate={} seed={seed}", fmt_num(*rate)).unwrap()
            }
        }
    }
    write!(out, "sim dt={} t_end={}", fmt_num(net.sim.dt), fmt_num(net.sim.t_end)).unwrap();
    if !net.sim.record.is_empty() {
        write!(out, " record={}", net.sim.record.join(",")).unwrap();
    }
    out.push('\n');
    out
}

impl Netlist {
    pub fn neuron_names(&self) -> Vec<&str> {
        self.neurons.keys().map(String::as_str).collect()
    }

    /// Non-fatal findings about the device/waveform pairing.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let report = validate_shape(&self.waveform, &self.device.params());
        for check in report.failures() {
            out.push(format!("waveform fails the {check} check against the device"));
        }
        if !stdp_feasible(self.device.v_p, self.device.v_n) {
            out.push(format!(
                "device thresholds vp={} vn={} do not satisfy |vp - vn| < min(vp, vn)",
                self.device.v_p, self.device.v_n
            ));
        }
        out
    }

    /// Device with absent drift rates filled by calibration at timestep `dt`.
    pub fn resolved_device(&self, dt: f64) -> SimResult<DeviceParams> {
        let base = self.device.params();
        if self.device.kappa_p.is_some() && self.device.kappa_n.is_some() {
            return Ok(base);
        }
        let (kp, kn) = calibrate_kappa_with_dt(
            &base,
            &self.waveform,
            crate::device::CALIBRATION_TARGET_DG,
            self.waveform.tail_plus,
            dt,
        )?;
        Ok(base.with_kappa(self.device.kappa_p.unwrap_or(kp), self.device.kappa_n.unwrap_or(kn)))
    }

    /// Builds the simulation network. Neuron and synapse ids follow the
    /// sorted order of the netlist. With `seed`, the k-th Poisson stimulus
    /// (in neuron-name order) is reseeded with `seed + k`.
    pub fn to_network(&self, dt: f64, seed: Option<u64>) -> SimResult<Network> {
        let device = self.resolved_device(dt)?;
        let mut net = Network::new(device, self.waveform)?;
        for (name, n) in &self.neurons {
            let params = NeuronParams { c_mem: n.c_mem, r_leaky: n.r_leak, v_thr: n.v_thr, shape: self.waveform };
            net.add_neuron(name.clone(), params)?;
        }
        let id = |name: &str| -> SimResult<usize> {
            self.neurons
                .keys()
                .position(|k| k == name)
                .ok_or_else(|| SimError::InvalidParameter(format!("unknown neuron {name}")))
        };
        for ((pre, post), r) in &self.synapses {
            net.add_synapse(id(pre)?, id(post)?, *r)?;
        }
        let mut poisson_index = 0u64;
        for (name, stim) in &self.stimuli {
            let stim = match (stim, seed) {
                (Stimulus::Poisson { .. }, Some(s)) => {
                    let out = stim.reseeded(s.wrapping_add(poisson_index));
                    poisson_index += 1;
                    out
                }
                _ => stim.clone(),
            };
            net.set_stimulus(id(name)?, stim)?;
        }
        Ok(net)
    }

    /// Recording selection for the network built by [`to_network`](Self::to_network).
    pub fn record_selection(&self) -> RecordSelection {
        if self.sim.record.is_empty() {
            return RecordSelection::all();
        }
        let mut neurons = BTreeSet::new();
        let mut synapses = BTreeSet::new();
        for item in &self.sim.record {
            match item.split_once(':') {
                Some((a, b)) => {
                    let key = (a.to_string(), b.to_string());
                    if let Some(i) = self.synapses.keys().position(|k| *k == key) {
                        synapses.insert(i);
                    }
                }
                None => {
                    if let Some(i) = self.neurons.keys().position(|k| k == item) {
                        neurons.insert(i);
                    }
                }
            }
        }
        RecordSelection {
            neurons: Selection::Only(neurons.into_iter().collect()),
            synapses: Selection::Only(synapses.into_iter().collect()),
            every: 1,
        }
    }

    /// Synapse labels in id order, `pre:post`.
    pub fn synapse_labels(&self) -> Vec<String> {
        self.synapses.keys().map(|(a, b)| format!("{a}:{b}")).collect()
    }
}
