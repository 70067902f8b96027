//! Scenario files.
//!
//! INI layout with five sections, `key = value` lines and `#` comments. Keys
//! are case-sensitive, angles are in degrees and durations in ns. Every key is
//! optional; missing keys take the defaults listed on the structs below.
//!
//! ```ini
//! [source]
//! input_theta_deg = 30
//! [control]
//! policy = OrGate
//! [sweep]
//! kind = analyzer
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use ini::{Ini, ParseOption};
use thiserror::Error;

use crate::feedforward::{LatencyBudget, TimingConfig};
use crate::fockstate::JonesVector;
use crate::imperfections::{default_coherence_time_ns, overlap_from_delay};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("key `{0}` appears outside any section")]
    KeyOutsideSection(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("section [{0}] appears more than once")]
    DuplicateSection(String),
    #[error("key `{key}` appears more than once in [{section}]")]
    DuplicateKey { section: String, key: String },
    #[error("unknown key `{key}` in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("cannot parse `{key}` = {value:?}: expected {expected}")]
    BadValue { key: String, value: String, expected: &'static str },
    #[error("`{key}` out of range: {msg}")]
    Range { key: String, msg: String },
    #[error("[sweep] needs a `kind`")]
    MissingSweepKind,
}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Accept `D2a` only, no feed-forward.
    Passive,
    /// Accept either ancilla detector and correct `D2b` with the Pockels cell.
    OrGate,
    /// Accept either ancilla detector with the Pockels cell disconnected.
    OrGateNoCorrection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Analyzer,
    Delay,
    Overlap,
}

/// What the overlap sweep scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlapAxis {
    /// Overlap `v` directly.
    V,
    /// Relative path delay in ns, mapped through the Gaussian overlap.
    DelayNs,
}

macro_rules! keyword_enum {
    ($ty:ty, $expected:literal, { $($text:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = &'static str;
            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                match s {
                    $($text => Ok($variant),)+
                    _ => Err($expected),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($text); })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(Policy, "Passive, OrGate or OrGateNoCorrection", {
    "Passive" => Policy::Passive,
    "OrGate" => Policy::OrGate,
    "OrGateNoCorrection" => Policy::OrGateNoCorrection,
});

keyword_enum!(SweepKind, "analyzer, delay or overlap", {
    "analyzer" => SweepKind::Analyzer,
    "delay" => SweepKind::Delay,
    "overlap" => SweepKind::Overlap,
});

keyword_enum!(OverlapAxis, "v or delay_ns", {
    "v" => OverlapAxis::V,
    "delay_ns" => OverlapAxis::DelayNs,
});

#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    /// Linear polarization angle of the input photon (30).
    pub input_theta_deg: f64,
    /// Phase of the `V` amplitude relative to `H` (0).
    pub input_phase_deg: f64,
    /// Prepare the ancilla at +45° with a half-wave plate (true).
    pub ancilla_prep: bool,
    /// Detectable pairs per minute (440).
    pub pair_rate_per_min: f64,
}

impl Default for Source {
    fn default() -> Self {
        Source { input_theta_deg: 30.0, input_phase_deg: 0.0, ancilla_prep: true, pair_rate_per_min: 440.0 }
    }
}

impl Source {
    pub fn input(&self) -> JonesVector {
        JonesVector::elliptical(self.input_theta_deg, self.input_phase_deg)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitParams {
    /// Fiber coupling efficiency (0.5).
    pub coupling_eta: f64,
    /// Storage delay of the output photon (100 ns).
    pub fiber_delay_ns: f64,
    /// Uncompensated fiber rotation (0°).
    pub residual_rotation_deg: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams { coupling_eta: 0.5, fiber_delay_ns: 100.0, residual_rotation_deg: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Control {
    /// OrGate.
    pub policy: Policy,
    /// 18 / 38 / 18 / 26 ns with a 33 ns pulse.
    pub latency: LatencyBudget,
    pub extra_electronic_delay_ns: f64,
    /// 3 ns.
    pub edge_sigma_ns: f64,
    /// Follows the TTL pulse width when unset.
    pub hold_ns: Option<f64>,
}

impl Default for Control {
    fn default() -> Self {
        let t = TimingConfig::default();
        Control {
            policy: Policy::OrGate,
            latency: LatencyBudget::default(),
            extra_electronic_delay_ns: t.extra_electronic_delay_ns,
            edge_sigma_ns: t.edge_sigma_ns,
            hold_ns: t.hold_ns,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Imperfections {
    /// Photon indistinguishability (1).
    pub overlap_v: f64,
    /// Path-length mismatch between the photons (0 ns).
    pub relative_delay_ns: f64,
    /// From 10 nm filters at 702.2 nm.
    pub coherence_time_ns: f64,
    pub efficiency_d1: f64,
    pub efficiency_d2a: f64,
    pub efficiency_d2b: f64,
}

impl Default for Imperfections {
    fn default() -> Self {
        Imperfections {
            overlap_v: 1.0,
            relative_delay_ns: 0.0,
            coherence_time_ns: default_coherence_time_ns(),
            efficiency_d1: 1.0,
            efficiency_d2a: 1.0,
            efficiency_d2b: 1.0,
        }
    }
}

impl Imperfections {
    /// `overlap_v` times the Gaussian overlap from the path mismatch.
    pub fn effective_overlap(&self) -> f64 {
        self.overlap_v * overlap_from_delay(self.relative_delay_ns, self.coherence_time_ns)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub kind: SweepKind,
    pub points: Vec<f64>,
    /// Analyzer angle for delay and overlap sweeps (30°).
    pub analyzer_deg: f64,
    /// Axis of the overlap sweep (v).
    pub overlap_axis: OverlapAxis,
}

fn linspace(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

impl Sweep {
    pub fn default_points(kind: SweepKind, axis: OverlapAxis, coherence_time_ns: f64) -> Vec<f64> {
        match (kind, axis) {
            (SweepKind::Analyzer, _) => linspace(0.0, 180.0, 5.0),
            (SweepKind::Delay, _) => linspace(-60.0, 30.0, 1.0),
            (SweepKind::Overlap, OverlapAxis::V) => (0..=20).map(|i| i as f64 / 20.0).collect(),
            (SweepKind::Overlap, OverlapAxis::DelayNs) => {
                (-20..=20).map(|i| i as f64 * 0.2 * coherence_time_ns).collect()
            }
        }
    }

    pub fn new(kind: SweepKind) -> Self {
        Sweep {
            kind,
            points: Self::default_points(kind, OverlapAxis::V, default_coherence_time_ns()),
            analyzer_deg: 30.0,
            overlap_axis: OverlapAxis::V,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub source: Source,
    pub circuit: CircuitParams,
    pub control: Control,
    pub imperfections: Imperfections,
    pub sweep: Sweep,
}

impl Scenario {
    /// All defaults, with the given sweep.
    pub fn with_sweep(kind: SweepKind) -> Self {
        Scenario {
            source: Source::default(),
            circuit: CircuitParams::default(),
            control: Control::default(),
            imperfections: Imperfections::default(),
            sweep: Sweep::new(kind),
        }
    }

    /// No loss, no distinguishability, unit efficiencies and hard timing edges.
    pub fn ideal(kind: SweepKind, policy: Policy) -> Self {
        let mut s = Self::with_sweep(kind);
        s.circuit.coupling_eta = 1.0;
        s.control.policy = policy;
        s.control.edge_sigma_ns = 0.0;
        s
    }

    pub fn timing(&self) -> TimingConfig {
        TimingConfig {
            fiber_delay_ns: self.circuit.fiber_delay_ns,
            extra_electronic_delay_ns: self.control.extra_electronic_delay_ns,
            edge_sigma_ns: self.control.edge_sigma_ns,
            hold_ns: self.control.hold_ns,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(key: &str, ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(ScenarioError::Range { key: key.to_string(), msg: msg() })
            }
        }
        let unit = |key: &str, v: f64| check(key, (0.0..=1.0).contains(&v), || format!("{v} is outside [0, 1]"));
        let nonneg = |key: &str, v: f64| check(key, v >= 0.0 && v.is_finite(), || format!("{v} must be >= 0"));
        let finite = |key: &str, v: f64| check(key, v.is_finite(), || format!("{v} must be finite"));

        finite("input_theta_deg", self.source.input_theta_deg)?;
        finite("input_phase_deg", self.source.input_phase_deg)?;
        let r = self.source.pair_rate_per_min;
        check("pair_rate_per_min", r > 0.0 && r.is_finite(), || format!("{r} must be > 0"))?;

        unit("coupling_eta", self.circuit.coupling_eta)?;
        nonneg("fiber_delay_ns", self.circuit.fiber_delay_ns)?;
        finite("residual_rotation_deg", self.circuit.residual_rotation_deg)?;

        let l = &self.control.latency;
        nonneg("detector_edge_ns", l.detector_edge_ns)?;
        nonneg("pockels_chain_ns", l.pockels_chain_ns)?;
        nonneg("logic_board_ns", l.logic_board_ns)?;
        nonneg("cabling_ns", l.cabling_ns)?;
        nonneg("ttl_pulse_width_ns", l.ttl_pulse_width_ns)?;
        finite("extra_electronic_delay_ns", self.control.extra_electronic_delay_ns)?;
        nonneg("edge_sigma_ns", self.control.edge_sigma_ns)?;
        let hold = self.control.hold_ns.unwrap_or(l.ttl_pulse_width_ns);
        check("hold_ns", hold > 0.0 && hold.is_finite(), || format!("hold time {hold} must be > 0"))?;

        let im = &self.imperfections;
        unit("overlap_v", im.overlap_v)?;
        finite("relative_delay_ns", im.relative_delay_ns)?;
        let ct = im.coherence_time_ns;
        check("coherence_time_ns", ct > 0.0 && ct.is_finite(), || format!("{ct} must be > 0"))?;
        unit("efficiency_d1", im.efficiency_d1)?;
        unit("efficiency_d2a", im.efficiency_d2a)?;
        unit("efficiency_d2b", im.efficiency_d2b)?;

        finite("analyzer_deg", self.sweep.analyzer_deg)?;
        for &p in &self.sweep.points {
            finite("points", p)?;
            if self.sweep.kind == SweepKind::Overlap && self.sweep.overlap_axis == OverlapAxis::V {
                unit("points", p)?;
            }
        }
        Ok(())
    }

    /// Writes the scenario back out with every key spelled out.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let src = &self.source;
        let _ = writeln!(s, "[source]");
        let _ = writeln!(s, "input_theta_deg = {}", src.input_theta_deg);
        let _ = writeln!(s, "input_phase_deg = {}", src.input_phase_deg);
        let _ = writeln!(s, "ancilla_prep = {}", src.ancilla_prep);
        let _ = writeln!(s, "pair_rate_per_min = {}", src.pair_rate_per_min);

        let c = &self.circuit;
        let _ = writeln!(s, "\n[circuit]");
        let _ = writeln!(s, "coupling_eta = {}", c.coupling_eta);
        let _ = writeln!(s, "fiber_delay_ns = {}", c.fiber_delay_ns);
        let _ = writeln!(s, "residual_rotation_deg = {}", c.residual_rotation_deg);

        let k = &self.control;
        let _ = writeln!(s, "\n[control]");
        let _ = writeln!(s, "policy = {}", k.policy);
        let _ = writeln!(s, "detector_edge_ns = {}", k.latency.detector_edge_ns);
        let _ = writeln!(s, "pockels_chain_ns = {}", k.latency.pockels_chain_ns);
        let _ = writeln!(s, "logic_board_ns = {}", k.latency.logic_board_ns);
        let _ = writeln!(s, "cabling_ns = {}", k.latency.cabling_ns);
        let _ = writeln!(s, "ttl_pulse_width_ns = {}", k.latency.ttl_pulse_width_ns);
        let _ = writeln!(s, "extra_electronic_delay_ns = {}", k.extra_electronic_delay_ns);
        let _ = writeln!(s, "edge_sigma_ns = {}", k.edge_sigma_ns);
        if let Some(h) = k.hold_ns {
            let _ = writeln!(s, "hold_ns = {h}");
        }

        let im = &self.imperfections;
        let _ = writeln!(s, "\n[imperfections]");
        let _ = writeln!(s, "overlap_v = {}", im.overlap_v);
        let _ = writeln!(s, "relative_delay_ns = {}", im.relative_delay_ns);
        let _ = writeln!(s, "coherence_time_ns = {}", im.coherence_time_ns);
        let _ = writeln!(s, "efficiency_d1 = {}", im.efficiency_d1);
        let _ = writeln!(s, "efficiency_d2a = {}", im.efficiency_d2a);
        let _ = writeln!(s, "efficiency_d2b = {}", im.efficiency_d2b);

        let sw = &self.sweep;
        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "kind = {}", sw.kind);
        let _ = writeln!(s, "analyzer_deg = {}", sw.analyzer_deg);
        let _ = writeln!(s, "overlap_axis = {}", sw.overlap_axis);
        let pts: Vec<String> = sw.points.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(s, "points = {}", pts.join(", "));
        s
    }
}

fn value<T: FromStr>(key: &str, raw: &str, expected: &'static str) -> Result<T> {
    raw.parse().map_err(|_| ScenarioError::BadValue { key: key.to_string(), value: raw.to_string(), expected })
}

fn number(key: &str, raw: &str) -> Result<f64> {
    value(key, raw, "a number")
}

fn keyword<T: FromStr<Err = &'static str>>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|expected| ScenarioError::BadValue { key: key.to_string(), value: raw.to_string(), expected })
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

/// Sweep keys that only make sense once the whole section is read.
#[derive(Default)]
struct SweepKeys {
    kind: Option<SweepKind>,
    points: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
    analyzer_deg: Option<f64>,
    overlap_axis: Option<OverlapAxis>,
}

/// Parses a scenario, filling defaults and rejecting unknown keys.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let opt = ParseOption { enabled_quote: false, enabled_escape: false, ..Default::default() };
    let ini = Ini::load_from_str_opt(text, opt).map_err(|e| ScenarioError::Syntax {
        line: e.line,
        col: e.col,
        msg: e.msg.to_string(),
    })?;

    let mut sc = Scenario::with_sweep(SweepKind::Analyzer);
    let mut sweep = SweepKeys::default();
    let mut seen_sweep = false;
    let mut seen: Vec<String> = Vec::new();

    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if let Some((k, _)) = props.iter().next() {
                return Err(ScenarioError::KeyOutsideSection(k.to_string()));
            }
            continue;
        };
        if seen.iter().any(|s| s == section) {
            return Err(ScenarioError::DuplicateSection(section.to_string()));
        }
        seen.push(section.to_string());

        let mut keys: Vec<&str> = Vec::new();
        for (key, raw) in props.iter() {
            if keys.contains(&key) {
                return Err(ScenarioError::DuplicateKey { section: section.to_string(), key: key.to_string() });
            }
            keys.push(key);
            let raw = strip_comment(raw);
            let unknown = || ScenarioError::UnknownKey { section: section.to_string(), key: key.to_string() };
            match section {
                "source" => match key {
                    "input_theta_deg" => sc.source.input_theta_deg = number(key, raw)?,
                    "input_phase_deg" => sc.source.input_phase_deg = number(key, raw)?,
                    "ancilla_prep" => sc.source.ancilla_prep = value(key, raw, "true or false")?,
                    "pair_rate_per_min" => sc.source.pair_rate_per_min = number(key, raw)?,
                    _ => return Err(unknown()),
                },
                "circuit" => match key {
                    "coupling_eta" => sc.circuit.coupling_eta = number(key, raw)?,
                    "fiber_delay_ns" => sc.circuit.fiber_delay_ns = number(key, raw)?,
                    "residual_rotation_deg" => sc.circuit.residual_rotation_deg = number(key, raw)?,
                    _ => return Err(unknown()),
                },
                "control" => {
                    let c = &mut sc.control;
                    match key {
                        "policy" => c.policy = keyword(key, raw)?,
                        "detector_edge_ns" => c.latency.detector_edge_ns = number(key, raw)?,
                        "pockels_chain_ns" => c.latency.pockels_chain_ns = number(key, raw)?,
                        "logic_board_ns" => c.latency.logic_board_ns = number(key, raw)?,
                        "cabling_ns" => c.latency.cabling_ns = number(key, raw)?,
                        "ttl_pulse_width_ns" => c.latency.ttl_pulse_width_ns = number(key, raw)?,
                        "extra_electronic_delay_ns" => c.extra_electronic_delay_ns = number(key, raw)?,
                        "edge_sigma_ns" => c.edge_sigma_ns = number(key, raw)?,
                        "hold_ns" => c.hold_ns = Some(number(key, raw)?),
                        _ => return Err(unknown()),
                    }
                }
                "imperfections" => {
                    let im = &mut sc.imperfections;
                    match key {
                        "overlap_v" => im.overlap_v = number(key, raw)?,
                        "relative_delay_ns" => im.relative_delay_ns = number(key, raw)?,
                        "coherence_time_ns" => im.coherence_time_ns = number(key, raw)?,
                        "efficiency_d1" => im.efficiency_d1 = number(key, raw)?,
                        "efficiency_d2a" => im.efficiency_d2a = number(key, raw)?,
                        "efficiency_d2b" => im.efficiency_d2b = number(key, raw)?,
                        _ => return Err(unknown()),
                    }
                }
                "sweep" => {
                    seen_sweep = true;
                    match key {
                        "kind" => sweep.kind = Some(keyword(key, raw)?),
                        "points" => {
                            let pts = raw
                                .split(',')
                                .map(str::trim)
                                .filter(|p| !p.is_empty())
                                .map(|p| number(key, p))
                                .collect::<Result<Vec<f64>>>()?;
                            sweep.points = Some(pts);
                        }
                        "start" => sweep.start = Some(number(key, raw)?),
                        "stop" => sweep.stop = Some(number(key, raw)?),
                        "step" => sweep.step = Some(number(key, raw)?),
                        "analyzer_deg" => sweep.analyzer_deg = Some(number(key, raw)?),
                        "overlap_axis" => sweep.overlap_axis = Some(keyword(key, raw)?),
                        _ => return Err(unknown()),
                    }
                }
                other => return Err(ScenarioError::UnknownSection(other.to_string())),
            }
        }
        if keys.is_empty() && !matches!(section, "source" | "circuit" | "control" | "imperfections" | "sweep") {
            return Err(ScenarioError::UnknownSection(section.to_string()));
        }
    }

    if !seen_sweep || sweep.kind.is_none() {
        return Err(ScenarioError::MissingSweepKind);
    }
    let kind = sweep.kind.expect("checked above");
    let axis = sweep.overlap_axis.unwrap_or(OverlapAxis::V);
    let range_given = sweep.start.is_some() || sweep.stop.is_some() || sweep.step.is_some();
    let points = match (sweep.points, range_given) {
        (Some(_), true) => {
            return Err(ScenarioError::Range {
                key: "points".into(),
                msg: "give either `points` or `start`/`stop`/`step`, not both".into(),
            })
        }
        (Some(p), false) => p,
        (None, true) => {
            let defaults = Sweep::default_points(kind, axis, sc.imperfections.coherence_time_ns);
            let start = sweep.start.unwrap_or(defaults[0]);
            let stop = sweep.stop.unwrap_or(*defaults.last().expect("non-empty defaults"));
            let step = sweep.step.unwrap_or(if defaults.len() > 1 { defaults[1] - defaults[0] } else { 1.0 });
            if !(step > 0.0) || !(stop >= start) {
                return Err(ScenarioError::Range {
                    key: "step".into(),
                    msg: format!("need step > 0 and stop >= start (start {start}, stop {stop}, step {step})"),
                });
            }
            linspace(start, stop, step)
        }
        (None, false) => Sweep::default_points(kind, axis, sc.imperfections.coherence_time_ns),
    };
    sc.sweep = Sweep {
        kind,
        points,
        analyzer_deg: sweep.analyzer_deg.unwrap_or(30.0),
        overlap_axis: axis,
    };
    sc.validate()?;
    Ok(sc)
}

impl FromStr for Scenario {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self> {
        parse_scenario(s)
    }
}
