//! Analytic and Monte Carlo drivers for the parity-check experiment.
//!
//! Stage one interferes the input photon (mode `1`) with the ancilla (mode
//! `2`) on a PBS, rotates mode `2` into the ±45° basis and splits it onto
//! `D2a`/`D2b`. Stage two sends mode `1` through the storage fiber, the
//! Pockels cell and the analyzer onto `D1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::scenario::{OverlapAxis, Policy, Scenario, SweepKind};
use crate::detection::{
    accept, conditional_distribution, outcome_distribution, registrations, sample_index, AcceptPolicy,
    ConditionalDistribution, DetectionOutcome, Detector, DetectorConfig, D1, D2A, D2B,
};
use crate::elements::{Analyzer, Circuit, Element, FiberDelay, Hwp, ModeRole, Pbs, Pockels};
use crate::error::Result;
use crate::feedforward::{correction_for, timing_probability, Correction};
use crate::fockstate::{mode, JonesVector, PhotonicState};
use crate::imperfections::{blend, curve_visibility, distinguishable_distribution, overlap_from_delay};

pub const INPUT_MODE: &str = "1";
pub const ANCILLA_MODE: &str = "2";

/// Which accepted events a rate counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    D2a,
    D2b,
    Both,
}

impl std::str::FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "d2a" => Ok(Channel::D2a),
            "d2b" => Ok(Channel::D2b),
            "both" => Ok(Channel::Both),
            _ => Err(format!("unknown channel {s:?}; expected d2a, d2b or both")),
        }
    }
}

/// The knobs a sweep moves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Setting {
    pub analyzer_deg: f64,
    pub extra_delay_ns: f64,
    /// Effective overlap, path mismatch already folded in.
    pub overlap_v: f64,
}

impl Setting {
    /// The scenario's fixed operating point.
    pub fn base(s: &Scenario) -> Self {
        Setting {
            analyzer_deg: s.sweep.analyzer_deg,
            extra_delay_ns: s.control.extra_electronic_delay_ns,
            overlap_v: s.imperfections.effective_overlap(),
        }
    }

    /// Operating point at sweep value `x`.
    pub fn at(s: &Scenario, x: f64) -> Self {
        let mut p = Self::base(s);
        match s.sweep.kind {
            SweepKind::Analyzer => p.analyzer_deg = x,
            SweepKind::Delay => p.extra_delay_ns = x,
            SweepKind::Overlap => {
                let im = &s.imperfections;
                p.overlap_v = match s.sweep.overlap_axis {
                    OverlapAxis::V => x,
                    OverlapAxis::DelayNs => im.overlap_v * overlap_from_delay(x, im.coherence_time_ns),
                }
            }
        }
        p
    }
}

/// Acceptance probabilities per ancilla channel, with `D1` firing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticRates {
    pub p_d2a: f64,
    pub p_d2b: f64,
    pub pair_rate_per_min: f64,
}

impl AnalyticRates {
    pub fn probability(&self, c: Channel) -> f64 {
        match c {
            Channel::D2a => self.p_d2a,
            Channel::D2b => self.p_d2b,
            Channel::Both => self.p_d2a + self.p_d2b,
        }
    }

    pub fn rate(&self, c: Channel) -> f64 {
        self.pair_rate_per_min * self.probability(c)
    }
}

/// One row of output: a single operating point, exact or sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct CountsRecord {
    pub sweep_kind: String,
    pub setting: f64,
    pub channel: Channel,
    pub rate_d2a: f64,
    pub rate_d2b: f64,
    /// Accepted coincidences via each channel; zero in analytic mode.
    pub counts_d2a: u64,
    pub counts_d2b: u64,
    /// Zero in analytic mode.
    pub shots: u64,
    pub seed: u64,
}

impl CountsRecord {
    pub fn rate_per_min(&self) -> f64 {
        match self.channel {
            Channel::D2a => self.rate_d2a,
            Channel::D2b => self.rate_d2b,
            Channel::Both => self.rate_d2a + self.rate_d2b,
        }
    }

    pub fn accepted_counts(&self) -> u64 {
        match self.channel {
            Channel::D2a => self.counts_d2a,
            Channel::D2b => self.counts_d2b,
            Channel::Both => self.counts_d2a + self.counts_d2b,
        }
    }

    fn analytic(kind: &str, setting: f64, channel: Channel, r: &AnalyticRates, seed: u64) -> Self {
        CountsRecord {
            sweep_kind: kind.to_string(),
            setting,
            channel,
            rate_d2a: r.rate(Channel::D2a),
            rate_d2b: r.rate(Channel::D2b),
            counts_d2a: 0,
            counts_d2b: 0,
            shots: 0,
            seed,
        }
    }
}

/// How a sweep evaluates each point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    MonteCarlo { shots: u64, seed: u64 },
}

fn accept_policy(p: Policy) -> AcceptPolicy {
    match p {
        Policy::Passive => AcceptPolicy::PassiveD2aOnly,
        Policy::OrGate | Policy::OrGateNoCorrection => AcceptPolicy::OrGate,
    }
}

/// The PBS, the 22.5° wave plate on mode `2` and the splitting PBS.
pub fn stage1_circuit() -> Result<Circuit> {
    let sig = ModeRole::Signal;
    Circuit::new()
        .with_modes(&[("1", sig), ("2", sig), ("2x", sig), ("2a", sig), ("2b", sig)])?
        .then(Element::Pbs(Pbs { in_a: mode("1"), in_b: mode("2"), out_a: mode("1"), out_b: mode("2") }))?
        .then(Element::Hwp(Hwp { mode: mode("2"), theta_deg: 22.5 }))?
        .then(Element::Pbs(Pbs { in_a: mode("2"), in_b: mode("2x"), out_a: mode("2a"), out_b: mode("2b") }))
}

/// Fiber, Pockels cell (on or off) and analyzer on mode `1`.
pub fn stage2_circuit(s: &Scenario, analyzer_deg: f64, coupling_eta: f64, pockels_on: bool) -> Result<Circuit> {
    let res = ModeRole::Reserved;
    Circuit::new()
        .with_modes(&[("1", ModeRole::Signal), ("loss0", res), ("d1", res), ("block1", res)])?
        .then(Element::FiberDelay(FiberDelay {
            mode: mode("1"),
            coupling_eta,
            delay_ns: s.circuit.fiber_delay_ns,
            loss_mode: mode("loss0"),
            residual_rotation_deg: s.circuit.residual_rotation_deg,
        }))?
        .then(Element::Pockels(Pockels { mode: mode("1"), on: pockels_on }))?
        .then(Element::Analyzer(Analyzer {
            mode: mode("1"),
            theta_deg: analyzer_deg,
            pass_mode: mode("d1"),
            block_mode: mode("block1"),
        }))
}

pub fn stage1_detectors(s: &Scenario) -> Result<DetectorConfig> {
    DetectorConfig::new(vec![
        Detector::new(D2A, mode("2a"), s.imperfections.efficiency_d2a),
        Detector::new(D2B, mode("2b"), s.imperfections.efficiency_d2b),
    ])
}

fn stage2_detectors(s: &Scenario) -> Result<DetectorConfig> {
    DetectorConfig::new(vec![Detector::new(D1, mode("d1"), s.imperfections.efficiency_d1)])
}

/// Input photon and prepared ancilla, as separate single-photon states.
pub fn input_photons(s: &Scenario) -> Result<(PhotonicState, PhotonicState)> {
    let input = PhotonicState::single_photon(&mode(INPUT_MODE), s.source.input())?;
    let mut ancilla = PhotonicState::single_photon(&mode(ANCILLA_MODE), JonesVector::linear(0.0))?;
    if s.source.ancilla_prep {
        ancilla = crate::elements::apply_element(&ancilla, &Element::Hwp(Hwp { mode: mode(ANCILLA_MODE), theta_deg: 22.5 }))?;
    }
    Ok((input, ancilla))
}

/// Stage-one arrival statistics blended between coherent and
/// distinguishable photons.
pub fn stage1_distribution(s: &Scenario, overlap_v: f64) -> Result<ConditionalDistribution> {
    let circuit = stage1_circuit()?;
    let cfg = stage1_detectors(s)?;
    let (input, ancilla) = input_photons(s)?;
    let coherent = conditional_distribution(&circuit.apply(&input.tensor(&ancilla)?)?, &cfg);
    let distinguishable = distinguishable_distribution(&circuit, &[input, ancilla], &cfg)?;
    blend(&coherent, &distinguishable, overlap_v)
}

fn d1_probability(circuit: &Circuit, cfg: &DetectorConfig, state: &PhotonicState) -> Result<f64> {
    let out = circuit.apply(state)?;
    Ok(outcome_distribution(&out, cfg)
        .entries()
        .iter()
        .filter(|(o, _)| o.count(D1) == 1)
        .map(|(_, p)| p)
        .sum())
}

/// One conditional output state with its `D1` statistics.
#[derive(Clone, Debug)]
struct Member {
    weight: f64,
    /// Probability that mode `1` holds a photon at all.
    occupied: f64,
    /// Lossless analyzer pass probability without / with the Z.
    pass_plain: f64,
    pass_corrected: f64,
    /// Full stage-two `D1` probability (loss and efficiency included).
    d1_plain: f64,
    d1_corrected: f64,
}

#[derive(Clone, Debug)]
struct Registered {
    probability: f64,
    /// Accepting channel, or `None` when the policy rejects the record.
    via: Option<Channel>,
    corrected: bool,
}

#[derive(Clone, Debug)]
struct Arrival {
    probability: f64,
    registrations: Vec<Registered>,
    members: Vec<Member>,
}

/// Everything needed to evaluate or sample one operating point.
#[derive(Clone, Debug)]
pub struct Prepared {
    arrivals: Vec<Arrival>,
    p_applied: f64,
    coupling_eta: f64,
    efficiency_d1: f64,
    pair_rate_per_min: f64,
}

impl Prepared {
    pub fn new(s: &Scenario, setting: &Setting) -> Result<Self> {
        s.validate()?;
        let policy = accept_policy(s.control.policy);
        let stage1_cfg = stage1_detectors(s)?;
        let d1_cfg = stage2_detectors(s)?;
        let eta = s.circuit.coupling_eta;
        let full = [false, true].map(|on| stage2_circuit(s, setting.analyzer_deg, eta, on));
        let lossless = [false, true].map(|on| stage2_circuit(s, setting.analyzer_deg, 1.0, on));
        let [full_plain, full_z] = full;
        let [lossless_plain, lossless_z] = lossless;
        let (full_plain, full_z, lossless_plain, lossless_z) = (full_plain?, full_z?, lossless_plain?, lossless_z?);
        let pass_cfg = DetectorConfig::new(vec![Detector::new(D1, mode("d1"), 1.0)])?;

        let mut timing = s.timing();
        timing.extra_electronic_delay_ns = setting.extra_delay_ns;
        let p_applied = timing_probability(&s.control.latency, &timing)?;

        let dist = stage1_distribution(s, setting.overlap_v)?;
        let mut arrivals = Vec::with_capacity(dist.entries.len());
        for e in &dist.entries {
            let registrations = registrations(&e.outcome, &stage1_cfg)
                .into_iter()
                .map(|(o, probability)| {
                    let via = channel_of(&o, policy);
                    let corrected = via.is_some()
                        && s.control.policy == Policy::OrGate
                        && correction_for(&o).map(|c| c == Correction::ZCorrection).unwrap_or(false);
                    Registered { probability, via, corrected }
                })
                .collect();
            let mut members = Vec::with_capacity(e.ensemble.len());
            for (weight, state) in &e.ensemble {
                let occupied: f64 = state
                    .iter()
                    .filter(|(k, _)| k.touches_mode(&mode(INPUT_MODE)))
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                members.push(Member {
                    weight: *weight,
                    occupied,
                    pass_plain: d1_probability(&lossless_plain, &pass_cfg, state)?,
                    pass_corrected: d1_probability(&lossless_z, &pass_cfg, state)?,
                    d1_plain: d1_probability(&full_plain, &d1_cfg, state)?,
                    d1_corrected: d1_probability(&full_z, &d1_cfg, state)?,
                });
            }
            arrivals.push(Arrival { probability: e.probability, registrations, members });
        }
        Ok(Prepared {
            arrivals,
            p_applied,
            coupling_eta: eta,
            efficiency_d1: s.imperfections.efficiency_d1,
            pair_rate_per_min: s.source.pair_rate_per_min,
        })
    }

    /// Probability that the Pockels voltage is up when the photon passes.
    pub fn applied_probability(&self) -> f64 {
        self.p_applied
    }

    pub fn analytic(&self) -> AnalyticRates {
        let (mut a, mut b) = (0.0, 0.0);
        for arr in &self.arrivals {
            let d1: f64 = arr.members.iter().map(|m| m.weight * m.d1_plain).sum();
            let d1_z: f64 = arr.members.iter().map(|m| m.weight * m.d1_corrected).sum();
            for r in &arr.registrations {
                let Some(via) = r.via else { continue };
                let p_d1 = if r.corrected { self.p_applied * d1_z + (1.0 - self.p_applied) * d1 } else { d1 };
                let p = arr.probability * r.probability * p_d1;
                match via {
                    Channel::D2a => a += p,
                    _ => b += p,
                }
            }
        }
        AnalyticRates { p_d2a: a, p_d2b: b, pair_rate_per_min: self.pair_rate_per_min }
    }

    /// One pair, sampled stage by stage. Returns the accepting channel when
    /// the event is a coincidence.
    fn shot<R: Rng>(&self, rng: &mut R) -> Option<Channel> {
        let arr = &self.arrivals[sample_index(self.arrivals.iter().map(|a| a.probability), rng)];
        let reg = &arr.registrations[sample_index(arr.registrations.iter().map(|r| r.probability), rng)];
        let via = reg.via?;
        if arr.members.is_empty() {
            return None;
        }
        let m = &arr.members[sample_index(arr.members.iter().map(|m| m.weight), rng)];
        let z = reg.corrected && rng.random::<f64>() < self.p_applied;
        let present = rng.random::<f64>() < m.occupied;
        let survived = present && rng.random::<f64>() < self.coupling_eta;
        let pass = if z { m.pass_corrected } else { m.pass_plain };
        let passed = survived && rng.random::<f64>() < pass;
        let clicked = passed && rng.random::<f64>() < self.efficiency_d1;
        clicked.then_some(via)
    }

    /// Accepted counts `(via D2a, via D2b)` over `shots` pairs. Shot `i`
    /// always draws from stream `i` of `seed`, so the split across threads
    /// does not matter.
    pub fn tally(&self, shots: u64, seed: u64, parallel: bool) -> (u64, u64) {
        let one = |i: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            match self.shot(&mut rng) {
                Some(Channel::D2a) => (1, 0),
                Some(_) => (0, 1),
                None => (0, 0),
            }
        };
        let add = |x: (u64, u64), y: (u64, u64)| (x.0 + y.0, x.1 + y.1);
        if parallel {
            (0..shots).into_par_iter().map(one).reduce(|| (0, 0), add)
        } else {
            (0..shots).map(one).fold((0, 0), add)
        }
    }
}

fn channel_of(o: &DetectionOutcome, policy: AcceptPolicy) -> Option<Channel> {
    if !accept(o, policy) {
        None
    } else if o.count(D2A) == 1 {
        Some(Channel::D2a)
    } else {
        Some(Channel::D2b)
    }
}

/// Exact rates at one operating point.
pub fn run_analytic(s: &Scenario, setting: &Setting) -> Result<AnalyticRates> {
    Ok(Prepared::new(s, setting)?.analytic())
}

#[allow(clippy::too_many_arguments)]
fn sampled_record(
    p: &Prepared,
    kind: &str,
    setting: f64,
    channel: Channel,
    shots: u64,
    seed: u64,
    stream_seed: u64,
    parallel: bool,
) -> CountsRecord {
    let (a, b) = p.tally(shots, stream_seed, parallel);
    let per = p.pair_rate_per_min / shots.max(1) as f64;
    CountsRecord {
        sweep_kind: kind.to_string(),
        setting,
        channel,
        rate_d2a: a as f64 * per,
        rate_d2b: b as f64 * per,
        counts_d2a: a,
        counts_d2b: b,
        shots,
        seed,
    }
}

/// Sampled counts at one operating point.
pub fn run_montecarlo(s: &Scenario, setting: &Setting, shots: u64, seed: u64) -> Result<CountsRecord> {
    let p = Prepared::new(s, setting)?;
    Ok(sampled_record(&p, "run", setting.analyzer_deg, Channel::Both, shots, seed, seed, true))
}

/// Seed for sweep point `index`, derived from the master seed.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(seed ^ splitmix(index))
}

fn kind_name(k: SweepKind) -> &'static str {
    match k {
        SweepKind::Analyzer => "analyzer",
        SweepKind::Delay => "delay",
        SweepKind::Overlap => "overlap",
    }
}

/// Evaluates the scenario at each value of `points` along `kind`.
pub fn sweep(
    s: &Scenario,
    kind: SweepKind,
    points: &[f64],
    engine: Engine,
    channel: Channel,
    parallel: bool,
) -> Result<Vec<CountsRecord>> {
    let mut s = s.clone();
    s.sweep.kind = kind;
    let name = kind_name(kind);
    points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let p = Prepared::new(&s, &Setting::at(&s, x))?;
            Ok(match engine {
                Engine::Analytic => CountsRecord::analytic(name, x, channel, &p.analytic(), 0),
                Engine::MonteCarlo { shots, seed } => {
                    sampled_record(&p, name, x, channel, shots, seed, point_seed(seed, i as u64), parallel)
                }
            })
        })
        .collect()
}

/// Single operating point as a one-row curve.
pub fn run_point(s: &Scenario, engine: Engine, channel: Channel) -> Result<CountsRecord> {
    let setting = Setting::base(s);
    let p = Prepared::new(s, &setting)?;
    Ok(match engine {
        Engine::Analytic => CountsRecord::analytic("run", setting.analyzer_deg, channel, &p.analytic(), 0),
        Engine::MonteCarlo { shots, seed } => {
            sampled_record(&p, "run", setting.analyzer_deg, channel, shots, seed, seed, true)
        }
    })
}

pub fn sweep_analyzer(s: &Scenario, thetas: &[f64], engine: Engine, channel: Channel) -> Result<Vec<CountsRecord>> {
    sweep(s, SweepKind::Analyzer, thetas, engine, channel, true)
}

/// Plateau of a delay curve read off the sampled points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasuredPlateau {
    pub center_ns: f64,
    pub fwhm_ns: f64,
    pub peak_rate: f64,
}

#[derive(Clone, Debug)]
pub struct DelaySweep {
    pub curve: Vec<CountsRecord>,
    /// `None` when the curve never rises or its half-maximum is not crossed
    /// on both sides inside the scanned range.
    pub plateau: Option<MeasuredPlateau>,
}

/// Half-maximum crossings by linear interpolation between points.
pub fn measure_plateau(curve: &[(f64, f64)]) -> Option<MeasuredPlateau> {
    let (imax, &(_, peak)) = curve.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    if !(peak > 0.0) {
        return None;
    }
    let half = peak / 2.0;
    let cross = |(x0, y0): (f64, f64), (x1, y1): (f64, f64)| x0 + (half - y0) * (x1 - x0) / (y1 - y0);
    let left = (1..=imax).rev().find(|&i| curve[i - 1].1 < half).map(|i| cross(curve[i - 1], curve[i]))?;
    let right = (imax..curve.len() - 1).find(|&i| curve[i + 1].1 < half).map(|i| cross(curve[i], curve[i + 1]))?;
    Some(MeasuredPlateau { center_ns: (left + right) / 2.0, fwhm_ns: right - left, peak_rate: peak })
}

pub fn sweep_delay(s: &Scenario, extra_delays: &[f64], engine: Engine, channel: Channel) -> Result<DelaySweep> {
    let curve = sweep(s, SweepKind::Delay, extra_delays, engine, channel, true)?;
    let xy: Vec<(f64, f64)> = curve.iter().map(|r| (r.setting, r.rate_per_min())).collect();
    Ok(DelaySweep { plateau: measure_plateau(&xy), curve })
}

#[derive(Clone, Debug)]
pub struct OverlapSweep {
    pub curve: Vec<CountsRecord>,
    /// Exact visibility of the full analyzer curve at each point's overlap;
    /// `None` where that curve is identically zero.
    pub visibility: Vec<(f64, Option<f64>)>,
}

/// Exact analyzer-curve visibility at overlap `v`.
pub fn parity_visibility(s: &Scenario, v: f64, thetas: &[f64], channel: Channel) -> Result<Option<f64>> {
    let mut s = s.clone();
    s.sweep.kind = SweepKind::Analyzer;
    let mut curve = Vec::with_capacity(thetas.len());
    for &t in thetas {
        let setting = Setting { analyzer_deg: t, overlap_v: v, ..Setting::base(&s) };
        curve.push((t, run_analytic(&s, &setting)?.rate(channel)));
    }
    Ok(curve_visibility(&curve).ok())
}

pub fn sweep_overlap(s: &Scenario, points: &[f64], engine: Engine, channel: Channel) -> Result<OverlapSweep> {
    let curve = sweep(s, SweepKind::Overlap, points, engine, channel, true)?;
    let mut so = s.clone();
    so.sweep.kind = SweepKind::Overlap;
    let thetas = super::scenario::Sweep::default_points(SweepKind::Analyzer, OverlapAxis::V, 1.0);
    let visibility = points
        .iter()
        .map(|&x| Ok((x, parity_visibility(s, Setting::at(&so, x).overlap_v, &thetas, channel)?)))
        .collect::<Result<_>>()?;
    Ok(OverlapSweep { curve, visibility })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal(policy: Policy) -> Scenario {
        Scenario::ideal(SweepKind::Analyzer, policy)
    }

    fn at(s: &Scenario, theta: f64) -> AnalyticRates {
        run_analytic(s, &Setting { analyzer_deg: theta, ..Setting::base(s) }).unwrap()
    }

    #[test]
    fn success_probabilities() {
        assert!((at(&ideal(Policy::Passive), 30.0).probability(Channel::Both) - 0.25).abs() < 1e-12);
        assert!((at(&ideal(Policy::OrGate), 30.0).probability(Channel::Both) - 0.5).abs() < 1e-12);
        let r = at(&ideal(Policy::OrGateNoCorrection), 150.0);
        assert!((r.p_d2b - 0.25).abs() < 1e-12);
        // The D2a branch carries the 30° input, 120° away from the analyzer.
        assert!((r.p_d2a - 0.25 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn passive_never_counts_d2b() {
        let r = at(&ideal(Policy::Passive), 150.0);
        assert_eq!(r.p_d2b, 0.0);
    }

    #[test]
    fn default_timing_halves_the_correction() {
        let mut s = ideal(Policy::OrGate);
        s.control.edge_sigma_ns = 3.0;
        let p = Prepared::new(&s, &Setting::base(&s)).unwrap();
        assert!((p.applied_probability() - 0.5).abs() < 1e-12);
        let r = p.analytic();
        assert!((r.p_d2a - 0.25).abs() < 1e-12);
        // Uncorrected, the D2b branch sits at 150° and passes a quarter.
        assert!((r.p_d2b - 0.25 * (0.5 + 0.5 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn loss_scales_rates_by_eta() {
        let mut s = ideal(Policy::OrGate);
        let full = at(&s, 10.0);
        s.circuit.coupling_eta = 0.37;
        let lossy = at(&s, 10.0);
        assert!((lossy.p_d2a - 0.37 * full.p_d2a).abs() < 1e-12);
        assert!((lossy.p_d2b - 0.37 * full.p_d2b).abs() < 1e-12);
    }

    #[test]
    fn montecarlo_is_repeatable_and_order_free() {
        let s = ideal(Policy::OrGate);
        let p = Prepared::new(&s, &Setting::base(&s)).unwrap();
        let a = p.tally(20_000, 7, true);
        assert_eq!(a, p.tally(20_000, 7, false));
        assert_eq!(a, p.tally(20_000, 7, true));
        assert_ne!(a, p.tally(20_000, 8, true));
    }

    #[test]
    fn montecarlo_matches_analytic() {
        for policy in [Policy::Passive, Policy::OrGate] {
            let s = ideal(policy);
            let rec = run_montecarlo(&s, &Setting::base(&s), 100_000, 11).unwrap();
            let p = at(&s, 30.0).probability(Channel::Both);
            let f = rec.accepted_counts() as f64 / rec.shots as f64;
            let sigma = (p * (1.0 - p) / rec.shots as f64).sqrt();
            assert!((f - p).abs() < 3.0 * sigma, "{policy}: {f} vs {p}");
            assert!(rec.accepted_counts() <= rec.shots);
        }
    }

    #[test]
    fn delay_plateau_is_read_off_the_curve() {
        let curve: Vec<(f64, f64)> = (-10i32..=10).map(|i| (i as f64, if i.abs() <= 4 { 1.0 } else { 0.0 })).collect();
        let p = measure_plateau(&curve).unwrap();
        assert!((p.center_ns).abs() < 1e-12);
        assert!((p.fwhm_ns - 9.0).abs() < 1e-12);
        assert!(measure_plateau(&[(0.0, 0.0), (1.0, 0.0)]).is_none());
    }

    #[test]
    fn per_point_seeds_differ() {
        assert_ne!(point_seed(1, 0), point_seed(1, 1));
        assert_ne!(point_seed(1, 0), point_seed(2, 0));
    }
}
