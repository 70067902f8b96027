//! Non-ideal physics as probability-level blends.
//!
//! Partial distinguishability is a convex mix, with weight `v`, of the fully
//! coherent two-photon statistics and those of perfectly distinguishable
//! photons. The latter are obtained by sending each photon through the circuit
//! on its own and combining the results classically.

use std::collections::BTreeMap;

use crate::detection::{ConditionalDistribution, ConditionalOutcome, DetectionOutcome, DetectorConfig};
use crate::elements::Circuit;
use crate::error::{Error, Result};
use crate::fockstate::{BasisKet, PhotonicState};

/// Speed of light in vacuum, m/s.
const C_M_PER_S: f64 = 299_792_458.0;

/// Gaussian overlap of two wavepackets offset by `relative_delay_ns`.
pub fn overlap_from_delay(relative_delay_ns: f64, coherence_time_ns: f64) -> f64 {
    debug_assert!(coherence_time_ns > 0.0);
    (-relative_delay_ns * relative_delay_ns / (2.0 * coherence_time_ns * coherence_time_ns)).exp()
}

/// Coherence time (ns) of a Gaussian spectrum with the given FWHM bandwidth.
///
/// Uses `σ_c = 1 / (2π σ_ν)` where `σ_ν` is the spectral standard deviation.
pub fn coherence_time_ns(center_nm: f64, bandwidth_nm: f64) -> f64 {
    let center = center_nm * 1e-9;
    let fwhm_hz = C_M_PER_S * bandwidth_nm * 1e-9 / (center * center);
    let sigma_hz = fwhm_hz / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    1e9 / (2.0 * std::f64::consts::PI * sigma_hz)
}

/// Default coherence time: 10 nm filters at 702.2 nm.
pub fn default_coherence_time_ns() -> f64 {
    coherence_time_ns(702.2, 10.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapModel {
    pub overlap_v: f64,
    pub coherence_time_ns: f64,
    pub relative_delay_ns: f64,
}

impl OverlapModel {
    pub fn direct(overlap_v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap_v) {
            return Err(Error::Validation(format!("overlap_v {overlap_v} outside [0, 1]")));
        }
        Ok(OverlapModel { overlap_v, coherence_time_ns: default_coherence_time_ns(), relative_delay_ns: 0.0 })
    }

    pub fn from_delay(relative_delay_ns: f64, coherence_time_ns: f64) -> Result<Self> {
        if !(coherence_time_ns > 0.0) {
            return Err(Error::Validation(format!("coherence_time_ns must be > 0, got {coherence_time_ns}")));
        }
        Ok(OverlapModel {
            overlap_v: overlap_from_delay(relative_delay_ns, coherence_time_ns),
            coherence_time_ns,
            relative_delay_ns,
        })
    }
}

/// Per-detector efficiencies and the pair rate that anchors rates per minute.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelCalibration {
    pub efficiencies: BTreeMap<String, f64>,
    pub pair_rate_per_min: f64,
}

impl ChannelCalibration {
    pub fn new(efficiencies: BTreeMap<String, f64>, pair_rate_per_min: f64) -> Result<Self> {
        for (id, e) in &efficiencies {
            if !(0.0..=1.0).contains(e) {
                return Err(Error::Validation(format!("efficiency of `{id}` is {e}, outside [0, 1]")));
            }
        }
        if !(pair_rate_per_min > 0.0) {
            return Err(Error::Validation(format!("pair_rate_per_min must be > 0, got {pair_rate_per_min}")));
        }
        Ok(ChannelCalibration { efficiencies, pair_rate_per_min })
    }

    pub fn efficiency(&self, id: &str) -> f64 {
        self.efficiencies.get(id).copied().unwrap_or(1.0)
    }
}

/// Where one tagged photon ended up.
enum Landing {
    Detector(String),
    Elsewhere(PhotonicState),
}

fn landings(out: &PhotonicState, cfg: &DetectorConfig) -> Result<Vec<(f64, Landing)>> {
    let mut at_detector: BTreeMap<String, f64> = BTreeMap::new();
    let mut rest: Vec<(BasisKet, num_complex::Complex64)> = Vec::new();
    for (ket, amp) in out.iter() {
        let slot = &ket.slots()[0];
        match cfg.detectors().iter().find(|d| d.mode == slot.mode) {
            Some(d) => *at_detector.entry(d.id.clone()).or_insert(0.0) += amp.norm_sqr(),
            None => rest.push((ket.clone(), *amp)),
        }
    }
    let mut v: Vec<(f64, Landing)> = at_detector.into_iter().map(|(id, p)| (p, Landing::Detector(id))).collect();
    let rest = PhotonicState::from_amplitudes(rest)?;
    let p_rest = rest.norm_sq();
    if p_rest > 0.0 {
        v.push((p_rest, Landing::Elsewhere(rest.normalize()?)));
    }
    Ok(v)
}

/// Outcome statistics for photons that cannot interfere with each other.
///
/// `photons` are single-photon inputs; each is propagated through `circuit`
/// alone. The conditional ensemble is tracked when at most one photon is left
/// undetected; with two photons left over it is empty.
pub fn distinguishable_distribution(
    circuit: &Circuit,
    photons: &[PhotonicState],
    cfg: &DetectorConfig,
) -> Result<ConditionalDistribution> {
    let mut per_photon = Vec::with_capacity(photons.len());
    for p in photons {
        if p.photon_number() != 1 {
            return Err(Error::Validation("distinguishable inputs must be single photons".into()));
        }
        per_photon.push(landings(&circuit.apply(p)?, cfg)?);
    }

    // Joint landings: cartesian product over photons.
    let mut joint: Vec<(f64, Vec<&Landing>)> = vec![(1.0, Vec::new())];
    for options in &per_photon {
        let mut next = Vec::new();
        for (p, path) in &joint {
            for (q, l) in options {
                let mut path = path.clone();
                path.push(l);
                next.push((p * q, path));
            }
        }
        joint = next;
    }

    let mut merged: BTreeMap<DetectionOutcome, (f64, Vec<(f64, PhotonicState)>)> = BTreeMap::new();
    for (p, path) in joint {
        if p <= 0.0 {
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut left: Vec<&PhotonicState> = Vec::new();
        for l in &path {
            match l {
                Landing::Detector(id) => *counts.entry(id.as_str()).or_insert(0) += 1,
                Landing::Elsewhere(s) => left.push(s),
            }
        }
        let counts: Vec<(&str, usize)> = counts.into_iter().collect();
        let outcome = DetectionOutcome::new(cfg, &counts, left.len())?;
        let entry = merged.entry(outcome).or_insert((0.0, Vec::new()));
        entry.0 += p;
        match left.as_slice() {
            [] => entry.1.push((p, PhotonicState::vacuum())),
            [one] => entry.1.push((p, (*one).clone())),
            _ => {}
        }
    }

    let entries = merged
        .into_iter()
        .map(|(outcome, (probability, members))| ConditionalOutcome {
            outcome,
            probability,
            ensemble: members.into_iter().map(|(w, s)| (w / probability, s)).collect(),
        })
        .collect();
    Ok(ConditionalDistribution { entries })
}

fn signature(d: &ConditionalDistribution) -> Option<(Vec<String>, usize)> {
    d.entries
        .first()
        .map(|e| (e.outcome.counts().keys().cloned().collect(), e.outcome.total_photons()))
}

/// `v·coherent + (1−v)·distinguishable`, outcome by outcome, with the
/// conditional ensembles mixed in the same proportion.
pub fn blend(
    coherent: &ConditionalDistribution,
    distinguishable: &ConditionalDistribution,
    v: f64,
) -> Result<ConditionalDistribution> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Validation(format!("overlap_v {v} outside [0, 1]")));
    }
    if let (Some(a), Some(b)) = (signature(coherent), signature(distinguishable)) {
        if a != b {
            return Err(Error::OutcomeSpaceMismatch(format!(
                "detectors {:?} with {} photons vs {:?} with {} photons",
                a.0, a.1, b.0, b.1
            )));
        }
    }
    // Per outcome: coherent and distinguishable probabilities and entries.
    type Pair<'a> = (f64, f64, Option<&'a ConditionalOutcome>, Option<&'a ConditionalOutcome>);
    let mut merged: BTreeMap<DetectionOutcome, Pair> = BTreeMap::new();
    for e in &coherent.entries {
        merged.entry(e.outcome.clone()).or_insert((0.0, 0.0, None, None)).0 = e.probability;
        merged.get_mut(&e.outcome).expect("just inserted").2 = Some(e);
    }
    for e in &distinguishable.entries {
        let slot = merged.entry(e.outcome.clone()).or_insert((0.0, 0.0, None, None));
        slot.1 = e.probability;
        slot.3 = Some(e);
    }
    let mut entries = Vec::new();
    for (outcome, (pc, pd, ec, ed)) in merged {
        let wc = v * pc;
        let wd = (1.0 - v) * pd;
        let probability = wc + wd;
        if probability <= 0.0 {
            continue;
        }
        let mut ensemble = Vec::new();
        for (w, e) in [(wc, ec), (wd, ed)] {
            if w <= 0.0 {
                continue;
            }
            if let Some(e) = e {
                ensemble.extend(e.ensemble.iter().map(|(m, s)| (m * (w / probability), s.clone())));
            }
        }
        entries.push(ConditionalOutcome { outcome, probability, ensemble });
    }
    Ok(ConditionalDistribution { entries })
}

/// `(max − min) / (max + min)` of the rates of a curve.
pub fn curve_visibility(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::DegenerateCurve("need at least two points"));
    }
    let max = curve.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) {
        return Err(Error::DegenerateCurve("all rates are zero"));
    }
    Ok((max - min) / (max + min))
}
