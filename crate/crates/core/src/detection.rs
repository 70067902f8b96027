//! Born-rule detection, outcome projection and post-selection.
//!
//! Detectors watch a whole spatial mode (both polarizations). At two photons
//! "0, 1 or 2 photons at a detector" are all distinguishable in simulation, so
//! doubly-hit detectors are booked as their own outcome; the accept policies
//! reject them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fockstate::{BasisKet, ModeId, PhotonicState, Slot};

pub const D1: &str = "D1";
pub const D2A: &str = "D2a";
pub const D2B: &str = "D2b";

/// Probabilities below this are treated as impossible outcomes.
const PROB_FLOOR: f64 = 1e-24;

#[derive(Clone, Debug, PartialEq)]
pub struct Detector {
    pub id: String,
    pub mode: ModeId,
    pub efficiency: f64,
    /// Reserved; dark counts are not simulated and must be zero.
    pub dark_counts_per_s: f64,
}

impl Detector {
    pub fn new(id: &str, mode: ModeId, efficiency: f64) -> Self {
        Detector { id: id.to_string(), mode, efficiency, dark_counts_per_s: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    detectors: Vec<Detector>,
}

impl DetectorConfig {
    pub fn new(detectors: Vec<Detector>) -> Result<Self> {
        for (i, d) in detectors.iter().enumerate() {
            if !(0.0..=1.0).contains(&d.efficiency) {
                return Err(Error::Validation(format!(
                    "efficiency of `{}` is {}, outside [0, 1]",
                    d.id, d.efficiency
                )));
            }
            if d.dark_counts_per_s != 0.0 {
                return Err(Error::Validation("dark counts are not supported".into()));
            }
            if detectors[..i].iter().any(|o| o.id == d.id) {
                return Err(Error::Validation(format!("detector id `{}` used twice", d.id)));
            }
            if detectors[..i].iter().any(|o| o.mode == d.mode) {
                return Err(Error::Validation(format!("mode `{}` watched twice", d.mode)));
            }
        }
        Ok(DetectorConfig { detectors })
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn get(&self, id: &str) -> Option<&Detector> {
        self.detectors.iter().find(|d| d.id == id)
    }

    fn watching(&self, mode: &ModeId) -> Option<&Detector> {
        self.detectors.iter().find(|d| &d.mode == mode)
    }

    /// Photons arriving at each detector for one ket, plus the rest.
    fn arrivals(&self, ket: &BasisKet) -> DetectionOutcome {
        let mut counts: BTreeMap<String, usize> = self.detectors.iter().map(|d| (d.id.clone(), 0)).collect();
        let mut undetected = 0;
        for s in ket.slots() {
            match self.watching(&s.mode) {
                Some(d) => *counts.get_mut(&d.id).expect("seeded above") += 1,
                None => undetected += 1,
            }
        }
        DetectionOutcome { counts, undetected }
    }
}

/// Registered photon counts per detector, plus photons nobody registered.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectionOutcome {
    counts: BTreeMap<String, usize>,
    undetected: usize,
}

impl DetectionOutcome {
    /// Detectors of `cfg` not named in `counts` registered nothing.
    pub fn new(cfg: &DetectorConfig, counts: &[(&str, usize)], undetected: usize) -> Result<Self> {
        let mut map: BTreeMap<String, usize> = cfg.detectors.iter().map(|d| (d.id.clone(), 0)).collect();
        for (id, n) in counts {
            match map.get_mut(*id) {
                Some(slot) => *slot = *n,
                None => return Err(Error::Validation(format!("no detector `{id}`"))),
            }
        }
        Ok(DetectionOutcome { counts: map, undetected })
    }

    pub fn count(&self, id: &str) -> usize {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }

    pub fn undetected(&self) -> usize {
        self.undetected
    }

    pub fn total_photons(&self) -> usize {
        self.counts.values().sum::<usize>() + self.undetected
    }

    fn same_detectors(&self, other: &DetectionOutcome) -> bool {
        self.counts.keys().eq(other.counts.keys())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}

/// Probability that photons arriving as `arrived` are registered as
/// `registered`, with independent per-photon efficiencies.
pub fn registration_probability(
    arrived: &DetectionOutcome,
    registered: &DetectionOutcome,
    cfg: &DetectorConfig,
) -> f64 {
    if !arrived.same_detectors(registered) || arrived.total_photons() != registered.total_photons() {
        return 0.0;
    }
    let mut p = 1.0;
    for d in &cfg.detectors {
        let (n, k) = (arrived.count(&d.id), registered.count(&d.id));
        if k > n {
            return 0.0;
        }
        p *= binomial(n, k) * d.efficiency.powi(k as i32) * (1.0 - d.efficiency).powi((n - k) as i32);
    }
    p
}

/// Every way `arrived` can be registered, with its probability.
pub fn registrations(arrived: &DetectionOutcome, cfg: &DetectorConfig) -> Vec<(DetectionOutcome, f64)> {
    let mut out = vec![(arrived.clone(), 1.0)];
    for d in &cfg.detectors {
        let n = arrived.count(&d.id);
        let mut next = Vec::new();
        for (o, p) in &out {
            for k in 0..=n {
                let w = binomial(n, k) * d.efficiency.powi(k as i32) * (1.0 - d.efficiency).powi((n - k) as i32);
                if w == 0.0 {
                    continue;
                }
                let mut o = o.clone();
                o.counts.insert(d.id.clone(), k);
                o.undetected += n - k;
                next.push((o, p * w));
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    entries: Vec<(DetectionOutcome, f64)>,
}

impl OutcomeDistribution {
    /// Merges repeated outcomes and drops impossible ones.
    pub fn new(entries: impl IntoIterator<Item = (DetectionOutcome, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<DetectionOutcome, f64> = BTreeMap::new();
        for (o, p) in entries {
            if !(p >= 0.0) {
                return Err(Error::Validation(format!("negative probability {p}")));
            }
            *merged.entry(o).or_insert(0.0) += p;
        }
        Ok(OutcomeDistribution { entries: merged.into_iter().filter(|(_, p)| *p > PROB_FLOOR).collect() })
    }

    pub fn entries(&self) -> &[(DetectionOutcome, f64)] {
        &self.entries
    }

    pub fn probability(&self, outcome: &DetectionOutcome) -> f64 {
        self.entries.iter().find(|(o, _)| o == outcome).map_or(0.0, |(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

/// Born-rule distribution over registered detector patterns, efficiency
/// folded in.
pub fn outcome_distribution(state: &PhotonicState, cfg: &DetectorConfig) -> OutcomeDistribution {
    let mut arrived: BTreeMap<DetectionOutcome, f64> = BTreeMap::new();
    for (ket, amp) in state.iter() {
        *arrived.entry(cfg.arrivals(ket)).or_insert(0.0) += amp.norm_sqr();
    }
    let folded = arrived
        .into_iter()
        .flat_map(|(o, p)| registrations(&o, cfg).into_iter().map(move |(r, w)| (r, p * w)));
    OutcomeDistribution::new(folded).expect("Born weights are non-negative")
}

/// Splits the part of `state` whose arrivals match `outcome` by the exact
/// detected record (which slots the detectors absorbed). Returns each record's
/// unnormalized residual state on the undetected modes.
fn residuals_by_record(
    state: &PhotonicState,
    outcome: &DetectionOutcome,
    cfg: &DetectorConfig,
) -> Vec<PhotonicState> {
    let mut groups: BTreeMap<Vec<Slot>, Vec<(BasisKet, Complex64)>> = BTreeMap::new();
    for (ket, amp) in state.iter() {
        if &cfg.arrivals(ket) != outcome {
            continue;
        }
        let (detected, rest): (Vec<Slot>, Vec<Slot>) =
            ket.slots().iter().cloned().partition(|s| cfg.watching(&s.mode).is_some());
        // Detector modes and the rest share no slot, so the Fock ket factorizes
        // and the residual keeps the amplitude as is.
        let rest = BasisKet::new(rest).expect("subset of a valid ket");
        groups.entry(detected).or_default().push((rest, *amp));
    }
    groups
        .into_values()
        .map(|entries| {
            let mut s = PhotonicState::from_amplitudes(entries).expect("one photon number per record");
            if s.is_empty() {
                s = PhotonicState::empty(outcome.undetected);
            }
            s
        })
        .filter(|s| s.norm_sq() > PROB_FLOOR)
        .collect()
}

/// Conditional state of the undetected photons given that every photon
/// reaching a detector was registered as in `outcome`.
///
/// The returned probability includes the detector efficiencies for the
/// registered photons. Errors if the outcome is impossible, or if different
/// detected polarizations leave the remainder in a mixture.
pub fn project_outcome(
    state: &PhotonicState,
    outcome: &DetectionOutcome,
    cfg: &DetectorConfig,
) -> Result<(PhotonicState, f64)> {
    let records = residuals_by_record(state, outcome, cfg);
    match records.len() {
        0 => Err(Error::ZeroProbability),
        1 => {
            let residual = &records[0];
            let arrival_p = residual.norm_sq();
            let eff: f64 = cfg
                .detectors
                .iter()
                .map(|d| d.efficiency.powi(outcome.count(&d.id) as i32))
                .product();
            if arrival_p * eff <= PROB_FLOOR {
                return Err(Error::ZeroProbability);
            }
            Ok((residual.normalize()?, arrival_p * eff))
        }
        n => Err(Error::MixedConditional(n)),
    }
}

/// Arrival pattern with the mixture of conditional pure states it leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalOutcome {
    pub outcome: DetectionOutcome,
    pub probability: f64,
    /// `(weight, normalized state)`; weights sum to one. Empty when the
    /// remainder is not tracked (see `imperfections`).
    pub ensemble: Vec<(f64, PhotonicState)>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConditionalDistribution {
    pub entries: Vec<ConditionalOutcome>,
}

impl ConditionalDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn get(&self, outcome: &DetectionOutcome) -> Option<&ConditionalOutcome> {
        self.entries.iter().find(|e| &e.outcome == outcome)
    }

    /// The plain arrival distribution.
    pub fn outcomes(&self) -> OutcomeDistribution {
        OutcomeDistribution::new(self.entries.iter().map(|e| (e.outcome.clone(), e.probability)))
            .expect("probabilities are non-negative")
    }
}

/// Arrival patterns (efficiency ignored) together with the conditional state
/// of the undetected photons for each.
pub fn conditional_distribution(state: &PhotonicState, cfg: &DetectorConfig) -> ConditionalDistribution {
    let mut patterns: Vec<DetectionOutcome> = state.iter().map(|(k, _)| cfg.arrivals(k)).collect();
    patterns.sort();
    patterns.dedup();
    let entries = patterns
        .into_iter()
        .filter_map(|outcome| {
            let records = residuals_by_record(state, &outcome, cfg);
            let probability: f64 = records.iter().map(|r| r.norm_sq()).sum();
            if probability <= PROB_FLOOR {
                return None;
            }
            let ensemble = records
                .into_iter()
                .map(|r| (r.norm_sq() / probability, r.normalize().expect("non-zero record")))
                .collect();
            Some(ConditionalOutcome { outcome, probability, ensemble })
        })
        .collect();
    ConditionalDistribution { entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcceptPolicy {
    /// Only a lone `D2a` click is kept.
    PassiveD2aOnly,
    /// Exactly one of `D2a`, `D2b` registered exactly one photon.
    OrGate,
}

pub fn accept(outcome: &DetectionOutcome, policy: AcceptPolicy) -> bool {
    let (a, b) = (outcome.count(D2A), outcome.count(D2B));
    match policy {
        AcceptPolicy::PassiveD2aOnly => a == 1 && b == 0,
        AcceptPolicy::OrGate => (a == 1 && b == 0) || (a == 0 && b == 1),
    }
}

/// Index into `weights` drawn with probability proportional to its weight.
pub fn sample_index<R: Rng + ?Sized>(weights: impl IntoIterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let total: f64 = weights.clone().into_iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.into_iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Draws one outcome. Deterministic in the state of `rng`.
pub fn sample_outcome<'a, R: Rng + ?Sized>(dist: &'a OutcomeDistribution, rng: &mut R) -> &'a DetectionOutcome {
    let i = sample_index(dist.entries.iter().map(|(_, p)| *p), rng);
    &dist.entries[i].0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{Circuit, Element, Hwp, ModeRole, Pbs};
    use crate::fockstate::{mode, JonesVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ancilla_cfg() -> DetectorConfig {
        DetectorConfig::new(vec![Detector::new(D2A, mode("2a"), 1.0), Detector::new(D2B, mode("2b"), 1.0)])
            .unwrap()
    }

    fn parity_output(jones: JonesVector) -> PhotonicState {
        let c = Circuit::new()
            .with_modes(&[
                ("1", ModeRole::Signal),
                ("2", ModeRole::Signal),
                ("2x", ModeRole::Signal),
                ("2a", ModeRole::Signal),
                ("2b", ModeRole::Signal),
            ])
            .unwrap()
            .then(Element::Pbs(Pbs { in_a: mode("1"), in_b: mode("2"), out_a: mode("1"), out_b: mode("2") }))
            .unwrap()
            .then(Element::Hwp(Hwp { mode: mode("2"), theta_deg: 22.5 }))
            .unwrap()
            .then(Element::Pbs(Pbs { in_a: mode("2"), in_b: mode("2x"), out_a: mode("2a"), out_b: mode("2b") }))
            .unwrap();
        let t = PhotonicState::single_photon(&mode("1"), jones)
            .unwrap()
            .tensor(&PhotonicState::single_photon(&mode("2"), JonesVector::linear(45.0)).unwrap())
            .unwrap();
        c.apply(&t).unwrap()
    }

    #[test]
    fn parity_output_distribution() {
        let cfg = ancilla_cfg();
        let dist = outcome_distribution(&parity_output(JonesVector::linear(30.0)), &cfg);
        let a = DetectionOutcome::new(&cfg, &[(D2A, 1)], 1).unwrap();
        let b = DetectionOutcome::new(&cfg, &[(D2B, 1)], 1).unwrap();
        assert!((dist.probability(&a) - 0.25).abs() < 1e-15);
        assert!((dist.probability(&b) - 0.25).abs() < 1e-15);
        let bunched: f64 = dist.entries().iter().filter(|(o, _)| *o != a && *o != b).map(|(_, p)| p).sum();
        assert!((bunched - 0.5).abs() < 1e-15);
        assert!((dist.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn efficiency_fold_on_single_photon() {
        let h = PhotonicState::single_photon(&mode("1"), JonesVector::real(1.0, 0.0)).unwrap();
        let full = DetectorConfig::new(vec![Detector::new(D1, mode("1"), 1.0)]).unwrap();
        let fired = DetectionOutcome::new(&full, &[(D1, 1)], 0).unwrap();
        assert_eq!(outcome_distribution(&h, &full).probability(&fired), 1.0);

        let half = DetectorConfig::new(vec![Detector::new(D1, mode("1"), 0.5)]).unwrap();
        let dist = outcome_distribution(&h, &half);
        assert_eq!(dist.probability(&fired), 0.5);
        assert_eq!(dist.probability(&DetectionOutcome::new(&half, &[], 1).unwrap()), 0.5);
    }

    #[test]
    fn project_d2a_and_d2b_branches() {
        let cfg = ancilla_cfg();
        let input = JonesVector::linear(30.0);
        let out = parity_output(input);
        let (s, p) = project_outcome(&out, &DetectionOutcome::new(&cfg, &[(D2A, 1)], 1).unwrap(), &cfg).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
        let want = PhotonicState::single_photon(&mode("1"), input).unwrap();
        assert!((s.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);

        let (s, p) = project_outcome(&out, &DetectionOutcome::new(&cfg, &[(D2B, 1)], 1).unwrap(), &cfg).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
        let flipped = PhotonicState::single_photon(&mode("1"), JonesVector::real(-input.alpha.re, input.beta.re)).unwrap();
        assert!((s.fidelity(&flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn both_ancilla_detectors_firing_is_impossible() {
        let cfg = ancilla_cfg();
        let o = DetectionOutcome::new(&cfg, &[(D2A, 1), (D2B, 1)], 0).unwrap();
        assert!(matches!(
            project_outcome(&parity_output(JonesVector::linear(30.0)), &o, &cfg),
            Err(Error::ZeroProbability)
        ));
    }

    #[test]
    fn mixed_records_are_reported() {
        // Detector sees both polarizations of mode 1 while mode 2 is entangled
        // with them: the remainder is a mixture.
        let cfg = DetectorConfig::new(vec![Detector::new(D1, mode("1"), 1.0)]).unwrap();
        let s = PhotonicState::from_amplitudes([
            ("1H,2H".parse().unwrap(), Complex64::new(0.6, 0.0)),
            ("1V,2V".parse().unwrap(), Complex64::new(0.8, 0.0)),
        ])
        .unwrap();
        let o = DetectionOutcome::new(&cfg, &[(D1, 1)], 1).unwrap();
        assert!(matches!(project_outcome(&s, &o, &cfg), Err(Error::MixedConditional(2))));
        let cd = conditional_distribution(&s, &cfg);
        assert_eq!(cd.entries.len(), 1);
        assert_eq!(cd.entries[0].ensemble.len(), 2);
        assert!((cd.entries[0].ensemble.iter().map(|(w, _)| w).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn accept_policies() {
        let cfg = ancilla_cfg();
        let a = DetectionOutcome::new(&cfg, &[(D2A, 1)], 1).unwrap();
        let b = DetectionOutcome::new(&cfg, &[(D2B, 1)], 1).unwrap();
        let none = DetectionOutcome::new(&cfg, &[], 2).unwrap();
        let double = DetectionOutcome::new(&cfg, &[(D2A, 2)], 0).unwrap();
        assert!(accept(&a, AcceptPolicy::PassiveD2aOnly));
        assert!(!accept(&b, AcceptPolicy::PassiveD2aOnly));
        assert!(accept(&b, AcceptPolicy::OrGate));
        assert!(!accept(&none, AcceptPolicy::OrGate));
        assert!(!accept(&double, AcceptPolicy::OrGate));
    }

    #[test]
    fn sampling_a_certain_outcome() {
        let cfg = ancilla_cfg();
        let a = DetectionOutcome::new(&cfg, &[(D2A, 1)], 1).unwrap();
        let dist = OutcomeDistribution::new([(a.clone(), 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_outcome(&dist, &mut rng), &a);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let cfg = ancilla_cfg();
        let dist = outcome_distribution(&parity_output(JonesVector::linear(30.0)), &cfg);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200).map(|_| sample_outcome(&dist, &mut rng).clone()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    #[test]
    fn sampled_frequency_within_three_sigma() {
        let cfg = ancilla_cfg();
        let dist = outcome_distribution(&parity_output(JonesVector::linear(30.0)), &cfg);
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tally: BTreeMap<DetectionOutcome, usize> = BTreeMap::new();
        for _ in 0..n {
            *tally.entry(sample_outcome(&dist, &mut rng).clone()).or_insert(0) += 1;
        }
        for (o, p) in dist.entries() {
            let f = tally.get(o).copied().unwrap_or(0) as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f - p).abs() < 3.0 * sigma, "{o:?}: {f} vs {p}");
        }
    }

    #[test]
    fn registrations_sum_to_one() {
        let cfg = DetectorConfig::new(vec![Detector::new(D2A, mode("2a"), 0.3), Detector::new(D2B, mode("2b"), 0.9)])
            .unwrap();
        let arrived = DetectionOutcome::new(&cfg, &[(D2A, 2)], 0).unwrap();
        let regs = registrations(&arrived, &cfg);
        assert!((regs.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-15);
        for (r, p) in &regs {
            assert!((registration_probability(&arrived, r, &cfg) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::new(vec![Detector::new(D1, mode("1"), 1.2)]).is_err());
        assert!(DetectorConfig::new(vec![Detector::new(D1, mode("1"), 1.0), Detector::new(D1, mode("2"), 1.0)]).is_err());
        let mut d = Detector::new(D1, mode("1"), 1.0);
        d.dark_counts_per_s = 10.0;
        assert!(DetectorConfig::new(vec![d]).is_err());
    }
}
