//! Exact state algebra for up to two photons.
//!
//! A [`PhotonicState`] is a sparse map from occupation kets to complex
//! amplitudes. Kets are multisets of [`Slot`]s (a spatial mode together with
//! a polarization) normalized in the usual Fock way, so that `|amp|²` is
//! directly a Born-rule probability even when both photons share a slot.
//!
//! Linear optics acts on creation operators: a [`SlotMap`] replaces each
//! `a†(slot_j)` by `Σ_i M[i][j] a†(slot_i)`, and [`PhotonicState::apply_slot_map`]
//! re-expands the product of creation operators for every ket.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on photons in any state.
pub const MAX_PHOTONS: usize = 2;

/// Default amplitude magnitude below which entries are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-15;

/// Tolerance for the unitarity check of slot maps.
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerance for `|α|² + |β|² = 1` on input preparations.
pub const NORM_TOL: f64 = 1e-12;

/// Name of a spatial mode, e.g. `"1"`, `"2a"` or `"loss0"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId(String);

impl ModeId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(Error::InvalidMode(name));
        }
        Ok(ModeId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Shorthand for a literal mode name. Panics on an invalid name.
pub fn mode(name: &str) -> ModeId {
    ModeId::new(name).expect("literal mode name must be valid")
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Polarization; `H` encodes logical 0 and `V` logical 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];
}

/// One single-photon degree of freedom. Ordered by mode name, then `H < V`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub mode: ModeId,
    pub pol: Pol,
}

impl Slot {
    pub fn new(mode: ModeId, pol: Pol) -> Self {
        Slot { mode, pol }
    }

    pub fn h(mode: &ModeId) -> Self {
        Slot::new(mode.clone(), Pol::H)
    }

    pub fn v(mode: &ModeId) -> Self {
        Slot::new(mode.clone(), Pol::V)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.pol {
            Pol::H => 'H',
            Pol::V => 'V',
        };
        write!(f, "{}{}", self.mode, p)
    }
}

/// Occupation-number basis ket, stored as a sorted multiset of slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisKet {
    slots: Vec<Slot>,
}

impl BasisKet {
    pub fn vacuum() -> Self {
        BasisKet { slots: Vec::new() }
    }

    pub fn new(mut slots: Vec<Slot>) -> Result<Self> {
        if slots.len() > MAX_PHOTONS {
            return Err(Error::PhotonCap(slots.len()));
        }
        slots.sort();
        Ok(BasisKet { slots })
    }

    pub fn photon_number(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn occupation(&self, slot: &Slot) -> usize {
        self.slots.iter().filter(|s| *s == slot).count()
    }

    /// Photons sitting in `mode`, either polarization.
    pub fn count_in_mode(&self, mode: &ModeId) -> usize {
        self.slots.iter().filter(|s| &s.mode == mode).count()
    }

    pub fn touches_mode(&self, mode: &ModeId) -> bool {
        self.count_in_mode(mode) > 0
    }

    /// `√(Π n_s!)` over the ket's occupations.
    fn factorial_weight(&self) -> f64 {
        let mut w = 1.0;
        let mut i = 0;
        while i < self.slots.len() {
            let mut n = 1;
            while i + n < self.slots.len() && self.slots[i + n] == self.slots[i] {
                n += 1;
            }
            w *= (1..=n).product::<usize>() as f64;
            i += n;
        }
        w.sqrt()
    }
}

impl fmt::Display for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("⟩")
    }
}

impl FromStr for BasisKet {
    type Err = Error;

    /// Parses `|1H,2V⟩` (the bars are optional). Order of entries is free.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('⟩')
            .trim_end_matches('>')
            .trim();
        if body.is_empty() {
            return Ok(BasisKet::vacuum());
        }
        let mut slots = Vec::new();
        for part in body.split(',') {
            let part = part.trim();
            let (name, pol) = part.split_at(part.len().saturating_sub(1));
            let pol = match pol {
                "H" => Pol::H,
                "V" => Pol::V,
                _ => return Err(Error::Validation(format!("bad slot {part:?}"))),
            };
            slots.push(Slot::new(ModeId::new(name)?, pol));
        }
        BasisKet::new(slots)
    }
}

/// Single-photon polarization amplitudes `α|H⟩ + β|V⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesVector {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl JonesVector {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        JonesVector { alpha, beta }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        JonesVector::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// Linear polarization at `theta_deg` from horizontal.
    pub fn linear(theta_deg: f64) -> Self {
        let t = theta_deg.to_radians();
        JonesVector::real(t.cos(), t.sin())
    }

    /// `cos θ |H⟩ + e^{iφ} sin θ |V⟩`.
    pub fn elliptical(theta_deg: f64, phase_deg: f64) -> Self {
        let t = theta_deg.to_radians();
        JonesVector::new(
            Complex64::new(t.cos(), 0.0),
            Complex64::from_polar(t.sin(), phase_deg.to_radians()),
        )
    }

    pub fn norm_sq(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.norm_sq();
        if (n - 1.0).abs() > NORM_TOL || !n.is_finite() {
            return Err(Error::Validation(format!(
                "Jones vector is not normalized (|α|²+|β|² = {n})"
            )));
        }
        Ok(())
    }
}

/// A unitary acting on an ordered list of slots.
///
/// Column `j` is the image of `a†(slots[j])`.
#[derive(Clone, Debug)]
pub struct SlotMap {
    slots: Vec<Slot>,
    matrix: DMatrix<Complex64>,
}

impl SlotMap {
    pub fn new(slots: Vec<Slot>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = slots.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Validation(format!(
                "slot map is {}x{} for {n} slots",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut sorted = slots.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n {
            return Err(Error::Validation("slot map lists a slot twice".into()));
        }
        let dev = unitarity_deviation(&matrix);
        if !(dev <= UNITARY_TOL) {
            return Err(Error::NotUnitary(dev));
        }
        Ok(SlotMap { slots, matrix })
    }

    /// Builds a permutation map from `(from, to)` pairs.
    pub fn permutation(pairs: &[(Slot, Slot)]) -> Result<Self> {
        let slots: Vec<Slot> = pairs.iter().map(|(a, _)| a.clone()).collect();
        let n = slots.len();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (j, (_, to)) in pairs.iter().enumerate() {
            let i = slots
                .iter()
                .position(|s| s == to)
                .ok_or_else(|| Error::Validation(format!("permutation target {to} not in domain")))?;
            m[(i, j)] = Complex64::new(1.0, 0.0);
        }
        SlotMap::new(slots, m)
    }

    pub fn identity(slots: Vec<Slot>) -> Result<Self> {
        let n = slots.len();
        SlotMap::new(slots, DMatrix::identity(n, n))
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `other ∘ self`: apply `self` first, then `other`. Both must list the
    /// same slots in the same order.
    pub fn then(&self, other: &SlotMap) -> Result<SlotMap> {
        if self.slots != other.slots {
            return Err(Error::Validation("composed maps act on different slot lists".into()));
        }
        SlotMap::new(self.slots.clone(), &other.matrix * &self.matrix)
    }

    fn index_of(&self, slot: &Slot) -> Option<usize> {
        self.slots.iter().position(|s| s == slot)
    }
}

/// Largest entry of `|M†M − I|`.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Pure state of 0, 1 or 2 photons.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonicState {
    amplitudes: BTreeMap<BasisKet, Complex64>,
    photons: usize,
    norm_hint: f64,
}

impl PhotonicState {
    /// The state with no amplitude at all (norm zero).
    pub fn empty(photons: usize) -> Self {
        PhotonicState { amplitudes: BTreeMap::new(), photons, norm_hint: 0.0 }
    }

    pub fn vacuum() -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(BasisKet::vacuum(), Complex64::new(1.0, 0.0));
        PhotonicState { amplitudes, photons: 0, norm_hint: 1.0 }
    }

    /// Collects amplitudes, summing repeated kets and pruning at
    /// [`DEFAULT_PRUNE`]. An empty iterator yields an empty one-photon state.
    pub fn from_amplitudes<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisKet, Complex64)>,
    {
        Self::from_amplitudes_pruned(entries, DEFAULT_PRUNE)
    }

    pub fn from_amplitudes_pruned<I>(entries: I, prune: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisKet, Complex64)>,
    {
        let mut amplitudes: BTreeMap<BasisKet, Complex64> = BTreeMap::new();
        let mut photons = None;
        for (ket, amp) in entries {
            let n = ket.photon_number();
            match photons {
                None => photons = Some(n),
                Some(p) if p != n => return Err(Error::PhotonNumberMismatch(p, n)),
                _ => {}
            }
            *amplitudes.entry(ket).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        amplitudes.retain(|_, a| a.norm() > prune);
        let norm_hint = amplitudes.values().map(|a| a.norm_sqr()).sum();
        Ok(PhotonicState { amplitudes, photons: photons.unwrap_or(1), norm_hint })
    }

    /// `α|H_mode⟩ + β|V_mode⟩`.
    pub fn single_photon(mode: &ModeId, jones: JonesVector) -> Result<Self> {
        jones.validate()?;
        Self::from_amplitudes([
            (BasisKet::new(vec![Slot::h(mode)])?, jones.alpha),
            (BasisKet::new(vec![Slot::v(mode)])?, jones.beta),
        ])
    }

    pub fn photon_number(&self) -> usize {
        self.photons
    }

    pub fn amplitude(&self, ket: &BasisKet) -> Complex64 {
        self.amplitudes.get(ket).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisKet, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Squared norm as of the last construction.
    pub fn norm_hint(&self) -> f64 {
        self.norm_hint
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        let s = 1.0 / n.sqrt();
        let mut out = self.clone();
        out.amplitudes.values_mut().for_each(|a| *a *= s);
        out.norm_hint = out.norm_sq();
        Ok(out)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.amplitudes.values_mut().for_each(|a| *a *= factor);
        out.amplitudes.retain(|_, a| a.norm() > DEFAULT_PRUNE);
        out.norm_hint = out.norm_sq();
        out
    }

    /// Spatial modes holding any amplitude.
    pub fn modes(&self) -> Vec<ModeId> {
        let mut m: Vec<ModeId> = self
            .amplitudes
            .keys()
            .flat_map(|k| k.slots().iter().map(|s| s.mode.clone()))
            .collect();
        m.sort();
        m.dedup();
        m
    }

    /// Product of states on disjoint spatial modes.
    pub fn tensor(&self, other: &PhotonicState) -> Result<Self> {
        let mine = self.modes();
        if let Some(shared) = other.modes().into_iter().find(|m| mine.contains(m)) {
            return Err(Error::OverlappingModes(shared.to_string()));
        }
        let total = self.photons + other.photons;
        if total > MAX_PHOTONS {
            return Err(Error::PhotonCap(total));
        }
        let mut entries = Vec::with_capacity(self.len() * other.len());
        for (ka, aa) in &self.amplitudes {
            for (kb, ab) in &other.amplitudes {
                let mut slots = ka.slots().to_vec();
                slots.extend_from_slice(kb.slots());
                let ket = BasisKet::new(slots)?;
                // Disjoint modes: occupations never merge, so the Fock weights
                // of the factors carry over unchanged.
                entries.push((ket, aa * ab));
            }
        }
        let mut out = Self::from_amplitudes(entries)?;
        out.photons = total;
        Ok(out)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PhotonicState) -> Result<Complex64> {
        if self.photons != other.photons {
            return Err(Error::PhotonNumberMismatch(self.photons, other.photons));
        }
        Ok(self
            .amplitudes
            .iter()
            .map(|(k, a)| a.conj() * other.amplitude(k))
            .sum())
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &PhotonicState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Re-expands every ket under the creation-operator substitution given by
    /// `map`. Slots the map does not list are left untouched.
    pub fn apply_slot_map(&self, map: &SlotMap) -> Result<Self> {
        let zero = Complex64::new(0.0, 0.0);
        let mut out: BTreeMap<BasisKet, Complex64> = BTreeMap::new();
        for (ket, amp) in &self.amplitudes {
            let mut fixed = Vec::new();
            let mut mapped = Vec::new();
            for s in ket.slots() {
                match map.index_of(s) {
                    Some(j) => mapped.push(j),
                    None => fixed.push(s.clone()),
                }
            }
            let in_weight = ket.factorial_weight();

            // Products of mapped creation operators, keyed by sorted target
            // indices.
            let mut terms: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
            terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
            for &j in &mapped {
                let mut next: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
                for (idx, c) in &terms {
                    for i in 0..map.slots.len() {
                        let m = map.matrix[(i, j)];
                        if m == zero {
                            continue;
                        }
                        let mut key = idx.clone();
                        key.push(i);
                        key.sort_unstable();
                        *next.entry(key).or_insert(zero) += c * m;
                    }
                }
                terms = next;
            }

            for (idx, c) in terms {
                let mut slots = fixed.clone();
                slots.extend(idx.iter().map(|&i| map.slots[i].clone()));
                let out_ket = BasisKet::new(slots)?;
                let w = out_ket.factorial_weight() / in_weight;
                *out.entry(out_ket).or_insert(zero) += amp * c * w;
            }
        }
        let mut state = Self::from_amplitudes(out)?;
        state.photons = self.photons;
        Ok(state)
    }

    /// Drops every ket touching `mode` and returns what is left (unnormalized).
    pub fn without_mode(&self, mode: &ModeId) -> Self {
        let mut out = self.clone();
        out.amplitudes.retain(|k, _| !k.touches_mode(mode));
        out.norm_hint = out.norm_sq();
        out
    }
}

impl fmt::Display for PhotonicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, a)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, k)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ket(s: &str) -> BasisKet {
        s.parse().unwrap()
    }

    #[test]
    fn mode_ids_reject_empty_names() {
        assert!(ModeId::new("").is_err());
        assert!(ModeId::new("a b").is_err());
        assert_eq!(mode("2a").as_str(), "2a");
    }

    #[test]
    fn slot_order_is_mode_then_polarization() {
        let mut s = vec![Slot::v(&mode("2")), Slot::h(&mode("2")), Slot::v(&mode("1"))];
        s.sort();
        assert_eq!(s, vec![Slot::v(&mode("1")), Slot::h(&mode("2")), Slot::v(&mode("2"))]);
    }

    #[test]
    fn ket_parse_is_canonical() {
        assert_eq!(ket("|2V,1H⟩"), ket("1H,2V"));
        assert_eq!(ket("|2aH,1V⟩").to_string(), "|1V,2aH⟩");
        assert!("1H,1V,2H".parse::<BasisKet>().is_err());
        assert!("1X".parse::<BasisKet>().is_err());
        assert_eq!(ket("||⟩").photon_number(), 0);
    }

    #[test]
    fn single_photon_basis_state() {
        let s = PhotonicState::single_photon(&mode("1"), JonesVector::real(1.0, 0.0)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&ket("1H")), c(1.0));
    }

    #[test]
    fn single_photon_thirty_degrees() {
        let s = PhotonicState::single_photon(&mode("1"), JonesVector::linear(30.0)).unwrap();
        assert!((s.amplitude(&ket("1H")).re - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((s.amplitude(&ket("1V")).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_photon_rejects_unnormalized_jones() {
        let err = PhotonicState::single_photon(&mode("1"), JonesVector::real(1.0, 1.0));
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn tensor_of_basis_states() {
        let h1 = PhotonicState::single_photon(&mode("1"), JonesVector::real(1.0, 0.0)).unwrap();
        let v2 = PhotonicState::single_photon(&mode("2"), JonesVector::real(0.0, 1.0)).unwrap();
        let t = h1.tensor(&v2).unwrap();
        assert_eq!(t.photon_number(), 2);
        assert_eq!(t.len(), 1);
        assert_eq!(t.amplitude(&ket("1H,2V")), c(1.0));
    }

    #[test]
    fn tensor_of_input_and_ancilla_has_four_terms() {
        let input = PhotonicState::single_photon(&mode("1"), JonesVector::linear(30.0)).unwrap();
        let anc = PhotonicState::single_photon(&mode("2"), JonesVector::linear(45.0)).unwrap();
        let t = input.tensor(&anc).unwrap();
        // Expanded by hand: (√3/2 H + 1/2 V)(H + V)/√2.
        let big = 3f64.sqrt() / (2.0 * 2f64.sqrt());
        let small = 1.0 / (2.0 * 2f64.sqrt());
        for (k, want) in [("1H,2H", big), ("1H,2V", big), ("1V,2H", small), ("1V,2V", small)] {
            assert!((t.amplitude(&ket(k)).re - want).abs() < 1e-15, "{k}");
        }
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn tensor_rejects_shared_mode() {
        let h1 = PhotonicState::single_photon(&mode("1"), JonesVector::real(1.0, 0.0)).unwrap();
        assert!(matches!(h1.tensor(&h1), Err(Error::OverlappingModes(_))));
    }

    #[test]
    fn norm_of_empty_is_zero() {
        assert_eq!(PhotonicState::empty(2).norm_sq(), 0.0);
        assert!(PhotonicState::empty(2).normalize().is_err());
    }

    #[test]
    fn fidelity_examples() {
        let a = PhotonicState::single_photon(&mode("1"), JonesVector::linear(30.0)).unwrap();
        let b = PhotonicState::single_photon(&mode("1"), JonesVector::linear(150.0)).unwrap();
        assert!((a.fidelity(&a).unwrap() - 1.0).abs() < 1e-15);
        assert!((a.fidelity(&b).unwrap() - 0.25).abs() < 1e-15);
        let h = PhotonicState::single_photon(&mode("1"), JonesVector::real(1.0, 0.0)).unwrap();
        let v = PhotonicState::single_photon(&mode("1"), JonesVector::real(0.0, 1.0)).unwrap();
        assert_eq!(h.fidelity(&v).unwrap(), 0.0);
        assert!(matches!(h.fidelity(&PhotonicState::vacuum()), Err(Error::PhotonNumberMismatch(1, 0))));
    }

    #[test]
    fn identity_map_leaves_state_alone() {
        let input = PhotonicState::single_photon(&mode("1"), JonesVector::linear(30.0)).unwrap();
        let anc = PhotonicState::single_photon(&mode("2"), JonesVector::linear(45.0)).unwrap();
        let t = input.tensor(&anc).unwrap();
        let id = SlotMap::identity(vec![Slot::h(&mode("1")), Slot::v(&mode("1"))]).unwrap();
        assert_eq!(t.apply_slot_map(&id).unwrap(), t);
    }

    #[test]
    fn swap_moves_photon() {
        let v1 = PhotonicState::single_photon(&mode("1"), JonesVector::real(0.0, 1.0)).unwrap();
        let swap = SlotMap::permutation(&[
            (Slot::v(&mode("1")), Slot::v(&mode("2"))),
            (Slot::v(&mode("2")), Slot::v(&mode("1"))),
        ])
        .unwrap();
        let out = v1.apply_slot_map(&swap).unwrap();
        assert_eq!(out.amplitude(&ket("2V")), c(1.0));
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn balanced_splitter_bunches_two_photons() {
        // Hong-Ou-Mandel: |1H,2H⟩ through a 50:50 coupler leaves no
        // coincidence term and √2/2 on each doubly occupied ket.
        let slots = vec![Slot::h(&mode("1")), Slot::h(&mode("2"))];
        let r = FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(2, 2, &[c(r), c(r), c(r), c(-r)]);
        let map = SlotMap::new(slots, m).unwrap();
        let s = PhotonicState::from_amplitudes([(ket("1H,2H"), c(1.0))]).unwrap();
        let out = s.apply_slot_map(&map).unwrap();
        assert!(out.amplitude(&ket("1H,2H")).norm() < 1e-15);
        assert!((out.amplitude(&ket("1H,1H")).re - r).abs() < 1e-15);
        assert!((out.amplitude(&ket("2H,2H")).re + r).abs() < 1e-15);
        assert!((out.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_map_is_rejected() {
        let slots = vec![Slot::h(&mode("1")), Slot::v(&mode("1"))];
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.5)]);
        assert!(matches!(SlotMap::new(slots, m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn photon_cap_is_enforced() {
        assert!(matches!(BasisKet::new(vec![Slot::h(&mode("1")); 3]), Err(Error::PhotonCap(3))));
    }

    #[test]
    fn mixed_photon_numbers_are_rejected() {
        let r = PhotonicState::from_amplitudes([(ket("1H"), c(1.0)), (ket("1H,2H"), c(1.0))]);
        assert!(matches!(r, Err(Error::PhotonNumberMismatch(1, 2))));
    }

    #[test]
    fn tiny_amplitudes_are_pruned() {
        let s = PhotonicState::from_amplitudes([(ket("1H"), c(1.0)), (ket("1V"), c(1e-17))]).unwrap();
        assert_eq!(s.len(), 1);
        let kept =
            PhotonicState::from_amplitudes_pruned([(ket("1H"), c(1.0)), (ket("1V"), c(1e-17))], 0.0)
                .unwrap();
        assert_eq!(kept.len(), 2);
    }
}
