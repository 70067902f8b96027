//! Optical elements as slot maps, and circuits built from them.
//!
//! Conventions: the PBS transmits `H` and reflects `V` with coefficient `+1`;
//! the half-wave plate at angle θ is `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`; the
//! Pockels cell at half-wave voltage is `diag(−1, +1)`. Loss never appears as a
//! non-unitary map: a lossy element couples the signal into a reserved mode
//! that no signal detector watches.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockstate::{ModeId, PhotonicState, Slot, SlotMap};

#[derive(Clone, Debug, PartialEq)]
pub struct Pbs {
    pub in_a: ModeId,
    pub in_b: ModeId,
    pub out_a: ModeId,
    pub out_b: ModeId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hwp {
    pub mode: ModeId,
    pub theta_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pockels {
    pub mode: ModeId,
    pub on: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberDelay {
    pub mode: ModeId,
    pub coupling_eta: f64,
    pub delay_ns: f64,
    pub loss_mode: ModeId,
    /// Polarization rotation left over after the fiber controller; 0 is
    /// perfect compensation.
    pub residual_rotation_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analyzer {
    pub mode: ModeId,
    pub theta_deg: f64,
    pub pass_mode: ModeId,
    pub block_mode: ModeId,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Pbs(Pbs),
    Hwp(Hwp),
    Pockels(Pockels),
    FiberDelay(FiberDelay),
    Analyzer(Analyzer),
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn real_matrix(n: usize, rows: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_row_iterator(n, n, rows.iter().map(|&x| re(x)))
}

/// Transmit `H`, reflect `V`, all coefficients `+1`.
///
/// Inputs may coincide with outputs (in-place wiring). When they do not, the
/// permutation is closed by sending the unused output slots back to the freed
/// input slots, which keeps the map unitary on the union.
pub fn pbs_map(e: &Pbs) -> Result<SlotMap> {
    if e.in_a == e.in_b || e.out_a == e.out_b {
        return Err(Error::Validation(format!(
            "PBS ports alias: in ({}, {}), out ({}, {})",
            e.in_a, e.in_b, e.out_a, e.out_b
        )));
    }
    let routes = [
        (Slot::h(&e.in_a), Slot::h(&e.out_a)),
        (Slot::h(&e.in_b), Slot::h(&e.out_b)),
        (Slot::v(&e.in_a), Slot::v(&e.out_b)),
        (Slot::v(&e.in_b), Slot::v(&e.out_a)),
    ];
    let sources: Vec<Slot> = routes.iter().map(|(s, _)| s.clone()).collect();
    let targets: Vec<Slot> = routes.iter().map(|(_, t)| t.clone()).collect();

    // Slots that are targets but not sources need somewhere to go; slots that
    // are sources but not targets are free to receive them.
    let mut spare_from: Vec<Slot> = targets.iter().filter(|t| !sources.contains(t)).cloned().collect();
    let mut spare_to: Vec<Slot> = sources.iter().filter(|s| !targets.contains(s)).cloned().collect();
    spare_from.sort();
    spare_to.sort();
    if spare_from.len() != spare_to.len() {
        return Err(Error::Validation("PBS wiring does not close into a permutation".into()));
    }
    let mut pairs = routes.to_vec();
    pairs.extend(spare_from.into_iter().zip(spare_to));
    SlotMap::permutation(&pairs)
}

pub fn hwp_map(e: &Hwp) -> Result<SlotMap> {
    if !e.theta_deg.is_finite() {
        return Err(Error::Validation("HWP angle must be finite".into()));
    }
    let t = 2.0 * e.theta_deg.to_radians();
    let (s, c) = t.sin_cos();
    SlotMap::new(vec![Slot::h(&e.mode), Slot::v(&e.mode)], real_matrix(2, &[c, s, s, -c]))
}

pub fn pockels_map(e: &Pockels) -> Result<SlotMap> {
    let h = if e.on { -1.0 } else { 1.0 };
    SlotMap::new(vec![Slot::h(&e.mode), Slot::v(&e.mode)], real_matrix(2, &[h, 0.0, 0.0, 1.0]))
}

/// Beamsplitter coupling into `loss_mode` with amplitude transmission `√η`,
/// followed by the residual polarization rotation.
pub fn fiber_map(e: &FiberDelay) -> Result<SlotMap> {
    if !(0.0..=1.0).contains(&e.coupling_eta) {
        return Err(Error::Validation(format!("coupling_eta {} outside [0, 1]", e.coupling_eta)));
    }
    if !(e.delay_ns >= 0.0) || !e.delay_ns.is_finite() {
        return Err(Error::Validation(format!("delay_ns {} must be >= 0", e.delay_ns)));
    }
    if e.loss_mode == e.mode {
        return Err(Error::Validation("fiber loss mode must differ from the signal mode".into()));
    }
    let t = e.coupling_eta.sqrt();
    let r = (1.0 - e.coupling_eta).sqrt();
    let (rs, rc) = e.residual_rotation_deg.to_radians().sin_cos();
    // Slot order: mode H, mode V, loss H, loss V.
    #[rustfmt::skip]
    let coupler = real_matrix(4, &[
        t,   0.0, -r,  0.0,
        0.0, t,   0.0, -r,
        r,   0.0, t,   0.0,
        0.0, r,   0.0, t,
    ]);
    #[rustfmt::skip]
    let rotation = real_matrix(4, &[
        rc,  -rs, 0.0, 0.0,
        rs,  rc,  0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ]);
    SlotMap::new(
        vec![Slot::h(&e.mode), Slot::v(&e.mode), Slot::h(&e.loss_mode), Slot::v(&e.loss_mode)],
        rotation * coupler,
    )
}

/// Projects onto linear polarization θ: that component leaves in `pass_mode`,
/// the orthogonal one in `block_mode` (both labelled `H`).
pub fn analyzer_map(e: &Analyzer) -> Result<SlotMap> {
    if e.pass_mode == e.block_mode || e.pass_mode == e.mode || e.block_mode == e.mode {
        return Err(Error::Validation("analyzer pass, block and input modes must be distinct".into()));
    }
    let (s, c) = e.theta_deg.to_radians().sin_cos();
    // Slot order: mode H, mode V, pass, block.
    #[rustfmt::skip]
    let m = real_matrix(4, &[
        0.0, 0.0, c,   -s,
        0.0, 0.0, s,   c,
        c,   s,   0.0, 0.0,
        -s,  c,   0.0, 0.0,
    ]);
    SlotMap::new(
        vec![Slot::h(&e.mode), Slot::v(&e.mode), Slot::h(&e.pass_mode), Slot::h(&e.block_mode)],
        m,
    )
}

impl Element {
    pub fn slot_map(&self) -> Result<SlotMap> {
        match self {
            Element::Pbs(e) => pbs_map(e),
            Element::Hwp(e) => hwp_map(e),
            Element::Pockels(e) => pockels_map(e),
            Element::FiberDelay(e) => fiber_map(e),
            Element::Analyzer(e) => analyzer_map(e),
        }
    }

    /// Signal modes the element acts on.
    pub fn signal_modes(&self) -> Vec<&ModeId> {
        match self {
            Element::Pbs(e) => vec![&e.in_a, &e.in_b, &e.out_a, &e.out_b],
            Element::Hwp(e) => vec![&e.mode],
            Element::Pockels(e) => vec![&e.mode],
            Element::FiberDelay(e) => vec![&e.mode],
            Element::Analyzer(e) => vec![&e.mode],
        }
    }

    /// Loss, pass and block modes.
    pub fn reserved_modes(&self) -> Vec<&ModeId> {
        match self {
            Element::FiberDelay(e) => vec![&e.loss_mode],
            Element::Analyzer(e) => vec![&e.pass_mode, &e.block_mode],
            _ => Vec::new(),
        }
    }

    pub fn delay_ns(&self) -> f64 {
        match self {
            Element::FiberDelay(e) => e.delay_ns,
            _ => 0.0,
        }
    }
}

pub fn apply_element(state: &PhotonicState, e: &Element) -> Result<PhotonicState> {
    state.apply_slot_map(&e.slot_map()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeRole {
    Signal,
    /// Loss, pass or block mode; never carries the gate's signal.
    Reserved,
}

/// Ordered element list over a registry of named modes.
#[derive(Clone, Debug, Default)]
pub struct Circuit {
    elements: Vec<Element>,
    registry: BTreeMap<ModeId, ModeRole>,
    delays: BTreeMap<ModeId, f64>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, mode: ModeId, role: ModeRole) -> Result<()> {
        if self.registry.contains_key(&mode) {
            return Err(Error::Validation(format!("mode `{mode}` registered twice")));
        }
        self.delays.insert(mode.clone(), 0.0);
        self.registry.insert(mode, role);
        Ok(())
    }

    pub fn with_modes(mut self, modes: &[(&str, ModeRole)]) -> Result<Self> {
        for (name, role) in modes {
            self.register(ModeId::new(*name)?, *role)?;
        }
        Ok(self)
    }

    /// Appends an element after checking its modes against the registry.
    /// Its slot map is built once here so a bad element fails early.
    pub fn push(&mut self, e: Element) -> Result<()> {
        for m in e.signal_modes() {
            match self.registry.get(m) {
                None => return Err(Error::UnknownMode(m.to_string())),
                Some(ModeRole::Reserved) => {
                    return Err(Error::Validation(format!("signal element routed through reserved mode `{m}`")))
                }
                Some(ModeRole::Signal) => {}
            }
        }
        for m in e.reserved_modes() {
            match self.registry.get(m) {
                None => return Err(Error::UnknownMode(m.to_string())),
                Some(ModeRole::Signal) => {
                    return Err(Error::Validation(format!("mode `{m}` must be registered as reserved")))
                }
                Some(ModeRole::Reserved) => {}
            }
        }
        e.slot_map()?;
        if let Element::FiberDelay(f) = &e {
            *self.delays.get_mut(&f.mode).expect("registered above") += f.delay_ns;
        }
        self.elements.push(e);
        Ok(())
    }

    pub fn then(mut self, e: Element) -> Result<Self> {
        self.push(e)?;
        Ok(self)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn role(&self, mode: &ModeId) -> Option<ModeRole> {
        self.registry.get(mode).copied()
    }

    /// Accumulated optical delay on `mode`, in ns.
    pub fn delay_ns(&self, mode: &ModeId) -> f64 {
        self.delays.get(mode).copied().unwrap_or(0.0)
    }

    pub fn apply(&self, state: &PhotonicState) -> Result<PhotonicState> {
        for m in state.modes() {
            if !self.registry.contains_key(&m) {
                return Err(Error::UnknownMode(m.to_string()));
            }
        }
        self.elements.iter().try_fold(state.clone(), |s, e| apply_element(&s, e))
    }
}
