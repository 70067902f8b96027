//! Classical feed-forward: which correction an ancilla click calls for, and
//! whether the Pockels voltage is actually up when the stored photon arrives.
//!
//! Time zero is the moment the ancilla photon hits its detector. The voltage
//! rises after the summed latency of the electronics (plus any extra delay
//! dialled into the driver) and stays up for `hold_ns`. The photon reaches the
//! Pockels cell after the fiber delay. Edges are smoothed with a Gaussian of
//! width `edge_sigma_ns`; `edge_sigma_ns = 0` is a hard rectangle.

use crate::detection::{accept, AcceptPolicy, DetectionOutcome, D2A, D2B};
use crate::elements::{apply_element, Element, Pockels};
use crate::error::{Error, Result};
use crate::fockstate::{ModeId, PhotonicState};

/// Latencies of the classical chain, in ns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyBudget {
    /// Leading edge of the detector's output pulse.
    pub detector_edge_ns: f64,
    /// Pockels driver, amplifiers and their cables.
    pub pockels_chain_ns: f64,
    pub logic_board_ns: f64,
    pub cabling_ns: f64,
    pub ttl_pulse_width_ns: f64,
}

impl Default for LatencyBudget {
    fn default() -> Self {
        LatencyBudget {
            detector_edge_ns: 18.0,
            pockels_chain_ns: 38.0,
            logic_board_ns: 18.0,
            cabling_ns: 26.0,
            ttl_pulse_width_ns: 33.0,
        }
    }
}

impl LatencyBudget {
    pub fn validate(&self) -> Result<()> {
        let parts = [
            ("detector_edge_ns", self.detector_edge_ns),
            ("pockels_chain_ns", self.pockels_chain_ns),
            ("logic_board_ns", self.logic_board_ns),
            ("cabling_ns", self.cabling_ns),
            ("ttl_pulse_width_ns", self.ttl_pulse_width_ns),
        ];
        for (name, v) in parts {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Total latency from ancilla click to Pockels voltage.
pub fn total_system_delay(b: &LatencyBudget) -> f64 {
    b.detector_edge_ns + b.pockels_chain_ns + b.logic_board_ns + b.cabling_ns
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingConfig {
    pub fiber_delay_ns: f64,
    pub extra_electronic_delay_ns: f64,
    pub edge_sigma_ns: f64,
    /// Voltage hold time; `None` follows the TTL pulse width.
    pub hold_ns: Option<f64>,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig { fiber_delay_ns: 100.0, extra_electronic_delay_ns: 0.0, edge_sigma_ns: 3.0, hold_ns: None }
    }
}

impl TimingConfig {
    pub fn hold(&self, b: &LatencyBudget) -> f64 {
        self.hold_ns.unwrap_or(b.ttl_pulse_width_ns)
    }

    pub fn validate(&self, b: &LatencyBudget) -> Result<()> {
        if !(self.fiber_delay_ns >= 0.0) || !self.fiber_delay_ns.is_finite() {
            return Err(Error::Validation(format!("fiber_delay_ns must be >= 0, got {}", self.fiber_delay_ns)));
        }
        if !(self.edge_sigma_ns >= 0.0) || !self.edge_sigma_ns.is_finite() {
            return Err(Error::Validation(format!("edge_sigma_ns must be >= 0, got {}", self.edge_sigma_ns)));
        }
        if !self.extra_electronic_delay_ns.is_finite() {
            return Err(Error::Validation("extra_electronic_delay_ns must be finite".into()));
        }
        let hold = self.hold(b);
        if !(hold > 0.0) || !hold.is_finite() {
            return Err(Error::Validation(format!("hold_ns must be > 0, got {hold}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoltageWindow {
    pub t_on: f64,
    pub t_off: f64,
}

impl VoltageWindow {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_on + self.t_off)
    }
}

pub fn voltage_window(b: &LatencyBudget, t: &TimingConfig) -> Result<VoltageWindow> {
    b.validate()?;
    t.validate(b)?;
    let t_on = total_system_delay(b) + t.extra_electronic_delay_ns;
    Ok(VoltageWindow { t_on, t_off: t_on + t.hold(b) })
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Probability the voltage is up when a photon arrives at `photon_arrival_ns`.
pub fn applied_probability(photon_arrival_ns: f64, window: VoltageWindow, edge_sigma_ns: f64) -> f64 {
    if edge_sigma_ns == 0.0 {
        return if window.t_on <= photon_arrival_ns && photon_arrival_ns <= window.t_off { 1.0 } else { 0.0 };
    }
    let rise = std_normal_cdf((photon_arrival_ns - window.t_on) / edge_sigma_ns);
    let fall = std_normal_cdf((window.t_off - photon_arrival_ns) / edge_sigma_ns);
    rise * fall
}

/// Applied probability for the photon stored by the fiber, under `t`.
pub fn timing_probability(b: &LatencyBudget, t: &TimingConfig) -> Result<f64> {
    Ok(applied_probability(t.fiber_delay_ns, voltage_window(b, t)?, t.edge_sigma_ns))
}

/// Shape of the applied probability as the extra electronic delay is scanned
/// with the fiber delay held fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub center_ns: f64,
    pub fwhm_ns: f64,
    pub peak: f64,
}

/// Locates the centre and full width at half maximum of the delay response.
///
/// The response is symmetric about `fiber − τ_z − hold/2` and unimodal, so the
/// half-maximum crossings are found by bisection on either flank.
pub fn delay_plateau(b: &LatencyBudget, t: &TimingConfig) -> Result<Plateau> {
    voltage_window(b, t)?;
    let hold = t.hold(b);
    let center = t.fiber_delay_ns - total_system_delay(b) - hold / 2.0;
    let response = |extra: f64| {
        let tc = TimingConfig { extra_electronic_delay_ns: extra, ..*t };
        timing_probability(b, &tc).expect("validated above")
    };
    let peak = response(center);
    let half = peak / 2.0;
    let reach = hold + 40.0 * t.edge_sigma_ns + 1.0;
    // Right flank: response falls from peak (at center) to ~0 (at center+reach).
    let crossing = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if response(mid) >= half {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let right = crossing(center, center + reach);
    let left = crossing(center, center - reach);
    Ok(Plateau { center_ns: center, fwhm_ns: right - left, peak })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correction {
    Identity,
    ZCorrection,
}

/// `D2a` needs nothing; `D2b` needs a Z.
pub fn correction_for(outcome: &DetectionOutcome) -> Result<Correction> {
    if !accept(outcome, AcceptPolicy::OrGate) {
        return Err(Error::NoCorrection);
    }
    if outcome.count(D2A) == 1 {
        Ok(Correction::Identity)
    } else {
        debug_assert_eq!(outcome.count(D2B), 1);
        Ok(Correction::ZCorrection)
    }
}

/// Pockels on-map when a Z is both needed and applied, identity otherwise.
pub fn apply_feedforward(
    state: &PhotonicState,
    c: Correction,
    applied: bool,
    out_mode: &ModeId,
) -> Result<PhotonicState> {
    let on = c == Correction::ZCorrection && applied;
    apply_element(state, &Element::Pockels(Pockels { mode: out_mode.clone(), on }))
}
