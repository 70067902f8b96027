//! Test-side reference models, written without the library's state algebra.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use ffgate::fockstate::{mode, BasisKet, JonesVector, PhotonicState, Pol, Slot, SlotMap};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Two modes times two polarizations: 1H, 1V, 2H, 2V.
pub fn four_slots() -> Vec<Slot> {
    vec![Slot::h(&mode("1")), Slot::v(&mode("1")), Slot::h(&mode("2")), Slot::v(&mode("2"))]
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn haar<R: Rng>(n: usize, rng: &mut R) -> DMatrix<C> {
    let g = DMatrix::from_fn(n, n, |_, _| c(gaussian(rng), gaussian(rng)) / 2f64.sqrt());
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}

pub fn random_jones<R: Rng>(rng: &mut R) -> JonesVector {
    let (a, b) = (c(gaussian(rng), gaussian(rng)), c(gaussian(rng), gaussian(rng)));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    JonesVector::new(a / n, b / n)
}

/// Sorted pair of slot indices for a two-photon Fock ket.
pub type Pair = (usize, usize);

pub fn all_pairs(n: usize) -> Vec<Pair> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i..n {
            v.push((i, j));
        }
    }
    v
}

fn sorted(i: usize, j: usize) -> Pair {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Creation-operator expansion written out term by term.
///
/// `|j k⟩ = a†_j a†_k |0⟩ / √(n_j! n_k!)` and `a†_j → Σ_i U[i][j] a†_i`.
/// Acting twice with creation operators on the same slot picks up √2.
pub fn expand_dense(u: &DMatrix<C>, input: Pair) -> Vec<(Pair, C)> {
    let n = u.nrows();
    let (j, k) = input;
    let in_norm = if j == k { 2f64.sqrt() } else { 1.0 };
    let mut acc = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for l in 0..n {
            let bosonic = if i == l { 2f64.sqrt() } else { 1.0 };
            let (a, b) = sorted(i, l);
            acc[a * n + b] += u[(i, j)] * u[(l, k)] * bosonic / in_norm;
        }
    }
    all_pairs(n).into_iter().map(|(a, b)| ((a, b), acc[a * n + b])).collect()
}

fn permanent_2x2(m: [[C; 2]; 2]) -> C {
    m[0][0] * m[1][1] + m[0][1] * m[1][0]
}

/// Transition amplitude as a permanent of the row/column-repeated submatrix.
pub fn expand_permanent(u: &DMatrix<C>, input: Pair) -> Vec<(Pair, C)> {
    let (j, k) = input;
    let in_fact: f64 = if j == k { 2.0 } else { 1.0 };
    all_pairs(u.nrows())
        .into_iter()
        .map(|(a, b)| {
            let out_fact: f64 = if a == b { 2.0 } else { 1.0 };
            let sub = [[u[(a, j)], u[(a, k)]], [u[(b, j)], u[(b, k)]]];
            ((a, b), permanent_2x2(sub) / (in_fact * out_fact).sqrt())
        })
        .collect()
}

/// First-quantized evolution: a symmetric two-particle wavefunction `ψ_{ab}`
/// evolved as `U ψ Uᵀ`.
pub fn expand_first_quantized(u: &DMatrix<C>, input: Pair) -> Vec<(Pair, C)> {
    let n = u.nrows();
    let (j, k) = input;
    let mut psi = DMatrix::from_element(n, n, c(0.0, 0.0));
    if j == k {
        psi[(j, j)] = c(1.0, 0.0);
    } else {
        psi[(j, k)] = c(1.0 / 2f64.sqrt(), 0.0);
        psi[(k, j)] = c(1.0 / 2f64.sqrt(), 0.0);
    }
    let out = u * psi * u.transpose();
    all_pairs(n)
        .into_iter()
        .map(|(a, b)| ((a, b), if a == b { out[(a, a)] } else { out[(a, b)] * 2f64.sqrt() }))
        .collect()
}

pub fn ket_of(slots: &[Slot], (a, b): Pair) -> BasisKet {
    BasisKet::new(vec![slots[a].clone(), slots[b].clone()]).unwrap()
}

/// Library output for a two-photon basis input under `u`.
pub fn expand_library(u: &DMatrix<C>, slots: &[Slot], input: Pair) -> Vec<(Pair, C)> {
    let map = SlotMap::new(slots.to_vec(), u.clone()).unwrap();
    let state = PhotonicState::from_amplitudes([(ket_of(slots, input), c(1.0, 0.0))]).unwrap();
    let out = state.apply_slot_map(&map).unwrap();
    all_pairs(slots.len()).into_iter().map(|p| (p, out.amplitude(&ket_of(slots, p)))).collect()
}

pub fn max_diff(a: &[(Pair, C)], b: &[(Pair, C)]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|((pa, x), (pb, y))| {
            assert_eq!(pa, pb);
            (x - y).norm()
        })
        .fold(0.0, f64::max)
}

/// Stage-one PBS as a 4x4 map on (1H, 1V, 2H, 2V): H keeps its mode, V
/// swaps modes.
pub fn pbs_matrix() -> DMatrix<C> {
    let mut m = DMatrix::from_element(4, 4, c(0.0, 0.0));
    m[(0, 0)] = c(1.0, 0.0);
    m[(3, 1)] = c(1.0, 0.0);
    m[(2, 2)] = c(1.0, 0.0);
    m[(1, 3)] = c(1.0, 0.0);
    m
}

/// Brute-force PBS output for `(αH + βV)_1 ⊗ (H + V)_2/√2`, as amplitudes on
/// the four-slot Fock basis.
pub fn pbs_oracle(alpha: C, beta: C) -> Vec<(Pair, C)> {
    let s = 1.0 / 2f64.sqrt();
    // Input as a superposition of basis pairs.
    let inputs = [((0, 2), alpha * s), ((0, 3), alpha * s), ((1, 2), beta * s), ((1, 3), beta * s)];
    let u = pbs_matrix();
    let mut acc = vec![c(0.0, 0.0); 10];
    for (pair, amp) in inputs {
        for (i, (_, a)) in expand_dense(&u, pair).into_iter().enumerate() {
            acc[i] += amp * a;
        }
    }
    all_pairs(4).into_iter().zip(acc).collect()
}

/// The same output written down by hand:
/// `α/√2 H1H2 + β/√2 V1V2 + (α H1V1 + β H2V2)/√2`.
pub fn pbs_by_hand(alpha: C, beta: C) -> Vec<(Pair, C)> {
    let s = 1.0 / 2f64.sqrt();
    all_pairs(4)
        .into_iter()
        .map(|p| {
            let a = match p {
                (0, 2) => alpha * s,
                (1, 3) => beta * s,
                (0, 1) => alpha * s,
                (2, 3) => beta * s,
                _ => c(0.0, 0.0),
            };
            (p, a)
        })
        .collect()
}

pub fn library_state_on_pairs(state: &PhotonicState, slots: &[Slot]) -> Vec<(Pair, C)> {
    all_pairs(slots.len()).into_iter().map(|p| (p, state.amplitude(&ket_of(slots, p)))).collect()
}

/// Pure single-photon state on mode `1` with the given H and V amplitudes.
pub fn photon1(alpha: C, beta: C) -> PhotonicState {
    PhotonicState::single_photon(&mode("1"), JonesVector::new(alpha, beta)).unwrap()
}

pub fn pol_slot(m: &str, p: Pol) -> Slot {
    Slot::new(mode(m), p)
}

/// Passive parity-curve rate for photons that never interfere: the input
/// photon exits in mode 1 with its H part (weight |α|²) while the ancilla
/// hits D2a with probability ¼, or the ancilla's V part exits in mode 1
/// (½) while the input's V part hits D2a (|β|²/2).
pub fn distinguishable_passive(alpha: C, beta: C, theta_deg: f64) -> f64 {
    let t = theta_deg.to_radians();
    (alpha.norm_sqr() * t.cos().powi(2) + beta.norm_sqr() * t.sin().powi(2)) / 4.0
}

/// Coherent passive parity curve for a real linear input at `input_deg`.
pub fn coherent_passive(input_deg: f64, theta_deg: f64) -> f64 {
    (theta_deg - input_deg).to_radians().cos().powi(2) / 4.0
}
