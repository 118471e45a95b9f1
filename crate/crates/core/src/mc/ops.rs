//! Single-shot primitives acting on quadrature shifts.

use serde::{Deserialize, Serialize};

use crate::quad::{centered_mod_unchecked, error_likelihood_unchecked, sample_shift, RandomStream, SQRT_PI};

use super::schedule::Quad;

/// Residual displacement of one data mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub dq: f64,
    pub dp: f64,
}

impl ModeState {
    pub fn get(&self, quad: Quad) -> f64 {
        match quad {
            Quad::Q => self.dq,
            Quad::P => self.dp,
        }
    }

    pub fn get_mut(&mut self, quad: Quad) -> &mut f64 {
        match quad {
            Quad::Q => &mut self.dq,
            Quad::P => &mut self.dp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyndromeRecord {
    pub analog_value: f64,
    pub effective_sigma: f64,
    pub link_position: usize,
    pub qubit_index: usize,
    pub quadrature: Quad,
}

impl SyndromeRecord {
    /// Probability that the correction after this syndrome flipped the qubit.
    pub fn likelihood(&self) -> f64 {
        likelihood_or_zero(self.effective_sigma, self.analog_value)
    }
}

pub(crate) fn likelihood_or_zero(sigma: f64, x0: f64) -> f64 {
    if sigma > 0.0 {
        error_likelihood_unchecked(sigma, x0)
    } else {
        0.0
    }
}

/// Core of a GKP correction on one quadrature value given the ancilla noise
/// `xi`; returns the measured syndrome.
#[inline]
pub(crate) fn correct_value(shift: &mut f64, c: f64, xi: f64) -> f64 {
    let s = centered_mod_unchecked(*shift + xi, SQRT_PI);
    *shift -= c * s;
    s
}

/// GKP error correction of one quadrature with feedback coefficient `c`.
///
/// `effective_sigma` is the standard deviation used to interpret the syndrome
/// (data error plus ancilla noise) and is stored in the record.
pub fn gkp_correct(
    mode: &mut ModeState,
    quad: Quad,
    c: f64,
    sigma_gkp: f64,
    effective_sigma: f64,
    stream: &mut RandomStream,
) -> SyndromeRecord {
    debug_assert!(c > 0.0 && c <= 1.0);
    let xi = sample_shift(sigma_gkp, stream);
    let s = correct_value(mode.get_mut(quad), c, xi);
    let back = sample_shift(sigma_gkp, stream);
    *mode.get_mut(quad.other()) -= back;
    SyndromeRecord {
        analog_value: s,
        effective_sigma,
        link_position: 0,
        qubit_index: 0,
        quadrature: quad,
    }
}

/// Read the sum of the supported shifts modulo 2√π through a noisy ancilla.
/// One common back-action sample lands on the conjugate quadrature of every
/// supported mode.
pub fn measure_outer_stabilizer(
    modes: &mut [ModeState],
    support: &[usize],
    quad: Quad,
    sigma_gkp: f64,
    stream: &mut RandomStream,
) -> f64 {
    let sum: f64 = support.iter().map(|j| modes[*j].get(quad)).sum();
    let xi = sample_shift(sigma_gkp, stream);
    let back = sample_shift(sigma_gkp, stream);
    for j in support {
        *modes[*j].get_mut(quad.other()) -= back;
    }
    centered_mod_unchecked(sum + xi, 2.0 * SQRT_PI)
}

/// Discrete stabilizer value (0 ↔ +1, 1 ↔ −1) and the likelihood that it is wrong.
/// |q₀| = √π/2 is assigned −1.
pub fn infer_stabilizer(q0sl: f64, sigma: f64) -> (u8, f64) {
    let bit = if q0sl.abs() < 0.5 * SQRT_PI { 0 } else { 1 };
    let lik = likelihood_or_zero(sigma, centered_mod_unchecked(q0sl, SQRT_PI));
    (bit, lik)
}

/// Virtual perfect GKP correction: parity of the nearest multiple of √π.
#[inline]
pub fn perfect_flip(shift: f64) -> bool {
    let k = (shift / SQRT_PI).round() as i64;
    k.rem_euclid(2) == 1
}
