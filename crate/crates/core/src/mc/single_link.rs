//! One lossy transmission followed by perfect GKP correction and an outer-code
//! correction, with or without the analog information.

use serde::{Deserialize, Serialize};

use crate::codes::{build_code, CodeName, OuterCode, Pauli};
use crate::error::{Error, Result};
use crate::quad::{centered_mod_unchecked, RandomStream, SQRT_PI};

use super::decode::decode_step2;
use super::estimate::{adaptive, EstimateOptions};
use super::ops::{likelihood_or_zero, perfect_flip};

pub const GAMMA_MIN: f64 = 0.08;
pub const GAMMA_MAX: f64 = 0.2;
pub const DEFAULT_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingleLinkScheme {
    #[serde(rename = "gkp-only")]
    GkpOnly,
    #[serde(rename = "c4-analog")]
    C4Analog,
    #[serde(rename = "steane7-analog")]
    Steane7Analog,
    #[serde(rename = "steane7-no-analog")]
    Steane7NoAnalog,
}

impl SingleLinkScheme {
    pub const ALL: [SingleLinkScheme; 4] = [
        SingleLinkScheme::GkpOnly,
        SingleLinkScheme::C4Analog,
        SingleLinkScheme::Steane7Analog,
        SingleLinkScheme::Steane7NoAnalog,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown single-link scheme '{s}'")))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SingleLinkScheme::GkpOnly => "gkp-only",
            SingleLinkScheme::C4Analog => "c4-analog",
            SingleLinkScheme::Steane7Analog => "steane7-analog",
            SingleLinkScheme::Steane7NoAnalog => "steane7-no-analog",
        }
    }

    fn code(&self) -> Option<(OuterCode, bool)> {
        match self {
            SingleLinkScheme::GkpOnly => None,
            SingleLinkScheme::C4Analog => Some((build_code(CodeName::C4), true)),
            SingleLinkScheme::Steane7Analog => Some((build_code(CodeName::Steane7), true)),
            SingleLinkScheme::Steane7NoAnalog => Some((build_code(CodeName::Steane7), false)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub gamma: f64,
    pub p_err: f64,
    pub stderr: f64,
    pub trials: u64,
    pub converged: bool,
}

/// `points` evenly spaced loss values over [0.08, 0.2].
pub fn default_gammas(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![GAMMA_MIN],
        n => (0..n)
            .map(|i| GAMMA_MIN + (GAMMA_MAX - GAMMA_MIN) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn quadrature_error(code: Option<&(OuterCode, bool)>, err: Pauli, sigma: f64, stream: &mut RandomStream) -> bool {
    let n = code.map_or(1, |c| c.0.n);
    let mut flips = 0u32;
    let mut syn = [0.0f64; 8];
    for (j, s) in syn.iter_mut().enumerate().take(n) {
        let x = sigma * stream.normal();
        *s = centered_mod_unchecked(x, SQRT_PI);
        if perfect_flip(x - *s) {
            flips |= 1 << j;
        }
    }
    match code {
        None => flips & 1 == 1,
        Some((code, analog)) => {
            let syndrome = code.syndrome_of(err, flips);
            if syndrome.iter().all(|b| *b == 0) {
                return code.is_logical_flip(err, flips);
            }
            // likelihoods only matter once the outer code flags an error
            let mut p_odd = [0.0f64; 8];
            for j in 0..n {
                p_odd[j] = likelihood_or_zero(sigma, syn[j]);
            }
            let corr = decode_step2(code, err, &syndrome, &p_odd[..n], *analog);
            code.is_logical_flip(err, flips ^ corr)
        }
    }
}

/// Any logical Pauli error after one link with loss probability `gamma`.
pub fn single_link_trial(scheme: SingleLinkScheme, gamma: f64, stream: &mut RandomStream) -> bool {
    let code = scheme.code();
    let sigma = gamma.sqrt();
    let x = quadrature_error(code.as_ref(), Pauli::X, sigma, stream);
    let z = quadrature_error(code.as_ref(), Pauli::Z, sigma, stream);
    x || z
}

pub fn single_link_point(scheme: SingleLinkScheme, gamma: f64, point: u64, opts: &EstimateOptions) -> Result<CurvePoint> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!("loss probability {gamma} outside [0, 1)")));
    }
    let seed = opts.seed;
    let code = scheme.code();
    let sigma = gamma.sqrt();
    let c = adaptive(1, opts, gamma == 0.0, |i| {
        // disjoint stream ranges per curve point
        let mut s = RandomStream::new(seed, point << 40 | i);
        let x = quadrature_error(code.as_ref(), Pauli::X, sigma, &mut s);
        let z = quadrature_error(code.as_ref(), Pauli::Z, sigma, &mut s);
        (x || z) as u32
    })?;
    Ok(CurvePoint {
        gamma,
        p_err: c.p(0),
        stderr: c.se(0),
        trials: c.trials,
        converged: c.converged,
    })
}

pub fn single_link_experiment(gammas: &[f64], scheme: SingleLinkScheme, opts: &EstimateOptions) -> Result<Vec<CurvePoint>> {
    gammas
        .iter()
        .enumerate()
        .map(|(i, g)| single_link_point(scheme, *g, i as u64, opts))
        .collect()
}
