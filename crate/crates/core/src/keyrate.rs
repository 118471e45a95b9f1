//! Six-state QKD with two-way advantage distillation: QBER triples,
//! Bell-diagonal coefficients, asymptotic key rate and the repeaterless bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::L0_KM;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    pub q_x: f64,
    pub q_z: f64,
    pub q_y: f64,
}

impl PauliChannel {
    /// Channel produced by independent X and Z logical flips.
    pub fn from_independent_flips(qx_total: f64, qz_total: f64) -> Self {
        Self {
            q_x: qx_total * (1.0 - qz_total),
            q_z: qz_total * (1.0 - qx_total),
            q_y: qx_total * qz_total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qber {
    pub e_x: f64,
    pub e_y: f64,
    pub e_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonal {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl BellDiagonal {
    pub fn new(p00: f64, p01: f64, p10: f64, p11: f64) -> Result<Self> {
        let b = Self { p00, p01, p10, p11 };
        let sum = p00 + p01 + p10 + p11;
        if b.as_array().iter().any(|p| *p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "not a probability vector: {p00}, {p01}, {p10}, {p11}"
            )));
        }
        Ok(b)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }

    /// QBER triple reconstructed from the coefficients.
    pub fn qber(&self) -> Qber {
        Qber {
            e_x: self.p01 + self.p11,
            e_y: self.p10 + self.p11,
            e_z: self.p01 + self.p10,
        }
    }
}

pub fn qber(channel: &PauliChannel) -> Qber {
    Qber {
        e_x: channel.q_z + channel.q_y,
        e_y: channel.q_x + channel.q_z,
        e_z: channel.q_x + channel.q_y,
    }
}

/// Bell-diagonal coefficients when the key is generated in the Y basis.
pub fn bell_coeffs_y_basis(q: &Qber) -> Result<BellDiagonal> {
    let Qber { e_x, e_y, e_z } = *q;
    let b = BellDiagonal {
        p00: 1.0 - (e_x + e_z + e_y) / 2.0,
        p01: (e_x + e_z - e_y) / 2.0,
        p10: (-e_x + e_y + e_z) / 2.0,
        p11: (e_x - e_z + e_y) / 2.0,
    };
    // tolerate rounding-level negatives
    if b.as_array().iter().any(|p| *p < -1e-14) {
        return Err(Error::InfeasibleQber(format!("({e_x}, {e_y}, {e_z})")));
    }
    Ok(BellDiagonal {
        p00: b.p00.max(0.0),
        p01: b.p01.max(0.0),
        p10: b.p10.max(0.0),
        p11: b.p11.max(0.0),
    })
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

pub fn shannon(ps: &[f64]) -> f64 {
    -ps.iter().map(|p| plogp(*p)).sum::<f64>()
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

/// Asymptotic key fraction with optional advantage distillation, clamped to [0, 1].
pub fn ad_key_rate(b: &BellDiagonal) -> f64 {
    let [p00, p01, p10, p11] = b.as_array();
    let s0 = p00 + p01;
    let s1 = p10 + p11;
    let pbar0 = s0 * s0 + s1 * s1;
    let pbar1 = 2.0 * s0 * s1;

    let one_way = {
        let h_arg = if s0 * s1 > 0.0 {
            (p00 * p10 + p01 * p11) / (s0 * s1)
        } else {
            0.0
        };
        1.0 - shannon(&b.as_array()) + 0.5 * pbar1 * binary_entropy(h_arg)
    };
    let distilled = if pbar0 > 0.0 {
        let pp = [
            (p00 * p00 + p01 * p01) / pbar0,
            (p10 * p10 + p11 * p11) / pbar0,
            2.0 * p00 * p01 / pbar0,
            2.0 * p10 * p11 / pbar0,
        ];
        0.5 * pbar0 * (1.0 - shannon(&pp))
    } else {
        0.0
    };
    one_way.max(distilled).clamp(0.0, 1.0)
}

/// Key per optical mode for a code using `n` GKP modes per logical qubit.
pub fn key_per_mode(r: f64, n: u32) -> f64 {
    r.max(0.0) / n as f64
}

/// Repeaterless secret-key capacity of a pure-loss channel, in bits per mode.
pub fn plob(length_km: f64) -> f64 {
    if length_km <= 0.0 {
        return f64::INFINITY;
    }
    -(-(-length_km / L0_KM).exp()).ln_1p() / std::f64::consts::LN_2
}

/// Key fraction for end-to-end logical X/Z flip probabilities.
pub fn key_rate_from_flips(qx_total: f64, qz_total: f64) -> f64 {
    let ch = PauliChannel::from_independent_flips(qx_total, qz_total);
    match bell_coeffs_y_basis(&qber(&ch)) {
        Ok(b) => ad_key_rate(&b),
        Err(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qber_sums() {
        let q = qber(&PauliChannel {
            q_x: 0.02,
            q_z: 0.03,
            q_y: 0.001,
        });
        assert!((q.e_x - 0.031).abs() < 1e-15);
        assert!((q.e_y - 0.05).abs() < 1e-15);
        assert!((q.e_z - 0.021).abs() < 1e-15);
        let q = qber(&PauliChannel::from_independent_flips(0.1, 0.1));
        assert!((q.e_y - 0.18).abs() < 1e-15);
    }

    #[test]
    fn bell_example() {
        let b = bell_coeffs_y_basis(&Qber {
            e_x: 0.05,
            e_y: 0.09,
            e_z: 0.05,
        })
        .unwrap();
        for (a, e) in b.as_array().iter().zip([0.905, 0.005, 0.045, 0.045]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!(bell_coeffs_y_basis(&Qber {
            e_x: 0.5,
            e_y: 0.0,
            e_z: 0.0
        })
        .is_err());
    }

    #[test]
    fn rate_extremes() {
        assert_eq!(ad_key_rate(&BellDiagonal::new(1.0, 0.0, 0.0, 0.0).unwrap()), 1.0);
        assert_eq!(ad_key_rate(&BellDiagonal::new(0.25, 0.25, 0.25, 0.25).unwrap()), 0.0);
        assert_eq!(key_per_mode(1.0, 4), 0.25);
        assert_eq!(key_per_mode(0.0, 7), 0.0);
    }

    #[test]
    fn plob_points() {
        assert!(plob(0.0).is_infinite());
        assert!((plob(22.0) - 0.6617).abs() < 1e-3);
        assert!(plob(109.0) > 0.01 && plob(110.0) < 0.01);
    }
}
