//! Closed-form model of a chain of single-mode GKP repeaters.
//!
//! Finite ancilla squeezing is folded into the channel: each link becomes an
//! ideal GKP correction against a Gaussian displacement of variance σ_eff².

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::keyrate::{key_per_mode, key_rate_from_flips};
use crate::quad::{flip_prob, odd_error_aggregate, transmissivity, FiberParams, Squeezing};
use crate::rescale::single_round_c;

pub const MIN_SPACING_KM: f64 = 0.25;
pub const MAX_SPACING_KM: f64 = 1.5;
pub const SEARCH_MAX_KM: f64 = 10_000.0;
pub const SEARCH_ITERATIONS: u32 = 10;
pub const KEY_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GkpChainConfig {
    pub fiber: FiberParams,
    pub squeezing: Squeezing,
    pub spacing_km: f64,
    pub total_km: f64,
}

impl GkpChainConfig {
    pub fn new(fiber: FiberParams, squeezing: Squeezing, spacing_km: f64, total_km: f64) -> Result<Self> {
        if !(MIN_SPACING_KM..=MAX_SPACING_KM).contains(&spacing_km) {
            return domain(format!(
                "spacing {spacing_km} km outside [{MIN_SPACING_KM}, {MAX_SPACING_KM}]"
            ));
        }
        if !(total_km >= 0.0) {
            return domain("total distance must be non-negative");
        }
        Ok(Self {
            fiber,
            squeezing,
            spacing_km,
            total_km,
        })
    }

    pub fn sigma_trans_sq(&self) -> f64 {
        1.0 - transmissivity(&self.fiber, self.spacing_km).expect("validated spacing")
    }
}

/// Translationally invariant coefficient when the noise between corrections is
/// one back-action plus one fibre segment.
pub fn chain_c_opt(sigma_gkp_sq: f64, sigma_trans_sq: f64) -> f64 {
    let g = sigma_gkp_sq;
    let t = sigma_trans_sq;
    if g == 0.0 {
        return 1.0;
    }
    (-(g + t) + ((g + t) * (5.0 * g + t)).sqrt()) / (2.0 * g)
}

pub fn sigma_eff_sq(config: &GkpChainConfig) -> f64 {
    let g = config.squeezing.variance();
    let t = config.sigma_trans_sq();
    0.5 * (3.0 * g + t + ((g + t) * (5.0 * g + t)).sqrt())
}

/// Linearised residual variances of the exact correction and of its
/// perfect-correction-plus-channel stand-in with α = √c_opt.
pub fn error_into_channel_check(sigma_data: f64, sigma_gkp: f64) -> Result<(f64, f64)> {
    if !(sigma_data > 0.0 && sigma_gkp > 0.0) {
        return domain("standard deviations must be positive");
    }
    let c = single_round_c(sigma_data, sigma_gkp);
    let g = sigma_gkp * sigma_gkp;
    let exact = (1.0 - c) * (1.0 - c) * sigma_data * sigma_data + c * c * g;
    let alpha = c.sqrt();
    Ok((exact, alpha * alpha * g))
}

/// Per-link logical flip probability in either quadrature.
pub fn link_flip_prob(config: &GkpChainConfig) -> f64 {
    flip_prob(sigma_eff_sq(config).sqrt()).unwrap_or(0.0)
}

/// End-to-end (e_X, e_Y, e_Z).
pub fn chain_qber(config: &GkpChainConfig) -> (f64, f64, f64) {
    let links = config.total_km / config.spacing_km;
    let q = odd_error_aggregate(link_flip_prob(config), links);
    (q, 2.0 * q * (1.0 - q), q)
}

pub fn chain_key_per_mode(config: &GkpChainConfig) -> f64 {
    let (q, _, _) = chain_qber(config);
    key_per_mode(key_rate_from_flips(q, q), 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingOptimum {
    pub spacing_km: f64,
    pub key_per_mode: f64,
}

fn key_at(fiber: FiberParams, squeezing: Squeezing, spacing: f64, total: f64) -> f64 {
    let cfg = GkpChainConfig {
        fiber,
        squeezing,
        spacing_km: spacing,
        total_km: total,
    };
    chain_key_per_mode(&cfg)
}

/// Maximise key per mode over spacing with a `points`-point grid and one
/// local refinement; ties go to the smaller spacing.
pub fn optimize_spacing_with(
    fiber: FiberParams,
    squeezing: Squeezing,
    total_km: f64,
    points: usize,
) -> SpacingOptimum {
    let step = (MAX_SPACING_KM - MIN_SPACING_KM) / (points - 1) as f64;
    let mut best = SpacingOptimum {
        spacing_km: MIN_SPACING_KM,
        key_per_mode: key_at(fiber, squeezing, MIN_SPACING_KM, total_km),
    };
    for i in 1..points {
        let s = MIN_SPACING_KM + step * i as f64;
        let k = key_at(fiber, squeezing, s, total_km);
        if k > best.key_per_mode {
            best = SpacingOptimum {
                spacing_km: s,
                key_per_mode: k,
            };
        }
    }
    let lo = (best.spacing_km - step).max(MIN_SPACING_KM);
    let hi = (best.spacing_km + step).min(MAX_SPACING_KM);
    let fine = 20;
    for i in 0..=fine {
        let s = lo + (hi - lo) * i as f64 / fine as f64;
        let k = key_at(fiber, squeezing, s, total_km);
        if k > best.key_per_mode || (k == best.key_per_mode && s < best.spacing_km) {
            best = SpacingOptimum {
                spacing_km: s,
                key_per_mode: k,
            };
        }
    }
    best
}

pub fn optimize_spacing(fiber: FiberParams, squeezing: Squeezing, total_km: f64) -> SpacingOptimum {
    optimize_spacing_with(fiber, squeezing, total_km, 26)
}

/// Bisection for the largest distance at which `key(d) > threshold`.
/// `key` must be non-increasing in distance.
pub fn bisect_distance(threshold: f64, mut key: impl FnMut(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0, SEARCH_MAX_KM);
    for _ in 0..SEARCH_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if key(mid) > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn achievable_distance(fiber: FiberParams, squeezing: Squeezing, threshold: f64) -> f64 {
    bisect_distance(threshold, |d| {
        optimize_spacing(fiber, squeezing, d).key_per_mode
    })
}

/// Same search with the spacing pinned.
pub fn achievable_distance_fixed_spacing(
    fiber: FiberParams,
    squeezing: Squeezing,
    spacing_km: f64,
    threshold: f64,
) -> f64 {
    bisect_distance(threshold, |d| key_at(fiber, squeezing, spacing_km, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eta0: f64, sigma: f64, spacing: f64, total: f64) -> GkpChainConfig {
        GkpChainConfig::new(
            FiberParams::new(eta0).unwrap(),
            Squeezing::from_sigma(sigma).unwrap(),
            spacing,
            total,
        )
        .unwrap()
    }

    #[test]
    fn effective_variance_identity() {
        for (e, s, l) in [(0.98, 0.09, 0.25), (0.9, 0.2, 1.5), (1.0, 0.05, 0.7)] {
            let c = cfg(e, s, l, 100.0);
            let g = c.squeezing.variance();
            let t = c.sigma_trans_sq();
            let alt = t + (2.0 + chain_c_opt(g, t)) * g;
            assert!((sigma_eff_sq(&c) - alt).abs() < 1e-14);
        }
    }

    #[test]
    fn qber_relation() {
        let (ex, ey, ez) = chain_qber(&cfg(0.98, 0.12, 0.25, 700.0));
        assert_eq!(ex, ez);
        assert!((ey - 2.0 * ex * (1.0 - ex)).abs() < 1e-15);
    }

    #[test]
    fn spacing_bounds_enforced() {
        let f = FiberParams::new(0.98).unwrap();
        let s = Squeezing::from_sigma(0.1).unwrap();
        assert!(GkpChainConfig::new(f, s, 0.2, 10.0).is_err());
        assert!(GkpChainConfig::new(f, s, 1.6, 10.0).is_err());
    }

    #[test]
    fn unreachable_threshold_gives_zero() {
        let f = FiberParams::new(0.98).unwrap();
        let s = Squeezing::from_sigma(0.09).unwrap();
        assert_eq!(achievable_distance(f, s, 1.0), 0.0);
    }

    #[test]
    fn equal_sigmas_give_half() {
        let (a, b) = error_into_channel_check(0.1, 0.1).unwrap();
        assert!((a - 0.005).abs() < 1e-15 && (b - 0.005).abs() < 1e-15);
    }
}
