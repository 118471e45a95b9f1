//! Scalar building blocks shared by every other module: modular reduction,
//! squeezing and loss conversions, logical-flip probabilities, the analog
//! error likelihood and Gaussian shift sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// √π, the GKP lattice spacing of a logical Pauli displacement.
pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Attenuation length of standard telecom fibre in km.
pub const L0_KM: f64 = 22.0;

/// Reduce `x` into `[-s/2, s/2)`.
pub fn centered_mod(x: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("modulus must be positive, got {s}"));
    }
    Ok(centered_mod_unchecked(x, s))
}

#[inline]
pub(crate) fn centered_mod_unchecked(x: f64, s: f64) -> f64 {
    let r = x - s * (x / s + 0.5).floor();
    // floor rounding can land exactly on +s/2 for inputs just below an edge
    if r >= 0.5 * s {
        r - s
    } else if r < -0.5 * s {
        r + s
    } else {
        r
    }
}

/// Finite-squeezing level of the GKP states, in both representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Squeezing {
    pub sigma_gkp: f64,
    pub db: f64,
}

impl Squeezing {
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        Ok(Self {
            sigma_gkp: sigma,
            db: -10.0 * (2.0 * sigma * sigma).log10(),
        })
    }

    /// Infinitely squeezed (ideal) ancillas.
    pub fn perfect() -> Self {
        Self {
            sigma_gkp: 0.0,
            db: f64::INFINITY,
        }
    }

    /// Like [`Squeezing::from_sigma`], but σ = 0 selects ideal ancillas.
    pub fn from_sigma_or_perfect(sigma: f64) -> Result<Self> {
        if sigma == 0.0 {
            Ok(Self::perfect())
        } else {
            Self::from_sigma(sigma)
        }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return domain("squeezing in dB must be finite");
        }
        let sigma = (0.5 * 10f64.powf(-db / 10.0)).sqrt();
        Ok(Self { sigma_gkp: sigma, db })
    }

    /// Envelope width Δ of an approximate GKP state mapped to the equivalent σ.
    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return domain("delta must be positive");
        }
        let e = (-delta * delta).exp();
        Self::from_sigma(((1.0 - e) / (1.0 + e)).sqrt())
    }

    pub fn variance(&self) -> f64 {
        self.sigma_gkp * self.sigma_gkp
    }
}

/// Either a σ or a dB figure; used by `sigma_db_convert`.
#[derive(Debug, Clone, Copy)]
pub enum SqueezingInput {
    Sigma(f64),
    Db(f64),
}

pub fn sigma_db_convert(input: SqueezingInput) -> Result<Squeezing> {
    match input {
        SqueezingInput::Sigma(s) => Squeezing::from_sigma(s),
        SqueezingInput::Db(d) => Squeezing::from_db(d),
    }
}

/// Fibre coupling and attenuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    pub eta0: f64,
    pub l0_km: f64,
}

impl FiberParams {
    pub fn new(eta0: f64) -> Result<Self> {
        if !(eta0 > 0.0 && eta0 <= 1.0) {
            return domain(format!("eta0 must lie in (0, 1], got {eta0}"));
        }
        Ok(Self { eta0, l0_km: L0_KM })
    }

    /// Ideal fibre without attenuation; only useful as a noiseless reference.
    pub fn lossless() -> Self {
        Self {
            eta0: 1.0,
            l0_km: f64::INFINITY,
        }
    }

    /// Gain of the quantum-limited amplifier that undoes the loss of a segment.
    pub fn amplifier_gain(&self, length_km: f64) -> Result<f64> {
        Ok(1.0 / transmissivity(self, length_km)?)
    }
}

pub fn transmissivity(fiber: &FiberParams, length_km: f64) -> Result<f64> {
    if !(length_km >= 0.0) {
        return domain(format!("length must be non-negative, got {length_km}"));
    }
    Ok(fiber.eta0 * (-length_km / fiber.l0_km).exp())
}

/// Pure loss followed by amplification is a Gaussian displacement channel of this width.
pub fn loss_to_sigma(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return domain(format!("transmissivity must lie in (0, 1], got {eta}"));
    }
    Ok((1.0 - eta).sqrt())
}

/// Probability that an ideal GKP correction misidentifies a Gaussian shift of width σ.
pub fn flip_prob(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    Ok(statrs::function::erf::erfc((std::f64::consts::PI / (8.0 * sigma * sigma)).sqrt()))
}

/// Likelihood that the correction following syndrome `x0` flips the logical value.
pub fn error_likelihood(sigma: f64, x0: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if !(x0 >= -0.5 * SQRT_PI && x0 < 0.5 * SQRT_PI) {
        return domain(format!("syndrome {x0} outside [-sqrt(pi)/2, sqrt(pi)/2)"));
    }
    Ok(error_likelihood_unchecked(sigma, x0))
}

pub(crate) fn error_likelihood_unchecked(sigma: f64, x0: f64) -> f64 {
    let inv = 1.0 / (2.0 * sigma * sigma);
    // Every term is scaled by exp(x0²/2σ²) (the k = 0 term) to avoid underflow;
    // lattice points are k√π, odd k form the numerator. The window [-K-1, K]
    // is closed under k ↦ -1-k, which keeps the boundary value exactly 1/2.
    let term = |k: i64| {
        let d = x0 - k as f64 * SQRT_PI;
        (-(d * d - x0 * x0) * inv).exp()
    };
    let mut odd = 0.0;
    let mut all = 0.0;
    let mut k_max: i64 = 8;
    for k in -k_max - 1..=k_max {
        let t = term(k);
        all += t;
        if k.rem_euclid(2) == 1 {
            odd += t;
        }
    }
    let mut prev = odd / all;
    loop {
        let (a, b) = (k_max + 1, -k_max - 2);
        for k in [a, b] {
            let t = term(k);
            all += t;
            if k.rem_euclid(2) == 1 {
                odd += t;
            }
        }
        k_max += 1;
        let cur = odd / all;
        if (cur - prev).abs() <= 1e-15 * cur.abs() || k_max > 10_000 {
            return cur;
        }
        prev = cur;
    }
}

/// Probability of an odd number of independent flips, each with probability `p`.
///
/// `n` may be fractional. For `p > 1/2` and fractional `n` the base `1-2p` is
/// clamped at zero, i.e. the result saturates at 1/2.
pub fn odd_error_aggregate(p: f64, n: f64) -> f64 {
    let base = 1.0 - 2.0 * p;
    let pow = if n.fract() == 0.0 && n.abs() < i32::MAX as f64 {
        base.powi(n as i32)
    } else {
        base.max(0.0).powf(n)
    };
    0.5 * (1.0 - pow)
}

/// Counter-based random stream: one independent ChaCha stream per task index.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        rng.set_word_pos(0);
        Self { rng }
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Draw a displacement from N(0, σ²). σ = 0 yields exactly 0 without consuming randomness.
#[inline]
pub fn sample_shift(sigma: f64, stream: &mut RandomStream) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        sigma * stream.normal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_mod_examples() {
        assert_eq!(centered_mod(0.0, SQRT_PI).unwrap(), 0.0);
        assert_eq!(centered_mod(SQRT_PI, SQRT_PI).unwrap(), 0.0);
        let r = centered_mod(0.6 * SQRT_PI, SQRT_PI).unwrap();
        assert!((r + 0.4 * SQRT_PI).abs() < 1e-15);
        assert!(centered_mod(1.0, 0.0).is_err());
        assert_eq!(centered_mod(0.5 * SQRT_PI, SQRT_PI).unwrap(), -0.5 * SQRT_PI);
    }

    #[test]
    fn squeezing_reference_points() {
        let s = Squeezing::from_sigma(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!(s.db.abs() < 1e-12);
        let s = Squeezing::from_sigma(0.09).unwrap();
        assert!((s.db - 17.9).abs() < 0.05, "{}", s.db);
        let s = Squeezing::from_db(16.2).unwrap();
        assert!((s.sigma_gkp - 0.1095).abs() < 5e-4);
        assert!(Squeezing::from_sigma(-1.0).is_err());
    }

    #[test]
    fn delta_and_sigma_agree_for_small_delta() {
        let s = Squeezing::from_delta(0.1).unwrap();
        assert!((s.sigma_gkp - 0.1 / 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn loss_conversion() {
        assert_eq!(loss_to_sigma(1.0).unwrap(), 0.0);
        assert!((loss_to_sigma(0.75).unwrap() - 0.5).abs() < 1e-15);
        assert!((loss_to_sigma(0.99).unwrap() - 0.1).abs() < 1e-12);
        assert!(loss_to_sigma(0.0).is_err());
        let f = FiberParams::new(1.0).unwrap();
        assert_eq!(transmissivity(&f, 0.0).unwrap(), 1.0);
        assert!((transmissivity(&f, 22.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(transmissivity(&f, -1.0).is_err());
    }

    #[test]
    fn likelihood_boundary_and_symmetry() {
        for s in [0.05, 0.2, 0.6, 1.5] {
            let p = error_likelihood(s, -0.5 * SQRT_PI).unwrap();
            assert!((p - 0.5).abs() < 1e-14, "{s} {p}");
            let a = error_likelihood(s, 0.3).unwrap();
            let b = error_likelihood(s, -0.3).unwrap();
            assert!((a - b).abs() < 1e-14 * a.max(1e-300));
        }
        assert!(error_likelihood(0.2, 0.5 * SQRT_PI).is_err());
    }

    #[test]
    fn odd_aggregate_basics() {
        assert!((odd_error_aggregate(0.013, 1.0) - 0.013).abs() < 1e-16);
        assert_eq!(odd_error_aggregate(0.5, 7.3), 0.5);
        assert_eq!(odd_error_aggregate(0.7, 0.5), 0.5);
    }

    #[test]
    fn zero_sigma_sample_is_zero() {
        let mut s = RandomStream::new(1, 2);
        assert_eq!(sample_shift(0.0, &mut s), 0.0);
    }
}
