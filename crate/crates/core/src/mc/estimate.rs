//! Adaptive sampling of logical error probabilities.
//!
//! Trial `i` always draws from stream `(seed, i)`, and counts are integer sums,
//! so an estimate is bit-identical for any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::bisect_distance;
use crate::error::{Error, Result};
use crate::keyrate::{key_per_mode, key_rate_from_flips};
use crate::quad::{odd_error_aggregate, RandomStream};

use super::chain::{run_chain, ChainPlan};

pub const INITIAL_TRIALS: u64 = 10;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    /// Target relative standard error.
    pub threshold: f64,
    pub seed: u64,
    /// Largest sample size that may be attempted.
    pub budget: u64,
}

impl EstimateOptions {
    pub fn new(threshold: f64, seed: u64) -> Result<Self> {
        let o = Self {
            threshold,
            seed,
            budget: DEFAULT_BUDGET,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Domain(format!("threshold b must lie in (0, 1), got {}", self.threshold)));
        }
        if self.budget < INITIAL_TRIALS {
            return Err(Error::Domain(format!("budget must be at least {INITIAL_TRIALS} trials")));
        }
        Ok(())
    }
}

/// Binomial standard error √(p(1−p)/k).
pub fn standard_error(p: f64, k: u64) -> f64 {
    (p * (1.0 - p) / k as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub trials: u64,
    pub hits: Vec<u64>,
    pub converged: bool,
    pub budget_exceeded: bool,
}

impl Counts {
    pub fn p(&self, ch: usize) -> f64 {
        self.hits[ch] as f64 / self.trials as f64
    }

    pub fn se(&self, ch: usize) -> f64 {
        standard_error(self.p(ch), self.trials)
    }
}

/// Run trials `start..end` in parallel and sum the per-channel hits.
pub fn count_hits<F>(start: u64, end: u64, channels: usize, trial: &F) -> Vec<u64>
where
    F: Fn(u64) -> u32 + Sync,
{
    (start..end)
        .into_par_iter()
        .fold(
            || vec![0u64; channels],
            |mut acc, i| {
                let bits = trial(i);
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += (bits >> c & 1) as u64;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; channels],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Grow the sample ×10 from 10 until every channel's relative standard error
/// is below the threshold. A channel with no hits counts as converged only
/// when `zero_ok` (a noiseless configuration).
pub fn adaptive<F>(channels: usize, opts: &EstimateOptions, zero_ok: bool, trial: F) -> Result<Counts>
where
    F: Fn(u64) -> u32 + Sync,
{
    opts.validate()?;
    let mut hits = vec![0u64; channels];
    let mut done = 0u64;
    let mut k = INITIAL_TRIALS;
    loop {
        let more = count_hits(done, k, channels, &trial);
        for (h, m) in hits.iter_mut().zip(more) {
            *h += m;
        }
        done = k;
        let ok = hits.iter().all(|&h| {
            if h == 0 {
                zero_ok
            } else {
                let p = h as f64 / k as f64;
                standard_error(p, k) / p < opts.threshold
            }
        });
        if ok {
            return Ok(Counts {
                trials: k,
                hits,
                converged: true,
                budget_exceeded: false,
            });
        }
        match k.checked_mul(10) {
            Some(next) if next <= opts.budget => k = next,
            _ => {
                return Ok(Counts {
                    trials: k,
                    hits,
                    converged: false,
                    budget_exceeded: true,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub p_err_x: f64,
    pub p_err_z: f64,
    pub se_x: f64,
    pub se_z: f64,
    pub trials: u64,
    pub links: usize,
    pub threshold: f64,
    pub converged: bool,
    pub budget_exceeded: bool,
}

impl SimEstimate {
    /// Per-link probabilities (1 − (1−2p)^{1/links})/2.
    pub fn per_link(&self) -> (f64, f64) {
        (per_link_prob(self.p_err_x, self.links), per_link_prob(self.p_err_z, self.links))
    }
}

pub fn per_link_prob(p: f64, links: usize) -> f64 {
    0.5 * (1.0 - (1.0 - 2.0 * p).max(0.0).powf(1.0 / links as f64))
}

pub fn estimate(plan: &ChainPlan, opts: &EstimateOptions) -> Result<SimEstimate> {
    let seed = opts.seed;
    let counts = adaptive(2, opts, plan.config.noiseless(), |i| {
        let mut s = RandomStream::new(seed, i);
        let r = run_chain(plan, &mut s);
        r.flip_x as u32 | (r.flip_z as u32) << 1
    })?;
    Ok(SimEstimate {
        p_err_x: counts.p(0),
        p_err_z: counts.p(1),
        se_x: counts.se(0),
        se_z: counts.se(1),
        trials: counts.trials,
        links: plan.config.links,
        threshold: opts.threshold,
        converged: counts.converged,
        budget_exceeded: counts.budget_exceeded,
    })
}

/// Key per optical mode over `total_km` from per-link flip probabilities of
/// links of length `link_km`.
pub fn key_per_mode_over(p_link: (f64, f64), link_km: f64, total_km: f64, modes: u32) -> f64 {
    let n = total_km / link_km;
    let qx = odd_error_aggregate(p_link.0, n);
    let qz = odd_error_aggregate(p_link.1, n);
    key_per_mode(key_rate_from_flips(qx, qz), modes)
}

/// Achievable distance (point, lower, upper) implied by an estimate, using
/// (1+b)p and (1−b)p for the bounds.
pub fn achievable_distance_mc(est: &SimEstimate, link_km: f64, modes: u32, threshold: f64) -> (f64, f64, f64) {
    let at = |scale: f64| {
        let p = (
            per_link_prob((est.p_err_x * scale).min(0.5), est.links),
            per_link_prob((est.p_err_z * scale).min(0.5), est.links),
        );
        bisect_distance(threshold, |d| key_per_mode_over(p, link_km, d, modes))
    };
    let b = est.threshold;
    (at(1.0), at(1.0 + b), at(1.0 - b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_flip_converges_immediately() {
        let o = EstimateOptions::new(0.1, 1).unwrap();
        let c = adaptive(2, &o, false, |_| 0b11).unwrap();
        assert_eq!(c.trials, 10);
        assert!(c.converged);
        assert_eq!(c.se(0), 0.0);
    }

    #[test]
    fn budget_flag() {
        let o = EstimateOptions::new(0.1, 1).unwrap().with_budget(1000);
        let c = adaptive(1, &o, false, |_| 0).unwrap();
        assert!(c.budget_exceeded && !c.converged);
        assert_eq!(c.trials, 1000);
    }

    #[test]
    fn per_link_inverts_aggregation() {
        let p = per_link_prob(0.2, 100);
        assert!((odd_error_aggregate(p, 100.0) - 0.2).abs() < 1e-12);
    }
}
