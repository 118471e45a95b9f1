//! Content-addressed store of Monte-Carlo estimates.
//!
//! Each entry lives in `<dir>/<sha256>.json` together with the full key it was
//! computed from; a lookup only succeeds when the stored key equals the
//! requested one, so entries from another engine version or configuration are
//! never served. `index.json` lists the entries for humans and tooling.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::mc::chain::{ChainConfig, Scheme};
use crate::mc::estimate::{EstimateOptions, SimEstimate};

/// Bumped whenever a change alters the numbers an estimate produces.
pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+mc1");

const INDEX: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateKey {
    pub engine_version: String,
    pub eta0: f64,
    /// Attenuation length; `None` for a lossless fibre.
    pub l0_km: Option<f64>,
    pub sigma_gkp: f64,
    pub scheme: Scheme,
    pub n_multi: u32,
    pub n_all: u32,
    pub links: usize,
    pub analog: bool,
    pub threshold_b: f64,
    pub seed: u64,
    pub budget: u64,
    pub digits: u32,
}

impl EstimateKey {
    pub fn new(config: &ChainConfig, opts: &EstimateOptions, digits: u32) -> Self {
        Self {
            engine_version: ENGINE_VERSION.to_owned(),
            eta0: config.fiber.eta0,
            l0_km: config.fiber.l0_km.is_finite().then_some(config.fiber.l0_km),
            sigma_gkp: config.squeezing.sigma_gkp,
            scheme: config.scheme,
            n_multi: config.n_multi,
            n_all: config.n_all,
            links: config.links,
            analog: config.analog,
            threshold_b: opts.threshold,
            seed: opts.seed,
            budget: opts.budget,
            digits,
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("key serialises");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    key: EstimateKey,
    estimate: SimEstimate,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    /// Stored estimate for `key`, if present and its key matches exactly.
    pub fn get(&self, key: &EstimateKey) -> Option<SimEstimate> {
        let text = fs::read_to_string(self.entry_path(&key.hash())).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        (entry.key == *key).then_some(entry.estimate)
    }

    pub fn put(&self, key: &EstimateKey, estimate: &SimEstimate) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let hash = key.hash();
        let entry = Entry {
            key: key.clone(),
            estimate: estimate.clone(),
        };
        fs::write(self.entry_path(&hash), serde_json::to_string_pretty(&entry)?)?;
        let mut index = self.index();
        index.insert(hash, key.clone());
        fs::write(self.dir.join(INDEX), serde_json::to_string_pretty(&index)?)?;
        Ok(())
    }

    /// Hash → key of every entry written so far.
    pub fn index(&self) -> BTreeMap<String, EstimateKey> {
        fs::read_to_string(self.dir.join(INDEX))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    /// Look `key` up, or compute, store and return the estimate.
    pub fn get_or_compute(
        &self,
        key: &EstimateKey,
        compute: impl FnOnce() -> Result<SimEstimate>,
    ) -> Result<(SimEstimate, bool)> {
        if let Some(e) = self.get(key) {
            return Ok((e, true));
        }
        let e = compute()?;
        self.put(key, &e)?;
        Ok((e, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{FiberParams, Squeezing};

    fn key() -> EstimateKey {
        let c = ChainConfig::new(FiberParams::new(0.98).unwrap(), Squeezing::from_sigma(0.1).unwrap(), Scheme::C4, 2, 8)
            .unwrap();
        EstimateKey::new(&c, &EstimateOptions::new(0.1, 7).unwrap(), 60)
    }

    fn est() -> SimEstimate {
        SimEstimate {
            p_err_x: 0.25,
            p_err_z: 0.125,
            se_x: 0.01,
            se_z: 0.01,
            trials: 1000,
            links: 100,
            threshold: 0.1,
            converged: true,
            budget_exceeded: false,
        }
    }

    #[test]
    fn round_trip_and_index() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let k = key();
        assert!(cache.get(&k).is_none());
        cache.put(&k, &est()).unwrap();
        assert_eq!(cache.get(&k), Some(est()));
        assert_eq!(cache.index().len(), 1);
    }

    #[test]
    fn mismatched_key_is_not_served() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let k = key();
        cache.put(&k, &est()).unwrap();
        // Same file name, different stored key: simulate an engine upgrade.
        let mut stale = k.clone();
        stale.engine_version = "0.0.0".into();
        let text = fs::read_to_string(cache.entry_path(&k.hash())).unwrap();
        let forged = text.replace(ENGINE_VERSION, "0.0.0");
        fs::write(cache.entry_path(&k.hash()), forged).unwrap();
        assert!(cache.get(&k).is_none());
        assert!(cache.get(&stale).is_none());
    }

    #[test]
    fn hash_depends_on_every_field() {
        let k = key();
        let mut other = k.clone();
        other.seed += 1;
        assert_ne!(k.hash(), other.hash());
        other = k.clone();
        other.engine_version.push('x');
        assert_ne!(k.hash(), other.hash());
    }
}
