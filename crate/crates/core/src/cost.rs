//! Resource cost of repeater layouts and the search for the best layout at a
//! given distance.

use serde::{Deserialize, Serialize};

use crate::codes::CodeName;
use crate::error::{Error, Result};
use crate::mc::chain::{Scheme, MAX_DENSITY};
use crate::mc::estimate::key_per_mode_over;

/// Signal speed in fibre, km/s.
pub const FIBER_SPEED_KM_S: f64 = 2.0e5;

/// Storage cost of a type-B station, in mode·τ₀.
pub const T_GKP: u32 = 4;

/// Per-station storage cost (t_B, t_A) in mode·τ₀ units.
pub fn station_costs(code: CodeName) -> (u32, u32) {
    match code {
        CodeName::C4 => (T_GKP, 68),
        CodeName::Steane7 => (T_GKP, 311),
    }
}

fn scheme_costs(scheme: Scheme) -> (f64, f64) {
    match scheme.code() {
        Some(c) => {
            let (b, a) = station_costs(c);
            (b as f64, a as f64)
        }
        None => (T_GKP as f64, T_GKP as f64),
    }
}

/// Duration of one station's processing per data mode, in τ₀ (2, 11, 40).
pub fn station_time(scheme: Scheme) -> u32 {
    match scheme {
        Scheme::GkpOnly => 2,
        Scheme::C4 => 11,
        Scheme::Steane7 => 40,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub struct Layout {
    pub n_multi: u32,
    pub n_all: u32,
}

/// C = [(L/10)(t_B(N_all−N_multi) + t_A N_multi) + t_A] / r′; infinite when r′ ≤ 0.
pub fn cost(scheme: Scheme, layout: Layout, total_km: f64, key_per_mode: f64) -> f64 {
    if !(key_per_mode > 0.0) {
        return f64::INFINITY;
    }
    let (tb, ta) = scheme_costs(scheme);
    let nm = layout.n_multi as f64;
    let na = layout.n_all as f64;
    ((total_km / 10.0) * (tb * (na - nm) + ta * nm) + ta) / key_per_mode
}

pub fn normalized_cost(scheme: Scheme, layout: Layout, total_km: f64, key_per_mode: f64) -> f64 {
    cost(scheme, layout, total_km, key_per_mode) / total_km
}

/// All layouts with 1 ≤ N_multi ≤ N_all ≤ max and N_multi | N_all.
pub fn enumerate_configs(max_density: u32) -> Vec<Layout> {
    let mut v = Vec::new();
    for n_multi in 1..=max_density {
        for n_all in (n_multi..=max_density).step_by(n_multi as usize) {
            v.push(Layout { n_multi, n_all });
        }
    }
    v
}

pub fn default_configs() -> Vec<Layout> {
    enumerate_configs(MAX_DENSITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MaxKey,
    MinCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    Hybrid,
    TypeAOnly,
}

/// Per-link logical flip probabilities measured for one layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutEstimate {
    pub layout: Layout,
    pub p_link_x: f64,
    pub p_link_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub distance_km: f64,
    pub scheme: Scheme,
    pub n_multi: u32,
    pub n_all: u32,
    pub key_per_mode: f64,
    pub cost: f64,
    pub normalized_cost: f64,
    /// Processing part of the latency, in τ₀.
    pub latency_tau0: f64,
    /// Propagation part of the latency, in seconds.
    pub propagation_s: f64,
    /// Key bits per τ₀.
    pub throughput: f64,
}

pub fn evaluate(scheme: Scheme, est: &LayoutEstimate, total_km: f64) -> CostReport {
    let link_km = 10.0 / est.layout.n_multi as f64;
    let key = key_per_mode_over((est.p_link_x, est.p_link_z), link_km, total_km, scheme.modes());
    let c = cost(scheme, est.layout, total_km, key);
    let lat = latency(scheme, est.layout, total_km, FIBER_SPEED_KM_S);
    CostReport {
        distance_km: total_km,
        scheme,
        n_multi: est.layout.n_multi,
        n_all: est.layout.n_all,
        key_per_mode: key,
        cost: c,
        normalized_cost: c / total_km,
        latency_tau0: lat.processing_tau0,
        propagation_s: lat.propagation_s,
        throughput: throughput(key * scheme.modes() as f64, scheme),
    }
}

/// Best layout for one distance. Ties go to fewer type-A stations, then fewer
/// stations overall.
pub fn optimize(
    scheme: Scheme,
    estimates: &[LayoutEstimate],
    total_km: f64,
    objective: Objective,
    constraint: Constraint,
) -> Result<CostReport> {
    let mut best: Option<CostReport> = None;
    for est in estimates {
        if constraint == Constraint::TypeAOnly && est.layout.n_multi != est.layout.n_all {
            continue;
        }
        let r = evaluate(scheme, est, total_km);
        if !(r.key_per_mode > 0.0) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                let primary = match objective {
                    Objective::MaxKey => r.key_per_mode.partial_cmp(&b.key_per_mode).map(|o| o.reverse()),
                    Objective::MinCost => r.cost.partial_cmp(&b.cost),
                };
                let order = primary
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(r.n_multi.cmp(&b.n_multi))
                    .then(r.n_all.cmp(&b.n_all));
                order == std::cmp::Ordering::Less
            }
        };
        if better {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no layout yields positive key at {total_km} km")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub propagation_s: f64,
    pub processing_tau0: f64,
}

/// t_l = L/c + (N+1)τ_A + (mN + n − 1)τ_B with N type-A links, m type-B
/// stations per link and n modes per logical qubit; τ_B = 2τ₀.
pub fn latency(scheme: Scheme, layout: Layout, total_km: f64, speed_km_s: f64) -> Latency {
    let tau_b = station_time(Scheme::GkpOnly) as f64;
    let propagation_s = total_km / speed_km_s;
    let processing_tau0 = match scheme {
        Scheme::GkpOnly => {
            let stations = layout.n_all as f64 * total_km / 10.0;
            (stations + 1.0) * tau_b
        }
        _ => {
            let links = layout.n_multi as f64 * total_km / 10.0;
            let m = (layout.n_all / layout.n_multi - 1) as f64;
            let n = scheme.modes() as f64;
            latency_steps(links, m, n, station_time(scheme) as f64, tau_b)
        }
    };
    Latency {
        propagation_s,
        processing_tau0,
    }
}

/// Processing part of the latency in τ₀ for explicit (N, m, n, τ_A, τ_B).
pub fn latency_steps(links: f64, m: f64, n: f64, tau_a: f64, tau_b: f64) -> f64 {
    (links + 1.0) * tau_a + (m * links + n - 1.0) * tau_b
}

/// Key rate per τ₀: r divided by the limiting station time.
pub fn throughput(r: f64, scheme: Scheme) -> f64 {
    r.max(0.0) / station_time(scheme) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_count() {
        let v = default_configs();
        assert_eq!(v.len(), 158);
        assert!(v.contains(&Layout { n_multi: 1, n_all: 40 }));
        assert!(!v.contains(&Layout { n_multi: 3, n_all: 40 }));
        assert!(v.contains(&Layout { n_multi: 40, n_all: 40 }));
    }

    #[test]
    fn normalized_cost_example() {
        let c = normalized_cost(Scheme::Steane7, Layout { n_multi: 2, n_all: 40 }, 1000.0, 0.06);
        // ((100)(4·38 + 311·2) + 311)/0.06/1000
        let want = (100.0 * (4.0 * 38.0 + 622.0) + 311.0) / 0.06 / 1000.0;
        assert!((c - want).abs() < 1e-9);
        assert!((c - 1295.18).abs() < 0.01);
    }

    #[test]
    fn latency_example() {
        assert_eq!(latency_steps(100.0, 4.0, 7.0, 40.0, 2.0), 4852.0);
    }

    #[test]
    fn nonpositive_key_is_infinite() {
        let l = Layout { n_multi: 1, n_all: 1 };
        assert!(cost(Scheme::C4, l, 100.0, 0.0).is_infinite());
    }
}
