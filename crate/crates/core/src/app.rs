//! Experiment drivers behind the command-line interface. Each command turns a
//! [`RunConfig`] into result files under the output directory.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{achievable_distance, achievable_distance_fixed_spacing, optimize_spacing, KEY_THRESHOLD};
use crate::cache::{Cache, EstimateKey, ENGINE_VERSION};
use crate::config::{AnalyticConfig, CostConfig, RunConfig, SimulateConfig, SingleLinkConfig, SweepConfig};
use crate::cost::{default_configs, optimize, Constraint, Layout, LayoutEstimate};
use crate::error::{Error, Result};
use crate::io::{write_csv, write_json, Cell, Table};
use crate::mc::chain::{ChainConfig, ChainPlan, Scheme};
use crate::mc::estimate::{achievable_distance_mc, estimate, EstimateOptions, SimEstimate};
use crate::mc::single_link::{default_gammas, single_link_experiment};
use crate::quad::{FiberParams, Squeezing};
use crate::rescale::DEFAULT_DIGITS;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "results";

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub precision: Option<u32>,
    pub budget: Option<u64>,
}

/// Settings after merging flags, configuration and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub out: PathBuf,
    pub digits: u32,
    pub budget: u64,
}

impl Settings {
    pub fn resolve(config: &RunConfig, overrides: &Overrides) -> Self {
        let c = config.common();
        Self {
            seed: overrides.seed.or(c.seed).unwrap_or(DEFAULT_SEED),
            out: overrides
                .out
                .clone()
                .or_else(|| c.out.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            digits: overrides.precision.or(c.precision).unwrap_or(DEFAULT_DIGITS),
            budget: overrides.budget.or(c.budget).unwrap_or(crate::mc::estimate::DEFAULT_BUDGET),
        }
    }

    fn options(&self, threshold_b: f64) -> Result<EstimateOptions> {
        Ok(EstimateOptions::new(threshold_b, self.seed)?.with_budget(self.budget))
    }

    fn cache(&self) -> Cache {
        Cache::new(self.out.join("cache"))
    }
}

/// What a command produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// At least one estimate stopped at the sample budget before converging.
    pub budget_exceeded: bool,
    pub cache_hits: usize,
    pub computed: usize,
}

pub fn run(config: &RunConfig, overrides: &Overrides) -> Result<RunSummary> {
    let s = Settings::resolve(config, overrides);
    match config {
        RunConfig::Analytic(c) => cmd_analytic(c, &s),
        RunConfig::Simulate(c) => cmd_simulate(c, &s),
        RunConfig::SingleLink(c) => cmd_single_link(c, &s),
        RunConfig::Cost(c) => cmd_cost(c, &s),
        RunConfig::Sweep(c) => cmd_sweep(c, &s),
    }
}

pub fn analytic_table(c: &AnalyticConfig) -> Result<Table> {
    let mut t = Table::new(vec![
        ("eta0", "fibre coupling efficiency"),
        ("sigma_gkp", "GKP ancilla noise standard deviation"),
        ("squeezing_db", "squeezing equivalent of sigma_gkp"),
        ("spacing_km", "station spacing (optimal at the achievable distance unless pinned)"),
        ("distance_km", "largest distance with key per mode above the threshold"),
    ]);
    let cells: Vec<(f64, f64)> = c
        .eta0
        .iter()
        .flat_map(|&e| c.sigma_gkp.iter().map(move |&s| (e, s)))
        .collect();
    let rows: Vec<Result<Vec<Cell>>> = cells
        .par_iter()
        .map(|&(eta0, sigma)| {
            let f = FiberParams::new(eta0)?;
            let sq = Squeezing::from_sigma(sigma)?;
            let (spacing, distance) = match c.spacing_km {
                Some(l) => (l, achievable_distance_fixed_spacing(f, sq, l, c.key_threshold)),
                None => {
                    let d = achievable_distance(f, sq, c.key_threshold);
                    (optimize_spacing(f, sq, d).spacing_km, d)
                }
            };
            Ok(vec![eta0.into(), sigma.into(), sq.db.into(), spacing.into(), distance.into()])
        })
        .collect();
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

fn cmd_analytic(c: &AnalyticConfig, s: &Settings) -> Result<RunSummary> {
    let t = analytic_table(c)?;
    Ok(RunSummary {
        files: vec![write_csv(&s.out, "analytic.csv", &t)?],
        ..Default::default()
    })
}

fn chain_config(
    fiber: FiberParams,
    sigma_gkp: f64,
    scheme: Scheme,
    layout: Layout,
    links: usize,
    analog: bool,
) -> Result<ChainConfig> {
    let mut cfg = ChainConfig::new(fiber, Squeezing::from_sigma_or_perfect(sigma_gkp)?, scheme, layout.n_multi, layout.n_all)?;
    cfg.links = links;
    cfg.analog = analog;
    cfg.validate()?;
    Ok(cfg)
}

/// Estimate through the cache; returns the estimate and whether it was cached.
fn cached_estimate(cfg: &ChainConfig, opts: &EstimateOptions, s: &Settings) -> Result<(SimEstimate, bool)> {
    let key = EstimateKey::new(cfg, opts, s.digits);
    s.cache().get_or_compute(&key, || {
        let plan = ChainPlan::new(*cfg, s.digits)?;
        estimate(&plan, opts)
    })
}

fn tally(summary: &mut RunSummary, est: &SimEstimate, hit: bool) {
    summary.budget_exceeded |= est.budget_exceeded;
    if hit {
        summary.cache_hits += 1;
    } else {
        summary.computed += 1;
    }
}

#[derive(Debug, Serialize)]
struct DistanceBounds {
    point: f64,
    lower: f64,
    upper: f64,
}

#[derive(Debug, Serialize)]
struct SimulateReport<'a> {
    engine_version: &'a str,
    config: &'a SimulateConfig,
    seed: u64,
    digits: u32,
    budget: u64,
    link_km: f64,
    estimate: &'a SimEstimate,
    p_link_x: f64,
    p_link_z: f64,
    achievable_distance_km: DistanceBounds,
}

fn cmd_simulate(c: &SimulateConfig, s: &Settings) -> Result<RunSummary> {
    let fiber = if c.lossless {
        FiberParams {
            l0_km: f64::INFINITY,
            ..FiberParams::new(c.eta0)?
        }
    } else {
        FiberParams::new(c.eta0)?
    };
    let layout = Layout {
        n_multi: c.n_multi,
        n_all: c.n_all,
    };
    let cfg = chain_config(fiber, c.sigma_gkp, c.scheme, layout, c.links, c.analog)?;
    let opts = s.options(c.threshold_b)?;
    let (est, hit) = cached_estimate(&cfg, &opts, s)?;
    let (p_link_x, p_link_z) = est.per_link();
    let (point, lower, upper) = achievable_distance_mc(&est, cfg.link_km(), c.scheme.modes(), c.key_threshold);
    let report = SimulateReport {
        engine_version: ENGINE_VERSION,
        config: c,
        seed: s.seed,
        digits: s.digits,
        budget: s.budget,
        link_km: cfg.link_km(),
        estimate: &est,
        p_link_x,
        p_link_z,
        achievable_distance_km: DistanceBounds { point, lower, upper },
    };
    let mut summary = RunSummary::default();
    tally(&mut summary, &est, hit);
    summary.files.push(write_json(&s.out, "simulate.json", &report)?);
    Ok(summary)
}

pub fn single_link_columns() -> Vec<(&'static str, &'static str)> {
    vec![
        ("gamma", "loss probability of the link"),
        ("scheme", "encoding and decoder"),
        ("p_err", "probability of any logical Pauli error"),
        ("stderr", "binomial standard error of p_err"),
        ("trials", "samples drawn"),
        ("converged", "relative standard error reached the threshold"),
    ]
}

fn cmd_single_link(c: &SingleLinkConfig, s: &Settings) -> Result<RunSummary> {
    let gammas = c.gammas.clone().unwrap_or_else(|| default_gammas(c.points));
    let opts = s.options(c.threshold_b)?;
    let mut t = Table::new(single_link_columns());
    let mut summary = RunSummary::default();
    for &scheme in &c.schemes {
        for p in single_link_experiment(&gammas, scheme, &opts)? {
            summary.budget_exceeded |= !p.converged;
            summary.computed += 1;
            t.push(vec![
                p.gamma.into(),
                scheme.as_str().into(),
                p.p_err.into(),
                p.stderr.into(),
                p.trials.into(),
                p.converged.into(),
            ]);
        }
    }
    summary.files.push(write_csv(&s.out, "single_link.csv", &t)?);
    Ok(summary)
}

/// Layouts to evaluate; a GKP-only chain has a single station type, so only
/// one layout per density is distinct.
fn layouts_for(scheme: Scheme, layouts: &Option<Vec<Layout>>) -> Vec<Layout> {
    let mut v = layouts.clone().unwrap_or_else(default_configs);
    if scheme == Scheme::GkpOnly {
        for l in &mut v {
            l.n_multi = l.n_all;
        }
    }
    v.sort();
    v.dedup();
    v
}

fn cmd_cost(c: &CostConfig, s: &Settings) -> Result<RunSummary> {
    let fiber = FiberParams::new(c.eta0)?;
    let opts = s.options(c.threshold_b)?;
    let mut summary = RunSummary::default();
    let mut estimates = Vec::new();
    let mut est_table = Table::new(vec![
        ("n_multi", "type-A stations per 10 km"),
        ("n_all", "stations of either type per 10 km"),
        ("p_link_x", "logical X flip probability per link"),
        ("p_link_z", "logical Z flip probability per link"),
        ("trials", "samples drawn"),
        ("converged", "relative standard error reached the threshold"),
    ]);
    for layout in layouts_for(c.scheme, &c.layouts) {
        let cfg = chain_config(fiber, c.sigma_gkp, c.scheme, layout, c.links, true)?;
        let (est, hit) = cached_estimate(&cfg, &opts, s)?;
        tally(&mut summary, &est, hit);
        let (x, z) = est.per_link();
        est_table.push(vec![layout.n_multi.into(), layout.n_all.into(), x.into(), z.into(), est.trials.into(), est.converged.into()]);
        estimates.push(LayoutEstimate {
            layout,
            p_link_x: x,
            p_link_z: z,
        });
    }
    let t = cost_table(c, &estimates)?;
    summary.files.push(write_csv(&s.out, "cost_estimates.csv", &est_table)?);
    summary.files.push(write_csv(&s.out, "cost.csv", &t)?);
    Ok(summary)
}

/// Optimal layout per distance under both constraints. Distances with no
/// feasible layout get zero key, infinite cost and layout (0, 0).
pub fn cost_table(c: &CostConfig, estimates: &[LayoutEstimate]) -> Result<Table> {
    let mut t = Table::new(vec![
        ("constraint", "hybrid (type A and B) or type-a-only"),
        ("distance_km", "total distance"),
        ("scheme", "outer code"),
        ("n_multi", "type-A stations per 10 km"),
        ("n_all", "stations of either type per 10 km"),
        ("key_per_mode", "secret key per optical mode"),
        ("cost", "storage cost per key bit, mode x tau0"),
        ("normalized_cost", "cost per km"),
        ("latency_tau0", "processing latency in tau0"),
        ("propagation_s", "signal propagation time in seconds"),
        ("throughput", "key bits per tau0"),
    ]);
    for (constraint, label) in [(Constraint::Hybrid, "hybrid"), (Constraint::TypeAOnly, "type-a-only")] {
        for &d in &c.distances_km {
            let row = match optimize(c.scheme, estimates, d, c.objective, constraint) {
                Ok(r) => vec![
                    label.into(),
                    d.into(),
                    c.scheme.as_str().into(),
                    r.n_multi.into(),
                    r.n_all.into(),
                    r.key_per_mode.into(),
                    r.cost.into(),
                    r.normalized_cost.into(),
                    r.latency_tau0.into(),
                    r.propagation_s.into(),
                    r.throughput.into(),
                ],
                Err(Error::Infeasible(_)) => vec![
                    label.into(),
                    d.into(),
                    c.scheme.as_str().into(),
                    0u32.into(),
                    0u32.into(),
                    0.0.into(),
                    f64::INFINITY.into(),
                    f64::INFINITY.into(),
                    f64::NAN.into(),
                    (d / crate::cost::FIBER_SPEED_KM_S).into(),
                    0.0.into(),
                ],
                Err(e) => return Err(e),
            };
            t.push(row);
        }
    }
    Ok(t)
}

fn cmd_sweep(c: &SweepConfig, s: &Settings) -> Result<RunSummary> {
    let opts = s.options(c.threshold_b)?;
    let mut summary = RunSummary::default();
    let mut t = Table::new(vec![
        ("eta0", "fibre coupling efficiency"),
        ("sigma_gkp", "GKP ancilla noise standard deviation"),
        ("scheme", "outer code"),
        ("n_multi", "type-A stations per 10 km"),
        ("n_all", "stations of either type per 10 km"),
        ("p_err_x", "logical X flip probability over the simulated chain"),
        ("p_err_z", "logical Z flip probability over the simulated chain"),
        ("se_x", "standard error of p_err_x"),
        ("se_z", "standard error of p_err_z"),
        ("trials", "samples drawn"),
        ("converged", "relative standard error reached the threshold"),
        ("distance_km", "achievable distance from the point estimate"),
        ("distance_lower_km", "achievable distance at (1+b) p_err"),
        ("distance_upper_km", "achievable distance at (1-b) p_err"),
    ]);
    for &eta0 in &c.eta0 {
        let fiber = FiberParams::new(eta0)?;
        for &sigma in &c.sigma_gkp {
            for layout in layouts_for(c.scheme, &c.layouts) {
                let cfg = chain_config(fiber, sigma, c.scheme, layout, c.links, c.analog)?;
                let (est, hit) = cached_estimate(&cfg, &opts, s)?;
                tally(&mut summary, &est, hit);
                let (d, lo, hi) = achievable_distance_mc(&est, cfg.link_km(), c.scheme.modes(), KEY_THRESHOLD);
                t.push(vec![
                    eta0.into(),
                    sigma.into(),
                    c.scheme.as_str().into(),
                    layout.n_multi.into(),
                    layout.n_all.into(),
                    est.p_err_x.into(),
                    est.p_err_z.into(),
                    est.se_x.into(),
                    est.se_z.into(),
                    est.trials.into(),
                    est.converged.into(),
                    d.into(),
                    lo.into(),
                    hi.into(),
                ]);
            }
        }
    }
    summary.files.push(write_csv(&s.out, "sweep.csv", &t)?);
    Ok(summary)
}

/// Load `path`, or the default configuration for `kind` when no path is given.
/// A file whose `kind` differs from the command is a configuration error.
pub fn load_config(kind: &str, path: Option<&Path>) -> Result<RunConfig> {
    let cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default_for(kind)?,
    };
    if cfg.kind() != kind {
        return Err(Error::Config(format!(
            "configuration is for '{}' but the command is '{kind}'",
            cfg.kind()
        )));
    }
    Ok(cfg)
}

/// Process exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::BudgetExceeded { .. } => 3,
        Error::PrecisionExhausted { .. } => 4,
        _ => 1,
    }
}
