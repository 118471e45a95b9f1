//! Chains of elementary links, simulated one quadrature at a time.
//!
//! Each quadrature starts right after the outer-code correction in that
//! quadrature at the first type-A station (after the GKP correction at the
//! first station for a GKP-only chain) and ends at the same point of the last
//! link. Noise injected into a quadrature by operations on the conjugate one
//! (GKP back-action, outer-stabilizer back-action) enters as Gaussian samples;
//! an outer-stabilizer back-action is one sample shared by its whole support.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codes::{build_code, min_weight_correction, CodeName, OuterCode, Pauli};
use crate::error::{Error, Result};
use crate::quad::{centered_mod_unchecked, transmissivity, FiberParams, RandomStream, Squeezing, SQRT_PI};
use crate::rescale::{periodic_initial_variance, solve_periodic};

use super::decode::{decode_step1, decode_step2, QubitHistory, Reading, StabilizerRecord};
use super::ops::{correct_value, infer_stabilizer, likelihood_or_zero, perfect_flip};
use super::schedule::{build_schedule, Op, Quad, StabKind, StationType};

pub const DEFAULT_LINKS: usize = 100;
pub const MAX_DENSITY: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Scheme {
    #[serde(rename = "gkp-only")]
    GkpOnly,
    #[serde(rename = "c4")]
    C4,
    #[serde(rename = "steane7")]
    Steane7,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gkp-only" => Ok(Scheme::GkpOnly),
            "c4" => Ok(Scheme::C4),
            "steane7" => Ok(Scheme::Steane7),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::GkpOnly => "gkp-only",
            Scheme::C4 => "c4",
            Scheme::Steane7 => "steane7",
        }
    }

    pub fn code(&self) -> Option<CodeName> {
        match self {
            Scheme::GkpOnly => None,
            Scheme::C4 => Some(CodeName::C4),
            Scheme::Steane7 => Some(CodeName::Steane7),
        }
    }

    /// GKP modes per logical qubit.
    pub fn modes(&self) -> u32 {
        self.code().map_or(1, |c| c.n() as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub fiber: FiberParams,
    pub squeezing: Squeezing,
    pub scheme: Scheme,
    /// Type-A stations per 10 km (equal to `n_all` for a GKP-only chain).
    pub n_multi: u32,
    /// Stations of either type per 10 km.
    pub n_all: u32,
    pub links: usize,
    pub analog: bool,
}

impl ChainConfig {
    pub fn new(fiber: FiberParams, squeezing: Squeezing, scheme: Scheme, n_multi: u32, n_all: u32) -> Result<Self> {
        let n_multi = if scheme == Scheme::GkpOnly { n_all } else { n_multi };
        let c = Self {
            fiber,
            squeezing,
            scheme,
            n_multi,
            n_all,
            links: DEFAULT_LINKS,
            analog: true,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.n_multi && self.n_multi <= self.n_all && self.n_all <= MAX_DENSITY) {
            return Err(Error::Domain(format!(
                "need 1 <= n_multi <= n_all <= {MAX_DENSITY}, got ({}, {})",
                self.n_multi, self.n_all
            )));
        }
        if self.n_all % self.n_multi != 0 {
            return Err(Error::Domain(format!(
                "n_all = {} is not a multiple of n_multi = {}",
                self.n_all, self.n_multi
            )));
        }
        if self.links == 0 {
            return Err(Error::Domain("a chain needs at least one link".into()));
        }
        Ok(())
    }

    /// Fibre length between neighbouring stations.
    pub fn spacing_km(&self) -> f64 {
        10.0 / self.n_all as f64
    }

    /// Length of one elementary link (between consecutive stations of the
    /// outer level, or between GKP stations for a GKP-only chain).
    pub fn link_km(&self) -> f64 {
        10.0 / self.n_multi as f64
    }

    /// Type-B stations between consecutive type-A stations.
    pub fn type_b_per_link(&self) -> u32 {
        self.n_all / self.n_multi - 1
    }

    pub fn sigma_trans_sq(&self) -> f64 {
        1.0 - transmissivity(&self.fiber, self.spacing_km()).expect("spacing is positive")
    }

    /// No randomness at all: perfect ancillas and a lossless fibre.
    pub fn noiseless(&self) -> bool {
        self.squeezing.sigma_gkp == 0.0 && self.sigma_trans_sq() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub flip_x: bool,
    pub flip_z: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Ev {
    /// Independent Gaussian displacement with this standard deviation.
    Noise(f64),
    /// Common back-action sample of an outer-stabilizer measurement.
    Kick(usize),
    /// GKP correction; index into the per-qubit coefficient list.
    Correct(usize),
    /// Contribution to an outer-stabilizer readout; index into the read slots.
    Read(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QubitProgram {
    events: Vec<Ev>,
    /// Real-time feedback coefficient of each correction.
    pub coefficients: Vec<f64>,
    /// Standard deviation used to interpret each correction's syndrome.
    pub syndrome_sigma: Vec<f64>,
    /// Residual standard deviation at the start of a period.
    pub start_sigma: f64,
    /// Correction indices that happen between this qubit's outer-stabilizer reads.
    first_read_event: usize,
    last_read_event: usize,
}

/// Everything one quadrature needs, precomputed from the configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadPlan {
    pub quad: Quad,
    pub qubits: Vec<QubitProgram>,
    /// (stabilizer, round) of each read slot.
    read_slots: Vec<(usize, u8)>,
    read_sigma: Vec<f64>,
    kick_slots: usize,
    rounds: Vec<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainPlan {
    pub config: ChainConfig,
    pub q: QuadPlan,
    pub p: QuadPlan,
    code: Option<OuterCode>,
}

fn error_type(quad: Quad) -> Pauli {
    match quad {
        Quad::Q => Pauli::X,
        Quad::P => Pauli::Z,
    }
}

impl ChainPlan {
    pub fn new(config: ChainConfig, digits: u32) -> Result<Self> {
        config.validate()?;
        let code = config.scheme.code().map(build_code);
        let q = build_quad_plan(&config, code.as_ref(), Quad::Q, digits)?;
        let p = build_quad_plan(&config, code.as_ref(), Quad::P, digits)?;
        Ok(Self { config, q, p, code })
    }

    pub fn code(&self) -> Option<&OuterCode> {
        self.code.as_ref()
    }
}

fn build_quad_plan(cfg: &ChainConfig, code: Option<&OuterCode>, quad: Quad, digits: u32) -> Result<QuadPlan> {
    let g = cfg.squeezing.variance();
    let g_sd = cfg.squeezing.sigma_gkp;
    let t_sd = cfg.sigma_trans_sq().sqrt();
    let gkp_op = |op_quad: Quad, ev: &mut Vec<Ev>, n_corr: &mut usize| {
        if op_quad == quad {
            ev.push(Ev::Correct(*n_corr));
            *n_corr += 1;
        } else {
            ev.push(Ev::Noise(g_sd));
        }
    };

    let mut read_slots: Vec<(usize, u8)> = Vec::new();
    let mut kick_ids: BTreeMap<(u8, usize, u8), usize> = BTreeMap::new();
    let mut raw: Vec<(Vec<Ev>, usize, usize)> = Vec::new();

    match code {
        None => {
            let mut ev = Vec::new();
            let mut n = 0;
            // start right after this quadrature's correction at a station (q then p)
            match quad {
                Quad::Q => {
                    gkp_op(Quad::P, &mut ev, &mut n);
                    ev.push(Ev::Noise(t_sd));
                    gkp_op(Quad::Q, &mut ev, &mut n);
                }
                Quad::P => {
                    ev.push(Ev::Noise(t_sd));
                    gkp_op(Quad::Q, &mut ev, &mut n);
                    gkp_op(Quad::P, &mut ev, &mut n);
                }
            }
            raw.push((ev, 0, 0));
        }
        Some(code) => {
            let sched = build_schedule(StationType::A(code.name));
            let read_kind = match quad {
                Quad::Q => StabKind::Z,
                Quad::P => StabKind::X,
            };
            for ops in &sched.ops {
                let last = ops
                    .iter()
                    .rposition(|o| matches!(o, Op::Measure { kind, .. } if *kind == read_kind))
                    .expect("every qubit is read in both quadratures");
                let mut ev = Vec::new();
                let mut n = 0;
                let mut push_ops = |part: u8, slice: &[Op], ev: &mut Vec<Ev>, n: &mut usize| {
                    for op in slice {
                        match *op {
                            Op::Gkp(qd) => gkp_op(qd, ev, n),
                            Op::Idle => {}
                            Op::Measure { kind, stab, round } if kind == read_kind => {
                                let id = match read_slots.iter().position(|s| *s == (stab, round)) {
                                    Some(i) => i,
                                    None => {
                                        read_slots.push((stab, round));
                                        read_slots.len() - 1
                                    }
                                };
                                ev.push(Ev::Read(id));
                            }
                            Op::Measure { stab, round, .. } => {
                                let next = kick_ids.len();
                                let id = *kick_ids.entry((part, stab, round)).or_insert(next);
                                ev.push(Ev::Kick(id));
                            }
                        }
                    }
                };
                push_ops(0, &ops[last + 1..], &mut ev, &mut n);
                ev.push(Ev::Noise(t_sd));
                for _ in 0..cfg.type_b_per_link() {
                    gkp_op(Quad::Q, &mut ev, &mut n);
                    gkp_op(Quad::P, &mut ev, &mut n);
                    ev.push(Ev::Noise(t_sd));
                }
                let head_start = ev.len();
                push_ops(1, &ops[..=last], &mut ev, &mut n);
                let first_read = ev[head_start..]
                    .iter()
                    .position(|e| matches!(e, Ev::Read(_)))
                    .map(|p| p + head_start)
                    .unwrap_or(ev.len());
                let last_read = ev.len() - 1;
                raw.push((ev, first_read, last_read));
            }
        }
    }

    // variances in the linear model
    let mut qubits = Vec::with_capacity(raw.len());
    let mut read_var = vec![0.0; read_slots.len()];
    for (events, first_read_event, last_read_event) in raw {
        let mut noises = Vec::new();
        let mut acc = 0.0;
        for e in &events {
            match e {
                Ev::Noise(sd) => acc += sd * sd,
                Ev::Kick(_) => acc += g,
                Ev::Correct(_) => {
                    noises.push(acc);
                    acc = 0.0;
                }
                Ev::Read(_) => {}
            }
        }
        let wrap = acc;
        noises[0] += wrap;
        let (coefficients, v_after_last) = if g > 0.0 {
            let set = solve_periodic(g_sd, &noises, digits)?;
            let v0 = periodic_initial_variance(g_sd, &noises)?;
            (set.realtime, v0)
        } else {
            (vec![1.0; noises.len()], 0.0)
        };
        let mut var = v_after_last + wrap;
        let start_sigma = var.sqrt();
        let mut syndrome_sigma = Vec::with_capacity(coefficients.len());
        for e in &events {
            match e {
                Ev::Noise(sd) => var += sd * sd,
                Ev::Kick(_) => var += g,
                Ev::Correct(k) => {
                    let c = coefficients[*k];
                    syndrome_sigma.push((var + g).sqrt());
                    var = (1.0 - c) * (1.0 - c) * var + c * c * g;
                }
                Ev::Read(id) => read_var[*id] += var,
            }
        }
        qubits.push(QubitProgram {
            events,
            coefficients,
            syndrome_sigma,
            start_sigma,
            first_read_event,
            last_read_event,
        });
    }
    let read_sigma = read_var.iter().map(|v| (v + g).sqrt()).collect();
    let n_stabs = read_slots.iter().map(|s| s.0 + 1).max().unwrap_or(0);
    let mut rounds = vec![0u8; n_stabs];
    for (s, r) in &read_slots {
        rounds[*s] = rounds[*s].max(r + 1);
    }
    Ok(QuadPlan {
        quad,
        qubits,
        read_slots,
        read_sigma,
        kick_slots: kick_ids.len(),
        rounds,
    })
}

/// Reusable per-trial buffers.
struct Scratch {
    shifts: Vec<f64>,
    kicks: Vec<f64>,
    read_sum: Vec<f64>,
    prod: Vec<f64>,
    hist: Vec<QubitHistory>,
}

fn run_quadrature(plan: &QuadPlan, cfg: &ChainConfig, code: Option<&OuterCode>, stream: &mut RandomStream) -> bool {
    let g_sd = cfg.squeezing.sigma_gkp;
    let n = plan.qubits.len();
    let mut s = Scratch {
        shifts: plan.qubits.iter().map(|q| q.start_sigma * sample(stream, q.start_sigma)).collect(),
        kicks: vec![0.0; plan.kick_slots],
        read_sum: vec![0.0; plan.read_slots.len()],
        prod: vec![1.0; n],
        hist: vec![QubitHistory::default(); n],
    };
    let err = error_type(plan.quad);
    let analog = cfg.analog;

    for _ in 0..cfg.links {
        for k in s.kicks.iter_mut() {
            *k = g_sd * sample(stream, g_sd);
        }
        s.read_sum.iter_mut().for_each(|v| *v = 0.0);
        s.prod.iter_mut().for_each(|v| *v = 1.0);
        for (j, qp) in plan.qubits.iter().enumerate() {
            let h = &mut s.hist[j];
            h.reads.clear();
            h.corrections.clear();
            let mut x = s.shifts[j];
            for (pos, e) in qp.events.iter().enumerate() {
                match *e {
                    Ev::Noise(sd) => x += sd * sample(stream, sd),
                    Ev::Kick(id) => x -= s.kicks[id],
                    Ev::Correct(k) => {
                        let xi = g_sd * sample(stream, g_sd);
                        let syn = correct_value(&mut x, qp.coefficients[k], xi);
                        if analog && code.is_some() {
                            let p = likelihood_or_zero(qp.syndrome_sigma[k], syn);
                            s.prod[j] *= 1.0 - 2.0 * p;
                            if pos > qp.first_read_event && pos < qp.last_read_event {
                                h.corrections.push((pos, p));
                            }
                        }
                    }
                    Ev::Read(id) => {
                        s.read_sum[id] += x;
                        let (stab, round) = plan.read_slots[id];
                        h.reads.push((stab, round, pos));
                    }
                }
            }
            s.shifts[j] = x;
        }

        let Some(code) = code else { continue };
        let stabs = code.detecting(err);
        let mut records: Vec<StabilizerRecord> = stabs
            .iter()
            .zip(&plan.rounds)
            .map(|(sup, r)| StabilizerRecord {
                support: sup.clone(),
                rounds: Vec::with_capacity(*r as usize),
            })
            .collect();
        for r in 0..2u8 {
            for (id, (stab, round)) in plan.read_slots.iter().enumerate() {
                if *round != r {
                    continue;
                }
                let xi = g_sd * sample(stream, g_sd);
                let q0 = centered_mod_unchecked(s.read_sum[id] + xi, 2.0 * SQRT_PI);
                let (bit, lik) = infer_stabilizer(q0, plan.read_sigma[id]);
                records[*stab].rounds.push(Reading {
                    bit,
                    likelihood: if analog { lik } else { 0.0 },
                });
            }
        }
        let syndrome = decode_step1(&records, &s.hist, analog).syndrome;
        let p_odd: Vec<f64> = s.prod.iter().map(|p| 0.5 * (1.0 - p)).collect();
        let m = decode_step2(code, err, &syndrome, &p_odd, analog);
        for (j, x) in s.shifts.iter_mut().enumerate() {
            if m >> j & 1 == 1 {
                *x += SQRT_PI;
            }
        }
    }

    // virtual perfect corrections on both levels
    let flips = s
        .shifts
        .iter()
        .enumerate()
        .fold(0u32, |m, (j, x)| m | (perfect_flip(*x) as u32) << j);
    match code {
        None => flips & 1 == 1,
        Some(code) => {
            let syn = code.syndrome_of(err, flips);
            let residual = flips ^ min_weight_correction(code, err, &syn);
            code.is_logical_flip(err, residual)
        }
    }
}

#[inline]
fn sample(stream: &mut RandomStream, sd: f64) -> f64 {
    if sd == 0.0 {
        0.0
    } else {
        stream.normal()
    }
}

/// One trial: both quadratures through `config.links` elementary links.
pub fn run_chain(plan: &ChainPlan, stream: &mut RandomStream) -> TrialResult {
    let flip_x = run_quadrature(&plan.q, &plan.config, plan.code.as_ref(), stream);
    let flip_z = run_quadrature(&plan.p, &plan.config, plan.code.as_ref(), stream);
    TrialResult { flip_x, flip_z }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::chain_c_opt;

    fn cfg(eta0: f64, sigma: f64, scheme: Scheme, nm: u32, na: u32) -> ChainConfig {
        ChainConfig::new(
            FiberParams::new(eta0).unwrap(),
            Squeezing::from_sigma_or_perfect(sigma).unwrap(),
            scheme,
            nm,
            na,
        )
        .unwrap()
    }

    #[test]
    fn gkp_only_uses_translation_invariant_coefficient() {
        let c = cfg(0.98, 0.09, Scheme::GkpOnly, 40, 40);
        let plan = ChainPlan::new(c, 60).unwrap();
        let want = chain_c_opt(c.squeezing.variance(), c.sigma_trans_sq());
        assert!((plan.q.qubits[0].coefficients[0] - want).abs() < 1e-9);
        assert!((plan.p.qubits[0].coefficients[0] - want).abs() < 1e-9);
    }

    #[test]
    fn noiseless_chain_never_flips() {
        for scheme in [Scheme::GkpOnly, Scheme::C4, Scheme::Steane7] {
            let c = ChainConfig::new(FiberParams::lossless(), Squeezing::perfect(), scheme, 2, 8).unwrap();
            assert!(c.noiseless());
            let plan = ChainPlan::new(c, 60).unwrap();
            let mut s = RandomStream::new(5, 0);
            for _ in 0..3 {
                let r = run_chain(&plan, &mut s);
                assert!(!r.flip_x && !r.flip_z);
            }
        }
    }

    #[test]
    fn divisibility_enforced() {
        let f = FiberParams::new(0.98).unwrap();
        let s = Squeezing::from_sigma(0.1).unwrap();
        assert!(ChainConfig::new(f, s, Scheme::C4, 3, 40).is_err());
        assert!(ChainConfig::new(f, s, Scheme::C4, 2, 41).is_err());
        assert!(ChainConfig::new(f, s, Scheme::C4, 40, 40).is_ok());
    }
}
