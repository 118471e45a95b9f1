//! Operation schedules of type-A and type-B stations and the storage costs
//! derived from their time layout.
//!
//! Per data mode the schedule is generated from five rules:
//! 1. after a multi-qubit measurement that the qubit will see again in the same
//!    quadrature, correct the opposite and then the same quadrature;
//! 2. weight-four stabilizers are measured in two rounds;
//! 3. after the last measurement of a quadrature, correct the opposite one;
//! 4. the incoming channel correction is doubled (q p q p) when weight-four
//!    measurements follow immediately;
//! 5. when switching to a quadrature with weight-four stabilizers the
//!    correction is repeated (q p q instead of q).
//!
//! Time layout: mode `j` of a block arrives `2j` steps after mode 0, because
//! every upstream station hands over one mode per two steps, and a new block
//! enters as soon as the old one leaves, so the layout repeats with a period
//! equal to the per-mode storage time. Stabilizer measurement rounds are kept
//! in lockstep across modes; modes not involved in a round idle.

use serde::{Deserialize, Serialize};

use crate::codes::{build_code, CodeName, OuterCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quad {
    Q,
    P,
}

impl Quad {
    pub fn other(self) -> Quad {
        match self {
            Quad::Q => Quad::P,
            Quad::P => Quad::Q,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Quad::Q => 0,
            Quad::P => 1,
        }
    }
}

/// Which stabilizer family a multi-qubit measurement belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabKind {
    /// X-type, read out through p and detecting p-shift (Z) errors.
    X,
    /// Z-type, read out through q and detecting q-shift (X) errors.
    Z,
}

impl StabKind {
    pub fn quad(self) -> Quad {
        match self {
            StabKind::X => Quad::P,
            StabKind::Z => Quad::Q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Gkp(Quad),
    Measure { kind: StabKind, stab: usize, round: u8 },
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StationType {
    /// Single-mode GKP station.
    B,
    /// Multi-qubit station running the outer code.
    A(CodeName),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageCosts {
    pub data_modes: usize,
    pub steps_per_mode: usize,
    /// Storage requirement of each multi-qubit-measurement ancilla mode.
    pub stabilizer_ancillas: Vec<usize>,
    /// GKP ancilla modes, each stored for a single step.
    pub gkp_ancillas: usize,
}

impl StorageCosts {
    pub fn total(&self) -> usize {
        self.data_modes * self.steps_per_mode
            + self.stabilizer_ancillas.iter().sum::<usize>()
            + self.gkp_ancillas
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSchedule {
    pub station: StationType,
    /// Operations per data mode, one per time step (idles included).
    pub ops: Vec<Vec<Op>>,
    /// Arrival offset of each data mode in time steps.
    pub offsets: Vec<usize>,
    pub costs: StorageCosts,
}

impl LinkSchedule {
    pub fn steps_per_mode(&self) -> usize {
        self.costs.steps_per_mode
    }

    pub fn total_cost(&self) -> usize {
        self.costs.total()
    }
}

/// Spacing in time steps between the arrivals of consecutive data modes.
pub const ARRIVAL_SPACING: usize = 2;

pub fn build_schedule(station: StationType) -> LinkSchedule {
    let ops = match station {
        StationType::B => vec![vec![Op::Gkp(Quad::Q), Op::Gkp(Quad::P)]],
        StationType::A(name) => type_a_ops(&build_code(name)),
    };
    let offsets: Vec<usize> = (0..ops.len()).map(|j| ARRIVAL_SPACING * j).collect();
    let costs = derive_costs(&ops, &offsets);
    LinkSchedule {
        station,
        ops,
        offsets,
        costs,
    }
}

/// Measurement phases in order: p-quadrature (X stabilizers) first, because
/// after the doubled channel correction p carries the smaller residual.
fn type_a_ops(code: &OuterCode) -> Vec<Vec<Op>> {
    let phases = [
        (StabKind::X, &code.x_stabilizers),
        (StabKind::Z, &code.z_stabilizers),
    ];
    let heavy = |stabs: &Vec<Vec<usize>>| stabs.iter().any(|s| s.len() >= 4);
    let rounds = |stabs: &Vec<Vec<usize>>| if heavy(stabs) { 2u8 } else { 1u8 };

    // lockstep slots per phase: (stab, round) in measurement order
    let slots: Vec<Vec<(usize, u8)>> = phases
        .iter()
        .map(|(_, stabs)| {
            (0..rounds(stabs))
                .flat_map(|r| (0..stabs.len()).map(move |s| (s, r)))
                .collect()
        })
        .collect();

    (0..code.n)
        .map(|q| {
            let mut ops = Vec::new();
            // rule 4
            if heavy(phases[0].1) {
                ops.extend([Op::Gkp(Quad::Q), Op::Gkp(Quad::P), Op::Gkp(Quad::Q), Op::Gkp(Quad::P)]);
            } else {
                ops.extend([Op::Gkp(Quad::Q), Op::Gkp(Quad::P)]);
            }
            for (pi, (kind, stabs)) in phases.iter().enumerate() {
                let quad = kind.quad();
                let order = &slots[pi];
                let involved: Vec<bool> = order.iter().map(|(s, _)| stabs[*s].contains(&q)).collect();
                let single_slot = order.len() == stabs.len() && stabs.len() > 1 && !heavy(stabs);
                if single_slot {
                    // weight-two stabilizers on disjoint supports share one slot
                    let (s, r) = order.iter().zip(&involved).find(|(_, i)| **i).map(|(o, _)| *o).expect("every qubit is covered");
                    ops.push(Op::Measure { kind: *kind, stab: s, round: r });
                } else {
                    for (k, (s, r)) in order.iter().enumerate() {
                        ops.push(if involved[k] {
                            Op::Measure { kind: *kind, stab: *s, round: *r }
                        } else {
                            Op::Idle
                        });
                        if k + 1 < order.len() {
                            // rule 1: GG right before the next participation
                            let next_mine = involved[k + 1];
                            let seen_before = involved[..=k].iter().any(|x| *x);
                            if next_mine && seen_before {
                                ops.extend([Op::Gkp(quad.other()), Op::Gkp(quad)]);
                            } else {
                                ops.extend([Op::Idle, Op::Idle]);
                            }
                        }
                    }
                }
                // rule 3
                ops.push(Op::Gkp(quad.other()));
                // rule 5
                if pi + 1 < phases.len() && heavy(phases[pi + 1].1) {
                    ops.extend([Op::Gkp(quad), Op::Gkp(quad.other())]);
                }
            }
            ops
        })
        .collect()
}

/// Storage demand of a time layout.
///
/// * data: every mode is held for the full length of its operation list;
/// * multi-qubit ancillas: a measurement occupies its ancilla from the first
///   to the last interaction; measurements are assigned first-fit in start
///   order and each ancilla is charged its longest occupation;
/// * GKP ancillas: re-preparation takes one step, so the count is the largest
///   number of corrections in two neighbouring steps of the periodic layout.
pub fn derive_costs(ops: &[Vec<Op>], offsets: &[usize]) -> StorageCosts {
    let steps = ops.iter().map(|o| o.len()).max().unwrap_or(0);
    let period = steps.max(1);

    let mut per_step = vec![0usize; period];
    let mut spans: std::collections::BTreeMap<(u8, usize, u8), (usize, usize)> = Default::default();
    for (j, list) in ops.iter().enumerate() {
        for (s, op) in list.iter().enumerate() {
            let t = offsets[j] + s;
            match op {
                Op::Gkp(_) => per_step[t % period] += 1,
                Op::Measure { kind, stab, round } => {
                    let key = (matches!(kind, StabKind::Z) as u8, *stab, *round);
                    let e = spans.entry(key).or_insert((t, t));
                    e.0 = e.0.min(t);
                    e.1 = e.1.max(t);
                }
                Op::Idle => {}
            }
        }
    }
    let gkp_ancillas = if ops.len() == 1 && steps <= 2 {
        // a lone mode alternates between two ancillas
        per_step.iter().sum::<usize>().min(2)
    } else {
        (0..period)
            .map(|t| per_step[t] + per_step[(t + 1) % period])
            .max()
            .unwrap_or(0)
    };

    let mut intervals: Vec<(usize, usize)> = spans.values().copied().collect();
    intervals.sort();
    // (busy until, longest occupation)
    let mut ancillas: Vec<(usize, usize)> = Vec::new();
    for (a, b) in intervals {
        let len = b - a + 1;
        match ancillas.iter_mut().find(|(end, _)| *end < a) {
            Some(slot) => {
                slot.0 = b;
                slot.1 = slot.1.max(len);
            }
            None => ancillas.push((b, len)),
        }
    }

    StorageCosts {
        data_modes: ops.len(),
        steps_per_mode: steps,
        stabilizer_ancillas: ancillas.into_iter().map(|(_, l)| l).collect(),
        gkp_ancillas,
    }
}
