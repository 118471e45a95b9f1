//! Two-step decoding of the outer code with GKP analog information.
//!
//! Step 1 reconciles the two measurement rounds of weight-four stabilizers,
//! allowing for at most one logical GKP error between the rounds. Step 2
//! picks the most likely error pattern consistent with the syndrome from the
//! per-qubit flip likelihoods of the whole segment.

use serde::{Deserialize, Serialize};

use crate::codes::{candidate_errors, mask, min_weight_correction, CodeName, OuterCode, Pauli};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    /// 0 ↔ +1, 1 ↔ −1.
    pub bit: u8,
    /// Likelihood that this discrete value is wrong.
    pub likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerRecord {
    pub support: Vec<usize>,
    /// One reading for weight-two stabilizers, two for weight four.
    pub rounds: Vec<Reading>,
}

/// Time-ordered record of one data qubit inside the station.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QubitHistory {
    /// (stabilizer, round, position)
    pub reads: Vec<(usize, u8, usize)>,
    /// (position, flip likelihood) of GKP corrections in the decoded quadrature.
    pub corrections: Vec<(usize, f64)>,
}

impl QubitHistory {
    fn read_pos(&self, stab: usize, round: u8) -> Option<usize> {
        self.reads
            .iter()
            .find(|(s, r, _)| *s == stab && *r == round)
            .map(|(_, _, p)| *p)
    }
}

/// Located intermediate error: qubit and position of the faulty correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntermediateError {
    pub qubit: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step1Outcome {
    pub syndrome: Vec<u8>,
    pub intermediate: Option<IntermediateError>,
}

fn measurement_hypothesis(r: &[Reading], analog: bool) -> u8 {
    // keep the round less likely to be wrong; without analog data trust the later one
    if !analog || r[0].likelihood >= r[1].likelihood {
        r[1].bit
    } else {
        r[0].bit
    }
}

pub fn decode_step1(stabs: &[StabilizerRecord], qubits: &[QubitHistory], analog: bool) -> Step1Outcome {
    let disagree: Vec<bool> = stabs
        .iter()
        .map(|s| s.rounds.len() == 2 && s.rounds[0].bit != s.rounds[1].bit)
        .collect();

    // qubit, likelihood of the intermediate-error hypothesis
    let mut suspect: Option<(usize, f64)> = None;
    if analog {
        for (si, s) in stabs.iter().enumerate() {
            if !disagree[si] {
                continue;
            }
            let lm = s.rounds[0].likelihood.max(s.rounds[1].likelihood);
            let mut none_all = 1.0;
            let mut best: Option<(usize, f64)> = None;
            for &j in &s.support {
                let (Some(a), Some(b)) = (qubits[j].read_pos(si, 0), qubits[j].read_pos(si, 1)) else {
                    continue;
                };
                let none_j: f64 = qubits[j]
                    .corrections
                    .iter()
                    .filter(|(p, _)| *p > a && *p < b)
                    .map(|(_, l)| 1.0 - l)
                    .product();
                none_all *= none_j;
                let lj = 1.0 - none_j;
                if best.map_or(true, |(_, bl)| lj > bl) {
                    best = Some((j, lj));
                }
            }
            let lg = 1.0 - none_all;
            if lg > lm {
                if let Some((j, lj)) = best {
                    if suspect.map_or(true, |(_, sl)| lj > sl) {
                        suspect = Some((j, lj));
                    }
                }
            }
        }
    }

    let intermediate = suspect.and_then(|(j, _)| locate(stabs, &qubits[j], j, &disagree));

    let syndrome = stabs
        .iter()
        .enumerate()
        .map(|(si, s)| {
            if s.rounds.len() == 1 {
                return s.rounds[0].bit;
            }
            let base = if disagree[si] {
                measurement_hypothesis(&s.rounds, analog)
            } else {
                s.rounds[0].bit
            };
            match intermediate {
                Some(e) if s.support.contains(&e.qubit) => {
                    let h = &qubits[e.qubit];
                    let (a, b) = (h.read_pos(si, 0).unwrap_or(0), h.read_pos(si, 1).unwrap_or(0));
                    if a < e.position && e.position < b {
                        s.rounds[1].bit
                    } else if b < e.position {
                        base ^ 1
                    } else {
                        base
                    }
                }
                _ => base,
            }
        })
        .collect();

    Step1Outcome { syndrome, intermediate }
}

/// Position of the error on qubit `j` best matching the observed pattern of
/// disagreeing rounds; ties go to the more likely correction, then the earlier.
fn locate(stabs: &[StabilizerRecord], h: &QubitHistory, j: usize, disagree: &[bool]) -> Option<IntermediateError> {
    let lo = h.reads.iter().map(|r| r.2).min()?;
    let hi = h.reads.iter().map(|r| r.2).max()?;
    let mut best: Option<(usize, f64, usize)> = None;
    for &(pos, lik) in h.corrections.iter().filter(|(p, _)| *p > lo && *p < hi) {
        let mut score = 0;
        for (si, s) in stabs.iter().enumerate() {
            if s.rounds.len() != 2 || !s.support.contains(&j) {
                continue;
            }
            if let (Some(a), Some(b)) = (h.read_pos(si, 0), h.read_pos(si, 1)) {
                let straddles = a < pos && pos < b;
                if straddles == disagree[si] {
                    score += 1;
                }
            }
        }
        let better = match best {
            None => true,
            Some((bs, bl, _)) => score > bs || (score == bs && lik > bl),
        };
        if better {
            best = Some((score, lik, pos));
        }
    }
    best.map(|(_, _, position)| IntermediateError { qubit: j, position })
}

/// Correction mask (bit j ↔ qubit j) for the reconciled syndrome.
///
/// `p_odd[j]` is the probability of an odd number of logical GKP errors on
/// qubit j over the segment. Without analog information the minimum-weight
/// representative is used.
pub fn decode_step2(code: &OuterCode, err: Pauli, syndrome: &[u8], p_odd: &[f64], analog: bool) -> u32 {
    if syndrome.iter().all(|b| *b == 0) {
        return 0;
    }
    if !analog {
        return min_weight_correction(code, err, syndrome);
    }
    match code.name {
        CodeName::C4 => {
            // one suspect qubit per flagged stabilizer: the least likely to be error-free
            let mut m = 0u32;
            for (s, bit) in code.detecting(err).iter().zip(syndrome) {
                if *bit == 1 {
                    let mut best = s[0];
                    for &j in &s[1..] {
                        if p_odd[j] > p_odd[best] {
                            best = j;
                        }
                    }
                    m |= 1 << best;
                }
            }
            m
        }
        CodeName::Steane7 => {
            let cands = candidate_errors(code, err, syndrome).expect("syndrome length matches code");
            let mut best: Option<(f64, u32)> = None;
            for c in cands {
                let cm = mask(&c);
                let score: f64 = (0..code.n)
                    .map(|j| {
                        if cm >> j & 1 == 1 {
                            p_odd[j]
                        } else {
                            1.0 - p_odd[j]
                        }
                    })
                    .product();
                if best.map_or(true, |(bs, _)| score > bs) {
                    best = Some((score, cm));
                }
            }
            best.map(|(_, m)| m).unwrap_or(0)
        }
    }
}
