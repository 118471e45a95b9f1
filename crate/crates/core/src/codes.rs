//! The two small CSS outer codes: [[4,1,2]] ("c4") and the [[7,1,3]] Steane
//! code ("steane7"). Qubits are 0-based here; docs elsewhere count from 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum CodeName {
    C4,
    Steane7,
}

impl CodeName {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "c4" => Ok(CodeName::C4),
            "steane7" => Ok(CodeName::Steane7),
            other => Err(Error::Config(format!("unknown code '{other}'"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CodeName::C4 => "c4",
            CodeName::Steane7 => "steane7",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CodeName::C4 => 4,
            CodeName::Steane7 => 7,
        }
    }
}

/// Error type detected by a stabilizer family: Z-stabilizers see X errors
/// (q-quadrature shifts), X-stabilizers see Z errors (p-quadrature shifts).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterCode {
    pub name: CodeName,
    pub n: usize,
    pub z_stabilizers: Vec<Vec<usize>>,
    pub x_stabilizers: Vec<Vec<usize>>,
    pub logical_x: Vec<usize>,
    pub logical_z: Vec<usize>,
}

pub fn build_code(name: CodeName) -> OuterCode {
    match name {
        CodeName::C4 => OuterCode {
            name,
            n: 4,
            z_stabilizers: vec![vec![0, 1], vec![2, 3]],
            x_stabilizers: vec![vec![0, 1, 2, 3]],
            logical_x: vec![0, 1],
            logical_z: vec![0, 2],
        },
        CodeName::Steane7 => {
            let stabs = vec![vec![3, 4, 5, 6], vec![1, 2, 5, 6], vec![0, 2, 4, 6]];
            OuterCode {
                name,
                n: 7,
                z_stabilizers: stabs.clone(),
                x_stabilizers: stabs,
                logical_x: (0..7).collect(),
                logical_z: (0..7).collect(),
            }
        }
    }
}

pub fn build_code_by_name(name: &str) -> Result<OuterCode> {
    Ok(build_code(CodeName::parse(name)?))
}

pub(crate) fn mask(support: &[usize]) -> u32 {
    support.iter().fold(0u32, |m, q| m | (1 << q))
}

pub(crate) fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

impl OuterCode {
    /// Stabilizers whose syndrome reveals errors of type `err` (X or Z).
    pub fn detecting(&self, err: Pauli) -> &[Vec<usize>] {
        match err {
            Pauli::X => &self.z_stabilizers,
            Pauli::Z => &self.x_stabilizers,
            Pauli::Y => panic!("Y errors are handled per quadrature"),
        }
    }

    /// Support on which the parity of `err`-type errors flips the logical value.
    pub fn logical_parity_support(&self, err: Pauli) -> &[usize] {
        match err {
            Pauli::X => &self.logical_z,
            Pauli::Z => &self.logical_x,
            Pauli::Y => panic!("Y errors are handled per quadrature"),
        }
    }

    pub fn syndrome_of(&self, err: Pauli, pattern: u32) -> Vec<u8> {
        self.detecting(err)
            .iter()
            .map(|s| parity(pattern & mask(s)))
            .collect()
    }

    pub fn is_logical_flip(&self, err: Pauli, pattern: u32) -> bool {
        parity(pattern & mask(self.logical_parity_support(err))) == 1
    }

    /// Do all X- and Z-stabilizers commute (even overlaps)?
    pub fn commutes(&self) -> bool {
        self.x_stabilizers.iter().all(|x| {
            self.z_stabilizers
                .iter()
                .all(|z| parity(mask(x) & mask(z)) == 0)
        }) && parity(mask(&self.logical_x) & mask(&self.logical_z)) == 1
    }
}

/// Candidate error supports consistent with a nonzero syndrome of the
/// stabilizers detecting `err`. Single-qubit candidates first, then pairs in
/// lexicographic order.
pub fn candidate_errors(code: &OuterCode, err: Pauli, syndrome: &[u8]) -> Result<Vec<Vec<usize>>> {
    let stabs = code.detecting(err);
    if syndrome.len() != stabs.len() {
        return Err(Error::Domain(format!(
            "syndrome has {} bits, code has {} stabilizers",
            syndrome.len(),
            stabs.len()
        )));
    }
    if syndrome.iter().all(|b| *b == 0) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for q in 0..code.n {
        if code.syndrome_of(err, 1 << q) == syndrome {
            out.push(vec![q]);
        }
    }
    for a in 0..code.n {
        for b in a + 1..code.n {
            if code.syndrome_of(err, (1 << a) | (1 << b)) == syndrome {
                out.push(vec![a, b]);
            }
        }
    }
    // the distance-2 code never guesses a pair when a single qubit explains the syndrome
    if code.name == CodeName::C4 && out.iter().any(|c| c.len() == 1) {
        out.retain(|c| c.len() == 1);
    }
    Ok(out)
}

/// Minimum-weight representative of the syndrome's coset, lexicographic tie-break.
/// Used for the final, analog-free correction.
pub fn min_weight_correction(code: &OuterCode, err: Pauli, syndrome: &[u8]) -> u32 {
    let n = code.n as u32;
    let mut best: Option<(u32, u32)> = None;
    for pattern in 0u32..(1 << n) {
        if code.syndrome_of(err, pattern) != syndrome {
            continue;
        }
        let w = pattern.count_ones();
        let key = lex_key(pattern, n);
        match best {
            Some((bw, bk)) if (bw, bk) <= (w, key) => {}
            _ => best = Some((w, key)),
        }
    }
    let (_, key) = best.expect("every syndrome has a representative");
    from_lex_key(key, n)
}

// Lexicographic order on sorted supports ⇔ reverse-bit order on masks.
fn lex_key(pattern: u32, n: u32) -> u32 {
    pattern.reverse_bits() >> (32 - n) ^ ((1 << n) - 1)
}

fn from_lex_key(key: u32, n: u32) -> u32 {
    (key ^ ((1 << n) - 1)).reverse_bits() >> (32 - n)
}

/// How a logical qubit of the code is read out in a given basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    /// (qubit, single-qubit Pauli basis) pairs; outcome is their XOR.
    pub measurements: Vec<(usize, Pauli)>,
}

pub fn logical_measurement_plan(code: &OuterCode, basis: Pauli) -> MeasurementPlan {
    let measurements = match (code.name, basis) {
        (CodeName::C4, Pauli::Z) => code.logical_z.iter().map(|q| (*q, Pauli::Z)).collect(),
        (CodeName::C4, Pauli::X) => code.logical_x.iter().map(|q| (*q, Pauli::X)).collect(),
        (CodeName::C4, Pauli::Y) => vec![(0, Pauli::Y), (1, Pauli::X), (2, Pauli::Z)],
        (CodeName::Steane7, b) => (0..7).map(|q| (q, b)).collect(),
    };
    MeasurementPlan { measurements }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_codes_commute() {
        assert!(build_code(CodeName::C4).commutes());
        assert!(build_code(CodeName::Steane7).commutes());
    }

    #[test]
    fn steane_candidates_for_first_syndrome() {
        let code = build_code(CodeName::Steane7);
        let c = candidate_errors(&code, Pauli::Z, &[1, 0, 0]).unwrap();
        assert_eq!(c, vec![vec![3], vec![0, 4], vec![1, 5], vec![2, 6]]);
        assert!(candidate_errors(&code, Pauli::Z, &[0, 0, 0]).unwrap().is_empty());
        assert!(candidate_errors(&code, Pauli::Z, &[1, 0]).is_err());
    }

    #[test]
    fn c4_candidates() {
        let code = build_code(CodeName::C4);
        assert_eq!(
            candidate_errors(&code, Pauli::X, &[1, 0]).unwrap(),
            vec![vec![0], vec![1]]
        );
        assert_eq!(
            candidate_errors(&code, Pauli::Z, &[1]).unwrap(),
            vec![vec![0], vec![1], vec![2], vec![3]]
        );
        assert_eq!(
            candidate_errors(&code, Pauli::X, &[1, 1]).unwrap(),
            vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]
        );
    }

    #[test]
    fn lex_key_roundtrip_and_order() {
        for p in 0..128u32 {
            assert_eq!(from_lex_key(lex_key(p, 7), 7), p);
        }
        // {0,4} precedes {1,5}
        assert!(lex_key(0b10001, 7) < lex_key(0b100010, 7));
    }

    #[test]
    fn min_weight_prefers_first_qubit_for_c4() {
        let code = build_code(CodeName::C4);
        assert_eq!(min_weight_correction(&code, Pauli::X, &[1, 0]), 0b0001);
        assert_eq!(min_weight_correction(&code, Pauli::X, &[1, 1]), 0b0101);
        assert_eq!(min_weight_correction(&code, Pauli::Z, &[1]), 0b0001);
    }

    #[test]
    fn plans() {
        let c4 = build_code(CodeName::C4);
        let p = logical_measurement_plan(&c4, Pauli::Z);
        assert_eq!(p.measurements, vec![(0, Pauli::Z), (2, Pauli::Z)]);
        assert_eq!(logical_measurement_plan(&c4, Pauli::Y).measurements.len(), 3);
        let s = build_code(CodeName::Steane7);
        assert_eq!(logical_measurement_plan(&s, Pauli::Y).measurements.len(), 7);
    }
}
