// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Dense statevector simulation for few-qubit registers.
//!
//! Basis states are indexed with qubit 0 as the least-significant bit, so
//! amplitude `i` belongs to the state whose bit `q` is `(i >> q) & 1`. Outcome
//! labels are written most-significant qubit first: on two qubits index 1 is
//! `"01"` (qubit 0 set) and index 2 is `"10"` (qubit 1 set).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::seeding::rng_for;
use crate::{Error, Result};

pub type ComplexAmp = Complex64;

pub const MAX_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-12;

/// Two-outcome labels in index order.
pub const OUTCOME_LABELS: [&str; 4] = ["00", "01", "10", "11"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Identity,
    Hadamard,
    Ry,
    Rz,
}

/// A single-qubit unitary. Construction checks unitarity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate1Q {
    m: [[Complex64; 2]; 2],
}

impl Gate1Q {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if m.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parameter("gate matrix has non-finite entries".into()));
        }
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| m[i][k] * m[j][k].conj()).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot - expected).norm() > UNITARY_TOL {
                    return Err(Error::Parameter(format!(
                        "gate matrix is not unitary: (U U^dagger)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        Ok(Gate1Q { m })
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Gate1Q { m: [[o, z], [z, o]] }
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Gate1Q { m: [[h, h], [h, -h]] }
    }

    /// `[[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]`
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Gate1Q {
            m: [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
        }
    }

    /// `diag(e^{-i phi/2}, e^{i phi/2})`
    pub fn rz(phi: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Gate1Q {
            m: [
                [Complex64::from_polar(1.0, -phi / 2.0), z],
                [z, Complex64::from_polar(1.0, phi / 2.0)],
            ],
        }
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }
}

/// Builds a gate from the standard library. `angle` must be given exactly for
/// the rotation kinds.
pub fn gate_library(kind: GateKind, angle: Option<f64>) -> Result<Gate1Q> {
    match (kind, angle) {
        (GateKind::Identity, None) => Ok(Gate1Q::identity()),
        (GateKind::Hadamard, None) => Ok(Gate1Q::hadamard()),
        (GateKind::Ry, Some(t)) if t.is_finite() => Ok(Gate1Q::ry(t)),
        (GateKind::Rz, Some(t)) if t.is_finite() => Ok(Gate1Q::rz(t)),
        (GateKind::Ry | GateKind::Rz, Some(t)) => {
            Err(Error::Parameter(format!("rotation angle must be finite, got {t}")))
        }
        (GateKind::Ry | GateKind::Rz, None) => {
            Err(Error::Parameter(format!("{kind:?} gate requires an angle")))
        }
        (GateKind::Identity | GateKind::Hadamard, Some(_)) => {
            Err(Error::Parameter(format!("{kind:?} gate takes no angle")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_register_size(num_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(num_qubits)?;
        if index >= s.amps.len() {
            return Err(Error::Parameter(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Validation(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_register_size(num_qubits)?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn apply_1q(&self, gate: &Gate1Q, qubit: usize) -> Result<Self> {
        let mut out = self.clone();
        out.apply_1q_in_place(gate, qubit)?;
        Ok(out)
    }

    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<Self> {
        let mut out = self.clone();
        out.apply_cnot_in_place(control, target)?;
        Ok(out)
    }

    pub(crate) fn apply_1q_in_place(&mut self, gate: &Gate1Q, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let m = gate.matrix();
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub(crate) fn apply_cnot_in_place(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Parameter(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let (c, t) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
        Ok(())
    }

    /// Born-rule probabilities in basis order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::Index {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }
}

fn check_register_size(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Parameter(format!(
            "register size {num_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// One step of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Gate {
        name: String,
        gate: Gate1Q,
        qubit: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Measure {
        qubit: usize,
    },
}

impl Instruction {
    pub fn gate(name: impl Into<String>, gate: Gate1Q, qubit: usize) -> Self {
        Instruction::Gate {
            name: name.into(),
            gate,
            qubit,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Instruction::Measure { .. })
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Gate { name, qubit, .. } => write!(f, "{name} q{qubit}"),
            Instruction::Cnot { control, target } => write!(f, "cx q{control},q{target}"),
            Instruction::Measure { qubit } => write!(f, "measure q{qubit}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        check_register_size(num_qubits)?;
        Ok(Circuit {
            num_qubits,
            instructions: Vec::new(),
        })
    }

    pub fn push(&mut self, instruction: Instruction) -> Result<()> {
        let in_range = |q: usize| {
            if q < self.num_qubits {
                Ok(())
            } else {
                Err(Error::Index {
                    index: q,
                    num_qubits: self.num_qubits,
                })
            }
        };
        match &instruction {
            Instruction::Gate { qubit, .. } | Instruction::Measure { qubit } => in_range(*qubit)?,
            Instruction::Cnot { control, target } => {
                in_range(*control)?;
                in_range(*target)?;
                if control == target {
                    return Err(Error::Parameter(format!(
                        "CNOT control and target are both qubit {control}"
                    )));
                }
            }
        }
        self.instructions.push(instruction);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Unitary instructions only.
    pub fn gate_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_unitary()).count()
    }

    /// Runs the unitary part on `|0...0>`; measurement markers are skipped.
    pub fn run_ideal(&self) -> Result<StateVector> {
        let mut state = StateVector::zero(self.num_qubits)?;
        for ins in &self.instructions {
            match ins {
                Instruction::Gate { gate, qubit, .. } => state.apply_1q_in_place(gate, *qubit)?,
                Instruction::Cnot { control, target } => {
                    state.apply_cnot_in_place(*control, *target)?
                }
                Instruction::Measure { .. } => {}
            }
        }
        Ok(state)
    }
}

/// Measurement histogram over the four two-qubit outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShotCounts {
    counts: [u64; 4],
}

impl ShotCounts {
    pub fn from_counts(counts: [u64; 4]) -> Self {
        ShotCounts { counts }
    }

    pub fn from_labels<'a>(entries: impl IntoIterator<Item = (&'a str, u64)>) -> Result<Self> {
        let mut counts = [0u64; 4];
        for (label, n) in entries {
            let idx = label_index(label)?;
            counts[idx] += n;
        }
        Ok(ShotCounts { counts })
    }

    pub fn counts(&self) -> [u64; 4] {
        self.counts
    }

    pub fn get(&self, label: &str) -> Result<u64> {
        Ok(self.counts[label_index(label)?])
    }

    pub fn total_shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Relative frequencies; `None` when no shots were recorded.
    pub fn frequencies(&self) -> Option<[f64; 4]> {
        let total = self.total_shots();
        if total == 0 {
            return None;
        }
        let t = total as f64;
        Some(self.counts.map(|c| c as f64 / t))
    }
}

fn label_index(label: &str) -> Result<usize> {
    OUTCOME_LABELS
        .iter()
        .position(|&l| l == label)
        .ok_or_else(|| Error::Parameter(format!("unknown outcome label {label:?}")))
}

impl Serialize for ShotCounts {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, u64> = OUTCOME_LABELS
            .iter()
            .zip(self.counts)
            .filter(|(_, c)| *c > 0)
            .map(|(l, c)| (*l, c))
            .collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ShotCounts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, u64>::deserialize(deserializer)?;
        ShotCounts::from_labels(map.iter().map(|(k, v)| (k.as_str(), *v)))
            .map_err(serde::de::Error::custom)
    }
}

/// Checks that `probs` is a four-outcome distribution summing to one.
pub fn validate_distribution(probs: &[f64]) -> Result<()> {
    if probs.len() != 4 {
        return Err(Error::Validation(format!(
            "expected 4 outcome probabilities, got {}",
            probs.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -NORM_TOL) {
        return Err(Error::Validation(format!("invalid probability {p}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::Validation(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

/// Draws `shots` outcomes from a four-outcome distribution with a generator
/// seeded from `seed`.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Result<ShotCounts> {
    sample_counts_with(probs, shots, &mut rng_for(seed, &[]))
}

pub fn sample_counts_with<R: Rng + ?Sized>(
    probs: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts> {
    validate_distribution(probs)?;
    if shots == 0 {
        return Err(Error::Parameter("shots must be at least 1".into()));
    }
    let mut cdf = [0.0; 4];
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(probs) {
        acc += p.max(0.0);
        *c = acc;
    }
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        // u < acc == cdf[3], and zero-probability outcomes have empty intervals.
        let idx = cdf.iter().position(|&c| u < c).unwrap_or(3);
        counts[idx] += 1;
    }
    Ok(ShotCounts { counts })
}
