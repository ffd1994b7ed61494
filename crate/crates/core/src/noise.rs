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

//! Noisy execution of mapped two-qubit game circuits.
//!
//! Each circuit is evolved as a 4x4 density matrix. After every single-qubit
//! gate a single-qubit depolarizing channel acts on the gate's qubit, after
//! the CNOT a two-qubit depolarizing channel acts on both (plus an extra one
//! when a neighbouring pair runs within crosstalk range), and the final
//! probabilities pass through per-qubit readout confusion matrices.
//!
//! Channel strengths come from the calibration of the physical pair, times a
//! global scale, clamped to `[0, 1]`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{CalibrationSnapshot, CouplingGraph};
use crate::game::{build_ewl_circuit, GameSpec};
use crate::gcm::{crosstalk_exposure, MappingPlan};
use crate::seeding::rng_for;
use crate::statevec::{sample_counts_with, Circuit, Gate1Q, Instruction, ShotCounts};
use crate::{Error, Result};

/// Pairs closer than this many hops to another active pair pick up crosstalk.
pub const CROSSTALK_DISTANCE: usize = 2;

type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Global multiplier on every error probability.
    pub scale: f64,
    /// Single-qubit depolarizing probability as a fraction of the pair's
    /// two-qubit error.
    pub one_qubit_fraction: f64,
    /// Extra two-qubit depolarizing probability for crowded pairs.
    pub crosstalk_penalty: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            scale: 1.0,
            one_qubit_fraction: 0.1,
            crosstalk_penalty: 0.05,
        }
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel {
            scale: 0.0,
            ..Self::default()
        }
    }

    pub fn with_scale(scale: f64) -> Self {
        NoiseModel {
            scale,
            ..Self::default()
        }
    }

    /// Concrete channel strengths for one physical pair.
    pub fn channels(&self, pair: &PairCalibration, crosstalk_active: bool) -> Result<ChannelParams> {
        for (name, v) in [
            ("scale", self.scale),
            ("one_qubit_fraction", self.one_qubit_fraction),
            ("crosstalk_penalty", self.crosstalk_penalty),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Validation(format!("noise {name} = {v} must be >= 0")));
            }
        }
        let scaled = |p: f64, what: &str| -> Result<f64> {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("{what} = {p} is not a probability")));
            }
            Ok((self.scale * p).clamp(0.0, 1.0))
        };
        let e2q = pair.two_qubit_error;
        let p2q = scaled(e2q, "two_qubit_error")?;
        let p1q = scaled((self.one_qubit_fraction * e2q).min(1.0), "one-qubit error")?;
        let crosstalk = if crosstalk_active {
            scaled(self.crosstalk_penalty.min(1.0), "crosstalk_penalty")?
        } else {
            0.0
        };
        let r0 = scaled(pair.readout_error[0], "readout_error")?;
        let r1 = scaled(pair.readout_error[1], "readout_error")?;
        Ok(ChannelParams {
            p1q,
            p2q,
            crosstalk,
            readout: [ReadoutConfusion::symmetric(r0)?, ReadoutConfusion::symmetric(r1)?],
        })
    }
}

/// Calibration figures of the physical pair hosting one circuit, in circuit
/// qubit order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCalibration {
    pub two_qubit_error: f64,
    pub readout_error: [f64; 2],
}

impl PairCalibration {
    pub fn from_snapshot(calib: &CalibrationSnapshot, pair: [usize; 2]) -> Result<Self> {
        Ok(PairCalibration {
            two_qubit_error: calib.edge(pair[0], pair[1])?.two_qubit_error,
            readout_error: [
                calib.qubit(pair[0])?.readout_error,
                calib.qubit(pair[1])?.readout_error,
            ],
        })
    }
}

/// Column-stochastic 2x2 measurement confusion for one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutConfusion {
    /// P(read 1 | prepared 0)
    pub p1_given_0: f64,
    /// P(read 0 | prepared 1)
    pub p0_given_1: f64,
}

impl ReadoutConfusion {
    pub const PERFECT: ReadoutConfusion = ReadoutConfusion {
        p1_given_0: 0.0,
        p0_given_1: 0.0,
    };

    pub fn new(p1_given_0: f64, p0_given_1: f64) -> Result<Self> {
        for p in [p1_given_0, p0_given_1] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("readout flip probability {p}")));
            }
        }
        Ok(ReadoutConfusion {
            p1_given_0,
            p0_given_1,
        })
    }

    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    /// `m[read][prepared]`
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [
            [1.0 - self.p1_given_0, self.p0_given_1],
            [self.p1_given_0, 1.0 - self.p0_given_1],
        ]
    }
}

/// Applies per-qubit confusion to a two-qubit outcome distribution.
pub fn apply_readout(probs: &[f64; 4], readout: &[ReadoutConfusion; 2]) -> [f64; 4] {
    let (m0, m1) = (readout[0].matrix(), readout[1].matrix());
    let mut out = [0.0; 4];
    for (read, o) in out.iter_mut().enumerate() {
        *o = (0..4)
            .map(|t| m0[read & 1][t & 1] * m1[read >> 1][t >> 1] * probs[t])
            .sum();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub p1q: f64,
    pub p2q: f64,
    pub crosstalk: f64,
    pub readout: [ReadoutConfusion; 2],
}

impl ChannelParams {
    pub fn noiseless() -> Self {
        ChannelParams {
            p1q: 0.0,
            p2q: 0.0,
            crosstalk: 0.0,
            readout: [ReadoutConfusion::PERFECT; 2],
        }
    }
}

/// Two-qubit density matrix, basis index `q0 + 2*q1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: Mat4,
}

impl DensityMatrix {
    pub fn zero_state() -> Self {
        let mut rho = [[ZERO; 4]; 4];
        rho[0][0] = Complex64::new(1.0, 0.0);
        DensityMatrix { rho }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.rho[i][i]).sum()
    }

    pub fn probabilities(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.rho[i][i].re)
    }

    fn conjugate_by(&mut self, u: &Mat4) {
        let mut tmp = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                tmp[i][j] = (0..4).map(|k| u[i][k] * self.rho[k][j]).sum();
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                self.rho[i][j] = (0..4).map(|k| tmp[i][k] * u[j][k].conj()).sum();
            }
        }
    }

    pub fn apply_1q(&mut self, gate: &Gate1Q, qubit: usize) {
        let g = gate.matrix();
        let mut u = [[ZERO; 4]; 4];
        for (i, row) in u.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let (bi, bj) = ((i >> qubit) & 1, (j >> qubit) & 1);
                let other = 1 - qubit;
                if (i >> other) & 1 == (j >> other) & 1 {
                    *x = g[bi][bj];
                }
            }
        }
        self.conjugate_by(&u);
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let mut u = [[ZERO; 4]; 4];
        for j in 0..4 {
            let i = if (j >> control) & 1 == 1 { j ^ (1 << target) } else { j };
            u[i][j] = Complex64::new(1.0, 0.0);
        }
        self.conjugate_by(&u);
    }

    /// `rho -> (1-p) rho + p (I/2 on qubit) x Tr_qubit(rho)`
    pub fn depolarize_1q(&mut self, qubit: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let bit = 1usize << qubit;
        let mut mixed = [[ZERO; 4]; 4];
        for (i, row) in mixed.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                if (i & bit) == (j & bit) {
                    let (i0, j0) = (i & !bit, j & !bit);
                    *x = 0.5 * (self.rho[i0][j0] + self.rho[i0 | bit][j0 | bit]);
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                self.rho[i][j] = (1.0 - p) * self.rho[i][j] + p * mixed[i][j];
            }
        }
    }

    /// `rho -> (1-p) rho + p I/4`
    pub fn depolarize_2q(&mut self, p: f64) {
        if p == 0.0 {
            return;
        }
        let tr = self.trace();
        for i in 0..4 {
            for j in 0..4 {
                let id = if i == j { 0.25 * tr } else { ZERO };
                self.rho[i][j] = (1.0 - p) * self.rho[i][j] + p * id;
            }
        }
    }
}

/// Evolves `circuit` under the given channels, calling `inspect` after every
/// gate and every channel application. Returns the state before readout.
pub fn evolve_density(
    circuit: &Circuit,
    channels: &ChannelParams,
    mut inspect: impl FnMut(&DensityMatrix),
) -> Result<DensityMatrix> {
    if circuit.num_qubits() != 2 {
        return Err(Error::Validation(format!(
            "noisy evolution needs a 2-qubit circuit, got {}",
            circuit.num_qubits()
        )));
    }
    let mut rho = DensityMatrix::zero_state();
    for ins in circuit.instructions() {
        match ins {
            Instruction::Gate { gate, qubit, .. } => {
                rho.apply_1q(gate, *qubit);
                inspect(&rho);
                rho.depolarize_1q(*qubit, channels.p1q);
                inspect(&rho);
            }
            Instruction::Cnot { control, target } => {
                rho.apply_cnot(*control, *target);
                inspect(&rho);
                rho.depolarize_2q(channels.p2q);
                inspect(&rho);
                rho.depolarize_2q(channels.crosstalk);
                inspect(&rho);
            }
            Instruction::Measure { .. } => {}
        }
    }
    Ok(rho)
}

/// Final outcome distribution of a resolved channel set.
pub fn noisy_distribution_with(circuit: &Circuit, channels: &ChannelParams) -> Result<[f64; 4]> {
    let rho = evolve_density(circuit, channels, |_| {})?;
    let p = rho.probabilities().map(|x| x.max(0.0));
    let s: f64 = p.iter().sum();
    Ok(apply_readout(&p.map(|x| x / s), &channels.readout))
}

pub fn noisy_distribution(
    circuit: &Circuit,
    pair_calib: &PairCalibration,
    model: &NoiseModel,
    crosstalk_active: bool,
) -> Result<[f64; 4]> {
    noisy_distribution_with(circuit, &model.channels(pair_calib, crosstalk_active)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub circuit_index: usize,
    pub gamma: f64,
    pub run_index: usize,
    pub counts: ShotCounts,
}

/// Per-circuit outcome distributions for a mapped job, circuit `i` running at
/// `spec.gamma_grid[i]`.
pub fn job_distributions(
    plan: &MappingPlan,
    spec: &GameSpec,
    graph: &CouplingGraph,
    calib: &CalibrationSnapshot,
    model: &NoiseModel,
) -> Result<Vec<[f64; 4]>> {
    spec.validate()?;
    let n = spec.gamma_grid.len();
    if plan.len() != n {
        return Err(Error::Validation(format!(
            "plan maps {} circuits but the gamma grid has {n} points",
            plan.len()
        )));
    }
    let exposure = crosstalk_exposure(plan, graph, CROSSTALK_DISTANCE);
    (0..n)
        .map(|i| {
            let pos = plan
                .assignments
                .iter()
                .position(|a| a.circuit == i)
                .ok_or_else(|| Error::Validation(format!("plan has no pair for circuit {i}")))?;
            let pair = PairCalibration::from_snapshot(calib, plan.assignments[pos].pair)?;
            let circuit = build_ewl_circuit(
                spec.gamma_grid[i],
                spec.phi,
                spec.strategy_a,
                spec.strategy_b,
            )?;
            noisy_distribution(&circuit, &pair, model, exposure[pos])
        })
        .collect()
}

/// Samples `runs` repetitions of every mapped circuit.
///
/// Item `(circuit, run)` draws from a generator seeded by
/// `(seed, circuit, run)`, so the output is independent of scheduling.
/// Results are ordered by circuit, then run.
#[allow(clippy::too_many_arguments)]
pub fn simulate_job(
    plan: &MappingPlan,
    spec: &GameSpec,
    graph: &CouplingGraph,
    calib: &CalibrationSnapshot,
    model: &NoiseModel,
    shots: u64,
    runs: usize,
    seed: u64,
) -> Result<Vec<RunResult>> {
    if shots == 0 || runs == 0 {
        return Err(Error::Parameter("shots and runs must be at least 1".into()));
    }
    let dists = job_distributions(plan, spec, graph, calib, model)?;
    (0..dists.len() * runs)
        .into_par_iter()
        .map(|item| {
            let (circuit, run) = (item / runs, item % runs);
            let mut rng = rng_for(seed, &[circuit as u64, run as u64]);
            Ok(RunResult {
                circuit_index: circuit,
                gamma: spec.gamma_grid[circuit],
                run_index: run,
                counts: sample_counts_with(&dists[circuit], shots, &mut rng)?,
            })
        })
        .collect()
}
