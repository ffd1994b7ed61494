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

//! The Battle of the Sexes, classically and under the entangled quantization.
//!
//! Alice plays qubit 0 and Bob plays qubit 1. Action 0 ("Opera") is the
//! computational basis state `|0>`, action 1 ("Television") is `|1>`, so the
//! outcome index is `alice + 2 * bob`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::statevec::{Circuit, Gate1Q, Instruction};
use crate::{Error, Result};

/// Angle match tolerance when recognizing named strategies.
const ANGLE_TOL: f64 = 1e-12;

/// Entangler phase that turns the real-amplitude state
/// `cos(g/2)|00> + sin(g/2)|11>` into `cos(g/2)|00> + i sin(g/2)|11>`
/// (up to a global phase).
pub const IMAGINARY_ENTANGLER_PHI: f64 = FRAC_PI_2;

pub const DEFAULT_GAMMA_STEPS: usize = 31;

/// Bimatrix payoffs indexed `[alice_action][bob_action]`, each cell
/// `(alice_payoff, bob_payoff)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub cells: [[(f64, f64); 2]; 2],
}

impl Default for PayoffMatrix {
    fn default() -> Self {
        Self::battle_of_the_sexes()
    }
}

impl PayoffMatrix {
    pub fn new(cells: [[(f64, f64); 2]; 2]) -> Result<Self> {
        for (i, row) in cells.iter().enumerate() {
            for (j, (a, b)) in row.iter().enumerate() {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::Validation(format!(
                        "payoff cell [{i}][{j}] is not finite"
                    )));
                }
            }
        }
        Ok(PayoffMatrix { cells })
    }

    /// Opera/Opera pays (3, 2), Television/Television pays (2, 3), and
    /// miscoordination pays nothing.
    pub fn battle_of_the_sexes() -> Self {
        PayoffMatrix {
            cells: [[(3.0, 2.0), (0.0, 0.0)], [(0.0, 0.0), (2.0, 3.0)]],
        }
    }

    /// Pure coordination with equal stakes: (1,1) on the diagonal.
    pub fn identity_coordination() -> Self {
        PayoffMatrix {
            cells: [[(1.0, 1.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)]],
        }
    }

    /// Payoff pair for a two-qubit outcome index.
    pub fn outcome(&self, index: usize) -> (f64, f64) {
        self.cells[index & 1][index >> 1]
    }

    /// Per-outcome weight vectors `(alice, bob)` in outcome index order.
    pub fn outcome_weights(&self) -> ([f64; 4], [f64; 4]) {
        let mut wa = [0.0; 4];
        let mut wb = [0.0; 4];
        for i in 0..4 {
            (wa[i], wb[i]) = self.outcome(i);
        }
        (wa, wb)
    }

    /// Exchanges the players' payoffs in every cell.
    pub fn swap_roles(&self) -> Self {
        PayoffMatrix {
            cells: self.cells.map(|row| row.map(|(a, b)| (b, a))),
        }
    }
}

/// A local strategy applied by one player.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrategyKind {
    I,
    H,
    /// Rotation about y by an angle in `[0, 2*pi)`.
    Ry(f64),
}

impl StrategyKind {
    pub fn ry(theta: f64) -> Result<Self> {
        if !(0.0..2.0 * PI).contains(&theta) {
            return Err(Error::Parameter(format!(
                "RY angle {theta} outside [0, 2*pi)"
            )));
        }
        Ok(StrategyKind::Ry(theta))
    }

    /// I, H, RY(pi/4) and RY(pi).
    pub fn standard_set() -> [StrategyKind; 4] {
        [
            StrategyKind::I,
            StrategyKind::H,
            StrategyKind::Ry(FRAC_PI_4),
            StrategyKind::Ry(PI),
        ]
    }

    pub fn gate(&self) -> Gate1Q {
        match self {
            StrategyKind::I => Gate1Q::identity(),
            StrategyKind::H => Gate1Q::hadamard(),
            StrategyKind::Ry(t) => Gate1Q::ry(*t),
        }
    }

    fn is_ry(&self, angle: f64) -> bool {
        matches!(self, StrategyKind::Ry(t) if (t - angle).abs() <= ANGLE_TOL)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::I => f.write_str("I"),
            StrategyKind::H => f.write_str("H"),
            s if s.is_ry(FRAC_PI_4) => f.write_str("RY(pi/4)"),
            s if s.is_ry(FRAC_PI_2) => f.write_str("RY(pi/2)"),
            s if s.is_ry(PI) => f.write_str("RY(pi)"),
            StrategyKind::Ry(t) => write!(f, "RY({t})"),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let upper = t.to_ascii_uppercase();
        match upper.as_str() {
            "I" => return Ok(StrategyKind::I),
            "H" => return Ok(StrategyKind::H),
            _ => {}
        }
        let inner = upper
            .strip_prefix("RY(")
            .or_else(|| upper.strip_prefix("R("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Parameter(format!("unknown strategy {t:?}")))?;
        StrategyKind::ry(parse_angle(inner)?)
    }
}

impl Serialize for StrategyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StrategyKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `pi`, `pi/N`, `K*pi/N` or a plain number of radians.
fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase().replace(' ', "");
    let bad = || Error::Parameter(format!("cannot parse angle {text:?}"));
    if let Some(pos) = t.find("pi") {
        let (mul, rest) = t.split_at(pos);
        let rest = &rest[2..];
        let mul: f64 = match mul.trim_end_matches('*') {
            "" => 1.0,
            m => m.parse().map_err(|_| bad())?,
        };
        let div: f64 = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?,
        };
        Ok(mul * PI / div)
    } else {
        t.parse().map_err(|_| bad())
    }
}

/// `steps` evenly spaced entanglement values from 0 to pi inclusive.
pub fn uniform_gamma_grid(steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Parameter(format!(
            "gamma grid needs at least 2 points, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { PI } else { PI * i as f64 / last })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub payoff: PayoffMatrix,
    pub gamma_grid: Vec<f64>,
    pub strategy_a: StrategyKind,
    pub strategy_b: StrategyKind,
    pub phi: f64,
}

impl GameSpec {
    /// Both players use `strategy`; default payoffs, 31-point grid, phi = 0.
    pub fn symmetric(strategy: StrategyKind) -> Self {
        GameSpec {
            payoff: PayoffMatrix::default(),
            gamma_grid: uniform_gamma_grid(DEFAULT_GAMMA_STEPS).expect("default grid"),
            strategy_a: strategy,
            strategy_b: strategy,
            phi: 0.0,
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        self.gamma_grid = grid;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_grid.is_empty() {
            return Err(Error::Validation("empty gamma grid".into()));
        }
        for (i, g) in self.gamma_grid.iter().enumerate() {
            if !(0.0..=PI).contains(g) {
                return Err(Error::Validation(format!("gamma[{i}] = {g} outside [0, pi]")));
            }
        }
        if let Some(w) = self.gamma_grid.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "gamma grid not strictly increasing at index {}",
                w + 1
            )));
        }
        if !self.phi.is_finite() {
            return Err(Error::Validation("phi is not finite".into()));
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.strategy_a == self.strategy_b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedEquilibrium {
    /// Probability that Alice plays action 0.
    pub p_alice: f64,
    /// Probability that Bob plays action 0.
    pub q_bob: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub coordination_prob: f64,
}

/// Interior mixed equilibrium from the two indifference conditions.
///
/// Alice's mix `p` makes Bob indifferent between his actions and Bob's mix `q`
/// makes Alice indifferent.
pub fn classical_mixed_equilibrium(payoff: &PayoffMatrix) -> Result<MixedEquilibrium> {
    let a = |i: usize, j: usize| payoff.cells[i][j].0;
    let b = |i: usize, j: usize| payoff.cells[i][j].1;

    // p*B00 + (1-p)*B10 = p*B01 + (1-p)*B11
    let p = solve_indifference(
        b(0, 0) - b(1, 0) - b(0, 1) + b(1, 1),
        b(1, 1) - b(1, 0),
        "Bob's indifference p*B(0,0) + (1-p)*B(1,0) = p*B(0,1) + (1-p)*B(1,1)",
    )?;
    // q*A00 + (1-q)*A01 = q*A10 + (1-q)*A11
    let q = solve_indifference(
        a(0, 0) - a(0, 1) - a(1, 0) + a(1, 1),
        a(1, 1) - a(0, 1),
        "Alice's indifference q*A(0,0) + (1-q)*A(0,1) = q*A(1,0) + (1-q)*A(1,1)",
    )?;

    let weights = [[p * q, p * (1.0 - q)], [(1.0 - p) * q, (1.0 - p) * (1.0 - q)]];
    let mut e_a = 0.0;
    let mut e_b = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            e_a += weights[i][j] * a(i, j);
            e_b += weights[i][j] * b(i, j);
        }
    }
    Ok(MixedEquilibrium {
        p_alice: p,
        q_bob: q,
        e_a,
        e_b,
        coordination_prob: weights[0][0] + weights[1][1],
    })
}

fn solve_indifference(coef: f64, rhs: f64, equation: &str) -> Result<f64> {
    if coef.abs() < 1e-15 {
        return Err(Error::Domain(format!("{equation} has no unique solution")));
    }
    let x = rhs / coef;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!(
            "{equation} gives {x}, not an interior probability"
        )));
    }
    Ok(x)
}

/// Ry(gamma), Rz(phi) on qubit 0, CNOT 0 -> 1, then the two local strategies
/// and measurement of both qubits.
pub fn build_ewl_circuit(
    gamma: f64,
    phi: f64,
    sa: StrategyKind,
    sb: StrategyKind,
) -> Result<Circuit> {
    if !(0.0..=PI).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, pi]")));
    }
    let mut c = Circuit::new(2)?;
    c.push(Instruction::gate(format!("ry({gamma})"), Gate1Q::ry(gamma), 0))?;
    c.push(Instruction::gate(format!("rz({phi})"), Gate1Q::rz(phi), 0))?;
    c.push(Instruction::Cnot { control: 0, target: 1 })?;
    c.push(Instruction::gate(sa.to_string(), sa.gate(), 0))?;
    c.push(Instruction::gate(sb.to_string(), sb.gate(), 1))?;
    c.push(Instruction::Measure { qubit: 0 })?;
    c.push(Instruction::Measure { qubit: 1 })?;
    Ok(c)
}

/// Ideal `(p00, p01, p10, p11)` of the game circuit at `gamma`.
pub fn ideal_outcome_distribution(spec: &GameSpec, gamma: f64) -> Result<[f64; 4]> {
    let circuit = build_ewl_circuit(gamma, spec.phi, spec.strategy_a, spec.strategy_b)?;
    let p = circuit.run_ideal()?.probabilities();
    Ok([p[0], p[1], p[2], p[3]])
}

/// `sum_i probs[i] * payoff(i)` for both players.
pub fn expected_payoffs(probs: &[f64; 4], payoff: &PayoffMatrix) -> (f64, f64) {
    probs
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(ea, eb), (i, p)| {
            let (a, b) = payoff.outcome(i);
            (ea + p * a, eb + p * b)
        })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaVariant {
    /// The published closed forms, including the H-strategy expression for
    /// Alice with a factor 2 on the sine term.
    Published,
    /// Same, except Alice's H payoff equals Bob's: (5/4)(cos + sin)^2.
    #[default]
    Corrected,
}

impl FromStr for FormulaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "published" => Ok(FormulaVariant::Published),
            "corrected" => Ok(FormulaVariant::Corrected),
            other => Err(Error::Parameter(format!(
                "unknown formula variant {other:?} (expected published or corrected)"
            ))),
        }
    }
}

impl fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaVariant::Published => "published",
            FormulaVariant::Corrected => "corrected",
        })
    }
}

/// Closed-form `(e_a, e_b)` under the default payoff matrix when both players
/// use `strategy`.
pub fn analytical_payoffs(
    strategy: StrategyKind,
    gamma: f64,
    variant: FormulaVariant,
) -> Result<(f64, f64)> {
    let (s, c) = (gamma / 2.0).sin_cos();
    match strategy {
        StrategyKind::I => Ok((3.0 * c * c + 2.0 * s * s, 2.0 * c * c + 3.0 * s * s)),
        StrategyKind::H => {
            let e_b = 1.25 * (c + s).powi(2);
            let e_a = match variant {
                FormulaVariant::Published => 1.25 * (c + 2.0 * s).powi(2),
                FormulaVariant::Corrected => e_b,
            };
            Ok((e_a, e_b))
        }
        k if k.is_ry(FRAC_PI_4) => {
            // cos^2(pi/8) and sin^2(pi/8)
            let hi = (PI / 8.0).cos().powi(2);
            let lo = (PI / 8.0).sin().powi(2);
            let p00 = (hi * c + lo * s).powi(2);
            let p11 = (hi * s + lo * c).powi(2);
            Ok((3.0 * p00 + 2.0 * p11, 2.0 * p00 + 3.0 * p11))
        }
        k if k.is_ry(PI) => Ok((2.0 * c * c + 3.0 * s * s, 3.0 * c * c + 2.0 * s * s)),
        other => Err(Error::Domain(format!(
            "no closed form for strategy {other}"
        ))),
    }
}

/// Relative gain of a quantum payoff over a classical baseline, in percent.
pub fn advantage_percent(e_quantum: f64, e_classical: f64) -> Result<f64> {
    if !(e_classical > 0.0) {
        return Err(Error::Domain(format!(
            "classical baseline must be positive, got {e_classical}"
        )));
    }
    Ok(100.0 * (e_quantum - e_classical) / e_classical)
}
