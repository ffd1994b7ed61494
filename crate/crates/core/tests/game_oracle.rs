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

//! Game payoffs against an independent Kronecker-product oracle.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use qbos::game::{
    advantage_percent, analytical_payoffs, classical_mixed_equilibrium, expected_payoffs,
    ideal_outcome_distribution, uniform_gamma_grid, FormulaVariant, GameSpec, PayoffMatrix,
    StrategyKind,
};

type C = Complex64;
type M2 = [[C; 2]; 2];

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn ry(t: f64) -> M2 {
    let (s, co) = (t / 2.0).sin_cos();
    [[c(co), c(-s)], [c(s), c(co)]]
}

fn hadamard() -> M2 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[c(r), c(r)], [c(r), c(-r)]]
}

fn strategy_matrix(k: StrategyKind) -> M2 {
    match k {
        StrategyKind::I => [[c(1.0), c(0.0)], [c(0.0), c(1.0)]],
        StrategyKind::H => hadamard(),
        StrategyKind::Ry(t) => ry(t),
    }
}

/// `kron(b, a)` acting on index `q0 + 2 q1`, with `a` on q0.
fn kron(b: &M2, a: &M2) -> [[C; 4]; 4] {
    let mut m = [[c(0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = b[i >> 1][j >> 1] * a[i & 1][j & 1];
        }
    }
    m
}

/// Outcome probabilities of the entangled game, phi = 0.
fn oracle_probs(gamma: f64, sa: StrategyKind, sb: StrategyKind) -> [f64; 4] {
    // cos(g/2)|00> + sin(g/2)|11>
    let (s, co) = (gamma / 2.0).sin_cos();
    let psi = [c(co), c(0.0), c(0.0), c(s)];
    let u = kron(&strategy_matrix(sb), &strategy_matrix(sa));
    let mut out = [0.0; 4];
    for i in 0..4 {
        let amp: C = (0..4).map(|j| u[i][j] * psi[j]).sum();
        out[i] = amp.norm_sqr();
    }
    out
}

fn oracle_payoffs(gamma: f64, s: StrategyKind) -> (f64, f64) {
    let p = oracle_probs(gamma, s, s);
    (3.0 * p[0] + 2.0 * p[3], 2.0 * p[0] + 3.0 * p[3])
}

fn grid() -> Vec<f64> {
    uniform_gamma_grid(31).unwrap()
}

#[test]
fn closed_forms_match_oracle_for_i_ry_quarter_ry_pi() {
    for s in [StrategyKind::I, StrategyKind::ry(FRAC_PI_4).unwrap(), StrategyKind::ry(PI).unwrap()] {
        for g in grid() {
            let (a, b) = analytical_payoffs(s, g, FormulaVariant::Published).unwrap();
            let (oa, ob) = oracle_payoffs(g, s);
            assert!((a - oa).abs() <= 1e-9 && (b - ob).abs() <= 1e-9, "{s} at {g}");
            let spec = GameSpec::symmetric(s);
            let (sa, sb) = expected_payoffs(&ideal_outcome_distribution(&spec, g).unwrap(), &spec.payoff);
            assert!((sa - oa).abs() <= 1e-9 && (sb - ob).abs() <= 1e-9, "{s} at {g}");
        }
    }
}

#[test]
fn hadamard_corrected_matches_oracle_and_published_form_does_not() {
    for g in grid() {
        let (a, b) = analytical_payoffs(StrategyKind::H, g, FormulaVariant::Corrected).unwrap();
        let (oa, ob) = oracle_payoffs(g, StrategyKind::H);
        let expect = 1.25 * ((g / 2.0).cos() + (g / 2.0).sin()).powi(2);
        assert!((a - oa).abs() <= 1e-9 && (b - ob).abs() <= 1e-9);
        assert!((oa - expect).abs() <= 1e-9 && (ob - expect).abs() <= 1e-9);
    }
    let (a_pub, b_pub) = analytical_payoffs(StrategyKind::H, PI, FormulaVariant::Published).unwrap();
    assert!(a_pub > 3.0, "{a_pub}");
    assert!((a_pub - 5.0).abs() < 1e-12);
    assert!((b_pub - 1.25).abs() < 1e-12);
}

#[test]
fn every_strategy_pays_two_and_a_half_at_quarter_turn() {
    for s in StrategyKind::standard_set() {
        let (oa, ob) = oracle_payoffs(FRAC_PI_2, s);
        assert!((oa - 2.5).abs() <= 1e-9 && (ob - 2.5).abs() <= 1e-9, "{s}");
        let (a, b) = analytical_payoffs(s, FRAC_PI_2, FormulaVariant::Corrected).unwrap();
        assert!((a - 2.5).abs() <= 1e-9 && (b - 2.5).abs() <= 1e-9, "{s}");
    }
}

#[test]
fn published_table_values() {
    // Table 1 and the classical mixed analysis.
    let eq = classical_mixed_equilibrium(&PayoffMatrix::default()).unwrap();
    assert!((eq.p_alice - 0.6).abs() <= 1e-12);
    assert!((eq.q_bob - 0.4).abs() <= 1e-12);
    assert!((eq.e_a - 1.2).abs() <= 1e-12 && (eq.e_b - 1.2).abs() <= 1e-12);
    assert!((eq.coordination_prob - 0.48).abs() <= 1e-12);
    assert!((advantage_percent(2.5, 1.2).unwrap() - 108.33).abs() <= 0.01);

    // Printed RY(pi/4) constants 0.853 and 0.146 are three-decimal truncations.
    assert!((FRAC_PI_8.cos().powi(2) - 0.853).abs() < 1e-3);
    assert!((FRAC_PI_8.sin().powi(2) - 0.146).abs() < 1e-3);
    let (a, _) = analytical_payoffs(StrategyKind::ry(FRAC_PI_4).unwrap(), 0.0, FormulaVariant::Published).unwrap();
    assert!((a - 2.229).abs() < 5e-4, "{a}");
}

#[test]
fn identity_coordination_mixes_evenly() {
    let eq = classical_mixed_equilibrium(&PayoffMatrix::identity_coordination()).unwrap();
    assert!((eq.p_alice - 0.5).abs() < 1e-12 && (eq.q_bob - 0.5).abs() < 1e-12);
}

#[test]
fn asymmetric_strategies_match_oracle() {
    let set = StrategyKind::standard_set();
    for &sa in &set {
        for &sb in &set {
            for g in [0.0, 0.4, 1.3, FRAC_PI_2, 2.9, PI] {
                let spec = GameSpec {
                    strategy_a: sa,
                    strategy_b: sb,
                    ..GameSpec::symmetric(sa)
                };
                let p = ideal_outcome_distribution(&spec, g).unwrap();
                let o = oracle_probs(g, sa, sb);
                for i in 0..4 {
                    assert!((p[i] - o[i]).abs() < 1e-12, "{sa}/{sb} at {g}");
                }
            }
        }
    }
}

fn distribution() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0f64..1.0)
        .prop_filter("non-degenerate", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.map(|x| x / s)
        })
}

proptest! {
    #[test]
    fn role_swap_exchanges_payoffs(p in distribution()) {
        let m = PayoffMatrix::default();
        let (a, b) = expected_payoffs(&p, &m);
        let (sa, sb) = expected_payoffs(&p, &m.swap_roles());
        prop_assert_eq!((a, b), (sb, sa));
    }

    #[test]
    fn miscoordination_contributes_nothing(p in distribution(), x in 0.0f64..1.0) {
        let m = PayoffMatrix::default();
        let shifted = [p[0] * (1.0 - x), p[1] + x * p[0], p[2], p[3]];
        let (a, b) = expected_payoffs(&p, &m);
        let (a2, b2) = expected_payoffs(&shifted, &m);
        prop_assert!((a2 - (a - 3.0 * x * p[0])).abs() < 1e-12);
        prop_assert!((b2 - (b - 2.0 * x * p[0])).abs() < 1e-12);
        let only_miss = [0.0, p[1] / (p[1] + p[2] + 1e-300), p[2] / (p[1] + p[2] + 1e-300), 0.0];
        let (am, bm) = expected_payoffs(&only_miss, &m);
        prop_assert_eq!((am, bm), (0.0, 0.0));
    }

    #[test]
    fn ry_pi_mirrors_identity(g in 0.0..=PI) {
        let (ia, ib) = analytical_payoffs(StrategyKind::I, g, FormulaVariant::Published).unwrap();
        let (ra, rb) = analytical_payoffs(StrategyKind::ry(PI).unwrap(), g, FormulaVariant::Published).unwrap();
        prop_assert!((ra - ib).abs() < 1e-12 && (rb - ia).abs() < 1e-12);
    }

    #[test]
    fn simulated_payoffs_stay_on_scale(g in 0.0..=PI, t in 0.0..TAU) {
        let s = StrategyKind::ry(t).unwrap();
        let (a, b) = oracle_payoffs(g, s);
        let spec = GameSpec::symmetric(s);
        let (sa, sb) = expected_payoffs(&ideal_outcome_distribution(&spec, g).unwrap(), &spec.payoff);
        prop_assert!((sa - a).abs() < 1e-10 && (sb - b).abs() < 1e-10);
        prop_assert!((0.0..=3.0 + 1e-12).contains(&sa) && (0.0..=3.0 + 1e-12).contains(&sb));
    }
}
