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

//! Statistical machinery: interval coverage, error propagation, RMSE
//! identities and Student-t quantiles against numerical integration.

use std::f64::consts::PI;

use proptest::prelude::*;
use qbos::game::PayoffMatrix;
use qbos::seeding::rng_for;
use qbos::statevec::{sample_counts_with, ShotCounts};
use qbos::stats::{
    aggregate_runs, payoffs_from_counts, propagate_count_error, rmse, t_critical,
};
use rand_distr::{Distribution, Normal};

/// Allowed deviation of empirical coverage from the nominal 95%.
const COVERAGE_TOL: f64 = 0.01;
/// Allowed relative gap between delta-method and resampled variances.
const DELTA_METHOD_TOL: f64 = 0.05;

/// Gamma at positive multiples of 1/2.
fn gamma_half(twice: u32) -> f64 {
    let mut x = if twice.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if twice.is_multiple_of(2) { 2 } else { 1 };
    while k < twice {
        x *= k as f64 / 2.0;
        k += 2;
    }
    x
}

fn t_pdf(t: f64, dof: u32) -> f64 {
    let nu = dof as f64;
    gamma_half(dof + 1) / ((nu * PI).sqrt() * gamma_half(dof)) * (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0)
}

/// `P(0 <= T <= t)` by composite Simpson.
fn t_half_mass(t: f64, dof: u32) -> f64 {
    let n = 4_000;
    let h = t / n as f64;
    let mut s = t_pdf(0.0, dof) + t_pdf(t, dof);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * t_pdf(i as f64 * h, dof);
    }
    s * h / 3.0
}

fn t_quantile_oracle(confidence: f64, dof: u32) -> f64 {
    let (mut lo, mut hi) = (0.0, 1000.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * t_half_mass(mid, dof) < confidence {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn t_quantiles_match_quadrature() {
    for dof in [1u32, 2, 3, 4, 5, 7, 10, 30] {
        for conf in [0.9, 0.95, 0.99] {
            let want = t_quantile_oracle(conf, dof);
            let got = t_critical(conf, dof as usize).unwrap();
            assert!((got - want).abs() / want < 1e-6, "dof {dof} conf {conf}: {got} vs {want}");
        }
    }
    assert!((t_critical(0.95, 4).unwrap() - 2.776).abs() < 5e-4);
    assert!((t_critical(0.95, 2).unwrap() - 4.303).abs() < 5e-4);
}

#[test]
fn student_t_interval_coverage_at_five_runs() {
    let mut rng = rng_for(17, &[]);
    let normal = Normal::new(1.7, 0.3).unwrap();
    let trials = 10_000;
    let mut covered = 0;
    for _ in 0..trials {
        let xs: Vec<f64> = (0..5).map(|_| normal.sample(&mut rng)).collect();
        let e = aggregate_runs(&xs, 0.95).unwrap();
        if (e.mean - 1.7).abs() <= e.ci_half_width {
            covered += 1;
        }
    }
    let rate = covered as f64 / trials as f64;
    println!("coverage {rate}");
    assert!((rate - 0.95).abs() <= COVERAGE_TOL, "{rate}");
}

fn resampled_variances(counts: &ShotCounts, reps: usize) -> [f64; 3] {
    let m = PayoffMatrix::default();
    let f = counts.frequencies().unwrap();
    let shots = counts.total_shots();
    let mut rng = rng_for(23, &counts.counts());
    let samples: Vec<(f64, f64, f64)> = (0..reps)
        .map(|_| payoffs_from_counts(&sample_counts_with(&f, shots, &mut rng).unwrap(), &m).unwrap())
        .collect();
    let var = |sel: fn(&(f64, f64, f64)) -> f64| {
        let mean = samples.iter().map(sel).sum::<f64>() / reps as f64;
        samples.iter().map(|s| (sel(s) - mean).powi(2)).sum::<f64>() / (reps - 1) as f64
    };
    [var(|s| s.0), var(|s| s.1), var(|s| s.2)]
}

#[test]
fn delta_method_matches_resampling() {
    let m = PayoffMatrix::default();
    for counts in [[1024, 0, 0, 1024], [900, 100, 150, 898], [400, 600, 500, 548], [1500, 30, 18, 500]] {
        let c = ShotCounts::from_counts(counts);
        let (va, vb, vm) = propagate_count_error(&c, &m).unwrap();
        let emp = resampled_variances(&c, 10_000);
        for (analytic, empirical) in [(va, emp[0]), (vb, emp[1]), (vm, emp[2])] {
            if analytic == 0.0 {
                assert_eq!(empirical, 0.0);
            } else {
                let rel = (analytic - empirical).abs() / analytic;
                assert!(rel <= DELTA_METHOD_TOL, "{counts:?}: {analytic} vs {empirical}");
            }
        }
    }
}

#[test]
fn exact_pseudo_counts_reproduce_expected_payoffs() {
    let m = PayoffMatrix::default();
    let c = ShotCounts::from_counts([3, 1, 2, 2]);
    let (a, b, miss) = payoffs_from_counts(&c, &m).unwrap();
    assert_eq!((a, b, miss), (3.0 * 3.0 / 8.0 + 2.0 * 2.0 / 8.0, 2.0 * 3.0 / 8.0 + 3.0 * 2.0 / 8.0, 3.0 / 8.0));
}

proptest! {
    #[test]
    fn rmse_identities(xs in prop::collection::vec(-10.0..10.0f64, 1..64), shift in -5.0..5.0f64) {
        prop_assert_eq!(rmse(&xs, &xs).unwrap(), 0.0);
        let ys: Vec<f64> = xs.iter().map(|x| x * 0.5 + 1.0).collect();
        prop_assert_eq!(rmse(&xs, &ys).unwrap(), rmse(&ys, &xs).unwrap());
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let r = rmse(&shifted, &xs).unwrap();
        prop_assert!((r - shift.abs()).abs() <= 1e-12 * (1.0 + shift.abs()) * 16.0, "{} vs {}", r, shift);
    }

    #[test]
    fn constant_offset_is_exact_on_representable_values(n in 1usize..50) {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.25).collect();
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        prop_assert_eq!(rmse(&shifted, &xs).unwrap(), 0.5);
    }

    #[test]
    fn aggregate_invariants(xs in prop::collection::vec(-3.0..3.0f64, 2..20), conf in 0.5..0.999f64) {
        let e = aggregate_runs(&xs, conf).unwrap();
        prop_assert!(e.sample_variance >= 0.0 && e.ci_half_width >= 0.0);
        prop_assert_eq!(e.n, xs.len());
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(e.mean >= lo - 1e-12 && e.mean <= hi + 1e-12);
    }
}
