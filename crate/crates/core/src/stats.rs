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

//! Statistical validation of sampled payoffs against reference curves.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::game::{
    analytical_payoffs, expected_payoffs, ideal_outcome_distribution, FormulaVariant, GameSpec,
    PayoffMatrix, StrategyKind,
};
use crate::noise::RunResult;
use crate::statevec::ShotCounts;
use crate::{Error, Result};

/// Reference payoff for the best-case relative error (top of the payoff scale).
pub const BEST_CASE_REFERENCE: f64 = 3.0;
/// Reference payoff for the worst-case relative error (classical equilibrium).
pub const WORST_CASE_REFERENCE: f64 = 1.2;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffEstimate {
    pub mean: f64,
    /// Unbiased (n - 1) sample variance.
    pub sample_variance: f64,
    /// Student-t half-width at the requested confidence.
    pub ci_half_width: f64,
    pub n: usize,
}

/// Two-sided Student-t critical value for `confidence` with `dof` degrees of
/// freedom.
pub fn t_critical(confidence: f64, dof: usize) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!("confidence {confidence} outside (0, 1)")));
    }
    if dof == 0 {
        return Err(Error::Domain("Student-t needs at least one degree of freedom".into()));
    }
    let t = StudentsT::new(0.0, 1.0, dof as f64)
        .map_err(|e| Error::Domain(format!("Student-t: {e}")))?;
    Ok(t.inverse_cdf((1.0 + confidence) / 2.0))
}

pub fn aggregate_runs(values: &[f64], confidence: f64) -> Result<PayoffEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Domain(format!(
            "a confidence interval needs at least 2 values, got {n}"
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite value {v}")));
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let ss = compensated_sum(values.iter().map(|v| (v - mean).powi(2)));
    let sample_variance = (ss / (n - 1) as f64).max(0.0);
    let ci_half_width = t_critical(confidence, n - 1)? * (sample_variance / n as f64).sqrt();
    Ok(PayoffEstimate {
        mean,
        sample_variance,
        ci_half_width,
        n,
    })
}

/// `sqrt(sum (observed - reference)^2 / n)`
pub fn rmse(observed: &[f64], reference: &[f64]) -> Result<f64> {
    if observed.len() != reference.len() {
        return Err(Error::Validation(format!(
            "series lengths differ: {} vs {}",
            observed.len(),
            reference.len()
        )));
    }
    if observed.is_empty() {
        return Err(Error::Validation("rmse of empty series".into()));
    }
    let ss = compensated_sum(observed.iter().zip(reference).map(|(o, r)| (o - r).powi(2)));
    Ok((ss / observed.len() as f64).sqrt())
}

pub fn relative_error_percent(rmse_value: f64, reference_payoff: f64) -> Result<f64> {
    if !(reference_payoff > 0.0) {
        return Err(Error::Domain(format!(
            "reference payoff must be positive, got {reference_payoff}"
        )));
    }
    Ok(100.0 * rmse_value / reference_payoff)
}

fn frequencies(counts: &ShotCounts) -> Result<[f64; 4]> {
    counts
        .frequencies()
        .ok_or_else(|| Error::Domain("counts contain no shots".into()))
}

/// `(e_a, e_b, miscoordination)` from observed outcome frequencies.
pub fn payoffs_from_counts(counts: &ShotCounts, payoff: &PayoffMatrix) -> Result<(f64, f64, f64)> {
    let f = frequencies(counts)?;
    let (ea, eb) = expected_payoffs(&f, payoff);
    Ok((ea, eb, f[1] + f[2]))
}

/// Multinomial delta-method variances of `(e_a, e_b, miscoordination)`.
pub fn propagate_count_error(
    counts: &ShotCounts,
    payoff: &PayoffMatrix,
) -> Result<(f64, f64, f64)> {
    let f = frequencies(counts)?;
    let shots = counts.total_shots() as f64;
    let (wa, wb) = payoff.outcome_weights();
    let var = |w: &[f64; 4]| {
        let m1: f64 = f.iter().zip(w).map(|(p, x)| p * x).sum();
        let m2: f64 = f.iter().zip(w).map(|(p, x)| p * x * x).sum();
        ((m2 - m1 * m1) / shots).max(0.0)
    };
    Ok((var(&wa), var(&wb), var(&[0.0, 1.0, 1.0, 0.0])))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RmseMode {
    /// RMSE of the per-gamma run means against the reference curve.
    #[default]
    MeanOfRuns,
    /// Average over runs of each run's RMSE.
    PerRunAverage,
}

impl FromStr for RmseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean-of-runs" => Ok(RmseMode::MeanOfRuns),
            "per-run-average" => Ok(RmseMode::PerRunAverage),
            other => Err(Error::Parameter(format!(
                "unknown rmse mode {other:?} (expected mean-of-runs or per-run-average)"
            ))),
        }
    }
}

/// One observed run of one symmetric strategy at one entanglement value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub strategy: StrategyKind,
    pub gamma: f64,
    pub run: usize,
    pub e_a: f64,
    pub e_b: f64,
    pub miscoordination: f64,
}

/// Payoff observations for a job of one symmetric strategy.
pub fn observations_from_runs(
    strategy: StrategyKind,
    results: &[RunResult],
    payoff: &PayoffMatrix,
) -> Result<Vec<Observation>> {
    results
        .iter()
        .map(|r| {
            let (e_a, e_b, miscoordination) = payoffs_from_counts(&r.counts, payoff)?;
            Ok(Observation {
                strategy,
                gamma: r.gamma,
                run: r.run_index,
                e_a,
                e_b,
                miscoordination,
            })
        })
        .collect()
}

/// Reference `(e_a, e_b)` for a symmetric strategy under the default payoffs:
/// the closed form where one exists, otherwise the ideal simulation.
pub fn reference_payoffs(
    strategy: StrategyKind,
    gamma: f64,
    variant: FormulaVariant,
) -> Result<(f64, f64)> {
    match analytical_payoffs(strategy, gamma, variant) {
        Ok(v) => Ok(v),
        Err(Error::Domain(_)) => {
            let spec = GameSpec::symmetric(strategy);
            let p = ideal_outcome_distribution(&spec, gamma)?;
            Ok(expected_payoffs(&p, &spec.payoff))
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub gamma: f64,
    pub e_a: PayoffEstimate,
    pub e_b: PayoffEstimate,
    pub miscoordination: f64,
    pub e_a_reference: f64,
    pub e_b_reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: StrategyKind,
    pub rmse_a: f64,
    pub rmse_b: f64,
    pub best_relative_error_percent: f64,
    pub worst_relative_error_percent: f64,
    pub points: Vec<PointSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub variant: FormulaVariant,
    pub rmse_mode: RmseMode,
    pub runs: usize,
    pub strategies: Vec<StrategyReport>,
    /// Smallest RMSE over all strategies and players relative to 3.
    pub best_relative_error_percent: f64,
    /// Largest RMSE over all strategies and players relative to 1.2.
    pub worst_relative_error_percent: f64,
}

const GAMMA_MATCH_TOL: f64 = 1e-9;

/// Aggregates observations per strategy and gamma, and compares run means with
/// the reference curves.
///
/// The expected gamma grid is `grid` when given, otherwise the union of the
/// gamma values present. The expected runs are the union of run indices. Every
/// (strategy, gamma, run) cell must be present exactly once.
pub fn build_validation_report(
    observations: &[Observation],
    grid: Option<&[f64]>,
    variant: FormulaVariant,
    mode: RmseMode,
) -> Result<ValidationReport> {
    if observations.is_empty() {
        return Err(Error::Validation("no observations".into()));
    }
    let mut strategies: Vec<StrategyKind> = Vec::new();
    for o in observations {
        if !strategies.contains(&o.strategy) {
            strategies.push(o.strategy);
        }
    }
    let gammas: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => {
            let mut g: Vec<f64> = observations.iter().map(|o| o.gamma).collect();
            g.sort_by(f64::total_cmp);
            g.dedup_by(|a, b| (*a - *b).abs() <= GAMMA_MATCH_TOL);
            g
        }
    };
    let runs: BTreeSet<usize> = observations.iter().map(|o| o.run).collect();
    let gamma_slot = |g: f64| {
        gammas
            .iter()
            .position(|x| (x - g).abs() <= GAMMA_MATCH_TOL)
            .ok_or_else(|| Error::Validation(format!("gamma {g} is not on the expected grid")))
    };

    // (strategy, gamma slot, run) -> observation
    let mut cells: BTreeMap<(usize, usize, usize), &Observation> = BTreeMap::new();
    for o in observations {
        let s = strategies.iter().position(|x| *x == o.strategy).expect("listed");
        let key = (s, gamma_slot(o.gamma)?, o.run);
        if cells.insert(key, o).is_some() {
            return Err(Error::Validation(format!(
                "duplicate observation for strategy {} gamma {} run {}",
                o.strategy, o.gamma, o.run
            )));
        }
    }
    let mut missing = Vec::new();
    for (s, strategy) in strategies.iter().enumerate() {
        for (gi, g) in gammas.iter().enumerate() {
            for &r in &runs {
                if !cells.contains_key(&(s, gi, r)) {
                    missing.push(format!("{strategy}@gamma={g}/run={r}"));
                }
            }
        }
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(10).map(String::as_str).collect();
        let more = missing.len().saturating_sub(shown.len());
        return Err(Error::Validation(format!(
            "{} missing cells: {}{}",
            missing.len(),
            shown.join(", "),
            if more > 0 { format!(" and {more} more") } else { String::new() }
        )));
    }
    if runs.len() < 2 {
        return Err(Error::Validation(
            "at least two runs per cell are needed for confidence intervals".into(),
        ));
    }

    let mut reports = Vec::with_capacity(strategies.len());
    for (s, &strategy) in strategies.iter().enumerate() {
        let mut points = Vec::with_capacity(gammas.len());
        for (gi, &gamma) in gammas.iter().enumerate() {
            let obs: Vec<&Observation> = runs.iter().map(|&r| cells[&(s, gi, r)]).collect();
            let ea: Vec<f64> = obs.iter().map(|o| o.e_a).collect();
            let eb: Vec<f64> = obs.iter().map(|o| o.e_b).collect();
            let (ra, rb) = reference_payoffs(strategy, gamma, variant)?;
            points.push(PointSummary {
                gamma,
                e_a: aggregate_runs(&ea, DEFAULT_CONFIDENCE)?,
                e_b: aggregate_runs(&eb, DEFAULT_CONFIDENCE)?,
                miscoordination: compensated_sum(obs.iter().map(|o| o.miscoordination))
                    / obs.len() as f64,
                e_a_reference: ra,
                e_b_reference: rb,
            });
        }
        let ref_a: Vec<f64> = points.iter().map(|p| p.e_a_reference).collect();
        let ref_b: Vec<f64> = points.iter().map(|p| p.e_b_reference).collect();
        let (rmse_a, rmse_b) = match mode {
            RmseMode::MeanOfRuns => {
                let ma: Vec<f64> = points.iter().map(|p| p.e_a.mean).collect();
                let mb: Vec<f64> = points.iter().map(|p| p.e_b.mean).collect();
                (rmse(&ma, &ref_a)?, rmse(&mb, &ref_b)?)
            }
            RmseMode::PerRunAverage => {
                let mut acc_a = Vec::new();
                let mut acc_b = Vec::new();
                for &r in &runs {
                    let oa: Vec<f64> = (0..gammas.len()).map(|gi| cells[&(s, gi, r)].e_a).collect();
                    let ob: Vec<f64> = (0..gammas.len()).map(|gi| cells[&(s, gi, r)].e_b).collect();
                    acc_a.push(rmse(&oa, &ref_a)?);
                    acc_b.push(rmse(&ob, &ref_b)?);
                }
                (
                    compensated_sum(acc_a.iter().copied()) / acc_a.len() as f64,
                    compensated_sum(acc_b.iter().copied()) / acc_b.len() as f64,
                )
            }
        };
        reports.push(StrategyReport {
            strategy,
            rmse_a,
            rmse_b,
            best_relative_error_percent: relative_error_percent(
                rmse_a.min(rmse_b),
                BEST_CASE_REFERENCE,
            )?,
            worst_relative_error_percent: relative_error_percent(
                rmse_a.max(rmse_b),
                WORST_CASE_REFERENCE,
            )?,
            points,
        });
    }
    let all = || reports.iter().flat_map(|r| [r.rmse_a, r.rmse_b]);
    let lo = all().fold(f64::INFINITY, f64::min);
    let hi = all().fold(0.0, f64::max);
    Ok(ValidationReport {
        variant,
        rmse_mode: mode,
        runs: runs.len(),
        best_relative_error_percent: relative_error_percent(lo, BEST_CASE_REFERENCE)?,
        worst_relative_error_percent: relative_error_percent(hi, WORST_CASE_REFERENCE)?,
        strategies: reports,
    })
}

impl ValidationReport {
    /// Strategy / RMSE(E_A) / RMSE(E_B) table followed by the relative errors.
    pub fn to_text_table(&self) -> String {
        let mut s = String::new();
        let width = self
            .strategies
            .iter()
            .map(|r| r.strategy.to_string().len())
            .max()
            .unwrap_or(0)
            .max("Strategy".len());
        let rule = format!("+-{}-+-----------+-----------+", "-".repeat(width));
        let _ = writeln!(s, "{rule}");
        let _ = writeln!(s, "| {:<width$} | RMSE(E_A) | RMSE(E_B) |", "Strategy");
        let _ = writeln!(s, "{rule}");
        for r in &self.strategies {
            let _ = writeln!(
                s,
                "| {:<width$} | {:>9.3} | {:>9.3} |",
                r.strategy.to_string(),
                r.rmse_a,
                r.rmse_b
            );
        }
        let _ = writeln!(s, "{rule}");
        let _ = writeln!(
            s,
            "best-case relative error:  {:.2}% (lowest RMSE / {BEST_CASE_REFERENCE})",
            self.best_relative_error_percent
        );
        let _ = writeln!(
            s,
            "worst-case relative error: {:.2}% (highest RMSE / {WORST_CASE_REFERENCE})",
            self.worst_relative_error_percent
        );
        s
    }
}
