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

//! End-to-end sweeps: map, simulate and compare against reference curves.

use serde::{Deserialize, Serialize};

use crate::device::{heavy_hex_graph, synth_calibration, CalibrationProfile, CalibrationSnapshot, CouplingGraph};
use crate::game::{expected_payoffs, uniform_gamma_grid, FormulaVariant, GameSpec, PayoffMatrix, StrategyKind};
use crate::gcm::{naive_packed_plan, select_pairs, MappingPlan, DEFAULT_MIN_SEPARATION};
use crate::noise::{job_distributions, simulate_job, NoiseModel};
use crate::seeding::derive_seed;
use crate::stats::{reference_payoffs, rmse, Observation};
use crate::{Error, Result};

/// Heavy-hex distance of the 127-qubit lattice.
pub const EAGLE_DISTANCE: usize = 7;

/// H-strategy RMSE the noise scale is tuned to.
pub const TARGET_H_RMSE: f64 = 0.118;

/// A coupling graph with its calibration.
#[derive(Clone, Debug)]
pub struct Device {
    pub graph: CouplingGraph,
    pub calibration: CalibrationSnapshot,
}

impl Device {
    pub fn new(graph: CouplingGraph, calibration: CalibrationSnapshot) -> Result<Self> {
        calibration.validate_against(&graph)?;
        Ok(Device { graph, calibration })
    }

    /// 127-qubit heavy-hex lattice with a synthetic calibration.
    pub fn synthetic_eagle(seed: u64, profile: CalibrationProfile) -> Self {
        let graph = heavy_hex_graph(EAGLE_DISTANCE).expect("valid distance");
        let calibration = synth_calibration(&graph, seed, profile);
        Device { graph, calibration }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingMode {
    /// Calibration-aware pairs at least `min_separation` apart.
    Guided { min_separation: usize },
    /// Vertex-disjoint couplers in index order, neighbours allowed.
    Packed,
}

impl Default for MappingMode {
    fn default() -> Self {
        MappingMode::Guided {
            min_separation: DEFAULT_MIN_SEPARATION,
        }
    }
}

pub fn plan_for(device: &Device, k: usize, mode: MappingMode) -> Result<MappingPlan> {
    match mode {
        MappingMode::Guided { min_separation } => {
            select_pairs(&device.graph, &device.calibration, k, min_separation)
        }
        MappingMode::Packed => naive_packed_plan(&device.graph, k),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub gamma_steps: usize,
    pub shots: u64,
    pub runs: usize,
    pub seed: u64,
    pub strategies: Vec<StrategyKind>,
    pub noise: NoiseModel,
    pub mapping: MappingMode,
    pub variant: FormulaVariant,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            gamma_steps: crate::game::DEFAULT_GAMMA_STEPS,
            shots: 2048,
            runs: 5,
            seed: 0,
            strategies: StrategyKind::standard_set().to_vec(),
            noise: NoiseModel::default(),
            mapping: MappingMode::default(),
            variant: FormulaVariant::default(),
        }
    }
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_steps < 2 {
            return Err(Error::Parameter(format!(
                "gamma_steps must be at least 2, got {}",
                self.gamma_steps
            )));
        }
        if self.shots == 0 {
            return Err(Error::Parameter("shots must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Parameter("runs must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Parameter("no strategies selected".into()));
        }
        Ok(())
    }
}

/// One CSV row: a single run of one strategy at one entanglement value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub strategy: StrategyKind,
    pub gamma: f64,
    pub run: usize,
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub ea: f64,
    pub eb: f64,
    pub ea_analytic: f64,
    pub eb_analytic: f64,
}

impl SweepRow {
    pub fn observation(&self) -> Observation {
        Observation {
            strategy: self.strategy,
            gamma: self.gamma,
            run: self.run,
            e_a: self.ea,
            e_b: self.eb,
            miscoordination: self.p01 + self.p10,
        }
    }
}

/// FNV-1a of the strategy label.
fn strategy_tag(strategy: StrategyKind) -> u64 {
    strategy
        .to_string()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
}

/// Runs every selected strategy as one mapped job per strategy.
///
/// Rows are ordered by strategy (as listed), gamma, then run.
pub fn run_sweep(device: &Device, settings: &SweepSettings) -> Result<Vec<SweepRow>> {
    settings.validate()?;
    let grid = uniform_gamma_grid(settings.gamma_steps)?;
    let plan = plan_for(device, grid.len(), settings.mapping)?;
    let mut rows = Vec::with_capacity(settings.strategies.len() * grid.len() * settings.runs);
    for &strategy in &settings.strategies {
        let spec = GameSpec::symmetric(strategy).with_grid(grid.clone())?;
        let seed = derive_seed(settings.seed, &[strategy_tag(strategy)]);
        let results = simulate_job(
            &plan,
            &spec,
            &device.graph,
            &device.calibration,
            &settings.noise,
            settings.shots,
            settings.runs,
            seed,
        )?;
        for r in results {
            let f = r.counts.frequencies().expect("shots >= 1");
            let (ea, eb) = expected_payoffs(&f, &spec.payoff);
            let (ea_analytic, eb_analytic) = reference_payoffs(strategy, r.gamma, settings.variant)?;
            rows.push(SweepRow {
                strategy,
                gamma: r.gamma,
                run: r.run_index,
                p00: f[0],
                p01: f[1],
                p10: f[2],
                p11: f[3],
                ea,
                eb,
                ea_analytic,
                eb_analytic,
            });
        }
    }
    Ok(rows)
}

/// RMSE of the exact noisy expectation (no shot noise) against the reference
/// curves, for both players.
pub fn expected_rmse(
    device: &Device,
    plan: &MappingPlan,
    strategy: StrategyKind,
    grid: &[f64],
    model: &NoiseModel,
    variant: FormulaVariant,
) -> Result<(f64, f64)> {
    let spec = GameSpec::symmetric(strategy).with_grid(grid.to_vec())?;
    let dists = job_distributions(plan, &spec, &device.graph, &device.calibration, model)?;
    let payoff = PayoffMatrix::default();
    let mut obs = (Vec::new(), Vec::new());
    let mut refs = (Vec::new(), Vec::new());
    for (p, &g) in dists.iter().zip(grid) {
        let (a, b) = expected_payoffs(p, &payoff);
        let (ra, rb) = reference_payoffs(strategy, g, variant)?;
        obs.0.push(a);
        obs.1.push(b);
        refs.0.push(ra);
        refs.1.push(rb);
    }
    Ok((rmse(&obs.0, &refs.0)?, rmse(&obs.1, &refs.1)?))
}

/// Noise scale at which the mean of the two H-strategy expected RMSEs equals
/// `target`, found by bisection.
pub fn tune_noise_scale(
    device: &Device,
    plan: &MappingPlan,
    grid: &[f64],
    base: &NoiseModel,
    target: f64,
) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::Parameter(format!("target RMSE must be positive, got {target}")));
    }
    let h_rmse = |scale: f64| -> Result<f64> {
        let model = NoiseModel { scale, ..*base };
        let (a, b) = expected_rmse(device, plan, StrategyKind::H, grid, &model, FormulaVariant::Corrected)?;
        Ok(0.5 * (a + b))
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while h_rmse(hi)? < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Domain(format!("H-strategy RMSE never reaches {target}")));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if h_rmse(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
