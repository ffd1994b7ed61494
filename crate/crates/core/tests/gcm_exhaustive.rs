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

//! Pair selection against exhaustive search on small graphs.

use proptest::prelude::*;
use qbos::device::{
    heavy_hex_graph, synth_calibration, CalibrationProfile, CalibrationSnapshot, CouplingGraph,
    EdgeCalibration, QubitCalibration,
};
use qbos::gcm::{
    refine_mapping, score_pair, select_pairs, verify_separation, MappingPlan, ScoreWeights,
};
use qbos::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Allowed gap between the selector and the exhaustive optimum.
const OPTIMALITY_SLACK: f64 = 0.10;

fn hops(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    // Floyd-Warshall
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

struct Exhaustive {
    /// `best[k]` is the cheapest feasible total for k pairs.
    best: Vec<Option<f64>>,
}

fn exhaustive(graph: &CouplingGraph, calib: &CalibrationSnapshot, sep: usize) -> Exhaustive {
    let edges = graph.edges();
    let d = hops(graph.num_qubits(), edges);
    let scores: Vec<f64> = edges
        .iter()
        .map(|&e| score_pair(e, calib, &ScoreWeights::default()).unwrap().score)
        .collect();
    let compatible = |x: usize, y: usize| {
        let (a, b) = edges[x];
        let (c, e) = edges[y];
        [a, b].iter().all(|&p| [c, e].iter().all(|&q| d[p][q] >= sep))
    };
    let mut best = vec![None; edges.len() + 1];
    for mask in 0u32..(1 << edges.len()) {
        let chosen: Vec<usize> = (0..edges.len()).filter(|i| mask >> i & 1 == 1).collect();
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(i, &x)| chosen[i + 1..].iter().all(|&y| compatible(x, y)));
        if ok {
            let total: f64 = chosen.iter().map(|&i| scores[i]).sum();
            let slot: &mut Option<f64> = &mut best[chosen.len()];
            if slot.is_none_or(|b| total < b) {
                *slot = Some(total);
            }
        }
    }
    Exhaustive { best }
}

fn random_calibration(graph: &CouplingGraph, rng: &mut ChaCha8Rng) -> CalibrationSnapshot {
    let qubits = (0..graph.num_qubits())
        .map(|id| QubitCalibration {
            id,
            readout_error: rng.random_range(0.005..0.05),
            t1_us: rng.random_range(100.0..400.0),
            t2_us: rng.random_range(50.0..300.0),
        })
        .collect();
    let edges = graph
        .edges()
        .iter()
        .map(|&(a, b)| EdgeCalibration {
            pair: [a, b],
            two_qubit_error: rng.random_range(0.002..0.03),
        })
        .collect();
    CalibrationSnapshot::new("t", qubits, edges).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng) -> CouplingGraph {
    let n = rng.random_range(2..=9usize);
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let m = rng.random_range(1..=all.len().min(10));
    let mut edges = Vec::new();
    for _ in 0..m {
        let i = rng.random_range(0..all.len());
        edges.push(all.swap_remove(i));
    }
    CouplingGraph::new(n, edges).unwrap()
}

/// Checks one instance for every k and separation 1..=3. Returns
/// (instances compared, instances at the exact optimum).
fn check_instance(graph: &CouplingGraph, calib: &CalibrationSnapshot) -> (usize, usize) {
    let mut compared = 0;
    let mut exact = 0;
    for sep in 1..=3 {
        let ex = exhaustive(graph, calib, sep);
        let k_max = ex.best.iter().rposition(Option::is_some).unwrap();
        for k in 1..=graph.edges().len() + 1 {
            match select_pairs(graph, calib, k, sep) {
                Ok(plan) => {
                    assert!(k <= k_max, "selector placed {k} > optimum {k_max}");
                    assert!(verify_separation(&plan, graph).ok);
                    assert_eq!(plan.len(), k);
                    let total = plan.total_score(calib, &ScoreWeights::default()).unwrap();
                    let opt = ex.best[k].unwrap();
                    assert!(total >= opt - 1e-12);
                    assert!(
                        total <= opt * (1.0 + OPTIMALITY_SLACK) + 1e-12,
                        "k={k} sep={sep}: {total} vs optimum {opt} on {:?}",
                        graph.edges()
                    );
                    compared += 1;
                    if total <= opt + 1e-12 {
                        exact += 1;
                    }
                }
                Err(Error::Infeasible { achievable, requested, .. }) => {
                    assert_eq!(requested, k);
                    assert!(k > k_max, "selector missed a feasible plan: k={k} sep={sep} on {:?}", graph.edges());
                    assert!(achievable <= k_max);
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
    (compared, exact)
}

#[test]
fn random_small_graphs_within_slack_of_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut compared, mut exact) = (0, 0);
    for _ in 0..400 {
        let g = random_graph(&mut rng);
        let c = random_calibration(&g, &mut rng);
        let (a, b) = check_instance(&g, &c);
        compared += a;
        exact += b;
    }
    println!("exact optimum in {exact} of {compared} feasible instances");
    assert!(compared > 1000);
}

#[test]
fn structured_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let path: Vec<(usize, usize)> = (0..10).map(|i| (i, i + 1)).collect();
    let cycle: Vec<(usize, usize)> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
    let star: Vec<(usize, usize)> = (1..10).map(|i| (0, i)).collect();
    let ladder = vec![(0, 1), (2, 3), (4, 5), (0, 2), (2, 4), (1, 3), (3, 5), (4, 6), (5, 7), (6, 7)];
    for (n, edges) in [(11, path), (10, cycle), (10, star), (8, ladder)] {
        let g = CouplingGraph::new(n, edges).unwrap();
        for _ in 0..5 {
            let c = random_calibration(&g, &mut rng);
            check_instance(&g, &c);
        }
    }
}

#[test]
fn path_example_is_optimal_and_feasible() {
    let g = CouplingGraph::new(7, (0..6).map(|i| (i, i + 1))).unwrap();
    let c = synth_calibration(&g, 0, CalibrationProfile::Uniform);
    let plan = select_pairs(&g, &c, 2, 2).unwrap();
    assert!(verify_separation(&plan, &g).ok);
    let ex = exhaustive(&g, &c, 2);
    let total = plan.total_score(&c, &ScoreWeights::default()).unwrap();
    assert!((total - ex.best[2].unwrap()).abs() < 1e-12);
}

#[test]
fn eagle_lattice_places_31_pairs_on_62_qubits() {
    let g = heavy_hex_graph(7).unwrap();
    assert_eq!(g.num_qubits(), 127);
    for profile in [CalibrationProfile::Uniform, CalibrationProfile::Realistic] {
        let c = synth_calibration(&g, 11, profile);
        let plan = select_pairs(&g, &c, 31, 2).unwrap();
        assert!(verify_separation(&plan, &g).ok);
        assert_eq!(plan.qubits().len(), 62);
        let relaxed = select_pairs(&g, &c, 31, 1).unwrap();
        assert!(verify_separation(&relaxed, &g).ok);
    }
    let c = synth_calibration(&g, 11, CalibrationProfile::Realistic);
    assert!(matches!(
        select_pairs(&g, &c, 200, 2),
        Err(Error::Infeasible { requested: 200, .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feasibility_is_monotone_and_selection_deterministic(seed in any::<u64>(), sep in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng);
        let c = random_calibration(&g, &mut rng);
        let mut last_ok = true;
        for k in 1..=g.edges().len() {
            let r = select_pairs(&g, &c, k, sep);
            if r.is_ok() {
                prop_assert!(last_ok, "k={} feasible after an infeasible k", k);
                prop_assert_eq!(r.unwrap(), select_pairs(&g, &c, k, sep).unwrap());
            }
            last_ok = select_pairs(&g, &c, k, sep).is_ok();
        }
    }

    #[test]
    fn refinement_keeps_plans_valid(seed in any::<u64>(), k in 1usize..=12) {
        let g = heavy_hex_graph(5).unwrap();
        let c = synth_calibration(&g, seed, CalibrationProfile::Realistic);
        let plan = select_pairs(&g, &c, k, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let feedback: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
        let refined = refine_mapping(&plan, &feedback, &c, &g).unwrap();
        prop_assert!(verify_separation(&refined, &g).ok);
        prop_assert_eq!(refined.len(), plan.len());
        let uniform = refine_mapping(&plan, &vec![0.3; k], &c, &g).unwrap();
        prop_assert_eq!(&uniform, &plan);
    }
}

#[test]
fn refinement_moves_the_outlier_and_does_not_raise_cost() {
    let g = heavy_hex_graph(5).unwrap();
    let c = synth_calibration(&g, 3, CalibrationProfile::Realistic);
    let plan: MappingPlan = select_pairs(&g, &c, 6, 2).unwrap();
    // Circuit 2 is observed far worse than the rest; charge it against the
    // pool of unused couplers.
    let mut feedback = vec![0.1; 6];
    feedback[2] = 1.0;
    let refined = refine_mapping(&plan, &feedback, &c, &g).unwrap();
    assert!(verify_separation(&refined, &g).ok);
    let weights = ScoreWeights::default();
    let moved: Vec<usize> = (0..6).filter(|&i| refined.pair_for(i) != plan.pair_for(i)).collect();
    assert!(moved.iter().all(|&i| i == 2), "{moved:?}");
    if moved.is_empty() {
        return;
    }
    let old = score_pair(pair(&plan, 2), &c, &weights).unwrap().score;
    let new = score_pair(pair(&refined, 2), &c, &weights).unwrap().score;
    assert!(new < old * 10.0);
}

fn pair(plan: &MappingPlan, circuit: usize) -> (usize, usize) {
    let [a, b] = plan.pair_for(circuit).unwrap();
    (a, b)
}
