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

//! Guided circuit mapping.
//!
//! Each game circuit needs one physically connected qubit pair. Pairs serving
//! different circuits must keep a minimum graph distance between any of their
//! qubits (2 leaves at least one idle qubit in between), which makes the
//! selection an induced-matching problem with a cost per edge. The selector
//! builds a low-cost placement greedily, falls back to a cardinality-first
//! construction with 1-out/2-in augmentation when the cheap greedy pass
//! cannot place enough pairs, and finishes with single-pair swap descent.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::device::{CalibrationSnapshot, CouplingGraph};
use crate::{Error, Result};

pub const DEFAULT_MIN_SEPARATION: usize = 2;

/// Relative score improvement below which a swap is not taken.
/// Node limit of the exact fallback search.
const SEARCH_BUDGET: usize = 200_000;

/// Number of starting placements improved by swap descent.
const DESCENT_STARTS: usize = 4;

const SCORE_EPS: f64 = 1e-12;

/// Linear pair-cost weights. The coherence weight multiplies `1/T1` with T1 in
/// microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub two_qubit: f64,
    pub readout: f64,
    pub coherence_us: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            two_qubit: 1.0,
            readout: 0.5,
            coherence_us: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub edge: (usize, usize),
    pub score: f64,
}

/// `w_2q * e_2q + w_ro * (ro_a + ro_b) + w_coh * (1/T1_a + 1/T1_b)`; lower is
/// better.
pub fn score_pair(
    edge: (usize, usize),
    calib: &CalibrationSnapshot,
    weights: &ScoreWeights,
) -> Result<PairScore> {
    let (a, b) = edge;
    let e2q = calib.edge(a, b)?.two_qubit_error;
    let (qa, qb) = (calib.qubit(a)?, calib.qubit(b)?);
    let score = weights.two_qubit * e2q
        + weights.readout * (qa.readout_error + qb.readout_error)
        + weights.coherence_us * (1.0 / qa.t1_us + 1.0 / qb.t1_us);
    if !score.is_finite() || score < 0.0 {
        return Err(Error::Validation(format!(
            "score of edge ({a}, {b}) is {score}; weights must be non-negative"
        )));
    }
    Ok(PairScore { edge: (a.min(b), a.max(b)), score })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub circuit: usize,
    /// `pair[0]` hosts the circuit's qubit 0.
    pub pair: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingPlan {
    pub min_separation: usize,
    pub assignments: Vec<Assignment>,
}

impl MappingPlan {
    /// Circuit `i` on `edges[i]`.
    pub fn from_edges(min_separation: usize, edges: &[(usize, usize)]) -> Self {
        MappingPlan {
            min_separation,
            assignments: edges
                .iter()
                .enumerate()
                .map(|(circuit, &(a, b))| Assignment { circuit, pair: [a, b] })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Pair serving `circuit`.
    pub fn pair_for(&self, circuit: usize) -> Option<[usize; 2]> {
        self.assignments
            .iter()
            .find(|a| a.circuit == circuit)
            .map(|a| a.pair)
    }

    pub fn qubits(&self) -> BTreeSet<usize> {
        self.assignments.iter().flat_map(|a| a.pair).collect()
    }

    pub fn total_score(&self, calib: &CalibrationSnapshot, weights: &ScoreWeights) -> Result<f64> {
        self.assignments
            .iter()
            .map(|a| score_pair((a.pair[0], a.pair[1]), calib, weights).map(|s| s.score))
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::from_json(&e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotAnEdge {
        circuit: usize,
        pair: [usize; 2],
    },
    TooClose {
        circuits: (usize, usize),
        qubits: (usize, usize),
        distance: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAnEdge { circuit, pair } => write!(
                f,
                "circuit {circuit} is mapped to ({}, {}), which is not a coupler",
                pair[0], pair[1]
            ),
            Violation::TooClose {
                circuits,
                qubits,
                distance,
            } => write!(
                f,
                "circuits {} and {} use qubits {} and {} at distance {distance}",
                circuits.0, circuits.1, qubits.0, qubits.1
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationReport {
    pub ok: bool,
    pub violation: Option<Violation>,
}

/// Exhaustive check of a plan: every pair is a coupler and every qubit of one
/// pair is at least `plan.min_separation` hops from every qubit of any other.
pub fn verify_separation(plan: &MappingPlan, graph: &CouplingGraph) -> SeparationReport {
    let fail = |v| SeparationReport {
        ok: false,
        violation: Some(v),
    };
    for a in &plan.assignments {
        let [x, y] = a.pair;
        if x >= graph.num_qubits() || y >= graph.num_qubits() || !graph.has_edge(x, y) {
            return fail(Violation::NotAnEdge {
                circuit: a.circuit,
                pair: a.pair,
            });
        }
    }
    let n = graph.num_qubits();
    let edges = graph.edges();
    for (i, ai) in plan.assignments.iter().enumerate() {
        for &qa in &ai.pair {
            let dist = bfs_edge_list(n, edges, qa);
            for aj in &plan.assignments[i + 1..] {
                for &qb in &aj.pair {
                    let d = dist[qb];
                    if d < plan.min_separation {
                        return fail(Violation::TooClose {
                            circuits: (ai.circuit, aj.circuit),
                            qubits: (qa, qb),
                            distance: d,
                        });
                    }
                }
            }
        }
    }
    SeparationReport {
        ok: true,
        violation: None,
    }
}

// Plain BFS over the raw edge list so the checker shares no state with the
// selector.
fn bfs_edge_list(n: usize, edges: &[(usize, usize)], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in edges {
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// For each assignment, whether another assigned qubit sits closer than
/// `threshold` hops to one of its qubits.
pub fn crosstalk_exposure(plan: &MappingPlan, graph: &CouplingGraph, threshold: usize) -> Vec<bool> {
    let dists: Vec<Vec<Vec<usize>>> = plan
        .assignments
        .iter()
        .map(|a| a.pair.iter().map(|&q| graph.distances_from(q)).collect())
        .collect();
    (0..plan.len())
        .map(|i| {
            (0..plan.len()).any(|j| {
                j != i
                    && dists[i].iter().any(|d| {
                        plan.assignments[j].pair.iter().any(|&q| d[q] < threshold)
                    })
            })
        })
        .collect()
}

/// Selects `k` low-cost couplers pairwise at least `min_separation` apart
/// using the default score weights.
pub fn select_pairs(
    graph: &CouplingGraph,
    calib: &CalibrationSnapshot,
    k: usize,
    min_separation: usize,
) -> Result<MappingPlan> {
    select_pairs_with(graph, calib, k, min_separation, &ScoreWeights::default())
}

/// Candidates are ordered by (score, edge). Starting placements come from a
/// cheapest-first greedy, the same greedy with each candidate forced first,
/// and a fewest-conflicts greedy with augmentation trimmed to its `k` cheapest
/// pairs. The cheapest few starts are improved by swap descent and the best
/// result is kept. When no start reaches `k`, a budgeted depth-first search
/// looks for any feasible placement before reporting infeasibility.
pub fn select_pairs_with(
    graph: &CouplingGraph,
    calib: &CalibrationSnapshot,
    k: usize,
    min_separation: usize,
    weights: &ScoreWeights,
) -> Result<MappingPlan> {
    if k == 0 {
        return Err(Error::Parameter("at least one pair must be requested".into()));
    }
    if min_separation == 0 {
        return Err(Error::Parameter("min_separation must be at least 1".into()));
    }
    let sel = Selector::new(graph, calib, weights, min_separation)?;

    let mut starts = Vec::new();
    let mut largest = 0;
    let firsts = std::iter::once(None).chain((0..sel.cands.len()).map(Some));
    for first in firsts {
        let g = sel.greedy_from(first, k);
        largest = largest.max(g.len());
        if g.len() == k {
            starts.push(g);
        }
    }
    let dense = sel.max_cardinality(k);
    largest = largest.max(dense.len());
    if dense.len() >= k {
        starts.push(sel.cheapest_subset(dense, k));
    }
    if starts.is_empty() {
        match sel.exhaustive(k, SEARCH_BUDGET) {
            Ok(found) => starts.push(found),
            Err(seen) => {
                return Err(Error::Infeasible {
                    requested: k,
                    achievable: largest.max(seen),
                    min_separation,
                })
            }
        }
    }
    for s in &mut starts {
        s.sort_unstable();
    }
    starts.sort_by(|x, y| sel.cmp_sets(x, y));
    starts.dedup();
    let best = starts
        .into_iter()
        .take(DESCENT_STARTS)
        .map(|s| {
            let mut d = sel.descend(s);
            d.sort_unstable();
            d
        })
        .min_by(|x, y| sel.cmp_sets(x, y))
        .expect("at least one start");
    Ok(sel.plan(best))
}

struct Selector {
    /// Candidate couplers sorted by (score, a, b).
    cands: Vec<PairScore>,
    /// `conflicts[i]` lists candidates closer than the separation to `i`.
    conflicts: Vec<Vec<usize>>,
    conflict_set: Vec<BTreeSet<usize>>,
    min_separation: usize,
}

fn by_score_then_edge(x: &PairScore, y: &PairScore) -> Ordering {
    x.score.total_cmp(&y.score).then(x.edge.cmp(&y.edge))
}

impl Selector {
    fn new(
        graph: &CouplingGraph,
        calib: &CalibrationSnapshot,
        weights: &ScoreWeights,
        min_separation: usize,
    ) -> Result<Self> {
        let mut cands = graph
            .edges()
            .iter()
            .map(|&e| score_pair(e, calib, weights))
            .collect::<Result<Vec<_>>>()?;
        cands.sort_by(by_score_then_edge);

        let dist = graph.all_pairs_distances();
        let too_close = |x: (usize, usize), y: (usize, usize)| {
            [x.0, x.1]
                .iter()
                .any(|&p| [y.0, y.1].iter().any(|&q| dist[p][q] < min_separation))
        };
        let m = cands.len();
        let mut conflicts = vec![Vec::new(); m];
        for i in 0..m {
            for j in i + 1..m {
                if too_close(cands[i].edge, cands[j].edge) {
                    conflicts[i].push(j);
                    conflicts[j].push(i);
                }
            }
        }
        let conflict_set = conflicts.iter().map(|c| c.iter().copied().collect()).collect();
        Ok(Selector {
            cands,
            conflicts,
            conflict_set,
            min_separation,
        })
    }

    fn total(&self, chosen: &[usize]) -> f64 {
        chosen.iter().map(|&i| self.cands[i].score).sum()
    }

    fn blocked_counts(&self, chosen: &[usize]) -> Vec<usize> {
        let mut blocked = vec![0; self.cands.len()];
        for &c in chosen {
            for &j in &self.conflicts[c] {
                blocked[j] += 1;
            }
        }
        blocked
    }

    /// Orders sorted candidate sets by total score, then lexicographically.
    fn cmp_sets(&self, x: &[usize], y: &[usize]) -> Ordering {
        self.total(x).total_cmp(&self.total(y)).then_with(|| x.cmp(y))
    }

    /// Cheapest-first greedy, optionally placing `first` before anything
    /// else, stopping once `limit` pairs are placed.
    fn greedy_from(&self, first: Option<usize>, limit: usize) -> Vec<usize> {
        let mut chosen = Vec::new();
        let mut blocked = vec![false; self.cands.len()];
        for i in first.into_iter().chain(0..self.cands.len()) {
            if chosen.len() == limit {
                break;
            }
            if !blocked[i] {
                chosen.push(i);
                blocked[i] = true;
                for &j in &self.conflicts[i] {
                    blocked[j] = true;
                }
            }
        }
        chosen
    }

    /// Fewest-conflicts-first greedy to a maximal placement, then 1-out/2-in
    /// augmentation until `target` pairs are placed or no move applies. The
    /// trajectory does not depend on `target` except for where it stops.
    fn max_cardinality(&self, target: usize) -> Vec<usize> {
        let m = self.cands.len();
        let mut available = vec![true; m];
        let mut degree: Vec<usize> = self.conflicts.iter().map(Vec::len).collect();
        let mut chosen = Vec::new();
        while let Some(i) = (0..m).filter(|&i| available[i]).min_by_key(|&i| (degree[i], i)) {
            chosen.push(i);
            let mut removed = vec![i];
            available[i] = false;
            for &j in &self.conflicts[i] {
                if available[j] {
                    available[j] = false;
                    removed.push(j);
                }
            }
            for r in removed {
                for &j in &self.conflicts[r] {
                    degree[j] = degree[j].saturating_sub(1);
                }
            }
        }

        while chosen.len() < target {
            match self.augment(&chosen) {
                Some(next) => chosen = next,
                None => break,
            }
        }
        chosen
    }

    /// Replaces one chosen pair with two compatible ones, if possible.
    fn augment(&self, chosen: &[usize]) -> Option<Vec<usize>> {
        let blocked = self.blocked_counts(chosen);
        let in_set: BTreeSet<usize> = chosen.iter().copied().collect();
        for (pos, &e) in chosen.iter().enumerate() {
            // Candidates blocked by `e` alone (or not blocked at all).
            let freed: Vec<usize> = (0..self.cands.len())
                .filter(|&f| !in_set.contains(&f))
                .filter(|&f| {
                    blocked[f] == 0 || (blocked[f] == 1 && self.conflict_set[e].contains(&f))
                })
                .collect();
            for (x, &f) in freed.iter().enumerate() {
                if let Some(&g) = freed[x + 1..]
                    .iter()
                    .find(|&&g| !self.conflict_set[f].contains(&g))
                {
                    let mut next = chosen.to_vec();
                    next[pos] = f;
                    next.push(g);
                    return Some(next);
                }
            }
        }
        None
    }

    /// Depth-first search for `k` mutually compatible candidates, taken in
    /// (score, edge) order, visiting at most `budget` nodes. On failure returns
    /// the largest compatible set size seen.
    fn exhaustive(&self, k: usize, budget: usize) -> std::result::Result<Vec<usize>, usize> {
        struct Search<'a> {
            sel: &'a Selector,
            k: usize,
            budget: usize,
            largest: usize,
            chosen: Vec<usize>,
            blocked: Vec<usize>,
        }
        impl Search<'_> {
            fn go(&mut self, from: usize) -> bool {
                self.largest = self.largest.max(self.chosen.len());
                if self.chosen.len() == self.k {
                    return true;
                }
                if self.budget == 0 {
                    return false;
                }
                self.budget -= 1;
                let m = self.sel.cands.len();
                let open = (from..m).filter(|&i| self.blocked[i] == 0).count();
                if self.chosen.len() + open < self.k {
                    return false;
                }
                for i in from..m {
                    if self.blocked[i] != 0 {
                        continue;
                    }
                    self.chosen.push(i);
                    for &j in &self.sel.conflicts[i] {
                        self.blocked[j] += 1;
                    }
                    if self.go(i + 1) {
                        return true;
                    }
                    for &j in &self.sel.conflicts[i] {
                        self.blocked[j] -= 1;
                    }
                    self.chosen.pop();
                    if self.budget == 0 {
                        return false;
                    }
                }
                false
            }
        }
        let mut s = Search {
            sel: self,
            k,
            budget,
            largest: 0,
            chosen: Vec::with_capacity(k),
            blocked: vec![0; self.cands.len()],
        };
        if s.go(0) {
            Ok(s.chosen)
        } else {
            Err(s.largest)
        }
    }

    fn cheapest_subset(&self, mut chosen: Vec<usize>, k: usize) -> Vec<usize> {
        // Candidate indices are already in (score, edge) order.
        chosen.sort_unstable();
        chosen.truncate(k);
        chosen
    }

    /// Swap descent: replace one chosen pair by a strictly cheaper compatible
    /// one, or failing that two chosen pairs by two compatible ones of lower
    /// total, until neither move applies.
    fn descend(&self, mut chosen: Vec<usize>) -> Vec<usize> {
        while let Some(next) = self.swap_one(&chosen).or_else(|| self.swap_two(&chosen)) {
            chosen = next;
        }
        chosen
    }

    /// Unchosen candidates whose only chosen conflicts lie in `removed`.
    fn freed_by(&self, chosen: &[usize], blocked: &[usize], removed: &[usize]) -> Vec<usize> {
        (0..self.cands.len())
            .filter(|f| !chosen.contains(f))
            .filter(|&f| {
                let by_removed = removed
                    .iter()
                    .filter(|&&r| self.conflict_set[r].contains(&f))
                    .count();
                blocked[f] == by_removed
            })
            .collect()
    }

    fn swap_one(&self, chosen: &[usize]) -> Option<Vec<usize>> {
        let blocked = self.blocked_counts(chosen);
        let mut order: Vec<usize> = (0..chosen.len()).collect();
        // Most expensive first.
        order.sort_by(|&x, &y| chosen[y].cmp(&chosen[x]));
        for pos in order {
            let e = chosen[pos];
            let current = self.cands[e].score;
            // Candidates are in ascending (score, edge) order.
            let better = self
                .freed_by(chosen, &blocked, &[e])
                .into_iter()
                .find(|&f| self.cands[f].score < current - SCORE_EPS);
            if let Some(f) = better {
                let mut next = chosen.to_vec();
                next[pos] = f;
                return Some(next);
            }
        }
        None
    }

    fn swap_two(&self, chosen: &[usize]) -> Option<Vec<usize>> {
        let blocked = self.blocked_counts(chosen);
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..chosen.len() {
            for y in x + 1..chosen.len() {
                let (e1, e2) = (chosen[x], chosen[y]);
                let current = self.cands[e1].score + self.cands[e2].score;
                let freed = self.freed_by(chosen, &blocked, &[e1, e2]);
                for (i, &f) in freed.iter().enumerate() {
                    for &g in &freed[i + 1..] {
                        if self.conflict_set[f].contains(&g) {
                            continue;
                        }
                        let total = self.cands[f].score + self.cands[g].score;
                        let gain = current - total;
                        if gain > SCORE_EPS && best.is_none_or(|b| gain > b.0 + SCORE_EPS) {
                            best = Some((gain, x, y, f, g));
                        }
                    }
                }
            }
        }
        best.map(|(_, x, y, f, g)| {
            let mut next = chosen.to_vec();
            next[x] = f;
            next[y] = g;
            next
        })
    }

    /// Circuits are assigned to the chosen couplers in edge order.
    fn plan(&self, chosen: Vec<usize>) -> MappingPlan {
        let mut edges: Vec<(usize, usize)> = chosen.iter().map(|&i| self.cands[i].edge).collect();
        edges.sort_unstable();
        MappingPlan::from_edges(self.min_separation, &edges)
    }
}

/// Baseline without guided mapping: vertex-disjoint couplers taken in index
/// order with no regard for calibration or spacing.
pub fn naive_packed_plan(graph: &CouplingGraph, k: usize) -> Result<MappingPlan> {
    let mut used = vec![false; graph.num_qubits()];
    let mut edges = Vec::with_capacity(k);
    let mut sorted = graph.edges().to_vec();
    sorted.sort_unstable();
    for (a, b) in sorted {
        if edges.len() == k {
            break;
        }
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            edges.push((a, b));
        }
    }
    if edges.len() < k {
        return Err(Error::Infeasible {
            requested: k,
            achievable: edges.len(),
            min_separation: 1,
        });
    }
    Ok(MappingPlan::from_edges(1, &edges))
}

/// Moves the worst-performing circuits to better couplers.
///
/// Circuits in the top decile of `feedback` (observed error per circuit,
/// indexed by circuit) whose feedback exceeds the median are flagged. A
/// flagged circuit's current coupler is charged `score * feedback / median`;
/// it is moved to the cheapest unused coupler compatible with the rest of the
/// plan when that coupler's score is lower than the charge. Vacated couplers
/// are not reused.
pub fn refine_mapping(
    plan: &MappingPlan,
    feedback: &[f64],
    calib: &CalibrationSnapshot,
    graph: &CouplingGraph,
) -> Result<MappingPlan> {
    refine_mapping_with(plan, feedback, calib, graph, &ScoreWeights::default())
}

pub fn refine_mapping_with(
    plan: &MappingPlan,
    feedback: &[f64],
    calib: &CalibrationSnapshot,
    graph: &CouplingGraph,
    weights: &ScoreWeights,
) -> Result<MappingPlan> {
    let n = plan.len();
    if feedback.len() != n {
        return Err(Error::Validation(format!(
            "feedback has {} entries for {n} circuits",
            feedback.len()
        )));
    }
    if let Some(f) = feedback.iter().find(|f| !f.is_finite() || **f < 0.0) {
        return Err(Error::Validation(format!("invalid feedback value {f}")));
    }
    if n == 0 {
        return Ok(plan.clone());
    }
    let median = median(feedback);
    let decile = n.div_ceil(10);
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&x, &y| feedback[y].total_cmp(&feedback[x]).then(x.cmp(&y)));
    let flagged: Vec<usize> = ranked
        .into_iter()
        .take(decile)
        .filter(|&i| feedback[i] > median * (1.0 + 1e-9) && feedback[i] > 0.0)
        .collect();

    let mut out = plan.clone();
    let mut retired: BTreeSet<(usize, usize)> = BTreeSet::new();
    let dist = graph.all_pairs_distances();
    let mut alternatives: Vec<PairScore> = graph
        .edges()
        .iter()
        .map(|&e| score_pair(e, calib, weights))
        .collect::<Result<_>>()?;
    alternatives.sort_by(by_score_then_edge);

    for pos in flagged {
        let [a, b] = out.assignments[pos].pair;
        let current = (a.min(b), a.max(b));
        let charge = feedback_charge(score_pair(current, calib, weights)?.score, feedback[pos], median);
        let others: Vec<usize> = out
            .assignments
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .flat_map(|(_, x)| x.pair)
            .collect();
        let in_use: BTreeSet<(usize, usize)> = out
            .assignments
            .iter()
            .map(|x| (x.pair[0].min(x.pair[1]), x.pair[0].max(x.pair[1])))
            .collect();
        let pick = alternatives.iter().find(|c| {
            let (p, q) = c.edge;
            !in_use.contains(&c.edge)
                && !retired.contains(&c.edge)
                && others
                    .iter()
                    .all(|&o| dist[p][o] >= out.min_separation && dist[q][o] >= out.min_separation)
        });
        if let Some(c) = pick {
            if c.score < charge - SCORE_EPS {
                retired.insert(current);
                out.assignments[pos].pair = [c.edge.0, c.edge.1];
            }
        }
    }
    Ok(out)
}

/// Score of a coupler inflated by how much worse than typical its circuit ran.
pub fn feedback_charge(score: f64, feedback: f64, median: f64) -> f64 {
    if feedback <= median {
        score
    } else if median > 0.0 {
        score * feedback / median
    } else {
        f64::INFINITY
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
