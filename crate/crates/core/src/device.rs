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

//! Processor model: coupling graph and calibration snapshot.
//!
//! File formats (JSON):
//!
//! ```text
//! coupling map:  { "num_qubits": N, "edges": [[a, b], ...] }
//! calibration:   { "timestamp": "...",
//!                  "qubits": [{"id": 0, "readout_error": .., "t1_us": .., "t2_us": ..}, ...],
//!                  "edges":  [{"pair": [a, b], "two_qubit_error": ..}, ...] }
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seeding::rng_for;
use crate::{Error, Result};

/// Undirected coupling graph. Edges are stored as `(min, max)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingGraph {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct CouplingMapFile {
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
}

impl CouplingGraph {
    /// Validates and normalizes an edge list.
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop on qubit {a}")));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) references a qubit >= {num_qubits}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::Validation(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            list.push(e);
        }
        let mut adjacency = vec![Vec::new(); num_qubits];
        for &(a, b) in &list {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for n in &mut adjacency {
            n.sort_unstable();
        }
        Ok(CouplingGraph {
            num_qubits,
            edges: list,
            adjacency,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// BFS hop counts from `source`; `usize::MAX` marks unreachable qubits.
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_qubits];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn all_pairs_distances(&self) -> Vec<Vec<usize>> {
        (0..self.num_qubits).map(|q| self.distances_from(q)).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.num_qubits == 0 || self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    pub fn to_json(&self) -> String {
        let file = CouplingMapFile {
            num_qubits: self.num_qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("coupling map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CouplingMapFile = serde_json::from_str(text).map_err(|e| Error::from_json(&e))?;
        CouplingGraph::new(file.num_qubits, file.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

pub fn load_coupling_map(path: impl AsRef<Path>) -> Result<CouplingGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    CouplingGraph::from_json(&text)
}

pub fn save_coupling_map(graph: &CouplingGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, graph.to_json())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Heavy-hex lattice in the row layout of IBM's Hummingbird/Eagle/Osprey
/// processors.
///
/// `distance` (odd, >= 3) is the number of qubit rows; each row is
/// `2 * distance + 1` qubits wide except the first (missing its last column)
/// and the last (missing its first column). Consecutive rows are joined by
/// bridge qubits every fourth column, starting at column 0 below even rows
/// and column 2 below odd rows. Qubits are numbered row by row with each
/// bridge layer following its upper row.
///
/// `distance = 5, 7, 13` give 65, 127 and 433 qubits.
pub fn heavy_hex_graph(distance: usize) -> Result<CouplingGraph> {
    if distance < 3 || distance.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "heavy-hex distance must be odd and >= 3, got {distance}"
        )));
    }
    let rows = distance;
    let width = 2 * distance + 1;
    let mut next = 0usize;
    let mut edges = Vec::new();
    let mut pending_bridges: Vec<(usize, usize)> = Vec::new(); // (column, bridge qubit)

    for r in 0..rows {
        let cols = match r {
            0 => 0..width - 1,
            _ if r == rows - 1 => 1..width,
            _ => 0..width,
        };
        // column -> qubit
        let mut row = HashMap::new();
        let mut last: Option<usize> = None;
        for col in cols {
            let q = next;
            next += 1;
            row.insert(col, q);
            if let Some(p) = last {
                edges.push((p, q));
            }
            last = Some(q);
        }
        for &(col, bridge) in &pending_bridges {
            edges.push((bridge, row[&col]));
        }
        pending_bridges.clear();
        if r + 1 < rows {
            let start = if r % 2 == 0 { 0 } else { 2 };
            for col in (start..width).step_by(4) {
                if let Some(&upper) = row.get(&col) {
                    let bridge = next;
                    next += 1;
                    edges.push((upper, bridge));
                    pending_bridges.push((col, bridge));
                }
            }
        }
    }
    CouplingGraph::new(next, edges)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub id: usize,
    pub readout_error: f64,
    pub t1_us: f64,
    pub t2_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCalibration {
    pub pair: [usize; 2],
    pub two_qubit_error: f64,
}

/// Per-qubit and per-edge device figures at one point in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSnapshot {
    pub timestamp: String,
    pub qubits: Vec<QubitCalibration>,
    pub edges: Vec<EdgeCalibration>,
    #[serde(skip)]
    index: CalibrationIndex,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct CalibrationIndex {
    qubits: BTreeMap<usize, usize>,
    edges: BTreeMap<(usize, usize), usize>,
}

impl CalibrationSnapshot {
    pub fn new(
        timestamp: impl Into<String>,
        qubits: Vec<QubitCalibration>,
        edges: Vec<EdgeCalibration>,
    ) -> Result<Self> {
        let mut snap = CalibrationSnapshot {
            timestamp: timestamp.into(),
            qubits,
            edges,
            index: CalibrationIndex::default(),
        };
        snap.reindex()?;
        Ok(snap)
    }

    fn reindex(&mut self) -> Result<()> {
        let mut index = CalibrationIndex::default();
        for (i, q) in self.qubits.iter().enumerate() {
            check_probability(q.readout_error, || format!("qubit {} readout_error", q.id))?;
            if !(q.t1_us > 0.0 && q.t1_us.is_finite()) || !(q.t2_us > 0.0 && q.t2_us.is_finite()) {
                return Err(Error::Validation(format!(
                    "qubit {} coherence times must be positive (t1 = {}, t2 = {})",
                    q.id, q.t1_us, q.t2_us
                )));
            }
            if index.qubits.insert(q.id, i).is_some() {
                return Err(Error::Validation(format!("qubit {} listed twice", q.id)));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let [a, b] = e.pair;
            check_probability(e.two_qubit_error, || format!("edge ({a}, {b}) two_qubit_error"))?;
            if index.edges.insert((a.min(b), a.max(b)), i).is_some() {
                return Err(Error::Validation(format!("edge ({a}, {b}) listed twice")));
            }
        }
        self.index = index;
        Ok(())
    }

    /// Checks that every qubit and edge of `graph` has an entry.
    pub fn validate_against(&self, graph: &CouplingGraph) -> Result<()> {
        if let Some(q) = (0..graph.num_qubits()).find(|q| !self.index.qubits.contains_key(q)) {
            return Err(Error::Validation(format!("no calibration for qubit {q}")));
        }
        if let Some(&(a, b)) = graph
            .edges()
            .iter()
            .find(|e| !self.index.edges.contains_key(e))
        {
            return Err(Error::Validation(format!("no calibration for edge ({a}, {b})")));
        }
        Ok(())
    }

    pub fn qubit(&self, id: usize) -> Result<&QubitCalibration> {
        self.index
            .qubits
            .get(&id)
            .map(|&i| &self.qubits[i])
            .ok_or_else(|| Error::Lookup(format!("qubit {id} not in calibration")))
    }

    pub fn edge(&self, a: usize, b: usize) -> Result<&EdgeCalibration> {
        self.index
            .edges
            .get(&(a.min(b), a.max(b)))
            .map(|&i| &self.edges[i])
            .ok_or_else(|| Error::Lookup(format!("edge ({a}, {b}) not in calibration")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut snap: CalibrationSnapshot =
            serde_json::from_str(text).map_err(|e| Error::from_json(&e))?;
        snap.reindex()?;
        Ok(snap)
    }
}

fn check_probability(p: f64, what: impl FnOnce() -> String) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Validation(format!("{} = {p} is not a probability", what())));
    }
    Ok(())
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<CalibrationSnapshot> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    CalibrationSnapshot::from_json(&text)
}

pub fn save_calibration(calib: &CalibrationSnapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, calib.to_json())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationProfile {
    Uniform,
    #[default]
    Realistic,
}

impl std::str::FromStr for CalibrationProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(CalibrationProfile::Uniform),
            "realistic" => Ok(CalibrationProfile::Realistic),
            other => Err(Error::Parameter(format!("unknown calibration profile {other:?}"))),
        }
    }
}

pub const UNIFORM_TWO_QUBIT_ERROR: f64 = 1e-2;
pub const UNIFORM_READOUT_ERROR: f64 = 2e-2;
pub const TYPICAL_T1_US: f64 = 286.0;
pub const TYPICAL_T2_US: f64 = 226.0;
pub const MIN_TWO_QUBIT_ERROR: f64 = 2.5e-3;
pub const MAX_TWO_QUBIT_ERROR: f64 = 3e-2;
pub const MIN_READOUT_ERROR: f64 = 5e-3;
pub const MAX_READOUT_ERROR: f64 = 5e-2;

const SYNTH_TIMESTAMP: &str = "2025-01-01T00:00:00Z";

/// Deterministic synthetic calibration for `graph`.
///
/// `Realistic` draws two-qubit errors log-uniformly in [2.5e-3, 3e-2],
/// readout errors log-uniformly in [5e-3, 5e-2], T1 uniformly in
/// [0.6, 1.4] x 286 us and T2 uniformly in [0.6, 1.4] x 226 us capped at 2 T1.
pub fn synth_calibration(
    graph: &CouplingGraph,
    seed: u64,
    profile: CalibrationProfile,
) -> CalibrationSnapshot {
    let mut rng = rng_for(seed, &[0xCA1B]);
    let mut log_uniform = |lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
    let qubits: Vec<QubitCalibration> = match profile {
        CalibrationProfile::Uniform => (0..graph.num_qubits())
            .map(|id| QubitCalibration {
                id,
                readout_error: UNIFORM_READOUT_ERROR,
                t1_us: TYPICAL_T1_US,
                t2_us: TYPICAL_T2_US,
            })
            .collect(),
        CalibrationProfile::Realistic => (0..graph.num_qubits())
            .map(|id| {
                let readout_error = log_uniform(MIN_READOUT_ERROR, MAX_READOUT_ERROR);
                let t1 = TYPICAL_T1_US * log_uniform(0.6, 1.4);
                let t2 = (TYPICAL_T2_US * log_uniform(0.6, 1.4)).min(2.0 * t1);
                QubitCalibration {
                    id,
                    readout_error,
                    t1_us: t1,
                    t2_us: t2,
                }
            })
            .collect(),
    };
    let edges = graph
        .edges()
        .iter()
        .map(|&(a, b)| EdgeCalibration {
            pair: [a, b],
            two_qubit_error: match profile {
                CalibrationProfile::Uniform => UNIFORM_TWO_QUBIT_ERROR,
                CalibrationProfile::Realistic => {
                    log_uniform(MIN_TWO_QUBIT_ERROR, MAX_TWO_QUBIT_ERROR)
                }
            },
        })
        .collect();
    CalibrationSnapshot::new(SYNTH_TIMESTAMP, qubits, edges).expect("synthetic values are valid")
}
