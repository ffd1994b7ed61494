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

//! Quantized Battle of the Sexes on a modeled NISQ processor.
//!
//! The crate is organized bottom-up:
//!
//! * [`statevec`] exact dense statevector simulation and shot sampling,
//! * [`game`] payoff matrices, the classical mixed equilibrium, the entangled
//!   game circuit and closed-form reference payoffs,
//! * [`device`] coupling graphs (heavy-hex generator, JSON files) and
//!   calibration snapshots,
//! * [`gcm`] guided circuit mapping: choosing mutually separated low-error
//!   qubit pairs and refining the choice from run feedback,
//! * [`noise`] two-qubit density-matrix execution with depolarizing, readout
//!   and crosstalk channels, and whole-job simulation,
//! * [`stats`] aggregation, Student-t intervals, RMSE and relative errors,
//! * [`experiment`] and [`cli`] sweep orchestration and the command line.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod device;
mod error;
pub mod experiment;
pub mod game;
pub mod gcm;
pub mod noise;
pub mod plot;
pub mod seeding;
pub mod statevec;
pub mod stats;

pub use error::{Error, Result};
