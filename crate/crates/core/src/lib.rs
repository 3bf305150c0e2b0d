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

//! Estimating the probability that a multigraph disconnects when every edge
//! fails independently with probability `p`.
//!
//! The estimator enumerates the small cuts of the graph with a recursive
//! contraction scheme, stores them compactly in a hashed catalogue, and then
//! estimates the probability that at least one catalogued cut fails by
//! importance sampling. A preliminary Monte-Carlo gate routes instances with
//! large failure probability to plain Monte-Carlo sampling instead.
//!
//! Small instances can be checked against the exact brute-force routines in
//! [`oracle`]; the closed-form bound functions used in the analysis live in
//! [`bounds`].

pub mod bounds;
pub mod contraction;
pub mod corpus;
pub mod cutstore;
pub mod error;
pub mod estimator;
pub mod multigraph;
pub mod oracle;
pub mod pipeline;
pub mod rca;
pub mod rng;
mod util;

pub use error::{Error, Result};
pub use multigraph::{Cut, MultiGraph, VertexSet};
pub use rng::StreamKey;
pub use util::{log_log_slope, KahanSum};
