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

use thiserror::Error;

/// Errors raised by graph construction, the estimators and the oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(u64),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u64),
    #[error("edge {0}-{1} declared more than once")]
    DuplicateEdge(u64, u64),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(u64, u64),
    #[error("cannot contract vertex {0} with itself")]
    SameVertex(u64),
    #[error("shore must be a proper nonempty vertex subset")]
    ImproperShore,
    #[error("shore splits the group of current vertex {0}")]
    ShoreSplitsGroup(u64),
    #[error("graph needs at least {0} vertices")]
    TooFewVertices(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} = {actual} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, actual: u64, cap: u64 },
    #[error("cut collection is empty")]
    EmptyCollection,
    #[error("cut collection holds no minimum cut (c = {0})")]
    NoMinCut(u64),
    #[error("replayed cut does not match record: {0}")]
    ReconstructMismatch(String),
    #[error("alpha = {alpha} outside [{lo}, {hi}]")]
    AlphaOutOfRange { alpha: f64, lo: f64, hi: f64 },
    #[error("malformed collection file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
