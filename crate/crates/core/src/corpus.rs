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

//! Named small graphs used for testing and benchmarking.

use crate::bounds::make_odd_cycle_graph;
use crate::error::{Error, Result};
use crate::multigraph::MultiGraph;

/// Builds a graph from a short name: `k2x<mult>`, `k<n>`, `c<n>`, `p<n>`,
/// `odd<n>x<c>` or `dumbbell`.
pub fn named(name: &str) -> Result<MultiGraph> {
    let bad = || Error::InvalidParameter(format!("unknown graph name {name:?}"));
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    if name == "dumbbell" {
        return Ok(MultiGraph::dumbbell());
    }
    if let Some(rest) = name.strip_prefix("k2x") {
        return Ok(MultiGraph::two_vertex(num(rest)? as u64));
    }
    if let Some(rest) = name.strip_prefix("odd") {
        let (n, c) = rest.split_once('x').ok_or_else(bad)?;
        return make_odd_cycle_graph(num(n)?, num(c)? as u64);
    }
    let (kind, rest) = name.split_at(1.min(name.len()));
    let n = num(rest)?;
    match kind {
        "k" if n >= 2 => Ok(MultiGraph::complete(n)),
        "c" if n >= 3 => Ok(MultiGraph::cycle(n)),
        "p" if n >= 2 => Ok(MultiGraph::path(n)),
        _ => Err(bad()),
    }
}

/// The end-to-end test corpus: every graph is small enough for the exact
/// oracle.
pub const SMALL: [&str; 10] = ["k2x1", "k2x2", "k2x3", "k3", "k4", "c4", "c5", "c6", "odd5x3", "dumbbell"];

/// Corpus graphs with an odd min-cut, used for trajectory checks.
pub const ODD_MIN_CUT: [&str; 8] = ["p8", "dumbbell", "odd8x3", "odd16x3", "odd12x5", "odd32x3", "odd48x5", "odd64x3"];

pub fn small() -> Vec<(&'static str, MultiGraph)> {
    SMALL.iter().map(|&s| (s, named(s).expect("corpus names are valid"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(named("k2x3").unwrap().mult(1, 2), 3);
        assert_eq!(named("k4").unwrap().m(), 6);
        assert_eq!(named("c6").unwrap().m(), 6);
        assert_eq!(named("p5").unwrap().m(), 4);
        assert_eq!(named("odd5x3").unwrap().min_cut().unwrap().0, 3);
        assert_eq!(named("dumbbell").unwrap().n(), 6);
        for bad in ["", "k", "k1", "c2", "odd5x4", "x7", "k2xq"] {
            assert!(named(bad).is_err(), "{bad}");
        }
        for (_, g) in small() {
            assert!(g.is_connected());
        }
        for s in ODD_MIN_CUT {
            assert_eq!(named(s).unwrap().min_cut().unwrap().0 % 2, 1, "{s}");
        }
    }
}
