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

//! The Contraction Algorithm and the Contraction Process, instrumented.
//!
//! The algorithm contracts uniformly random edges until `⌈2α⌉` vertices
//! remain and then outputs a uniformly random cut of what is left. The
//! process is the same walk restricted to edges outside a protected set `L`;
//! when only protected edges remain it stops in the `bottom` state.
//!
//! Both record the edge count `M_r` of every intermediate graph, from which
//! the potential `S_i = Σ_{r>i} c / M_r` is computed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::{Adjacency, Cut, MultiGraph};
use crate::rng::StreamKey;
use crate::util::par_map;

/// `⌈2α⌉`, snapping values within 1e-9 of an integer so that decimal inputs
/// such as `1.5` or `4/3 * 3` never round up spuriously.
pub fn stop_size(alpha: f64) -> usize {
    let two = 2.0 * alpha;
    let r = two.round();
    if (two - r).abs() < 1e-9 {
        r as usize
    } else {
        two.ceil() as usize
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange { alpha, lo: 1.0, hi: f64::INFINITY })
    }
}

/// Side flags for a uniformly random cut of a `k`-vertex graph: `anchor`
/// (the vertex holding original vertex 1) is always on the shore, and the
/// remaining vertices are a uniform subset other than "all of them".
pub(crate) fn draw_leaf_sides<R: Rng + ?Sized>(k: usize, anchor: usize, rng: &mut R) -> Vec<bool> {
    debug_assert!(k >= 2 && anchor < k);
    loop {
        let mut sides = vec![true; k];
        let mut all = true;
        let mut bits = 0u64;
        for (i, s) in sides.iter_mut().enumerate() {
            if i == anchor {
                continue;
            }
            let j = if i < anchor { i } else { i - 1 };
            if j % 64 == 0 {
                bits = rng.random();
            }
            *s = (bits >> (j % 64)) & 1 == 1;
            all &= *s;
        }
        if !all {
            return sides;
        }
    }
}

/// One run of the Contraction Algorithm or Contraction Process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: StreamKey,
    pub alpha: f64,
    /// Contracted edges in order, each as the pair of smallest original
    /// vertices of the two merged groups.
    pub edges: Vec<(u32, u32)>,
    /// `counts[j]` is the edge count of the graph with `n - j` vertices.
    pub counts: Vec<u64>,
    pub n: usize,
    pub stop: usize,
    pub selected: Option<Cut>,
    pub bottom: bool,
}

impl Trajectory {
    /// Edge count `M_r` of the `r`-vertex graph, if that stage was reached.
    pub fn m_r(&self, r: usize) -> Option<u64> {
        if r > self.n {
            return None;
        }
        self.counts.get(self.n - r).copied()
    }

    /// Smallest vertex count recorded.
    pub fn last_r(&self) -> usize {
        self.n + 1 - self.counts.len()
    }

    /// Checks `M_r >= r c / 2` at every recorded stage.
    pub fn satisfies_degree_bound(&self, c: u64) -> bool {
        (self.last_r()..=self.n).all(|r| 2 * self.m_r(r).unwrap() >= r as u64 * c)
    }
}

/// Values `S_i` for `i = from..=n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialS {
    pub n: usize,
    pub from: usize,
    values: Vec<f64>,
}

impl PotentialS {
    pub fn s(&self, i: usize) -> Result<f64> {
        if i < self.from || i > self.n {
            return Err(Error::InvalidParameter(format!(
                "S_{i} outside the recorded range {}..={}",
                self.from, self.n
            )));
        }
        Ok(self.values[i - self.from])
    }

    /// `(i, S_i)` pairs in increasing `i`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(j, &s)| (self.from + j, s))
    }
}

/// Contracts `g` to `⌈2α⌉` vertices and draws a uniform cut.
pub fn run_ca(g: &MultiGraph, alpha: f64, key: StreamKey) -> Result<Trajectory> {
    check_alpha(alpha)?;
    if g.n() < 2 {
        return Err(Error::TooFewVertices(2));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let stop = stop_size(alpha).min(n);
    let mut rng = key.rng();
    let mut h = g.clone();
    let mut edges = Vec::with_capacity(n - stop);
    let mut counts = Vec::with_capacity(n - stop + 1);
    while h.n() > stop {
        counts.push(h.m());
        let (u, v) = h.adj.pick(&mut rng);
        edges.push(edge_label(&h, u, v));
        h.contract_in_place(u, v);
    }
    counts.push(h.m());
    let anchor = h.locate(1).expect("vertex 1 exists") - 1;
    let sides = draw_leaf_sides(h.n(), anchor, &mut rng);
    let shore = h.shore_of(|u| sides[u]);
    let weight = leaf_weight(&h.adj, &sides);
    Ok(Trajectory {
        seed: key,
        alpha,
        edges,
        counts,
        n,
        stop,
        selected: Some(Cut { shore, weight }),
        bottom: false,
    })
}

fn edge_label(h: &MultiGraph, u: usize, v: usize) -> (u32, u32) {
    let (a, b) = (h.representative(u + 1) as u32, h.representative(v + 1) as u32);
    (a.min(b), a.max(b))
}

pub(crate) fn leaf_weight(adj: &Adjacency, sides: &[bool]) -> u64 {
    let n = adj.n();
    let mut w = 0;
    for u in 0..n {
        if !sides[u] {
            continue;
        }
        for (v, &s) in sides.iter().enumerate() {
            if !s {
                w += adj.get(u, v);
            }
        }
    }
    w
}

/// Runs the Contraction Process: uniform contraction over edges outside
/// `protected` (triples `(u, v, count)` over current vertices of `g`) until
/// `stop` vertices remain or only protected edges are left.
pub fn run_cp(g: &MultiGraph, protected: &[(usize, usize, u64)], stop: usize, key: StreamKey) -> Result<Trajectory> {
    if stop == 0 {
        return Err(Error::InvalidParameter("stop must be at least 1".into()));
    }
    let n = g.n();
    let mut excl = Adjacency::new(n);
    for &(u, v, k) in protected {
        for x in [u, v] {
            if x == 0 || x > n {
                return Err(Error::VertexOutOfRange(x as u64));
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u as u64));
        }
        if excl.get(u - 1, v - 1) + k > g.mult(u, v) {
            return Err(Error::NotAdjacent(u as u64, v as u64));
        }
        excl.add(u - 1, v - 1, k);
    }
    let mut rng = key.rng();
    let mut h = g.clone();
    let mut edges = Vec::new();
    let mut counts = Vec::new();
    let mut bottom = false;
    while h.n() > stop {
        counts.push(h.m());
        match h.adj.pick_excluding(&excl, &mut rng) {
            None => {
                bottom = true;
                break;
            }
            Some((u, v)) => {
                edges.push(edge_label(&h, u, v));
                let (keep, gone) = (u.min(v), u.max(v));
                excl.merge(keep, gone);
                h.contract_in_place(keep, gone);
            }
        }
    }
    if !bottom {
        counts.push(h.m());
    }
    Ok(Trajectory { seed: key, alpha: stop as f64 / 2.0, edges, counts, n, stop, selected: None, bottom })
}

/// Potential `S_i = Σ_{r=i+1..n} c / M_r` for every `i` the trajectory
/// supports.
pub fn potential(traj: &Trajectory, c: u64) -> PotentialS {
    let n = traj.n;
    // S_i needs M_{i+1}..M_n, so the lowest supported i is one below the
    // lowest recorded stage.
    let from = traj.last_r().saturating_sub(1).max(1).max(traj.stop.min(n));
    let mut values = vec![0.0; n - from + 1];
    let mut acc = 0.0;
    for i in (from..n).rev() {
        acc += c as f64 / traj.m_r(i + 1).expect("stage recorded") as f64;
        values[i - from] = acc;
    }
    PotentialS { n, from, values }
}

/// Fraction of `trials` Contraction Algorithm runs that output `cut`.
pub fn survival_frequency(g: &MultiGraph, cut: &Cut, alpha: f64, trials: u64, key: StreamKey) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    check_alpha(alpha)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let hits = par_map(trials, |i| {
        let t = run_ca(g, alpha, key.child(i)).expect("inputs validated");
        t.selected.map(|s| s.shore == cut.shore).unwrap_or(false) as u64
    });
    Ok(hits.iter().sum::<u64>() as f64 / trials as f64)
}
