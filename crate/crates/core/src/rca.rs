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

//! Recursive contraction.
//!
//! A run is a tree. Each internal node holds a contracted graph with `r`
//! vertices; each of its children independently contracts a copy of it to
//! the target size for `r`, so the work above a node is shared by its whole
//! subtree. Once a node has at most `⌈2α⌉` vertices it is a leaf and emits
//! one uniformly random cut as a [`CutRecord`].
//!
//! Two shapes are supported: 4 children with halving (`RcaKind::Halving`)
//! and 2 children with reduction factor `2^(2/5)` (`RcaKind::Rca2`), whose
//! node count grows as `n^(5/2)`.
//!
//! The random stream of a child is derived from its parent's key and its
//! child index, so any leaf can be regenerated from the run key and the
//! root-to-leaf path alone; that is how [`reconstruct`] works.

use serde::{Deserialize, Serialize};

use crate::contraction::{check_alpha, draw_leaf_sides, leaf_weight, stop_size};
use crate::cutstore::{CutCollection, CutRecord, HashTable, RecordPointer, TreePath};
use crate::error::{Error, Result};
use crate::multigraph::{Adjacency, Cut, MultiGraph};
use crate::rng::{tag, StreamKey, StreamRng};
use crate::util::par_map;

/// Child index reserved for the leaf's final cut draw.
const LEAF_TAG: u64 = u64::MAX;

/// Shrink factor per RCA2 level, `2^(-2/5)`.
const RCA2_SHRINK: f64 = 0.757_858_283_255_198_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RcaKind {
    /// Halve the vertex count per level.
    Halving,
    /// Shrink by `2^(2/5)` per level.
    Rca2,
}

impl RcaKind {
    pub(crate) fn code(self) -> u8 {
        match self {
            RcaKind::Halving => 0,
            RcaKind::Rca2 => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(RcaKind::Halving),
            1 => Ok(RcaKind::Rca2),
            _ => Err(Error::Format(format!("unknown recursion kind {c}"))),
        }
    }

    pub fn default_branching(self) -> u8 {
        match self {
            RcaKind::Halving => 4,
            RcaKind::Rca2 => 2,
        }
    }
}

/// Shape of a recursion tree; shared by every record of a collection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplaySpec {
    pub kind: RcaKind,
    pub alpha: f64,
    pub branching: u8,
}

impl ReplaySpec {
    pub fn new(kind: RcaKind, alpha: f64, branching: u8) -> Result<Self> {
        check_alpha(alpha)?;
        if !(1..=4).contains(&branching) {
            return Err(Error::InvalidParameter(format!("branching {branching} outside 1..=4")));
        }
        Ok(ReplaySpec { kind, alpha, branching })
    }

    /// Leaf size `⌈2α⌉`.
    pub fn leaf_size(&self) -> usize {
        stop_size(self.alpha)
    }

    /// Vertex count of the children of an `r`-vertex node (`r` above the
    /// leaf size).
    pub fn target(&self, r: usize) -> usize {
        let k = self.leaf_size();
        match self.kind {
            RcaKind::Halving => r.div_ceil(2).max(k),
            // Without the `r - 1` cap, ⌈4 · 2^(-2/5)⌉ = 4 would never shrink.
            RcaKind::Rca2 => ((r as f64 * RCA2_SHRINK).ceil() as usize).min(r - 1).max(k),
        }
    }

    /// Number of levels below the root for an `n`-vertex input.
    pub fn depth(&self, n: usize) -> usize {
        let k = self.leaf_size();
        let mut r = n;
        let mut d = 0;
        while r > k {
            r = self.target(r);
            d += 1;
        }
        d
    }

    /// Leaves per run, saturating.
    pub fn leaves(&self, n: usize) -> u64 {
        (self.branching as u64).saturating_pow(self.depth(n) as u32)
    }
}

/// Result of one recursion tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcaRun {
    pub seed: StreamKey,
    pub alpha: f64,
    pub kind: RcaKind,
    /// `⌊log2(n / ⌈2α⌉)⌋`, the depth of a pure halving tree.
    pub depth_limit: u32,
    /// Levels actually used by the chosen reduction rule.
    pub depth: u32,
    pub emitted: Vec<CutRecord>,
    pub node_count: u64,
}

/// Contracted graph plus the running hash of every vertex group and the
/// position of the vertex holding original vertex 1.
#[derive(Clone)]
struct NodeState {
    adj: Adjacency,
    tags: Vec<u64>,
    anchor: usize,
}

impl NodeState {
    fn new(g: &MultiGraph, table: &HashTable) -> Self {
        let mask = table.mask();
        let tags = (1..=g.n())
            .map(|u| g.group(u).iter().fold(0u64, |a, &x| a.wrapping_add(table.value(x)) & mask))
            .collect();
        NodeState { adj: g.adj.compact(), tags, anchor: g.locate(1).expect("vertex 1 exists") - 1 }
    }

    fn contract_to(&mut self, t: usize, rng: &mut StreamRng, mask: u64) {
        while self.adj.n() > t {
            let (u, v) = self.adj.pick(rng);
            let (keep, gone) = (u.min(v), u.max(v));
            let last = self.adj.n() - 1;
            self.adj.merge(keep, gone);
            self.tags[keep] = self.tags[keep].wrapping_add(self.tags[gone]) & mask;
            self.tags.swap_remove(gone);
            if self.anchor == gone {
                self.anchor = keep;
            } else if self.anchor == last {
                self.anchor = gone;
            }
        }
    }

    fn compact(&self) -> Self {
        NodeState { adj: self.adj.compact(), tags: self.tags.clone(), anchor: self.anchor }
    }
}

struct Walker {
    spec: ReplaySpec,
    run_key: StreamKey,
    mask: u64,
    nodes: u64,
}

impl Walker {
    fn visit(&mut self, state: NodeState, key: StreamKey, path: TreePath, sink: &mut dyn FnMut(CutRecord)) {
        self.nodes += 1;
        let r = state.adj.n();
        if r <= self.spec.leaf_size() {
            let mut rng = key.child(LEAF_TAG).rng();
            let sides = draw_leaf_sides(r, state.anchor, &mut rng);
            let id = sides
                .iter()
                .zip(&state.tags)
                .filter(|(s, _)| **s)
                .fold(0u64, |a, (_, &t)| a.wrapping_add(t) & self.mask);
            let weight = leaf_weight(&state.adj, &sides);
            sink(CutRecord { id, weight, pointer: RecordPointer { seed: self.run_key, path } });
            return;
        }
        let t = self.spec.target(r);
        for i in 0..self.spec.branching {
            let child_key = key.child(i as u64);
            let mut child = if i + 1 == self.spec.branching { state.clone() } else { state.compact() };
            child.contract_to(t, &mut child_key.rng(), self.mask);
            self.visit(child, child_key, path.push(i), sink);
        }
    }
}

fn validate_input(g: &MultiGraph) -> Result<()> {
    if g.n() < 2 {
        return Err(Error::TooFewVertices(2));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Runs one recursion tree, passing every leaf record to `sink`. Returns
/// the number of tree nodes visited.
pub fn run_tree_with(
    g: &MultiGraph,
    spec: &ReplaySpec,
    key: StreamKey,
    table: &HashTable,
    sink: &mut dyn FnMut(CutRecord),
) -> Result<u64> {
    validate_input(g)?;
    if table.orig_n() != g.orig_n() {
        return Err(Error::InvalidParameter("hash table sized for a different graph".into()));
    }
    let mut w = Walker { spec: *spec, run_key: key, mask: table.mask(), nodes: 0 };
    w.visit(NodeState::new(g, table), key, TreePath::default(), sink);
    Ok(w.nodes)
}

/// Runs one recursion tree and collects its records.
pub fn run_tree(g: &MultiGraph, spec: &ReplaySpec, key: StreamKey, table: &HashTable) -> Result<RcaRun> {
    let mut emitted = Vec::with_capacity(spec.leaves(g.n()).min(1 << 20) as usize);
    let node_count = run_tree_with(g, spec, key, table, &mut |r| emitted.push(r))?;
    let k = spec.leaf_size();
    let depth_limit = if g.n() > k { (g.n() as f64 / k as f64).log2().floor() as u32 } else { 0 };
    Ok(RcaRun {
        seed: key,
        alpha: spec.alpha,
        kind: spec.kind,
        depth_limit,
        depth: spec.depth(g.n()) as u32,
        emitted,
        node_count,
    })
}

/// Recursive Contraction Algorithm: 4 children per node, halving.
pub fn run_rca(g: &MultiGraph, alpha: f64, key: StreamKey, table: &HashTable) -> Result<RcaRun> {
    run_tree(g, &ReplaySpec::new(RcaKind::Halving, alpha, 4)?, key, table)
}

/// Accepted `α` range for RCA2 on `n` vertices.
pub fn rca2_alpha_range(n: usize) -> (f64, f64) {
    (1.5, (n as f64).sqrt())
}

/// RCA2: 2 children per node, shrinking by `2^(2/5)` per level. Requires
/// `3/2 <= α <= √n`.
pub fn run_rca2(g: &MultiGraph, alpha: f64, key: StreamKey, table: &HashTable) -> Result<RcaRun> {
    let (lo, hi) = rca2_alpha_range(g.n());
    if !(alpha >= lo && alpha <= hi) {
        return Err(Error::AlphaOutOfRange { alpha, lo, hi });
    }
    run_tree(g, &ReplaySpec::new(RcaKind::Rca2, alpha, 2)?, key, table)
}

/// Regenerates the cut of `record` by replaying its path from the run key.
pub fn reconstruct(record: &CutRecord, g: &MultiGraph, spec: &ReplaySpec, table: &HashTable) -> Result<Cut> {
    let k = spec.leaf_size();
    let mut h = g.clone();
    let mut key = record.pointer.seed;
    for (level, step) in record.pointer.path.steps().enumerate() {
        if h.n() <= k {
            return Err(Error::ReconstructMismatch(format!("path continues below the leaf at level {level}")));
        }
        if step >= spec.branching {
            return Err(Error::ReconstructMismatch(format!("child index {step} at level {level}")));
        }
        let t = spec.target(h.n());
        key = key.child(step as u64);
        let mut rng = key.rng();
        while h.n() > t {
            let (u, v) = h.adj.pick(&mut rng);
            h.contract_in_place(u, v);
        }
    }
    if h.n() > k {
        return Err(Error::ReconstructMismatch("path ends above the leaf level".into()));
    }
    let anchor = h.locate(1).expect("vertex 1 exists") - 1;
    let sides = draw_leaf_sides(h.n(), anchor, &mut key.child(LEAF_TAG).rng());
    let weight = leaf_weight(&h.adj, &sides);
    let shore = h.shore_of(|u| sides[u]);
    let id = table.id_of(&shore)?;
    if id != record.id || weight != record.weight {
        return Err(Error::ReconstructMismatch(format!(
            "expected id {} weight {}, replay gave id {id} weight {weight}",
            record.id, record.weight
        )));
    }
    Ok(Cut { shore, weight })
}

/// Independent halving runs used by [`enumerate_alpha_cuts`] when RCA2 is
/// unavailable: `⌈C_enum · 2α · n^max(0, 2α-2) · ln² n⌉`.
pub fn halving_run_count(n: usize, alpha: f64, c_enum: f64) -> u64 {
    let ln = (n.max(2) as f64).ln();
    let x = c_enum * 2.0 * alpha * (n as f64).powf((2.0 * alpha - 2.0).max(0.0)) * ln * ln;
    (x.ceil() as u64).max(1)
}

/// RCA2 runs used by [`enumerate_alpha_cuts`]: `⌈C_enum · n^(2α-5/2) · ln n⌉`.
pub fn rca2_run_count(n: usize, alpha: f64, c_enum: f64) -> u64 {
    let x = c_enum * (n as f64).powf(2.0 * alpha - 2.5) * (n.max(2) as f64).ln();
    (x.ceil() as u64).max(1)
}

/// Default run-count constant for [`enumerate_alpha_cuts`]. Smaller values
/// leave a visible fraction of runs incomplete on 8-vertex graphs.
pub const DEFAULT_C_ENUM: f64 = 16.0;

/// Enumerates (with high probability) every cut of weight at most `α c`.
pub fn enumerate_alpha_cuts(g: &MultiGraph, alpha: f64, key: StreamKey, c_enum: f64) -> Result<CutCollection> {
    check_alpha(alpha)?;
    if !(c_enum.is_finite() && c_enum > 0.0) {
        return Err(Error::InvalidParameter(format!("C_enum = {c_enum} must be positive")));
    }
    validate_input(g)?;
    let n = g.n();
    let (c, _) = g.min_cut()?;
    let (lo, hi) = rca2_alpha_range(n);
    let (spec, mut runs) = if alpha >= lo && alpha <= hi {
        (ReplaySpec::new(RcaKind::Rca2, alpha, 2)?, rca2_run_count(n, alpha, c_enum))
    } else {
        (ReplaySpec::new(RcaKind::Halving, alpha, 4)?, halving_run_count(n, alpha, c_enum))
    };
    if spec.leaf_size() >= n {
        runs = runs.min(uniform_run_count(n, c_enum));
    }
    let table = HashTable::new(g.orig_n(), runs.saturating_mul(spec.leaves(n)), 3.0, key.child(tag::HASH_TABLE))?;
    let limit = alpha * c as f64 + 1e-9;
    let runs_key = key.child(tag::RCA_RUNS);
    let batches = par_map(runs, |i| {
        let mut kept = Vec::new();
        run_tree_with(g, &spec, runs_key.child(i), &table, &mut |r| {
            if r.weight as f64 <= limit {
                kept.push(r);
            }
        })
        .expect("input validated");
        kept
    });
    Ok(CutCollection::unweighted(batches.concat(), table, spec))
}

/// Runs needed when every run is a single uniform draw over all
/// `N = 2^(n-1) - 1` cuts: `⌈N (ln N + C_enum)⌉`, which misses a given cut
/// with probability at most `e^-C_enum / N`.
pub fn uniform_run_count(n: usize, c_enum: f64) -> u64 {
    let cuts = 2f64.powi(n as i32 - 1) - 1.0;
    let x = cuts * (cuts.max(1.0).ln() + c_enum);
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        (x.ceil() as u64).max(1)
    }
}

/// RCA runs for the cut branch of the pipeline: `⌈C_pipe · n³ · ε^-2⌉`.
pub fn rca_iteration_budget(n: usize, eps: f64, c_pipe: f64) -> Result<u64> {
    if n < 2 {
        return Err(Error::TooFewVertices(2));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1/2]")));
    }
    if !(c_pipe.is_finite() && c_pipe > 0.0) {
        return Err(Error::InvalidParameter(format!("C_pipe = {c_pipe} must be positive")));
    }
    let nf = n as f64;
    Ok((c_pipe * nf * nf * nf / (eps * eps)).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::VertexSet;
    use crate::oracle::Oracle;

    fn table_for(g: &MultiGraph, seed: u64) -> HashTable {
        HashTable::new(g.orig_n(), 1 << 20, 3.0, StreamKey::from_seed(seed)).unwrap()
    }

    #[test]
    fn halving_shape() {
        let spec = ReplaySpec::new(RcaKind::Halving, 2.0, 4).unwrap();
        assert_eq!((spec.target(16), spec.target(8)), (8, 4));
        assert_eq!(spec.depth(16), 2);
        let g = MultiGraph::cycle(16);
        let run = run_rca(&g, 2.0, StreamKey::from_seed(1), &table_for(&g, 1)).unwrap();
        assert_eq!((run.depth_limit, run.depth), (2, 2));
        assert_eq!(run.emitted.len(), 16);
        assert_eq!(run.node_count, 1 + 4 + 16);
    }

    #[test]
    fn rca2_shape() {
        let spec = ReplaySpec::new(RcaKind::Rca2, 1.5, 2).unwrap();
        assert_eq!(spec.target(32), 25);
        assert_eq!(spec.target(4), 3);
        assert_eq!(spec.target(5), 4);
    }

    #[test]
    fn small_inputs_emit_one_leaf() {
        let g = MultiGraph::complete(3);
        let t = table_for(&g, 2);
        let run = run_rca(&g, 1.5, StreamKey::from_seed(2), &t).unwrap();
        assert_eq!((run.node_count, run.emitted.len()), (1, 1));
        let cut = reconstruct(&run.emitted[0], &g, &ReplaySpec::new(RcaKind::Halving, 1.5, 4).unwrap(), &t).unwrap();
        assert_eq!(cut.weight, 2);
        let g4 = MultiGraph::complete(4);
        let run = run_rca2(&g4, 2.0, StreamKey::from_seed(2), &table_for(&g4, 2)).unwrap();
        assert_eq!(run.emitted.len(), 1);
    }

    #[test]
    fn rca2_alpha_range_enforced() {
        let g = MultiGraph::cycle(9);
        let t = table_for(&g, 3);
        assert!(matches!(run_rca2(&g, 1.2, StreamKey::from_seed(3), &t), Err(Error::AlphaOutOfRange { .. })));
        assert!(matches!(run_rca2(&g, 3.5, StreamKey::from_seed(3), &t), Err(Error::AlphaOutOfRange { .. })));
        assert!(run_rca2(&g, 3.0, StreamKey::from_seed(3), &t).is_ok());
    }

    #[test]
    fn every_record_replays() {
        let graphs = [MultiGraph::cycle(13), MultiGraph::dumbbell(), MultiGraph::complete(7)];
        for (gi, g) in graphs.iter().enumerate() {
            let t = table_for(g, gi as u64);
            for spec in [
                ReplaySpec::new(RcaKind::Halving, 1.0, 4).unwrap(),
                ReplaySpec::new(RcaKind::Halving, 1.5, 3).unwrap(),
                ReplaySpec::new(RcaKind::Rca2, 1.5, 2).unwrap(),
            ] {
                let run = run_tree(g, &spec, StreamKey::from_seed(40 + gi as u64), &t).unwrap();
                for r in &run.emitted {
                    let cut = reconstruct(r, g, &spec, &t).unwrap();
                    assert_eq!(g.cut_weight(&cut.shore).unwrap().weight, r.weight);
                    assert_eq!(t.id_of(&cut.shore).unwrap(), r.id);
                }
            }
        }
    }

    #[test]
    fn tampered_records_fail_to_replay() {
        let g = MultiGraph::cycle(16);
        let t = table_for(&g, 5);
        let spec = ReplaySpec::new(RcaKind::Halving, 1.0, 4).unwrap();
        let run = run_tree(&g, &spec, StreamKey::from_seed(5), &t).unwrap();
        let mut mismatches = 0;
        for r in &run.emitted {
            let first = r.pointer.path.get(0);
            let steps: Vec<u8> = r.pointer.path.steps().collect();
            let mut altered = steps.clone();
            altered[0] = (first + 1) % 4;
            let bad = CutRecord { pointer: RecordPointer { path: TreePath::from_steps(&altered).unwrap(), ..r.pointer }, ..*r };
            if reconstruct(&bad, &g, &spec, &t).is_err() {
                mismatches += 1;
            }
            let short = CutRecord { pointer: RecordPointer { path: TreePath::from_steps(&steps[..1]).unwrap(), ..r.pointer }, ..*r };
            assert!(reconstruct(&short, &g, &spec, &t).is_err());
        }
        assert!(mismatches >= run.emitted.len() * 3 / 4);
    }

    #[test]
    fn iteration_budget() {
        assert_eq!(rca_iteration_budget(10, 0.5, 1.0).unwrap(), 4000);
        assert_eq!(rca_iteration_budget(10, 0.25, 1.0).unwrap(), 16000);
        assert_eq!(rca_iteration_budget(20, 0.5, 1.0).unwrap(), 32000);
        assert!(rca_iteration_budget(10, 0.6, 1.0).is_err());
        assert!(rca_iteration_budget(10, 0.0, 1.0).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let o = Oracle::default();
        let c6 = MultiGraph::cycle(6);
        let a = enumerate_alpha_cuts(&c6, 1.0, StreamKey::from_seed(3), 8.0).unwrap();
        assert_eq!(a.len(), 15);
        let k4 = MultiGraph::complete(4);
        let a = enumerate_alpha_cuts(&k4, 1.0, StreamKey::from_seed(3), 8.0).unwrap();
        assert_eq!(a.len(), 4);
        for cut in o.alpha_cuts(&k4, 1.0).unwrap() {
            assert!(a.contains(&cut.shore, &k4).unwrap());
        }
        let other = VertexSet::from_vertices(4, [1, 2]).unwrap();
        assert!(!a.contains(&other, &k4).unwrap());
    }

    #[test]
    fn single_child_leaf_matches_ca_law() {
        // With one child per node the tree is a single contraction path, so
        // its leaf must follow the Contraction Algorithm's output law.
        let g = MultiGraph::complete(3);
        let t = table_for(&g, 9);
        let spec = ReplaySpec::new(RcaKind::Halving, 1.0, 1).unwrap();
        let o = Oracle::default();
        let cuts = o.all_cuts(&g).unwrap();
        let trials = 30_000u64;
        let mut counts = vec![0u64; cuts.len()];
        for i in 0..trials {
            let run = run_tree(&g, &spec, StreamKey::from_seed(9).child(i), &t).unwrap();
            let cut = reconstruct(&run.emitted[0], &g, &spec, &t).unwrap();
            counts[cuts.iter().position(|c| c.shore == cut.shore).unwrap()] += 1;
        }
        let mut chi2 = 0.0;
        for (cut, &obs) in cuts.iter().zip(&counts) {
            let e = trials as f64 * o.ca_selection_prob(&g, cut, 1.0).unwrap();
            chi2 += (obs as f64 - e).powi(2) / e;
        }
        // 2 degrees of freedom; 13.8 is the 0.999 quantile.
        assert!(chi2 < 13.8, "chi2 = {chi2}");
    }
}
