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

//! Multigraphs in adjacency-matrix form.
//!
//! Vertices are 1-indexed in every public signature. A [`MultiGraph`] may be
//! the result of contractions, in which case each current vertex stands for
//! a group of original vertices and cuts are always reported as shores over
//! the original vertex set.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A subset of `{1, ..., universe}` stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexSet {
    universe: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        VertexSet { universe, words: vec![0; universe.div_ceil(64)] }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for v in 1..=universe {
            s.insert(v);
        }
        s
    }

    /// Builds a set from 1-based vertex labels.
    pub fn from_vertices(universe: usize, vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(universe);
        for v in vertices {
            if v == 0 || v > universe {
                return Err(Error::VertexOutOfRange(v as u64));
            }
            s.insert(v);
        }
        Ok(s)
    }

    /// Interprets bit `i` of `mask` as vertex `i + 1`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= 64);
        let mut s = Self::empty(universe);
        if universe > 0 {
            let keep = if universe == 64 { u64::MAX } else { (1u64 << universe) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v >= 1 && v <= self.universe && (self.words[(v - 1) / 64] >> ((v - 1) % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.words[(v - 1) / 64] |= 1 << ((v - 1) % 64);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        for w in s.words.iter_mut() {
            *w = !*w;
        }
        let tail = self.universe % 64;
        if tail != 0 {
            if let Some(last) = s.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        s
    }

    /// The side of the bipartition that holds vertex 1.
    pub fn canonical(&self) -> Self {
        if self.contains(1) {
            self.clone()
        } else {
            self.complement()
        }
    }

    /// True for a nonempty proper subset.
    pub fn is_proper(&self) -> bool {
        let k = self.len();
        k > 0 && k < self.universe
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.universe).filter(move |&v| self.contains(v))
    }

    /// Low 64 bits, meaningful when `universe <= 64`.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A vertex bipartition of the original graph, identified by the shore that
/// contains vertex 1, together with its crossing weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cut {
    pub shore: VertexSet,
    pub weight: u64,
}

/// Dense symmetric multiplicity matrix with degree bookkeeping.
///
/// Contraction merges the row of `gone` into `keep` and then moves the last
/// vertex into the vacated slot, exactly like `Vec::swap_remove`. Everything
/// that carries per-vertex data alongside must mirror that move.
#[derive(Clone, Debug)]
pub(crate) struct Adjacency {
    n: usize,
    stride: usize,
    mult: Vec<u64>,
    deg: Vec<u64>,
    m: u64,
}

impl Adjacency {
    pub(crate) fn new(n: usize) -> Self {
        Adjacency { n, stride: n, mult: vec![0; n * n], deg: vec![0; n], m: 0 }
    }

    #[inline]
    pub(crate) fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub(crate) fn m(&self) -> u64 {
        self.m
    }

    #[inline]
    pub(crate) fn get(&self, u: usize, v: usize) -> u64 {
        self.mult[u * self.stride + v]
    }

    #[inline]
    pub(crate) fn degree(&self, u: usize) -> u64 {
        self.deg[u]
    }

    pub(crate) fn add(&mut self, u: usize, v: usize, k: u64) {
        debug_assert_ne!(u, v);
        let s = self.stride;
        self.mult[u * s + v] += k;
        self.mult[v * s + u] += k;
        self.deg[u] += k;
        self.deg[v] += k;
        self.m += k;
    }

    /// Identifies `gone` with `keep`, deleting the loops this creates.
    /// Returns the number of deleted edges and the new index of `keep`.
    pub(crate) fn merge(&mut self, keep: usize, gone: usize) -> (u64, usize) {
        debug_assert!(keep != gone && keep < self.n && gone < self.n);
        let s = self.stride;
        let n = self.n;
        let between = self.mult[keep * s + gone];
        for w in 0..n {
            if w == keep || w == gone {
                continue;
            }
            let x = self.mult[gone * s + w];
            if x != 0 {
                self.mult[keep * s + w] += x;
                self.mult[w * s + keep] += x;
            }
        }
        self.mult[keep * s + gone] = 0;
        self.mult[gone * s + keep] = 0;
        self.deg[keep] = self.deg[keep] + self.deg[gone] - 2 * between;
        self.m -= between;

        let last = n - 1;
        if gone != last {
            for w in 0..n {
                if w == gone || w == last {
                    continue;
                }
                let x = self.mult[last * s + w];
                self.mult[gone * s + w] = x;
                self.mult[w * s + gone] = x;
            }
            self.mult[gone * s + gone] = 0;
            self.deg[gone] = self.deg[last];
        }
        self.n -= 1;
        let keep_new = if keep == last { gone } else { keep };
        (between, keep_new)
    }

    /// Copy with a tight stride, used when handing a graph to child tasks.
    pub(crate) fn compact(&self) -> Self {
        if self.stride == self.n {
            return self.clone();
        }
        let n = self.n;
        let mut mult = Vec::with_capacity(n * n);
        for u in 0..n {
            mult.extend_from_slice(&self.mult[u * self.stride..u * self.stride + n]);
        }
        Adjacency { n, stride: n, mult, deg: self.deg[..n].to_vec(), m: self.m }
    }

    /// Draws one of the `m` parallel edges uniformly; returns its endpoints.
    pub(crate) fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        debug_assert!(self.m > 0);
        let mut x = rng.random_range(0..2 * self.m);
        let mut u = 0;
        while x >= self.deg[u] {
            x -= self.deg[u];
            u += 1;
        }
        let row = &self.mult[u * self.stride..u * self.stride + self.n];
        for (v, &k) in row.iter().enumerate() {
            if x < k {
                return (u, v);
            }
            x -= k;
        }
        unreachable!("degree vector out of sync with multiplicities")
    }

    /// Like [`Adjacency::pick`] but only over edges not in `excluded`, which
    /// must be a sub-multigraph on the same vertex indexing. `None` when
    /// every remaining edge is excluded.
    pub(crate) fn pick_excluding<R: Rng + ?Sized>(
        &self,
        excluded: &Adjacency,
        rng: &mut R,
    ) -> Option<(usize, usize)> {
        let free = self.m - excluded.m;
        if free == 0 {
            return None;
        }
        let mut x = rng.random_range(0..2 * free);
        let mut u = 0;
        loop {
            let d = self.deg[u] - excluded.deg[u];
            if x < d {
                break;
            }
            x -= d;
            u += 1;
        }
        for v in 0..self.n {
            let k = self.get(u, v) - excluded.get(u, v);
            if x < k {
                return Some((u, v));
            }
            x -= k;
        }
        unreachable!("excluded multigraph is not a subgraph")
    }

    /// Union-find components over the pairs for which `alive` holds.
    /// Labels are assigned in order of first appearance.
    pub(crate) fn components_where(&self, mut alive: impl FnMut(usize, usize) -> bool) -> (usize, Vec<usize>) {
        let n = self.n;
        let mut uf = UnionFind::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if self.get(u, v) > 0 && alive(u, v) {
                    uf.union(u, v);
                }
            }
        }
        uf.labels()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    pub(crate) fn labels(&mut self) -> (usize, Vec<usize>) {
        let n = self.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut labels = vec![0; n];
        let mut count = 0;
        for v in 0..n {
            let r = self.find(v);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = count;
                count += 1;
            }
            labels[v] = label_of_root[r];
        }
        (count, labels)
    }
}

/// An undirected multigraph, possibly obtained from an original graph by
/// contractions.
#[derive(Clone, Debug)]
pub struct MultiGraph {
    orig_n: usize,
    pub(crate) adj: Adjacency,
    groups: Vec<Vec<u32>>,
}

impl PartialEq for MultiGraph {
    fn eq(&self, other: &Self) -> bool {
        let n = self.n();
        self.orig_n == other.orig_n
            && n == other.n()
            && self.groups == other.groups
            && (0..n).all(|u| (0..n).all(|v| self.adj.get(u, v) == other.adj.get(u, v)))
    }
}

impl Eq for MultiGraph {}

impl MultiGraph {
    /// Edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        MultiGraph {
            orig_n: n,
            adj: Adjacency::new(n),
            groups: (1..=n as u32).map(|v| vec![v]).collect(),
        }
    }

    /// Builds a graph from `(u, v, multiplicity)` triples. Repeated pairs
    /// accumulate. Connectivity is not checked.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u64)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v, k) in edges {
            g.check_vertex(u)?;
            g.check_vertex(v)?;
            if u == v {
                return Err(Error::SelfLoop(u as u64));
            }
            if k == 0 {
                continue;
            }
            g.adj.get(u - 1, v - 1).checked_add(k).ok_or_else(|| {
                Error::InvalidParameter(format!("multiplicity of {u}-{v} overflows 64 bits"))
            })?;
            g.adj.add(u - 1, v - 1, k);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v, 1))).collect();
        Self::from_edges(n, &edges).expect("valid by construction")
    }

    /// Cycle on `n >= 3` vertices with unit edges.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (1..=n).map(|u| (u, u % n + 1, 1)).collect();
        Self::from_edges(n, &edges).expect("valid by construction")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|u| (u, u + 1, 1)).collect();
        Self::from_edges(n, &edges).expect("valid by construction")
    }

    /// Two vertices joined by `k` parallel edges.
    pub fn two_vertex(k: u64) -> Self {
        Self::from_edges(2, &[(1, 2, k)]).expect("valid by construction")
    }

    /// Two triangles joined by a single bridge (3-4).
    pub fn dumbbell() -> Self {
        Self::from_edges(
            6,
            &[(1, 2, 1), (2, 3, 1), (1, 3, 1), (3, 4, 1), (4, 5, 1), (5, 6, 1), (4, 6, 1)],
        )
        .expect("valid by construction")
    }

    /// Parses the text format: `#` comments, one `graph <n>` header, then
    /// `edge <u> <v> <mult>` lines with each unordered pair at most once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut graph: Option<MultiGraph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: line_no, msg: msg.to_string() };
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap_or_default();
            let nums: Vec<&str> = tok.collect();
            let num = |s: &str| s.parse::<u64>().map_err(|_| err(&format!("expected an integer, found `{s}`")));
            match (head, graph.as_mut()) {
                ("graph", None) => {
                    if nums.len() != 1 {
                        return Err(err("expected `graph <n>`"));
                    }
                    let n = num(nums[0])?;
                    if n == 0 || n > u32::MAX as u64 {
                        return Err(err("vertex count out of range"));
                    }
                    graph = Some(MultiGraph::new(n as usize));
                }
                ("graph", Some(_)) => return Err(err("duplicate `graph` header")),
                ("edge", None) => return Err(err("`edge` before `graph` header")),
                ("edge", Some(g)) => {
                    if nums.len() != 3 {
                        return Err(err("expected `edge <u> <v> <mult>`"));
                    }
                    let (u, v, k) = (num(nums[0])?, num(nums[1])?, num(nums[2])?);
                    let n = g.orig_n as u64;
                    for x in [u, v] {
                        if x == 0 || x > n {
                            return Err(Error::VertexOutOfRange(x));
                        }
                    }
                    if u == v {
                        return Err(Error::SelfLoop(u));
                    }
                    if k == 0 {
                        return Err(err("multiplicity must be at least 1"));
                    }
                    let (a, b) = (u as usize - 1, v as usize - 1);
                    if g.adj.get(a, b) != 0 {
                        return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
                    }
                    g.adj.add(a, b, k);
                }
                _ => return Err(err(&format!("unknown directive `{head}`"))),
            }
        }
        let g = graph.ok_or(Error::Parse { line: 0, msg: "missing `graph <n>` header".into() })?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Renders the graph in the text format accepted by [`MultiGraph::parse`].
    /// Only meaningful for uncontracted graphs.
    pub fn to_text(&self) -> String {
        let mut out = format!("graph {}\n", self.n());
        for (u, v, k) in self.edges() {
            let _ = writeln!(out, "edge {u} {v} {k}");
        }
        out
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n() {
            Err(Error::VertexOutOfRange(v as u64))
        } else {
            Ok(())
        }
    }

    /// Number of original vertices.
    pub fn orig_n(&self) -> usize {
        self.orig_n
    }

    /// Number of current vertices.
    pub fn n(&self) -> usize {
        self.adj.n()
    }

    /// Number of edges, counting parallel copies.
    pub fn m(&self) -> u64 {
        self.adj.m()
    }

    /// Multiplicity between current vertices `u` and `v`.
    pub fn mult(&self, u: usize, v: usize) -> u64 {
        self.adj.get(u - 1, v - 1)
    }

    pub fn degree(&self, u: usize) -> u64 {
        self.adj.degree(u - 1)
    }

    /// Original vertices merged into current vertex `u`.
    pub fn group(&self, u: usize) -> &[u32] {
        &self.groups[u - 1]
    }

    /// `(u, v, mult)` for every adjacent pair with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, u64)> {
        let n = self.n();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let k = self.adj.get(u, v);
                if k > 0 {
                    out.push((u + 1, v + 1, k));
                }
            }
        }
        out
    }

    /// Current vertex holding original vertex `x`.
    pub fn locate(&self, x: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&(x as u32))).map(|i| i + 1)
    }

    /// Smallest original vertex merged into current vertex `u`.
    pub fn representative(&self, u: usize) -> usize {
        *self.groups[u - 1].iter().min().expect("groups are nonempty") as usize
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.adj.components_where(|_, _| true).0 == 1
    }

    /// Contracts the 0-based pair in place; returns the new 0-based index of
    /// the merged vertex.
    pub(crate) fn contract_in_place(&mut self, a: usize, b: usize) -> usize {
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        let (_, keep_new) = self.adj.merge(keep, gone);
        let moved = std::mem::take(&mut self.groups[gone]);
        self.groups[keep].extend(moved);
        self.groups.swap_remove(gone);
        keep_new
    }

    /// Identifies adjacent current vertices `u` and `v`; their parallel
    /// edges become loops and are deleted.
    pub fn contract_edge(&self, u: usize, v: usize) -> Result<MultiGraph> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SameVertex(u as u64));
        }
        if self.mult(u, v) == 0 {
            return Err(Error::NotAdjacent(u as u64, v as u64));
        }
        let mut g = self.clone();
        g.contract_in_place(u - 1, v - 1);
        Ok(g)
    }

    /// Contracts every edge of the multiset `edges`, given as pairs of
    /// original vertices. Edges whose endpoints have already been merged are
    /// skipped. Vertices of the result are ordered by their smallest original
    /// member, so the outcome does not depend on the order of `edges`.
    pub fn contract_set(&self, edges: &[(usize, usize)]) -> Result<MultiGraph> {
        let mut owner = self.owner_map();
        for &(a, b) in edges {
            for x in [a, b] {
                if x == 0 || x > self.orig_n {
                    return Err(Error::VertexOutOfRange(x as u64));
                }
            }
            let (u, v) = (owner[a - 1], owner[b - 1]);
            if u == v || self.adj.get(u, v) == 0 {
                return Err(Error::NotAdjacent(a as u64, b as u64));
            }
        }
        let mut g = self.clone();
        for &(a, b) in edges {
            let (u, v) = (owner[a - 1], owner[b - 1]);
            if u == v {
                continue;
            }
            g.contract_in_place(u, v);
            owner = g.owner_map();
        }
        Ok(g.canonicalized())
    }

    /// Original vertex (0-based) → current vertex (0-based).
    fn owner_map(&self) -> Vec<usize> {
        let mut owner = vec![0; self.orig_n];
        for (i, grp) in self.groups.iter().enumerate() {
            for &x in grp {
                owner[x as usize - 1] = i;
            }
        }
        owner
    }

    /// Reorders vertices by smallest original member and sorts each group.
    pub fn canonicalized(&self) -> MultiGraph {
        let n = self.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&u| self.representative(u + 1));
        let mut g = MultiGraph {
            orig_n: self.orig_n,
            adj: Adjacency::new(n),
            groups: order
                .iter()
                .map(|&u| {
                    let mut grp = self.groups[u].clone();
                    grp.sort_unstable();
                    grp
                })
                .collect(),
        };
        for i in 0..n {
            for j in i + 1..n {
                let k = self.adj.get(order[i], order[j]);
                if k > 0 {
                    g.adj.add(i, j, k);
                }
            }
        }
        g
    }

    /// Side of each current vertex (0-based) for an original-vertex shore.
    pub(crate) fn sides(&self, shore: &VertexSet) -> Result<Vec<bool>> {
        if shore.universe() != self.orig_n || !shore.is_proper() {
            return Err(Error::ImproperShore);
        }
        let mut side = Vec::with_capacity(self.n());
        for (i, grp) in self.groups.iter().enumerate() {
            let s = shore.contains(grp[0] as usize);
            if grp.iter().any(|&x| shore.contains(x as usize) != s) {
                return Err(Error::ShoreSplitsGroup(i as u64 + 1));
            }
            side.push(s);
        }
        Ok(side)
    }

    /// Crossing weight of `shore`, returned as a canonical [`Cut`].
    pub fn cut_weight(&self, shore: &VertexSet) -> Result<Cut> {
        let side = self.sides(shore)?;
        let n = self.n();
        let mut w = 0;
        for u in 0..n {
            for v in u + 1..n {
                if side[u] != side[v] {
                    w += self.adj.get(u, v);
                }
            }
        }
        Ok(Cut { shore: shore.canonical(), weight: w })
    }

    /// Original-vertex shore of the current vertices flagged in `side`.
    pub(crate) fn shore_of(&self, side: impl Fn(usize) -> bool) -> VertexSet {
        let mut s = VertexSet::empty(self.orig_n);
        for (i, grp) in self.groups.iter().enumerate() {
            if side(i) {
                for &x in grp {
                    s.insert(x as usize);
                }
            }
        }
        s.canonical()
    }

    /// Components after deleting edges. `removed` lists `(u, v, count)` over
    /// current vertices: `count` of the parallel `u-v` edges fail. Labels are
    /// 0-based component indices per current vertex, in order of first
    /// appearance.
    pub fn components_after_removal(&self, removed: &[(usize, usize, u64)]) -> Result<(usize, Vec<usize>)> {
        let n = self.n();
        let mut gone = vec![0u64; n * n];
        for &(u, v, k) in removed {
            self.check_vertex(u)?;
            self.check_vertex(v)?;
            if u == v {
                return Err(Error::SelfLoop(u as u64));
            }
            let (a, b) = (u - 1, v - 1);
            gone[a * n + b] += k;
            gone[b * n + a] += k;
            if gone[a * n + b] > self.adj.get(a, b) {
                return Err(Error::NotAdjacent(u as u64, v as u64));
            }
        }
        Ok(self.adj.components_where(|u, v| gone[u * n + v] < self.adj.get(u, v)))
    }

    /// Exact global minimum cut by Stoer–Wagner. Deterministic.
    pub fn min_cut(&self) -> Result<(u64, Cut)> {
        let n = self.n();
        if n < 2 {
            return Err(Error::TooFewVertices(2));
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut w: Vec<Vec<u64>> = (0..n).map(|u| (0..n).map(|v| self.adj.get(u, v)).collect()).collect();
        let mut members: Vec<Vec<usize>> = (0..n).map(|u| vec![u]).collect();
        let mut active: Vec<usize> = (0..n).collect();
        let mut best = u64::MAX;
        let mut best_side: Vec<usize> = Vec::new();
        let mut key = vec![0u64; n];
        let mut added = vec![false; n];
        while active.len() > 1 {
            for &v in &active {
                key[v] = 0;
                added[v] = false;
            }
            let mut prev = active[0];
            let mut last = active[0];
            for step in 0..active.len() {
                let mut sel = usize::MAX;
                for &v in &active {
                    if !added[v] && (sel == usize::MAX || key[v] > key[sel]) {
                        sel = v;
                    }
                }
                added[sel] = true;
                if step + 1 == active.len() {
                    if key[sel] < best {
                        best = key[sel];
                        best_side = members[sel].clone();
                    }
                } else {
                    for &v in &active {
                        if !added[v] {
                            key[v] += w[sel][v];
                        }
                    }
                }
                prev = last;
                last = sel;
            }
            for &v in &active {
                let x = w[last][v];
                w[prev][v] += x;
                w[v][prev] += x;
            }
            w[prev][prev] = 0;
            let moved = std::mem::take(&mut members[last]);
            members[prev].extend(moved);
            active.retain(|&v| v != last);
        }
        let mut in_side = vec![false; n];
        for &u in &best_side {
            in_side[u] = true;
        }
        let shore = self.shore_of(|u| in_side[u]);
        Ok((best, Cut { shore, weight: best }))
    }
}
