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

//! Exact brute-force references for small instances.
//!
//! Every routine enumerates its whole probability space, so each has a hard
//! size cap in [`OracleLimits`]; exceeding it is an error, never a silent
//! truncation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contraction::{check_alpha, stop_size};
use crate::error::{Error, Result};
use crate::multigraph::{Adjacency, Cut, MultiGraph, UnionFind, VertexSet};
use crate::rng::StreamKey;
use crate::util::{par_map, KahanSum};

/// Size caps for exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    /// Maximum number of adjacent vertex pairs for failure-pattern
    /// enumeration. Parallel edges between one pair only matter through
    /// whether all of them fail, so a pair is one binary unit.
    pub max_m_subsets: u32,
    /// Maximum vertex count for enumerating all `2^(n-1) - 1` cuts.
    pub max_n_cuts: u32,
    /// Maximum vertex count for the exhaustive contraction recursion.
    pub max_n_exact_ca: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_m_subsets: 22, max_n_cuts: 20, max_n_exact_ca: 6 }
    }
}

/// Exact evaluator bound to a set of caps.
#[derive(Clone, Copy, Debug, Default)]
pub struct Oracle {
    pub limits: OracleLimits,
}

/// One cut of a (possibly contracted) graph: bit `i` of `mask` says whether
/// current vertex `i` (0-based) lies on the shore holding original vertex 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutMask {
    pub mask: u64,
    pub weight: u64,
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")))
    }
}

/// `(u, v, mult)` for adjacent pairs, 0-based.
fn pairs(g: &MultiGraph) -> Vec<(usize, usize, u64)> {
    g.edges().into_iter().map(|(u, v, k)| (u - 1, v - 1, k)).collect()
}

/// Probability that a pair of multiplicity `k` fails entirely.
fn pair_fail(p: f64, k: u64) -> f64 {
    p.powi(k.min(i32::MAX as u64) as i32)
}

impl Oracle {
    pub fn new(limits: OracleLimits) -> Self {
        Oracle { limits }
    }

    fn check_cuts_cap(&self, g: &MultiGraph) -> Result<()> {
        if g.n() > self.limits.max_n_cuts as usize {
            return Err(Error::CapExceeded {
                what: "vertex count",
                actual: g.n() as u64,
                cap: self.limits.max_n_cuts as u64,
            });
        }
        if g.n() < 2 {
            return Err(Error::TooFewVertices(2));
        }
        Ok(())
    }

    fn check_pairs_cap(&self, count: usize) -> Result<()> {
        if count > self.limits.max_m_subsets as usize {
            return Err(Error::CapExceeded {
                what: "adjacent pairs",
                actual: count as u64,
                cap: self.limits.max_m_subsets as u64,
            });
        }
        Ok(())
    }

    /// Every cut of `g`, in Gray-code order, with incrementally maintained
    /// weights.
    pub fn cut_masks(&self, g: &MultiGraph) -> Result<Vec<CutMask>> {
        self.check_cuts_cap(g)?;
        Ok(cut_masks_unchecked(&g.adj, g.locate(1).expect("vertex 1 exists") - 1))
    }

    /// Every cut of `g` as a canonical [`Cut`] over original vertices.
    pub fn all_cuts(&self, g: &MultiGraph) -> Result<Vec<Cut>> {
        let masks = self.cut_masks(g)?;
        Ok(masks.into_iter().map(|cm| mask_to_cut(g, cm)).collect())
    }

    /// Exact unreliability: total probability of the failure patterns that
    /// disconnect `g`.
    pub fn exact_u(&self, g: &MultiGraph, p: f64) -> Result<f64> {
        check_probability(p)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let ps = pairs(g);
        self.check_pairs_cap(ps.len())?;
        let n = g.n();
        let fail: Vec<f64> = ps.iter().map(|&(_, _, k)| pair_fail(p, k)).collect();
        Ok(sum_over_patterns(&fail, |failed| {
            let mut uf = UnionFind::new(n);
            let mut merged = 0;
            for (i, &(u, v, _)) in ps.iter().enumerate() {
                if (failed >> i) & 1 == 0 && uf.union(u, v) {
                    merged += 1;
                }
            }
            merged + 1 < n
        }))
    }

    /// Exact probability that at least one shore in `collection` has all of
    /// its crossing edges failed.
    pub fn exact_ua(&self, g: &MultiGraph, collection: &[VertexSet], p: f64) -> Result<f64> {
        check_probability(p)?;
        let ps = pairs(g);
        self.check_pairs_cap(ps.len())?;
        let mut crossing = Vec::with_capacity(collection.len());
        for shore in collection {
            let side = g.sides(shore)?;
            let mut bits = 0u64;
            for (i, &(u, v, _)) in ps.iter().enumerate() {
                if side[u] != side[v] {
                    bits |= 1 << i;
                }
            }
            crossing.push(bits);
        }
        let fail: Vec<f64> = ps.iter().map(|&(_, _, k)| pair_fail(p, k)).collect();
        Ok(sum_over_patterns(&fail, |failed| crossing.iter().any(|&c| c & !failed == 0)))
    }

    /// Partition function: sum of `p^|C|` over all cuts.
    pub fn zbar(&self, g: &MultiGraph, p: f64) -> Result<f64> {
        check_probability(p)?;
        let masks = self.cut_masks(g)?;
        Ok(masks.iter().map(|cm| pair_fail(p, cm.weight)).collect::<KahanSum>().value())
    }

    /// All cuts of weight at most `alpha * c`, sorted by shore.
    pub fn alpha_cuts(&self, g: &MultiGraph, alpha: f64) -> Result<Vec<Cut>> {
        let masks = self.cut_masks(g)?;
        let c = masks.iter().map(|cm| cm.weight).min().expect("n >= 2");
        let limit = alpha * c as f64 + 1e-9;
        let mut out: Vec<Cut> = masks
            .into_iter()
            .filter(|cm| cm.weight as f64 <= limit)
            .map(|cm| mask_to_cut(g, cm))
            .collect();
        out.sort_by(|a, b| a.shore.cmp(&b.shore));
        Ok(out)
    }

    /// `A_γ^H = Σ_{cuts C'} exp(-γ |C' − C| / c)` where `c_edges` lists the
    /// edges of `C` still present in `h` as `(u, v, count)` over current
    /// vertices.
    pub fn a_gamma(&self, h: &MultiGraph, c_edges: &[(usize, usize, u64)], gamma: f64, c: u64) -> Result<f64> {
        self.check_cuts_cap(h)?;
        let cadj = edge_multiset(h, c_edges)?;
        Ok(a_gamma_raw(&h.adj, &cadj, h.locate(1).unwrap() - 1, gamma, c))
    }

    /// Exact `E[A^{H'}_{γ − c/m}]` over one step of the Contraction Process
    /// that protects `l_edges ⊆ c_edges`, where `m` is the edge count of `h`.
    /// Returns `None` when every edge of `h` is protected.
    pub fn a_gamma_step(
        &self,
        h: &MultiGraph,
        c_edges: &[(usize, usize, u64)],
        l_edges: &[(usize, usize, u64)],
        gamma: f64,
        c: u64,
    ) -> Result<Option<f64>> {
        self.check_cuts_cap(h)?;
        let cadj = edge_multiset(h, c_edges)?;
        let ladj = edge_multiset(h, l_edges)?;
        let n = h.n();
        for u in 0..n {
            for v in 0..n {
                if ladj.get(u, v) > cadj.get(u, v) {
                    return Err(Error::InvalidParameter("protected edges must lie in C".into()));
                }
            }
        }
        let free_total = h.m() - ladj.m();
        if free_total == 0 || n < 3 {
            return Ok(None);
        }
        let next_gamma = gamma - c as f64 / h.m() as f64;
        let mut acc = KahanSum::default();
        for u in 0..n {
            for v in u + 1..n {
                let free = h.adj.get(u, v) - ladj.get(u, v);
                if free == 0 {
                    continue;
                }
                let mut hh = h.clone();
                let mut cc = cadj.clone();
                cc.merge(u, v);
                hh.contract_in_place(u, v);
                let a = a_gamma_raw(&hh.adj, &cc, hh.locate(1).unwrap() - 1, next_gamma, c);
                acc.add(free as f64 / free_total as f64 * a);
            }
        }
        Ok(Some(acc.value()))
    }

    /// Exact probability that the Contraction Algorithm with parameter
    /// `alpha` outputs `cut`.
    pub fn ca_selection_prob(&self, g: &MultiGraph, cut: &Cut, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        if g.n() > self.limits.max_n_exact_ca as usize {
            return Err(Error::CapExceeded {
                what: "vertex count",
                actual: g.n() as u64,
                cap: self.limits.max_n_exact_ca as u64,
            });
        }
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        g.sides(&cut.shore)?;
        let stop = stop_size(alpha).min(g.n());
        Ok(ca_recurse(g, &cut.shore, stop))
    }

    /// All contraction histories of `g` down to `stop` vertices that never
    /// pick an edge of `c_edges`, with their probabilities under the
    /// Contraction Algorithm and under the Contraction Process protecting
    /// `c_edges`.
    pub fn c_disjoint_histories(&self, g: &MultiGraph, c_edges: &[(usize, usize, u64)], stop: usize) -> Result<Vec<History>> {
        if g.n() > self.limits.max_n_exact_ca as usize {
            return Err(Error::CapExceeded {
                what: "vertex count",
                actual: g.n() as u64,
                cap: self.limits.max_n_exact_ca as u64,
            });
        }
        let cadj = edge_multiset(g, c_edges)?;
        let mut out = Vec::new();
        let start = History { p_ca: 1.0, p_cp: 1.0, counts: Vec::new(), bottom: false };
        histories(g.clone(), cadj, stop.max(1), start, &mut out);
        Ok(out)
    }

    /// Monte-Carlo tail `P(R >= r)` of the component count after random
    /// edge failures, for `r = 1..=n`, with Wilson intervals at `z = 3`.
    pub fn component_tail(&self, g: &MultiGraph, p: f64, trials: u64, key: StreamKey) -> Result<Vec<TailPoint>> {
        check_probability(p)?;
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        let n = g.n();
        let ps = pairs(g);
        let fail: Vec<f64> = ps.iter().map(|&(_, _, k)| pair_fail(p, k)).collect();
        let per_trial = par_map(trials, |i| {
            let mut rng = key.child(i).rng();
            let mut uf = UnionFind::new(n);
            let mut comps = n;
            for (j, &(u, v, _)) in ps.iter().enumerate() {
                let survives = rng.random::<f64>() >= fail[j];
                if survives && uf.union(u, v) {
                    comps -= 1;
                }
            }
            comps
        });
        let mut hist = vec![0u64; n + 2];
        for r in per_trial {
            hist[r] += 1;
        }
        let mut out = Vec::with_capacity(n);
        let mut at_least = trials;
        for r in 1..=n {
            let (lo, hi) = wilson(at_least, trials, 3.0);
            out.push(TailPoint { r, estimate: at_least as f64 / trials as f64, ci_low: lo, ci_high: hi });
            at_least -= hist[r];
        }
        Ok(out)
    }
}

/// One C-disjoint contraction history.
#[derive(Clone, Debug, PartialEq)]
pub struct History {
    /// Probability of the history under the Contraction Algorithm.
    pub p_ca: f64,
    /// Probability under the Contraction Process protecting `C`, or 0 if the
    /// process would reach its bottom state first.
    pub p_cp: f64,
    /// Edge counts `M_r` of the graphs visited, from `n` downwards, excluding
    /// the final graph.
    pub counts: Vec<u64>,
    pub bottom: bool,
}

/// One point of the component-count tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub r: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let ph = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (ph + z2 / (2.0 * nf)) / denom;
    let half = z * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Sums the probability of every failure pattern over independent binary
/// units (bit set = unit failed) for which `pred` holds. Patterns are
/// enumerated in Gray-code order with the pattern probability updated by
/// ratios where that is stable, and recomputed otherwise.
fn sum_over_patterns(fail: &[f64], pred: impl Fn(u64) -> bool + Sync) -> f64 {
    let k = fail.len();
    // Split the top bits across workers; each chunk enumerates the low bits.
    let hi_bits = k.min(6);
    let lo_bits = k - hi_bits;
    let chunks = par_map(1 << hi_bits, |hi| {
        let mut acc = KahanSum::default();
        for lo in 0u64..(1 << lo_bits) {
            let pattern = (hi << lo_bits) | lo;
            if pred(pattern) {
                let mut pr = 1.0;
                for (i, &f) in fail.iter().enumerate() {
                    pr *= if (pattern >> i) & 1 == 1 { f } else { 1.0 - f };
                }
                acc.add(pr);
            }
        }
        acc
    });
    let mut total = KahanSum::default();
    for c in &chunks {
        total.merge(c);
    }
    total.value()
}

pub(crate) fn cut_masks_unchecked(adj: &Adjacency, anchor: usize) -> Vec<CutMask> {
    let n = adj.n();
    let others: Vec<usize> = (0..n).filter(|&v| v != anchor).collect();
    let k = others.len();
    let total = 1u64 << k;
    let full = (0..n).fold(0u64, |m, v| m | 1 << v);
    let mut out = Vec::with_capacity(total as usize - 1);
    // Start with only the anchor on the shore; the Gray walk visits every
    // subset of the other vertices once, and the full set is skipped.
    let mut mask = 1u64 << anchor;
    let mut weight = adj.degree(anchor);
    out.push(CutMask { mask, weight });
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        let v = others[bit];
        let on_shore = (mask >> v) & 1 == 1;
        let mut same = 0;
        let mut other = 0;
        for w in 0..n {
            if w == v {
                continue;
            }
            if ((mask >> w) & 1 == 1) == on_shore {
                same += adj.get(v, w);
            } else {
                other += adj.get(v, w);
            }
        }
        weight = weight + same - other;
        mask ^= 1 << v;
        if mask != full {
            out.push(CutMask { mask, weight });
        }
    }
    out
}

fn mask_to_cut(g: &MultiGraph, cm: CutMask) -> Cut {
    Cut { shore: g.shore_of(|u| (cm.mask >> u) & 1 == 1), weight: cm.weight }
}

fn edge_multiset(g: &MultiGraph, edges: &[(usize, usize, u64)]) -> Result<Adjacency> {
    let n = g.n();
    let mut a = Adjacency::new(n);
    for &(u, v, k) in edges {
        for x in [u, v] {
            if x == 0 || x > n {
                return Err(Error::VertexOutOfRange(x as u64));
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u as u64));
        }
        if a.get(u - 1, v - 1) + k > g.mult(u, v) {
            return Err(Error::NotAdjacent(u as u64, v as u64));
        }
        a.add(u - 1, v - 1, k);
    }
    Ok(a)
}

/// Edges crossing `shore` in `g`, as `(u, v, count)` over current vertices.
pub fn crossing_edges(g: &MultiGraph, shore: &VertexSet) -> Result<Vec<(usize, usize, u64)>> {
    let side = g.sides(shore)?;
    Ok(g.edges().into_iter().filter(|&(u, v, _)| side[u - 1] != side[v - 1]).collect())
}

fn a_gamma_raw(h: &Adjacency, cadj: &Adjacency, anchor: usize, gamma: f64, c: u64) -> f64 {
    let n = h.n();
    if n < 2 {
        return 0.0;
    }
    let masks = cut_masks_unchecked(h, anchor);
    let mut acc = KahanSum::default();
    for cm in masks {
        let mut outside = 0u64;
        for u in 0..n {
            if (cm.mask >> u) & 1 == 0 {
                continue;
            }
            for v in 0..n {
                if (cm.mask >> v) & 1 == 0 {
                    outside += h.get(u, v) - cadj.get(u, v);
                }
            }
        }
        acc.add((-gamma * outside as f64 / c as f64).exp());
    }
    acc.value()
}

fn ca_recurse(h: &MultiGraph, shore: &VertexSet, stop: usize) -> f64 {
    let Ok(side) = h.sides(shore) else {
        return 0.0;
    };
    let n = h.n();
    if n <= stop {
        return 1.0 / ((1u64 << (n - 1)) - 1) as f64;
    }
    let m = h.m() as f64;
    let mut acc = KahanSum::default();
    for u in 0..n {
        for v in u + 1..n {
            let k = h.adj.get(u, v);
            if k == 0 || side[u] != side[v] {
                continue;
            }
            let mut hh = h.clone();
            hh.contract_in_place(u, v);
            acc.add(k as f64 / m * ca_recurse(&hh, shore, stop));
        }
    }
    acc.value()
}

fn histories(h: MultiGraph, cadj: Adjacency, stop: usize, cur: History, out: &mut Vec<History>) {
    let n = h.n();
    if n <= stop {
        out.push(cur);
        return;
    }
    let m = h.m();
    let free_total = m - cadj.m();
    if free_total == 0 {
        out.push(History { p_cp: 0.0, bottom: true, ..cur });
        return;
    }
    for u in 0..n {
        for v in u + 1..n {
            let free = h.adj.get(u, v) - cadj.get(u, v);
            if free == 0 {
                continue;
            }
            let mut hh = h.clone();
            let mut cc = cadj.clone();
            cc.merge(u, v);
            hh.contract_in_place(u, v);
            let mut counts = cur.counts.clone();
            counts.push(m);
            let next = History {
                p_ca: cur.p_ca * free as f64 / m as f64,
                p_cp: cur.p_cp * free as f64 / free_total as f64,
                counts,
                bottom: false,
            };
            histories(hh, cc, stop, next, out);
        }
    }
}
