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

//! End-to-end driver.
//!
//! Parameters are derived from the exact minimum cut: `δ` from
//! `p^c = n^(-2-δ)` and `ρ = ln(1/ε) / ln n`. A preliminary Monte-Carlo gate
//! of `⌈φ n^K⌉` samples decides the branch: if any sample disconnects the
//! graph, failures are common enough for plain Monte-Carlo; otherwise the
//! small cuts are enumerated and the union-of-cuts estimator is used.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cutstore::{build_collection, CutRecord, HashTable};
use crate::error::{Error, Result};
use crate::estimator::{estimate_ua, Estimate, EstimatorConfig, Method};
use crate::multigraph::{MultiGraph, UnionFind};
use crate::oracle::Oracle;
use crate::rca::{rca_iteration_budget, run_tree_with, RcaKind, ReplaySpec};
use crate::rng::{tag, StreamKey};
use crate::util::par_map;

/// Derived problem parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityParams {
    pub p: f64,
    pub n: usize,
    pub m: u64,
    pub c: u64,
    pub delta: f64,
    pub rho: f64,
    pub k: f64,
    /// `None` when `δ <= 0`.
    pub alpha_star_max: Option<f64>,
    /// `β` from `Z̄ = n^(-2-δ+β)`, when the partition function is cheap to
    /// compute exactly.
    pub beta_diag: Option<f64>,
}

/// Largest vertex count for which `beta_diag` is computed.
const BETA_DIAG_MAX_N: usize = 16;

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1/2]")))
    }
}

/// `δ = -2 - c ln p / ln n`.
pub fn delta_of(n: usize, c: u64, p: f64) -> f64 {
    -2.0 - c as f64 * p.ln() / (n as f64).ln()
}

pub fn compute_params(g: &MultiGraph, p: f64, eps: f64, k: f64) -> Result<ReliabilityParams> {
    check_p(p)?;
    check_eps(eps)?;
    if !(k > 2.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("K = {k} must exceed 2")));
    }
    let (c, _) = g.min_cut()?;
    let n = g.n();
    let ln_n = (n as f64).ln();
    let delta = delta_of(n, c, p);
    let rho = (1.0 / eps).ln() / ln_n;
    let alpha_star_max = alpha_star_max(delta, rho).ok();
    let beta_diag = if n <= BETA_DIAG_MAX_N {
        Oracle::default().zbar(g, p).ok().map(|z| z.ln() / ln_n + 2.0 + delta)
    } else {
        None
    };
    Ok(ReliabilityParams { p, n, m: g.m(), c, delta, rho, k, alpha_star_max, beta_diag })
}

/// Computable upper bound on the cut size that matters:
/// `max(1, 1 + 2/δ + ρ/δ)`.
pub fn alpha_star_max(delta: f64, rho: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    Ok((1.0 + 2.0 / delta + rho / delta).max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    MonteCarlo,
    CutEnumeration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub branch: Branch,
    pub samples: u64,
    pub disconnections: u64,
}

/// Per-pair failure probabilities `p^mult` with 0-based endpoints.
fn failure_units(g: &MultiGraph, p: f64) -> Vec<(usize, usize, f64)> {
    g.edges().into_iter().map(|(u, v, k)| (u - 1, v - 1, p.powf(k as f64))).collect()
}

fn disconnects(n: usize, units: &[(usize, usize, f64)], rng: &mut impl Rng) -> bool {
    let mut uf = UnionFind::new(n);
    let mut comps = n;
    for &(u, v, f) in units {
        if rng.random::<f64>() >= f && uf.union(u, v) {
            comps -= 1;
        }
    }
    comps > 1
}

const CHUNK: u64 = 1024;

/// Draws samples in chunks of [`CHUNK`], in rounds of geometrically growing
/// size, until `stop` says so or `budget` samples are used. Returns the
/// global indices of disconnecting samples and the sample count consumed.
/// Round boundaries do not depend on the thread count.
fn sample_rounds(g: &MultiGraph, p: f64, budget: u64, key: StreamKey, stop: impl Fn(&[u64]) -> bool) -> (Vec<u64>, u64) {
    let n = g.n();
    let units = failure_units(g, p);
    let chunks_total = budget.div_ceil(CHUNK);
    let mut hits = Vec::new();
    let mut next_chunk = 0u64;
    let mut round = 1u64;
    while next_chunk < chunks_total {
        let count = round.min(chunks_total - next_chunk);
        let first = next_chunk;
        let found = par_map(count, |j| {
            let chunk = first + j;
            let mut rng = key.child(chunk).rng();
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(budget);
            (lo..hi).filter(|_| disconnects(n, &units, &mut rng)).collect::<Vec<u64>>()
        });
        for f in found {
            hits.extend(f);
        }
        next_chunk += count;
        round = (round * 2).min(256);
        if stop(&hits) {
            break;
        }
    }
    let used = (next_chunk * CHUNK).min(budget);
    (hits, used)
}

/// Runs `⌈φ n^K⌉` failure samples; Monte-Carlo iff any disconnects.
pub fn gate(g: &MultiGraph, p: f64, k: f64, phi: f64, key: StreamKey) -> Result<GateOutcome> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    if !(phi >= 1.0 && phi.is_finite()) {
        return Err(Error::InvalidParameter(format!("phi = {phi} must be at least 1")));
    }
    let samples = (phi * (g.n() as f64).powf(k)).ceil() as u64;
    let (hits, used) = sample_rounds(g, p, samples, key, |h| !h.is_empty());
    let branch = if hits.is_empty() { Branch::CutEnumeration } else { Branch::MonteCarlo };
    Ok(GateOutcome { branch, samples: used, disconnections: hits.len() as u64 })
}

/// Monte-Carlo estimate with adaptive stopping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOutcome {
    pub estimate: Estimate,
    pub samples: u64,
    pub disconnections: u64,
    /// The sample budget ran out before the target count of disconnections.
    pub exhausted: bool,
}

/// Samples until `T = ⌈16/ε²⌉` disconnections or `⌈C_mc n^K ε^-2⌉` samples.
/// When stopped by the target the estimate is `(T-1)/(S-1)`, unbiased for
/// inverse sampling; otherwise it is `D/S`.
pub fn monte_carlo_estimate(g: &MultiGraph, p: f64, eps: f64, key: StreamKey, k: f64, c_mc: f64) -> Result<McOutcome> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    check_eps(eps)?;
    if !(c_mc > 0.0 && c_mc.is_finite()) {
        return Err(Error::InvalidParameter(format!("C_mc = {c_mc} must be positive")));
    }
    let target = (16.0 / (eps * eps)).ceil() as u64;
    let budget = ((c_mc * (g.n() as f64).powf(k) / (eps * eps)).ceil() as u64).max(target);
    let (hits, used) = sample_rounds(g, p, budget, key, |h| h.len() as u64 >= target);
    let (value, samples, d, exhausted) = if hits.len() as u64 >= target {
        let s = hits[target as usize - 1] + 1;
        let v = if s > 1 { (target - 1) as f64 / (s - 1) as f64 } else { 1.0 };
        (v, s, target, false)
    } else {
        (hits.len() as f64 / used as f64, used, hits.len() as u64, true)
    };
    let rel_std = if d > 0 { ((1.0 - value).max(0.0) / d as f64).sqrt() } else { f64::INFINITY };
    let estimate = Estimate {
        value,
        rel_std,
        trials: samples,
        method: Method::MonteCarlo,
        seed: key,
        aborts: 0,
        rel_var_per_trial: if value > 0.0 { (1.0 - value) / value } else { f64::INFINITY },
        mean_checks: 0.0,
    };
    Ok(McOutcome { estimate, samples, disconnections: d, exhausted })
}

/// Tunables of [`estimate_unreliability`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: f64,
    pub phi: f64,
    pub lambda: f64,
    pub c_pipe: f64,
    pub c_mc: f64,
    pub r_max: usize,
    pub mom_groups: Option<u32>,
    pub hash_phi: f64,
    pub force_branch: Option<Branch>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: 2.5,
            phi: 4.0,
            lambda: 64.0,
            c_pipe: 1.0,
            c_mc: 64.0,
            r_max: 30,
            mom_groups: None,
            hash_phi: 3.0,
            force_branch: None,
        }
    }
}

/// Why the final branch was taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Gate,
    Forced,
    NonpositiveDelta,
    /// Monte-Carlo ran out of budget, so the cut branch took over.
    McFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchEvidence {
    pub decision: Decision,
    pub gate: Option<GateOutcome>,
    /// Gate rerun after a Monte-Carlo phase saw no disconnection at all.
    pub regate: Option<GateOutcome>,
    pub mc_samples: Option<u64>,
    pub mc_disconnections: Option<u64>,
    pub mc_exhausted: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutBranchInfo {
    pub alpha: f64,
    pub rca_runs: u64,
    pub collection_size: usize,
    pub weight_histogram: Vec<(u64, u64)>,
    pub hash_bits: u32,
}

/// Everything [`estimate_unreliability`] reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub estimate: Estimate,
    pub params: ReliabilityParams,
    pub evidence: BranchEvidence,
    pub cuts: Option<CutBranchInfo>,
}

/// Runs the full estimator on a connected graph.
pub fn estimate_unreliability(g: &MultiGraph, p: f64, eps: f64, key: StreamKey, config: &PipelineConfig) -> Result<Report> {
    let params = compute_params(g, p, eps, config.k)?;
    let mut evidence = BranchEvidence {
        decision: Decision::Gate,
        gate: None,
        regate: None,
        mc_samples: None,
        mc_disconnections: None,
        mc_exhausted: None,
    };
    let branch = if let Some(b) = config.force_branch {
        evidence.decision = Decision::Forced;
        b
    } else if params.delta <= 0.0 {
        evidence.decision = Decision::NonpositiveDelta;
        Branch::MonteCarlo
    } else {
        let out = gate(g, p, config.k, config.phi, key.child(tag::GATE))?;
        evidence.gate = Some(out);
        out.branch
    };

    if branch == Branch::MonteCarlo {
        let mc = monte_carlo_estimate(g, p, eps, key.child(tag::MONTE_CARLO), config.k, config.c_mc)?;
        evidence.mc_samples = Some(mc.samples);
        evidence.mc_disconnections = Some(mc.disconnections);
        evidence.mc_exhausted = Some(mc.exhausted);
        let may_switch = evidence.decision == Decision::Gate;
        if mc.disconnections == 0 && may_switch {
            evidence.regate = Some(gate(g, p, config.k, config.phi, key.child(tag::REGATE))?);
        }
        if !(mc.exhausted && may_switch) {
            return Ok(Report { estimate: mc.estimate, params, evidence, cuts: None });
        }
        evidence.decision = Decision::McFallback;
    }

    let (estimate, info) = cut_branch(g, &params, eps, key, config)?;
    Ok(Report { estimate, params, evidence, cuts: Some(info) })
}

/// Runs per batch when accumulating the catalogue.
const RUN_BATCH: u64 = 2048;

fn cut_branch(g: &MultiGraph, params: &ReliabilityParams, eps: f64, key: StreamKey, config: &PipelineConfig) -> Result<(Estimate, CutBranchInfo)> {
    let n = g.n();
    // With δ <= 0 only a forced run gets here; enumerate everything.
    let alpha = params.alpha_star_max.unwrap_or(n as f64 / 2.0).max(1.0);
    let spec = ReplaySpec::new(RcaKind::Halving, alpha, 4)?;
    let runs = rca_iteration_budget(n, eps, config.c_pipe)?;
    let capacity = runs.saturating_mul(spec.leaves(n));
    let table = HashTable::new(g.orig_n(), capacity, config.hash_phi, key.child(tag::HASH_TABLE))?;
    let runs_key = key.child(tag::RCA_RUNS);

    // Keep one record per id as runs complete, so memory tracks the number
    // of distinct cuts rather than the number of leaves.
    let mut distinct: std::collections::BTreeMap<u64, CutRecord> = std::collections::BTreeMap::new();
    let mut start = 0;
    while start < runs {
        let count = RUN_BATCH.min(runs - start);
        let batches = par_map(count, |j| {
            let mut out = Vec::new();
            run_tree_with(g, &spec, runs_key.child(start + j), &table, &mut |r| out.push(r)).map(|_| out)
        });
        for b in batches {
            for r in b? {
                distinct
                    .entry(r.id)
                    .and_modify(|cur| {
                        if (r.weight, r.pointer) < (cur.weight, cur.pointer) {
                            *cur = r;
                        }
                    })
                    .or_insert(r);
            }
        }
        start += count;
    }
    let a = build_collection(distinct.into_values().collect(), table, spec, params.p)?;
    if !a.records().iter().any(|r| r.weight == params.c) {
        return Err(Error::NoMinCut(params.c));
    }
    let est_config = EstimatorConfig { lambda: config.lambda, r_max: config.r_max, mom_groups: config.mom_groups };
    let estimate = estimate_ua(g, &a, eps, key.child(tag::ESTIMATOR), &est_config)?;
    let info = CutBranchInfo {
        alpha,
        rca_runs: runs,
        collection_size: a.len(),
        weight_histogram: a.weight_histogram(),
        hash_bits: a.table.bits(),
    };
    Ok((estimate, info))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_examples() {
        let c4 = MultiGraph::cycle(4);
        let pr = compute_params(&c4, 0.125, 0.25, 2.5).unwrap();
        assert!((pr.delta - 1.0).abs() < 1e-12);
        assert_eq!(pr.c, 2);
        let pr = compute_params(&c4, 0.125, 0.25, 2.5).unwrap();
        assert!((pr.rho - 1.0).abs() < 1e-12);
        assert!((0.125f64.powi(2) - 4f64.powf(-2.0 - pr.delta)).abs() < 1e-15);
        let near_one = compute_params(&MultiGraph::two_vertex(1), 0.999_999, 0.1, 2.5).unwrap();
        assert!((near_one.delta + 2.0).abs() < 1e-5);
        assert!(near_one.alpha_star_max.is_none());
        assert!(compute_params(&c4, 1.0, 0.1, 2.5).is_err());
        assert!(compute_params(&c4, 0.1, 0.1, 2.0).is_err());
    }

    #[test]
    fn alpha_star_examples() {
        assert_eq!(alpha_star_max(2.0, 0.0).unwrap(), 2.0);
        assert_eq!(alpha_star_max(2.0, 2.0).unwrap(), 3.0);
        assert!((alpha_star_max(1e12, 0.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(alpha_star_max(0.0, 1.0).is_err());
        assert!(alpha_star_max(-1.0, 1.0).is_err());
    }

    #[test]
    fn gate_examples() {
        let path = MultiGraph::path(4);
        let g0 = gate(&path, 0.0, 2.5, 4.0, StreamKey::from_seed(1)).unwrap();
        assert_eq!((g0.branch, g0.disconnections), (Branch::CutEnumeration, 0));
        assert_eq!(g0.samples, (4.0 * 4f64.powf(2.5)).ceil() as u64);
        let g1 = gate(&path, 1.0, 2.5, 4.0, StreamKey::from_seed(1)).unwrap();
        assert_eq!(g1.branch, Branch::MonteCarlo);
        let k2 = MultiGraph::two_vertex(1);
        let mc = (0..100).filter(|&s| gate(&k2, 0.5, 2.5, 4.0, StreamKey::from_seed(s)).unwrap().branch == Branch::MonteCarlo).count();
        assert_eq!(mc, 100);
    }

    #[test]
    fn monte_carlo_examples() {
        let k2 = MultiGraph::two_vertex(1);
        let out = monte_carlo_estimate(&k2, 0.5, 0.1, StreamKey::from_seed(2), 2.5, 64.0).unwrap();
        assert!(!out.exhausted);
        assert!((out.estimate.value - 0.5).abs() < 0.05);
        let tri = MultiGraph::complete(3);
        let out = monte_carlo_estimate(&tri, 0.3, 0.1, StreamKey::from_seed(3), 2.5, 64.0).unwrap();
        assert!((out.estimate.value - 0.216).abs() < 0.1 * 0.216);
        let out = monte_carlo_estimate(&tri, 1.0, 0.1, StreamKey::from_seed(4), 2.5, 64.0).unwrap();
        assert_eq!(out.estimate.value, 1.0);
        let out = monte_carlo_estimate(&tri, 0.0, 0.5, StreamKey::from_seed(4), 2.5, 1.0).unwrap();
        assert!(out.exhausted);
        assert_eq!(out.estimate.value, 0.0);
    }

    #[test]
    fn pipeline_examples() {
        let cfg = PipelineConfig::default();
        let tri = MultiGraph::complete(3);
        let r = estimate_unreliability(&tri, 0.01, 0.1, StreamKey::from_seed(7), &cfg).unwrap();
        let exact = 3e-4 - 2e-6;
        assert!((r.estimate.value - exact).abs() < 0.1 * exact, "{r:?}");

        let k2 = MultiGraph::two_vertex(1);
        let r = estimate_unreliability(&k2, 0.5, 0.1, StreamKey::from_seed(8), &cfg).unwrap();
        assert_eq!(r.estimate.method, Method::MonteCarlo);
        assert_eq!(r.evidence.decision, Decision::NonpositiveDelta);
        assert!((r.estimate.value - 0.5).abs() < 0.05);

        let forced = PipelineConfig { force_branch: Some(Branch::CutEnumeration), ..cfg };
        let r = estimate_unreliability(&k2, 0.5, 0.1, StreamKey::from_seed(8), &forced).unwrap();
        assert_eq!(r.estimate.method, Method::CutEnumeration);
        assert!((r.estimate.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cycle_six_matches_oracle() {
        let g = MultiGraph::cycle(6);
        let exact = Oracle::default().exact_u(&g, 0.02).unwrap();
        let r = estimate_unreliability(&g, 0.02, 0.1, StreamKey::from_seed(9), &PipelineConfig::default()).unwrap();
        assert!((r.estimate.value - exact).abs() < 0.1 * exact, "{} vs {exact}", r.estimate.value);
    }

    #[test]
    fn reports_are_reproducible() {
        let g = MultiGraph::dumbbell();
        let cfg = PipelineConfig::default();
        let a = estimate_unreliability(&g, 0.05, 0.2, StreamKey::from_seed(10), &cfg).unwrap();
        let b = estimate_unreliability(&g, 0.05, 0.2, StreamKey::from_seed(10), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
