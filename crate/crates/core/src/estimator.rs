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

//! Importance-sampling estimator for the probability that some catalogued
//! cut fails.
//!
//! One trial picks a catalogued cut `Q` with probability proportional to
//! `p^|Q|`, fails all of its edges, fails every other edge independently,
//! and counts how many catalogued cuts `J` have failed as a result. The
//! ratio `Σ p^|C| / J` is an unbiased estimate of `U_A(p)` whose relative
//! variance stays bounded when failures are rare.
//!
//! Failed cuts are found without scanning the catalogue: after the edge
//! failures the graph splits into `R` components, and the failed cuts are
//! exactly the `2^(R-1) - 1` bipartitions of those components. Each one is
//! looked up by identifier and confirmed by replay.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cutstore::CutCollection;
use crate::error::{Error, Result};
use crate::multigraph::{MultiGraph, UnionFind, VertexSet};
use crate::rca::reconstruct;
use crate::rng::{StreamKey, StreamRng};
use crate::util::{par_map, KahanSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MonteCarlo,
    CutEnumeration,
}

/// Result of one estimator trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub q_index: usize,
    /// Components after the failures.
    pub r: usize,
    /// Catalogued cuts that failed; at least 1 because `Q` did.
    pub j: u64,
    pub u_hat: f64,
    /// Bipartitions looked up, `2^(R-1) - 1`.
    pub checks: u64,
}

/// Point estimate with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Estimated relative standard deviation of `value`.
    pub rel_std: f64,
    pub trials: u64,
    pub method: Method,
    pub seed: StreamKey,
    /// Trials discarded because too many components appeared.
    pub aborts: u64,
    /// Sample variance of one trial divided by the squared mean.
    pub rel_var_per_trial: f64,
    /// Mean number of catalogue lookups per trial.
    pub mean_checks: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Trials are `⌈λ ε^-2⌉`.
    pub lambda: f64,
    /// Trials with more components are discarded and redrawn.
    pub r_max: usize,
    /// Median of this many group means instead of the plain mean.
    pub mom_groups: Option<u32>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { lambda: 64.0, r_max: 30, mom_groups: None }
    }
}

/// Redraws allowed per trial before giving up.
const MAX_REDRAWS: u32 = 1000;

/// Picks a record with probability `p^weight / Σ p^|C|`.
pub fn weighted_select(a: &CutCollection, rng: &mut impl Rng) -> Result<usize> {
    if a.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let total = a.sum_pw();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("collection has no selection weights".into()));
    }
    let x = rng.random::<f64>() * total;
    let prefix = a.prefix();
    let i = prefix.partition_point(|&s| s <= x);
    Ok(i.min(prefix.len() - 1))
}

/// One trial. `None` when the failures leave more than `r_max` components.
pub fn sample_once(g: &MultiGraph, a: &CutCollection, r_max: usize, rng: &mut StreamRng) -> Result<Option<TrialOutcome>> {
    let p = a.p().ok_or_else(|| Error::InvalidParameter("collection has no probability attached".into()))?;
    let qi = weighted_select(a, rng)?;
    let q = reconstruct(&a.records()[qi], g, &a.replay, &a.table)?;
    let side = g.sides(&q.shore)?;
    let n = g.n();

    let mut uf = UnionFind::new(n);
    for (u, v, k) in g.edges() {
        let (u, v) = (u - 1, v - 1);
        if side[u] != side[v] {
            continue;
        }
        // Only whether all k parallel copies fail matters for connectivity.
        let all_fail = rng.random::<f64>() < p.powf(k as f64);
        if !all_fail {
            uf.union(u, v);
        }
    }
    let (r, labels) = uf.labels();
    if r > r_max {
        return Ok(None);
    }

    let mask = a.table.mask();
    let mut comp_tag = vec![0u64; r];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); r];
    for u in 0..n {
        let grp = g.group(u + 1);
        for &x in grp {
            comp_tag[labels[u]] = comp_tag[labels[u]].wrapping_add(a.table.value(x)) & mask;
        }
        members[labels[u]].push(u);
    }
    let anchor = labels[g.locate(1).expect("vertex 1 exists") - 1];
    let others: Vec<usize> = (0..r).filter(|&c| c != anchor).collect();

    let mut j = 0u64;
    let checks = (1u64 << (r - 1)) - 1;
    for subset in 0..checks {
        let mut id = comp_tag[anchor];
        for (bit, &c) in others.iter().enumerate() {
            if (subset >> bit) & 1 == 1 {
                id = id.wrapping_add(comp_tag[c]) & mask;
            }
        }
        let Some(idx) = a.find(id) else { continue };
        let stored = reconstruct(&a.records()[idx], g, &a.replay, &a.table)?;
        let mut shore = VertexSet::empty(g.orig_n());
        let mut add = |c: usize| {
            for &u in &members[c] {
                for &x in g.group(u + 1) {
                    shore.insert(x as usize);
                }
            }
        };
        add(anchor);
        for (bit, &c) in others.iter().enumerate() {
            if (subset >> bit) & 1 == 1 {
                add(c);
            }
        }
        if stored.shore == shore {
            j += 1;
        }
    }
    debug_assert!(j >= 1, "the selected cut must be among the failed ones");
    let j = j.max(1);
    Ok(Some(TrialOutcome { q_index: qi, r, j, u_hat: a.sum_pw() / j as f64, checks }))
}

/// Trial count `⌈λ ε^-2⌉`.
pub fn trial_count(lambda: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1/2]")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    Ok((lambda / (eps * eps)).ceil() as u64)
}

/// Running moments of per-trial values, merged associatively.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Moments {
    pub count: u64,
    pub sum: KahanSum,
    pub sum_sq: KahanSum,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.mean();
        ((self.sum_sq.value() - n * m * m) / (n - 1.0)).max(0.0)
    }
}

/// Estimates `U_A(p)` to relative error `eps`. The catalogue must contain a
/// minimum cut of `g`.
pub fn estimate_ua(g: &MultiGraph, a: &CutCollection, eps: f64, key: StreamKey, config: &EstimatorConfig) -> Result<Estimate> {
    let trials = trial_count(config.lambda, eps)?;
    if config.r_max < 1 || config.r_max > 63 {
        return Err(Error::InvalidParameter(format!("r_max = {} outside 1..=63", config.r_max)));
    }
    let (c, _) = g.min_cut()?;
    if !a.records().iter().any(|r| r.weight == c) {
        return Err(Error::NoMinCut(c));
    }
    let outcomes = par_map(trials, |i| -> Result<(TrialOutcome, u64)> {
        let trial_key = key.child(i);
        for attempt in 0..MAX_REDRAWS {
            let mut rng = trial_key.child(attempt as u64).rng();
            if let Some(t) = sample_once(g, a, config.r_max, &mut rng)? {
                return Ok((t, attempt as u64));
            }
        }
        Err(Error::CapExceeded { what: "redraws of one trial", actual: MAX_REDRAWS as u64, cap: MAX_REDRAWS as u64 })
    });
    let mut all = Moments::default();
    let mut aborts = 0;
    let mut checks = KahanSum::default();
    let mut values = Vec::with_capacity(trials as usize);
    for o in outcomes {
        let (t, redraws) = o?;
        all.push(t.u_hat);
        aborts += redraws;
        checks.add(t.checks as f64);
        values.push(t.u_hat);
    }
    let mean = all.mean();
    let var = all.variance();
    let value = match config.mom_groups {
        Some(k) if k >= 2 => median_of_means(&values, k as usize),
        _ => mean,
    };
    let rel_var_per_trial = if mean > 0.0 { var / (mean * mean) } else { 0.0 };
    Ok(Estimate {
        value: value.min(1.0),
        rel_std: (rel_var_per_trial / trials as f64).sqrt(),
        trials,
        method: Method::CutEnumeration,
        seed: key,
        aborts,
        rel_var_per_trial,
        mean_checks: checks.value() / trials as f64,
    })
}

/// Median of the means of `k` contiguous, nearly equal groups.
pub(crate) fn median_of_means(values: &[f64], k: usize) -> f64 {
    let k = k.min(values.len()).max(1);
    let mut means: Vec<f64> = (0..k)
        .map(|g| {
            let lo = g * values.len() / k;
            let hi = (g + 1) * values.len() / k;
            values[lo..hi].iter().copied().collect::<KahanSum>().value() / (hi - lo) as f64
        })
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    }
}
