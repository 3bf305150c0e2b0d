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

//! Browser bindings for the demo page in `www/`.
//!
//! Graphs are named as in [`relcut::corpus::named`]. Results come back as
//! flat `Float64Array`s so the page needs no serialization layer.

use wasm_bindgen::prelude::*;

use relcut::bounds::{f_odd, h, hbar};
use relcut::contraction::{potential, run_ca};
use relcut::oracle::Oracle;
use relcut::pipeline::{estimate_unreliability, PipelineConfig};
use relcut::{corpus, MultiGraph, StreamKey};

fn graph(name: &str) -> Result<MultiGraph, JsError> {
    corpus::named(name).map_err(|e| JsError::new(&e.to_string()))
}

fn js(e: relcut::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Unreliability at `points` values of `p` spaced log-uniformly in
/// `[p_lo, p_hi]`, as `(p, estimate, exact, method)` quadruples. `exact` is
/// NaN when the graph is too large for the oracle; `method` is 0 for
/// Monte-Carlo and 1 for cut enumeration.
#[wasm_bindgen]
pub fn reliability_curve(name: &str, p_lo: f64, p_hi: f64, points: u32, eps: f64, seed: u64) -> Result<Box<[f64]>, JsError> {
    let g = graph(name)?;
    if !(0.0 < p_lo && p_lo <= p_hi && p_hi < 1.0) || points < 2 {
        return Err(JsError::new("need 0 < p_lo <= p_hi < 1 and at least 2 points"));
    }
    let oracle = Oracle::default();
    let mut out = Vec::with_capacity(4 * points as usize);
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let p = (p_lo.ln() + t * (p_hi.ln() - p_lo.ln())).exp();
        let r = estimate_unreliability(&g, p, eps, StreamKey::from_seed(seed).child(i as u64), &PipelineConfig::default())
            .map_err(js)?;
        let exact = oracle.exact_u(&g, p).unwrap_or(f64::NAN);
        let method = match r.estimate.method {
            relcut::estimator::Method::MonteCarlo => 0.0,
            relcut::estimator::Method::CutEnumeration => 1.0,
        };
        out.extend([p, r.estimate.value, exact, method]);
    }
    Ok(out.into_boxed_slice())
}

/// Mean potential `S_i` over `runs` contraction runs on an odd-min-cut
/// graph, with the bound `f_odd(i, n, k)`, as `(i, mean, bound)` triples
/// for `i = 3..n`. `k` is the exact min-cut count, so `n` is capped at 20.
#[wasm_bindgen]
pub fn potential_curve(name: &str, runs: u32, seed: u64) -> Result<Box<[f64]>, JsError> {
    let g = graph(name)?;
    let n = g.n();
    if n > 20 || n < 4 {
        return Err(JsError::new("pick a graph with 4 to 20 vertices"));
    }
    let (c, _) = g.min_cut().map_err(js)?;
    if c % 2 == 0 {
        return Err(JsError::new("the bound needs an odd minimum cut"));
    }
    let k = Oracle::default().alpha_cuts(&g, 1.0).map_err(js)?.len() as u64;
    let mut sum = vec![0.0; n + 1];
    for t in 0..runs.max(1) {
        let traj = run_ca(&g, 1.5, StreamKey::from_seed(seed).child(t as u64)).map_err(js)?;
        for (i, s) in potential(&traj, c).iter() {
            sum[i] += s;
        }
    }
    let mut out = Vec::new();
    for i in 3..=n {
        out.extend([i as f64, sum[i] / runs.max(1) as f64, f_odd(i, n, k, c).map_err(js)?]);
    }
    Ok(out.into_boxed_slice())
}

/// `(x, h(x), h̄(x))` on `points` evenly spaced `x` in `[0, 1]`.
#[wasm_bindgen]
pub fn bound_curves(beta: f64, delta: f64, points: u32) -> Result<Box<[f64]>, JsError> {
    let points = points.max(2);
    let mut out = Vec::with_capacity(3 * points as usize);
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        out.extend([x, h(x, beta, delta).map_err(js)?, hbar(x, beta, delta).map_err(js)?]);
    }
    Ok(out.into_boxed_slice())
}
