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

//! Closed-form bound functions and numerical checks of their properties.
//!
//! Parameters follow the usual conventions: `β` and `δ` from
//! `Z̄ = n^(-2-δ+β)` and `p^c = n^(-2-δ)`, `ρ = ln(1/ε) / ln n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::MultiGraph;
use crate::util::par_map;

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn check_h_args(x: f64, beta: f64, delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("x = {x} outside [0, 1]")));
    }
    if !(0.0..=2.0).contains(&beta) {
        return Err(invalid(format!("beta = {beta} outside [0, 2]")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!("delta = {delta} must be positive")));
    }
    Ok(())
}

fn h_raw(x: f64, beta: f64, delta: f64) -> f64 {
    if beta >= 1.0 {
        2.0 * (1.0 - x)
    } else if x >= beta {
        2.0 * (2.0 + delta) * ((3.0 - beta + delta).ln() - (2.0 - beta + delta + x).ln())
    } else {
        2.0 * (2.0 + delta) * ((3.0 - beta + delta).ln() - (2.0 + delta).ln()) + 2.0 * (beta - x)
    }
}

fn h_prime_raw(x: f64, beta: f64, delta: f64) -> f64 {
    if beta >= 1.0 || x < beta {
        -2.0
    } else {
        -2.0 * (2.0 + delta) / (2.0 - beta + delta + x)
    }
}

fn hbar_raw(x: f64, beta: f64, delta: f64) -> f64 {
    let u = 3.0 - beta + delta;
    (delta + 2.0) * (1.0 - x) * (5.0 - 2.0 * beta + 2.0 * delta + x) / (u * u)
}

fn hbar_prime_raw(x: f64, beta: f64, delta: f64) -> f64 {
    let u = 3.0 - beta + delta;
    -2.0 * (delta + 2.0) * (2.0 - beta + delta + x) / (u * u)
}

/// Exponent bound for the number of surviving cuts, piecewise in `x`.
pub fn h(x: f64, beta: f64, delta: f64) -> Result<f64> {
    check_h_args(x, beta, delta)?;
    Ok(h_raw(x, beta, delta))
}

/// Derivative of [`h`] in `x` (one-sided from the right at `x = β`).
pub fn h_prime(x: f64, beta: f64, delta: f64) -> Result<f64> {
    check_h_args(x, beta, delta)?;
    Ok(h_prime_raw(x, beta, delta))
}

/// Rational upper envelope used with the cut-count bound.
pub fn hbar(x: f64, beta: f64, delta: f64) -> Result<f64> {
    check_h_args(x, beta, delta)?;
    Ok(hbar_raw(x, beta, delta))
}

pub fn hbar_prime(x: f64, beta: f64, delta: f64) -> Result<f64> {
    check_h_args(x, beta, delta)?;
    Ok(hbar_prime_raw(x, beta, delta))
}

/// Bound on the expected `S_i` of a Contraction Algorithm run on a graph
/// with odd min-cut `c` and at most `k` min-cuts. `c = 1` uses the limit
/// `ln(n/i + (k/i) ln(n/i))`.
pub fn f_odd(i: usize, n: usize, k: u64, c: u64) -> Result<f64> {
    if !(3 <= i && i <= n) {
        return Err(invalid(format!("need 3 <= i <= n, got i = {i}, n = {n}")));
    }
    if k > 2 * n as u64 {
        return Err(invalid(format!("k = {k} exceeds 2n")));
    }
    if c % 2 == 0 {
        return Err(invalid(format!("c = {c} must be odd")));
    }
    let (i, n, k) = (i as f64, n as f64, k as f64);
    let arg = if c == 1 {
        n / i + (k / i) * (n / i).ln()
    } else {
        let cf = c as f64;
        ((i / n).powf(2.0 / (cf + 1.0) - 1.0) * (2.0 * k + (cf - 1.0) * n) - 2.0 * k) / ((cf - 1.0) * i)
    };
    assert!(arg > 0.0, "f_odd: nonpositive log argument {arg}");
    Ok(arg.ln())
}

/// Bound on the expected `S_i` of the Contraction Process started at `r`
/// vertices with discounted cut mass `a = A_γ`.
pub fn f_rel(i: usize, r: usize, a: f64, gamma: f64) -> Result<f64> {
    if !(100 <= i && i <= r) {
        return Err(invalid(format!("need 100 <= i <= r, got i = {i}, r = {r}")));
    }
    let (i, r) = (i as f64, r as f64);
    if !(gamma >= 2.0 * r.ln()) {
        return Err(invalid(format!("gamma = {gamma} below 2 ln r")));
    }
    if !(a > 0.0) {
        return Err(invalid(format!("a = {a} must be positive")));
    }
    if a <= 1.0 {
        let num = (a / i).ln();
        let den = (a / r).ln();
        Ok(gamma * (1.0 - num * num / (den * den)))
    } else {
        Ok(2.0 * (r / i).ln())
    }
}

/// Upper bounds on `α*` in terms of `β, δ, ρ`; the second applies only for
/// `β <= 3/2`. Lower-order terms are dropped.
pub fn alpha_star_bounds(beta: f64, delta: f64, rho: f64) -> Result<(f64, Option<f64>)> {
    if !(delta > 0.0) {
        return Err(invalid(format!("delta = {delta} must be positive")));
    }
    let core = 2.0 - beta + delta + rho;
    let bound1 = core / delta;
    let bound2 = (beta <= 1.5).then(|| {
        let u = 3.0 - beta + delta;
        let v = 2.0 - beta + delta;
        u * u * core / (v * v * (2.0 + delta))
    });
    Ok((bound1, bound2))
}

/// Cycle on `n` vertices with bundles of `(c+1)/2` parallel edges, except
/// one bundle of `(c-1)/2`. Its min-cut is `c`, while any two heavy bundles
/// form a cut of weight `c + 1`.
pub fn make_odd_cycle_graph(n: usize, c: u64) -> Result<MultiGraph> {
    if c < 3 || c % 2 == 0 {
        return Err(invalid(format!("c = {c} must be odd and at least 3")));
    }
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    let mut edges: Vec<(usize, usize, u64)> = (1..n).map(|v| (v, v + 1, (c + 1) / 2)).collect();
    edges.push((n, 1, (c - 1) / 2));
    MultiGraph::from_edges(n, &edges)
}

/// Bound on `|∂h/∂δ|` for `β ∈ [0,1]`, `δ ∈ [β-s, 3/2]`, `x ∈ [0,1]`.
///
/// With `u = 2-β+δ >= 2-s`, on `x >= β` the partial is
/// `2 ln((u+1)/(u+x)) - 2(2+δ)(1-x)/((u+x)(u+1))`, each term in `[0, 1.17]`
/// in absolute value; on `x < β` it is `2 ln t + 2/t - 2` with
/// `t = (3-β+δ)/(2+δ) ∈ [1, 3/2]`, at most 0.15. `∂h/∂β >= 0` on both
/// pieces, so only `δ` needs a margin.
pub const H_DDELTA_LIPSCHITZ: f64 = 1.2;

/// Threshold the grid must clear.
pub const GRID_SLACK_LIMIT: f64 = -0.01;

/// Worst value of one checked inequality over the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Largest `lhs - rhs`; the check passes when this is at most `limit`.
    pub worst_slack: f64,
    pub limit: f64,
    pub passed: bool,
    /// `(b, d, r or x)` where the worst slack occurred.
    pub at: [f64; 3],
    pub points: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub step: f64,
    pub x_step: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Result for one `(b, d, r)` cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub y: f64,
    pub a_max: f64,
    /// Upper bound of `2y + a max(h(y), h̄(y/a)) - 2.95 - 1.5r` over the cell.
    pub slack: f64,
}

/// Upper bound on `a` over the cell `[b,b+s] × [d,d+s] × [r,r+s]`, as an
/// affine function of `r`: `a_max = base + (r+s) slope`.
fn a_max_parts(b: f64, d: f64, s: f64) -> (f64, f64) {
    let u = 3.0 - b + d;
    let v = 2.0 - b + d;
    let base = u * u / ((2.0 + d) * v);
    let w = 3.0 - b + d - s;
    let z = 2.0 - b + d - s;
    (base, w * w / ((2.0 + d) * z * z))
}

/// Upper bound over the cell of `2y + a_max max(h(y), h̄(y/a_max))` minus
/// `2.95 + 1.5r`, evaluated at the `(b+s, d+s)` corner. `h̄` is increasing
/// in `β` and `δ` for `β <= 1`; `h` is increasing in `β` and gets a
/// Lipschitz margin in `δ`.
fn cell_slack(y: f64, a_max: f64, b: f64, d: f64, r: f64, s: f64) -> f64 {
    let (bc, dc) = (b + s, d + s);
    let hh = h_raw(y, bc, dc) + s * H_DDELTA_LIPSCHITZ;
    let hb = hbar_raw(y / a_max, bc, dc);
    2.0 * y + a_max * hh.max(hb) - 2.95 - 1.5 * r
}

/// Solves `h(y) = h̄(y/a)` on `[0,1]` by bisection. `h̄ <= h` at `y = 0`
/// and `h(1) = 0 < h̄(1/a)` for `a > 1`, so a root exists.
fn balance_y(a: f64, beta: f64, delta: f64) -> f64 {
    let f = |y: f64| h_raw(y, beta, delta) - hbar_raw(y / a, beta, delta);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if f(lo) <= 0.0 {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step <= 0.01 {
        Ok(())
    } else {
        Err(invalid(format!("grid step {step} outside (0, 0.01]")))
    }
}

/// Evaluates a single cell with `y` balancing `h` and `h̄` at `(b, d)`.
pub fn grid_cell(b: f64, d: f64, r: f64, step: f64) -> Result<CellResult> {
    check_step(step)?;
    if !(0.0..1.0).contains(&b) || d < b - step - 1e-12 || d > 1.5 || !(0.0..=2.1).contains(&r) {
        return Err(invalid(format!("cell ({b}, {d}, {r}) outside the grid")));
    }
    let (base, slope) = a_max_parts(b, d, step);
    let a_max = base + (r + step) * slope;
    let y = balance_y(a_max, b, d.max(0.0));
    Ok(CellResult { y, a_max, slack: cell_slack(y, a_max, b, d, r, step) })
}

#[derive(Clone, Copy)]
struct Worst {
    value: f64,
    at: [f64; 3],
    points: u64,
}

impl Worst {
    fn new() -> Self {
        Worst { value: f64::NEG_INFINITY, at: [f64::NAN; 3], points: 0 }
    }

    fn see(&mut self, value: f64, at: [f64; 3]) {
        self.points += 1;
        // NaN compares false, so force it to be reported.
        if value > self.value || value.is_nan() && !self.value.is_nan() {
            self.value = value;
            self.at = at;
        }
    }

    fn merge(&mut self, other: &Worst) {
        let pts = self.points + other.points;
        if other.value > self.value || other.value.is_nan() && !self.value.is_nan() {
            *self = *other;
        }
        self.points = pts;
    }

    fn result(&self, name: &str, limit: f64) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            worst_slack: self.value,
            limit,
            passed: self.value <= limit,
            at: self.at,
            points: self.points,
        }
    }
}

const N_CHECKS: usize = 8;
const CHECK_NAMES: [&str; N_CHECKS] = [
    "y-selection: 2y + a_max max(h, hbar) - 2.95 - 1.5r",
    "hbar(0) >= 10/9",
    "hbar(0) <= 20/9",
    "hbar(0) <= 2 for beta <= 3/2",
    "h'(x) >= -2",
    "h'(x) <= -4/3",
    "hbar'(x) in [-4, 0]",
    "hbar(x) <= h(x)",
];
/// Closed inequalities tolerate rounding in the last few bits.
const CLOSED_TOL: f64 = 1e-12;

/// Exhaustive check of the `y`-selection inequality over
/// `b ∈ {0, s, .., 1-s}`, `d ∈ {b-s, b, .., 3/2-s}`, `r ∈ {0, s, .., 2.1}`,
/// plus the properties of `h` and `h̄` on the `(b, d)` grid with `d >= b`
/// and `x` on a grid of step `max(s, 0.01)`.
///
/// `y` is chosen per cell by a Newton iteration warm-started from the
/// previous `r`, tracking the balance point of `h` and `h̄` at the upper
/// corner; any `y` gives a valid bound, so the iteration only affects
/// tightness.
pub fn grid_verify_appendix(step: f64) -> Result<GridReport> {
    check_step(step)?;
    let s = step;
    let nb = (1.0 / s).round() as i64;
    let nd_top = (1.5 / s).round() as i64;
    let nr = (2.1 / s).round() as i64;
    let x_step = s.max(0.01);
    let nx = (1.0 / x_step).round() as i64;

    let rows = par_map(nb as u64, |bi| {
        let bi = bi as i64;
        let b = bi as f64 * s;
        let mut w = [Worst::new(); N_CHECKS];
        for di in (bi - 1)..nd_top {
            let d = di as f64 * s;
            let (bc, dc) = (b + s, d + s);
            let (base, slope) = a_max_parts(b, d, s);
            let mut y = balance_y(base + s * slope, bc, dc);
            // Constant parts of h and h̄ at the corner, hoisted out of the r loop.
            let ln_top = (3.0 - bc + dc).ln();
            let flat = 2.0 * (2.0 + dc) * (ln_top - (2.0 + dc).ln());
            let u = 3.0 - bc + dc;
            let hb_scale = (dc + 2.0) / (u * u);
            for ri in 0..=nr {
                let r = ri as f64 * s;
                let a = base + (r + s) * slope;
                let (hv, hd) = if bc >= 1.0 {
                    (2.0 * (1.0 - y), -2.0)
                } else if y >= bc {
                    let z = 2.0 - bc + dc + y;
                    (2.0 * (2.0 + dc) * (ln_top - z.ln()), -2.0 * (2.0 + dc) / z)
                } else {
                    (flat + 2.0 * (bc - y), -2.0)
                };
                let t = y / a;
                let hb = hb_scale * (1.0 - t) * (5.0 - 2.0 * bc + 2.0 * dc + t);
                let hbd = -2.0 * hb_scale * (2.0 - bc + dc + t) / a;
                let value = 2.0 * y + a * (hv + s * H_DDELTA_LIPSCHITZ).max(hb) - 2.95 - 1.5 * r;
                w[0].see(value, [b, d, r]);
                // Newton step toward h(y) = h̄(y/a) for the next cell.
                let f = hv - hb;
                let fd = hd - hbd;
                if fd < 0.0 {
                    y = (y - f / fd).clamp(0.0, 1.0);
                }
            }
            if di < bi {
                continue;
            }
            let hb0 = hbar_raw(0.0, b, d);
            w[1].see(10.0 / 9.0 - hb0, [b, d, 0.0]);
            w[2].see(hb0 - 20.0 / 9.0, [b, d, 0.0]);
            w[3].see(hb0 - 2.0, [b, d, 0.0]);
            for xi in 0..=nx {
                let x = xi as f64 * x_step;
                let hp = h_prime_raw(x, b, d);
                w[4].see(-2.0 - hp, [b, d, x]);
                w[5].see(hp + 4.0 / 3.0, [b, d, x]);
                let hbp = hbar_prime_raw(x, b, d);
                w[6].see((-4.0 - hbp).max(hbp), [b, d, x]);
                w[7].see(hbar_raw(x, b, d) - h_raw(x, b, d), [b, d, x]);
            }
        }
        w
    });
    let mut total = [Worst::new(); N_CHECKS];
    for row in &rows {
        for (t, r) in total.iter_mut().zip(row) {
            t.merge(r);
        }
    }
    let checks: Vec<CheckResult> = total
        .iter()
        .enumerate()
        .map(|(j, w)| w.result(CHECK_NAMES[j], if j == 0 { GRID_SLACK_LIMIT } else { CLOSED_TOL }))
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(GridReport { step, x_step, checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn h_examples() {
        for beta in [0.0, 0.3, 1.0] {
            assert!(h(1.0, beta, 0.7).unwrap().abs() < 1e-12);
        }
        assert_eq!(h(0.0, 1.5, 0.7).unwrap(), 2.0);
        assert_eq!(h(0.25, 1.0, 0.7).unwrap(), 1.5);
        let v = h(0.0, 0.0, 2.0).unwrap();
        assert!(close(v, 8.0 * (5.0f64.ln() - 4.0f64.ln())));
        assert!((v - 1.785).abs() < 1e-3);
        assert!(h(1.1, 0.0, 1.0).is_err());
        assert!(h(0.5, 0.0, 0.0).is_err());
        assert!(h(0.5, 2.5, 1.0).is_err());
    }

    #[test]
    fn h_is_continuous_at_beta() {
        for (beta, delta) in [(0.2, 0.5), (0.7, 1.3), (0.99, 0.1)] {
            let below = h(beta - 1e-10, beta, delta).unwrap();
            let above = h(beta, beta, delta).unwrap();
            assert!((below - above).abs() < 1e-8);
        }
    }

    #[test]
    fn hbar_examples() {
        assert_eq!(hbar(1.0, 0.4, 1.0).unwrap(), 0.0);
        assert!(close(hbar(0.0, 0.0, 2.0).unwrap(), 1.44));
        assert!(close(hbar(0.0, 0.0, 0.0 + f64::MIN_POSITIVE).unwrap(), 10.0 / 9.0));
    }

    #[test]
    fn alpha_star_bound_examples() {
        let (b1, b2) = alpha_star_bounds(1.5, 0.8, 0.0).unwrap();
        assert!(close(b1, (0.5 + 0.8) / 0.8));
        assert!(b2.is_some());
        let (b1, b2) = alpha_star_bounds(0.0, 2.0, 0.0).unwrap();
        assert!(close(b1, 2.0));
        assert!(close(b2.unwrap(), 25.0 / 16.0));
        assert_eq!(alpha_star_bounds(1.6, 2.0, 0.0).unwrap().1, None);
        assert!(alpha_star_bounds(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn f_odd_examples() {
        assert!(f_odd(10, 10, 7, 3).unwrap().abs() < 1e-12);
        assert!(f_odd(10, 10, 7, 1).unwrap().abs() < 1e-12);
        for (i, n) in [(3, 10), (5, 40), (17, 64)] {
            let want = 1.5 * (n as f64 / i as f64).ln();
            assert!(close(f_odd(i, n, 0, 3).unwrap(), want));
        }
        assert!(f_odd(2, 10, 0, 3).is_err());
        assert!(f_odd(3, 10, 21, 3).is_err());
        assert!(f_odd(3, 10, 0, 4).is_err());
    }

    #[test]
    fn f_odd_is_increasing_and_concave_in_k() {
        for c in [1, 3, 5, 7] {
            for (i, n) in [(3, 8), (4, 20), (10, 64)] {
                let vals: Vec<f64> = (0..=2 * n as u64).map(|k| f_odd(i, n, k, c).unwrap()).collect();
                for w in vals.windows(3) {
                    assert!(w[1] > w[0] && w[2] > w[1]);
                    assert!(w[2] - w[1] <= w[1] - w[0] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn f_rel_examples() {
        let g = 2.0 * 500f64.ln();
        assert_eq!(f_rel(300, 300, 0.5, g).unwrap(), 0.0);
        assert!(close(f_rel(120, 500, 1.5, g).unwrap(), 2.0 * (500.0f64 / 120.0).ln()));
        assert!(f_rel(99, 500, 0.5, g).is_err());
        assert!(f_rel(120, 500, 0.5, 1.0).is_err());
        assert!(f_rel(120, 500, 0.0, g).is_err());
        let vals: Vec<f64> = (1..100).map(|j| f_rel(150, 400, j as f64 / 100.0, g).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[1] > w[0]);
            assert!(w[2] - w[1] <= w[1] - w[0] + 1e-12);
        }
    }

    #[test]
    fn odd_cycle_examples() {
        let g = make_odd_cycle_graph(5, 3).unwrap();
        let bundles: Vec<u64> = g.edges().iter().map(|e| e.2).collect();
        assert_eq!(bundles.iter().filter(|&&k| k == 2).count(), 4);
        assert_eq!(bundles.iter().filter(|&&k| k == 1).count(), 1);
        assert_eq!(g.min_cut().unwrap().0, 3);
        let oracle = Oracle::default();
        let cuts = oracle.alpha_cuts(&g, 4.0 / 3.0).unwrap();
        assert_eq!(cuts.iter().filter(|c| c.weight == 4).count(), 6);
        let tri = make_odd_cycle_graph(3, 3).unwrap();
        assert_eq!(tri.edges(), vec![(1, 2, 2), (1, 3, 1), (2, 3, 2)]);
        assert!(make_odd_cycle_graph(5, 4).is_err());
        assert!(make_odd_cycle_graph(2, 3).is_err());
    }

    #[test]
    fn single_cell() {
        let cell = grid_cell(0.0, 1.0, 0.0, 0.001).unwrap();
        assert!((0.0..=1.0).contains(&cell.y));
        assert!(cell.slack <= GRID_SLACK_LIMIT, "{cell:?}");
        let bal = h(cell.y, 0.0, 1.0).unwrap() - hbar(cell.y / cell.a_max, 0.0, 1.0).unwrap();
        assert!(bal.abs() < 1e-9);
    }

    #[test]
    fn coarse_grid_passes() {
        let rep = grid_verify_appendix(0.01).unwrap();
        for c in &rep.checks {
            assert!(c.passed, "{c:?}");
            assert!(c.points > 0);
        }
        assert!(grid_verify_appendix(0.02).is_err());
        assert!(grid_verify_appendix(0.0).is_err());
    }

    proptest! {
        #[test]
        fn h_partials_within_margins(beta in 0.0f64..1.0, frac in 0.0f64..1.0, x in 0.0f64..1.0) {
            let delta = (beta - 0.001).max(1e-6) + frac * (1.5 - beta);
            let e = 1e-6;
            let dd = (h_raw(x, beta, delta + e) - h_raw(x, beta, delta)) / e;
            prop_assert!(dd.abs() <= H_DDELTA_LIPSCHITZ);
            if beta + e < 1.0 {
                let db = (h_raw(x, beta + e, delta) - h_raw(x, beta, delta)) / e;
                prop_assert!(db >= -1e-6);
            }
        }

        #[test]
        fn hbar_increasing_in_beta_and_delta(beta in 0.0f64..1.0, delta in 0.0f64..1.5, x in 0.0f64..1.0) {
            let e = 1e-6;
            prop_assert!(hbar_raw(x, beta + e, delta) >= hbar_raw(x, beta, delta) - 1e-12);
            prop_assert!(hbar_raw(x, beta, delta + e) >= hbar_raw(x, beta, delta) - 1e-12);
        }

        #[test]
        fn derivatives_match_finite_differences(beta in 0.0f64..2.0, delta in 0.01f64..3.0, x in 0.0f64..0.99) {
            let e = 1e-7;
            if (x - beta).abs() > 1e-3 {
                let fd = (h_raw(x + e, beta, delta) - h_raw(x, beta, delta)) / e;
                prop_assert!((fd - h_prime_raw(x, beta, delta)).abs() < 1e-4);
            }
            let fd = (hbar_raw(x + e, beta, delta) - hbar_raw(x, beta, delta)) / e;
            prop_assert!((fd - hbar_prime_raw(x, beta, delta)).abs() < 1e-4);
        }
    }
}
