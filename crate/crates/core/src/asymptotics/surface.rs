//! Growth-rate surface of the second-moment summands.
//!
//! The `(i, j)` summand of the second moment grows like `exp(n s(eta, gamma))`
//! with `eta = i/n` the overlap of the two assignments and `gamma = j/(alpha n)`
//! the fraction of clauses satisfied by both. The coefficient part of `s` is
//!
//! ```text
//! inf_{t > 0}  gamma alpha ln f(t) + alpha (c - gamma) (ln s(t1) + ln s(t3))
//!              - r (1 - eta) (ln t1 + ln t3) - r eta ln t2
//! ```
//!
//! which is convex in `ln t`. The minimiser solves the saddle equations
//! `a_g(t) = (r(1-eta), r eta, r(1-eta))` and is symmetric in `t1, t3`, so the
//! solver works on the reduced pair `(ln t1, ln t2)` with `t3 = t1`. A target
//! outside the Newton polytope of the summand makes the infimum `-inf`; that
//! is the growth rate of a summand that vanishes identically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfunc::{build_f, build_s};
use crate::params::{entropy, Params};

const LN2: f64 = std::f64::consts::LN_2;
const MAX_NEWTON: usize = 200;
/// `|ln t|` beyond which the minimiser is treated as escaping to the boundary.
const ESCAPE: f64 = 200.0;

/// Positive saddle point `(t1, t2, t3)` of the trivariate equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrivariateSaddle {
    pub t: [f64; 3],
    /// Max-norm of `a_g(t) - target`, evaluated on the full trivariate form.
    pub residual: f64,
    /// `B_ij = t_j d a_gi / d t_j`.
    pub b_matrix: [[f64; 3]; 3],
    pub det: f64,
    pub iterations: usize,
}

/// One evaluation of the growth-rate surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRatePoint {
    pub eta: f64,
    pub gamma: f64,
    /// `s(eta, gamma)` in nats per variable; `-inf` where the summand is zero.
    pub value: f64,
    /// Saddle `(t1, t2, t3)`; zero entries for variables that drop out on the
    /// boundary.
    pub saddle: Option<[f64; 3]>,
}

/// Minimiser of the coefficient objective in log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Inner {
    /// `(ln t1, ln t2)`; `-inf` marks a variable fixed at zero.
    pub z: [f64; 2],
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Mono {
    ln_coef: f64,
    eu: f64,
    ev: f64,
}

/// Precomputed monomial tables for one `(k, r, p)`.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    params: Params,
    alpha: f64,
    c: f64,
    /// `f(u, v, u)` grouped by `(e1 + e3, e2)`.
    f_reduced: Vec<Mono>,
    /// Full `f(t1, t2, t3)`: `(ln coef, [e1, e2, e3])`.
    f_full: Vec<(f64, [f64; 3])>,
    /// `s(x)`: `(ln coef, e)`.
    s_terms: Vec<(f64, f64)>,
}

struct Objective<'a> {
    model: &'a SurfaceModel,
    f_weight: f64,
    s_weight: f64,
    target: [f64; 2],
    active: [bool; 2],
    monos: Vec<Mono>,
}

struct Eval {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

fn logsumexp_stats2(monos: &[Mono], z: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let zu = if z[0].is_finite() { z[0] } else { 0.0 };
    let zv = if z[1].is_finite() { z[1] } else { 0.0 };
    let mut top = f64::NEG_INFINITY;
    for m in monos {
        top = top.max(m.ln_coef + m.eu * zu + m.ev * zv);
    }
    let (mut w, mut mu, mut mv, mut uu, mut uv, mut vv) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for m in monos {
        let wi = (m.ln_coef + m.eu * zu + m.ev * zv - top).exp();
        w += wi;
        mu += wi * m.eu;
        mv += wi * m.ev;
        uu += wi * m.eu * m.eu;
        uv += wi * m.eu * m.ev;
        vv += wi * m.ev * m.ev;
    }
    let (mu, mv) = (mu / w, mv / w);
    let cov = [
        [uu / w - mu * mu, uv / w - mu * mv],
        [uv / w - mu * mv, vv / w - mv * mv],
    ];
    (top + w.ln(), [mu, mv], cov)
}

fn logsumexp_stats1(terms: &[(f64, f64)], z: f64) -> (f64, f64, f64) {
    let top = terms
        .iter()
        .map(|(l, e)| l + e * z)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (l, e) in terms {
        let wi = (l + e * z - top).exp();
        w += wi;
        m1 += wi * e;
        m2 += wi * e * e;
    }
    let mean = m1 / w;
    (top + w.ln(), mean, (m2 / w - mean * mean).max(0.0))
}

impl Objective<'_> {
    fn eval(&self, z: [f64; 2]) -> Eval {
        let (lf, mf, cf) = logsumexp_stats2(&self.monos, z);
        let mut value = self.f_weight * lf;
        let mut grad = [self.f_weight * mf[0], self.f_weight * mf[1]];
        let mut hess = [
            [self.f_weight * cf[0][0], self.f_weight * cf[0][1]],
            [self.f_weight * cf[1][0], self.f_weight * cf[1][1]],
        ];
        if self.s_weight > 0.0 {
            let (ls, ms, vs) = logsumexp_stats1(&self.model.s_terms, z[0]);
            value += self.s_weight * ls;
            grad[0] += self.s_weight * ms;
            hess[0][0] += self.s_weight * vs;
        }
        for d in 0..2 {
            if self.active[d] {
                value -= self.target[d] * z[d];
                grad[d] -= self.target[d];
            } else {
                grad[d] = 0.0;
                hess[d] = [0.0, 0.0];
                hess[0][d] = 0.0;
                hess[1][d] = 0.0;
            }
        }
        Eval { value, grad, hess }
    }

    fn newton_direction(&self, e: &Eval) -> [f64; 2] {
        match self.active {
            [true, true] => {
                let [[a, b], [_, d]] = e.hess;
                let det = a * d - b * b;
                if a > 0.0 && det > 1e-14 * a * d {
                    [
                        -(d * e.grad[0] - b * e.grad[1]) / det,
                        -(a * e.grad[1] - b * e.grad[0]) / det,
                    ]
                } else {
                    let scale = (a + d).max(1e-300);
                    [-e.grad[0] / scale, -e.grad[1] / scale]
                }
            }
            [true, false] => [-e.grad[0] / e.hess[0][0].max(1e-300), 0.0],
            [false, true] => [0.0, -e.grad[1] / e.hess[1][1].max(1e-300)],
            [false, false] => [0.0, 0.0],
        }
    }

    /// Position of the target relative to the Newton polytope of the
    /// objective, i.e. the Minkowski sum of the scaled exponent hulls of
    /// `f^j` and `(s(t1) s(t3))^(cm - j)`.
    fn placement(&self) -> Placement {
        let tol = 1e-12 * self.model.params.r().max(1.0);
        let s_ends: Vec<f64> = if self.s_weight > 0.0 {
            let lo = self.model.s_terms.first().map_or(0.0, |t| t.1);
            let hi = self.model.s_terms.last().map_or(0.0, |t| t.1);
            vec![self.s_weight * lo, self.s_weight * hi]
        } else {
            vec![0.0]
        };
        match self.active {
            [true, true] => {
                let mut pts = Vec::with_capacity(self.monos.len() * s_ends.len());
                for m in &self.monos {
                    for s in &s_ends {
                        pts.push([self.f_weight * m.eu + s, self.f_weight * m.ev]);
                    }
                }
                let hull = convex_hull(pts);
                if hull.len() < 3 {
                    return Placement::Outside;
                }
                let d = signed_distance(&hull, self.target);
                if d > tol {
                    Placement::Interior
                } else if d >= -tol {
                    Placement::Boundary
                } else {
                    Placement::Outside
                }
            }
            [a, _] => {
                let axis = if a { 0 } else { 1 };
                let exps = self.monos.iter().map(|m| if a { m.eu } else { m.ev });
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for e in exps {
                    lo = lo.min(e);
                    hi = hi.max(e);
                }
                let (slo, shi) = if axis == 0 && s_ends.len() == 2 {
                    (s_ends[0], s_ends[1])
                } else {
                    (0.0, 0.0)
                };
                let (lo, hi) = (self.f_weight * lo + slo, self.f_weight * hi + shi);
                let t = self.target[axis];
                let d = (t - lo).min(hi - t);
                if d > tol {
                    Placement::Interior
                } else if d >= -tol {
                    Placement::Boundary
                } else {
                    Placement::Outside
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placement {
    Interior,
    Boundary,
    Outside,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain convex hull, counter-clockwise without repeated endpoint.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Smallest signed distance from `p` to the edges of a counter-clockwise
/// convex polygon; positive inside.
fn signed_distance(hull: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        best = best.min(cross(a, b, p) / len);
    }
    best
}

/// Outcome of minimising the coefficient objective.
enum InnerOutcome {
    Converged(Inner),
    /// Objective unbounded below: the summand vanishes.
    Infeasible,
}

impl SurfaceModel {
    pub fn new(params: &Params) -> Result<Self> {
        let k = params.k();
        let f = build_f(k)?;
        let mut reduced: Vec<((u32, u32), f64)> = Vec::new();
        let mut f_full = Vec::with_capacity(f.len());
        for (e, c) in f.float_terms() {
            f_full.push((c.ln(), [e[0] as f64, e[1] as f64, e[2] as f64]));
            let key = (e[0] + e[2], e[1]);
            match reduced.iter_mut().find(|(kk, _)| *kk == key) {
                Some((_, acc)) => *acc += c,
                None => reduced.push((key, c)),
            }
        }
        let f_reduced = reduced
            .into_iter()
            .map(|((eu, ev), c)| Mono {
                ln_coef: c.ln(),
                eu: eu as f64,
                ev: ev as f64,
            })
            .collect();
        let s_terms = build_s(k)?
            .float_terms()
            .into_iter()
            .map(|(e, c)| (c.ln(), e[0] as f64))
            .collect();
        Ok(SurfaceModel {
            params: *params,
            alpha: params.alpha(),
            c: params.c(),
            f_reduced,
            f_full,
            s_terms,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Admissible clause-intersection range `[2c - 1, c]`.
    pub fn gamma_range(&self) -> (f64, f64) {
        (2.0 * self.c - 1.0, self.c)
    }

    /// The uncorrelated point `(1/2, c^2)`.
    pub fn dominant_point(&self) -> (f64, f64) {
        (0.5, self.c * self.c)
    }

    fn check_domain(&self, eta: f64, gamma: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.gamma_range();
        let tol = 1e-12;
        if !(-tol..=1.0 + tol).contains(&eta) {
            return Err(Error::param("eta", format!("must lie in [0, 1], got {eta}")));
        }
        if !(gamma >= lo - tol && gamma <= hi + tol) {
            return Err(Error::param(
                "gamma",
                format!("must lie in [{lo}, {hi}], got {gamma}"),
            ));
        }
        Ok((eta.clamp(0.0, 1.0), gamma.clamp(lo, hi)))
    }

    fn objective(&self, eta: f64, gamma: f64) -> Option<Objective<'_>> {
        let r = self.params.r();
        let target = [2.0 * r * (1.0 - eta), r * eta];
        let active = [target[0] > 0.0, target[1] > 0.0];
        let s_weight = 2.0 * self.alpha * (self.c - gamma).max(0.0);
        if !active[0] && s_weight > 0.0 {
            // s(0) = 0 while the summand still needs type-1 edges
            return None;
        }
        let monos: Vec<Mono> = self
            .f_reduced
            .iter()
            .filter(|m| (active[0] || m.eu == 0.0) && (active[1] || m.ev == 0.0))
            .copied()
            .collect();
        if monos.is_empty() {
            return None;
        }
        Some(Objective {
            model: self,
            f_weight: gamma * self.alpha,
            s_weight,
            target,
            active,
            monos,
        })
    }

    fn minimise(&self, eta: f64, gamma: f64, warm: Option<[f64; 2]>) -> Result<InnerOutcome> {
        let Some(obj) = self.objective(eta, gamma) else {
            return Ok(InnerOutcome::Infeasible);
        };
        if obj.placement() == Placement::Outside {
            return Ok(InnerOutcome::Infeasible);
        }
        let scale = self.params.r().max(1.0);
        let mut z = match warm {
            Some(w) if w[0].is_finite() && w[1].is_finite() => w,
            _ => [0.0, 0.0],
        };
        for d in 0..2 {
            if !obj.active[d] {
                z[d] = 0.0;
            }
        }
        let mut e = obj.eval(z);
        let mut iterations = 0;
        let mut stalled = false;
        while iterations < MAX_NEWTON {
            let gnorm = e.grad[0].abs().max(e.grad[1].abs());
            if gnorm <= 1e-13 * scale {
                break;
            }
            if z[0].abs() > ESCAPE || z[1].abs() > ESCAPE {
                if gnorm > 1e-6 * scale {
                    return Ok(InnerOutcome::Infeasible);
                }
                break;
            }
            iterations += 1;
            let mut dir = obj.newton_direction(&e);
            let len = dir[0].abs().max(dir[1].abs());
            if len > 20.0 {
                dir = [dir[0] * 20.0 / len, dir[1] * 20.0 / len];
            }
            let slope = e.grad[0] * dir[0] + e.grad[1] * dir[1];
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial = [z[0] + step * dir[0], z[1] + step * dir[1]];
                let te = obj.eval(trial);
                // below the rounding level of the value, descent is judged by the gradient
                let flat = te.value <= e.value + 1e-13 * e.value.abs().max(1.0)
                    && te.grad[0].abs().max(te.grad[1].abs()) < gnorm;
                if te.value <= e.value + 1e-4 * step * slope || flat {
                    accepted = Some((trial, te));
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some((nz, ne)) => {
                    let moved = (nz[0] - z[0]).abs().max((nz[1] - z[1]).abs());
                    z = nz;
                    e = ne;
                    if moved < 1e-15 {
                        stalled = true;
                        break;
                    }
                }
                None => {
                    stalled = true;
                    break;
                }
            }
        }
        let gnorm = e.grad[0].abs().max(e.grad[1].abs());
        if gnorm > 1e-9 * scale && !(stalled && gnorm < 1e-7 * scale) {
            return Err(Error::NoConvergence {
                eta,
                gamma,
                reason: format!("gradient norm {gnorm:e} after {iterations} Newton steps"),
            });
        }
        for d in 0..2 {
            if !obj.active[d] {
                z[d] = f64::NEG_INFINITY;
            }
        }
        Ok(InnerOutcome::Converged(Inner {
            z,
            value: e.value,
            iterations,
        }))
    }

    /// Entropy and factorial part of the surface.
    fn combinatorial_part(&self, eta: f64, gamma: f64) -> f64 {
        let k = self.params.k() as f64;
        let (a, c) = (self.alpha, self.c);
        let mut v = (1.0 - k * a) * (LN2 + entropy(eta)) + a * entropy(c) + a * c * entropy(gamma / c);
        if 1.0 - c > 0.0 {
            v += a * (1.0 - c) * entropy((c - gamma) / (1.0 - c));
        }
        v
    }

    /// `s(eta, gamma)` together with the reduced saddle, warm-started from
    /// `warm` when given.
    pub(crate) fn evaluate(
        &self,
        eta: f64,
        gamma: f64,
        warm: Option<[f64; 2]>,
    ) -> Result<(f64, Option<Inner>)> {
        let (eta, gamma) = self.check_domain(eta, gamma)?;
        match self.minimise(eta, gamma, warm)? {
            InnerOutcome::Infeasible => Ok((f64::NEG_INFINITY, None)),
            InnerOutcome::Converged(inner) => {
                Ok((self.combinatorial_part(eta, gamma) + inner.value, Some(inner)))
            }
        }
    }

    /// `s(eta, gamma)`.
    pub fn value(&self, eta: f64, gamma: f64) -> Result<f64> {
        self.evaluate(eta, gamma, None).map(|(v, _)| v)
    }

    pub fn point(&self, eta: f64, gamma: f64) -> Result<GrowthRatePoint> {
        let (value, inner) = self.evaluate(eta, gamma, None)?;
        Ok(GrowthRatePoint {
            eta,
            gamma,
            value,
            saddle: inner.map(|i| {
                let u = i.z[0].exp();
                [u, i.z[1].exp(), u]
            }),
        })
    }

    /// Positive saddle point with its curvature matrix.
    pub fn saddle(&self, eta: f64, gamma: f64) -> Result<TrivariateSaddle> {
        let (eta, gamma) = self.check_domain(eta, gamma)?;
        let inner = match self.minimise(eta, gamma, None)? {
            InnerOutcome::Converged(i) => i,
            InnerOutcome::Infeasible => {
                return Err(Error::DegenerateSaddle(format!(
                    "no positive saddle at eta={eta}, gamma={gamma}: target outside the Newton polytope"
                )))
            }
        };
        let u = inner.z[0].exp();
        let v = inner.z[1].exp();
        let t = [u, v, u];
        let (a_g, b_matrix) = self.full_moments(eta, gamma, t);
        let r = self.params.r();
        let target = [r * (1.0 - eta), r * eta, r * (1.0 - eta)];
        let residual = (0..3)
            .map(|i| (a_g[i] - target[i]).abs())
            .fold(0.0, f64::max);
        Ok(TrivariateSaddle {
            t,
            residual,
            b_matrix,
            det: det3(&b_matrix),
            iterations: inner.iterations,
        })
    }

    /// `a_g(t)` and `B_g(t)` from the full trivariate monomial table,
    /// independently of the reduced solver.
    fn full_moments(&self, eta: f64, gamma: f64, t: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let _ = eta;
        let z: Vec<f64> = t.iter().map(|x| if *x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect();
        let logs: Vec<f64> = self
            .f_full
            .iter()
            .map(|(l, e)| {
                let mut acc = *l;
                for d in 0..3 {
                    if e[d] > 0.0 {
                        acc += e[d] * z[d];
                    }
                }
                acc
            })
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w = 0.0;
        let mut m = [0.0; 3];
        let mut s2 = [[0.0; 3]; 3];
        for ((_, e), l) in self.f_full.iter().zip(&logs) {
            let wi = (l - top).exp();
            w += wi;
            for a in 0..3 {
                m[a] += wi * e[a];
                for b in 0..3 {
                    s2[a][b] += wi * e[a] * e[b];
                }
            }
        }
        let fw = gamma * self.alpha;
        let sw = self.alpha * (self.c - gamma).max(0.0);
        let mut a_g = [0.0; 3];
        let mut bm = [[0.0; 3]; 3];
        for a in 0..3 {
            a_g[a] = fw * m[a] / w;
            for b in 0..3 {
                bm[a][b] = fw * (s2[a][b] / w - (m[a] / w) * (m[b] / w));
            }
        }
        if sw > 0.0 {
            for d in [0usize, 2] {
                if t[d] > 0.0 {
                    let (_, ms, vs) = logsumexp_stats1(&self.s_terms, z[d]);
                    a_g[d] += sw * ms;
                    bm[d][d] += sw * vs;
                }
            }
        }
        (a_g, bm)
    }

    /// `ln f(t)` and `ln s(t1) + ln s(t3)` at a saddle.
    fn log_gf(&self, t: [f64; 3]) -> (f64, f64) {
        let z = [t[0].ln(), t[1].ln()];
        let (lf, _, _) = logsumexp_stats2(&self.f_reduced, z);
        let (ls, _, _) = logsumexp_stats1(&self.s_terms, z[0]);
        (lf, 2.0 * ls)
    }

    /// Left-hand sides of the two stationarity equations:
    /// `(1 - k alpha) ln((1-eta)/eta) + r ln(t1 t3 / t2)` and
    /// `ln((c-gamma)^2 / (gamma (1 - 2c + gamma))) + ln(f / (s(t1) s(t3)))`.
    ///
    /// These are `ds/d eta` and `(1/alpha) ds/d gamma`.
    pub fn stationarity(&self, eta: f64, gamma: f64, t: [f64; 3]) -> (f64, f64) {
        let c = self.c;
        self.stationarity_split(eta, gamma, c - gamma, 1.0 - 2.0 * c + gamma, t)
    }

    /// [`Self::stationarity`] at the exact point `(1/2, c^2)`. Near `c = 1`
    /// the factor `1 - 2c + gamma = (1 - c)^2` is tiny, and rounding `c^2`
    /// to a double alone moves the gamma residual by up to ~1e-8 at k = 12.
    pub fn dominant_stationarity(&self, t: [f64; 3]) -> (f64, f64) {
        let q = 1.0 - self.c;
        self.stationarity_split(0.5, self.c * self.c, self.c * q, q * q, t)
    }

    /// `upper = c - gamma`, `lower = 1 - 2c + gamma`.
    fn stationarity_split(&self, eta: f64, gamma: f64, upper: f64, lower: f64, t: [f64; 3]) -> (f64, f64) {
        let k = self.params.k() as f64;
        let r = self.params.r();
        let r_eta = (1.0 - k * self.alpha) * ((1.0 - eta) / eta).ln()
            + r * (t[0].ln() + t[2].ln() - t[1].ln());
        let (lf, ls) = self.log_gf(t);
        let r_gamma = (2.0 * upper.ln() - gamma.ln() - lower.ln()) + lf - ls;
        (r_eta, r_gamma)
    }

    /// Gradient `(ds/d eta, ds/d gamma)` from the reduced saddle.
    pub(crate) fn gradient(&self, eta: f64, gamma: f64, inner: &Inner) -> [f64; 2] {
        let u = inner.z[0].exp();
        let v = inner.z[1].exp();
        let (re, rg) = self.stationarity(eta, gamma, [u, v, u]);
        [re, self.alpha * rg]
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves `a_g(t) = (r(1-eta), r eta, r(1-eta))` for a positive `t`.
pub fn solve_trivariate_saddle(params: &Params, eta: f64, gamma: f64) -> Result<TrivariateSaddle> {
    SurfaceModel::new(params)?.saddle(eta, gamma)
}

/// Growth rate `s(eta, gamma)` of the second-moment summand.
pub fn growth_rate_surface(params: &Params, eta: f64, gamma: f64) -> Result<GrowthRatePoint> {
    SurfaceModel::new(params)?.point(eta, gamma)
}

/// Stationarity residuals at `(eta, gamma)` for the given saddle.
pub fn stationarity_residuals(
    params: &Params,
    eta: f64,
    gamma: f64,
    saddle: &TrivariateSaddle,
) -> Result<(f64, f64)> {
    Ok(SurfaceModel::new(params)?.stationarity(eta, gamma, saddle.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{first_moment_growth_rate, solve_univariate_saddle};
    use approx::assert_relative_eq;

    fn model(k: u32, r: f64, p: f64) -> SurfaceModel {
        SurfaceModel::new(&Params::new(k, r, p).unwrap()).unwrap()
    }

    #[test]
    fn dominant_saddle_reduces_to_univariate() {
        for &(k, r, p) in &[(3, 10.0, 0.9), (3, 16.0, 0.5), (6, 150.0, 0.3), (12, 5000.0, 0.9)] {
            let m = model(k, r, p);
            let (eta, gamma) = m.dominant_point();
            let sol = m.saddle(eta, gamma).unwrap();
            let xk = solve_univariate_saddle(k, m.c()).unwrap().x;
            assert_relative_eq!(sol.t[0], xk, max_relative = 1e-10);
            assert_relative_eq!(sol.t[2], xk, max_relative = 1e-10);
            assert_relative_eq!(sol.t[1], xk * xk, max_relative = 1e-10);
            assert!(sol.residual <= 1e-10 * r.max(1.0), "residual {}", sol.residual);
            assert!(sol.det > 0.0);
        }
    }

    #[test]
    fn exponent_doubling_spot_check() {
        let params = Params::new(3, 12.0, 0.7).unwrap();
        let m = SurfaceModel::new(&params).unwrap();
        let (eta, gamma) = m.dominant_point();
        let s = m.value(eta, gamma).unwrap();
        let fm = first_moment_growth_rate(&params).unwrap();
        assert!((s - 2.0 * fm).abs() < 1e-8);
    }

    #[test]
    fn full_overlap_row_is_the_first_moment() {
        let params = Params::new(3, 9.0, 0.6).unwrap();
        let m = SurfaceModel::new(&params).unwrap();
        let fm = first_moment_growth_rate(&params).unwrap();
        assert_relative_eq!(m.value(1.0, m.c()).unwrap(), fm, epsilon = 1e-9);
        // X = Y forces gamma = c
        assert_eq!(m.value(1.0, m.c() - 0.01).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn gamma_endpoint_drops_one_sided_terms() {
        let m = model(3, 8.0, 0.5);
        let v = m.value(0.6, m.c()).unwrap();
        let near = m.value(0.6, m.c() - 1e-9).unwrap();
        assert!(v.is_finite());
        assert!((v - near).abs() < 1e-5);
    }

    #[test]
    fn complementary_pair_at_p_one() {
        // eta = 0 pairs X with its complement; both satisfy every clause iff
        // every clause sees a true and a false literal, whose exponent is
        // ln 2 + alpha ln(1 - 2^(1-k)) by direct counting.
        for &(k, r) in &[(3u32, 3.0), (4, 5.0), (5, 11.0)] {
            let m = model(k, r, 1.0);
            let expected = LN2 + m.alpha() * (1.0 - (1.0 - k as f64).exp2()).ln();
            assert_relative_eq!(m.value(0.0, 1.0).unwrap(), expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn stationarity_vanishes_at_dominant_point() {
        let m = model(6, 120.0, 0.8);
        let (eta, gamma) = m.dominant_point();
        let sol = m.saddle(eta, gamma).unwrap();
        let (re, rg) = m.stationarity(eta, gamma, sol.t);
        assert!(re.abs() < 1e-8 && rg.abs() < 1e-8, "{re} {rg}");
    }

    #[test]
    fn stationarity_matches_finite_differences() {
        let m = model(3, 10.0, 0.6);
        let (eta, gamma) = (0.37, m.c() - 0.3 * (1.0 - m.c()));
        let sol = m.saddle(eta, gamma).unwrap();
        let (re, rg) = m.stationarity(eta, gamma, sol.t);
        let h = 1e-6;
        let de = (m.value(eta + h, gamma).unwrap() - m.value(eta - h, gamma).unwrap()) / (2.0 * h);
        let hg = 1e-7 * (1.0 - m.c());
        let dg = (m.value(eta, gamma + hg).unwrap() - m.value(eta, gamma - hg).unwrap()) / (2.0 * hg);
        assert_relative_eq!(re, de, max_relative = 1e-5, epsilon = 1e-6);
        assert_relative_eq!(m.alpha() * rg, dg, max_relative = 1e-5, epsilon = 1e-5);
    }

    #[test]
    fn first_residual_sign_flips_across_half() {
        let m = model(3, 4.0, 0.9);
        let gamma = m.c() * m.c();
        let below = m.saddle(0.45, gamma).unwrap();
        let above = m.saddle(0.55, gamma).unwrap();
        let (rb, _) = m.stationarity(0.45, gamma, below.t);
        let (ra, _) = m.stationarity(0.55, gamma, above.t);
        assert!(rb > 0.0 && ra < 0.0, "{rb} {ra}");
    }

    #[test]
    fn domain_is_checked() {
        let m = model(3, 4.0, 0.9);
        assert!(m.value(1.2, m.c()).is_err());
        assert!(m.value(0.5, m.c() + 0.01).is_err());
        assert!(m.value(0.5, 2.0 * m.c() - 1.0 - 0.01).is_err());
    }

    #[test]
    fn infeasible_corner_is_minus_infinity() {
        // at gamma = c every clause is satisfied by both or neither, so the
        // overlap must be at least 2(1 - c)
        let m = model(3, 4.0, 0.1);
        let low = 0.5 * 2.0 * (1.0 - m.c());
        assert_eq!(m.value(low, m.c()).unwrap(), f64::NEG_INFINITY);
        assert!(m.saddle(low, m.c()).is_err());
    }

    #[test]
    fn exact_point_residual_survives_tiny_one_minus_c() {
        let params = Params::new(12, 10.0, 0.9).unwrap();
        let model = SurfaceModel::new(&params).unwrap();
        let sad = model.saddle(0.5, model.c() * model.c()).unwrap();
        let (re, rg) = model.dominant_stationarity(sad.t);
        assert!(re.abs() < 1e-12 && rg.abs() < 1e-12, "{re} {rg}");
    }
}
