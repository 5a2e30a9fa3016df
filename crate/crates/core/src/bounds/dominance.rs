//! Numerical check that the growth-rate surface peaks at `(1/2, c^2)`.
//!
//! The scan works in normalised coordinates `(eta, xi)`, both in `[0, 1]`.
//! `xi` parametrises `gamma = (2c - 1) + y (1 - c)` through a logistic map
//! `y = 1 / (1 + exp(-u))` with `u` uniform between `+-logit` bounds chosen so
//! that the uncorrelated point `y = 1 - c` sits well inside the range. For
//! large `k` that point is within `2^-k` of the lower end of the `gamma`
//! interval, which a uniform grid in `gamma` cannot resolve. The first and
//! last columns are the exact endpoints `gamma = 2c - 1` and `gamma = c`; the
//! first and last rows are `eta = 0` and `eta = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::SurfaceModel;
use crate::error::{Error, Result};
use crate::params::Params;

/// Scan and refinement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Points per axis of the coarse grid.
    pub resolution: usize,
    /// A competitor within `margin` nats of the dominant value defeats it.
    pub margin: f64,
    pub refine_levels: u32,
    pub refine_factor: u32,
    /// Radius in normalised coordinates inside which a local maximum is
    /// identified with the dominant point.
    pub exclusion_radius: f64,
    /// Interior rows are clamped to `[eta_clamp, 1 - eta_clamp]`.
    pub eta_clamp: f64,
    /// Upper bound on the number of discrete local maxima refined per scan.
    pub max_candidates: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            resolution: 201,
            margin: 1e-6,
            refine_levels: 2,
            refine_factor: 8,
            exclusion_radius: 1e-3,
            eta_clamp: 1e-4,
            max_candidates: 64,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 5 {
            return Err(Error::param("resolution", "grid needs at least 5 points per axis"));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::param("margin", "must be a nonnegative number"));
        }
        if self.refine_factor < 2 {
            return Err(Error::param("refine_factor", "must be at least 2"));
        }
        if !(self.exclusion_radius > 0.0 && self.exclusion_radius < 0.5) {
            return Err(Error::param("exclusion_radius", "must lie in (0, 0.5)"));
        }
        if !(self.eta_clamp > 0.0 && self.eta_clamp < 0.1) {
            return Err(Error::param("eta_clamp", "must lie in (0, 0.1)"));
        }
        Ok(())
    }

    /// Compact description used in CSV output.
    pub fn describe(&self) -> String {
        format!(
            "{}x{};margin={:e};refine={}x{};excl={:e};clamp={:e}",
            self.resolution,
            self.resolution,
            self.margin,
            self.refine_levels,
            self.refine_factor,
            self.exclusion_radius,
            self.eta_clamp
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dominant,
    NotDominant,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Dominant => "dominant",
            Verdict::NotDominant => "not_dominant",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Evidence collected by [`verify_dominance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub k: u32,
    pub r: f64,
    pub p: f64,
    pub grid: GridConfig,
    /// `s(1/2, c^2)`.
    pub dominant_value: f64,
    /// Largest `s(eta, gamma) - s(1/2, c^2)` over local maxima away from the
    /// dominant point; `-inf` if there are none.
    pub max_surplus: f64,
    /// `(eta, gamma)` of the largest surplus.
    pub max_surplus_at: Option<(f64, f64)>,
    /// Largest eigenvalue of the surface Hessian at the dominant point, in
    /// normalised coordinates; must be negative for a strict maximum.
    pub dominant_curvature: f64,
    pub refinement_depth: u32,
    pub candidates_refined: usize,
    pub evaluations: usize,
    /// Interior points where the saddle solver failed.
    pub failures: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

/// Grid geometry shared by the scan, refinement and ascent.
#[derive(Debug, Clone, Copy)]
struct Axes {
    c: f64,
    gamma_lo: f64,
    u_lo: f64,
    u_hi: f64,
    eta_clamp: f64,
    one_dim: bool,
}

impl Axes {
    fn new(model: &SurfaceModel, cfg: &GridConfig) -> Self {
        let c = model.c();
        let width = 1.0 - c;
        let one_dim = width <= 0.0;
        // keep y* = 1 - c three decades inside the lower bound
        let y_min = if one_dim { 0.5 } else { (1e-3 * width).min(1e-3) };
        let bound = ((1.0 - y_min) / y_min).ln();
        Axes {
            c,
            gamma_lo: 2.0 * c - 1.0,
            u_lo: -bound,
            u_hi: bound,
            eta_clamp: cfg.eta_clamp,
            one_dim,
        }
    }

    /// `gamma` at normalised `xi`; `xi = 0, 1` are the exact endpoints.
    fn gamma(&self, xi: f64) -> f64 {
        if self.one_dim {
            return self.c;
        }
        if xi <= 0.0 {
            return self.gamma_lo;
        }
        if xi >= 1.0 {
            return self.c;
        }
        let u = self.u_lo + xi * (self.u_hi - self.u_lo);
        let y = 1.0 / (1.0 + (-u).exp());
        self.gamma_lo + y * (1.0 - self.c)
    }

    /// `d gamma / d xi`.
    fn gamma_slope(&self, xi: f64) -> f64 {
        if self.one_dim {
            return 0.0;
        }
        let u = self.u_lo + xi * (self.u_hi - self.u_lo);
        let y = 1.0 / (1.0 + (-u).exp());
        (1.0 - self.c) * y * (1.0 - y) * (self.u_hi - self.u_lo)
    }

    fn xi_of_gamma(&self, gamma: f64) -> f64 {
        if self.one_dim {
            return 0.0;
        }
        let y = (gamma - self.gamma_lo) / (1.0 - self.c);
        let u = (y / (1.0 - y)).ln();
        (u - self.u_lo) / (self.u_hi - self.u_lo)
    }

    fn eta_nodes(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        out.push(0.0);
        let inner = n - 2;
        for i in 0..inner {
            let f = i as f64 / (inner - 1) as f64;
            out.push(self.eta_clamp + f * (1.0 - 2.0 * self.eta_clamp));
        }
        out.push(1.0);
        out
    }

    fn xi_nodes(&self, n: usize) -> Vec<f64> {
        if self.one_dim {
            return vec![0.0];
        }
        (0..n).map(|j| j as f64 / (n - 1) as f64).collect()
    }
}

/// A point evaluated during the scan.
#[derive(Debug, Clone, Copy)]
struct Sample {
    eta: f64,
    xi: f64,
    value: f64,
}

struct Scanner<'a> {
    model: &'a SurfaceModel,
    axes: Axes,
    cfg: GridConfig,
    dominant: (f64, f64),
    dominant_xi: f64,
}

impl Scanner<'_> {
    fn eval(&self, eta: f64, xi: f64) -> Result<f64> {
        self.model
            .evaluate(eta, self.axes.gamma(xi), None)
            .map(|(v, _)| v)
    }

    fn distance_to_dominant(&self, eta: f64, xi: f64) -> f64 {
        if self.axes.one_dim {
            (eta - self.dominant.0).abs()
        } else {
            (eta - self.dominant.0).hypot(xi - self.dominant_xi)
        }
    }

    /// Zoomed grids around `start`, each `refine_factor` times finer.
    fn zoom(&self, start: Sample, h_eta: f64, h_xi: f64, evals: &mut usize) -> Sample {
        let mut best = start;
        let f = self.cfg.refine_factor as i64;
        let (mut he, mut hx) = (h_eta, h_xi);
        for _ in 0..self.cfg.refine_levels {
            he /= f as f64;
            hx /= f as f64;
            let center = best;
            for a in -f..=f {
                let eta = (center.eta + a as f64 * he).clamp(0.0, 1.0);
                let xis: Vec<f64> = if self.axes.one_dim {
                    vec![0.0]
                } else {
                    (-f..=f)
                        .map(|b| (center.xi + b as f64 * hx).clamp(0.0, 1.0))
                        .collect()
                };
                for xi in xis {
                    *evals += 1;
                    if let Ok(v) = self.eval(eta, xi) {
                        if v > best.value {
                            best = Sample { eta, xi, value: v };
                        }
                    }
                }
            }
        }
        best
    }

    /// Gradient of the surface in normalised coordinates.
    fn gradient(&self, eta: f64, xi: f64) -> Option<[f64; 2]> {
        if eta <= 0.0 || eta >= 1.0 || (!self.axes.one_dim && (xi <= 0.0 || xi >= 1.0)) {
            return None;
        }
        let gamma = self.axes.gamma(xi);
        let (_, inner) = self.model.evaluate(eta, gamma, None).ok()?;
        let g = self.model.gradient(eta, gamma, &inner?);
        let gx = if self.axes.one_dim {
            0.0
        } else {
            g[1] * self.axes.gamma_slope(xi)
        };
        (g[0].is_finite() && gx.is_finite()).then_some([g[0], gx])
    }

    /// Hessian in normalised coordinates by central differences of the
    /// analytic gradient.
    fn hessian(&self, eta: f64, xi: f64) -> Option<[[f64; 2]; 2]> {
        let h = 1e-5;
        let gp = self.gradient(eta + h, xi)?;
        let gm = self.gradient(eta - h, xi)?;
        let hee = (gp[0] - gm[0]) / (2.0 * h);
        if self.axes.one_dim {
            return Some([[hee, 0.0], [0.0, -1.0]]);
        }
        let gxp = self.gradient(eta, xi + h)?;
        let gxm = self.gradient(eta, xi - h)?;
        let hxx = (gxp[1] - gxm[1]) / (2.0 * h);
        let hex = 0.5 * ((gp[1] - gm[1]) / (2.0 * h) + (gxp[0] - gxm[0]) / (2.0 * h));
        Some([[hee, hex], [hex, hxx]])
    }

    /// Damped Newton ascent, falling back to the gradient direction where the
    /// Hessian is not negative definite.
    fn ascend(&self, start: Sample, evals: &mut usize) -> Sample {
        let mut cur = start;
        let lo = self.axes.eta_clamp * 0.5;
        for _ in 0..100 {
            let (Some(g), Some(hm)) = (self.gradient(cur.eta, cur.xi), self.hessian(cur.eta, cur.xi))
            else {
                break;
            };
            *evals += 5;
            let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
            let mut d = if hm[0][0] < 0.0 && det > 0.0 {
                [
                    -(hm[1][1] * g[0] - hm[0][1] * g[1]) / det,
                    -(hm[0][0] * g[1] - hm[1][0] * g[0]) / det,
                ]
            } else {
                let norm = g[0].hypot(g[1]).max(1e-300);
                [1e-3 * g[0] / norm, 1e-3 * g[1] / norm]
            };
            if self.axes.one_dim {
                d[1] = 0.0;
            }
            let len = d[0].hypot(d[1]);
            if len > 0.05 {
                d = [0.05 * d[0] / len, 0.05 * d[1] / len];
            }
            if len < 1e-11 {
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-8 {
                let eta = (cur.eta + t * d[0]).clamp(lo, 1.0 - lo);
                let xi = if self.axes.one_dim {
                    0.0
                } else {
                    (cur.xi + t * d[1]).clamp(1e-9, 1.0 - 1e-9)
                };
                *evals += 1;
                if let Ok(v) = self.eval(eta, xi) {
                    if v >= cur.value {
                        moved = (eta - cur.eta).abs().max((xi - cur.xi).abs()) > 1e-13;
                        cur = Sample { eta, xi, value: v };
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved || self.distance_to_dominant(cur.eta, cur.xi) < 0.25 * self.cfg.exclusion_radius {
                break;
            }
        }
        cur
    }

    /// Largest Hessian eigenvalue at the dominant point, by central
    /// differences of the analytic gradient.
    fn dominant_curvature(&self) -> Result<f64> {
        let (eta, xi) = (self.dominant.0, self.dominant_xi);
        let hm = self.hessian(eta, xi).ok_or_else(|| Error::NoConvergence {
            eta,
            gamma: self.axes.gamma(xi),
            reason: "gradient unavailable near the dominant point".into(),
        })?;
        let tr = hm[0][0] + hm[1][1];
        let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        Ok(0.5 * tr + disc)
    }
}

/// Scans `s(eta, gamma)` over `[0, 1] x [2c - 1, c]` and decides whether the
/// uncorrelated point `(1/2, c^2)` is its strict global maximum.
pub fn verify_dominance(params: &Params, cfg: &GridConfig) -> Result<DominanceReport> {
    cfg.validate()?;
    let model = SurfaceModel::new(params)?;
    let axes = Axes::new(&model, cfg);
    let dominant = model.dominant_point();
    let s0 = model.value(dominant.0, dominant.1)?;
    let scanner = Scanner {
        model: &model,
        axes,
        cfg: *cfg,
        dominant,
        dominant_xi: axes.xi_of_gamma(dominant.1),
    };

    let etas = axes.eta_nodes(cfg.resolution);
    let xis = axes.xi_nodes(cfg.resolution);
    let rows: Vec<(Vec<f64>, Vec<(f64, f64)>)> = etas
        .par_iter()
        .map(|&eta| {
            let mut vals = Vec::with_capacity(xis.len());
            let mut fails = Vec::new();
            let mut warm = None;
            for &xi in &xis {
                let gamma = axes.gamma(xi);
                match model.evaluate(eta, gamma, warm) {
                    Ok((v, inner)) => {
                        if inner.is_some() {
                            warm = inner.map(|i| i.z);
                        }
                        vals.push(v);
                    }
                    Err(_) => match model.evaluate(eta, gamma, None) {
                        Ok((v, inner)) => {
                            warm = inner.map(|i| i.z);
                            vals.push(v);
                        }
                        Err(_) => {
                            fails.push((eta, gamma));
                            vals.push(f64::NAN);
                        }
                    },
                }
            }
            (vals, fails)
        })
        .collect();
    let mut evaluations = etas.len() * xis.len();
    let failures: Vec<(f64, f64)> = rows.iter().flat_map(|(_, f)| f.iter().copied()).collect();
    let grid: Vec<Vec<f64>> = rows.into_iter().map(|(v, _)| v).collect();

    // discrete local maxima over the 8-neighbourhood
    let (ne, nx) = (etas.len(), xis.len());
    let mut candidates = Vec::new();
    for i in 0..ne {
        for j in 0..nx {
            let v = grid[i][j];
            if !v.is_finite() {
                continue;
            }
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= ne as i64 || b >= nx as i64 {
                        continue;
                    }
                    if grid[a as usize][b as usize] > v {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                candidates.push((i, j));
            }
        }
    }
    candidates.sort_by(|a, b| grid[b.0][b.1].total_cmp(&grid[a.0][a.1]));
    candidates.truncate(cfg.max_candidates);

    let h_eta = (1.0 - 2.0 * cfg.eta_clamp) / (ne - 3) as f64;
    let h_xi = if axes.one_dim { 0.0 } else { 1.0 / (nx - 1) as f64 };
    let mut max_surplus = f64::NEG_INFINITY;
    let mut max_at = None;
    let mut refined = 0;
    for (i, j) in candidates {
        let start = Sample {
            eta: etas[i],
            xi: xis[j],
            value: grid[i][j],
        };
        refined += 1;
        let zoomed = scanner.zoom(start, h_eta, h_xi, &mut evaluations);
        let peak = scanner.ascend(zoomed, &mut evaluations);
        if scanner.distance_to_dominant(peak.eta, peak.xi) < cfg.exclusion_radius {
            continue;
        }
        let surplus = peak.value - s0;
        if surplus > max_surplus {
            max_surplus = surplus;
            max_at = Some((peak.eta, axes.gamma(peak.xi)));
        }
    }

    let curvature = scanner.dominant_curvature().unwrap_or(f64::NAN);
    let verdict = if max_surplus >= -cfg.margin || curvature >= 0.0 {
        Verdict::NotDominant
    } else if !failures.is_empty() || curvature.is_nan() {
        Verdict::Inconclusive
    } else {
        Verdict::Dominant
    };
    Ok(DominanceReport {
        k: params.k(),
        r: params.r(),
        p: params.p(),
        grid: *cfg,
        dominant_value: s0,
        max_surplus,
        max_surplus_at: max_at,
        dominant_curvature: curvature,
        refinement_depth: cfg.refine_levels,
        candidates_refined: refined,
        evaluations,
        failures,
        verdict,
    })
}

/// `s(eta, gamma) - s(1/2, c^2)`; exactly zero at the dominant point.
pub fn surplus_at(params: &Params, eta: f64, gamma: f64) -> Result<f64> {
    let model = SurfaceModel::new(params)?;
    let (de, dg) = model.dominant_point();
    if eta == de && gamma == dg {
        return Ok(0.0);
    }
    Ok(model.value(eta, gamma)? - model.value(de, dg)?)
}
