//! Upper bounds, dominance of the uncorrelated point, and the search for the
//! largest literal degree at which the second-moment argument succeeds.

mod dominance;

pub use dominance::{surplus_at, verify_dominance, DominanceReport, GridConfig, Verdict};

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{first_moment_threshold, solve_univariate_saddle, SurfaceModel};
use crate::error::{Error, Result};
use crate::params::{c_of_p, entropy, Params};

/// Smallest `p` for which the upper bound is reported.
pub const MIN_P: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBounds {
    /// `2^k ln 2 / (p + (1 - p) ln(1 - p))`.
    pub alpha_upper: f64,
    /// `ln 2 / (k ln 2 - h(c) - c ln(2^k - 1))`.
    pub alpha_upper_tight: f64,
}

/// Clause densities above which p-satisfiable assignments vanish w.h.p.
pub fn upper_bound(k: u32, p: f64) -> Result<UpperBounds> {
    let c = c_of_p(k, p)?;
    if p < MIN_P {
        return Err(Error::param("p", format!("bounds diverge as p -> 0; need p >= {MIN_P}, got {p}")));
    }
    let loose_den = if p == 1.0 { 1.0 } else { p + (1.0 - p) * (-p).ln_1p() };
    let kf = k as f64;
    // c ln(2^k - 1) = c k ln 2 + c ln(1 - 2^-k)
    let q = (-kf).exp2();
    let tight_den = (1.0 - c) * kf * LN_2 - entropy(c) - c * (-q).ln_1p();
    if !(loose_den > 0.0 && tight_den > 0.0) {
        return Err(Error::param("p", format!("nonpositive bound denominator at k={k}, p={p}")));
    }
    Ok(UpperBounds {
        alpha_upper: kf.exp2() * LN_2 / loose_den,
        alpha_upper_tight: LN_2 / tight_den,
    })
}

/// Settings for [`find_r_star`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub grid: GridConfig,
    /// Bisection stops once the bracket is narrower than `rel_tol * r`.
    pub rel_tol: f64,
    /// Hard cap on grid scans per `(k, p)`.
    pub max_scans: usize,
    /// Extra verdicts taken inside the initial bracket to test monotonicity.
    pub probes: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid: GridConfig::default(),
            rel_tol: 1e-4,
            max_scans: 40,
            probes: 2,
        }
    }
}

/// Result of the critical-degree search for one `(k, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBounds {
    pub k: u32,
    pub p: f64,
    pub alpha_upper: f64,
    pub alpha_upper_tight: f64,
    /// Midpoint of the final bisection bracket.
    pub r_star_real: f64,
    /// Largest integer degree with a dominant verdict.
    pub r_star_int: u64,
    /// `2 r_star_int / k`.
    pub alpha_lower: f64,
    /// `alpha_lower / alpha_upper`.
    pub ratio: f64,
    /// `(2 r_star_real / k) / alpha_upper`.
    pub ratio_real: f64,
    pub verdict: Verdict,
    pub grid_meta: String,
    pub scans: usize,
    /// Every `(r, verdict)` evaluated, sorted by `r`.
    pub history: Vec<(f64, Verdict)>,
}

impl ThresholdBounds {
    pub const CSV_HEADER: &'static str =
        "k,p,alpha_upper,alpha_upper_tight,r_star_real,r_star_int,alpha_lower,ratio,verdict,grid_meta";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.k,
            fmt_sig(self.p),
            fmt_sig(self.alpha_upper),
            fmt_sig(self.alpha_upper_tight),
            fmt_sig(self.r_star_real),
            self.r_star_int,
            fmt_sig(self.alpha_lower),
            fmt_sig(self.ratio),
            self.verdict.as_str(),
            self.grid_meta
        )
    }
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", 11, x);
    let v: f64 = s.parse().unwrap_or(x);
    format!("{v}")
}

struct Search<'a> {
    k: u32,
    p: f64,
    cfg: &'a SearchConfig,
    history: Vec<(f64, Verdict)>,
}

impl Search<'_> {
    fn verdict(&mut self, r: f64) -> Result<Verdict> {
        if let Some(&(_, v)) = self.history.iter().find(|(x, _)| *x == r) {
            return Ok(v);
        }
        if self.history.len() >= self.cfg.max_scans {
            return Err(Error::CapExceeded(format!(
                "scan budget of {} exhausted at k={}, p={}",
                self.cfg.max_scans, self.k, self.p
            )));
        }
        let params = Params::new(self.k, r, self.p)?;
        let rep = verify_dominance(&params, &self.cfg.grid)?;
        if rep.verdict == Verdict::Inconclusive {
            return Err(Error::NoConvergence {
                eta: rep.failures.first().map_or(f64::NAN, |f| f.0),
                gamma: rep.failures.first().map_or(f64::NAN, |f| f.1),
                reason: format!("inconclusive dominance scan at r={r} ({} failed points)", rep.failures.len()),
            });
        }
        self.history.push((r, rep.verdict));
        Ok(rep.verdict)
    }

    fn check_monotone(&mut self) -> Result<()> {
        self.history.sort_by(|a, b| a.0.total_cmp(&b.0));
        let first_bad = self.history.iter().position(|(_, v)| *v != Verdict::Dominant);
        if let Some(i) = first_bad {
            let late: Vec<f64> = self.history[i..]
                .iter()
                .filter(|(_, v)| *v == Verdict::Dominant)
                .map(|(r, _)| *r)
                .collect();
            if !late.is_empty() {
                return Err(Error::NonMonotone(format!(
                    "k={}, p={}: not dominant at r={} but dominant at r={:?}",
                    self.k, self.p, self.history[i].0, late
                )));
            }
        }
        Ok(())
    }
}

/// Largest literal degree at which `(1/2, c^2)` dominates the surface.
///
/// The high anchor sits just above the first-moment threshold, where the
/// diagonal `eta = 1` already beats the dominant value. The low anchor is
/// halved until dominant. Verdicts are then bisected in real `r`, and the
/// integer degree is resolved with at most two further scans.
pub fn find_r_star(k: u32, p: f64, cfg: &SearchConfig) -> Result<ThresholdBounds> {
    cfg.grid.validate()?;
    if !(cfg.rel_tol > 0.0 && cfg.rel_tol < 0.5) {
        return Err(Error::param("rel_tol", "must lie in (0, 0.5)"));
    }
    let ub = upper_bound(k, p)?;
    let kf = k as f64;
    let mut s = Search { k, p, cfg, history: Vec::new() };

    let mut hi = kf * first_moment_threshold(k, p)? / 2.0 * (1.0 + 1e-3);
    if s.verdict(hi)? == Verdict::Dominant {
        return Err(Error::Bracket(format!("dominant above the first-moment threshold at r={hi}")));
    }
    let mut lo = hi / 2.0;
    let mut halvings = 0;
    while s.verdict(lo)? != Verdict::Dominant {
        hi = lo;
        lo /= 2.0;
        halvings += 1;
        if halvings > 12 || lo < 1e-3 {
            return Err(Error::Bracket(format!("no dominant degree found down to r={lo}")));
        }
    }
    for i in 1..=cfg.probes {
        let r = lo + (hi - lo) * i as f64 / (cfg.probes + 1) as f64;
        s.verdict(r)?;
    }
    s.check_monotone()?;
    // tighten to the probes
    for &(r, v) in &s.history {
        if v == Verdict::Dominant {
            lo = lo.max(r);
        } else if r > lo {
            hi = hi.min(r);
        }
    }
    while hi - lo > cfg.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if s.verdict(mid)? == Verdict::Dominant {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r_int = lo.floor();
    let above = hi.floor();
    if above > lo && above >= 1.0 {
        if s.verdict(above)? == Verdict::Dominant {
            r_int = above;
            lo = above;
        } else {
            hi = above;
        }
    } else if r_int >= 1.0 && r_int < lo {
        s.verdict(r_int)?;
    }
    s.check_monotone()?;
    if r_int < 1.0 {
        return Err(Error::Bracket(format!("critical degree {lo} is below 1 at k={k}, p={p}")));
    }
    let alpha_lower = 2.0 * r_int / kf;
    let r_star_real = 0.5 * (lo + hi);
    Ok(ThresholdBounds {
        k,
        p,
        alpha_upper: ub.alpha_upper,
        alpha_upper_tight: ub.alpha_upper_tight,
        r_star_real,
        r_star_int: r_int as u64,
        alpha_lower,
        ratio: alpha_lower / ub.alpha_upper,
        ratio_real: 2.0 * r_star_real / kf / ub.alpha_upper,
        verdict: Verdict::Dominant,
        grid_meta: cfg.grid.describe(),
        scans: s.history.len(),
        history: s.history,
    })
}

/// [`find_r_star`] over every `(k, p)` pair, in parallel, in input order.
pub fn ratio_table(ks: &[u32], ps: &[f64], cfg: &SearchConfig) -> Vec<Result<ThresholdBounds>> {
    let cells: Vec<(u32, f64)> = ks.iter().flat_map(|&k| ps.iter().map(move |&p| (k, p))).collect();
    cells.par_iter().map(|&(k, p)| find_r_star(k, p, cfg)).collect()
}

/// Coefficient of `1/n` in the second-moment lower bound on `P(N > 0)`:
/// `4 pi sqrt(det B_g) / (b_t(x_k) alpha^2 sqrt(k))`, with `B_g` at the
/// dominant saddle `(x_k, x_k^2, x_k)`. Meaningful only where dominance holds.
pub fn second_moment_probability_constant(params: &Params) -> Result<f64> {
    let model = SurfaceModel::new(params)?;
    let (eta, gamma) = model.dominant_point();
    let saddle = model.saddle(eta, gamma)?;
    let uni = solve_univariate_saddle(params.k(), params.c())?;
    if !(saddle.det > 0.0) {
        return Err(Error::DegenerateSaddle(format!("det B_g = {} at the dominant point", saddle.det)));
    }
    let alpha = params.alpha();
    Ok(4.0 * PI * saddle.det.sqrt() / (uni.b * alpha * alpha * (params.k() as f64).sqrt()))
}
