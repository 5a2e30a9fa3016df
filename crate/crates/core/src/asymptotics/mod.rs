//! Saddle-point asymptotics.
//!
//! For a polynomial `q` with nonnegative coefficients the tilted moments
//! `a_q(y) = y q'(y) / q(y)` and `b_q(y) = y a_q'(y)` are the mean and the
//! variance of the exponent under the weights `q_i y^i`. All evaluations
//! below work in `ln y` and normalise with log-sum-exp, so they stay finite
//! for the very large powers that appear at `k = 12`.

mod surface;

pub use surface::{
    growth_rate_surface, solve_trivariate_saddle, stationarity_residuals, GrowthRatePoint,
    SurfaceModel, TrivariateSaddle,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfunc::{build_t, IntPolynomial};
use crate::params::{c_of_p, entropy, Params};

/// Univariate polynomial with nonnegative real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly {
    /// `(exponent, ln coefficient)` for every positive coefficient.
    terms: Vec<(f64, f64)>,
    min_degree: f64,
    max_degree: f64,
}

impl RealPoly {
    pub fn new(coeffs: &[f64]) -> Result<Self> {
        if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::param("poly", "coefficients must be finite and nonnegative"));
        }
        let terms: Vec<(f64, f64)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0.0)
            .map(|(i, c)| (i as f64, c.ln()))
            .collect();
        if terms.is_empty() {
            return Err(Error::param("poly", "polynomial is identically zero"));
        }
        let min_degree = terms[0].0;
        let max_degree = terms[terms.len() - 1].0;
        Ok(RealPoly {
            terms,
            min_degree,
            max_degree,
        })
    }

    pub fn from_int(p: &IntPolynomial) -> Result<Self> {
        let coeffs: Vec<f64> = p
            .univariate_coeffs()
            .iter()
            .map(|c| num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::INFINITY))
            .collect();
        Self::new(&coeffs)
    }

    /// Open interval of achievable saddle targets `(a_q(0+), a_q(inf))`.
    pub fn exponent_range(&self) -> (f64, f64) {
        (self.min_degree, self.max_degree)
    }

    /// `(ln q(y), a_q(y), b_q(y))` at `y = exp(z)`.
    pub fn log_moments(&self, z: f64) -> (f64, f64, f64) {
        let top = self
            .terms
            .iter()
            .map(|(e, l)| l + e * z)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (e, l) in &self.terms {
            let wi = (l + e * z - top).exp();
            w += wi;
            m1 += wi * e;
            m2 += wi * e * e;
        }
        let mean = m1 / w;
        let var = (m2 / w - mean * mean).max(0.0);
        (top + w.ln(), mean, var)
    }

    pub fn ln_eval(&self, y: f64) -> f64 {
        self.log_moments(y.ln()).0
    }
}

fn check_positive(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::param("x", format!("saddle variable must be positive, got {x}")));
    }
    Ok(())
}

/// `a_q(x) = x q'(x) / q(x)`.
pub fn a_q(poly: &RealPoly, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(poly.log_moments(x.ln()).1)
}

/// `b_q(x) = x a_q'(x)`.
pub fn b_q(poly: &RealPoly, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(poly.log_moments(x.ln()).2)
}

/// Solution of a univariate saddle equation `a_q(x) = omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnivariateSaddle {
    pub x: f64,
    pub omega: f64,
    /// `|a_q(x) - omega|`.
    pub residual: f64,
    /// `b_q(x)`, strictly positive.
    pub b: f64,
}

/// Unique positive root of `a_q(x) = omega`; `omega` must lie strictly inside
/// the exponent range of `q`.
pub fn solve_saddle(poly: &RealPoly, omega: f64) -> Result<UnivariateSaddle> {
    let (lo_deg, hi_deg) = poly.exponent_range();
    if !(omega > lo_deg && omega < hi_deg) {
        return Err(Error::DegenerateSaddle(format!(
            "target {omega} outside the open range ({lo_deg}, {hi_deg})"
        )));
    }
    // a_q is increasing in z = ln x: bracket, then safeguarded Newton.
    let a = |z: f64| poly.log_moments(z).1;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while a(lo) > omega {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(Error::DegenerateSaddle(format!("cannot bracket target {omega}")));
        }
    }
    while a(hi) < omega {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::DegenerateSaddle(format!("cannot bracket target {omega}")));
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (_, m, v) = poly.log_moments(z);
        let g = m - omega;
        if g.abs() <= 1e-14 * omega.abs().max(1.0) {
            break;
        }
        if g > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let step = z - g / v;
        z = if v > 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    let (_, m, v) = poly.log_moments(z);
    let residual = (m - omega).abs();
    if residual > 1e-12 * omega.abs().max(1.0) {
        return Err(Error::DegenerateSaddle(format!(
            "univariate saddle residual {residual} for target {omega}"
        )));
    }
    Ok(UnivariateSaddle {
        x: z.exp(),
        omega,
        residual,
        b: v,
    })
}

fn t_poly(k: u32) -> Result<RealPoly> {
    RealPoly::from_int(&build_t(k)?)
}

/// Root `x_k` of `a_t(x) = k / (2c) - 1` with `t(x) = ((1 + x)^k - 1) / x`.
pub fn solve_univariate_saddle(k: u32, c: f64) -> Result<UnivariateSaddle> {
    if k < 2 {
        return Err(Error::param("k", format!("clause width must be at least 2, got {k}")));
    }
    let floor = 1.0 - (-(k as f64)).exp2();
    if !(c > floor && c <= 1.0) {
        return Err(Error::param("c", format!("must lie in ({floor}, 1], got {c}")));
    }
    let omega = k as f64 / (2.0 * c) - 1.0;
    solve_saddle(&t_poly(k)?, omega)
}

/// Natural log of the Hayman estimate of `coef(q(y)^m, y^e)`.
pub fn hayman_ln_estimate(poly: &RealPoly, power: u64, exponent: u64) -> Result<f64> {
    if power == 0 {
        return Err(Error::param("power", "Hayman estimate needs a positive power"));
    }
    let m = power as f64;
    let sol = solve_saddle(poly, exponent as f64 / m)?;
    let ln_q = poly.ln_eval(sol.x);
    Ok(m * ln_q
        - exponent as f64 * sol.x.ln()
        - 0.5 * (2.0 * std::f64::consts::PI * m * sol.b).ln())
}

/// Hayman estimate `q(y)^m / (y^e sqrt(2 pi m b_q(y)))` at the saddle
/// `a_q(y) = e/m`.
pub fn hayman_coef_estimate(poly: &RealPoly, power: u64, exponent: u64) -> Result<f64> {
    hayman_ln_estimate(poly, power, exponent).map(f64::exp)
}

/// Exponent `(1/n) ln E(N)` of the first moment with the coefficient term
/// replaced by its bound at an arbitrary `x > 0`. At the saddle `x = x_k`
/// this is the exact growth rate; everywhere else it is an upper bound.
pub fn first_moment_exponent_at(params: &Params, x: f64) -> Result<f64> {
    check_positive(x)?;
    let k = params.k() as f64;
    let alpha = params.alpha();
    let c = params.c();
    let ln_t = t_poly(params.k())?.ln_eval(x);
    Ok((1.0 - k * alpha) * std::f64::consts::LN_2 + alpha * entropy(c) + alpha * c * ln_t
        - (k * alpha / 2.0 - alpha * c) * x.ln())
}

/// Growth rate of the first moment of the number of p-satisfying
/// assignments, in nats per variable.
pub fn first_moment_growth_rate(params: &Params) -> Result<f64> {
    let sol = solve_univariate_saddle(params.k(), params.c())?;
    first_moment_exponent_at(params, sol.x)
}

/// Clause density at which [`first_moment_growth_rate`] crosses zero. The
/// growth rate is affine in `alpha` at fixed `(k, p)`.
pub fn first_moment_threshold(k: u32, p: f64) -> Result<f64> {
    let c = c_of_p(k, p)?;
    let sol = solve_univariate_saddle(k, c)?;
    let kf = k as f64;
    let ln_t = t_poly(k)?.ln_eval(sol.x);
    // exponent = ln 2 + alpha * slope
    let slope = -kf * std::f64::consts::LN_2 + entropy(c) + c * ln_t - (kf / 2.0 - c) * sol.x.ln();
    if slope >= 0.0 {
        return Err(Error::DegenerateSaddle(format!(
            "first-moment exponent does not decrease in alpha for k={k}, p={p}"
        )));
    }
    Ok(-std::f64::consts::LN_2 / slope)
}
