//! Problem parameters and the scalar helpers shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Instance parameters of the regular random k-SAT model.
///
/// `r` is real-valued for the asymptotic analysis and must be a positive
/// integer whenever a concrete formula or an exact moment is requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    k: u32,
    r: f64,
    p: f64,
    n: Option<u64>,
}

impl Params {
    pub fn new(k: u32, r: f64, p: f64) -> Result<Self> {
        check_k(k)?;
        check_p(p)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("r", format!("literal degree must be positive, got {r}")));
        }
        Ok(Params { k, r, p, n: None })
    }

    /// Attaches a variable count for finite-`n` computations.
    pub fn with_n(mut self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one variable"));
        }
        self.n = Some(n);
        Ok(self)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> Option<u64> {
        self.n
    }

    /// Clause density `2r/k`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.r / self.k as f64
    }

    /// Required satisfied-clause fraction `c(p)`.
    pub fn c(&self) -> f64 {
        c_unchecked(self.k, self.p)
    }

    /// The literal degree as an integer, if it is one.
    pub fn r_int(&self) -> Result<u64> {
        let rounded = self.r.round();
        if (self.r - rounded).abs() > 1e-9 {
            return Err(Error::Integrality(format!(
                "literal degree r={} is not an integer",
                self.r
            )));
        }
        Ok(rounded as u64)
    }

    /// Integer counts for an exact finite-`n` computation.
    ///
    /// Checks that `k alpha n = 2nr` is an even integer, that the clause count
    /// `alpha n` is an integer and that `c alpha n` is an integer.
    pub fn counts(&self) -> Result<Counts> {
        let n = self
            .n
            .ok_or_else(|| Error::param("n", "exact computation needs a variable count"))?;
        let r = self.r_int()?;
        let k = self.k as u64;
        let edges = 2 * n * r;
        if edges % k != 0 {
            return Err(Error::Integrality(format!(
                "clause count alpha*n = 2nr/k = {edges}/{k} is not an integer"
            )));
        }
        let clauses = edges / k;
        let target = self.c() * clauses as f64;
        let satisfied = target.round();
        if (target - satisfied).abs() > 1e-7 {
            return Err(Error::Integrality(format!(
                "c*alpha*n = {target} is not an integer"
            )));
        }
        let satisfied = satisfied as u64;
        if satisfied > clauses {
            return Err(Error::Integrality(format!(
                "c*alpha*n = {satisfied} exceeds the clause count {clauses}"
            )));
        }
        Ok(Counts {
            k,
            n,
            r,
            edges,
            clauses,
            satisfied,
        })
    }
}

/// Integer sizes of a finite instance, see [`Params::counts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub k: u64,
    pub n: u64,
    pub r: u64,
    /// `k alpha n = 2nr`.
    pub edges: u64,
    /// `alpha n`.
    pub clauses: u64,
    /// `c alpha n`.
    pub satisfied: u64,
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::param("k", format!("clause width must be at least 2, got {k}")));
    }
    if k > 60 {
        return Err(Error::param("k", format!("clause width {k} is out of range")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("p", format!("must lie in (0, 1], got {p}")));
    }
    Ok(())
}

pub(crate) fn c_unchecked(k: u32, p: f64) -> f64 {
    let q = (-(k as f64)).exp2();
    1.0 - q + p * q
}

/// `c(p) = 1 - 2^-k + p 2^-k`.
pub fn c_of_p(k: u32, p: f64) -> Result<f64> {
    check_k(k)?;
    check_p(p)?;
    Ok(c_unchecked(k, p))
}

/// Natural-log binary entropy with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param("x", format!("entropy argument must lie in [0, 1], got {x}")));
    }
    Ok(entropy(x))
}

/// Unchecked entropy; arguments within rounding of the unit interval are
/// clamped.
pub(crate) fn entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.ln() - (1.0 - x) * (-x).ln_1p()
}
