use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Sparse polynomial in one or more variables with exact integer
/// coefficients. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IntPolynomial {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars > 0, "polynomial needs at least one variable");
        IntPolynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], BigInt::one());
        p
    }

    /// Univariate polynomial from a dense coefficient list (constant first).
    pub fn from_coeffs<T: Into<BigInt> + Clone>(coeffs: &[T]) -> Self {
        let mut p = Self::zero(1);
        for (e, c) in coeffs.iter().enumerate() {
            p.add_term(vec![e as u32], c.clone().into());
        }
        p
    }

    pub fn from_terms<I, T>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, T)>,
        T: Into<BigInt>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    /// `x_var` as a polynomial.
    pub fn variable(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self::from_terms(nvars, [(e, 1)])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exponent: &[u32]) -> BigInt {
        self.terms.get(exponent).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Largest exponent of each variable.
    pub fn max_degrees(&self) -> Vec<u32> {
        let mut out = vec![0; self.nvars];
        for e in self.terms.keys() {
            for (o, &d) in out.iter_mut().zip(e) {
                *o = (*o).max(d);
            }
        }
        out
    }

    fn add_term(&mut self, exponent: Vec<u32>, coeff: BigInt) {
        assert_eq!(exponent.len(), self.nvars, "exponent arity mismatch");
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exponent) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, None)
    }

    /// Product with every monomial exceeding `bound` in some coordinate
    /// dropped.
    pub fn mul_truncated(&self, other: &Self, bound: Option<&[u32]>) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            'inner: for (eb, cb) in &other.terms {
                let mut e = Vec::with_capacity(self.nvars);
                for i in 0..self.nvars {
                    let d = ea[i] + eb[i];
                    if bound.is_some_and(|b| d > b[i]) {
                        continue 'inner;
                    }
                    e.push(d);
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, power: u32) -> Self {
        self.pow_truncated(power, None)
    }

    pub fn pow_truncated(&self, power: u32, bound: Option<&[u32]>) -> Self {
        let mut result = Self::one(self.nvars).truncate(bound);
        let mut base = self.truncate(bound);
        let mut e = power;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_truncated(&base, bound);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_truncated(&base, bound);
            }
        }
        result
    }

    pub fn truncate(&self, bound: Option<&[u32]>) -> Self {
        match bound {
            None => self.clone(),
            Some(b) => Self {
                nvars: self.nvars,
                terms: self
                    .terms
                    .iter()
                    .filter(|(e, _)| e.iter().zip(b).all(|(d, m)| d <= m))
                    .map(|(e, c)| (e.clone(), c.clone()))
                    .collect(),
            },
        }
    }

    /// Divides by `x_var^shift`; every monomial must be divisible.
    pub fn shift_down(&self, var: usize, shift: u32) -> Option<Self> {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] < shift {
                return None;
            }
            let mut e = e.clone();
            e[var] -= shift;
            out.terms.insert(e, c.clone());
        }
        Some(out)
    }

    /// Univariate polynomial obtained by substituting `x_i -> x^{weights[i]}`.
    pub fn substitute_powers(&self, weights: &[u32]) -> Self {
        assert_eq!(weights.len(), self.nvars);
        let mut out = Self::zero(1);
        for (e, c) in &self.terms {
            let d = e.iter().zip(weights).map(|(a, w)| a * w).sum();
            out.add_term(vec![d], c.clone());
        }
        out
    }

    /// Exchanges the roles of two variables.
    pub fn swap_vars(&self, a: usize, b: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e.swap(a, b);
            out.terms.insert(e, c.clone());
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                let c = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::INFINITY);
                e.iter()
                    .zip(x)
                    .fold(c, |acc, (&d, &xi)| acc * xi.powi(d as i32))
            })
            .sum()
    }

    /// Coefficients as `f64` together with their exponents.
    pub fn float_terms(&self) -> Vec<(Vec<u32>, f64)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::INFINITY)))
            .collect()
    }

    /// Dense univariate coefficient list.
    pub fn univariate_coeffs(&self) -> Vec<BigInt> {
        assert_eq!(self.nvars, 1, "not a univariate polynomial");
        let deg = self.max_degrees()[0] as usize;
        let mut out = vec![BigInt::zero(); deg + 1];
        for (e, c) in &self.terms {
            out[e[0] as usize] = c.clone();
        }
        out
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &d) in e.iter().enumerate() {
                let name = if self.nvars == 1 {
                    "x".to_string()
                } else {
                    format!("x{}", i + 1)
                };
                match d {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{d}")?,
                }
            }
        }
        Ok(())
    }
}

/// Dense truncated power table used by the exact moment sums.
///
/// Entry `[e1][e2]...` is flattened with the last coordinate fastest.
#[derive(Debug, Clone)]
pub(crate) struct DenseTrunc {
    bound: Vec<u32>,
    data: Vec<BigInt>,
}

impl DenseTrunc {
    pub(crate) fn from_poly(p: &IntPolynomial, bound: &[u32]) -> Self {
        let mut out = Self::zeros(bound);
        for (e, c) in p.terms() {
            if e.iter().zip(bound).all(|(d, b)| d <= b) {
                let idx = out.index(e);
                out.data[idx] = c.clone();
            }
        }
        out
    }

    pub(crate) fn one(bound: &[u32]) -> Self {
        let mut out = Self::zeros(bound);
        out.data[0] = BigInt::one();
        out
    }

    fn zeros(bound: &[u32]) -> Self {
        let size = bound.iter().map(|&b| b as usize + 1).product();
        DenseTrunc {
            bound: bound.to_vec(),
            data: vec![BigInt::zero(); size],
        }
    }

    fn index(&self, e: &[u32]) -> usize {
        let mut idx = 0usize;
        for (d, b) in e.iter().zip(&self.bound) {
            idx = idx * (*b as usize + 1) + *d as usize;
        }
        idx
    }

    fn exponent(&self, mut idx: usize) -> Vec<u32> {
        let mut e = vec![0u32; self.bound.len()];
        for i in (0..self.bound.len()).rev() {
            let w = self.bound[i] as usize + 1;
            e[i] = (idx % w) as u32;
            idx /= w;
        }
        e
    }

    fn nonzero(&self) -> Vec<(Vec<u32>, &BigInt)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.exponent(i), c))
            .collect()
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(&self.bound);
        let rhs = other.nonzero();
        for (ea, ca) in self.nonzero() {
            'inner: for (eb, cb) in &rhs {
                let mut idx = 0usize;
                for i in 0..self.bound.len() {
                    let d = ea[i] + eb[i];
                    if d > self.bound[i] {
                        continue 'inner;
                    }
                    idx = idx * (self.bound[i] as usize + 1) + d as usize;
                }
                out.data[idx] += ca * *cb;
            }
        }
        out
    }

    pub(crate) fn get(&self, e: &[u32]) -> &BigInt {
        &self.data[self.index(e)]
    }

    /// Coefficient of `x^target` in `self * other` without forming the
    /// product.
    pub(crate) fn product_coefficient(&self, other: &Self, target: &[u32]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in self.nonzero() {
            if e.iter().zip(target).any(|(d, t)| d > t) {
                continue;
            }
            let rest: Vec<u32> = target.iter().zip(&e).map(|(t, d)| t - d).collect();
            let o = other.get(&rest);
            if !o.is_zero() {
                acc += c * o;
            }
        }
        acc
    }
}
