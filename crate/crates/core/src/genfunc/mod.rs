//! Exact generating functions and exact finite-`n` moments.
//!
//! The counts here are exact rationals and serve as oracles for the
//! saddle-point approximations in [`crate::asymptotics`]. Both moments count
//! assignments that satisfy *exactly* `c alpha n` clauses, which is the
//! quantity the generating-function expressions enumerate.

mod poly;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

pub use poly::IntPolynomial;
use poly::DenseTrunc;

use crate::error::{Error, Result};
use crate::params::{Counts, Params};

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::param("k", format!("clause width must be at least 2, got {k}")));
    }
    Ok(())
}

fn binom_poly(k: u32) -> IntPolynomial {
    let coeffs: Vec<BigInt> = (0..=k)
        .map(|i| BigInt::from(binomial(BigUint::from(k), BigUint::from(i))))
        .collect();
    IntPolynomial::from_coeffs(&coeffs)
}

/// `s(x) = (1 + x)^k - 1`: clauses containing at least one true literal.
pub fn build_s(k: u32) -> Result<IntPolynomial> {
    check_k(k)?;
    Ok(binom_poly(k).sub(&IntPolynomial::one(1)))
}

/// `t(x) = s(x) / x`.
pub fn build_t(k: u32) -> Result<IntPolynomial> {
    Ok(build_s(k)?
        .shift_down(0, 1)
        .expect("s(x) has no constant term"))
}

/// `f(x1, x2, x3) = (1 + x1 + x2 + x3)^k - (1 + x1)^k - (1 + x3)^k + 1`:
/// clauses satisfied by both assignments, with `x1`, `x2`, `x3` marking
/// edges true only under the first, under both, and only under the second.
pub fn build_f(k: u32) -> Result<IntPolynomial> {
    check_k(k)?;
    let one = IntPolynomial::one(3);
    let x1 = IntPolynomial::variable(3, 0);
    let x2 = IntPolynomial::variable(3, 1);
    let x3 = IntPolynomial::variable(3, 2);
    let all = one.add(&x1).add(&x2).add(&x3).pow(k);
    let a = one.add(&x1).pow(k);
    let c = one.add(&x3).pow(k);
    Ok(all.sub(&a).sub(&c).add(&one))
}

/// `s(x1) s(x3)` as a trivariate polynomial.
fn build_s1s3(k: u32) -> Result<IntPolynomial> {
    let s = build_s(k)?;
    let lift = |var: usize| {
        IntPolynomial::from_terms(
            3,
            s.terms().map(|(e, c)| {
                let mut x = vec![0u32; 3];
                x[var] = e[0];
                (x, c.clone())
            }),
        )
    };
    Ok(lift(0).mul(&lift(2)))
}

/// Exact coefficient of `x^target` in `poly^power`.
///
/// Powers are formed by repeated squaring with every monomial beyond the
/// target dropped, so the work is bounded by the target box.
pub fn coef(poly: &IntPolynomial, power: u32, target: &[u32]) -> BigInt {
    assert_eq!(target.len(), poly.nvars(), "target arity mismatch");
    if power == 0 {
        return if target.iter().all(|&t| t == 0) {
            BigInt::one()
        } else {
            BigInt::zero()
        };
    }
    poly.pow_truncated(power, Some(target)).coefficient(target)
}

/// Exact coefficient of `x1^a x2^b x3^c` in `f^j (s(x1) s(x3))^l`.
pub fn trivariate_coef(k: u32, j: u32, l: u32, target: [u32; 3]) -> Result<BigInt> {
    let f = DenseTrunc::from_poly(&build_f(k)?, &target);
    let g = DenseTrunc::from_poly(&build_s1s3(k)?, &target);
    let fp = dense_pow(&f, j, &target);
    let gp = dense_pow(&g, l, &target);
    Ok(fp.product_coefficient(&gp, &target))
}

fn dense_pow(base: &DenseTrunc, power: u32, bound: &[u32]) -> DenseTrunc {
    let mut out = DenseTrunc::one(bound);
    for _ in 0..power {
        out = out.mul(base);
    }
    out
}

/// Exact moment of the number of p-satisfying assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoment {
    pub order: u8,
    pub value: BigRational,
    pub counts: Counts,
    pub k: u32,
    pub p: f64,
}

impl ExactMoment {
    /// Natural log of the value; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.value.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_biguint(self.value.numer().magnitude()) - ln_biguint(self.value.denom().magnitude())
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or_else(|| self.ln().exp())
    }
}

/// Natural log of a big unsigned integer, valid far beyond the `f64` range.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    BigInt::from(binomial(BigUint::from(n), BigUint::from(k)))
}

/// Exact first moment
/// `2^n C(m, cm) ((nr)!)^2 / (2nr)! * coef(t(x)^{cm}, x^{nr - cm})`.
pub fn exact_first_moment(params: &Params) -> Result<ExactMoment> {
    let counts = params.counts()?;
    let Counts {
        n,
        r,
        edges,
        clauses,
        satisfied,
        ..
    } = counts;
    let t = build_t(params.k())?;
    let coefficient = if n * r >= satisfied {
        coef(&t, satisfied as u32, &[(n * r - satisfied) as u32])
    } else {
        BigInt::zero()
    };
    let half = factorial(n * r);
    let numer = (BigInt::one() << n as usize) * binom(clauses, satisfied) * &half * &half * coefficient;
    let value = BigRational::new(numer, factorial(edges));
    Ok(ExactMoment {
        order: 1,
        value,
        counts,
        k: params.k(),
        p: params.p(),
    })
}

/// Smallest clause-intersection count `j` with a nonzero summand:
/// `ceil(alpha n (2c - 1))`, clamped at zero.
pub fn intersection_lower_limit(counts: &Counts) -> u64 {
    (2 * counts.satisfied).saturating_sub(counts.clauses)
}

/// Integer numerator of the `(i, j)` summand of the second moment; the
/// summand itself is this divided by `(2nr)!`.
pub fn second_moment_summand_numer(k: u32, counts: &Counts, i: u64, j: u64) -> Result<BigInt> {
    let tables = SecondMomentTables::new(k, counts)?;
    Ok(tables.summand(counts, i, j))
}

struct SecondMomentTables {
    fpow: Vec<DenseTrunc>,
    gpow: Vec<DenseTrunc>,
    jmin: u64,
}

impl SecondMomentTables {
    fn new(k: u32, counts: &Counts) -> Result<Self> {
        let rn = (counts.r * counts.n) as u32;
        let bound = [rn, rn, rn];
        let f = DenseTrunc::from_poly(&build_f(k)?, &bound);
        let g = DenseTrunc::from_poly(&build_s1s3(k)?, &bound);
        let jmin = intersection_lower_limit(counts);
        let cm = counts.satisfied;
        let mut fpow = vec![DenseTrunc::one(&bound)];
        for _ in 0..cm {
            let next = fpow.last().expect("nonempty").mul(&f);
            fpow.push(next);
        }
        let mut gpow = vec![DenseTrunc::one(&bound)];
        for _ in jmin..cm {
            let next = gpow.last().expect("nonempty").mul(&g);
            gpow.push(next);
        }
        Ok(SecondMomentTables { fpow, gpow, jmin })
    }

    fn summand(&self, counts: &Counts, i: u64, j: u64) -> BigInt {
        let Counts {
            n,
            r,
            clauses,
            satisfied: cm,
            ..
        } = *counts;
        if i > n || j < self.jmin || j > cm {
            return BigInt::zero();
        }
        let target = [(r * (n - i)) as u32, (r * i) as u32, (r * (n - i)) as u32];
        let coefficient =
            self.fpow[j as usize].product_coefficient(&self.gpow[(cm - j) as usize], &target);
        if coefficient.is_zero() {
            return coefficient;
        }
        let a = factorial(r * (n - i));
        let b = factorial(r * i);
        (BigInt::one() << n as usize)
            * binom(n, i)
            * binom(clauses, cm)
            * binom(cm, j)
            * binom(clauses - cm, cm - j)
            * &a
            * &a
            * &b
            * &b
            * coefficient
    }
}

/// Exact second moment: the double sum over the overlap `i` of the two
/// assignments and the number `j` of clauses satisfied by both.
pub fn exact_second_moment(params: &Params) -> Result<ExactMoment> {
    let counts = params.counts()?;
    let tables = SecondMomentTables::new(params.k(), &counts)?;
    let numer: BigInt = (0..=counts.n)
        .into_par_iter()
        .map(|i| {
            (tables.jmin..=counts.satisfied)
                .map(|j| tables.summand(&counts, i, j))
                .fold(BigInt::zero(), |acc, x| acc + x)
        })
        .reduce(BigInt::zero, |a, b| a + b);
    debug_assert_ne!(numer.sign(), Sign::Minus);
    let value = BigRational::new(numer, factorial(counts.edges));
    Ok(ExactMoment {
        order: 2,
        value,
        counts,
        k: params.k(),
        p: params.p(),
    })
}
