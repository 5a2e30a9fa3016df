//! Independent oracles for the exact moments: full edge-permutation
//! enumeration on tiny instances, and a clause-by-clause count of literal
//! type sequences for larger ones.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Clauses of the configuration formula given by `perm`, as literal indices
/// `2v` (positive) and `2v + 1` (negative).
pub fn clauses_of(perm: &[usize], k: usize, r: usize) -> Vec<Vec<usize>> {
    perm.chunks(k).map(|s| s.iter().map(|&e| e / r).collect()).collect()
}

fn satisfied(clauses: &[Vec<usize>], assign: u32) -> usize {
    clauses
        .iter()
        .filter(|c| c.iter().any(|&l| ((assign >> (l / 2)) & 1 == 1) == (l % 2 == 0)))
        .count()
}

/// `(E N, E N^2)` by enumerating all `(2nr)!` permutations, where `N` counts
/// assignments satisfying exactly `target` clauses.
pub fn enumerate_moments(k: usize, n: usize, r: usize, target: usize) -> (BigRational, BigRational) {
    let edges = 2 * n * r;
    assert!(edges <= 9, "enumeration limited to 9 edges");
    let mut s1 = BigInt::zero();
    let mut s2 = BigInt::zero();
    let mut perms = 0u64;
    for_each_permutation(edges, |p| {
        let cl = clauses_of(p, k, r);
        let count = (0..1u32 << n).filter(|&a| satisfied(&cl, a) == target).count() as u64;
        s1 += count;
        s2 += count * count;
        perms += 1;
    });
    let d = BigInt::from(perms);
    (BigRational::new(s1, d.clone()), BigRational::new(s2, d))
}

/// Probability of each clause multiset (clauses and literals sorted) under
/// the uniform permutation model, by enumeration.
pub fn clause_multiset_distribution(k: usize, n: usize, r: usize) -> BTreeMap<Vec<Vec<usize>>, f64> {
    let mut counts: BTreeMap<Vec<Vec<usize>>, u64> = BTreeMap::new();
    let mut total = 0u64;
    for_each_permutation(2 * n * r, |p| {
        *counts.entry(canonical(clauses_of(p, k, r))).or_default() += 1;
        total += 1;
    });
    counts.into_iter().map(|(c, v)| (c, v as f64 / total as f64)).collect()
}

pub fn canonical(mut clauses: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for c in &mut clauses {
        c.sort_unstable();
    }
    clauses.sort();
    clauses
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |a, i| a * BigUint::from(i))
}

fn multinomial(parts: &[usize]) -> BigUint {
    let total: usize = parts.iter().sum();
    parts.iter().fold(factorial(total), |a, &p| a / factorial(p))
}

fn binom(n: usize, k: usize) -> BigUint {
    multinomial(&[k, n - k])
}

/// Number of type sequences that fill `clauses` clauses of width `k` from
/// `pool` (counts per literal type), such that exactly `unsat[w]` clauses
/// contain no type marked true for witness `w`.
struct TypeCounter {
    k: usize,
    /// `true_for[w][t]`: type `t` is a true literal under witness `w`.
    true_for: Vec<Vec<bool>>,
    compositions: Vec<(Vec<usize>, BigUint)>,
    memo: HashMap<(Vec<usize>, Vec<usize>), BigUint>,
}

impl TypeCounter {
    fn new(k: usize, true_for: Vec<Vec<bool>>) -> Self {
        let types = true_for[0].len();
        let mut compositions = Vec::new();
        let mut cur = vec![0; types];
        fn rec(t: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, BigUint)>) {
            if t + 1 == cur.len() {
                cur[t] = left;
                out.push((cur.clone(), multinomial(cur)));
                return;
            }
            for a in 0..=left {
                cur[t] = a;
                rec(t + 1, left - a, cur, out);
            }
        }
        rec(0, k, &mut cur, &mut compositions);
        TypeCounter {
            k,
            true_for,
            compositions,
            memo: HashMap::new(),
        }
    }

    fn count(&mut self, pool: Vec<usize>, unsat: Vec<usize>) -> BigUint {
        let left: usize = pool.iter().sum();
        if left == 0 {
            return if unsat.iter().all(|&u| u == 0) {
                BigUint::one()
            } else {
                BigUint::zero()
            };
        }
        if unsat.iter().any(|&u| u * self.k > left) {
            return BigUint::zero();
        }
        let key = (pool.clone(), unsat.clone());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut total = BigUint::zero();
        for idx in 0..self.compositions.len() {
            let (comp, ways) = self.compositions[idx].clone();
            if comp.iter().zip(&pool).any(|(a, p)| a > p) {
                continue;
            }
            let mut next_unsat = unsat.clone();
            let mut ok = true;
            for (w, tf) in self.true_for.iter().enumerate() {
                let sat = comp.iter().zip(tf).any(|(&a, &t)| a > 0 && t);
                if !sat {
                    if next_unsat[w] == 0 {
                        ok = false;
                        break;
                    }
                    next_unsat[w] -= 1;
                }
            }
            if !ok {
                continue;
            }
            let next_pool: Vec<usize> = pool.iter().zip(&comp).map(|(p, a)| p - a).collect();
            total += ways * self.count(next_pool, next_unsat);
        }
        self.memo.insert(key, total.clone());
        total
    }
}

/// `E N` from the type-sequence count: for a fixed assignment the slot
/// types (true or false literal) form a uniformly random arrangement of
/// `nr` trues and `nr` falses.
pub fn type_first_moment(k: usize, n: usize, r: usize, target: usize) -> BigRational {
    let m = 2 * n * r / k;
    let mut tc = TypeCounter::new(k, vec![vec![true, false]]);
    let good = tc.count(vec![n * r, n * r], vec![m - target]);
    let total = multinomial(&[n * r, n * r]);
    BigRational::new(BigInt::from(good << n), BigInt::from(total))
}

/// `E N^2` summed over the overlap `i`: a pair agreeing on `i` variables has
/// `ir` literals of each type TT and FF and `(n - i) r` of each of TF, FT.
pub fn type_second_moment(k: usize, n: usize, r: usize, target: usize) -> BigRational {
    let m = 2 * n * r / k;
    let mut acc = BigRational::zero();
    for i in 0..=n {
        let pool = vec![i * r, i * r, (n - i) * r, (n - i) * r];
        let mut tc = TypeCounter::new(
            k,
            vec![vec![true, false, true, false], vec![true, false, false, true]],
        );
        let good = tc.count(pool.clone(), vec![m - target, m - target]);
        let total = multinomial(&pool);
        let weight = BigUint::from(1u32) << n;
        acc += BigRational::new(BigInt::from(good * weight * binom(n, i)), BigInt::from(total));
    }
    acc
}
