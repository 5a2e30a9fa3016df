//! Configuration-model generation of regular random k-SAT formulas and DIMACS
//! serialisation.
//!
//! Literal `l` in `0..2n` is variable `l / 2`, negated when `l` is odd, and
//! owns the literal-side edges `l r .. (l + 1) r`. Clause `j` owns the
//! clause-side slots `j k .. (j + 1) k`. A uniformly random permutation of
//! the `2 n r` edges fills the slots.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// DIMACS literal: `+v` or `-v` for the 1-based variable `v`.
pub type Lit = i32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    n: usize,
    k: usize,
    /// Literal degree when the formula came from the generator or declared
    /// one in its header.
    r: Option<usize>,
    seed: Option<u64>,
    clauses: Vec<Vec<Lit>>,
}

/// A clause is legal when it has no repeated and no complementary literals.
pub fn clause_is_legal(clause: &[Lit]) -> bool {
    for (i, a) in clause.iter().enumerate() {
        if clause[i + 1..].iter().any(|b| b.abs() == a.abs()) {
            return false;
        }
    }
    true
}

fn check_generation(n: usize, k: usize, r: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "need at least one variable"));
    }
    if k < 2 {
        return Err(Error::param("k", format!("clause width must be at least 2, got {k}")));
    }
    if r == 0 {
        return Err(Error::param("r", "literal degree must be positive"));
    }
    let edges = 2 * n * r;
    if edges % k != 0 {
        return Err(Error::Integrality(format!(
            "2nr = {edges} is not divisible by k = {k} (n={n}, r={r})"
        )));
    }
    if n > i32::MAX as usize {
        return Err(Error::param("n", "too many variables for DIMACS literals"));
    }
    Ok(())
}

impl Formula {
    /// Builds a formula from explicit clauses, checking variable ranges and a
    /// uniform clause width.
    pub fn from_clauses(n: usize, clauses: Vec<Vec<Lit>>) -> Result<Self> {
        let k = clauses.first().map_or(0, Vec::len);
        for (i, c) in clauses.iter().enumerate() {
            if c.len() != k {
                return Err(Error::param("clauses", format!("clause {i} has width {} not {k}", c.len())));
            }
            if let Some(l) = c.iter().find(|l| **l == 0 || l.unsigned_abs() as usize > n) {
                return Err(Error::param("clauses", format!("literal {l} out of range for n={n}")));
            }
        }
        Ok(Formula {
            n,
            k,
            r: None,
            seed: None,
            clauses,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn r(&self) -> Option<usize> {
        self.r
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn simple_flags(&self) -> Vec<bool> {
        self.clauses.iter().map(|c| clause_is_legal(c)).collect()
    }

    pub fn is_simple(&self) -> bool {
        self.clauses.iter().all(|c| clause_is_legal(c))
    }

    /// Occurrences of each literal, indexed `2 (v - 1)` for `+v` and
    /// `2 (v - 1) + 1` for `-v`.
    pub fn literal_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; 2 * self.n];
        for &l in self.clauses.iter().flatten() {
            deg[lit_index(l)] += 1;
        }
        deg
    }

    /// Checks that every literal occurs exactly `r` times and `m k = 2 n r`.
    pub fn audit_degrees(&self) -> Result<()> {
        let r = self.r.ok_or_else(|| Error::param("r", "formula has no declared literal degree"))?;
        if self.m() * self.k != 2 * self.n * r {
            return Err(Error::Integrality(format!(
                "m k = {} but 2 n r = {}",
                self.m() * self.k,
                2 * self.n * r
            )));
        }
        if let Some((i, d)) = self.literal_degrees().iter().enumerate().find(|(_, d)| **d != r) {
            return Err(Error::Integrality(format!("literal index {i} has degree {d}, expected {r}")));
        }
        Ok(())
    }

    /// Number of clauses with at least one true literal; `assignment[v]` is
    /// the value of variable `v + 1`.
    pub fn satisfied_count(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
            .count()
    }

    /// Sorted clauses of sorted literals, for comparisons up to clause order.
    pub fn canonical(&self) -> Vec<Vec<Lit>> {
        let mut cs: Vec<Vec<Lit>> = self
            .clauses
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        cs.sort();
        cs
    }
}

fn lit_index(l: Lit) -> usize {
    2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0)
}

fn lit_of_index(i: usize) -> Lit {
    let v = (i / 2 + 1) as Lit;
    if i % 2 == 0 {
        v
    } else {
        -v
    }
}

/// One configuration-model formula drawn from `rng`.
pub fn generate_with_rng<R: Rng + ?Sized>(n: usize, k: usize, r: usize, rng: &mut R) -> Result<Formula> {
    check_generation(n, k, r)?;
    let mut perm: Vec<usize> = (0..2 * n * r).collect();
    perm.shuffle(rng);
    let clauses = perm
        .chunks(k)
        .map(|slots| slots.iter().map(|&e| lit_of_index(e / r)).collect())
        .collect();
    Ok(Formula {
        n,
        k,
        r: Some(r),
        seed: None,
        clauses,
    })
}

/// Configuration-model formula, deterministic in `seed`.
pub fn generate(n: usize, k: usize, r: usize, seed: u64) -> Result<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = generate_with_rng(n, k, r, &mut rng)?;
    f.seed = Some(seed);
    Ok(f)
}

/// First simple formula from the stream seeded by `seed`, with the number of
/// draws it took.
pub fn reject_to_simple(n: usize, k: usize, r: usize, seed: u64, budget: usize) -> Result<(Formula, usize)> {
    check_generation(n, k, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=budget {
        let mut f = generate_with_rng(n, k, r, &mut rng)?;
        if f.is_simple() {
            f.seed = Some(seed);
            return Ok((f, attempt));
        }
    }
    Err(Error::RetryBudget(budget))
}

/// Entry of a batch manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub seed: u64,
    pub file: String,
    pub simple: bool,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchManifest {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub m: usize,
    pub require_simple: bool,
    pub entries: Vec<BatchEntry>,
}

/// Generates one formula per seed in parallel; with `require_simple` each
/// seed drives its own rejection stream.
pub fn generate_batch(
    n: usize,
    k: usize,
    r: usize,
    seeds: &[u64],
    require_simple: bool,
    budget: usize,
) -> Result<Vec<(Formula, usize)>> {
    seeds
        .par_iter()
        .map(|&s| {
            if require_simple {
                reject_to_simple(n, k, r, s, budget)
            } else {
                generate(n, k, r, s).map(|f| (f, 1))
            }
        })
        .collect()
}

/// DIMACS CNF text with the seed, width, degree and simplicity as comments.
pub fn write_dimacs(f: &Formula) -> String {
    let mut out = String::new();
    out.push_str("c regular random k-SAT\n");
    if let Some(s) = f.seed {
        let _ = writeln!(out, "c seed {s}");
    }
    let _ = writeln!(out, "c k {}", f.k);
    if let Some(r) = f.r {
        let _ = writeln!(out, "c r {r}");
    }
    let _ = writeln!(out, "c simple {}", f.is_simple());
    let _ = writeln!(out, "p cnf {} {}", f.n, f.m());
    for c in &f.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS CNF. Clauses may span lines; `seed` and `r` comments written
/// by [`write_dimacs`] are restored.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut seed = None;
    let mut r = None;
    let mut clauses = Vec::new();
    let mut cur: Vec<Lit> = Vec::new();
    let err = |line: usize, reason: String| Error::Parse { line, reason };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut it = rest.split_whitespace();
            match (it.next(), it.next()) {
                (Some("seed"), Some(v)) => seed = v.parse().ok(),
                (Some("r"), Some(v)) => r = v.parse().ok(),
                _ => {}
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(line_no, "duplicate problem line".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(err(line_no, format!("expected 'p cnf <n> <m>', got '{line}'")));
            }
            let n = parts[2].parse().map_err(|_| err(line_no, format!("bad variable count '{}'", parts[2])))?;
            let m = parts[3].parse().map_err(|_| err(line_no, format!("bad clause count '{}'", parts[3])))?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(err(line_no, "clause before the problem line".into()));
        };
        for tok in line.split_whitespace() {
            let l: Lit = tok.parse().map_err(|_| err(line_no, format!("bad literal '{tok}'")))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else if l.unsigned_abs() as usize > n {
                return Err(err(line_no, format!("literal {l} exceeds n={n}")));
            } else {
                cur.push(l);
            }
        }
    }
    let (n, m) = header.ok_or_else(|| err(0, "missing problem line".into()))?;
    if !cur.is_empty() {
        return Err(err(text.lines().count(), "last clause is not 0-terminated".into()));
    }
    if clauses.len() != m {
        return Err(err(0, format!("header declares {m} clauses, found {}", clauses.len())));
    }
    let mut f = Formula::from_clauses(n, clauses).map_err(|e| err(0, e.to_string()))?;
    f.seed = seed;
    f.r = r;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_clause_dimacs() {
        let f = Formula::from_clauses(2, vec![vec![1, -2]]).unwrap();
        let text = write_dimacs(&f);
        assert!(text.contains("p cnf 2 1\n1 -2 0\n"));
    }

    #[test]
    fn smallest_instance_has_two_clauses() {
        let f = generate(2, 2, 1, 7).unwrap();
        assert_eq!(f.m(), 2);
        f.audit_degrees().unwrap();
    }

    #[test]
    fn divisibility_is_enforced() {
        assert!(matches!(generate(2, 3, 1, 0), Err(Error::Integrality(_))));
        assert!(generate(3, 3, 1, 0).is_ok());
        assert!(generate(2, 1, 1, 0).is_err());
    }

    #[test]
    fn same_seed_same_text() {
        let a = write_dimacs(&generate(30, 3, 6, 99).unwrap());
        let b = write_dimacs(&generate(30, 3, 6, 99).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, write_dimacs(&generate(30, 3, 6, 100).unwrap()));
    }

    #[test]
    fn complementary_clause_is_illegal() {
        assert!(!clause_is_legal(&[1, -1]));
        assert!(!clause_is_legal(&[2, 3, 2]));
        assert!(clause_is_legal(&[1, -2, 3]));
    }

    #[test]
    fn rejection_yields_simple_formulas() {
        let (f, attempts) = reject_to_simple(2, 2, 1, 3, 1000).unwrap();
        assert!(f.is_simple() && attempts >= 1);
        let (g, _) = reject_to_simple(40, 3, 3, 5, 10_000).unwrap();
        assert!(g.is_simple());
        g.audit_degrees().unwrap();
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "p cnf 2 1\n1 x 0\n";
        match parse_dimacs(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
    }

    proptest! {
        #[test]
        fn degrees_are_regular(n in 1usize..30, r in 1usize..6, seed: u64) {
            let k = 2;
            let f = generate(n, k, r, seed).unwrap();
            prop_assert_eq!(f.m() * k, 2 * n * r);
            prop_assert!(f.literal_degrees().iter().all(|&d| d == r));
        }

        #[test]
        fn dimacs_round_trip(n in 1usize..20, r in 1usize..5, seed: u64) {
            let f = generate(3 * n, 3, r, seed).unwrap();
            let g = parse_dimacs(&write_dimacs(&f)).unwrap();
            prop_assert_eq!(f.canonical(), g.canonical());
            prop_assert_eq!(g.seed(), Some(seed));
            prop_assert_eq!(g.r(), Some(r));
            g.audit_degrees().unwrap();
        }
    }
}
