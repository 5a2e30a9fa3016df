//! Maximum satisfiable clause counts: exact Gray-code enumeration for small
//! `n`, noisy greedy local search otherwise, and p-satisfiability experiments
//! over generated formulas.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{generate, Formula};
use crate::params::c_of_p;

/// Default largest `n` for exhaustive search.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exhaustive,
    LocalSearch,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::LocalSearch => "local-search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxSatResult {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: Option<u64>,
    pub method: Method,
    pub best_satisfied: usize,
    pub fraction: f64,
    /// `assignment[v]` is the value of variable `v + 1`.
    pub assignment: Vec<bool>,
    pub evaluations: u64,
    pub wall_time_s: f64,
}

/// Per-clause true-literal counts with occurrence lists, updated one flip at
/// a time.
struct State {
    /// `occ[v]` lists `(clause, positive)` for every occurrence of `v + 1`.
    occ: Vec<Vec<(usize, bool)>>,
    assign: Vec<bool>,
    true_count: Vec<u32>,
    satisfied: usize,
}

impl State {
    fn new(formula: &Formula, assign: Vec<bool>) -> Self {
        let mut occ = vec![Vec::new(); formula.n()];
        for (j, c) in formula.clauses().iter().enumerate() {
            for &l in c {
                occ[l.unsigned_abs() as usize - 1].push((j, l > 0));
            }
        }
        let mut s = State {
            occ,
            assign,
            true_count: vec![0; formula.m()],
            satisfied: 0,
        };
        s.reset(None);
        s
    }

    fn reset(&mut self, assign: Option<Vec<bool>>) {
        if let Some(a) = assign {
            self.assign = a;
        }
        self.true_count.iter_mut().for_each(|t| *t = 0);
        for (v, occs) in self.occ.iter().enumerate() {
            for &(j, pos) in occs {
                if self.assign[v] == pos {
                    self.true_count[j] += 1;
                }
            }
        }
        self.satisfied = self.true_count.iter().filter(|&&t| t > 0).count();
    }

    fn flip(&mut self, v: usize) {
        let new = !self.assign[v];
        self.assign[v] = new;
        for &(j, pos) in &self.occ[v] {
            if pos == new {
                self.true_count[j] += 1;
                if self.true_count[j] == 1 {
                    self.satisfied += 1;
                }
            } else {
                self.true_count[j] -= 1;
                if self.true_count[j] == 0 {
                    self.satisfied -= 1;
                }
            }
        }
    }

    /// Change in the satisfied count if `v` were flipped.
    fn gain(&self, v: usize) -> i64 {
        let new = !self.assign[v];
        let mut delta = vec![];
        for &(j, pos) in &self.occ[v] {
            delta.push((j, if pos == new { 1i64 } else { -1 }));
        }
        delta.sort_unstable();
        let mut g = 0;
        let mut i = 0;
        while i < delta.len() {
            let j = delta[i].0;
            let mut d = 0;
            while i < delta.len() && delta[i].0 == j {
                d += delta[i].1;
                i += 1;
            }
            let before = self.true_count[j] as i64;
            g += i64::from(before + d > 0) - i64::from(before > 0);
        }
        g
    }
}

fn check_formula(f: &Formula) -> Result<()> {
    if f.k() < 2 {
        return Err(Error::param("k", format!("clause width must be at least 2, got {}", f.k())));
    }
    if f.m() == 0 {
        return Err(Error::param("formula", "formula has no clauses"));
    }
    Ok(())
}

fn result(f: &Formula, method: Method, best: usize, assignment: Vec<bool>, evals: u64, t: Instant) -> MaxSatResult {
    MaxSatResult {
        n: f.n(),
        m: f.m(),
        k: f.k(),
        seed: f.seed(),
        method,
        best_satisfied: best,
        fraction: best as f64 / f.m() as f64,
        assignment,
        evaluations: evals,
        wall_time_s: t.elapsed().as_secs_f64(),
    }
}

/// Exact maximum over all `2^n` assignments, visited in Gray-code order.
pub fn exhaustive_maxsat(f: &Formula, cap: usize) -> Result<MaxSatResult> {
    check_formula(f)?;
    if f.n() > cap || f.n() > 40 {
        return Err(Error::CapExceeded(format!(
            "exhaustive search limited to n <= {cap}, formula has n = {}",
            f.n()
        )));
    }
    let t = Instant::now();
    let mut st = State::new(f, vec![false; f.n()]);
    let mut best = st.satisfied;
    let mut best_assign = st.assign.clone();
    let total: u64 = 1 << f.n();
    for i in 1..total {
        st.flip(i.trailing_zeros() as usize);
        if st.satisfied > best {
            best = st.satisfied;
            best_assign.clone_from(&st.assign);
            if best == f.m() {
                return Ok(result(f, Method::Exhaustive, best, best_assign, i + 1, t));
            }
        }
    }
    Ok(result(f, Method::Exhaustive, best, best_assign, total, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    /// Number of flips.
    pub budget: u64,
    /// Probability of flipping a random variable of the chosen unsatisfied
    /// clause instead of its best variable.
    pub noise: f64,
    /// Flips between random restarts, as a multiple of `n`.
    pub restart_factor: u64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        LocalSearchConfig {
            budget: 100_000,
            noise: 0.3,
            restart_factor: 50,
        }
    }
}

/// Best assignment found by noisy greedy flips from random starts; a lower
/// bound on the true maximum.
pub fn local_search_maxsat(f: &Formula, cfg: &LocalSearchConfig, seed: u64) -> Result<MaxSatResult> {
    check_formula(f)?;
    if !(0.0..=1.0).contains(&cfg.noise) {
        return Err(Error::param("noise", "must lie in [0, 1]"));
    }
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.n();
    let random_assign = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen::<bool>()).collect::<Vec<_>>();
    let mut st = State::new(f, random_assign(&mut rng));
    let mut best = st.satisfied;
    let mut best_assign = st.assign.clone();
    let restart_every = (cfg.restart_factor.max(1)).saturating_mul(n as u64);
    let mut since_restart = 0;
    for _ in 0..cfg.budget {
        if best == f.m() {
            break;
        }
        if since_restart >= restart_every {
            st.reset(Some(random_assign(&mut rng)));
            since_restart = 0;
        }
        let unsat: Vec<usize> = (0..f.m()).filter(|&j| st.true_count[j] == 0).collect();
        let clause = &f.clauses()[unsat[rng.gen_range(0..unsat.len())]];
        let v = if rng.gen::<f64>() < cfg.noise {
            clause[rng.gen_range(0..clause.len())].unsigned_abs() as usize - 1
        } else {
            let mut best_v = clause[0].unsigned_abs() as usize - 1;
            let mut best_g = i64::MIN;
            for &l in clause {
                let v = l.unsigned_abs() as usize - 1;
                let g = st.gain(v);
                if g > best_g {
                    best_g = g;
                    best_v = v;
                }
            }
            best_v
        };
        st.flip(v);
        since_restart += 1;
        if st.satisfied > best {
            best = st.satisfied;
            best_assign.clone_from(&st.assign);
        }
    }
    let evals = cfg.budget + 1;
    Ok(result(f, Method::LocalSearch, best, best_assign, evals, t))
}

/// Settings of a p-satisfiability experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub r: usize,
    pub p: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Exhaustive search is used whenever `n` is at most this cap.
    pub exhaustive_cap: usize,
    pub local_search: LocalSearchConfig,
}

impl ExperimentConfig {
    pub fn new(k: usize, r: usize, p: f64, n: usize, samples: usize, seed: u64) -> Self {
        ExperimentConfig {
            k,
            r,
            p,
            n,
            samples,
            seed,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            local_search: LocalSearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub k: usize,
    pub r: usize,
    pub alpha: f64,
    pub p: f64,
    pub n: usize,
    pub samples: usize,
    /// Share of formulas whose max-sat fraction reaches `c(p)`.
    pub psat_fraction: f64,
    pub mean_frac: f64,
    pub std_frac: f64,
    pub method: Method,
    /// Half-width `t / m` at which `2 exp(-2 t^2 / m)` equals 0.05, for
    /// comparison with `std_frac`.
    pub subgaussian_width: f64,
    pub seeds: Vec<u64>,
}

impl ExperimentSummary {
    pub const CSV_HEADER: &'static str = "k,r,alpha,p,n,samples,psat_fraction,mean_frac,std_frac,method";

    pub fn csv_row(&self) -> String {
        use crate::bounds::fmt_sig;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.r,
            fmt_sig(self.alpha),
            fmt_sig(self.p),
            self.n,
            self.samples,
            fmt_sig(self.psat_fraction),
            fmt_sig(self.mean_frac),
            fmt_sig(self.std_frac),
            self.method.as_str()
        )
    }
}

/// Integer degree `r >= 1` with `k | 2 n r` whose density `2r/k` is closest
/// to `alpha`.
pub fn nearest_valid_degree(k: usize, n: usize, alpha: f64) -> Result<usize> {
    if k < 2 || n == 0 || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("need k >= 2, n >= 1, alpha > 0 (k={k}, n={n}, alpha={alpha})")));
    }
    let target = k as f64 * alpha / 2.0;
    let step = k / num_integer::gcd(k, 2 * n);
    let lower = ((target / step as f64).floor() as usize).max(1) * step;
    let upper = lower + step;
    Ok(if (target - lower as f64).abs() <= (upper as f64 - target).abs() {
        lower
    } else {
        upper
    })
}

/// Generates `samples` formulas and measures their max-sat fractions.
pub fn p_sat_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let c = c_of_p(cfg.k as u32, cfg.p)?;
    if cfg.samples == 0 {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.samples).map(|_| rng.gen()).collect();
    let method = if cfg.n <= cfg.exhaustive_cap {
        Method::Exhaustive
    } else {
        Method::LocalSearch
    };
    let fractions: Vec<(f64, bool)> = seeds
        .par_iter()
        .map(|&s| {
            let f = generate(cfg.n, cfg.k, cfg.r, s)?;
            let res = match method {
                Method::Exhaustive => exhaustive_maxsat(&f, cfg.exhaustive_cap)?,
                Method::LocalSearch => local_search_maxsat(&f, &cfg.local_search, s)?,
            };
            // c m up to rounding in c
            let psat = res.best_satisfied as f64 >= c * f.m() as f64 - 1e-9;
            Ok((res.fraction, psat))
        })
        .collect::<Result<_>>()?;
    let count = fractions.len() as f64;
    let mean = fractions.iter().map(|x| x.0).sum::<f64>() / count;
    let var = if fractions.len() > 1 {
        fractions.iter().map(|x| (x.0 - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let m = 2 * cfg.n * cfg.r / cfg.k;
    Ok(ExperimentSummary {
        k: cfg.k,
        r: cfg.r,
        alpha: 2.0 * cfg.r as f64 / cfg.k as f64,
        p: cfg.p,
        n: cfg.n,
        samples: cfg.samples,
        psat_fraction: fractions.iter().filter(|x| x.1).count() as f64 / count,
        mean_frac: mean,
        std_frac: var.sqrt(),
        method,
        subgaussian_width: ((2.0f64 / 0.05).ln() / (2.0 * m as f64)).sqrt(),
        seeds,
    })
}
