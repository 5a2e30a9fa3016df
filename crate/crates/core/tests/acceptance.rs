//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p regsat-core --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use regsat_core::asymptotics::{
    first_moment_growth_rate, hayman_coef_estimate, solve_univariate_saddle, RealPoly, SurfaceModel,
};
use regsat_core::bounds::{upper_bound, SearchConfig, ThresholdBounds};
use regsat_core::formula::{generate, reject_to_simple, write_dimacs, Formula};
use regsat_core::genfunc::{build_f, build_s, build_t, coef, exact_first_moment, exact_second_moment};
use regsat_core::maxsat::{nearest_valid_degree, p_sat_experiment, ExperimentConfig};
use regsat_core::{c_of_p, Params};

const PS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

// published ratios, columns k = 3, 6, 12
const TABLE: [[f64; 3]; 9] = [
    [0.252, 0.717, 0.977],
    [0.258, 0.720, 0.979],
    [0.272, 0.738, 0.980],
    [0.281, 0.755, 0.981],
    [0.295, 0.765, 0.983],
    [0.308, 0.782, 0.986],
    [0.325, 0.801, 0.988],
    [0.344, 0.822, 0.990],
    [0.402, 0.855, 0.993],
];

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: impl AsRef<str>) {
        if !pass {
            self.failures += 1;
        }
        println!("{} [{id}] {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn table(rep: &mut Report) -> BTreeMap<(u32, u64), ThresholdBounds> {
    let mut all = BTreeMap::new();
    let cfg = SearchConfig::default();
    for (col, &(k, budget_s)) in [(3u32, 600.0), (6, 600.0), (12, 1800.0)].iter().enumerate() {
        let t0 = Instant::now();
        let rows = regsat_core::bounds::ratio_table(&[k], &PS, &cfg);
        let secs = t0.elapsed().as_secs_f64();
        let mut worst = 0.0f64;
        let mut errors = Vec::new();
        let mut cells = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            match row {
                Ok(b) => {
                    let d = b.ratio - TABLE[i][col];
                    worst = worst.max(d.abs());
                    cells.push(format!("{:.4}", b.ratio));
                    all.insert((k, (PS[i] * 10.0).round() as u64), b);
                }
                Err(e) => errors.push(format!("p={}: {e}", PS[i])),
            }
        }
        let pass = errors.is_empty() && worst <= 0.01 && secs <= budget_s;
        rep.line(
            "1",
            pass,
            format!(
                "ratio table k={k}: max |computed - published| = {worst:.4} (tol 0.01), {secs:.1} s (budget {budget_s:.0} s); [{}]{}",
                cells.join(" "),
                if errors.is_empty() { String::new() } else { format!(" errors: {}", errors.join("; ")) }
            ),
        );
    }
    all
}

fn exponent_doubling(rep: &mut Report) {
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut errors = Vec::new();
    for k in [3u32, 6, 12] {
        for p in PS {
            for r in [1.0, 3.0, 10.0, 30.0, 100.0] {
                let res = (|| {
                    let params = Params::new(k, r, p)?;
                    let model = SurfaceModel::new(&params)?;
                    let (eta, gamma) = model.dominant_point();
                    Ok::<_, regsat_core::Error>(model.value(eta, gamma)? - 2.0 * first_moment_growth_rate(&params)?)
                })();
                match res {
                    Ok(d) => worst = worst.max(d.abs()),
                    Err(e) => errors.push(format!("k={k} p={p} r={r}: {e}")),
                }
                count += 1;
            }
        }
    }
    rep.line(
        "2",
        errors.is_empty() && worst <= 1e-8,
        format!("|s(1/2, c^2) - 2 FM| max {worst:.3e} over {count} points (tol 1e-8); {} errors {}", errors.len(), errors.join("; ")),
    );
}

fn polynomial_identity(rep: &mut Report) {
    let mut exact_ok = true;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let xs: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..10.0)).filter(|&x| x > 0.0).collect();
    for k in 2..=12u32 {
        let f = build_f(k).unwrap();
        let s = build_s(k).unwrap();
        let s2 = s.mul(&s);
        if f.substitute_powers(&[1, 2, 1]) != s2 {
            exact_ok = false;
        }
        for &x in &xs {
            let lhs = f.eval(&[x, x * x, x]);
            let rhs = s.eval(&[x]).powi(2);
            worst = worst.max(rel(lhs, rhs));
        }
    }
    rep.line(
        "3",
        exact_ok && worst <= 1e-12,
        format!(
            "f(x, x^2, x) = s(x)^2: exact for k=2..12 {}; max rel error {worst:.2e} at {} random x (tol 1e-12)",
            if exact_ok { "yes" } else { "NO" },
            xs.len()
        ),
    );
}

fn exact(k: u32, n: u64, r: u64, p: f64) -> (BigRational, BigRational, u64) {
    let params = Params::new(k, r as f64, p).unwrap().with_n(n).unwrap();
    let m1 = exact_first_moment(&params).unwrap();
    let m2 = exact_second_moment(&params).unwrap();
    (m1.value, m2.value, m1.counts.satisfied)
}

fn moment_oracles(rep: &mut Report) {
    let (m1, m2, target) = exact(2, 2, 1, 1.0);
    let (e1, e2) = common::enumerate_moments(2, 2, 1, target as usize);
    let eight_thirds = BigRational::new(BigInt::from(8), BigInt::from(3));
    rep.line(
        "4",
        m1 == eight_thirds && m1 == e1 && m2 == e2,
        format!("k=2 n=2 r=1 p=1: E N = {m1} (want 8/3, enumeration {e1}); E N^2 = {m2} (enumeration {e2})"),
    );

    let mut bad = Vec::new();
    let instances = [(2u32, 2u64, 1u64), (2, 2, 2), (2, 3, 1), (2, 4, 1), (3, 3, 1), (4, 2, 1), (4, 2, 2), (4, 4, 1)];
    for &(k, n, r) in &instances {
        let (m1, m2, target) = exact(k, n, r, 1.0);
        let (e1, e2) = common::enumerate_moments(k as usize, n as usize, r as usize, target as usize);
        if m1 != e1 || m2 != e2 || m2 < &m1 * &m1 {
            bad.push(format!("(k={k},n={n},r={r})"));
        }
    }
    // p < 1 against the type-sequence count
    let partial = [(2u32, 4u64, 2u64, 0.5), (2, 8, 2, 0.75), (3, 8, 3, 0.5), (3, 4, 6, 0.5)];
    for &(k, n, r, p) in &partial {
        let (m1, m2, t) = exact(k, n, r, p);
        let (ku, nu, ru, tu) = (k as usize, n as usize, r as usize, t as usize);
        if m1 != common::type_first_moment(ku, nu, ru, tu)
            || m2 != common::type_second_moment(ku, nu, ru, tu)
            || m2 < &m1 * &m1
        {
            bad.push(format!("(k={k},n={n},r={r},p={p})"));
        }
    }
    rep.line(
        "4",
        bad.is_empty(),
        format!(
            "exact moments equal oracles and E N^2 >= (E N)^2 on {} enumerable and {} partial instances{}",
            instances.len(),
            partial.len(),
            if bad.is_empty() { String::new() } else { format!("; mismatches {}", bad.join(" ")) }
        ),
    );
}

fn hayman(rep: &mut Report) {
    let t = build_t(3).unwrap();
    let real = RealPoly::from_int(&t).unwrap();
    let mut ratios = Vec::new();
    for m in [40u64, 80, 160, 320] {
        let e = m * 3 / 5;
        let exact = coef(&t, m as u32, &[e as u32]);
        let est = hayman_coef_estimate(&real, m, e).unwrap();
        let ln_exact = regsat_core::genfunc::ln_biguint(exact.magnitude());
        ratios.push((m, (ln_exact - est.ln()).exp()));
    }
    let dev: Vec<f64> = ratios.iter().map(|(_, q)| (q - 1.0).abs()).collect();
    let last = ratios.last().unwrap().1;
    let decreasing = dev.windows(2).all(|w| w[1] < w[0]);
    rep.line(
        "5",
        (0.9..=1.1).contains(&last) && decreasing,
        format!(
            "t(x), k=3, omega=0.6: exact/Hayman {} (last in [0.9, 1.1], |ratio-1| decreasing: {decreasing})",
            ratios.iter().map(|(m, q)| format!("m={m}:{q:.6}")).collect::<Vec<_>>().join(" ")
        ),
    );
}

fn bound_ordering(rep: &mut Report, table: &BTreeMap<(u32, u64), ThresholdBounds>) {
    let mut bad = Vec::new();
    let mut points = 0;
    for k in 2..=11u32 {
        for i in 1..=100 {
            let p = i as f64 / 100.0;
            points += 1;
            match upper_bound(k, p) {
                Ok(u) if u.alpha_upper_tight <= u.alpha_upper && u.alpha_upper_tight > 0.0 => {}
                Ok(u) => bad.push(format!("k={k} p={p}: {} > {}", u.alpha_upper_tight, u.alpha_upper)),
                // an error here means a nonpositive denominator
                Err(e) => bad.push(format!("k={k} p={p}: {e}")),
            }
        }
    }
    rep.line(
        "6",
        bad.is_empty(),
        format!("tight upper bound <= simple upper bound, denominators positive on {points} (k, p) points{}", if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }),
    );
    let bad: Vec<_> = table
        .values()
        .filter(|b| !(b.alpha_lower <= b.alpha_upper))
        .map(|b| format!("k={} p={}", b.k, b.p))
        .collect();
    rep.line(
        "6",
        bad.is_empty() && !table.is_empty(),
        format!("alpha_l <= alpha_u on all {} computed (k, p){}", table.len(), if bad.is_empty() { String::new() } else { format!("; violations {}", bad.join(" ")) }),
    );
}

fn saddle(rep: &mut Report) {
    let (mut dt2, mut dt1, mut df, mut st) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut errors = Vec::new();
    let mut count = 0;
    for k in [3u32, 6, 12] {
        let f = build_f(k).unwrap();
        let s = build_s(k).unwrap();
        for p in [0.1, 0.5, 0.9] {
            for r in [2.0, 10.0, 50.0] {
                count += 1;
                let res = (|| {
                    let params = Params::new(k, r, p)?;
                    let model = SurfaceModel::new(&params)?;
                    let (eta, gamma) = model.dominant_point();
                    let sad = model.saddle(eta, gamma)?;
                    let xk = solve_univariate_saddle(k, model.c())?.x;
                    let t = sad.t;
                    let (re, rg) = model.dominant_stationarity(t);
                    Ok::<_, regsat_core::Error>((
                        rel(t[1], t[0] * t[0]),
                        rel(t[0], xk).max(rel(t[2], xk)),
                        rel(f.eval(&t), s.eval(&[xk]).powi(2)),
                        re.abs().max(rg.abs()),
                    ))
                })();
                match res {
                    Ok((a, b, c, d)) => {
                        dt2 = dt2.max(a);
                        dt1 = dt1.max(b);
                        df = df.max(c);
                        st = st.max(d);
                    }
                    Err(e) => errors.push(format!("k={k} p={p} r={r}: {e}")),
                }
            }
        }
    }
    rep.line(
        "7",
        errors.is_empty() && dt2 <= 1e-10 && dt1 <= 1e-10 && df <= 1e-10 && st <= 1e-8,
        format!(
            "saddle at (1/2, c^2), {count} cases: |t2/t1^2-1| {dt2:.1e}, |t1/x_k-1| {dt1:.1e}, |f/s^2-1| {df:.1e} (tol 1e-10), stationarity {st:.1e} (tol 1e-8){}",
            if errors.is_empty() { String::new() } else { format!("; errors {}", errors.join("; ")) }
        ),
    );
}

fn to_index(f: &Formula) -> Vec<Vec<usize>> {
    let clauses = f
        .clauses()
        .iter()
        .map(|c| c.iter().map(|&l| 2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0)).collect())
        .collect();
    common::canonical(clauses)
}

fn generator(rep: &mut Report) {
    let mut audited = 0;
    let mut bad = Vec::new();
    for (n, k, r) in [(2usize, 2usize, 1usize), (9, 3, 2), (12, 3, 5), (50, 3, 6), (16, 4, 3), (30, 6, 4), (100, 3, 6), (24, 12, 7)] {
        for seed in 0..25u64 {
            let f = generate(n, k, r, seed).unwrap();
            if f.audit_degrees().is_err() || f.literal_degrees().iter().any(|&d| d != r) || f.m() != 2 * n * r / k {
                bad.push(format!("n={n} k={k} r={r} seed={seed}"));
            }
            audited += 1;
        }
    }
    rep.line(
        "8",
        bad.is_empty(),
        format!("literal degree exactly r on {audited} generated formulas{}", if bad.is_empty() { String::new() } else { format!("; failures {}", bad.join(" ")) }),
    );

    let same = (0..20u64).all(|seed| {
        let a = write_dimacs(&generate(60, 3, 4, seed).unwrap());
        let b = write_dimacs(&generate(60, 3, 4, seed).unwrap());
        let (sa, _) = reject_to_simple(30, 3, 3, seed, 10_000).unwrap();
        let (sb, _) = reject_to_simple(30, 3, 3, seed, 10_000).unwrap();
        a.as_bytes() == b.as_bytes() && write_dimacs(&sa).as_bytes() == write_dimacs(&sb).as_bytes()
    });
    let differs = write_dimacs(&generate(60, 3, 4, 1).unwrap()) != write_dimacs(&generate(60, 3, 4, 2).unwrap());
    rep.line("8", same && differs, format!("same seed gives byte-identical DIMACS (20 seeds, plain and simple): {same}; distinct seeds differ: {differs}"));

    let expected = common::clause_multiset_distribution(2, 2, 1);
    let samples = 100_000u64;
    let mut observed: BTreeMap<Vec<Vec<usize>>, u64> = BTreeMap::new();
    for seed in 0..samples {
        *observed.entry(to_index(&generate(2, 2, 1, seed).unwrap())).or_default() += 1;
    }
    let unexpected = observed.keys().filter(|c| !expected.contains_key(*c)).count();
    let stat: f64 = expected
        .iter()
        .map(|(c, &q)| {
            let e = q * samples as f64;
            let o = *observed.get(c).unwrap_or(&0) as f64;
            (o - e).powi(2) / e
        })
        .sum();
    let dof = expected.len() - 1;
    let pval = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
    rep.line(
        "8",
        unexpected == 0 && pval > 0.01,
        format!("chi-square (n=2, k=2, r=1), {samples} samples, {} configurations: stat {stat:.2}, dof {dof}, p-value {pval:.3} (reject below 0.01)", expected.len()),
    );
}

fn empirical(rep: &mut Report, table: &BTreeMap<(u32, u64), ThresholdBounds>) {
    let (k, n, p, samples) = (3usize, 20usize, 0.5, 50usize);
    let Some(b) = table.get(&(3, 5)) else {
        rep.line("9", false, "no r* for k=3, p=0.5");
        return;
    };
    let u = upper_bound(3, p).unwrap();
    let cases = [
        ("0.5 alpha_l", 0.5 * b.alpha_lower, true),
        ("1.5 alpha_u", 1.5 * u.alpha_upper, false),
    ];
    for (label, alpha, want_high) in cases {
        let r = nearest_valid_degree(k, n, alpha).unwrap();
        let s = p_sat_experiment(&ExperimentConfig::new(k, r, p, n, samples, 7)).unwrap();
        let pass = if want_high { s.psat_fraction >= 0.9 } else { s.psat_fraction <= 0.1 };
        rep.line(
            "9",
            pass,
            format!(
                "k=3 n=20 p=0.5 at {label} = {alpha:.3} (r={r}, alpha={:.3}), {samples} samples, {}: p-sat fraction {:.2} (want {}), mean max-sat fraction {:.4} vs c={:.4}",
                s.alpha,
                s.method.as_str(),
                s.psat_fraction,
                if want_high { ">= 0.9" } else { "<= 0.1" },
                s.mean_frac,
                c_of_p(3, p).unwrap()
            ),
        );
    }
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let mut rep = Report { failures: 0 };
    let t0 = Instant::now();
    exponent_doubling(&mut rep);
    polynomial_identity(&mut rep);
    moment_oracles(&mut rep);
    hayman(&mut rep);
    saddle(&mut rep);
    generator(&mut rep);
    let table = table(&mut rep);
    bound_ordering(&mut rep, &table);
    empirical(&mut rep, &table);
    println!(
        "acceptance: {} failure(s), {:.1} s total",
        rep.failures,
        t0.elapsed().as_secs_f64()
    );
    if rep.failures > 0 {
        std::process::exit(1);
    }
}
