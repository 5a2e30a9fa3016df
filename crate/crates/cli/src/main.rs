mod output;
mod ranges;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regsat_core::asymptotics::{first_moment_growth_rate, SurfaceModel};
use regsat_core::bounds::{
    find_r_star, fmt_sig, ratio_table, upper_bound, verify_dominance, GridConfig, SearchConfig, ThresholdBounds,
};
use regsat_core::formula::{
    generate, parse_dimacs, reject_to_simple, write_dimacs, BatchEntry, BatchManifest, Formula,
};
use regsat_core::genfunc::{exact_first_moment, exact_second_moment};
use regsat_core::maxsat::{
    exhaustive_maxsat, local_search_maxsat, nearest_valid_degree, p_sat_experiment, ExperimentConfig,
    ExperimentSummary, LocalSearchConfig, DEFAULT_EXHAUSTIVE_CAP,
};
use regsat_core::{Error, Params};
use serde_json::{json, Value};

use output::{error_json, exit_code, header, Format, Sink};
use ranges::List;

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "REGSAT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "regsat", version, about = "Bounds and experiments for regular random k-SAT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args, Clone, Copy)]
struct GridArgs {
    /// Points per axis of the dominance grid.
    #[arg(long, default_value_t = 201)]
    grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
    #[arg(long, default_value_t = 2)]
    refine_levels: u32,
    #[arg(long, default_value_t = 1e-3)]
    exclusion_radius: f64,
}

impl GridArgs {
    fn config(&self) -> GridConfig {
        GridConfig {
            resolution: self.grid,
            margin: self.margin,
            refine_levels: self.refine_levels,
            exclusion_radius: self.exclusion_radius,
            ..GridConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Exhaustive,
    LocalSearch,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Upper bounds on the p-satisfiability threshold density.
    Bounds {
        #[arg(long, value_parser = parse_k_list)]
        k: List<u32>,
        #[arg(long, value_parser = parse_f64_list, default_value = "0.1:0.9:0.1")]
        p: List<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Ratio of lower to upper bound over a (k, p) sweep.
    Table {
        #[arg(long, value_parser = parse_k_list, default_value = "3,6,12")]
        k: List<u32>,
        #[arg(long, value_parser = parse_f64_list, default_value = "0.1:0.9:0.1")]
        p: List<f64>,
        #[arg(long, default_value_t = 1e-4)]
        rel_tol: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Growth-rate surface s(eta, gamma) on a uniform grid.
    Surface {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 51)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Dominance report for one (k, r, p).
    Dominance {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Critical literal degree for each (k, p).
    Rstar {
        #[arg(long, value_parser = parse_k_list)]
        k: List<u32>,
        #[arg(long, value_parser = parse_f64_list)]
        p: List<f64>,
        #[arg(long, default_value_t = 1e-4)]
        rel_tol: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Configuration-model formulas in DIMACS CNF.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reject until every clause is legal.
        #[arg(long)]
        simple: bool,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Number of formulas; seeds are seed, seed + 1, ...
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Directory for batch output with a manifest; required when count > 1.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum satisfiable clause fraction of a DIMACS formula.
    Maxsat {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        #[arg(long, default_value_t = 50)]
        restart_factor: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include wall time, which makes output run-dependent.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Share of generated formulas that are p-satisfiable.
    Experiment {
        #[arg(long)]
        k: usize,
        /// Literal degrees; alternatively give --alpha.
        #[arg(long, value_parser = parse_u32_list, conflicts_with = "alpha")]
        r: Option<List<u32>>,
        /// Target densities, rounded to the nearest valid degree.
        #[arg(long, value_parser = parse_f64_list)]
        alpha: Option<List<f64>>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Exact moments next to their growth-rate predictions.
    Moments {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        p: f64,
        /// Skip the second moment.
        #[arg(long)]
        first_only: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_u32_list(s: &str) -> Result<List<u32>, String> {
    s.parse()
}

fn parse_k_list(s: &str) -> Result<List<u32>, String> {
    let list: List<u32> = s.parse()?;
    match list.0.iter().find(|&&k| k < 2) {
        Some(k) => Err(format!("clause width must be at least 2, got {k}")),
        None => Ok(list),
    }
}

fn parse_f64_list(s: &str) -> Result<List<f64>, String> {
    s.parse()
}

fn check_k(ks: &[u32]) -> Result<(), Error> {
    match ks.iter().find(|&&k| k < 2) {
        Some(k) => Err(Error::InvalidParameter {
            name: "k",
            reason: format!("clause width must be at least 2, got {k}"),
        }),
        None => Ok(()),
    }
}


fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Bounds { k, p, common } => {
            check_k(&k.0)?;
            let cfg = json!({ "k": k.0, "p": p.0 });
            let mut rows = Vec::new();
            let mut records = Vec::new();
            for &kk in &k.0 {
                for &pp in &p.0 {
                    let ub = upper_bound(kk, pp)?;
                    rows.push(format!(
                        "{kk},{},{},{}",
                        fmt_sig(pp),
                        fmt_sig(ub.alpha_upper),
                        fmt_sig(ub.alpha_upper_tight)
                    ));
                    records.push(json!({ "k": kk, "p": pp, "alpha_upper": ub.alpha_upper, "alpha_upper_tight": ub.alpha_upper_tight }));
                }
            }
            let mut sink = Sink::open(common.out.as_ref())?;
            let h = header("bounds", cfg, None);
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => sink.csv(h, "k,p,alpha_upper,alpha_upper_tight", &rows),
                Format::Json => sink.json(h, Value::Array(records)),
            }
        }
        Command::Table { k, p, rel_tol, grid, common } | Command::Rstar { k, p, rel_tol, grid, common } => {
            let name = if k.0.len() * p.0.len() == 1 { "rstar" } else { "table" };
            check_k(&k.0)?;
            let search = SearchConfig {
                grid: grid.config(),
                rel_tol,
                ..SearchConfig::default()
            };
            let cfg = json!({ "k": k.0, "p": p.0, "search": search });
            let results: Vec<Result<ThresholdBounds, Error>> = if k.0.len() * p.0.len() == 1 {
                vec![find_r_star(k.0[0], p.0[0], &search)]
            } else {
                ratio_table(&k.0, &p.0, &search)
            };
            emit_bounds(name, common, cfg, results)
        }
        Command::Surface { k, r, p, grid, common } => {
            let params = Params::new(k, r, p)?;
            if grid < 2 {
                return Err(Error::InvalidParameter {
                    name: "grid",
                    reason: "need at least 2 points per axis".into(),
                });
            }
            let model = SurfaceModel::new(&params)?;
            let (g_lo, g_hi) = model.gamma_range();
            let cfg = json!({ "k": k, "r": r, "p": p, "grid": grid });
            let mut rows = Vec::new();
            let mut records = Vec::new();
            for i in 0..grid {
                let eta = i as f64 / (grid - 1) as f64;
                for j in 0..grid {
                    let gamma = if j + 1 == grid {
                        g_hi
                    } else {
                        g_lo + (g_hi - g_lo) * j as f64 / (grid - 1) as f64
                    };
                    let v = model.value(eta, gamma)?;
                    rows.push(format!("{},{},{}", fmt_sig(eta), fmt_sig(gamma), fmt_sig(v)));
                    records.push(json!([eta, gamma, if v.is_finite() { json!(v) } else { json!("-inf") }]));
                }
            }
            let mut sink = Sink::open(common.out.as_ref())?;
            let h = header("surface", cfg, None);
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => sink.csv(h, "eta,gamma,value", &rows),
                Format::Json => sink.json(h, Value::Array(records)),
            }
        }
        Command::Dominance { k, r, p, grid, common } => {
            let params = Params::new(k, r, p)?;
            let gc = grid.config();
            let rep = verify_dominance(&params, &gc)?;
            let cfg = json!({ "k": k, "r": r, "p": p, "grid": gc });
            let mut sink = Sink::open(common.out.as_ref())?;
            let h = header("dominance", cfg, None);
            match common.format.unwrap_or(Format::Json) {
                Format::Json => sink.json(h, serde_json::to_value(&rep).map_err(std::io::Error::from)?),
                Format::Csv => {
                    let (ae, ag) = rep.max_surplus_at.unwrap_or((f64::NAN, f64::NAN));
                    let row = format!(
                        "{k},{},{},{},{},{},{},{},{}",
                        fmt_sig(r),
                        fmt_sig(p),
                        fmt_sig(rep.dominant_value),
                        fmt_sig(rep.max_surplus),
                        fmt_sig(ae),
                        fmt_sig(ag),
                        rep.failures.len(),
                        rep.verdict.as_str()
                    );
                    sink.csv(
                        h,
                        "k,r,p,dominant_value,max_surplus,eta_at,gamma_at,failures,verdict",
                        &[row],
                    )
                }
            }
        }
        Command::Gen { n, k, r, seed, simple, budget, count, out_dir, out } => {
            if count == 0 {
                return Err(Error::InvalidParameter { name: "count", reason: "must be positive".into() });
            }
            let cfg = json!({ "n": n, "k": k, "r": r, "seed": seed, "simple": simple, "budget": budget, "count": count });
            let make = |s: u64| -> Result<(Formula, usize), Error> {
                if simple {
                    reject_to_simple(n, k, r, s, budget)
                } else {
                    generate(n, k, r, s).map(|f| (f, 1))
                }
            };
            let with_header = |f: &Formula, s: u64| {
                let h = header("gen", cfg.clone(), Some(s));
                format!("c config {h}\n{}", write_dimacs(f))
            };
            match out_dir {
                None => {
                    if count > 1 {
                        return Err(Error::InvalidParameter {
                            name: "out_dir",
                            reason: "batch generation needs --out-dir".into(),
                        });
                    }
                    let (f, _) = make(seed)?;
                    Sink::open(out.as_ref())?.text(&with_header(&f, seed))
                }
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let mut entries = Vec::new();
                    let mut m = 0;
                    for i in 0..count as u64 {
                        let s = seed.wrapping_add(i);
                        let (f, attempts) = make(s)?;
                        m = f.m();
                        let file = format!("n{n}_k{k}_r{r}_s{s}.cnf");
                        std::fs::write(dir.join(&file), with_header(&f, s))?;
                        entries.push(BatchEntry { seed: s, file, simple: f.is_simple(), attempts });
                    }
                    let manifest = BatchManifest { n, k, r, m, require_simple: simple, entries };
                    let doc = json!({ "header": header("gen", cfg, Some(seed)), "manifest": manifest });
                    let text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::from)? + "\n";
                    std::fs::write(dir.join("manifest.json"), text)?;
                    Ok(())
                }
            }
        }
        Command::Maxsat { input, method, cap, budget, noise, restart_factor, seed, timing, common } => {
            let text = std::fs::read_to_string(&input)?;
            let f = parse_dimacs(&text)?;
            let ls = LocalSearchConfig { budget, noise, restart_factor };
            let use_exhaustive = match method {
                MethodArg::Exhaustive => true,
                MethodArg::LocalSearch => false,
                MethodArg::Auto => f.n() <= cap,
            };
            let res = if use_exhaustive {
                exhaustive_maxsat(&f, cap)?
            } else {
                local_search_maxsat(&f, &ls, seed)?
            };
            let cfg = json!({ "input": input, "method": res.method.as_str(), "cap": cap, "local_search": ls });
            let mut sink = Sink::open(common.out.as_ref())?;
            let h = header("maxsat", cfg, Some(seed));
            let mut v = serde_json::to_value(&res).map_err(std::io::Error::from)?;
            if !timing {
                if let Some(o) = v.as_object_mut() {
                    o.remove("wall_time_s");
                }
            }
            match common.format.unwrap_or(Format::Json) {
                Format::Json => sink.json(h, v),
                Format::Csv => {
                    let row = format!(
                        "{},{},{},{},{},{}",
                        res.n,
                        res.m,
                        res.k,
                        res.method.as_str(),
                        res.best_satisfied,
                        fmt_sig(res.fraction)
                    );
                    sink.csv(h, "n,m,k,method,best_satisfied,fraction", &[row])
                }
            }
        }
        Command::Experiment { k, r, alpha, p, n, samples, seed, cap, budget, common } => {
            let degrees: Vec<usize> = match (r, alpha) {
                (Some(List(rs)), _) => rs.into_iter().map(|x| x as usize).collect(),
                (None, Some(List(alphas))) => alphas
                    .iter()
                    .map(|&a| nearest_valid_degree(k, n, a))
                    .collect::<Result<_, _>>()?,
                (None, None) => {
                    return Err(Error::InvalidParameter {
                        name: "r",
                        reason: "give --r or --alpha".into(),
                    })
                }
            };
            let mut summaries: Vec<ExperimentSummary> = Vec::new();
            for &deg in &degrees {
                let mut ec = ExperimentConfig::new(k, deg, p, n, samples, seed);
                ec.exhaustive_cap = cap;
                ec.local_search.budget = budget;
                summaries.push(p_sat_experiment(&ec)?);
            }
            let cfg = json!({ "k": k, "r": degrees, "p": p, "n": n, "samples": samples, "cap": cap, "budget": budget });
            let mut sink = Sink::open(common.out.as_ref())?;
            let h = header("experiment", cfg, Some(seed));
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let rows: Vec<String> = summaries.iter().map(ExperimentSummary::csv_row).collect();
                    sink.csv(h, ExperimentSummary::CSV_HEADER, &rows)
                }
                Format::Json => sink.json(h, serde_json::to_value(&summaries).map_err(std::io::Error::from)?),
            }
        }
        Command::Moments { k, n, r, p, first_only, common } => {
            let params = Params::new(k, r, p)?.with_n(n)?;
            let m1 = exact_first_moment(&params)?;
            let nf = n as f64;
            let rate_res = first_moment_growth_rate(&params);
            let rate_note = rate_res.as_ref().err().map(|e| e.to_string());
            let rate = rate_res.ok();
            let mut res = json!({
                "counts": m1.counts,
                "first_moment": {
                    "exact": m1.value.to_string(),
                    "value": m1.to_f64(),
                    "ln_over_n": m1.ln() / nf,
                    "growth_rate": rate,
                    "growth_rate_error": rate_note,
                },
            });
            if !first_only {
                let m2 = exact_second_moment(&params)?;
                res["second_moment"] = json!({
                    "exact": m2.value.to_string(),
                    "value": m2.to_f64(),
                    "ln_over_n": m2.ln() / nf,
                    "dominant_exponent": rate.map(|x| 2.0 * x),
                    "ratio_to_first_squared": (m2.ln() - 2.0 * m1.ln()).exp(),
                });
            }
            let cfg = json!({ "k": k, "n": n, "r": r, "p": p, "first_only": first_only });
            let mut sink = Sink::open(common.out.as_ref())?;
            let h = header("moments", cfg, None);
            match common.format.unwrap_or(Format::Json) {
                Format::Json => sink.json(h, res),
                Format::Csv => {
                    let mut rows = vec![format!(
                        "1,{},{},{}",
                        m1.value,
                        fmt_sig(m1.to_f64()),
                        fmt_sig(m1.ln() / nf)
                    )];
                    if let Some(m2) = res.get("second_moment") {
                        rows.push(format!(
                            "2,{},{},{}",
                            m2["exact"].as_str().unwrap_or(""),
                            fmt_sig(m2["value"].as_f64().unwrap_or(f64::NAN)),
                            fmt_sig(m2["ln_over_n"].as_f64().unwrap_or(f64::NAN))
                        ));
                    }
                    sink.csv(h, "order,exact,value,ln_over_n", &rows)
                }
            }
        }
    }
}

fn emit_bounds(name: &str, common: Common, cfg: Value, results: Vec<Result<ThresholdBounds, Error>>) -> Result<(), Error> {
    let mut ok = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(tb) => ok.push(tb),
            Err(e) => {
                eprintln!("{}", error_json(&e));
                first_err.get_or_insert(e);
            }
        }
    }
    let mut sink = Sink::open(common.out.as_ref())?;
    let h = header(name, cfg, None);
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<String> = ok.iter().map(ThresholdBounds::csv_row).collect();
            sink.csv(h, ThresholdBounds::CSV_HEADER, &rows)?;
        }
        Format::Json => sink.json(h, serde_json::to_value(&ok).map_err(std::io::Error::from)?)?,
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                let e = Error::InvalidParameter {
                    name: "REGSAT_THREADS",
                    reason: format!("expected a positive integer, got '{v}'"),
                };
                eprintln!("{}", error_json(&e));
                return ExitCode::from(exit_code(&e) as u8);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
