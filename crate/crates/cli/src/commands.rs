use rayon::prelude::*;

use pauli_capacity::channel::shannon_entropy;
use pauli_capacity::concat::{mc_stack_entropy, n1_in_n2_step_count, CodeStack};
use pauli_capacity::repetition::independent_infinite_threshold;
use pauli_capacity::threshold::{
    cerf_qx, hashing_qx, hashing_threshold, infinite_bitflip_threshold, scan_for_bracket, solve_root,
    solve_threshold_exact, solve_threshold_mc_with, solve_threshold_near, sweep_optimal_n2, trace_independent_frontier,
    trace_two_pauli_frontier, upper_bound_threshold, ExactEvaluator, FrontierOptions, GridEstimate,
    McThresholdOptions, SolveOptions, ThresholdResult,
};
use pauli_capacity::{Error, NoiseFamily, PauliChannel};

use crate::config::{FrontierKind, MethodChoice, RunConfig};
use crate::output::{num, CsvOut};
use crate::CliError;

/// Half-width of the first bracket tried around a starting guess.
pub const NEAR_HALF_WIDTH: f64 = 2e-3;
/// Default Monte Carlo grid: points within this distance of the hashing threshold.
pub const MC_GRID_HALF_WIDTH: f64 = 2e-3;
pub const MC_GRID_POINTS: usize = 9;

fn need_stack(cfg: &RunConfig) -> Result<&CodeStack, CliError> {
    cfg.stack
        .as_ref()
        .ok_or_else(|| CliError::Config("a code is required: --stack, --stack-file, --rep or --n1/--n2".into()))
}

fn need_p(cfg: &RunConfig) -> Result<&[f64], CliError> {
    if cfg.p.is_empty() {
        return Err(CliError::Config("--p is required".into()));
    }
    Ok(&cfg.p)
}

/// Exact threshold of `stack` (or the bare channel) along `family`. Searches
/// outward from `center` (the hashing threshold by default) unless a bracket,
/// a full scan or a target other than one is requested.
pub fn exact_threshold(
    stack: Option<CodeStack>,
    family: &NoiseFamily,
    cfg: &RunConfig,
    center: Option<f64>,
) -> Result<ThresholdResult, Error> {
    let eval = ExactEvaluator::new(stack, *family).with_budget(cfg.budget);
    let opts = SolveOptions { target: cfg.target, tol: cfg.tol, bracket: cfg.bracket, ..Default::default() };
    if cfg.bracket.is_some() || cfg.scan || cfg.target != 1.0 {
        return solve_threshold_exact(|p| eval.entropy(p), family, &opts);
    }
    let center = match center {
        Some(c) => c,
        None => hashing_threshold(family)?.p,
    };
    solve_threshold_near(|p| eval.entropy(p), family, center, NEAR_HALF_WIDTH, &opts)
}

/// Uniform grid of `points` values within `half_width` of `center`.
pub fn centered_grid(center: f64, half_width: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| center - half_width + 2.0 * half_width * i as f64 / (points - 1) as f64).collect()
}

fn mc_grid(cfg: &RunConfig) -> Result<Vec<f64>, Error> {
    if cfg.grid.is_empty() {
        Ok(centered_grid(hashing_threshold(&cfg.family)?.p, MC_GRID_HALF_WIDTH, MC_GRID_POINTS))
    } else {
        Ok(cfg.grid.clone())
    }
}

fn mc_options(cfg: &RunConfig) -> McThresholdOptions {
    let mut opts = McThresholdOptions::new(cfg.samples_or_default(), cfg.seed);
    opts.target = cfg.target;
    opts
}

pub fn entropy(cfg: &RunConfig) -> Result<(), CliError> {
    let ps = need_p(cfg)?;
    let levels: Vec<Option<CodeStack>> = match &cfg.stack {
        None => vec![None],
        Some(s) if cfg.top_only => vec![Some(s.clone())],
        Some(s) => (1..=s.depth()).map(|k| s.prefix(k).map(Some)).collect::<Result<_, _>>()?,
    };
    let jobs: Vec<(f64, Option<CodeStack>)> =
        ps.iter().flat_map(|&p| levels.iter().map(move |l| (p, l.clone()))).collect();
    // (entropy, std_error) per job; std_error is None for exact values.
    let values: Vec<(f64, Option<f64>)> = jobs
        .par_iter()
        .map(|(p, stack)| -> Result<(f64, Option<f64>), Error> {
            let c = cfg.family.at(*p)?;
            match (stack, cfg.samples) {
                (Some(s), Some(n)) => {
                    let e = mc_stack_entropy(s, &c, n, cfg.seed)?;
                    Ok((e.mean, Some(e.std_error)))
                }
                _ => Ok((ExactEvaluator::new(stack.clone(), cfg.family).with_budget(cfg.budget).entropy_of(&c)?, None)),
            }
        })
        .collect::<Result<_, _>>()?;
    let mut out = CsvOut::open(cfg, &["level", "p", "entropy", "std_error", "samples", "seed", "method"])?;
    for ((p, stack), (e, se)) in jobs.iter().zip(values) {
        let level = stack.as_ref().map_or(0, CodeStack::depth).to_string();
        let row = match se {
            Some(se) => {
                vec![level, out.param(*p), num(e), num(se), cfg.samples_or_default().to_string(), cfg.seed.to_string(), "mc".into()]
            }
            None => vec![level, out.param(*p), num(e), String::new(), String::new(), String::new(), "exact".into()],
        };
        out.row(row)?;
    }
    out.finish()
}

const THRESHOLD_HEADER: [&str; 8] =
    ["stack", "family", "method", "threshold", "uncertainty", "entropy_at_threshold", "target", "evaluations"];

fn threshold_row(out: &CsvOut, stack: Option<&CodeStack>, r: &ThresholdResult) -> Vec<String> {
    vec![
        stack.map_or("none".into(), |s| s.to_string()),
        r.family.to_string(),
        r.method.to_string(),
        out.param(r.p),
        out.param(r.uncertainty),
        num(r.entropy_at_p),
        num(r.entropy_target),
        r.evaluations.to_string(),
    ]
}

pub fn threshold(cfg: &RunConfig) -> Result<(), CliError> {
    let r = match cfg.method {
        MethodChoice::Exact => exact_threshold(cfg.stack.clone(), &cfg.family, cfg, None)?,
        MethodChoice::Mc => solve_threshold_mc_with(need_stack(cfg)?, &cfg.family, &mc_grid(cfg)?, &mc_options(cfg))?.0,
    };
    let mut out = CsvOut::open(cfg, &THRESHOLD_HEADER)?;
    out.row(threshold_row(&out, cfg.stack.as_ref(), &r))?;
    out.finish()
}

/// Monte Carlo threshold with the per-point estimates behind it.
pub fn mc(cfg: &RunConfig) -> Result<(), CliError> {
    let stack = need_stack(cfg)?;
    let opts = mc_options(cfg);
    let (r, points): (ThresholdResult, Vec<GridEstimate>) = solve_threshold_mc_with(stack, &cfg.family, &mc_grid(cfg)?, &opts)?;
    let mut out = CsvOut::open(cfg, &["kind", "p", "entropy", "std_error", "samples", "seed"])?;
    for g in &points {
        let row = vec![
            "point".to_string(),
            out.param(g.p),
            num(g.estimate.mean),
            num(g.estimate.std_error),
            g.estimate.samples.to_string(),
            g.estimate.seed.to_string(),
        ];
        out.row(row)?;
    }
    let row = vec!["threshold".to_string(), out.param(r.p), num(r.entropy_at_p), out.param(r.uncertainty), String::new(), cfg.seed.to_string()];
    out.row(row)?;
    out.finish()
}

/// Largest `n2` in the configured range whose exact evaluation fits the budget.
pub fn n2_budget_cap(n1: usize, cfg: &RunConfig) -> usize {
    (cfg.n2_min..=cfg.n2_max).take_while(|&n2| n1_in_n2_step_count(n1, n2) <= cfg.budget).last().unwrap_or(0)
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let n1 = cfg.n1.ok_or_else(|| CliError::Config("sweep needs --n1".into()))?;
    let cap = n2_budget_cap(n1, cfg);
    if cap == 0 {
        return Err(Error::Budget { required: n1_in_n2_step_count(n1, cfg.n2_min), budget: cfg.budget }.into());
    }
    let s = sweep_optimal_n2(n1, &cfg.family, cfg.n2_min..=cap, cfg.tol, cfg.budget)?;
    let mut out = CsvOut::open(cfg, &["n1", "n2", "threshold", "evaluations", "best", "provenance"])?;
    for (n2, r) in &s.curve {
        let best = (*n2 == s.best_n2).to_string();
        out.row([n1.to_string(), n2.to_string(), out.param(r.p), r.evaluations.to_string(), best, "exact".into()])?;
    }
    for n2 in cap + 1..=cfg.n2_max {
        out.row([n1.to_string(), n2.to_string(), String::new(), String::new(), String::new(), "skipped(budget)".into()])?;
    }
    out.finish()
}

fn frontier_options(cfg: &RunConfig) -> FrontierOptions {
    FrontierOptions { max_single: cfg.max_single, max_inner: cfg.max_inner, max_outer: cfg.max_outer, tol: cfg.tol }
}

fn opt_param(out: &CsvOut, x: Option<f64>) -> String {
    x.map_or(String::new(), |v| out.param(v))
}

/// Hashing point along `(p1, p2, p1)`.
fn two_pauli_hashing(p2: f64) -> Result<Option<f64>, Error> {
    let hi = (1.0 - p2) / 3.0;
    let mut f = |p1: f64| -> Result<f64, Error> { Ok(shannon_entropy(&PauliChannel::from_errors(p1, p2, p1)?)) };
    match scan_for_bracket(&mut f, 0.0, hi, 32, 1.0) {
        Ok((b, _)) => Ok(Some(solve_root(&mut f, b, 1.0, 1e-14, 400)?.0)),
        Err(Error::NoBracket(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn frontier(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.kind {
        FrontierKind::Independent => {
            let grid = if cfg.grid.is_empty() { (0..12).map(|k| 0.02 * k as f64).collect() } else { cfg.grid.clone() };
            let opts = frontier_options(cfg);
            let traces = cfg
                .classes
                .iter()
                .map(|&c| trace_independent_frontier(c, &grid, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let mut header = vec!["q_z".to_string()];
            for c in &cfg.classes {
                header.push(format!("{c}"));
                header.push(format!("{c}_code"));
            }
            header.extend(["hashing", "upper_bound", "infinite_bit_flip"].map(String::from));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut out = CsvOut::open(cfg, &header)?;
            for (i, &q_z) in grid.iter().enumerate() {
                let mut row = vec![out.param(q_z)];
                for t in &traces {
                    match &t[i] {
                        Some(pt) => row.extend([out.param(pt.q_x), pt.code.to_string()]),
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                row.push(opt_param(&out, hashing_qx(q_z)?));
                row.push(opt_param(&out, cerf_qx(q_z)?));
                row.push(out.param(independent_infinite_threshold(q_z)?));
                out.row(row)?;
            }
            out.finish()
        }
        FrontierKind::TwoPauli => {
            let grid = if cfg.grid.is_empty() { (0..12).map(|k| 0.01 * k as f64).collect() } else { cfg.grid.clone() };
            let pts = trace_two_pauli_frontier(&grid, cfg.max_single, cfg.tol)?;
            let mut out = CsvOut::open(cfg, &["p2", "bit-flip", "bit-flip_code", "hashing"])?;
            for (&p2, pt) in grid.iter().zip(&pts) {
                let (v, code) = match pt {
                    Some(pt) => (out.param(pt.p1), pt.code.to_string()),
                    None => (String::new(), String::new()),
                };
                let row = vec![out.param(p2), v, code, opt_param(&out, two_pauli_hashing(p2)?)];
                out.row(row)?;
            }
            out.finish()
        }
    }
}

pub fn standard_families() -> [NoiseFamily; 3] {
    [NoiseFamily::Depolarizing, NoiseFamily::IndependentSym, NoiseFamily::two_pauli()]
}

pub fn bound(cfg: &RunConfig) -> Result<(), CliError> {
    let families: Vec<NoiseFamily> = if cfg.family_given { vec![cfg.family] } else { standard_families().to_vec() };
    let mut out = CsvOut::open(cfg, &["family", "hashing", "upper_bound", "infinite_bit_flip"])?;
    for fam in families {
        let infinite = match infinite_bitflip_threshold(&fam) {
            Ok(r) => out.param(r.p),
            Err(Error::NoBracket(_) | Error::Domain(_)) => String::new(),
            Err(e) => return Err(e.into()),
        };
        let row = vec![fam.to_string(), out.param(hashing_threshold(&fam)?.p), out.param(upper_bound_threshold(&fam)?.p), infinite];
        out.row(row)?;
    }
    out.finish()
}
