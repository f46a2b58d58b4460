use rayon::prelude::*;

use pauli_capacity::channel::shannon_entropy;
use pauli_capacity::concat::CodeStack;
use pauli_capacity::threshold::{
    best_five_qubit_depth, extrapolate_level_infinity, hashing_threshold, infinite_bitflip_threshold, solve_threshold_mc_with,
    sweep_optimal_n2, upper_bound_threshold, ExtrapolationOptions, McPlan, McThresholdOptions, ThresholdResult,
};
use pauli_capacity::{Error, NoiseFamily};

use crate::commands::{centered_grid, exact_threshold, n2_budget_cap, standard_families};
use crate::config::RunConfig;
use crate::output::{num, CsvOut};
use crate::CliError;

/// Grid for Monte Carlo levels: points within this distance of the level below.
const MC_LEVEL_HALF_WIDTH: f64 = 4e-4;
const MC_LEVEL_POINTS: usize = 9;
const EXTRAPOLATION_LEVELS: usize = 6;

#[derive(Debug, Clone)]
enum Cell {
    Exact(f64),
    Mc { p: f64, sigma: f64 },
    Skipped,
}

impl Cell {
    fn from_result(r: Result<ThresholdResult, Error>) -> Result<Cell, Error> {
        match r {
            Ok(r) if r.uncertainty > 0.0 => Ok(Cell::Mc { p: r.p, sigma: r.uncertainty }),
            Ok(r) => Ok(Cell::Exact(r.p)),
            Err(Error::Budget { .. }) => Ok(Cell::Skipped),
            Err(e) => Err(e),
        }
    }

    fn p(&self) -> Option<f64> {
        match *self {
            Cell::Exact(p) | Cell::Mc { p, .. } => Some(p),
            Cell::Skipped => None,
        }
    }

    fn provenance(&self) -> &'static str {
        match self {
            Cell::Exact(_) => "exact",
            Cell::Mc { .. } => "mc",
            Cell::Skipped => "skipped(budget)",
        }
    }

    /// Value, uncertainty and provenance columns for a noise parameter.
    fn param_fields(&self, out: &CsvOut) -> [String; 3] {
        match *self {
            Cell::Exact(p) => [out.param(p), String::new(), self.provenance().into()],
            Cell::Mc { p, sigma } => [out.param(p), out.param(sigma), self.provenance().into()],
            Cell::Skipped => [String::new(), String::new(), self.provenance().into()],
        }
    }

    /// Same columns for the channel entropy at the parameter.
    fn entropy_fields(&self, family: &NoiseFamily) -> Result<[String; 3], Error> {
        let s = |p: f64| -> Result<f64, Error> { Ok(shannon_entropy(&family.at(p)?)) };
        Ok(match *self {
            Cell::Exact(p) => [num(s(p)?), String::new(), self.provenance().into()],
            Cell::Mc { p, sigma } => {
                let h = 1e-7;
                let slope = (s(p + h)? - s(p - h)?) / (2.0 * h);
                [num(s(p)?), num((slope * sigma).abs()), self.provenance().into()]
            }
            Cell::Skipped => [String::new(), String::new(), self.provenance().into()],
        })
    }
}

fn family_header(prefix: &[&str], families: &[NoiseFamily], suffixes: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    for f in families {
        for s in suffixes {
            h.push(if s.is_empty() { f.to_string() } else { format!("{f}_{s}") });
        }
    }
    h
}

fn open(cfg: &RunConfig, header: &[String]) -> Result<CsvOut, CliError> {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    CsvOut::open(cfg, &h)
}

/// Threshold of `stack` by Monte Carlo on a grid around `center`.
fn mc_cell(stack: &CodeStack, family: &NoiseFamily, center: f64, samples: u64, seed: u64) -> Result<Cell, Error> {
    let grid = centered_grid(center, MC_LEVEL_HALF_WIDTH, MC_LEVEL_POINTS);
    let r = solve_threshold_mc_with(stack, family, &grid, &McThresholdOptions::new(samples, seed));
    Cell::from_result(r.map(|(r, _)| r))
}

/// Level-infinity limit of `base` followed by `j` levels of [[5,1,3]].
fn extrapolated_cell(base: &CodeStack, family: &NoiseFamily, cfg: &RunConfig, seed: u64) -> Result<Cell, Error> {
    let Some(samples) = cfg.samples else {
        return Ok(Cell::Skipped);
    };
    let opts = ExtrapolationOptions {
        max_levels: EXTRAPOLATION_LEVELS,
        budget: cfg.budget,
        mc: Some(McPlan { half_width: MC_LEVEL_HALF_WIDTH, points: MC_LEVEL_POINTS, samples, seed }),
        ..Default::default()
    };
    let r = extrapolate_level_infinity(|j| Ok(base.clone().then_five_qubit(j)), family, &opts);
    match r {
        Err(Error::NonConvergence(_)) => Ok(Cell::Skipped),
        r => Cell::from_result(r.map(|e| e.result)),
    }
}

/// Lower confidence bound over fixed [[5,1,3]] depths on top of `base`.
fn fixed_depth_cell(base: &CodeStack, family: &NoiseFamily, cfg: &RunConfig, seed: u64) -> Result<(Cell, String), Error> {
    let Some(samples) = cfg.samples else {
        return Ok((Cell::Skipped, format!("{base}+five513x{:?}", cfg.five_levels)));
    };
    let center = exact_threshold(Some(base.clone()), family, cfg, None)?.p;
    let plan = McPlan { half_width: MC_LEVEL_HALF_WIDTH, points: MC_LEVEL_POINTS, samples, seed };
    let r = best_five_qubit_depth(base, family, cfg.five_levels.clone(), center, &plan)?;
    Ok((Cell::from_result(Ok(r.result))?, r.stack.to_string()))
}

fn exact_cell(stack: Option<&str>, family: &NoiseFamily, cfg: &RunConfig, center: Option<f64>) -> Result<Cell, Error> {
    let stack = stack.map(str::parse::<CodeStack>).transpose()?;
    Cell::from_result(exact_threshold(stack, family, cfg, center))
}

/// Exact levels along `stacks` (level 0 is the hashing point), each search
/// starting from the level below.
fn exact_ladder(stacks: &[Option<String>], family: &NoiseFamily, cfg: &RunConfig) -> Result<Vec<Cell>, Error> {
    let mut cells = Vec::with_capacity(stacks.len());
    let mut center = None;
    for s in stacks {
        let cell = exact_cell(s.as_deref(), family, cfg, center)?;
        center = cell.p().or(center);
        cells.push(cell);
    }
    Ok(cells)
}

pub fn run(cfg: &RunConfig, id: u8) -> Result<(), CliError> {
    match id {
        1 => table1(cfg),
        2 => table2(cfg),
        3 => table3(cfg),
        4 => optimal_n2_table(cfg, NoiseFamily::Depolarizing),
        5 => table5(cfg),
        6 => optimal_n2_table(cfg, NoiseFamily::IndependentSym),
        7 => table78(cfg, false),
        8 => table78(cfg, true),
        _ => Err(CliError::Config(format!("table {id}: expected 1..8"))),
    }
}

/// Noise dominated by one Pauli: [[5,1,3]] levels against concatenated
/// 5-qubit bit-flip codes.
fn table1(cfg: &RunConfig) -> Result<(), CliError> {
    let fam = NoiseFamily::dominated();
    let five: Vec<Option<String>> = (0..=2).map(|k| (k > 0).then(|| format!("five513x{k}"))).collect();
    let rep: Vec<Option<String>> = (0..=2).map(|k| (k > 0).then(|| format!("rep5bitx{k}"))).collect();
    let (a, b) = rayon::join(|| exact_ladder(&five, &fam, cfg), || exact_ladder(&rep, &fam, cfg));
    let (a, b) = (a?, b?);
    let header: Vec<String> = ["level", "five513", "five513_provenance", "rep5bit", "rep5bit_provenance"].map(String::from).into();
    let mut out = open(cfg, &header)?;
    for k in 0..=2 {
        let [va, _, pa] = a[k].param_fields(&out);
        let [vb, _, pb] = b[k].param_fields(&out);
        out.row([k.to_string(), va, pa, vb, pb])?;
    }
    out.finish()
}

fn ladder_stack(level: usize) -> Option<String> {
    match level {
        0 => None,
        1 => Some("rep5bit".into()),
        2..=7 => Some(format!("rep5bit+rep2phasex{}", level - 1)),
        _ => Some(format!("rep5bit+rep2phasex6+five513x{}", level - 7)),
    }
}

/// 5-qubit bit-flip code in 2^k-qubit phase-flip codes, then [[5,1,3]] levels.
fn table2(cfg: &RunConfig) -> Result<(), CliError> {
    let families = standard_families();
    let columns: Vec<Vec<Cell>> = families
        .par_iter()
        .enumerate()
        .map(|(col, fam)| -> Result<Vec<Cell>, Error> {
            let exact: Vec<Option<String>> = (0..=7).map(ladder_stack).collect();
            let mut cells = exact_ladder(&exact, fam, cfg)?;
            for level in 8..=10 {
                let prev = cells.last().and_then(Cell::p);
                let cell = match (cfg.samples, prev) {
                    (Some(n), Some(center)) => {
                        let stack: CodeStack = ladder_stack(level).unwrap().parse()?;
                        mc_cell(&stack, fam, center, n, cfg.seed + 1000 * level as u64 + col as u64)?
                    }
                    _ => Cell::Skipped,
                };
                cells.push(cell);
            }
            let base: CodeStack = "rep5bit+rep2phasex6".parse()?;
            cells.push(extrapolated_cell(&base, fam, cfg, cfg.seed + 100_000 + col as u64)?);
            Ok(cells)
        })
        .collect::<Result<_, _>>()?;
    let mut out = open(cfg, &family_header(&["level"], &families, &["", "uncertainty", "provenance"]))?;
    for level in 0..=11 {
        let mut row = vec![if level == 11 { "inf".to_string() } else { level.to_string() }];
        for c in &columns {
            row.extend(c[level].param_fields(&out));
        }
        out.row(row)?;
    }
    out.finish()
}

/// Bit-flip codes of length 1..9 and the infinite-length limit.
fn table3(cfg: &RunConfig) -> Result<(), CliError> {
    let families = standard_families();
    let columns: Vec<Vec<Cell>> = families
        .par_iter()
        .map(|fam| -> Result<Vec<Cell>, Error> {
            let center = hashing_threshold(fam)?.p;
            let mut cells =
                (1..=9).map(|n| exact_cell(Some(&format!("rep{n}bit")), fam, cfg, Some(center))).collect::<Result<Vec<_>, _>>()?;
            cells.push(Cell::from_result(infinite_bitflip_threshold(fam))?);
            Ok(cells)
        })
        .collect::<Result<_, _>>()?;
    let mut out = open(cfg, &family_header(&["n1"], &families, &["", "provenance"]))?;
    for i in 0..10 {
        let mut row = vec![if i == 9 { "inf".to_string() } else { (i + 1).to_string() }];
        for c in &columns {
            let [v, _, p] = c[i].param_fields(&out);
            row.extend([v, p]);
        }
        out.row(row)?;
    }
    out.finish()
}

struct SweepCell {
    n2: Option<usize>,
    cell: Cell,
    searched: usize,
}

/// Best n1-in-n2 code over the n2 range that fits the budget. An optimum on
/// the budget edge is not confirmed and is reported as skipped.
fn best_n2(n1: usize, family: &NoiseFamily, cfg: &RunConfig) -> Result<SweepCell, Error> {
    let cap = n2_budget_cap(n1, cfg);
    if cap == 0 {
        return Ok(SweepCell { n2: None, cell: Cell::Skipped, searched: 0 });
    }
    let s = sweep_optimal_n2(n1, family, cfg.n2_min..=cap, cfg.tol, cfg.budget)?;
    if s.best_n2 == cap && cap < cfg.n2_max {
        return Ok(SweepCell { n2: None, cell: Cell::Skipped, searched: cap });
    }
    Ok(SweepCell { n2: Some(s.best_n2), cell: Cell::Exact(s.best.p), searched: cap })
}

fn optimal_n2_table(cfg: &RunConfig, family: NoiseFamily) -> Result<(), CliError> {
    let rows: Vec<SweepCell> = (1..=8usize).into_par_iter().map(|n1| best_n2(n1, &family, cfg)).collect::<Result<_, _>>()?;
    let header: Vec<String> = ["n1", "optimal_n2", "threshold", "n2_max_searched", "provenance"].map(String::from).into();
    let mut out = open(cfg, &header)?;
    for (i, r) in rows.iter().enumerate() {
        let [v, _, p] = r.cell.param_fields(&out);
        out.row([(i + 1).to_string(), r.n2.map_or(String::new(), |n| n.to_string()), v, r.searched.to_string(), p])?;
    }
    out.finish()
}

/// Depolarizing thresholds of the named codes, with fidelity `1 - 3p`.
fn table5(cfg: &RunConfig) -> Result<(), CliError> {
    let fam = NoiseFamily::Depolarizing;
    let codes = ["rep5bit", "5in5", "5in16", "5in51"];
    let mut cells = vec![("hashing".to_string(), exact_cell(None, &fam, cfg, None)?)];
    let center = cells[0].1.p();
    let exact: Vec<Cell> = codes.par_iter().map(|c| exact_cell(Some(c), &fam, cfg, center)).collect::<Result<_, _>>()?;
    cells.extend(codes.iter().map(|c| c.to_string()).zip(exact));
    let (lower, code) = fixed_depth_cell(&"5in56".parse()?, &fam, cfg, cfg.seed)?;
    cells.push((code, lower));
    let header: Vec<String> = ["code", "threshold", "uncertainty", "fidelity", "provenance"].map(String::from).into();
    let mut out = open(cfg, &header)?;
    for (name, cell) in &cells {
        let [v, u, p] = cell.param_fields(&out);
        let fidelity = cell.p().map_or(String::new(), |p| num(1.0 - 3.0 * p));
        out.row([name.clone(), v, u, fidelity, p])?;
    }
    out.finish()
}

/// Best plain bit-flip code of length at least two.
fn best_bit_flip(family: &NoiseFamily, cfg: &RunConfig) -> Result<(Cell, String), Error> {
    let center = hashing_threshold(family)?.p;
    let mut best: Option<(f64, usize)> = None;
    for n in 2..=cfg.max_single.max(2) {
        if let Some(p) = exact_cell(Some(&format!("rep{n}bit")), family, cfg, Some(center))?.p() {
            if best.is_none_or(|(b, _)| p > b) {
                best = Some((p, n));
            }
        }
    }
    Ok(match best {
        Some((p, n)) => (Cell::Exact(p), format!("rep{n}bit")),
        None => (Cell::Skipped, String::new()),
    })
}

/// Best n1-in-n2 code with inner length 3 or 5.
fn best_bit_phase(family: &NoiseFamily, cfg: &RunConfig) -> Result<(Cell, Option<CodeStack>), Error> {
    let mut best: Option<(f64, usize, usize)> = None;
    for n1 in [3usize, 5].into_iter().filter(|&n| n <= cfg.max_inner) {
        let s = best_n2(n1, family, cfg)?;
        if let (Some(n2), Some(p)) = (s.n2, s.cell.p()) {
            if best.is_none_or(|(b, _, _)| p > b) {
                best = Some((p, n1, n2));
            }
        }
    }
    Ok(match best {
        Some((p, n1, n2)) => (Cell::Exact(p), Some(CodeStack::n1_in_n2(n1, n2)?)),
        None => (Cell::Skipped, None),
    })
}

fn table78(cfg: &RunConfig, entropies: bool) -> Result<(), CliError> {
    let families = standard_families();
    let rows = ["hashing", "bit_flip", "bit_phase", "lower", "upper"];
    let columns: Vec<Vec<(Cell, String)>> = families
        .par_iter()
        .enumerate()
        .map(|(col, fam)| -> Result<Vec<(Cell, String)>, Error> {
            let hashing = exact_cell(None, fam, cfg, None)?;
            let bit = best_bit_flip(fam, cfg)?;
            let (bp, bp_code) = best_bit_phase(fam, cfg)?;
            let lower = match &bp_code {
                Some(code) => fixed_depth_cell(code, fam, cfg, cfg.seed + col as u64)?,
                None => (Cell::Skipped, String::new()),
            };
            let upper = Cell::from_result(upper_bound_threshold(fam))?;
            Ok(vec![
                (hashing, String::new()),
                bit,
                (bp, bp_code.map_or(String::new(), |c| c.to_string())),
                lower,
                (upper, String::new()),
            ])
        })
        .collect::<Result<_, _>>()?;
    let suffixes: &[&str] = if entropies { &["", "uncertainty", "provenance"] } else { &["", "uncertainty", "code", "provenance"] };
    let mut out = open(cfg, &family_header(&["row"], &families, suffixes))?;
    for (i, name) in rows.iter().enumerate() {
        let mut row = vec![name.to_string()];
        for (fam, col) in families.iter().zip(&columns) {
            let (cell, code) = &col[i];
            if entropies {
                row.extend(cell.entropy_fields(fam)?);
            } else {
                let [v, u, p] = cell.param_fields(&out);
                row.extend([v, u, code.clone(), p]);
            }
        }
        out.row(row)?;
    }
    out.finish()
}
