use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{binary_entropy, cerf_margin, PauliChannel};
use crate::concat::{CodeStack, LevelSpec};
use crate::error::{Error, Result};
use crate::repetition::{average_entropy_rep, independent_x_deficit, independent_z_entropy, Orientation, RepCodeSpec};

use super::solver::{scan_for_bracket, solve_root, Bracket};

type Part = Box<dyn Fn(f64) -> f64>;

/// Code families compared on the independent-noise plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeClass {
    BitFlip,
    PhaseFlip,
    /// Bit-flip blocks inside a phase-flip code.
    BitInPhase,
    /// Phase-flip blocks inside a bit-flip code.
    PhaseInBit,
}

impl CodeClass {
    pub const ALL: [CodeClass; 4] = [CodeClass::BitFlip, CodeClass::PhaseFlip, CodeClass::BitInPhase, CodeClass::PhaseInBit];

    fn sizes(self, opts: &FrontierOptions) -> Vec<(usize, usize)> {
        match self {
            // A single qubit is not a code; it is the hashing curve.
            CodeClass::BitFlip | CodeClass::PhaseFlip => (2..=opts.max_single).map(|n| (n, 1)).collect(),
            CodeClass::BitInPhase | CodeClass::PhaseInBit => (1..=opts.max_inner)
                .flat_map(|a| (1..=opts.max_outer).map(move |b| (a, b)))
                .filter(|&(a, b)| a * b > 1)
                .collect(),
        }
    }

    fn stack(self, a: usize, b: usize) -> Result<CodeStack> {
        match self {
            CodeClass::BitFlip => CodeStack::repetition(a, Orientation::BitFlip),
            CodeClass::PhaseFlip => CodeStack::repetition(a, Orientation::PhaseFlip),
            CodeClass::BitInPhase => CodeStack::n1_in_n2(a, b),
            CodeClass::PhaseInBit => {
                Ok(CodeStack::repetition(a, Orientation::PhaseFlip)?.push(LevelSpec::rep(b, Orientation::BitFlip)?))
            }
        }
    }

    /// Increasing `u(q_x)` and `t(q_z)` with entropy below one exactly when
    /// `u(q_x) < t(q_z)`. Both stay accurate near the frontier, where the
    /// entropy itself rounds to one.
    fn parts(self, a: usize, b: usize) -> (Part, Part) {
        // Bit-in-phase with sizes (n1, n2); the other classes are its special
        // cases or duals.
        let (n1, n2, dual) = match self {
            CodeClass::BitFlip => (a, 1, false),
            CodeClass::PhaseFlip => (a, 1, true),
            CodeClass::BitInPhase => (a, b, false),
            CodeClass::PhaseInBit => (a, b, true),
        };
        if dual {
            (Box::new(move |q| independent_z_entropy(n1, n2, q)), Box::new(move |q| independent_x_deficit(n1, n2, q)))
        } else {
            (Box::new(move |q| -independent_x_deficit(n1, n2, q)), Box::new(move |q| -independent_z_entropy(n1, n2, q)))
        }
    }
}

impl fmt::Display for CodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CodeClass::BitFlip => "bit-flip",
            CodeClass::PhaseFlip => "phase-flip",
            CodeClass::BitInPhase => "bit-in-phase",
            CodeClass::PhaseInBit => "phase-in-bit",
        };
        f.write_str(s)
    }
}

impl FromStr for CodeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bit-flip" | "bit" => Ok(CodeClass::BitFlip),
            "phase-flip" | "phase" => Ok(CodeClass::PhaseFlip),
            "bit-in-phase" => Ok(CodeClass::BitInPhase),
            "phase-in-bit" => Ok(CodeClass::PhaseInBit),
            other => Err(Error::Parse(format!("unknown code class {other:?}"))),
        }
    }
}

/// Size limits for frontier searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierOptions {
    /// Largest length of a plain repetition code.
    pub max_single: usize,
    /// Largest inner block of a composite code.
    pub max_inner: usize,
    /// Largest outer length of a composite code.
    pub max_outer: usize,
    pub tol: f64,
}

impl Default for FrontierOptions {
    fn default() -> Self {
        FrontierOptions { max_single: 30, max_inner: 8, max_outer: 90, tol: 1e-12 }
    }
}

/// Largest correctable `q_x` at a given `q_z`, with the code achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub q_x: f64,
    pub q_z: f64,
    pub code: CodeStack,
}

/// Two-Pauli frontier point: largest `p1` for channels `(p1, p2, p1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPauliPoint {
    pub p2: f64,
    pub p1: f64,
    pub code: CodeStack,
}

/// Largest `q` in `[0, 1/2]` with `u(q) <= target` for increasing `u`.
fn increasing_root(u: &dyn Fn(f64) -> f64, target: f64, tol: f64) -> Result<Option<f64>> {
    let (f_lo, f_hi) = (u(0.0) - target, u(0.5) - target);
    if f_hi <= 0.0 {
        return Ok(Some(0.5));
    }
    if f_lo >= 0.0 {
        return Ok(None);
    }
    let mut f = |q: f64| -> Result<f64> { Ok(u(q)) };
    let bracket = Bracket { lo: 0.0, hi: 0.5, f_lo, f_hi };
    let (q, _, _) = solve_root(&mut f, bracket, target, tol, 400)?;
    Ok(Some(q))
}

fn frontier_point(class: CodeClass, q_z: f64, opts: &FrontierOptions) -> Result<Option<FrontierPoint>> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (a, b) in class.sizes(opts) {
        let (u, t) = class.parts(a, b);
        let Some(q) = increasing_root(&*u, t(q_z), opts.tol)? else {
            continue;
        };
        if best.is_none_or(|(bq, _, _)| q > bq) {
            best = Some((q, a, b));
        }
    }
    best.map(|(q_x, a, b)| Ok(FrontierPoint { q_x, q_z, code: class.stack(a, b)? })).transpose()
}

/// For each `q_z`, the largest `q_x` for which some code of `class` (within
/// the size limits) has average logical entropy below one. Entries are
/// `None` where no code of the class succeeds even at `q_x = 0`.
pub fn trace_independent_frontier(
    class: CodeClass,
    q_z_grid: &[f64],
    opts: &FrontierOptions,
) -> Result<Vec<Option<FrontierPoint>>> {
    if let Some(q) = q_z_grid.iter().find(|q| q.is_nan() || !(0.0..=0.5).contains(*q)) {
        return Err(Error::Domain(format!("q_z = {q} outside [0, 1/2]")));
    }
    q_z_grid.par_iter().map(|&q_z| frontier_point(class, q_z, opts)).collect()
}

/// Hashing curve of independent noise: `q_x` with `H(q_x) + H(q_z) = 1`.
pub fn hashing_qx(q_z: f64) -> Result<Option<f64>> {
    let rest = 1.0 - binary_entropy(q_z)?;
    increasing_root(&|q| binary_entropy(q).unwrap_or(1.0), rest, 1e-14)
}

/// Upper-bound curve of independent noise at fixed `q_z`.
pub fn cerf_qx(q_z: f64) -> Result<Option<f64>> {
    let margin = |q_x: f64| -> Result<f64> { Ok(-cerf_margin(&PauliChannel::independent(q_x, q_z)?)) };
    let mut f = margin;
    let (lo, hi) = (0.0, 0.5);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo >= 0.0 {
        return Ok(None);
    }
    if f_hi <= 0.0 {
        return Ok(Some(0.5));
    }
    let (q, _, _) = solve_root(&mut f, Bracket { lo, hi, f_lo, f_hi }, 0.0, 1e-14, 400)?;
    Ok(Some(q))
}

/// Largest `p1` along channels `(p1, p2, p1)` for which some bit-flip code of
/// length `2..=max_n` has average logical entropy below one.
pub fn trace_two_pauli_frontier(p2_grid: &[f64], max_n: usize, tol: f64) -> Result<Vec<Option<TwoPauliPoint>>> {
    p2_grid
        .par_iter()
        .map(|&p2| {
            if p2.is_nan() || !(0.0..1.0).contains(&p2) {
                return Err(Error::Domain(format!("p2 = {p2} outside [0, 1)")));
            }
            // Up to the point where the identity is no longer most likely.
            let hi = (1.0 - p2) / 3.0;
            let mut best: Option<(f64, usize)> = None;
            for n in 2..=max_n {
                let spec = RepCodeSpec::bit(n)?;
                let mut f = |p1: f64| -> Result<f64> { Ok(average_entropy_rep(spec, &PauliChannel::from_errors(p1, p2, p1)?)) };
                let (bracket, _) = match scan_for_bracket(&mut f, 0.0, hi, 32, 1.0) {
                    Ok(b) => b,
                    Err(Error::NoBracket(_)) => continue,
                    Err(e) => return Err(e),
                };
                let (p1, _, _) = solve_root(&mut f, bracket, 1.0, tol, 400)?;
                if best.is_none_or(|(b, _)| p1 > b) {
                    best = Some((p1, n));
                }
            }
            best.map(|(p1, n)| Ok(TwoPauliPoint { p2, p1, code: CodeStack::repetition(n, Orientation::BitFlip)? }))
                .transpose()
        })
        .collect()
}
