//! Locating the noise level at which the average logical entropy crosses a
//! target (1 by default), plus the sweeps, frontiers and level extrapolation
//! built on top of that search.

mod extrapolate;
mod frontier;
mod montecarlo;
mod solver;
mod sweep;

pub use extrapolate::{
    best_five_qubit_depth, extrapolate_level_infinity, ExtrapolationOptions, ExtrapolationResult, FixedDepthResult,
    LevelThreshold, McPlan, DEFAULT_FIVE_QUBIT_DEPTHS,
};
pub use frontier::{
    cerf_qx, hashing_qx, trace_independent_frontier, trace_two_pauli_frontier, CodeClass, FrontierOptions,
    FrontierPoint, TwoPauliPoint,
};
pub use montecarlo::{solve_threshold_mc, solve_threshold_mc_with, GridEstimate, McThresholdOptions};
pub use solver::{
    find_bracket_near, scan_for_bracket, solve_root, solve_threshold_exact, solve_threshold_near, Bracket, SolveOptions,
};
pub use sweep::{is_unimodal, sweep_optimal_n2, SweepResult};

use std::fmt;

use crate::channel::{cerf_margin, shannon_entropy, NoiseFamily, PauliChannel};
use crate::concat::{exact_stack_entropy, CodeStack, LevelSpec, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::repetition::{
    average_entropy_rep, independent_noise_entropy, infinite_bitflip_margin, infinite_margin_degenerate, Orientation,
};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_TARGET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Exact => write!(f, "exact"),
            Method::MonteCarlo => write!(f, "mc"),
        }
    }
}

/// A located crossing of the average logical entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub p: f64,
    pub family: NoiseFamily,
    pub method: Method,
    /// Half-width; zero for exact searches that met their tolerance.
    pub uncertainty: f64,
    pub entropy_target: f64,
    /// Entropy evaluations (grid points for Monte Carlo) spent.
    pub evaluations: usize,
    /// Entropy at `p` (the fitted value for Monte Carlo).
    pub entropy_at_p: f64,
}

/// Exact average logical entropy of a code stack along a noise family,
/// dispatching to the cheapest exact formula that applies.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEvaluator {
    /// `None` evaluates the physical channel itself (the hashing criterion).
    pub stack: Option<CodeStack>,
    pub family: NoiseFamily,
    pub budget: f64,
}

impl ExactEvaluator {
    pub fn new(stack: Option<CodeStack>, family: NoiseFamily) -> Self {
        ExactEvaluator { stack, family, budget: DEFAULT_BUDGET }
    }

    pub fn hashing(family: NoiseFamily) -> Self {
        Self::new(None, family)
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn entropy(&self, p: f64) -> Result<f64> {
        let c = self.family.at(p)?;
        self.entropy_of(&c)
    }

    pub fn entropy_of(&self, c: &PauliChannel) -> Result<f64> {
        let Some(stack) = &self.stack else {
            return Ok(shannon_entropy(c));
        };
        let fused = stack.fused();
        match fused.levels() {
            [LevelSpec::Repetition(r)] => return Ok(average_entropy_rep(*r, c)),
            [LevelSpec::Repetition(a), LevelSpec::Repetition(b)] if is_product_family(&self.family) => {
                // Independent noise splits into an X part and a Z part.
                return match (a.orientation, b.orientation) {
                    (Orientation::BitFlip, Orientation::PhaseFlip) => {
                        independent_noise_entropy(a.n, b.n, c.q_x(), c.q_z())
                    }
                    (Orientation::PhaseFlip, Orientation::BitFlip) => {
                        independent_noise_entropy(a.n, b.n, c.q_z(), c.q_x())
                    }
                    _ => unreachable!("fused stacks alternate orientation"),
                };
            }
            _ => {}
        }
        exact_stack_entropy(&fused, c, self.budget)
    }
}

fn is_product_family(family: &NoiseFamily) -> bool {
    matches!(family, NoiseFamily::IndependentSym | NoiseFamily::IndependentXZ { .. })
}

/// Hashing threshold of a family: where the channel entropy reaches `target`.
pub fn hashing_threshold(family: &NoiseFamily) -> Result<ThresholdResult> {
    let eval = ExactEvaluator::hashing(*family);
    solve_threshold_exact(|p| eval.entropy(p), family, &SolveOptions::default())
}

/// Threshold of the bit-flip code in the limit of infinite length, where the
/// large-`n` criterion changes sign.
pub fn infinite_bitflip_threshold(family: &NoiseFamily) -> Result<ThresholdResult> {
    let margin = |p: f64| -> Result<f64> {
        let c = family.at(p)?;
        if infinite_margin_degenerate(&c) {
            return Err(Error::Domain(format!("large-n criterion is degenerate at p = {p}")));
        }
        Ok(-infinite_bitflip_margin(&c))
    };
    let lo = family.scan_interval().0 + 1e-9;
    let opts = SolveOptions { target: 0.0, bracket: Some((lo, family.scan_interval().1 - 1e-9)), ..Default::default() };
    let mut r = solve_threshold_exact(margin, family, &opts)?;
    r.entropy_target = DEFAULT_TARGET;
    r.entropy_at_p = f64::NAN;
    Ok(r)
}

/// Largest parameter along `family` below the upper bound on non-zero
/// capacity (root of [`cerf_margin`]).
pub fn upper_bound_threshold(family: &NoiseFamily) -> Result<ThresholdResult> {
    let f = |p: f64| -> Result<f64> { Ok(-cerf_margin(&family.at(p)?)) };
    let opts = SolveOptions { target: 0.0, ..Default::default() };
    let mut r = solve_threshold_exact(f, family, &opts)?;
    r.entropy_at_p = shannon_entropy(&family.at(r.p)?);
    r.entropy_target = DEFAULT_TARGET;
    Ok(r)
}

/// Point on the ray `(1 - t) I + t d` (for error direction `d = (d_X, d_Y,
/// d_Z)`) where the channel entropy equals one.
pub fn hashing_point(direction: [f64; 3]) -> Result<PauliChannel> {
    if direction.iter().any(|&d| d.is_nan() || d < 0.0) || direction.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Domain(format!("invalid error direction {direction:?}")));
    }
    let family = NoiseFamily::CustomRay { direction: [0.0, direction[0], direction[1], direction[2]] };
    // The entropy is concave along the ray and at least one at t = 1/2.
    let eval = ExactEvaluator::hashing(family);
    let opts = SolveOptions { bracket: Some((0.0, 0.5)), ..Default::default() };
    let r = solve_threshold_exact(|p| eval.entropy(p), &family, &opts)?;
    family.at(r.p)
}

/// Channels on the hashing surface along each direction, paired with the
/// value of `eval` there.
pub fn hashing_surface_scan<F>(directions: &[[f64; 3]], eval: F) -> Result<Vec<(PauliChannel, f64)>>
where
    F: Fn(&PauliChannel) -> Result<f64>,
{
    directions
        .iter()
        .map(|d| {
            let c = hashing_point(*d)?;
            Ok((c, eval(&c)?))
        })
        .collect()
}
