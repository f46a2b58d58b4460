use std::ops::RangeInclusive;

use crate::channel::NoiseFamily;
use crate::concat::{CodeStack, DEFAULT_BUDGET};
use crate::error::{Error, Result};

use super::montecarlo::{solve_threshold_mc_with, McThresholdOptions};
use super::solver::{solve_threshold_near, SolveOptions};
use super::{hashing_threshold, ExactEvaluator, ThresholdResult};

/// Monte Carlo fallback for levels beyond the exact budget: a uniform grid of
/// `points` parameters within `half_width` of the previous level's threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPlan {
    pub half_width: f64,
    pub points: usize,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolationOptions {
    /// Successive thresholds must differ by less than this twice in a row.
    pub tol: f64,
    pub max_levels: usize,
    pub start_level: usize,
    pub budget: f64,
    pub mc: Option<McPlan>,
}

impl Default for ExtrapolationOptions {
    fn default() -> Self {
        ExtrapolationOptions { tol: 1e-5, max_levels: 14, start_level: 1, budget: DEFAULT_BUDGET, mc: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelThreshold {
    pub level: usize,
    pub stack: CodeStack,
    pub result: ThresholdResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationResult {
    pub result: ThresholdResult,
    pub levels: Vec<LevelThreshold>,
}

fn level_threshold(
    stack: &CodeStack,
    family: &NoiseFamily,
    center: f64,
    level: usize,
    opts: &ExtrapolationOptions,
) -> Result<ThresholdResult> {
    let eval = ExactEvaluator::new(Some(stack.clone()), *family).with_budget(opts.budget);
    let exact = solve_threshold_near(|p| eval.entropy(p), family, center, 1e-3, &SolveOptions::default());
    match (exact, opts.mc) {
        (Err(Error::Budget { .. }), Some(plan)) => {
            let n = plan.points.max(2);
            let grid: Vec<f64> =
                (0..n).map(|i| center - plan.half_width + 2.0 * plan.half_width * i as f64 / (n - 1) as f64).collect();
            let seed = plan.seed.wrapping_add(1_000_003 * level as u64);
            let mc = McThresholdOptions::new(plan.samples, seed);
            Ok(solve_threshold_mc_with(stack, family, &grid, &mc)?.0)
        }
        (r, _) => r,
    }
}

/// Thresholds of `generator(level)` for increasing levels until two
/// successive differences fall below `opts.tol`. The returned uncertainty is
/// the last difference plus the last level's own uncertainty.
pub fn extrapolate_level_infinity<G>(
    mut generator: G,
    family: &NoiseFamily,
    opts: &ExtrapolationOptions,
) -> Result<ExtrapolationResult>
where
    G: FnMut(usize) -> Result<CodeStack>,
{
    let mut levels: Vec<LevelThreshold> = Vec::new();
    let mut center = hashing_threshold(family)?.p;
    let mut converged_steps = 0;
    for level in opts.start_level..opts.start_level + opts.max_levels {
        let stack = generator(level)?;
        let result = match levels.last() {
            Some(prev) if prev.stack == stack => prev.result.clone(),
            _ => level_threshold(&stack, family, center, level, opts)?,
        };
        center = result.p;
        if let Some(prev) = levels.last() {
            let diff = (result.p - prev.result.p).abs();
            converged_steps = if diff < opts.tol { converged_steps + 1 } else { 0 };
            if converged_steps >= 2 {
                let mut out = result.clone();
                out.uncertainty = diff + result.uncertainty;
                levels.push(LevelThreshold { level, stack, result });
                return Ok(ExtrapolationResult { result: out, levels });
            }
        }
        levels.push(LevelThreshold { level, stack, result });
    }
    Err(Error::NonConvergence(format!(
        "level thresholds still moving after {} levels (last {:?})",
        opts.max_levels,
        levels.last().map(|l| l.result.p)
    )))
}

/// Depths of trailing [[5,1,3]] levels scanned by [`best_five_qubit_depth`].
pub const DEFAULT_FIVE_QUBIT_DEPTHS: RangeInclusive<usize> = 6..=12;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedDepthResult {
    pub depth: usize,
    pub stack: CodeStack,
    pub result: ThresholdResult,
    pub scanned: Vec<(usize, ThresholdResult)>,
}

/// Monte Carlo thresholds of `base` followed by `j` levels of [[5,1,3]] for
/// each `j` in `depths`. The depth whose threshold has the largest lower
/// confidence bound `p - uncertainty` is returned. Each grid is centred on the
/// previous depth's threshold, starting from `center`.
pub fn best_five_qubit_depth(
    base: &CodeStack,
    family: &NoiseFamily,
    depths: RangeInclusive<usize>,
    center: f64,
    plan: &McPlan,
) -> Result<FixedDepthResult> {
    if depths.is_empty() {
        return Err(Error::Domain(format!("empty depth range {depths:?}")));
    }
    let n = plan.points.max(2);
    let mut center = center;
    let mut scanned = Vec::new();
    for j in depths {
        let stack = base.clone().then_five_qubit(j);
        let grid: Vec<f64> =
            (0..n).map(|i| center - plan.half_width + 2.0 * plan.half_width * i as f64 / (n - 1) as f64).collect();
        let mc = McThresholdOptions::new(plan.samples, plan.seed.wrapping_add(1_000_003 * j as u64));
        let r = solve_threshold_mc_with(&stack, family, &grid, &mc)?.0;
        center = r.p;
        scanned.push((j, r));
    }
    let (depth, result) = scanned
        .iter()
        .fold(None::<&(usize, ThresholdResult)>, |best, item| match best {
            Some(b) if b.1.p - b.1.uncertainty >= item.1.p - item.1.uncertainty => Some(b),
            _ => Some(item),
        })
        .cloned()
        .expect("non-empty scan");
    Ok(FixedDepthResult { depth, stack: base.clone().then_five_qubit(depth), result, scanned })
}
