use std::ops::RangeInclusive;

use crate::channel::NoiseFamily;
use crate::concat::CodeStack;
use crate::error::{Error, Result};

use super::solver::{solve_threshold_near, SolveOptions};
use super::{hashing_threshold, ExactEvaluator, ThresholdResult};

/// Threshold of every `n1`-in-`n2` code over a range of `n2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub best_n2: usize,
    pub best: ThresholdResult,
    pub curve: Vec<(usize, ThresholdResult)>,
}

/// Exact thresholds of the `n1`-in-`n2` codes for each `n2` in `n2_range`.
/// Each search starts from a small bracket around the previous threshold
/// (the hashing threshold for the first), which keeps evaluations few.
pub fn sweep_optimal_n2(
    n1: usize,
    family: &NoiseFamily,
    n2_range: RangeInclusive<usize>,
    tol: f64,
    budget: f64,
) -> Result<SweepResult> {
    if n1 == 0 || *n2_range.start() == 0 || n2_range.is_empty() {
        return Err(Error::Domain(format!("invalid sweep n1 = {n1}, n2 in {n2_range:?}")));
    }
    let mut center = hashing_threshold(family)?.p;
    let mut step = 2e-3;
    let mut curve = Vec::with_capacity(n2_range.clone().count());
    for n2 in n2_range {
        let eval = ExactEvaluator::new(Some(CodeStack::n1_in_n2(n1, n2)?), *family).with_budget(budget);
        let opts = SolveOptions { tol, ..Default::default() };
        let r = solve_threshold_near(|p| eval.entropy(p), family, center, step, &opts)?;
        step = (2.0 * (r.p - center).abs()).max(1e-5);
        center = r.p;
        curve.push((n2, r));
    }
    // First maximum wins ties.
    let (best_n2, best) = curve
        .iter()
        .fold(None::<&(usize, ThresholdResult)>, |acc, item| match acc {
            Some(a) if a.1.p >= item.1.p => Some(a),
            _ => Some(item),
        })
        .cloned()
        .expect("non-empty sweep");
    Ok(SweepResult { best_n2, best, curve })
}

/// True when the values rise (weakly) to a single maximum and then fall.
pub fn is_unimodal(values: &[f64]) -> bool {
    let Some(peak) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i) else {
        return true;
    };
    values[..=peak].windows(2).all(|w| w[0] <= w[1]) && values[peak..].windows(2).all(|w| w[0] >= w[1])
}
