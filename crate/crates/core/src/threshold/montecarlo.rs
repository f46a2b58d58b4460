use crate::channel::NoiseFamily;
use crate::concat::{mc_stack_entropy_with, CodeStack, McConfig, McEstimate};
use crate::error::{Error, Result};

use super::{Method, ThresholdResult, DEFAULT_TARGET};

/// Monte Carlo estimate at one grid parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEstimate {
    pub p: f64,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McThresholdOptions {
    pub target: f64,
    /// Points within this distance of the crude crossing enter the fit.
    pub window: f64,
    pub max_refinements: usize,
    /// Fail when the final 1-sigma uncertainty exceeds this.
    pub max_uncertainty: Option<f64>,
    /// Template for per-point sampling; point `i` uses seed `seed + i`.
    pub mc: McConfig,
}

impl McThresholdOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        McThresholdOptions {
            target: DEFAULT_TARGET,
            window: 0.003,
            max_refinements: 3,
            max_uncertainty: None,
            mc: McConfig::new(samples, seed),
        }
    }
}

/// MC threshold with default options; see [`solve_threshold_mc_with`].
pub fn solve_threshold_mc(
    stack: &CodeStack,
    family: &NoiseFamily,
    grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<(ThresholdResult, Vec<GridEstimate>)> {
    solve_threshold_mc_with(stack, family, grid, &McThresholdOptions::new(samples, seed))
}

struct LineFit {
    x0: f64,
    a: f64,
    b: f64,
    /// Covariance of `(a, b)`.
    cov: [[f64; 2]; 2],
    chi2_per_dof: f64,
    points: usize,
}

impl LineFit {
    fn crossing(&self, target: f64) -> (f64, f64) {
        let dx = (target - self.a) / self.b;
        // Delta method on x = x0 + (target - a) / b.
        let ga = -1.0 / self.b;
        let gb = -dx / self.b;
        let var = ga * ga * self.cov[0][0] + 2.0 * ga * gb * self.cov[0][1] + gb * gb * self.cov[1][1];
        (self.x0 + dx, var.max(0.0).sqrt())
    }
}

fn weighted_fit(points: &[&GridEstimate], x0: f64) -> Option<LineFit> {
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for g in points {
        let se = g.estimate.std_error.max(1e-15);
        let w = 1.0 / (se * se);
        let x = g.p - x0;
        s += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * g.estimate.mean;
        sxy += w * x * g.estimate.mean;
    }
    let det = s * sxx - sx * sx;
    if !(det > 0.0) {
        return None;
    }
    let a = (sxx * sy - sx * sxy) / det;
    let b = (s * sxy - sx * sy) / det;
    if b == 0.0 {
        return None;
    }
    let cov = [[sxx / det, -sx / det], [-sx / det, s / det]];
    let chi2: f64 = points
        .iter()
        .map(|g| {
            let se = g.estimate.std_error.max(1e-15);
            let r = (g.estimate.mean - a - b * (g.p - x0)) / se;
            r * r
        })
        .sum();
    let dof = points.len().saturating_sub(2);
    let chi2_per_dof = if dof == 0 { 0.0 } else { chi2 / dof as f64 };
    Some(LineFit { x0, a, b, cov, chi2_per_dof, points: points.len() })
}

/// Linear interpolation of the target crossing between the sign changes of
/// the grid means; with several sign changes (noise) their mean is used.
fn crude_crossing(pts: &[GridEstimate], target: f64) -> Option<f64> {
    let xs: Vec<f64> = pts
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].estimate.mean - target, w[1].estimate.mean - target);
            if a == 0.0 {
                Some(w[0].p)
            } else if a * b < 0.0 {
                Some(w[0].p + (w[1].p - w[0].p) * a / (a - b))
            } else {
                None
            }
        })
        .collect();
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

fn estimate_at(stack: &CodeStack, family: &NoiseFamily, p: f64, index: u64, opts: &McThresholdOptions) -> Result<GridEstimate> {
    let cfg = McConfig { seed: opts.mc.seed.wrapping_add(index), ..opts.mc };
    let estimate = mc_stack_entropy_with(stack, &family.at(p)?, &cfg)?;
    Ok(GridEstimate { p, estimate })
}

/// Estimate the entropy on `grid`, fit a weighted line to the points within
/// `window` of the crossing and return its root with the propagated 1-sigma
/// uncertainty. When the fit residuals exceed twice the point errors, or too
/// few points fall in the window, the grid spacing there is halved.
pub fn solve_threshold_mc_with(
    stack: &CodeStack,
    family: &NoiseFamily,
    grid: &[f64],
    opts: &McThresholdOptions,
) -> Result<(ThresholdResult, Vec<GridEstimate>)> {
    if grid.len() < 2 {
        return Err(Error::Domain("a Monte Carlo threshold needs at least two grid points".into()));
    }
    let mut next_index = 0u64;
    let mut pts = Vec::with_capacity(grid.len());
    for &p in grid {
        pts.push(estimate_at(stack, family, p, next_index, opts)?);
        next_index += 1;
    }
    pts.sort_by(|a, b| a.p.total_cmp(&b.p));
    let mut refinements = 0;
    loop {
        let Some(x0) = crude_crossing(&pts, opts.target) else {
            return Err(Error::NoBracket(format!(
                "entropy does not cross {} on the grid [{}, {}]",
                opts.target,
                pts[0].p,
                pts[pts.len() - 1].p
            )));
        };
        let mut near: Vec<&GridEstimate> = pts.iter().filter(|g| (g.p - x0).abs() <= opts.window).collect();
        if near.len() < 3 {
            let mut by_dist: Vec<&GridEstimate> = pts.iter().collect();
            by_dist.sort_by(|a, b| (a.p - x0).abs().total_cmp(&(b.p - x0).abs()));
            near = by_dist.into_iter().take(3).collect();
            near.sort_by(|a, b| a.p.total_cmp(&b.p));
        }
        let fit = weighted_fit(&near, x0)
            .ok_or_else(|| Error::NonConvergence("degenerate regression near the crossing".into()))?;
        let rough = fit.chi2_per_dof > 4.0 || fit.points < 3;
        if rough && refinements < opts.max_refinements {
            refinements += 1;
            let mids: Vec<f64> = near.windows(2).map(|w| 0.5 * (w[0].p + w[1].p)).collect();
            for p in mids {
                pts.push(estimate_at(stack, family, p, next_index, opts)?);
                next_index += 1;
            }
            pts.sort_by(|a, b| a.p.total_cmp(&b.p));
            continue;
        }
        let (p, sigma) = fit.crossing(opts.target);
        if p < pts[0].p || p > pts[pts.len() - 1].p {
            return Err(Error::NoBracket(format!("fitted crossing {p} lies outside the grid")));
        }
        if let Some(bound) = opts.max_uncertainty {
            if sigma > bound {
                return Err(Error::NonConvergence(format!("threshold uncertainty {sigma:e} exceeds {bound:e}")));
            }
        }
        let result = ThresholdResult {
            p,
            family: *family,
            method: Method::MonteCarlo,
            uncertainty: sigma,
            entropy_target: opts.target,
            evaluations: pts.len(),
            entropy_at_p: fit.a + fit.b * (p - fit.x0),
        };
        return Ok((result, pts));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(p: f64, mean: f64, se: f64) -> GridEstimate {
        GridEstimate { p, estimate: McEstimate { mean, std_error: se, samples: 1000, seed: 0 } }
    }

    #[test]
    fn fit_recovers_line_crossing() {
        let pts: Vec<GridEstimate> = (0..5).map(|i| 0.06 + 0.001 * i as f64).map(|p| fake(p, 1.0 + 50.0 * (p - 0.062), 0.01)).collect();
        let x0 = crude_crossing(&pts, 1.0).unwrap();
        assert!((x0 - 0.062).abs() < 1e-12);
        let refs: Vec<&GridEstimate> = pts.iter().collect();
        let fit = weighted_fit(&refs, x0).unwrap();
        let (p, s) = fit.crossing(1.0);
        assert!((p - 0.062).abs() < 1e-12);
        // sigma ~ se / (slope sqrt(n))
        assert!(s > 0.01 / 50.0 / 5.0 && s < 0.01 / 50.0, "{s}");
    }

    #[test]
    fn mc_threshold_of_repetition_code() {
        let stack = CodeStack::repetition(3, crate::repetition::Orientation::BitFlip).unwrap();
        let fam = NoiseFamily::Depolarizing;
        let grid: Vec<f64> = (0..7).map(|i| 0.058 + 0.001 * i as f64).collect();
        let mut opts = McThresholdOptions::new(4000, 11);
        opts.mc.average_top_level = false;
        let (r, _) = solve_threshold_mc_with(&stack, &fam, &grid, &opts).unwrap();
        let eval = super::super::ExactEvaluator::new(Some(stack), fam);
        let exact = super::super::solve_threshold_exact(|p| eval.entropy(p), &fam, &Default::default()).unwrap();
        assert!((r.p - exact.p).abs() < 4.0 * r.uncertainty + 1e-5, "{} vs {} +- {}", r.p, exact.p, r.uncertainty);
        assert!(r.uncertainty > 0.0);
    }
}
