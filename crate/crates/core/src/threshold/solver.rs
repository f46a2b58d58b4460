use crate::channel::NoiseFamily;
use crate::error::{Error, Result};

use super::{Method, ThresholdResult, DEFAULT_TARGET, DEFAULT_TOL};

/// Interval with `f(lo) - target` and `f(hi) - target` of opposite sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub target: f64,
    /// Absolute tolerance on the parameter.
    pub tol: f64,
    /// Search interval; when absent the family's scan interval is searched.
    pub bracket: Option<(f64, f64)>,
    pub scan_points: usize,
    pub max_evaluations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { target: DEFAULT_TARGET, tol: DEFAULT_TOL, bracket: None, scan_points: 32, max_evaluations: 200 }
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Evaluate `f - target` on `points` equally spaced parameters spanning
/// `[lo, hi]` and return the bracket around the unique sign change.
pub fn scan_for_bracket<F>(f: &mut F, lo: f64, hi: f64, points: usize, target: f64) -> Result<(Bracket, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) || points < 2 {
        return Err(Error::Domain(format!("bad scan interval [{lo}, {hi}] with {points} points")));
    }
    let mut xs = Vec::with_capacity(points);
    let mut fs = Vec::with_capacity(points);
    for i in 0..points {
        let x = if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
        xs.push(x);
        fs.push(f(x)? - target);
    }
    let mut found = None;
    let mut crossings = 0;
    // Exact zeros are skipped when counting sign changes.
    let nonzero: Vec<usize> = (0..points).filter(|&i| fs[i] != 0.0).collect();
    for w in nonzero.windows(2) {
        if sign(fs[w[0]]) != sign(fs[w[1]]) {
            crossings += 1;
            found = Some((w[0], w[1]));
        }
    }
    match (crossings, found) {
        (0, _) => {
            if let Some(i) = fs.iter().position(|&v| v == 0.0) {
                let b = Bracket { lo: xs[i], hi: xs[i], f_lo: 0.0, f_hi: 0.0 };
                return Ok((b, points));
            }
            Err(Error::NoBracket(format!("entropy - target keeps one sign on [{lo}, {hi}]")))
        }
        (1, Some((a, b))) => Ok((Bracket { lo: xs[a], hi: xs[b], f_lo: fs[a], f_hi: fs[b] }, points)),
        _ => Err(Error::NonMonotone(format!("{crossings} crossings of the target on [{lo}, {hi}]"))),
    }
}

/// Grow an interval around `center` until `f - target` changes sign across
/// it, staying inside `[min, max]`.
pub fn find_bracket_near<F>(
    f: &mut F,
    center: f64,
    half_width: f64,
    (min, max): (f64, f64),
    target: f64,
) -> Result<(Bracket, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut w = half_width.max(1e-12);
    let mut lo = (center - w).max(min);
    let mut hi = (center + w).min(max);
    let mut f_lo = f(lo)? - target;
    let mut f_hi = f(hi)? - target;
    let mut evals = 2;
    if sign(f_lo) * sign(f_hi) <= 0 {
        return Ok((Bracket { lo, hi, f_lo, f_hi }, evals));
    }
    while lo > min || hi < max {
        w *= 4.0;
        // Extend the end closer to the target first.
        let hi_first = f_hi.abs() < f_lo.abs();
        for extend_hi in [hi_first, !hi_first] {
            if extend_hi && hi < max {
                let x = (center + w).min(max);
                let fx = f(x)? - target;
                evals += 1;
                if sign(fx) * sign(f_hi) <= 0 {
                    return Ok((Bracket { lo: hi, hi: x, f_lo: f_hi, f_hi: fx }, evals));
                }
                hi = x;
                f_hi = fx;
            } else if !extend_hi && lo > min {
                let x = (center - w).max(min);
                let fx = f(x)? - target;
                evals += 1;
                if sign(fx) * sign(f_lo) <= 0 {
                    return Ok((Bracket { lo: x, hi: lo, f_lo: fx, f_hi: f_lo }, evals));
                }
                lo = x;
                f_lo = fx;
            }
        }
    }
    Err(Error::NoBracket(format!("no sign change on [{min}, {max}] around {center}")))
}

/// Illinois-modified regula falsi with a bisection fallback whenever the
/// bracket fails to halve over two steps. Returns the final bracket end with
/// the smaller residual, its residual, and the number of evaluations.
pub fn solve_root<F>(f: &mut F, bracket: Bracket, target: f64, tol: f64, max_evaluations: usize) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Bracket { mut lo, mut hi, mut f_lo, mut f_hi } = bracket;
    if f_lo == 0.0 {
        return Ok((lo, 0.0, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0.0, 0));
    }
    if sign(f_lo) == sign(f_hi) {
        return Err(Error::NoBracket(format!("no sign change on [{lo}, {hi}]")));
    }
    let rising = f_hi > 0.0;
    // Secant weights, halved Illinois-style when an end is retained twice.
    let (mut w_lo, mut w_hi) = (f_lo, f_hi);
    let mut last_kept: i8 = 0;
    let mut widths = [hi - lo; 3];
    let mut evals = 0;
    while hi - lo > tol {
        if evals >= max_evaluations {
            return Err(Error::NonConvergence(format!("bracket [{lo}, {hi}] after {evals} evaluations")));
        }
        let mut x = (lo * w_hi - hi * w_lo) / (w_hi - w_lo);
        if widths[2] > 0.5 * widths[0] || !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        if !(x > lo && x < hi) {
            break;
        }
        let fx = f(x)? - target;
        evals += 1;
        if fx == 0.0 {
            return Ok((x, 0.0, evals));
        }
        if (fx > 0.0) == rising {
            hi = x;
            f_hi = fx;
            w_hi = fx;
            if last_kept == -1 {
                w_lo *= 0.5;
            }
            last_kept = -1;
        } else {
            lo = x;
            f_lo = fx;
            w_lo = fx;
            if last_kept == 1 {
                w_hi *= 0.5;
            }
            last_kept = 1;
        }
        // Guard: the bracket ends must keep their signs.
        if (f_lo > 0.0) == rising || (f_hi > 0.0) != rising {
            return Err(Error::NonMonotone(format!("bracket ends lost their signs at [{lo}, {hi}]")));
        }
        widths = [widths[1], widths[2], hi - lo];
    }
    Ok(if f_lo.abs() <= f_hi.abs() { (lo, f_lo, evals) } else { (hi, f_hi, evals) })
}

/// Locate `entropy_fn(p) = target` along `family`. Without an explicit
/// bracket the family's scan interval is searched on a uniform grid, and more
/// than one crossing is reported as [`Error::NonMonotone`].
pub fn solve_threshold_exact<F>(mut entropy_fn: F, family: &NoiseFamily, opts: &SolveOptions) -> Result<ThresholdResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let (bracket, scan_evals) = match opts.bracket {
        Some((lo, hi)) => {
            if !(hi > lo) {
                return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
            }
            let f_lo = entropy_fn(lo)? - opts.target;
            let f_hi = entropy_fn(hi)? - opts.target;
            if sign(f_lo) * sign(f_hi) > 0 {
                return Err(Error::NoBracket(format!(
                    "entropy - target has one sign at both ends of [{lo}, {hi}] ({f_lo:e}, {f_hi:e})"
                )));
            }
            (Bracket { lo, hi, f_lo, f_hi }, 2)
        }
        None => {
            let (lo, hi) = family.scan_interval();
            scan_for_bracket(&mut entropy_fn, lo, hi, opts.scan_points, opts.target)?
        }
    };
    let (p, residual, evals) = solve_root(&mut entropy_fn, bracket, opts.target, opts.tol, opts.max_evaluations)?;
    Ok(ThresholdResult {
        p,
        family: *family,
        method: Method::Exact,
        uncertainty: 0.0,
        entropy_target: opts.target,
        evaluations: scan_evals + evals,
        entropy_at_p: residual + opts.target,
    })
}

/// As [`solve_threshold_exact`], starting from a bracket of half-width
/// `half_width` around `center` that is widened until it holds a crossing.
pub fn solve_threshold_near<F>(
    mut entropy_fn: F,
    family: &NoiseFamily,
    center: f64,
    half_width: f64,
    opts: &SolveOptions,
) -> Result<ThresholdResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (bracket, scan) = find_bracket_near(&mut entropy_fn, center, half_width, family.scan_interval(), opts.target)?;
    let (p, residual, evals) = solve_root(&mut entropy_fn, bracket, opts.target, opts.tol, opts.max_evaluations)?;
    Ok(ThresholdResult {
        p,
        family: *family,
        method: Method::Exact,
        uncertainty: 0.0,
        entropy_target: opts.target,
        evaluations: scan + evals,
        entropy_at_p: residual + opts.target,
    })
}
