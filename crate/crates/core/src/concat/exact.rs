//! Exact syndrome-outcome distributions of code stacks.
//!
//! Every level maps a distribution over input channels (each block of the
//! level receives an independent draw from it) to the distribution of the
//! level's syndrome-conditioned logical channels. Channels that agree up to a
//! logical relabelling are merged, which leaves all downstream entropies
//! unchanged.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::channel::{dualize, h, PauliChannel};
use crate::compositions::{CompositionSpace, DEFAULT_PRUNE_EPS};
use crate::error::{Error, Result};
use crate::numeric::{composition_count, mul_ln, KahanSum, SignedLn};
use crate::repetition::{logical_outcomes_iid, Orientation, RepCodeSpec};
use crate::stabilizer::{StabilizerCode, Symplectic};

use super::stack::{CodeStack, LevelSpec};

/// Default cap on enumeration steps for a single exact evaluation.
pub const DEFAULT_BUDGET: f64 = 1e9;

/// Merged outcome lists larger than this are not materialised.
const MAX_OUTCOMES: usize = 1 << 20;

/// A channel together with its probability of occurring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedChannel {
    pub weight: f64,
    pub channel: PauliChannel,
}

/// One of the `2d` per-block cases feeding a repetition level: input type
/// `source`, flagged (in `T`) or not, with the bit-frame factors it
/// contributes to `a_T`, `a_T'`, `b_T` and `b_T'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCase {
    pub source: usize,
    pub flagged: bool,
    pub a: f64,
    pub a_bar: f64,
    pub b: f64,
    pub b_bar: f64,
}

/// A composition of the block count over the block cases.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionCase {
    pub counts: Vec<u32>,
    pub ln_multiplicity: f64,
}

/// Per-block cases of a repetition level fed by the mixture `inputs`.
pub fn mixture_block_cases(inputs: &[WeightedChannel], orientation: Orientation) -> Vec<BlockCase> {
    let mut out = Vec::with_capacity(2 * inputs.len());
    for (j, wc) in inputs.iter().enumerate() {
        let c = orientation.to_bit_frame(&wc.channel);
        let w = wc.weight;
        let q = c.q_x();
        let nq = c.p_i() + c.p_z();
        let bx = c.p_x() - c.p_y();
        let bi = c.p_i() - c.p_z();
        out.push(BlockCase { source: j, flagged: true, a: w * q, a_bar: w * nq, b: w * bx, b_bar: w * bi });
        out.push(BlockCase { source: j, flagged: false, a: w * nq, a_bar: w * q, b: w * bi, b_bar: w * bx });
    }
    out
}

/// Number of enumeration steps for the exact `n1`-in-`n2` code.
pub fn n1_in_n2_step_count(n1: usize, n2: usize) -> f64 {
    let v = 2 * (n1 / 2 + 1);
    composition_count(n2, v)
}

fn check_budget(required: f64, budget: f64) -> Result<()> {
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    Ok(())
}

fn normalise(inputs: &[WeightedChannel]) -> Vec<WeightedChannel> {
    let total: f64 = inputs.iter().map(|w| w.weight).sum();
    inputs
        .iter()
        .filter(|w| w.weight > 0.0)
        .map(|w| WeightedChannel { weight: w.weight / total, channel: w.channel })
        .collect()
}

/// Merge channels equal up to logical relabelling. The result is ordered by
/// canonical form, so it does not depend on the input order beyond ties.
pub fn merge_outcomes(items: impl IntoIterator<Item = WeightedChannel>) -> Vec<WeightedChannel> {
    const SCALE: f64 = (1u64 << 46) as f64;
    let mut map: BTreeMap<[i64; 4], (KahanSum, PauliChannel)> = BTreeMap::new();
    for wc in items {
        if !(wc.weight > 0.0) {
            continue;
        }
        let canon = wc.channel.canonical();
        let key = canon.as_array().map(|v| (v * SCALE).round() as i64);
        let entry = map.entry(key).or_insert_with(|| (KahanSum::new(), canon));
        entry.0.add(wc.weight);
    }
    map.into_values().map(|(w, c)| WeightedChannel { weight: w.value(), channel: c }).collect()
}

struct RepComposition {
    counts_ln: Vec<[f64; 2]>,
    signs: Vec<[SignedLn; 2]>,
}

impl RepComposition {
    fn new(cases: &[BlockCase]) -> Self {
        RepComposition {
            counts_ln: cases.iter().map(|c| [c.a.ln(), c.a_bar.ln()]).collect(),
            signs: cases.iter().map(|c| [SignedLn::from_f64(c.b), SignedLn::from_f64(c.b_bar)]).collect(),
        }
    }

    /// Scaled joint values `(l_I, l_X, l_Y, l_Z)` in the bit frame together
    /// with the log of the common scale.
    #[inline]
    fn joint(&self, counts: &[u32], ln_mult: f64) -> ([f64; 4], f64) {
        let mut la = 0.0;
        let mut la_bar = 0.0;
        let mut b = SignedLn::ONE;
        let mut b_bar = SignedLn::ONE;
        for (j, &m) in counts.iter().enumerate() {
            if m == 0 {
                continue;
            }
            la += mul_ln(m, self.counts_ln[j][0]);
            la_bar += mul_ln(m, self.counts_ln[j][1]);
            b = b.mul(self.signs[j][0].powi(m));
            b_bar = b_bar.mul(self.signs[j][1].powi(m));
        }
        let top = la.max(la_bar);
        if top == f64::NEG_INFINITY {
            return ([0.0; 4], f64::NEG_INFINITY);
        }
        let a = (la - top).exp();
        let a_bar = (la_bar - top).exp();
        let b = b.to_f64_scaled(-top);
        let b_bar = b_bar.to_f64_scaled(-top);
        let l = [(a + b) / 2.0, (a_bar + b_bar) / 2.0, (a_bar - b_bar) / 2.0, (a - b) / 2.0];
        (l.map(|v| v.max(0.0)), top + ln_mult)
    }
}

fn rep_space(n: usize, cases: &[BlockCase]) -> CompositionSpace {
    let a: Vec<f64> = cases.iter().map(|c| c.a).collect();
    let a_bar: Vec<f64> = cases.iter().map(|c| c.a_bar).collect();
    CompositionSpace::new(n as u32, cases.len()).with_pruning(&[a, a_bar], DEFAULT_PRUNE_EPS)
}

/// `sum h(l_sigma) - h(sum l)` for a scaled joint vector, rescaled by `exp(ln_scale)`.
#[inline]
fn scaled_entropy_term(l: [f64; 4], ln_scale: f64) -> f64 {
    let total: f64 = l.iter().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    let cond = l.map(|v| v / total);
    let hsum: f64 = cond.iter().map(|&v| h(v)).sum();
    (ln_scale.exp() * total) * hsum
}

fn rep_mixture_entropy(n: usize, orientation: Orientation, inputs: &[WeightedChannel], budget: f64) -> Result<f64> {
    if inputs.len() == 1 {
        let spec = RepCodeSpec::new(n, orientation)?;
        return Ok(crate::repetition::average_entropy_rep(spec, &inputs[0].channel));
    }
    let cases = mixture_block_cases(inputs, orientation);
    check_budget(composition_count(n, cases.len()), budget)?;
    let rc = RepComposition::new(&cases);
    let space = rep_space(n, &cases);
    // each syndrome {T, complement} is reached once from each side
    Ok(0.5
        * space.par_sum(|counts, ln_mult| {
            let (l, ln_scale) = rc.joint(counts, ln_mult);
            scaled_entropy_term(l, ln_scale)
        }))
}

fn rep_mixture_outcomes(
    n: usize,
    orientation: Orientation,
    inputs: &[WeightedChannel],
    budget: f64,
) -> Result<Vec<WeightedChannel>> {
    if inputs.len() == 1 {
        let spec = RepCodeSpec::new(n, orientation)?;
        let classes = logical_outcomes_iid(spec, &inputs[0].channel);
        let mut out = Vec::with_capacity(classes.len());
        for o in classes {
            if o.class_prob > 0.0 {
                out.push(WeightedChannel { weight: o.class_prob, channel: o.conditional()? });
            }
        }
        return Ok(merge_outcomes(out));
    }
    let cases = mixture_block_cases(inputs, orientation);
    let count = composition_count(n, cases.len());
    check_budget(count, budget)?;
    if count > MAX_OUTCOMES as f64 * 16.0 {
        return Err(Error::Budget { required: count, budget: MAX_OUTCOMES as f64 * 16.0 });
    }
    let rc = RepComposition::new(&cases);
    let space = rep_space(n, &cases);
    let mut out = Vec::new();
    space.for_each(|counts, ln_mult| {
        let (l, ln_scale) = rc.joint(counts, ln_mult);
        let total: f64 = l.iter().sum();
        if total > 0.0 {
            let weight = 0.5 * ln_scale.exp() * total;
            let mut channel = PauliChannel::from_weights(l).expect("non-negative weights");
            if orientation == Orientation::PhaseFlip {
                channel = dualize(&channel);
            }
            out.push(WeightedChannel { weight, channel });
        }
    });
    let merged = merge_outcomes(out);
    if merged.len() > MAX_OUTCOMES {
        return Err(Error::Budget { required: merged.len() as f64, budget: MAX_OUTCOMES as f64 });
    }
    Ok(merged)
}

/// Syndrome and logical class of every error of a small code, by base-4 index.
fn decode_table(code: &StabilizerCode) -> Vec<(u32, u8)> {
    let n = code.n();
    (0..1u64 << (2 * n))
        .map(|e| {
            let (s, l) = code.decode(Symplectic::from_index(e, n));
            (s, l.index() as u8)
        })
        .collect()
}

/// Joint `(syndrome, logical)` probabilities for one tuple of block channels.
fn stabilizer_joint(channels: &[PauliChannel], table: &[(u32, u8)], probs: &mut Vec<f64>, joint: &mut [[f64; 4]]) {
    probs.clear();
    probs.push(1.0);
    for c in channels {
        let len = probs.len();
        let p = c.as_array();
        probs.resize(4 * len, 0.0);
        for d in (0..4).rev() {
            for e in 0..len {
                probs[d * len + e] = probs[e] * p[d];
            }
        }
    }
    for row in joint.iter_mut() {
        *row = [0.0; 4];
    }
    for (e, &(s, l)) in table.iter().enumerate() {
        joint[s as usize][l as usize] += probs[e];
    }
}

fn stabilizer_tuple_count(inputs: usize, code: &StabilizerCode) -> f64 {
    (inputs as f64).powi(code.n() as i32) * 4f64.powi(code.n() as i32)
}

/// Visit every tuple of input types with its probability, in parallel over
/// the type of the first block, and fold per-tuple results in order.
fn for_each_tuple<T: Send, F>(code: &StabilizerCode, inputs: &[WeightedChannel], f: F) -> Vec<T>
where
    F: Fn(f64, &[PauliChannel], &[(u32, u8)], &mut Vec<f64>, &mut Vec<[f64; 4]>) -> T + Sync,
{
    let n = code.n();
    let d = inputs.len();
    let table = decode_table(code);
    (0..d)
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut probs = Vec::with_capacity(1 << (2 * n));
            let mut joint = vec![[0.0; 4]; code.num_syndromes()];
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut results = Vec::new();
            let rest = d.pow((n - 1) as u32);
            let mut chans = vec![inputs[first].channel; n];
            for r in 0..rest {
                let mut k = r;
                let mut w = inputs[first].weight;
                for i in (1..n).rev() {
                    idx[i] = k % d;
                    k /= d;
                }
                for i in 1..n {
                    chans[i] = inputs[idx[i]].channel;
                    w *= inputs[idx[i]].weight;
                }
                results.push(f(w, &chans, &table, &mut probs, &mut joint));
            }
            results
        })
        .collect()
}

fn stabilizer_mixture_entropy(code: &StabilizerCode, inputs: &[WeightedChannel], budget: f64) -> Result<f64> {
    check_budget(stabilizer_tuple_count(inputs.len(), code), budget)?;
    let parts = for_each_tuple(code, inputs, |w, chans, table, probs, joint| {
        stabilizer_joint(chans, table, probs, joint);
        let mut s = KahanSum::new();
        for l in joint.iter() {
            s.add(scaled_entropy_term(*l, 0.0));
        }
        w * s.value()
    });
    Ok(parts.into_iter().collect::<KahanSum>().value())
}

fn stabilizer_mixture_outcomes(
    code: &StabilizerCode,
    inputs: &[WeightedChannel],
    budget: f64,
) -> Result<Vec<WeightedChannel>> {
    check_budget(stabilizer_tuple_count(inputs.len(), code), budget)?;
    let parts = for_each_tuple(code, inputs, |w, chans, table, probs, joint| {
        stabilizer_joint(chans, table, probs, joint);
        let mut local = Vec::with_capacity(joint.len());
        for l in joint.iter() {
            let total: f64 = l.iter().sum();
            if total > 0.0 {
                local.push(WeightedChannel {
                    weight: w * total,
                    channel: PauliChannel::from_weights(*l).expect("non-negative weights"),
                });
            }
        }
        merge_outcomes(local)
    });
    let merged = merge_outcomes(parts.into_iter().flatten());
    if merged.len() > MAX_OUTCOMES {
        return Err(Error::Budget { required: merged.len() as f64, budget: MAX_OUTCOMES as f64 });
    }
    Ok(merged)
}

/// Outcome distribution of one level whose blocks draw i.i.d. from `inputs`.
pub fn level_outcomes(level: &LevelSpec, inputs: &[WeightedChannel], budget: f64) -> Result<Vec<WeightedChannel>> {
    let inputs = normalise(inputs);
    match level {
        LevelSpec::Repetition(r) => rep_mixture_outcomes(r.n, r.orientation, &inputs, budget),
        other => {
            let code = other.stabilizer_code().expect("stabilizer level");
            stabilizer_mixture_outcomes(&code, &inputs, budget)
        }
    }
}

/// Average logical entropy of one level whose blocks draw i.i.d. from `inputs`.
pub fn level_entropy(level: &LevelSpec, inputs: &[WeightedChannel], budget: f64) -> Result<f64> {
    let inputs = normalise(inputs);
    match level {
        LevelSpec::Repetition(r) => rep_mixture_entropy(r.n, r.orientation, &inputs, budget),
        other => {
            let code = other.stabilizer_code().expect("stabilizer level");
            stabilizer_mixture_entropy(&code, &inputs, budget)
        }
    }
}

/// Merged outcome distribution at the top of `stack` (after fusing adjacent
/// repetition levels of equal orientation).
pub fn exact_stack_outcomes(stack: &CodeStack, c: &PauliChannel, budget: f64) -> Result<Vec<WeightedChannel>> {
    let fused = stack.fused();
    let mut dist = vec![WeightedChannel { weight: 1.0, channel: *c }];
    for level in fused.levels() {
        dist = level_outcomes(level, &dist, budget)?;
    }
    Ok(dist)
}

/// Exact syndrome-averaged logical entropy of `stack` under i.i.d. noise `c`.
pub fn exact_stack_entropy(stack: &CodeStack, c: &PauliChannel, budget: f64) -> Result<f64> {
    exact_stack_entropy_opts(stack, c, budget, true)
}

/// As [`exact_stack_entropy`]; with `fuse = false` every level is enumerated
/// as written.
pub fn exact_stack_entropy_opts(stack: &CodeStack, c: &PauliChannel, budget: f64, fuse: bool) -> Result<f64> {
    let stack = if fuse { stack.fused() } else { stack.clone() };
    let levels = stack.levels();
    let mut dist = vec![WeightedChannel { weight: 1.0, channel: *c }];
    for level in &levels[..levels.len() - 1] {
        dist = level_outcomes(level, &dist, budget)?;
    }
    level_entropy(&levels[levels.len() - 1], &dist, budget)
}

/// Exact entropy of the `n1`-qubit bit-flip code inside the `n2`-block
/// phase-flip code, by multinomial enumeration over the `v = 2(floor(n1/2)+1)`
/// block cases.
pub fn exact_n1_in_n2_entropy(n1: usize, n2: usize, c: &PauliChannel, budget: f64) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("n1 and n2 must be at least 1".into()));
    }
    check_budget(n1_in_n2_step_count(n1, n2), budget)?;
    exact_stack_entropy(&CodeStack::n1_in_n2(n1, n2)?, c, budget)
}

/// Entropy of a single outcome list.
#[cfg(test)]
pub(crate) fn outcome_entropy(dist: &[WeightedChannel]) -> f64 {
    dist.iter().map(|w| w.weight * crate::channel::shannon_entropy(&w.channel)).collect::<KahanSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{shannon_entropy, NoiseFamily};
    use crate::repetition::average_entropy_rep;
    use crate::stabilizer::{average_entropy_stab, build_five_qubit_code};

    #[test]
    fn n2_one_reduces_to_bit_flip_code() {
        let c = PauliChannel::new(0.82, 0.07, 0.05, 0.06).unwrap();
        for n1 in 1..=7 {
            let e = exact_n1_in_n2_entropy(n1, 1, &c, DEFAULT_BUDGET).unwrap();
            let r = average_entropy_rep(RepCodeSpec::bit(n1).unwrap(), &c);
            assert!((e - r).abs() < 1e-13, "n1={n1}");
        }
    }

    #[test]
    fn outcome_lists_are_normalised() {
        let c = PauliChannel::new(0.82, 0.07, 0.05, 0.06).unwrap();
        for stack in ["5in7", "rep3bit+five513", "five513x2", "rep2bit+rep3phase"] {
            let s: CodeStack = stack.parse().unwrap();
            let d = exact_stack_outcomes(&s, &c, DEFAULT_BUDGET).unwrap();
            let total: f64 = d.iter().map(|w| w.weight).sum();
            assert!((total - 1.0).abs() < 1e-12, "{stack}: {total}");
        }
    }

    #[test]
    fn mixture_level_matches_direct_stabilizer_enumeration() {
        let c = NoiseFamily::Depolarizing.at(0.05).unwrap();
        let code = build_five_qubit_code();
        let direct = average_entropy_stab(&code, &[c; 5]).unwrap();
        let s = CodeStack::five_qubit(1).unwrap();
        assert!((exact_stack_entropy(&s, &c, DEFAULT_BUDGET).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn merging_is_relabel_invariant() {
        let c = PauliChannel::new(0.7, 0.2, 0.06, 0.04).unwrap();
        let items = crate::pauli::Pauli::ALL.map(|p| WeightedChannel { weight: 0.25, channel: c.relabel(p) });
        let m = merge_outcomes(items);
        assert_eq!(m.len(), 1);
        assert!((m[0].weight - 1.0).abs() < 1e-15);
        assert!((outcome_entropy(&m) - shannon_entropy(&c)).abs() < 1e-15);
    }

    #[test]
    fn budget_is_enforced() {
        let c = NoiseFamily::Depolarizing.at(0.06).unwrap();
        let err = exact_n1_in_n2_entropy(7, 134, &c, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn unfused_hierarchy_equals_flat_code() {
        let c = PauliChannel::new(0.8, 0.05, 0.06, 0.09).unwrap();
        let nested: CodeStack = "rep2phase+rep2phase".parse().unwrap();
        let flat = CodeStack::repetition(4, Orientation::PhaseFlip).unwrap();
        let a = exact_stack_entropy_opts(&nested, &c, DEFAULT_BUDGET, false).unwrap();
        let b = exact_stack_entropy(&flat, &c, DEFAULT_BUDGET).unwrap();
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }
}
