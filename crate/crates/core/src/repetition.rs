//! Closed-form logical channels of repetition (bit-flip / phase-flip) codes.
//!
//! For an `n`-qubit bit-flip code with i.i.d. Pauli noise, a syndrome is
//! characterised by its distance class `k` (the smaller of the two flip
//! patterns it is consistent with). With `q = p_X + p_Y`,
//!
//! ```text
//! a_k = C(n,k) q^k (1-q)^(n-k)
//! b_k = C(n,k) (p_X - p_Y)^k (p_I - p_Z)^(n-k)
//! l_I(k) = (a_k + b_k)/2        l_X(k) = (a_{n-k} + b_{n-k})/2
//! l_Y(k) = (a_{n-k} - b_{n-k})/2 l_Z(k) = (a_k - b_k)/2
//! ```
//!
//! and for even `n` the `k = n/2` class counts each pattern twice, so all four
//! values are halved. Phase-flip codes are handled by conjugating with
//! [`dualize`].

use std::fmt;

use crate::channel::{dualize, h, PauliChannel};
use crate::compositions::{CompositionSpace, DEFAULT_PRUNE_EPS};
use crate::error::{Error, Result};
use crate::numeric::{binomial_f64, mul_ln, KahanSum, LnFactorial, SignedLn};

/// Above this block length the class weights are evaluated in log space.
pub const DIRECT_EVAL_MAX_N: usize = 50;

/// Which Pauli type the repetition code protects against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Corrects `X` (and the `X` part of `Y`); stabilisers `Z_i Z_{i+1}`.
    BitFlip,
    /// Corrects `Z`; stabilisers `X_i X_{i+1}`.
    PhaseFlip,
}

impl Orientation {
    pub fn dual(self) -> Orientation {
        match self {
            Orientation::BitFlip => Orientation::PhaseFlip,
            Orientation::PhaseFlip => Orientation::BitFlip,
        }
    }

    /// Map a channel into the bit-flip frame (identity for `BitFlip`).
    #[inline]
    pub fn to_bit_frame(self, c: &PauliChannel) -> PauliChannel {
        match self {
            Orientation::BitFlip => *c,
            Orientation::PhaseFlip => dualize(c),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::BitFlip => write!(f, "bit"),
            Orientation::PhaseFlip => write!(f, "phase"),
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bit" | "b" | "bitflip" | "bit-flip" | "x" => Ok(Orientation::BitFlip),
            "phase" | "p" | "phaseflip" | "phase-flip" | "z" => Ok(Orientation::PhaseFlip),
            other => Err(Error::Parse(format!("unknown orientation {other:?}"))),
        }
    }
}

/// An `n`-qubit repetition code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RepCodeSpec {
    pub n: usize,
    pub orientation: Orientation,
}

impl RepCodeSpec {
    pub fn new(n: usize, orientation: Orientation) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("repetition code needs n >= 1".into()));
        }
        Ok(RepCodeSpec { n, orientation })
    }

    pub fn bit(n: usize) -> Result<Self> {
        Self::new(n, Orientation::BitFlip)
    }

    pub fn phase(n: usize) -> Result<Self> {
        Self::new(n, Orientation::PhaseFlip)
    }
}

/// One distance class `k` of a repetition code under i.i.d. noise.
///
/// `a_k`, `b_k`, `a_nk`, `b_nk` are the bit-frame quantities (for a phase-flip
/// code they refer to the dualised channel); `l` holds the joint probabilities
/// `l_sigma(k)` in the code's own frame, after the even-`n` halving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceClassOutcome {
    pub k: usize,
    pub a_k: f64,
    pub b_k: f64,
    pub a_nk: f64,
    pub b_nk: f64,
    pub l: [f64; 4],
    pub class_prob: f64,
}

impl DistanceClassOutcome {
    /// Logical channel conditioned on observing this class.
    pub fn conditional(&self) -> Result<PauliChannel> {
        PauliChannel::from_weights(self.l)
    }

    /// `sum_sigma h(l_sigma) - h(l)`, i.e. `l * H(l_sigma / l)`.
    pub fn entropy_contribution(&self) -> f64 {
        let mut s = KahanSum::new();
        for &v in &self.l {
            s.add(h(v));
        }
        s.add(-h(self.class_prob));
        s.value()
    }
}

/// Signed `C(n,k) x^k y^(n-k)` evaluated directly or in log space.
fn binomial_term(lf: Option<&LnFactorial>, n: usize, k: usize, x: f64, y: f64) -> f64 {
    match lf {
        None => binomial_f64(n as u64, k as u64) * x.powi(k as i32) * y.powi((n - k) as i32),
        Some(lf) => {
            let term = SignedLn::from_f64(x)
                .powi(k as u32)
                .mul(SignedLn::from_f64(y).powi((n - k) as u32));
            term.to_f64_scaled(lf.ln_binomial(n, k))
        }
    }
}

/// Distance-class outcomes of an `n`-qubit repetition code with the same
/// channel on every qubit.
pub fn logical_outcomes_iid(spec: RepCodeSpec, c: &PauliChannel) -> Vec<DistanceClassOutcome> {
    let n = spec.n;
    let cb = spec.orientation.to_bit_frame(c);
    let q = cb.q_x();
    let bx = cb.p_x() - cb.p_y();
    let bi = cb.p_i() - cb.p_z();
    let lf = (n > DIRECT_EVAL_MAX_N).then(|| LnFactorial::new(n));
    let a = |k: usize| binomial_term(lf.as_ref(), n, k, q, 1.0 - q);
    let b = |k: usize| binomial_term(lf.as_ref(), n, k, bx, bi);

    (0..=n / 2)
        .map(|k| {
            let (a_k, b_k, a_nk, b_nk) = (a(k), b(k), a(n - k), b(n - k));
            let tie = 2 * k == n;
            let div = if tie { 4.0 } else { 2.0 };
            let mut l = [(a_k + b_k) / div, (a_nk + b_nk) / div, (a_nk - b_nk) / div, (a_k - b_k) / div];
            for v in l.iter_mut() {
                if *v < 0.0 && *v >= -1e-15 {
                    *v = 0.0;
                }
            }
            if spec.orientation == Orientation::PhaseFlip {
                l.swap(1, 3);
            }
            let class_prob = if tie { a_k } else { a_k + a_nk };
            DistanceClassOutcome { k, a_k, b_k, a_nk, b_nk, l, class_prob }
        })
        .collect()
}

/// Syndrome-averaged logical entropy of a repetition code under i.i.d. noise.
pub fn average_entropy_rep(spec: RepCodeSpec, c: &PauliChannel) -> f64 {
    let mut s = KahanSum::new();
    for o in logical_outcomes_iid(spec, c) {
        s.add(o.entropy_contribution());
    }
    s.value()
}

/// Probability and conditional channel of the syndrome class `{T, complement}`
/// of a repetition code with (possibly different) channels on each qubit,
/// where `T` is the set of qubits marked in `flagged`.
pub fn generalized_block_outcome(
    channels: &[PauliChannel],
    flagged: &[bool],
    orientation: Orientation,
) -> Result<(f64, PauliChannel)> {
    if channels.is_empty() {
        return Err(Error::Domain("generalized_block_outcome needs at least one channel".into()));
    }
    if channels.len() != flagged.len() {
        return Err(Error::Domain(format!(
            "{} channels but {} flags",
            channels.len(),
            flagged.len()
        )));
    }
    let acc = BlockAccumulator::from_iter(
        channels.iter().zip(flagged).map(|(c, &f)| (orientation.to_bit_frame(c), f)),
    );
    let prob = acc.class_probability();
    if !(prob > 0.0) {
        return Ok((0.0, PauliChannel::IDENTITY));
    }
    let mut cond = acc.conditional_bit_frame()?;
    if orientation == Orientation::PhaseFlip {
        cond = dualize(&cond);
    }
    Ok((prob, cond))
}

/// Running products `a_T`, `a_T'`, `b_T`, `b_T'` for a bit-frame repetition
/// block, rescaled to stay representable for long blocks.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockAccumulator {
    a: f64,
    a_bar: f64,
    b: f64,
    b_bar: f64,
    ln_scale: f64,
}

impl BlockAccumulator {
    const RESCALE_BELOW: f64 = 1e-150;

    pub(crate) fn new() -> Self {
        BlockAccumulator { a: 1.0, a_bar: 1.0, b: 1.0, b_bar: 1.0, ln_scale: 0.0 }
    }

    /// Fold in one qubit with bit-frame channel `c`; `flipped` says whether the
    /// qubit belongs to `T`.
    #[inline]
    pub(crate) fn push(&mut self, c: &PauliChannel, flipped: bool) {
        let q = c.q_x();
        let nq = c.p_i() + c.p_z();
        let bq = c.p_x() - c.p_y();
        let bn = c.p_i() - c.p_z();
        if flipped {
            self.a *= q;
            self.a_bar *= nq;
            self.b *= bq;
            self.b_bar *= bn;
        } else {
            self.a *= nq;
            self.a_bar *= q;
            self.b *= bn;
            self.b_bar *= bq;
        }
        let m = self.a.max(self.a_bar);
        if m < Self::RESCALE_BELOW && m > 0.0 {
            let s = 1.0 / m;
            self.a *= s;
            self.a_bar *= s;
            self.b *= s;
            self.b_bar *= s;
            self.ln_scale += m.ln();
        }
    }

    pub(crate) fn class_probability(&self) -> f64 {
        (self.a + self.a_bar) * self.ln_scale.exp()
    }

    pub(crate) fn conditional_bit_frame(&self) -> Result<PauliChannel> {
        PauliChannel::from_weights([
            (self.a + self.b) / 2.0,
            (self.a_bar + self.b_bar) / 2.0,
            (self.a_bar - self.b_bar) / 2.0,
            (self.a - self.b) / 2.0,
        ])
    }
}

impl FromIterator<(PauliChannel, bool)> for BlockAccumulator {
    fn from_iter<I: IntoIterator<Item = (PauliChannel, bool)>>(iter: I) -> Self {
        let mut acc = BlockAccumulator::new();
        for (c, f) in iter {
            acc.push(&c, f);
        }
        acc
    }
}

/// Bit-flip entropy classes for classical flips at rate `q` on an `n` block:
/// `(class weight, conditional flip probability)` per distance class.
fn flip_classes(n: usize, q: f64) -> Vec<(f64, f64)> {
    let lf = (n > DIRECT_EVAL_MAX_N).then(|| LnFactorial::new(n));
    let a = |k: usize| binomial_term(lf.as_ref(), n, k, q, 1.0 - q);
    (0..=n / 2)
        .map(|k| {
            if 2 * k == n {
                (a(k), 0.5)
            } else {
                let (ak, ank) = (a(k), a(n - k));
                let w = ak + ank;
                (w, if w > 0.0 { ank / w } else { 0.0 })
            }
        })
        .collect()
}

/// Average entropy of an `n`-bit repetition code on a classical binary
/// symmetric channel with flip rate `q`.
fn classical_rep_entropy(n: usize, q: f64) -> f64 {
    flip_classes(n, q)
        .into_iter()
        .map(|(w, e)| w * binary_entropy_unchecked(e))
        .collect::<KahanSum>()
        .value()
}

/// Average logical entropy of the `n1` bit-flip in `n2` phase-flip code under
/// independent bit flips (`q_x`) and phase flips (`q_z`). Bit and phase
/// information separate, so the result is `X_e + Z_e`.
pub fn independent_noise_entropy(n1: usize, n2: usize, q_x: f64, q_z: f64) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("n1 and n2 must be at least 1".into()));
    }
    for (name, q) in [("q_x", q_x), ("q_z", q_z)] {
        if q.is_nan() || !(0.0..=0.5).contains(&q) {
            return Err(Error::Domain(format!("{name} = {q} outside [0, 1/2]")));
        }
    }
    Ok(independent_x_entropy(n1, n2, q_x) + independent_z_entropy(n1, n2, q_z))
}

/// Bit-flip part: the inner code's class decides each block's flip
/// probability; the outer code only sees the parity of block flips.
pub fn independent_x_entropy(n1: usize, n2: usize, q_x: f64) -> f64 {
    let classes = flip_classes(n1, q_x);
    if n2 == 1 {
        return classes.iter().map(|&(w, e)| w * binary_entropy_unchecked(e)).sum();
    }
    let weights: Vec<f64> = classes.iter().map(|c| c.0).collect();
    let ln_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let ln_s: Vec<SignedLn> = classes.iter().map(|c| SignedLn::from_f64(1.0 - 2.0 * c.1)).collect();
    let space = CompositionSpace::new(n2 as u32, classes.len()).with_pruning(&[weights], DEFAULT_PRUNE_EPS);
    space.par_sum(|counts, ln_mult| {
        let mut ln_mass = ln_mult;
        let mut prod = SignedLn::ONE;
        for (j, &m) in counts.iter().enumerate() {
            ln_mass += mul_ln(m, ln_w[j]);
            prod = prod.mul(ln_s[j].powi(m));
        }
        let e = (1.0 - prod.to_f64()) / 2.0;
        ln_mass.exp() * binary_entropy_unchecked(e)
    })
}

/// `1 - independent_x_entropy(n1, n2, q_x)`, accurate when the entropy is
/// within rounding of one.
pub fn independent_x_deficit(n1: usize, n2: usize, q_x: f64) -> f64 {
    let classes = flip_classes(n1, q_x);
    if n2 == 1 {
        return classes.iter().map(|&(w, e)| w * parity_deficit(1.0 - 2.0 * e)).collect::<KahanSum>().value();
    }
    let weights: Vec<f64> = classes.iter().map(|c| c.0).collect();
    let ln_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let ln_s: Vec<SignedLn> = classes.iter().map(|c| SignedLn::from_f64(1.0 - 2.0 * c.1)).collect();
    let space = CompositionSpace::new(n2 as u32, classes.len()).with_pruning(&[weights], DEFAULT_PRUNE_EPS);
    space.par_sum(|counts, ln_mult| {
        let mut ln_mass = ln_mult;
        let mut prod = SignedLn::ONE;
        for (j, &m) in counts.iter().enumerate() {
            ln_mass += mul_ln(m, ln_w[j]);
            prod = prod.mul(ln_s[j].powi(m));
        }
        ln_mass.exp() * parity_deficit(prod.to_f64())
    })
}

/// `1 - H((1 - m) / 2)`.
fn parity_deficit(m: f64) -> f64 {
    let m = m.abs();
    if m >= 1.0 {
        return 1.0;
    }
    if m < 0.1 {
        // sum m^2k / (k (2k - 1)), over 2 ln 2
        let m2 = m * m;
        let mut term = m2;
        let mut sum = 0.0;
        for k in 1..=10 {
            sum += term / (k * (2 * k - 1)) as f64;
            term *= m2;
        }
        return sum / (2.0 * std::f64::consts::LN_2);
    }
    ((1.0 + m) * m.ln_1p() + (1.0 - m) * (-m).ln_1p()) / (2.0 * std::f64::consts::LN_2)
}

/// Phase-flip part: blocks flip phase independently at rate
/// `(1 - (1 - 2 q_z)^n1) / 2`, and the outer `n2` phase-flip code corrects them.
pub fn independent_z_entropy(n1: usize, n2: usize, q_z: f64) -> f64 {
    let q_block = (1.0 - (1.0 - 2.0 * q_z).powi(n1 as i32)) / 2.0;
    classical_rep_entropy(n2, q_block)
}

#[inline]
fn binary_entropy_unchecked(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    // ln_1p keeps the p / ln 2 term when 1 - p rounds to 1.
    h(p) - (1.0 - p) * (-p).ln_1p() / std::f64::consts::LN_2
}

/// Large-`n` criterion for bit-flip codes:
/// `(p_X - p_Y)^2 (1 - q_X) + (p_I - p_Z)^2 q_X - 2 (q_X (1 - q_X))^(3/2)`.
/// Positive values mean the logical entropy tends below one as `n` grows.
pub fn infinite_bitflip_margin(c: &PauliChannel) -> f64 {
    let q = c.q_x();
    let dx = c.p_x() - c.p_y();
    let di = c.p_i() - c.p_z();
    dx * dx * (1.0 - q) + di * di * q - 2.0 * (q * (1.0 - q)).powf(1.5)
}

/// True when both squared terms of [`infinite_bitflip_margin`] vanish, where
/// the criterion carries no information.
pub fn infinite_margin_degenerate(c: &PauliChannel) -> bool {
    let dx = c.p_x() - c.p_y();
    let di = c.p_i() - c.p_z();
    dx.abs() < 1e-15 && di.abs() < 1e-15
}

/// Closed-form large-`n` threshold on `q_X` for independent noise with
/// phase-flip rate `q_z`: `(1 - sqrt(1 - (1 - 2 q_z)^4)) / 2`.
pub fn independent_infinite_threshold(q_z: f64) -> Result<f64> {
    if q_z.is_nan() || !(0.0..=0.5).contains(&q_z) {
        return Err(Error::Domain(format!("q_z = {q_z} outside [0, 1/2]")));
    }
    let t = (1.0 - 2.0 * q_z).powi(4);
    Ok((1.0 - (1.0 - t).sqrt()) / 2.0)
}

/// Starting guess for the best bit-flip length under independent noise with
/// small phase-flip rate: roughly `1 / (2 q_z)`, made odd.
pub fn heuristic_n1_independent(q_z: f64) -> usize {
    let n = (1.0 / (2.0 * q_z.max(1e-9))).round().max(1.0) as usize;
    n | 1
}

/// Starting guess for the best bit-flip length under two-Pauli noise
/// `(p1, p2, p1)`: roughly `2 / p1`, made odd.
pub fn heuristic_n1_two_pauli(p1: f64) -> usize {
    let n = (2.0 / p1.max(1e-9)).round().max(1.0) as usize;
    n | 1
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{binary_entropy, shannon_entropy, NoiseFamily};

    #[test]
    fn two_qubit_depolarizing_tie_class() {
        let p = 0.05;
        let c = NoiseFamily::Depolarizing.at(p).unwrap();
        let out = logical_outcomes_iid(RepCodeSpec::bit(2).unwrap(), &c);
        assert_eq!(out.len(), 2);
        let k1 = &out[1];
        for v in k1.l {
            assert!((v - (p - 2.0 * p * p)).abs() < 1e-15);
        }
        assert!((k1.entropy_contribution() - (8.0 * p - 16.0 * p * p)).abs() < 1e-14);
    }

    #[test]
    fn single_qubit_code_is_identity() {
        let c = PauliChannel::new(0.85, 0.05, 0.04, 0.06).unwrap();
        for o in [Orientation::BitFlip, Orientation::PhaseFlip] {
            let out = logical_outcomes_iid(RepCodeSpec::new(1, o).unwrap(), &c);
            assert_eq!(out.len(), 1);
            for (a, b) in out[0].l.iter().zip(c.as_array()) {
                assert!((a - b).abs() < 1e-15);
            }
            assert!((average_entropy_rep(RepCodeSpec::new(1, o).unwrap(), &c) - shannon_entropy(&c)).abs() < 1e-15);
        }
    }

    #[test]
    fn class_probabilities_sum_to_one_in_log_space() {
        let c = PauliChannel::new(0.8, 0.07, 0.05, 0.08).unwrap();
        for n in [51usize, 200, 1500] {
            let out = logical_outcomes_iid(RepCodeSpec::bit(n).unwrap(), &c);
            let total: f64 = out.iter().map(|o| o.class_prob).sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n} total={total}");
            for o in &out {
                let s: f64 = o.l.iter().sum();
                assert!((s - o.class_prob).abs() <= 1e-12 * o.class_prob.max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn direct_and_log_space_paths_agree() {
        let c = PauliChannel::new(0.8, 0.07, 0.05, 0.08).unwrap();
        let n = 40;
        let lf = LnFactorial::new(n);
        for k in 0..=n {
            for (x, y) in [(0.12, 0.88), (-0.02, 0.72)] {
                let d = binomial_term(None, n, k, x, y);
                let l = binomial_term(Some(&lf), n, k, x, y);
                assert!((d - l).abs() <= 1e-12 * d.abs() + 1e-300);
            }
        }
        let _ = c;
    }

    #[test]
    fn generalized_outcome_reduces_to_iid_classes() {
        let c = PauliChannel::new(0.82, 0.08, 0.03, 0.07).unwrap();
        let n = 5;
        let classes = logical_outcomes_iid(RepCodeSpec::bit(n).unwrap(), &c);
        for k in 0..=2usize {
            let flags: Vec<bool> = (0..n).map(|i| i < k).collect();
            let (prob, cond) = generalized_block_outcome(&vec![c; n], &flags, Orientation::BitFlip).unwrap();
            let mult = binomial_f64(n as u64, k as u64);
            assert!((prob * mult - classes[k].class_prob).abs() < 1e-14);
            let expected = classes[k].conditional().unwrap();
            for (a, b) in cond.as_array().iter().zip(expected.as_array()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn generalized_outcome_with_identity_channels() {
        let (p, cond) = generalized_block_outcome(
            &[PauliChannel::IDENTITY, PauliChannel::IDENTITY],
            &[false, false],
            Orientation::BitFlip,
        )
        .unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(cond, PauliChannel::IDENTITY);
        assert!(generalized_block_outcome(&[], &[], Orientation::BitFlip).is_err());
    }

    #[test]
    fn long_blocks_do_not_underflow() {
        let c = PauliChannel::new(0.6, 0.2, 0.1, 0.1).unwrap();
        let n = 900;
        let flags: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let (prob, cond) = generalized_block_outcome(&vec![c; n], &flags, Orientation::BitFlip).unwrap();
        assert!(prob > 0.0 || prob == 0.0);
        assert!((cond.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_entropy_without_coding() {
        let (qx, qz) = (0.13, 0.07);
        let e = independent_noise_entropy(1, 1, qx, qz).unwrap();
        let expect = binary_entropy(qx).unwrap() + binary_entropy(qz).unwrap();
        assert!((e - expect).abs() < 1e-15);
        assert!(independent_noise_entropy(1, 1, 0.6, 0.1).is_err());
    }

    #[test]
    fn independent_entropy_matches_rep_code_for_n2_one() {
        let (qx, qz) = (0.11, 0.09);
        let c = PauliChannel::independent(qx, qz).unwrap();
        for n1 in 1..=8 {
            let fast = independent_noise_entropy(n1, 1, qx, qz).unwrap();
            let general = average_entropy_rep(RepCodeSpec::bit(n1).unwrap(), &c);
            assert!((fast - general).abs() < 1e-12, "n1={n1}: {fast} vs {general}");
        }
    }

    #[test]
    fn infinite_threshold_closed_form() {
        assert_eq!(independent_infinite_threshold(0.0).unwrap(), 0.5);
        assert_eq!(independent_infinite_threshold(0.5).unwrap(), 0.0);
        let q = 0.5 - (2.0 * 5f64.sqrt() - 2.0).sqrt() / 4.0;
        assert!((independent_infinite_threshold(q).unwrap() - q).abs() < 1e-12);
        assert!((q - 0.1069243112).abs() < 1e-10);
        for qz in [0.01, 0.05, 0.2, 0.4] {
            let qx = independent_infinite_threshold(qz).unwrap();
            let c = PauliChannel::independent(qx, qz).unwrap();
            assert!(infinite_bitflip_margin(&c).abs() < 1e-10);
        }
        assert!(independent_infinite_threshold(0.7).is_err());
    }

    #[test]
    fn infinite_margin_pure_x_channel() {
        for q in [0.1, 0.3, 0.49] {
            let c = PauliChannel::new(1.0 - q, q, 0.0, 0.0).unwrap();
            let direct = q * (1.0 - q) - 2.0 * (q * (1.0 - q)).powf(1.5);
            assert!((infinite_bitflip_margin(&c) - direct).abs() < 1e-15);
            assert!(direct > 0.0);
        }
        assert!(infinite_margin_degenerate(&PauliChannel::FULLY_DEPOLARIZING));
    }

    #[test]
    fn heuristics_are_odd() {
        assert_eq!(heuristic_n1_independent(0.05) % 2, 1);
        assert_eq!(heuristic_n1_two_pauli(0.1), 21);
    }
}
