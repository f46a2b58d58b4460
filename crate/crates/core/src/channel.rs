//! Single-qubit Pauli channels and their entropy calculus.
//!
//! A [`PauliChannel`] is the probability vector `(p_I, p_X, p_Y, p_Z)`. It is
//! the value passed from one level of a concatenated code to the next, so all
//! downstream modules consume and produce it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::kahan_sum;
use crate::pauli::Pauli;

/// Sum deviation from one that is silently renormalised on construction.
pub const NORMALIZE_TOL: f64 = 1e-9;
/// Negative components down to this value are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-15;

/// Probability vector of a single-qubit Pauli noise process, indexed by [`Pauli`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannel {
    p: [f64; 4],
}

impl PauliChannel {
    pub const IDENTITY: PauliChannel = PauliChannel { p: [1.0, 0.0, 0.0, 0.0] };
    pub const FULLY_DEPOLARIZING: PauliChannel = PauliChannel { p: [0.25; 4] };

    /// Build from `(p_I, p_X, p_Y, p_Z)`. Components in `[-1e-15, 0)` are
    /// clamped to zero and sums within `1e-9` of one are renormalised.
    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        Self::from_array([p_i, p_x, p_y, p_z])
    }

    pub fn from_array(mut p: [f64; 4]) -> Result<Self> {
        for v in p.iter_mut() {
            if !v.is_finite() {
                return Err(Error::InvalidChannel(format!("non-finite component in {p:?}")));
            }
            if *v < 0.0 {
                if *v >= -NEGATIVE_CLAMP {
                    *v = 0.0;
                } else {
                    return Err(Error::InvalidChannel(format!("negative component {v:e}")));
                }
            }
        }
        let total = kahan_sum(p);
        if (total - 1.0).abs() > NORMALIZE_TOL {
            return Err(Error::InvalidChannel(format!("components sum to {total}")));
        }
        if total != 1.0 {
            for v in p.iter_mut() {
                *v /= total;
            }
        }
        Ok(PauliChannel { p })
    }

    /// Build from the error probabilities; `p_I` is the remainder.
    pub fn from_errors(p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        Self::new(1.0 - p_x - p_y - p_z, p_x, p_y, p_z)
    }

    /// Normalise an arbitrary non-negative weight vector. Used for conditional
    /// channels obtained by dividing syndrome-class joint probabilities.
    pub fn from_weights(w: [f64; 4]) -> Result<Self> {
        let mut w = w;
        for v in w.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total = kahan_sum(w);
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidChannel(format!("weights {w:?} have no mass")));
        }
        Ok(PauliChannel { p: w.map(|v| v / total) })
    }

    /// Product channel of independent bit flips (rate `q_x`) and phase flips (rate `q_z`).
    pub fn independent(q_x: f64, q_z: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q_x) || !(0.0..=1.0).contains(&q_z) {
            return Err(Error::Domain(format!("independent rates ({q_x}, {q_z}) outside [0,1]")));
        }
        Self::new((1.0 - q_x) * (1.0 - q_z), q_x * (1.0 - q_z), q_x * q_z, (1.0 - q_x) * q_z)
    }

    #[inline]
    pub fn p_i(&self) -> f64 {
        self.p[0]
    }
    #[inline]
    pub fn p_x(&self) -> f64 {
        self.p[1]
    }
    #[inline]
    pub fn p_y(&self) -> f64 {
        self.p[2]
    }
    #[inline]
    pub fn p_z(&self) -> f64 {
        self.p[3]
    }

    #[inline]
    pub fn get(&self, pauli: Pauli) -> f64 {
        self.p[pauli.index()]
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 4] {
        self.p
    }

    /// Probability of no error.
    pub fn fidelity(&self) -> f64 {
        self.p[0]
    }

    /// Total bit-flip rate `p_X + p_Y`.
    #[inline]
    pub fn q_x(&self) -> f64 {
        self.p[1] + self.p[2]
    }

    /// Total phase-flip rate `p_Y + p_Z`.
    #[inline]
    pub fn q_z(&self) -> f64 {
        self.p[2] + self.p[3]
    }

    /// The channel seen after multiplying every error by `pauli`
    /// (a relabelling of the recovery frame).
    pub fn relabel(&self, pauli: Pauli) -> PauliChannel {
        let mut out = [0.0; 4];
        for s in Pauli::ALL {
            out[s.index()] = self.p[s.mul(pauli).index()];
        }
        PauliChannel { p: out }
    }

    /// Representative of the orbit under frame relabelling: the relabelling
    /// that puts the largest weight on `I` (ties resolved lexicographically).
    pub fn canonical(&self) -> PauliChannel {
        let mut best = *self;
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            let cand = self.relabel(pauli);
            if cand.p.partial_cmp(&best.p) == Some(std::cmp::Ordering::Greater) {
                best = cand;
            }
        }
        best
    }
}

impl fmt::Display for PauliChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.p[0], self.p[1], self.p[2], self.p[3])
    }
}

/// `-x log2 x` without domain checks; non-positive inputs give 0.
#[inline]
pub(crate) fn h(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// `-x log2 x` with the limit convention `h(0) = 0`.
pub fn h_term(x: f64) -> Result<f64> {
    if x.is_nan() || x < -NEGATIVE_CLAMP || x > 1.0 + NEGATIVE_CLAMP {
        return Err(Error::Domain(format!("h_term argument {x} outside [0,1]")));
    }
    Ok(h(x))
}

/// Shannon entropy `H(p_I, p_X, p_Y, p_Z)` in bits.
pub fn shannon_entropy(c: &PauliChannel) -> f64 {
    kahan_sum(c.p.iter().map(|&x| h(x)))
}

/// `h(p) + h(1 - p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary entropy argument {p} outside [0,1]")));
    }
    Ok(h(p) + h(1.0 - p))
}

/// Hadamard conjugate: swaps the roles of bit and phase flips.
pub fn dualize(c: &PauliChannel) -> PauliChannel {
    PauliChannel { p: [c.p[0], c.p[3], c.p[2], c.p[1]] }
}

/// Single-letter hashing rate `1 - S`; negative values mean no hashing rate.
pub fn q1_rate(c: &PauliChannel) -> f64 {
    1.0 - shannon_entropy(c)
}

/// Distance below the known upper bound on non-zero capacity:
/// `1/2 - (p_X + p_Y + p_Z + sqrt(p_X p_Y) + sqrt(p_Y p_Z) + sqrt(p_Z p_X))`.
/// Positive means the channel is below the bound.
pub fn cerf_margin(c: &PauliChannel) -> f64 {
    let (x, y, z) = (c.p_x(), c.p_y(), c.p_z());
    0.5 - (x + y + z + (x * y).sqrt() + (y * z).sqrt() + (z * x).sqrt())
}

/// One-parameter curves of Pauli channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFamily {
    /// `(1 - 3p, p, p, p)`.
    Depolarizing,
    /// Independent bit and phase flips at equal rate `p`: `((1-p)^2, p(1-p), p^2, p(1-p))`.
    IndependentSym,
    /// Independent flips with the phase-flip rate held fixed; the parameter is `q_X`.
    IndependentXZ { q_z: f64 },
    /// `(p_X, p_Y, p_Z) = (p, ratio * p, p)`; `ratio = 0` is the `(p, 0, p)` channel.
    TwoPauli { ratio: f64 },
    /// `(p_X, p_Y, p_Z) = (p, floor, floor)`.
    Dominated { floor: f64 },
    /// `(1 - p) * identity + p * direction` for a normalised direction `(d_I, d_X, d_Y, d_Z)`.
    CustomRay { direction: [f64; 4] },
}

impl NoiseFamily {
    pub const DEFAULT_FLOOR: f64 = 1e-6;

    pub fn two_pauli() -> Self {
        NoiseFamily::TwoPauli { ratio: 0.0 }
    }

    pub fn dominated() -> Self {
        NoiseFamily::Dominated { floor: Self::DEFAULT_FLOOR }
    }

    /// Interval of parameters for which the family yields a valid channel.
    pub fn valid_interval(&self) -> (f64, f64) {
        match *self {
            NoiseFamily::Depolarizing => (0.0, 1.0 / 3.0),
            NoiseFamily::IndependentSym => (0.0, 1.0),
            NoiseFamily::IndependentXZ { .. } => (0.0, 1.0),
            NoiseFamily::TwoPauli { ratio } => (0.0, 1.0 / (2.0 + ratio)),
            NoiseFamily::Dominated { floor } => (0.0, 1.0 - 2.0 * floor),
            NoiseFamily::CustomRay { .. } => (0.0, 1.0),
        }
    }

    /// Sub-interval scanned for threshold brackets: from the noiseless end up
    /// to the point of maximal mixing along the curve.
    pub fn scan_interval(&self) -> (f64, f64) {
        match *self {
            NoiseFamily::Depolarizing => (0.0, 0.25),
            NoiseFamily::IndependentSym | NoiseFamily::IndependentXZ { .. } => (0.0, 0.5),
            NoiseFamily::TwoPauli { ratio } => (0.0, 1.0 / (3.0 + ratio)),
            NoiseFamily::Dominated { .. } => (0.0, 0.5),
            NoiseFamily::CustomRay { .. } => (0.0, 1.0),
        }
    }

    pub fn at(&self, p: f64) -> Result<PauliChannel> {
        let (lo, hi) = self.valid_interval();
        if p.is_nan() || p < lo - 1e-15 || p > hi + 1e-15 {
            return Err(Error::Domain(format!("parameter {p} outside [{lo}, {hi}] for {self}")));
        }
        let p = p.clamp(lo, hi);
        match *self {
            NoiseFamily::Depolarizing => PauliChannel::new(1.0 - 3.0 * p, p, p, p),
            NoiseFamily::IndependentSym => PauliChannel::independent(p, p),
            NoiseFamily::IndependentXZ { q_z } => PauliChannel::independent(p, q_z),
            NoiseFamily::TwoPauli { ratio } => PauliChannel::from_errors(p, ratio * p, p),
            NoiseFamily::Dominated { floor } => PauliChannel::from_errors(p, floor, floor),
            NoiseFamily::CustomRay { direction } => {
                let total: f64 = direction.iter().sum();
                let d = direction.map(|v| v / total);
                PauliChannel::new(
                    (1.0 - p) + p * d[0],
                    p * d[1],
                    p * d[2],
                    p * d[3],
                )
            }
        }
    }
}

/// Channel at parameter `p` along `family`.
pub fn family_at(family: &NoiseFamily, p: f64) -> Result<PauliChannel> {
    family.at(p)
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseFamily::Depolarizing => write!(f, "depolarizing"),
            NoiseFamily::IndependentSym => write!(f, "independent-sym"),
            NoiseFamily::IndependentXZ { q_z } => write!(f, "independent-xz:{q_z}"),
            NoiseFamily::TwoPauli { ratio } if *ratio == 0.0 => write!(f, "two-pauli"),
            NoiseFamily::TwoPauli { ratio } => write!(f, "two-pauli:{ratio}"),
            NoiseFamily::Dominated { floor } if *floor == Self::DEFAULT_FLOOR => write!(f, "dominated"),
            NoiseFamily::Dominated { floor } => write!(f, "dominated:{floor}"),
            NoiseFamily::CustomRay { direction: d } => {
                write!(f, "custom:{},{},{},{}", d[0], d[1], d[2], d[3])
            }
        }
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: &str| -> Result<f64> {
            a.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad family argument {a:?}: {e}")))
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("depolarizing" | "depol", None) => Ok(NoiseFamily::Depolarizing),
            ("independent-sym" | "independent", None) => Ok(NoiseFamily::IndependentSym),
            ("independent-xz", Some(a)) => {
                let q_z = num(a)?;
                if !(0.0..=0.5).contains(&q_z) {
                    return Err(Error::Parse(format!("q_z = {q_z} outside [0, 1/2]")));
                }
                Ok(NoiseFamily::IndependentXZ { q_z })
            }
            ("two-pauli", None) => Ok(NoiseFamily::two_pauli()),
            ("two-pauli", Some(a)) => {
                let ratio = num(a)?;
                if ratio < 0.0 {
                    return Err(Error::Parse("two-pauli ratio must be non-negative".into()));
                }
                Ok(NoiseFamily::TwoPauli { ratio })
            }
            ("dominated", None) => Ok(NoiseFamily::dominated()),
            ("dominated", Some(a)) => {
                let floor = num(a)?;
                if !(0.0..0.5).contains(&floor) {
                    return Err(Error::Parse(format!("floor {floor} outside [0, 1/2)")));
                }
                Ok(NoiseFamily::Dominated { floor })
            }
            ("custom", Some(a)) => {
                let vals = a.split(',').map(num).collect::<Result<Vec<_>>>()?;
                let direction = match vals.as_slice() {
                    [i, x, y, z] => [*i, *x, *y, *z],
                    [x, y, z] => [0.0, *x, *y, *z],
                    _ => return Err(Error::Parse("custom direction needs 3 or 4 components".into())),
                };
                if direction.iter().any(|v| *v < 0.0) || direction.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::Parse("custom direction must be non-negative and non-zero".into()));
                }
                Ok(NoiseFamily::CustomRay { direction })
            }
            _ => Err(Error::Parse(format!("unknown noise family {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn h_term_values() {
        assert_eq!(h_term(0.0).unwrap(), 0.0);
        assert_eq!(h_term(0.5).unwrap(), 0.5);
        assert_eq!(h_term(0.25).unwrap(), 0.5);
        assert_eq!(h_term(-5e-16).unwrap(), 0.0);
        assert!(h_term(-0.1).is_err());
        assert!(h_term(1.5).is_err());
    }

    #[test]
    fn entropy_extremes() {
        assert_eq!(shannon_entropy(&PauliChannel::IDENTITY), 0.0);
        assert!(close(shannon_entropy(&PauliChannel::FULLY_DEPOLARIZING), 2.0, 1e-15));
        assert_eq!(q1_rate(&PauliChannel::IDENTITY), 1.0);
        assert!(close(q1_rate(&PauliChannel::FULLY_DEPOLARIZING), -1.0, 1e-15));
    }

    #[test]
    fn hashing_point_of_depolarizing_channel() {
        // exact root; the commonly quoted 0.0630965616 has a digit slip
        let c = NoiseFamily::Depolarizing.at(0.0630965416384).unwrap();
        assert!(close(shannon_entropy(&c), 1.0, 1e-8));
        assert!(close(q1_rate(&c), 0.0, 1e-8));
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        let direct = -0.11 * 0.11f64.log2() - 0.89 * 0.89f64.log2();
        assert!(close(binary_entropy(0.11).unwrap(), direct, 1e-15));
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn dualize_swaps_x_and_z() {
        let c = PauliChannel::new(0.9, 0.06, 0.01, 0.03).unwrap();
        let d = dualize(&c);
        assert_eq!(d.as_array(), [0.9, 0.03, 0.01, 0.06]);
        assert_eq!(dualize(&d), c);
        let dep = NoiseFamily::Depolarizing.at(0.07).unwrap();
        assert_eq!(dualize(&dep), dep);
    }

    #[test]
    fn cerf_margin_on_the_upper_bounds() {
        let dep = NoiseFamily::Depolarizing.at(1.0 / 12.0).unwrap();
        assert!(close(cerf_margin(&dep), 0.0, 1e-12));
        let two = NoiseFamily::two_pauli().at(1.0 / 6.0).unwrap();
        assert!(close(cerf_margin(&two), 0.0, 1e-12));
        let ind = NoiseFamily::IndependentSym.at(0.146447).unwrap();
        assert!(close(cerf_margin(&ind), 0.0, 1e-5));
    }

    #[test]
    fn family_values() {
        let c = NoiseFamily::Depolarizing.at(0.062).unwrap();
        for (a, b) in c.as_array().iter().zip([0.814, 0.062, 0.062, 0.062]) {
            assert!(close(*a, b, 1e-15));
        }
        let c = NoiseFamily::IndependentSym.at(0.11).unwrap();
        for (a, b) in c.as_array().iter().zip([0.7921, 0.0979, 0.0121, 0.0979]) {
            assert!(close(*a, b, 1e-15));
        }
        let c = NoiseFamily::dominated().at(0.4962410483).unwrap();
        assert!(close(shannon_entropy(&c), 1.0, 1e-8));
        let c = NoiseFamily::two_pauli().at(0.1).unwrap();
        assert!(close(c.p_i(), 0.8, 1e-15));
        assert!(NoiseFamily::Depolarizing.at(0.4).is_err());
        assert!(NoiseFamily::two_pauli().at(0.6).is_err());
    }

    #[test]
    fn construction_normalises_and_rejects() {
        let c = PauliChannel::new(0.5 + 5e-10, 0.5, 0.0, 0.0).unwrap();
        assert!(close(c.p_i() + c.p_x(), 1.0, 1e-15));
        assert!(PauliChannel::new(0.6, 0.5, 0.0, 0.0).is_err());
        assert!(PauliChannel::new(1.0 + 1e-3, -1e-3, 0.0, 0.0).is_err());
        let c = PauliChannel::new(1.0, -1e-16, 0.0, 0.0).unwrap();
        assert_eq!(c.p_x(), 0.0);
    }

    #[test]
    fn family_parsing_round_trips() {
        for s in ["depolarizing", "independent-sym", "two-pauli", "dominated", "independent-xz:0.05", "custom:1,0,0,0"] {
            let f: NoiseFamily = s.parse().unwrap();
            let again: NoiseFamily = f.to_string().parse().unwrap();
            assert_eq!(f, again);
        }
        assert!("sideways".parse::<NoiseFamily>().is_err());
    }

    #[test]
    fn canonical_is_relabel_invariant() {
        let c = PauliChannel::new(0.1, 0.6, 0.2, 0.1).unwrap();
        let k = c.canonical();
        assert_eq!(k.p_i(), 0.6);
        for p in Pauli::ALL {
            assert_eq!(c.relabel(p).canonical(), k);
        }
    }
}
