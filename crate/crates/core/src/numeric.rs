//! Small numerical helpers: compensated summation, log-factorials and
//! sign-tracked logarithms.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another partial sum in, keeping its compensation term.
    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator of floats.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Table of `ln(k!)` for `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = KahanSum::new();
        table.push(0.0);
        for k in 1..=n {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.table[k]
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n);
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// Exact binomial coefficient as a float; fine for the small `n` used on the
/// direct (non log-space) path.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Number of compositions of `n` into `parts` non-negative parts, C(n+parts-1, parts-1),
/// as a float (it may be astronomically large).
pub fn composition_count(n: usize, parts: usize) -> f64 {
    if parts == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let top = n + parts - 1;
    let k = parts - 1;
    let lf = LnFactorial::new(top);
    lf.ln_binomial(top, k).exp()
}

/// A real number stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLn {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLn {
    pub const ZERO: SignedLn = SignedLn { sign: 0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLn = SignedLn { sign: 1, ln_abs: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLn { sign: if x > 0.0 { 1 } else { -1 }, ln_abs: x.abs().ln() }
        }
    }

    /// `self^m` for a non-negative integer power.
    #[inline]
    pub fn powi(self, m: u32) -> Self {
        if m == 0 {
            Self::ONE
        } else if self.sign == 0 {
            Self::ZERO
        } else {
            let sign = if self.sign < 0 && m % 2 == 1 { -1 } else { 1 };
            SignedLn { sign, ln_abs: self.ln_abs * m as f64 }
        }
    }

    #[inline]
    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            Self::ZERO
        } else {
            SignedLn { sign: self.sign * other.sign, ln_abs: self.ln_abs + other.ln_abs }
        }
    }

    /// Value scaled by `exp(shift)`.
    #[inline]
    pub fn to_f64_scaled(self, shift: f64) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * (self.ln_abs + shift).exp()
        }
    }

    pub fn to_f64(self) -> f64 {
        self.to_f64_scaled(0.0)
    }
}

/// `m * ln(x)` with the convention `0 * ln(0) = 0`.
#[inline]
pub fn mul_ln(m: u32, ln_x: f64) -> f64 {
    if m == 0 {
        0.0
    } else {
        m as f64 * ln_x
    }
}
