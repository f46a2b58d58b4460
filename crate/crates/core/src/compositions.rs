//! Enumeration of compositions of `n` into a fixed number of non-negative parts,
//! with multinomial weights in log space and optional pruning of subtrees whose
//! multinomial mass is negligible.
//!
//! Compositions are visited in lexicographic order of their counts. The parallel
//! reduction partitions on the first count and merges partial sums in that
//! order, so results do not depend on the number of worker threads.

use rayon::prelude::*;

use crate::numeric::{composition_count, mul_ln, KahanSum, LnFactorial};

/// Default per-subtree mass below which a subtree is skipped.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-22;

#[derive(Debug, Clone)]
struct MassBound {
    /// `ln alpha_j` per category.
    ln_alpha: Vec<f64>,
    /// `ln(sum_{i > j} alpha_i)` for `j = 0..parts`.
    ln_tail: Vec<f64>,
    /// `alpha_j / sum_{i >= j} alpha_i`, the binomial split probability at depth `j`.
    split: Vec<f64>,
}

impl MassBound {
    fn new(alpha: &[f64]) -> Self {
        let parts = alpha.len();
        let mut tails = vec![0.0; parts + 1];
        for j in (0..parts).rev() {
            tails[j] = tails[j + 1] + alpha[j].max(0.0);
        }
        let ln_tail = (0..parts).map(|j| tails[j + 1].ln()).collect();
        let split = (0..parts)
            .map(|j| if tails[j] > 0.0 { alpha[j].max(0.0) / tails[j] } else { 0.0 })
            .collect();
        MassBound { ln_alpha: alpha.iter().map(|a| a.max(0.0).ln()).collect(), ln_tail, split }
    }
}

/// The set of compositions of `n` into `parts` parts.
#[derive(Debug, Clone)]
pub struct CompositionSpace {
    n: u32,
    parts: usize,
    lf: LnFactorial,
    bounds: Vec<MassBound>,
    ln_eps: f64,
}

impl CompositionSpace {
    pub fn new(n: u32, parts: usize) -> Self {
        assert!(parts >= 1, "at least one part is required");
        CompositionSpace {
            n,
            parts,
            lf: LnFactorial::new(n as usize),
            bounds: Vec::new(),
            ln_eps: f64::NEG_INFINITY,
        }
    }

    /// Skip any subtree whose multinomial mass is below `eps` under every one
    /// of the given category distributions (each should sum to one).
    pub fn with_pruning(mut self, dists: &[Vec<f64>], eps: f64) -> Self {
        for d in dists {
            assert_eq!(d.len(), self.parts, "distribution length must equal part count");
        }
        self.bounds = dists.iter().map(|d| MassBound::new(d)).collect();
        self.ln_eps = eps.ln();
        self
    }

    /// Number of compositions, C(n + parts - 1, parts - 1).
    pub fn count(&self) -> f64 {
        composition_count(self.n as usize, self.parts)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn ln_factorial(&self) -> &LnFactorial {
        &self.lf
    }

    /// Visit every (unpruned) composition in lexicographic order, passing the
    /// counts and `ln` of the multinomial coefficient.
    pub fn for_each<F: FnMut(&[u32], f64)>(&self, mut f: F) {
        let mut counts = vec![0u32; self.parts];
        let mut partial = vec![0.0; (self.parts + 1) * self.bounds.len()];
        self.rec(0, self.n, self.lf.get(self.n as usize), &mut counts, &mut partial, &mut f);
    }

    /// Compensated sum of `f` over all compositions, evaluated in parallel over
    /// the first count and merged in order.
    pub fn par_sum<F>(&self, f: F) -> f64
    where
        F: Fn(&[u32], f64) -> f64 + Sync,
    {
        if self.parts == 1 {
            let mut s = KahanSum::new();
            self.for_each(|c, lm| s.add(f(c, lm)));
            return s.value();
        }
        let nb = self.bounds.len();
        let ln_n_fact = self.lf.get(self.n as usize);
        let partials: Vec<KahanSum> = (0..=self.n)
            .into_par_iter()
            .map(|m0| {
                let mut sum = KahanSum::new();
                let rest = self.n - m0;
                let ln_mult = ln_n_fact - self.lf.get(m0 as usize);
                let mut partial = vec![0.0; (self.parts + 1) * nb];
                for (i, b) in self.bounds.iter().enumerate() {
                    partial[nb + i] = mul_ln(m0, b.ln_alpha[0]);
                }
                if nb > 0 && !self.keep(ln_mult, rest, &partial[nb..2 * nb], 0) {
                    return sum;
                }
                let mut counts = vec![0u32; self.parts];
                counts[0] = m0;
                self.rec(1, rest, ln_mult, &mut counts, &mut partial, &mut |c: &[u32], lm: f64| {
                    sum.add(f(c, lm))
                });
                sum
            })
            .collect();
        let mut total = KahanSum::new();
        for p in &partials {
            total.merge(p);
        }
        total.value()
    }

    /// Upper bound test for the subtree below depth `j` with `rest` units left;
    /// `partial` holds `sum_{i <= j} m_i ln alpha_i` per bound.
    #[inline]
    fn keep(&self, ln_mult: f64, rest: u32, partial: &[f64], j: usize) -> bool {
        let ln_rest = self.lf.get(rest as usize);
        self.bounds.iter().zip(partial).any(|(b, &pa)| {
            let ln_mass = ln_mult - ln_rest + pa + mul_ln(rest, b.ln_tail[j]);
            ln_mass >= self.ln_eps
        })
    }

    fn rec<F: FnMut(&[u32], f64)>(
        &self,
        j: usize,
        remaining: u32,
        ln_mult: f64,
        counts: &mut Vec<u32>,
        partial: &mut [f64],
        f: &mut F,
    ) {
        if j + 1 == self.parts {
            counts[j] = remaining;
            f(counts, ln_mult - self.lf.get(remaining as usize));
            return;
        }
        let nb = self.bounds.len();
        if nb == 0 {
            for m in 0..=remaining {
                counts[j] = m;
                let lm = ln_mult - self.lf.get(m as usize);
                self.rec(j + 1, remaining - m, lm, counts, partial, f);
            }
            return;
        }
        let mode = self
            .bounds
            .iter()
            .map(|b| ((remaining + 1) as f64 * b.split[j]).floor() as u32)
            .max()
            .unwrap_or(0);
        for m in 0..=remaining {
            let lm = ln_mult - self.lf.get(m as usize);
            let rest = remaining - m;
            let (head, tail) = partial.split_at_mut((j + 1) * nb);
            let cur = &head[j * nb..];
            let next = &mut tail[..nb];
            for (i, b) in self.bounds.iter().enumerate() {
                next[i] = cur[i] + mul_ln(m, b.ln_alpha[j]);
            }
            if !self.keep(lm, rest, next, j) {
                if m > mode {
                    break;
                }
                continue;
            }
            counts[j] = m;
            self.rec(j + 1, rest, lm, counts, partial, f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_all_compositions_in_order() {
        let space = CompositionSpace::new(3, 3);
        let mut seen = Vec::new();
        space.for_each(|c, _| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen.len() as f64, space.count().round());
        assert_eq!(seen[0], vec![0, 0, 3]);
        assert_eq!(seen[9], vec![3, 0, 0]);
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(sorted, seen);
    }

    #[test]
    fn multinomial_weights_sum_to_one() {
        let alpha: Vec<f64> = vec![0.5, 0.2, 0.2, 0.1];
        let space = CompositionSpace::new(12, 4);
        let total = space.par_sum(|c, lm| {
            (lm + c.iter().zip(&alpha).map(|(&m, a)| mul_ln(m, a.ln())).sum::<f64>()).exp()
        });
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn pruning_loses_only_negligible_mass() {
        let alpha: Vec<f64> = vec![0.7, 0.2, 0.05, 0.04, 0.009, 0.001];
        let exact = CompositionSpace::new(60, 6);
        let pruned = CompositionSpace::new(60, 6).with_pruning(&[alpha.clone()], 1e-22);
        let mass = |c: &[u32], lm: f64| {
            (lm + c.iter().zip(&alpha).map(|(&m, a)| mul_ln(m, a.ln())).sum::<f64>()).exp()
        };
        let mut visited = 0usize;
        pruned.for_each(|_, _| visited += 1);
        assert!((visited as f64) < exact.count() / 4.0);
        assert!((exact.par_sum(mass) - 1.0).abs() < 1e-12);
        assert!((pruned.par_sum(mass) - 1.0).abs() < 1e-12);
    }
}
