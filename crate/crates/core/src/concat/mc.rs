//! Level-wise Monte Carlo estimate of the average logical entropy.
//!
//! A sample draws one syndrome per block, bottom-up: the blocks of a level
//! see the conditional channels produced by the sampled syndromes of their
//! children. Samples are grouped into fixed-size batches; batch `b` uses the
//! ChaCha stream `b` of the seed, and batch statistics are merged in batch
//! order, so the estimate does not depend on the number of worker threads.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{dualize, shannon_entropy, PauliChannel};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::repetition::{BlockAccumulator, Orientation};
use crate::stabilizer::{sample_pauli, StabilizerCode, Symplectic};

use super::exact::{level_outcomes, WeightedChannel};
use super::stack::{CodeStack, LevelSpec};

/// Mean and standard error of a Monte Carlo entropy estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Welford accumulator with the pairwise merge of Chan et al.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Tuning knobs for [`mc_stack_entropy_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub batch_size: u64,
    /// Largest merged outcome list computed exactly for the bottom levels.
    pub exact_prefix_outcomes: usize,
    /// Step budget for computing those exact bottom levels.
    pub exact_prefix_budget: f64,
    /// Replace the sampled top syndrome by the exact average over top
    /// syndromes given the sampled child channels when that is cheap. The
    /// estimator keeps its mean and loses variance. If the exact prefix
    /// already covers the whole stack the exact value is returned.
    pub average_top_level: bool,
}

impl McConfig {
    pub const MIN_SAMPLES: u64 = 100;

    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            batch_size: 256,
            exact_prefix_outcomes: 4096,
            exact_prefix_budget: 2e7,
            average_top_level: true,
        }
    }
}

#[derive(Debug, Clone)]
enum CompiledLevel {
    Rep { n: usize, orientation: Orientation },
    Stab(Arc<StabilizerCode>),
}

impl CompiledLevel {
    fn size(&self) -> usize {
        match self {
            CompiledLevel::Rep { n, .. } => *n,
            CompiledLevel::Stab(c) => c.n(),
        }
    }

    fn sample(&self, children: &[PauliChannel], rng: &mut ChaCha8Rng) -> PauliChannel {
        match self {
            CompiledLevel::Rep { orientation, .. } => {
                let mut acc = BlockAccumulator::new();
                for c in children {
                    let p = sample_pauli(c, rng);
                    let flipped = match orientation {
                        Orientation::BitFlip => p.bits().0,
                        Orientation::PhaseFlip => p.bits().1,
                    };
                    acc.push(&orientation.to_bit_frame(c), flipped);
                }
                let cond = acc.conditional_bit_frame().unwrap_or(PauliChannel::IDENTITY);
                match orientation {
                    Orientation::BitFlip => cond,
                    Orientation::PhaseFlip => dualize(&cond),
                }
            }
            CompiledLevel::Stab(code) => {
                let mut e = Symplectic::IDENTITY;
                for (i, c) in children.iter().enumerate() {
                    e = e.with_qubit(i, sample_pauli(c, rng));
                }
                let (_, l) = code.syndrome_conditional(code.syndrome(e), children);
                PauliChannel::from_weights(l).unwrap_or(PauliChannel::IDENTITY)
            }
        }
    }

    /// Exact average over this level's syndromes, when cheap enough.
    fn averaged_entropy(&self, children: &[PauliChannel]) -> Option<f64> {
        match self {
            CompiledLevel::Rep { n, orientation } if *n <= 14 => {
                let bit: Vec<PauliChannel> = children.iter().map(|c| orientation.to_bit_frame(c)).collect();
                let mut total = 0.0;
                for mask in 0u32..(1 << (n - 1)) {
                    let mut acc = BlockAccumulator::new();
                    for (i, c) in bit.iter().enumerate() {
                        acc.push(c, i > 0 && (mask >> (i - 1)) & 1 == 1);
                    }
                    let prob = acc.class_probability();
                    if prob > 0.0 {
                        if let Ok(cond) = acc.conditional_bit_frame() {
                            total += prob * shannon_entropy(&cond);
                        }
                    }
                }
                Some(total)
            }
            CompiledLevel::Stab(code) if code.n() <= 8 => {
                let mut total = 0.0;
                for s in 0..code.num_syndromes() as u32 {
                    let (prob, l) = code.syndrome_conditional(s, children);
                    if prob > 0.0 {
                        let cond = PauliChannel::from_weights(l).ok()?;
                        total += prob * shannon_entropy(&cond);
                    }
                }
                Some(total)
            }
            _ => None,
        }
    }
}

/// A stack prepared for sampling: an exact outcome table for the bottom
/// levels followed by the levels that are sampled block by block.
#[derive(Debug, Clone)]
struct Sampler {
    base: Vec<WeightedChannel>,
    cumulative: Vec<f64>,
    levels: Vec<CompiledLevel>,
    average_top: bool,
}

impl Sampler {
    fn new(stack: &CodeStack, c: &PauliChannel, cfg: &McConfig) -> Result<Self> {
        let fused = stack.fused();
        let specs = fused.levels();
        let mut base = vec![WeightedChannel { weight: 1.0, channel: *c }];
        let mut k = 0;
        while k < specs.len() {
            let cost = prefix_cost(&specs[k], base.len());
            if cost > cfg.exact_prefix_budget {
                break;
            }
            match level_outcomes(&specs[k], &base, cfg.exact_prefix_budget) {
                Ok(next) if next.len() <= cfg.exact_prefix_outcomes => {
                    base = next;
                    k += 1;
                }
                _ => break,
            }
        }
        let levels = specs[k..]
            .iter()
            .map(|l| match l {
                LevelSpec::Repetition(r) => CompiledLevel::Rep { n: r.n, orientation: r.orientation },
                other => CompiledLevel::Stab(other.stabilizer_code().expect("stabilizer level")),
            })
            .collect();
        let mut cumulative = Vec::with_capacity(base.len());
        let mut acc = 0.0;
        for w in &base {
            acc += w.weight;
            cumulative.push(acc);
        }
        Ok(Sampler { base, cumulative, levels, average_top: cfg.average_top_level })
    }

    fn draw_base(&self, rng: &mut ChaCha8Rng) -> PauliChannel {
        let total = *self.cumulative.last().expect("non-empty base");
        let u: f64 = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.base.len() - 1);
        self.base[i].channel
    }

    fn draw_level(&self, depth: usize, rng: &mut ChaCha8Rng) -> PauliChannel {
        if depth == 0 {
            return self.draw_base(rng);
        }
        let level = &self.levels[depth - 1];
        let children: Vec<PauliChannel> = (0..level.size()).map(|_| self.draw_level(depth - 1, rng)).collect();
        level.sample(&children, rng)
    }

    fn sample_entropy(&self, rng: &mut ChaCha8Rng) -> f64 {
        let depth = self.levels.len();
        if depth == 0 {
            return shannon_entropy(&self.draw_base(rng));
        }
        let top = &self.levels[depth - 1];
        let children: Vec<PauliChannel> = (0..top.size()).map(|_| self.draw_level(depth - 1, rng)).collect();
        if self.average_top {
            if let Some(e) = top.averaged_entropy(&children) {
                return e;
            }
        }
        shannon_entropy(&top.sample(&children, rng))
    }
}

fn prefix_cost(level: &LevelSpec, inputs: usize) -> f64 {
    match level {
        LevelSpec::Repetition(r) => crate::numeric::composition_count(r.n, 2 * inputs),
        other => {
            let n = other.size() as i32;
            (inputs as f64).powi(n) * 4f64.powi(n)
        }
    }
}

/// Monte Carlo estimate with default settings.
pub fn mc_stack_entropy(stack: &CodeStack, c: &PauliChannel, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_stack_entropy_with(stack, c, &McConfig::new(samples, seed))
}

pub fn mc_stack_entropy_with(stack: &CodeStack, c: &PauliChannel, cfg: &McConfig) -> Result<McEstimate> {
    if cfg.samples < McConfig::MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "at least {} samples are required, got {}",
            McConfig::MIN_SAMPLES,
            cfg.samples
        )));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Domain("batch size must be positive".into()));
    }
    let sampler = Sampler::new(stack, c, cfg)?;
    if sampler.levels.is_empty() && cfg.average_top_level {
        // The exact prefix covers the whole stack.
        let mean = sampler.base.iter().map(|w| w.weight * shannon_entropy(&w.channel)).collect::<KahanSum>().value();
        return Ok(McEstimate { mean, std_error: 0.0, samples: cfg.samples, seed: cfg.seed });
    }
    let batches = cfg.samples.div_ceil(cfg.batch_size);
    let parts: Vec<RunningStats> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b);
            let count = cfg.batch_size.min(cfg.samples - b * cfg.batch_size);
            let mut stats = RunningStats::default();
            for _ in 0..count {
                stats.push(sampler.sample_entropy(&mut rng));
            }
            stats
        })
        .collect();
    let mut total = RunningStats::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(McEstimate { mean: total.mean(), std_error: total.std_error(), samples: total.count(), seed: cfg.seed })
}
