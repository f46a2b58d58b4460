//! Single-logical-qubit stabilizer codes in the binary symplectic
//! representation, with exhaustive syndrome enumeration for small codes.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{shannon_entropy, PauliChannel};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::pauli::{Pauli, PauliString};
use crate::repetition::Orientation;

/// Largest code size accepted for exhaustive `4^n` work.
pub const MAX_ENUMERATION_QUBITS: usize = 12;

/// A Pauli string packed into `x` and `z` bit masks (qubit `i` is bit `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Symplectic {
    pub x: u32,
    pub z: u32,
}

impl Symplectic {
    pub const IDENTITY: Symplectic = Symplectic { x: 0, z: 0 };

    pub fn from_pauli_string(s: &PauliString) -> Result<Self> {
        if s.len() > 32 {
            return Err(Error::InvalidCode(format!("{} qubits exceed the 32-qubit packing", s.len())));
        }
        let mut out = Symplectic::IDENTITY;
        for (i, p) in s.0.iter().enumerate() {
            out = out.with_qubit(i, *p);
        }
        Ok(out)
    }

    pub fn to_pauli_string(self, n: usize) -> PauliString {
        PauliString((0..n).map(|i| self.qubit(i)).collect())
    }

    /// Decode an index in `0..4^n` whose base-4 digits are the per-qubit Paulis.
    #[inline]
    pub fn from_index(mut e: u64, n: usize) -> Self {
        let mut out = Symplectic::IDENTITY;
        for i in 0..n {
            out = out.with_qubit(i, Pauli::from_index((e & 3) as usize));
            e >>= 2;
        }
        out
    }

    #[inline]
    pub fn qubit(self, i: usize) -> Pauli {
        Pauli::from_bits((self.x >> i) & 1 == 1, (self.z >> i) & 1 == 1)
    }

    #[inline]
    pub fn with_qubit(self, i: usize, p: Pauli) -> Self {
        let (x, z) = p.bits();
        let mask = !(1u32 << i);
        Symplectic { x: (self.x & mask) | ((x as u32) << i), z: (self.z & mask) | ((z as u32) << i) }
    }

    #[inline]
    pub fn mul(self, other: Symplectic) -> Symplectic {
        Symplectic { x: self.x ^ other.x, z: self.z ^ other.z }
    }

    #[inline]
    pub fn anticommutes(self, other: Symplectic) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) & 1 == 1
    }

    pub fn weight(self) -> u32 {
        (self.x | self.z).count_ones()
    }
}

/// An `[[n,1]]` stabilizer code with a fixed syndrome lookup recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCode {
    n: usize,
    generators: Vec<Symplectic>,
    logical_x: Symplectic,
    logical_z: Symplectic,
    recovery: Vec<Symplectic>,
    /// All `2^(n-1)` stabilizer group elements, indexed by generator subset.
    group: Vec<Symplectic>,
}

impl StabilizerCode {
    /// Validate the generators and logicals and build a minimum-weight
    /// recovery table (ties go to the lowest base-4 error index).
    pub fn new(generators: Vec<PauliString>, logical_x: PauliString, logical_z: PauliString) -> Result<Self> {
        let n = logical_x.len();
        if n == 0 || n > MAX_ENUMERATION_QUBITS {
            return Err(Error::InvalidCode(format!(
                "code size {n} outside 1..={MAX_ENUMERATION_QUBITS}"
            )));
        }
        if generators.len() + 1 != n {
            return Err(Error::InvalidCode(format!(
                "{n} qubits need {} generators, got {}",
                n - 1,
                generators.len()
            )));
        }
        for g in generators.iter().chain([&logical_z]) {
            if g.len() != n {
                return Err(Error::InvalidCode(format!("operator {g} has length {} not {n}", g.len())));
            }
        }
        let gens = generators.iter().map(Symplectic::from_pauli_string).collect::<Result<Vec<_>>>()?;
        let lx = Symplectic::from_pauli_string(&logical_x)?;
        let lz = Symplectic::from_pauli_string(&logical_z)?;
        let table = min_weight_table(n, &gens)?;
        Self::with_recovery(gens, lx, lz, table)
    }

    /// Build from packed operators and an explicit recovery table.
    pub fn with_recovery(
        generators: Vec<Symplectic>,
        logical_x: Symplectic,
        logical_z: Symplectic,
        recovery: Vec<Symplectic>,
    ) -> Result<Self> {
        let n = generators.len() + 1;
        if n > MAX_ENUMERATION_QUBITS {
            return Err(Error::InvalidCode(format!("code size {n} exceeds {MAX_ENUMERATION_QUBITS}")));
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if a.anticommutes(*b) {
                    return Err(Error::InvalidCode("generators do not commute".into()));
                }
            }
            if a.anticommutes(logical_x) || a.anticommutes(logical_z) {
                return Err(Error::InvalidCode("logical operator anticommutes with a generator".into()));
            }
        }
        if !logical_x.anticommutes(logical_z) {
            return Err(Error::InvalidCode("logical X and Z must anticommute".into()));
        }
        let mut group = Vec::with_capacity(1 << (n - 1));
        for mask in 0u32..(1 << (n - 1)) {
            let mut g = Symplectic::IDENTITY;
            for (j, gen) in generators.iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    g = g.mul(*gen);
                }
            }
            group.push(g);
        }
        let mut seen = group.clone();
        seen.sort_by_key(|s| (s.x, s.z));
        seen.dedup();
        if seen.len() != group.len() {
            return Err(Error::InvalidCode("generators are not independent".into()));
        }
        let code = StabilizerCode { n, generators, logical_x, logical_z, recovery, group };
        if code.recovery.len() != 1 << (n - 1) {
            return Err(Error::InvalidCode(format!(
                "recovery table has {} entries, expected {}",
                code.recovery.len(),
                1 << (n - 1)
            )));
        }
        for (s, r) in code.recovery.iter().enumerate() {
            if code.syndrome(*r) as usize != s {
                return Err(Error::InvalidCode(format!("recovery entry {s} has the wrong syndrome")));
            }
        }
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Symplectic] {
        &self.generators
    }

    pub fn logical_x(&self) -> Symplectic {
        self.logical_x
    }

    pub fn logical_z(&self) -> Symplectic {
        self.logical_z
    }

    pub fn recovery(&self, syndrome: u32) -> Symplectic {
        self.recovery[syndrome as usize]
    }

    pub fn recovery_table(&self) -> &[Symplectic] {
        &self.recovery
    }

    pub fn num_syndromes(&self) -> usize {
        self.recovery.len()
    }

    pub fn stabilizer_group(&self) -> &[Symplectic] {
        &self.group
    }

    /// Logical representative of `p`: `I`, `logical_x`, `logical_x * logical_z` or `logical_z`.
    pub fn logical_operator(&self, p: Pauli) -> Symplectic {
        let (x, z) = p.bits();
        let mut out = Symplectic::IDENTITY;
        if x {
            out = out.mul(self.logical_x);
        }
        if z {
            out = out.mul(self.logical_z);
        }
        out
    }

    /// Syndrome bits, little-endian in generator order.
    #[inline]
    pub fn syndrome(&self, e: Symplectic) -> u32 {
        let mut s = 0u32;
        for (i, g) in self.generators.iter().enumerate() {
            s |= (g.anticommutes(e) as u32) << i;
        }
        s
    }

    /// Logical class of an operator in the normaliser, read off by
    /// commutation with the logical operators.
    #[inline]
    pub fn logical_class(&self, f: Symplectic) -> Pauli {
        Pauli::from_bits(f.anticommutes(self.logical_z), f.anticommutes(self.logical_x))
    }

    /// Syndrome of `e` and the logical error left after the table recovery.
    #[inline]
    pub fn decode(&self, e: Symplectic) -> (u32, Pauli) {
        let s = self.syndrome(e);
        (s, self.logical_class(e.mul(self.recovery[s as usize])))
    }

    /// Replace one recovery entry by its product with a logical operator.
    pub fn relabel_recovery(&mut self, syndrome: u32, logical: Pauli) {
        let op = self.logical_operator(logical);
        let r = &mut self.recovery[syndrome as usize];
        *r = r.mul(op);
    }

    /// Probability of `syndrome` and the logical channel conditioned on it,
    /// for independent per-qubit channels, by summing over the coset.
    pub fn syndrome_conditional(&self, syndrome: u32, channels: &[PauliChannel]) -> (f64, [f64; 4]) {
        let r = self.recovery[syndrome as usize];
        let mut l = [0.0; 4];
        for (sigma, slot) in l.iter_mut().enumerate() {
            let base = r.mul(self.logical_operator(Pauli::from_index(sigma)));
            let mut acc = 0.0;
            for g in &self.group {
                let e = base.mul(*g);
                let mut prob = 1.0;
                for (i, c) in channels.iter().enumerate() {
                    prob *= c.get(e.qubit(i));
                }
                acc += prob;
            }
            *slot = acc;
        }
        (l.iter().sum(), l)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.generators {
            out.push_str(&g.to_pauli_string(self.n).to_string());
            out.push('\n');
        }
        out.push_str(&format!("logical_x {}\n", self.logical_x.to_pauli_string(self.n)));
        out.push_str(&format!("logical_z {}\n", self.logical_z.to_pauli_string(self.n)));
        out
    }

    /// Parse the text format: one generator per line, plus `logical_x ...`
    /// and `logical_z ...` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut gens = Vec::new();
        let (mut lx, mut lz) = (None, None);
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lower = line.to_ascii_lowercase();
            if let Some(rest) = strip_key(&lower, line, &["logical_x", "x_l", "lx"]) {
                lx = Some(rest.parse::<PauliString>()?);
            } else if let Some(rest) = strip_key(&lower, line, &["logical_z", "z_l", "lz"]) {
                lz = Some(rest.parse::<PauliString>()?);
            } else {
                gens.push(line.parse::<PauliString>()?);
            }
        }
        let lx = lx.ok_or_else(|| Error::Parse("missing logical_x line".into()))?;
        let lz = lz.ok_or_else(|| Error::Parse("missing logical_z line".into()))?;
        StabilizerCode::new(gens, lx, lz)
    }
}

fn strip_key<'a>(lower: &str, line: &'a str, keys: &[&str]) -> Option<&'a str> {
    for k in keys {
        if lower.starts_with(k) {
            let rest = &line[k.len()..];
            let rest = rest.trim_start_matches([' ', '\t', ':', '=']);
            return Some(rest);
        }
    }
    None
}

impl fmt::Display for StabilizerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},1]]", self.n)
    }
}

fn min_weight_table(n: usize, gens: &[Symplectic]) -> Result<Vec<Symplectic>> {
    let size = 1usize << (n - 1);
    let mut best: Vec<Option<(u32, Symplectic)>> = vec![None; size];
    let mut filled = 0usize;
    for e in 0..(1u64 << (2 * n)) {
        let err = Symplectic::from_index(e, n);
        let mut s = 0usize;
        for (i, g) in gens.iter().enumerate() {
            s |= (g.anticommutes(err) as usize) << i;
        }
        let w = err.weight();
        match best[s] {
            None => {
                best[s] = Some((w, err));
                filled += 1;
            }
            Some((bw, _)) if w < bw => best[s] = Some((w, err)),
            _ => {}
        }
    }
    if filled != size {
        return Err(Error::InvalidCode("some syndromes are unreachable".into()));
    }
    Ok(best.into_iter().map(|b| b.expect("filled").1).collect())
}

/// The cyclic five-qubit code: generators `XZZXI` and its shifts,
/// logical `X = XXXXX`, `Z = ZZZZZ`, minimum-weight recovery.
pub fn build_five_qubit_code() -> StabilizerCode {
    let gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
        .iter()
        .map(|s| s.parse().expect("static generator"))
        .collect();
    StabilizerCode::new(gens, "XXXXX".parse().expect("static"), "ZZZZZ".parse().expect("static"))
        .expect("five-qubit code is valid")
}

/// Process-wide instance of [`build_five_qubit_code`].
pub fn shared_five_qubit_code() -> Arc<StabilizerCode> {
    static CODE: OnceLock<Arc<StabilizerCode>> = OnceLock::new();
    CODE.get_or_init(|| Arc::new(build_five_qubit_code())).clone()
}

/// Repetition code as a stabilizer code with majority-vote recovery; on a
/// tie the pattern leaving qubit 0 untouched is chosen.
pub fn build_repetition_stabilizer(n: usize, orientation: Orientation) -> Result<StabilizerCode> {
    if !(2..=9).contains(&n) {
        return Err(Error::Domain(format!("repetition stabilizer size {n} outside 2..=9")));
    }
    let (check, flip) = match orientation {
        Orientation::BitFlip => (Pauli::Z, Pauli::X),
        Orientation::PhaseFlip => (Pauli::X, Pauli::Z),
    };
    let gens: Vec<Symplectic> = (0..n - 1)
        .map(|i| Symplectic::IDENTITY.with_qubit(i, check).with_qubit(i + 1, check))
        .collect();
    let all = |p: Pauli| (0..n).fold(Symplectic::IDENTITY, |acc, i| acc.with_qubit(i, p));
    let (lx, lz) = match orientation {
        Orientation::BitFlip => (all(Pauli::X), Symplectic::IDENTITY.with_qubit(0, Pauli::Z)),
        Orientation::PhaseFlip => (Symplectic::IDENTITY.with_qubit(0, Pauli::X), all(Pauli::Z)),
    };
    let mut recovery = vec![Symplectic::IDENTITY; 1 << (n - 1)];
    for pattern in 0u32..(1 << n) {
        let flips = pattern.count_ones() as usize;
        if 2 * flips > n || (2 * flips == n && pattern & 1 == 1) {
            continue;
        }
        let op = (0..n)
            .filter(|i| (pattern >> i) & 1 == 1)
            .fold(Symplectic::IDENTITY, |acc, i| acc.with_qubit(i, flip));
        let mut s = 0usize;
        for (i, g) in gens.iter().enumerate() {
            s |= (g.anticommutes(op) as usize) << i;
        }
        recovery[s] = op;
    }
    StabilizerCode::with_recovery(gens, lx, lz, recovery)
}

/// One syndrome of a code together with its probability and the logical
/// channel conditioned on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyndromeOutcome {
    pub syndrome: u32,
    pub probability: f64,
    pub conditional: PauliChannel,
}

fn check_channels(code: &StabilizerCode, channels: &[PauliChannel]) -> Result<()> {
    if channels.len() != code.n() {
        return Err(Error::Domain(format!(
            "{} channels supplied for a {}-qubit code",
            channels.len(),
            code.n()
        )));
    }
    Ok(())
}

/// Exhaustive enumeration of all `4^n` errors. Only syndromes of non-zero
/// probability are returned, ordered by syndrome id.
pub fn enumerate_outcomes(code: &StabilizerCode, channels: &[PauliChannel]) -> Result<Vec<SyndromeOutcome>> {
    check_channels(code, channels)?;
    let n = code.n();
    let total = 1u64 << (2 * n);
    let chunks = 64u64.min(total);
    let per = total / chunks;
    let parts: Vec<Vec<[KahanSum; 4]>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![[KahanSum::new(); 4]; code.num_syndromes()];
            for e in c * per..(c + 1) * per {
                let err = Symplectic::from_index(e, n);
                let mut prob = 1.0;
                for (i, ch) in channels.iter().enumerate() {
                    prob *= ch.get(err.qubit(i));
                }
                if prob == 0.0 {
                    continue;
                }
                let (s, l) = code.decode(err);
                acc[s as usize][l.index()].add(prob);
            }
            acc
        })
        .collect();
    let mut merged = vec![[KahanSum::new(); 4]; code.num_syndromes()];
    for part in &parts {
        for (m, p) in merged.iter_mut().zip(part) {
            for k in 0..4 {
                m[k].merge(&p[k]);
            }
        }
    }
    let mut out = Vec::new();
    for (s, sums) in merged.iter().enumerate() {
        let l = sums.map(|k| k.value());
        let prob: f64 = l.iter().sum();
        if prob > 0.0 {
            out.push(SyndromeOutcome {
                syndrome: s as u32,
                probability: prob,
                conditional: PauliChannel::from_weights(l)?,
            });
        }
    }
    Ok(out)
}

/// Syndrome-averaged Shannon entropy of the logical channel.
pub fn average_entropy_stab(code: &StabilizerCode, channels: &[PauliChannel]) -> Result<f64> {
    Ok(enumerate_outcomes(code, channels)?
        .iter()
        .map(|o| o.probability * shannon_entropy(&o.conditional))
        .collect::<KahanSum>()
        .value())
}

/// Draw a Pauli from `c` with one uniform variate.
#[inline]
pub fn sample_pauli<R: Rng + ?Sized>(c: &PauliChannel, rng: &mut R) -> Pauli {
    let u: f64 = rng.random();
    let p = c.as_array();
    let mut acc = p[0];
    if u < acc {
        return Pauli::I;
    }
    acc += p[1];
    if u < acc {
        return Pauli::X;
    }
    acc += p[2];
    if u < acc {
        return Pauli::Y;
    }
    Pauli::Z
}

/// Draw one syndrome from its exact distribution: a Pauli is drawn for each
/// qubit and its syndrome's conditional channel is computed over the coset.
pub fn sample_outcome<R: Rng + ?Sized>(
    code: &StabilizerCode,
    channels: &[PauliChannel],
    rng: &mut R,
) -> Result<SyndromeOutcome> {
    check_channels(code, channels)?;
    let mut e = Symplectic::IDENTITY;
    for (i, c) in channels.iter().enumerate() {
        e = e.with_qubit(i, sample_pauli(c, rng));
    }
    let s = code.syndrome(e);
    let (probability, l) = code.syndrome_conditional(s, channels);
    Ok(SyndromeOutcome { syndrome: s, probability, conditional: PauliChannel::from_weights(l)? })
}
