use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::repetition::{Orientation, RepCodeSpec};
use crate::stabilizer::{shared_five_qubit_code, StabilizerCode};

/// One level of a concatenated code.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelSpec {
    Repetition(RepCodeSpec),
    FiveQubit,
    Stabilizer(Arc<StabilizerCode>),
}

impl LevelSpec {
    pub fn rep(n: usize, orientation: Orientation) -> Result<Self> {
        Ok(LevelSpec::Repetition(RepCodeSpec::new(n, orientation)?))
    }

    /// Number of lower-level blocks combined by this level.
    pub fn size(&self) -> usize {
        match self {
            LevelSpec::Repetition(r) => r.n,
            LevelSpec::FiveQubit => 5,
            LevelSpec::Stabilizer(c) => c.n(),
        }
    }

    /// The stabilizer code used for this level, if it is not a repetition code.
    pub fn stabilizer_code(&self) -> Option<Arc<StabilizerCode>> {
        match self {
            LevelSpec::Repetition(_) => None,
            LevelSpec::FiveQubit => Some(shared_five_qubit_code()),
            LevelSpec::Stabilizer(c) => Some(c.clone()),
        }
    }

    fn text_line(&self) -> String {
        match self {
            LevelSpec::Repetition(r) => format!("rep {} {}", r.n, r.orientation),
            LevelSpec::FiveQubit => "five513".to_string(),
            LevelSpec::Stabilizer(c) => {
                let n = c.n();
                let gens: Vec<String> = c.generators().iter().map(|g| g.to_pauli_string(n).to_string()).collect();
                format!(
                    "stabilizer {} {} {}",
                    gens.join(","),
                    c.logical_x().to_pauli_string(n),
                    c.logical_z().to_pauli_string(n)
                )
            }
        }
    }

    fn short(&self) -> String {
        match self {
            LevelSpec::Repetition(r) => format!("rep{}{}", r.n, r.orientation),
            LevelSpec::FiveQubit => "five513".to_string(),
            LevelSpec::Stabilizer(c) => format!("stab{}", c.n()),
        }
    }
}

/// An ordered list of code levels; level 0 acts on the physical qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeStack {
    levels: Vec<LevelSpec>,
}

impl CodeStack {
    pub fn new(levels: Vec<LevelSpec>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidCode("a code stack needs at least one level".into()));
        }
        Ok(CodeStack { levels })
    }

    pub fn repetition(n: usize, orientation: Orientation) -> Result<Self> {
        Self::new(vec![LevelSpec::rep(n, orientation)?])
    }

    /// Bit-flip code of `n1` qubits inside a phase-flip code of `n2` blocks.
    pub fn n1_in_n2(n1: usize, n2: usize) -> Result<Self> {
        Self::new(vec![LevelSpec::rep(n1, Orientation::BitFlip)?, LevelSpec::rep(n2, Orientation::PhaseFlip)?])
    }

    pub fn five_qubit(levels: usize) -> Result<Self> {
        Self::new(vec![LevelSpec::FiveQubit; levels])
    }

    /// Append `j` levels of the five-qubit code.
    pub fn then_five_qubit(mut self, j: usize) -> Self {
        self.levels.extend(std::iter::repeat_n(LevelSpec::FiveQubit, j));
        self
    }

    pub fn push(mut self, level: LevelSpec) -> Self {
        self.levels.push(level);
        self
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Physical qubits per logical qubit (as a float; it grows quickly).
    pub fn physical_qubits(&self) -> f64 {
        self.levels.iter().map(|l| l.size() as f64).product()
    }

    /// Number of trailing five-qubit levels.
    pub fn trailing_five_qubit(&self) -> usize {
        self.levels.iter().rev().take_while(|l| matches!(l, LevelSpec::FiveQubit)).count()
    }

    /// The first `k` levels.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        Self::new(self.levels[..k.min(self.levels.len())].to_vec())
    }

    /// Merge adjacent repetition levels of equal orientation into one level
    /// of the product size; both generate the same stabilizer group.
    pub fn fused(&self) -> CodeStack {
        let mut out: Vec<LevelSpec> = Vec::with_capacity(self.levels.len());
        for level in &self.levels {
            if let (Some(LevelSpec::Repetition(prev)), LevelSpec::Repetition(cur)) = (out.last_mut(), level) {
                if prev.orientation == cur.orientation {
                    prev.n *= cur.n;
                    continue;
                }
            }
            out.push(level.clone());
        }
        CodeStack { levels: out }
    }

    /// One level per line, e.g. `rep 5 bit`, `rep 2 phase`, `five513`.
    pub fn to_text(&self) -> String {
        self.levels.iter().map(|l| l.text_line() + "\n").collect()
    }

    /// Parse the line format. A trailing `x<k>` repeats a line `k` times and
    /// `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut levels = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words: Vec<&str> = line.split_whitespace().collect();
            let mut repeat = 1usize;
            if let Some(last) = words.last() {
                if let Some(k) = last.strip_prefix(['x', '*']).and_then(|k| k.parse::<usize>().ok()) {
                    repeat = k;
                    words.pop();
                }
            }
            let level = match words.as_slice() {
                ["rep" | "repetition", n, o] => LevelSpec::rep(parse_usize(n)?, o.parse()?)?,
                ["five513" | "513" | "five"] => LevelSpec::FiveQubit,
                ["stabilizer" | "stab", gens, lx, lz] => {
                    let gens = gens.split(',').map(str::parse).collect::<Result<Vec<PauliString>>>()?;
                    LevelSpec::Stabilizer(Arc::new(StabilizerCode::new(gens, lx.parse()?, lz.parse()?)?))
                }
                _ => return Err(Error::Parse(format!("cannot parse stack line {line:?}"))),
            };
            levels.extend(std::iter::repeat_n(level, repeat));
        }
        Self::new(levels)
    }

    /// Parse the compact form: `+`-separated items such as `rep5bit`,
    /// `rep2phasex6`, `5in64`, `five513x6`.
    pub fn parse_shorthand(s: &str) -> Result<Self> {
        let mut levels = Vec::new();
        for item in s.split(['+', ';']).map(str::trim).filter(|t| !t.is_empty()) {
            let item = item.to_ascii_lowercase();
            let (body, repeat) = split_repeat(&item)?;
            let mut chunk = Vec::new();
            if body == "five513" || body == "513" || body == "five" {
                chunk.push(LevelSpec::FiveQubit);
            } else if let Some(rest) = body.strip_prefix("rep") {
                let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
                let orient = &rest[digits.len()..];
                let orient = if orient.is_empty() { "bit" } else { orient };
                chunk.push(LevelSpec::rep(parse_usize(&digits)?, orient.parse()?)?);
            } else if let Some((a, b)) = body.split_once("in") {
                chunk.push(LevelSpec::rep(parse_usize(a)?, Orientation::BitFlip)?);
                chunk.push(LevelSpec::rep(parse_usize(b)?, Orientation::PhaseFlip)?);
            } else {
                return Err(Error::Parse(format!("unknown stack item {item:?}")));
            }
            for _ in 0..repeat {
                levels.extend(chunk.iter().cloned());
            }
        }
        Self::new(levels)
    }
}

fn split_repeat(item: &str) -> Result<(&str, usize)> {
    if let Some(pos) = item.rfind(['x', '*']) {
        let tail = &item[pos + 1..];
        if !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit()) {
            return Ok((&item[..pos], parse_usize(tail)?));
        }
    }
    Ok((item, 1))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| Error::Parse(format!("expected a positive integer, got {s:?}")))
}

impl FromStr for CodeStack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains('\n') || s.trim_start().starts_with("rep ") || s.trim_start().starts_with("stab") {
            Self::parse_text(s)
        } else {
            Self::parse_shorthand(s)
        }
    }
}

impl fmt::Display for CodeStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<(String, usize)> = Vec::new();
        for l in &self.levels {
            let s = l.short();
            match items.last_mut() {
                Some((prev, k)) if *prev == s => *k += 1,
                _ => items.push((s, 1)),
            }
        }
        let parts: Vec<String> =
            items.into_iter().map(|(s, k)| if k == 1 { s } else { format!("{s}x{k}") }).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Total recovery on the concatenated qubits: the inner recovery times the
/// outer recovery expanded through the inner encoded operators.
pub fn combine_recovery(
    inner: &PauliString,
    outer: &PauliString,
    encoded_x: &PauliString,
    encoded_z: &PauliString,
) -> Result<PauliString> {
    inner.mul(&outer.expand_encoded(encoded_x, encoded_z)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_recovery_example() {
        let inner: PauliString = "IIIXIX".parse().unwrap();
        let outer: PauliString = "IIZ".parse().unwrap();
        let ex: PauliString = "XX".parse().unwrap();
        let ez: PauliString = "IZ".parse().unwrap();
        assert_eq!(combine_recovery(&inner, &outer, &ex, &ez).unwrap().to_string(), "IIIXIY");
        let id = PauliString::identity(3);
        assert_eq!(combine_recovery(&inner, &id, &ex, &ez).unwrap(), inner);
        let total = combine_recovery(&inner, &outer, &ex, &ez).unwrap();
        assert!(total.mul(&total).unwrap().is_identity());
        assert!(combine_recovery(&inner, &outer, &ex, &"Z".parse().unwrap()).is_err());
    }

    #[test]
    fn shorthand_and_text_agree() {
        let a: CodeStack = "5in64+five513x2".parse().unwrap();
        let b = CodeStack::parse_text("rep 5 bit\nrep 64 phase\nfive513 x2\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trailing_five_qubit(), 2);
        assert_eq!(a.physical_qubits(), 5.0 * 64.0 * 25.0);
        let c: CodeStack = "rep5bit+rep2phasex6".parse().unwrap();
        assert_eq!(c.depth(), 7);
        assert_eq!(c.fused(), CodeStack::n1_in_n2(5, 64).unwrap());
        assert_eq!(c.to_string(), "rep5bit+rep2phasex6");
        assert_eq!(CodeStack::parse_text(&c.to_text()).unwrap(), c);
        assert!("rep0bit".parse::<CodeStack>().is_err());
        assert!("".parse::<CodeStack>().is_err());
        assert!("banana".parse::<CodeStack>().is_err());
    }

    #[test]
    fn custom_stabilizer_line() {
        let s = CodeStack::parse_text("stabilizer ZZI,IZZ XXX ZII\n").unwrap();
        assert_eq!(s.levels()[0].size(), 3);
        assert_eq!(CodeStack::parse_text(&s.to_text()).unwrap(), s);
    }
}
