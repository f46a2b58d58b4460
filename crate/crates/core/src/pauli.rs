//! Single-qubit Paulis (up to phase) and Pauli strings.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Single-qubit Pauli operator modulo phase. The discriminant is the index
/// used for `(p_I, p_X, p_Y, p_Z)` vectors throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i & 3]
    }

    /// Symplectic `(x, z)` bits.
    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Product modulo phase (`X * Z = Y`).
    #[inline]
    pub fn mul(self, other: Pauli) -> Pauli {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        Pauli::from_bits(ax ^ bx, az ^ bz)
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax & bz) ^ (az & bx)
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' | 'i' | '_' | '.' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("unknown Pauli symbol {other:?}"))),
        }
    }
}

/// Tensor product of single-qubit Paulis, phase discarded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.len() != other.len() {
            return Err(Error::Domain(format!(
                "Pauli string length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(PauliString(self.0.iter().zip(&other.0).map(|(a, b)| a.mul(*b)).collect()))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| a.anticommutes(**b))
            .count()
            % 2
            == 0
    }

    /// Replace every qubit of `self` by the block operator `block_x`, `block_z`
    /// or their product, yielding a string on `len * block_len` qubits.
    pub fn expand_encoded(&self, block_x: &PauliString, block_z: &PauliString) -> Result<PauliString> {
        if block_x.len() != block_z.len() {
            return Err(Error::Domain("encoded operators differ in length".into()));
        }
        let m = block_x.len();
        let mut out = Vec::with_capacity(self.len() * m);
        for p in &self.0 {
            let (x, z) = p.bits();
            for q in 0..m {
                let mut acc = Pauli::I;
                if x {
                    acc = acc.mul(block_x.0[q]);
                }
                if z {
                    acc = acc.mul(block_z.0[q]);
                }
                out.push(acc);
            }
        }
        Ok(PauliString(out))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '⊗')
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_modulo_phase() {
        assert_eq!(Pauli::X.mul(Pauli::Z), Pauli::Y);
        assert_eq!(Pauli::Y.mul(Pauli::Y), Pauli::I);
        assert!(Pauli::X.anticommutes(Pauli::Y));
        assert!(!Pauli::Z.anticommutes(Pauli::Z));
    }

    #[test]
    fn parse_and_display() {
        let s: PauliString = "XZZXI".parse().unwrap();
        assert_eq!(s.to_string(), "XZZXI");
        assert_eq!(s.weight(), 4);
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation_of_strings() {
        let a: PauliString = "XZZXI".parse().unwrap();
        let b: PauliString = "XXXXX".parse().unwrap();
        let c: PauliString = "ZZZZZ".parse().unwrap();
        assert!(a.commutes_with(&b));
        assert!(!b.commutes_with(&c));
    }
}
