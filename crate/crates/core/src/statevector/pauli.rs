use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// True when the two single-qubit Paulis anticommute.
    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }
}

/// Tensor product of single-qubit Paulis; identity on unlisted qubits.
///
/// Stored sorted by qubit with identity factors dropped, so two strings that
/// act identically compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self::new([(qubit, p)]).expect("single factor is always valid")
    }

    /// Builds a string from `(qubit, letter)` factors. Repeated qubits are rejected.
    pub fn new(factors: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut ops: Vec<(usize, Pauli)> = factors
            .into_iter()
            .filter(|(_, p)| *p != Pauli::I)
            .collect();
        ops.sort_by_key(|(q, _)| *q);
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Argument("repeated qubit in Pauli string".into()));
        }
        Ok(Self { ops })
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.ops.last().map(|(q, _)| *q)
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.ops
            .iter()
            .find(|(q, _)| *q == qubit)
            .map_or(Pauli::I, |(_, p)| *p)
    }

    /// Shifts every factor by `offset` qubits.
    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            ops: self.ops.iter().map(|&(q, p)| (q + offset, p)).collect(),
        }
    }

    /// True if only I and Z factors appear (diagonal in the computational basis).
    pub fn is_diagonal(&self) -> bool {
        self.ops.iter().all(|(_, p)| matches!(p, Pauli::Z))
    }

    /// Bit masks `(flip, phase, n_y)`: P|x> = i^{n_y} (-1)^{popcount(x & phase)} |x ^ flip>.
    pub(crate) fn masks(&self) -> (usize, usize, u32) {
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut n_y = 0u32;
        for &(q, p) in &self.ops {
            let bit = 1usize << q;
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    n_y += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, n_y)
    }

    /// Parses a site-labelled string such as `Z1Z2` or `X3`. Sites are 1-based;
    /// the result is indexed by 0-based qubit.
    pub fn parse_sites(s: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("cannot parse Pauli string '{s}'"));
        let chars: Vec<char> = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(bad());
        }
        let mut factors = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let p = Pauli::from_letter(chars[i]).ok_or_else(bad)?;
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(bad());
            }
            let site: usize = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| bad())?;
            if site == 0 {
                return Err(bad());
            }
            factors.push((site - 1, p));
        }
        Self::new(factors)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (q, p) in &self.ops {
            write!(f, "{}{}", p.letter(), q + 1)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("I") {
            return Ok(Self::identity());
        }
        Self::parse_sites(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_roundtrip() {
        let p: PauliString = "Z1Z2".parse().unwrap();
        assert_eq!(p.factors(), &[(0, Pauli::Z), (1, Pauli::Z)]);
        assert_eq!(p.to_string(), "Z1Z2");
        let q: PauliString = "x13".parse().unwrap();
        assert_eq!(q.factors(), &[(12, Pauli::X)]);
        assert!("Q1".parse::<PauliString>().is_err());
        assert!("Z0".parse::<PauliString>().is_err());
        assert!("Z1X1".parse::<PauliString>().is_err());
        assert!("I".parse::<PauliString>().unwrap().is_identity());
    }

    #[test]
    fn identity_factors_are_dropped() {
        let p = PauliString::new([(3, Pauli::I), (1, Pauli::X)]).unwrap();
        assert_eq!(p.weight(), 1);
        assert_eq!(p.get(3), Pauli::I);
        assert_eq!(p.get(1), Pauli::X);
    }

    #[test]
    fn anticommutation_table() {
        let n = Pauli::ALL
            .iter()
            .flat_map(|a| Pauli::ALL.iter().map(move |b| a.anticommutes(*b)))
            .filter(|x| *x)
            .count();
        assert_eq!(n, 6);
    }
}
