use serde::{Deserialize, Serialize};

use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};

/// A gate from the supported set.
///
/// Rotation conventions: `Rx(θ) = e^{-iθX/2}`, `Rz(θ) = e^{-iθZ/2}`,
/// `Zz(θ) = e^{-iθ Z⊗Z/2}`, `SwapRot(θ) = e^{-iθ SWAP} = cos θ I - i sin θ SWAP`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, theta: f64 },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Zz { q1: usize, q2: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    SwapRot { q1: usize, q2: usize, theta: f64 },
    Pauli(PauliString),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => {
                vec![*qubit]
            }
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![*q],
            Gate::Zz { q1, q2, .. } | Gate::SwapRot { q1, q2, .. } => vec![*q1, *q2],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Pauli(p) => p.factors().iter().map(|(q, _)| *q).collect(),
        }
    }

    /// Entangling gates as counted by causal-cone bookkeeping.
    pub fn is_two_qubit(&self) -> bool {
        self.qubits().len() == 2
    }

    pub fn angle(&self) -> f64 {
        match self {
            Gate::Rx { theta, .. }
            | Gate::Ry { theta, .. }
            | Gate::Rz { theta, .. }
            | Gate::Zz { theta, .. }
            | Gate::SwapRot { theta, .. } => *theta,
            _ => 0.0,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::Argument(format!(
                    "qubit {q} out of range for {n_qubits}-qubit register"
                )));
            }
            if qs[..i].contains(&q) {
                return Err(Error::Argument(format!("qubit {q} used twice in one gate")));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        match self.clone() {
            Gate::Rx { qubit, theta } => Gate::Rx { qubit, theta: -theta },
            Gate::Ry { qubit, theta } => Gate::Ry { qubit, theta: -theta },
            Gate::Rz { qubit, theta } => Gate::Rz { qubit, theta: -theta },
            Gate::Zz { q1, q2, theta } => Gate::Zz { q1, q2, theta: -theta },
            Gate::SwapRot { q1, q2, theta } => Gate::SwapRot { q1, q2, theta: -theta },
            g => g,
        }
    }

    /// Elementwise complex conjugate of the gate matrix.
    ///
    /// Exact for every kind except `Y` and Pauli strings with an odd number of
    /// Y factors, where the result is off by a global sign.
    pub fn conjugate(&self) -> Gate {
        match self.clone() {
            Gate::Rx { qubit, theta } => Gate::Rx { qubit, theta: -theta },
            Gate::Rz { qubit, theta } => Gate::Rz { qubit, theta: -theta },
            Gate::Zz { q1, q2, theta } => Gate::Zz { q1, q2, theta: -theta },
            Gate::SwapRot { q1, q2, theta } => Gate::SwapRot { q1, q2, theta: -theta },
            g => g,
        }
    }

    pub fn shifted(&self, offset: usize) -> Gate {
        match self.clone() {
            Gate::Rx { qubit, theta } => Gate::Rx { qubit: qubit + offset, theta },
            Gate::Ry { qubit, theta } => Gate::Ry { qubit: qubit + offset, theta },
            Gate::Rz { qubit, theta } => Gate::Rz { qubit: qubit + offset, theta },
            Gate::H(q) => Gate::H(q + offset),
            Gate::X(q) => Gate::X(q + offset),
            Gate::Y(q) => Gate::Y(q + offset),
            Gate::Z(q) => Gate::Z(q + offset),
            Gate::Zz { q1, q2, theta } => Gate::Zz { q1: q1 + offset, q2: q2 + offset, theta },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: control + offset,
                target: target + offset,
            },
            Gate::SwapRot { q1, q2, theta } => Gate::SwapRot {
                q1: q1 + offset,
                q2: q2 + offset,
                theta,
            },
            Gate::Pauli(p) => Gate::Pauli(p.shifted(offset)),
        }
    }

    fn kind(&self) -> String {
        match self {
            Gate::Rx { .. } => "rx".into(),
            Gate::Ry { .. } => "ry".into(),
            Gate::Rz { .. } => "rz".into(),
            Gate::H(_) => "h".into(),
            Gate::X(_) => "x".into(),
            Gate::Y(_) => "y".into(),
            Gate::Z(_) => "z".into(),
            Gate::Zz { .. } => "zz".into(),
            Gate::Cnot { .. } => "cnot".into(),
            Gate::SwapRot { .. } => "swap_rot".into(),
            Gate::Pauli(p) => {
                let letters: String = p.factors().iter().map(|(_, l)| l.letter()).collect();
                format!("pauli_{letters}")
            }
        }
    }
}

/// Flat `{kind, qubits, angle}` record used for JSON circuit dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    pub angle: f64,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        GateRecord {
            kind: g.kind(),
            qubits: g.qubits(),
            angle: g.angle(),
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = Error;

    fn try_from(r: GateRecord) -> Result<Gate> {
        let one = |r: &GateRecord| -> Result<usize> {
            match r.qubits.as_slice() {
                [q] => Ok(*q),
                _ => Err(Error::Argument(format!("{} expects one qubit", r.kind))),
            }
        };
        let two = |r: &GateRecord| -> Result<(usize, usize)> {
            match r.qubits.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(Error::Argument(format!("{} expects two qubits", r.kind))),
            }
        };
        let theta = r.angle;
        Ok(match r.kind.as_str() {
            "rx" => Gate::Rx { qubit: one(&r)?, theta },
            "ry" => Gate::Ry { qubit: one(&r)?, theta },
            "rz" => Gate::Rz { qubit: one(&r)?, theta },
            "h" => Gate::H(one(&r)?),
            "x" => Gate::X(one(&r)?),
            "y" => Gate::Y(one(&r)?),
            "z" => Gate::Z(one(&r)?),
            "zz" => {
                let (q1, q2) = two(&r)?;
                Gate::Zz { q1, q2, theta }
            }
            "cnot" => {
                let (control, target) = two(&r)?;
                Gate::Cnot { control, target }
            }
            "swap_rot" => {
                let (q1, q2) = two(&r)?;
                Gate::SwapRot { q1, q2, theta }
            }
            k if k.starts_with("pauli_") => {
                let letters: Vec<Pauli> = k["pauli_".len()..]
                    .chars()
                    .map(|c| {
                        Pauli::from_letter(c)
                            .ok_or_else(|| Error::Argument(format!("bad Pauli kind {k}")))
                    })
                    .collect::<Result<_>>()?;
                if letters.len() != r.qubits.len() {
                    return Err(Error::Argument(format!("{k}: letter/qubit count mismatch")));
                }
                Gate::Pauli(PauliString::new(r.qubits.iter().copied().zip(letters))?)
            }
            k => return Err(Error::Argument(format!("unknown gate kind '{k}'"))),
        })
    }
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GateRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GateRecord::deserialize(d)?;
        Gate::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_record_shape() {
        let g = Gate::Zz { q1: 0, q2: 1, theta: -0.5 };
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"{"kind":"zz","qubits":[0,1],"angle":-0.5}"#);
        let back: Gate = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);
        let p = Gate::Pauli("X1Z3".parse().unwrap());
        let back: Gate = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn validation_rejects_clashes() {
        assert!(Gate::Zz { q1: 1, q2: 1, theta: 0.0 }.validate(3).is_err());
        assert!(Gate::X(3).validate(3).is_err());
        assert!(Gate::Cnot { control: 0, target: 2 }.validate(3).is_ok());
    }
}
