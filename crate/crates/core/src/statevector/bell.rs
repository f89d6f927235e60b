use num_complex::Complex64 as C64;

use super::{Gate, QuantumState};
use crate::error::{Error, Result};

/// Probabilities below this are reported as degenerate instead of renormalized.
pub const PROJECTION_THRESHOLD: f64 = 1e-14;

/// Disjoint qubit pairs (a, b) used for Bell preparation and projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellPairing {
    pairs: Vec<(usize, usize)>,
}

impl BellPairing {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &pairs {
            if a == b || !seen.insert(a) || !seen.insert(b) {
                return Err(Error::Argument(format!(
                    "Bell pairing reuses qubit in pair ({a}, {b})"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self.pairs.iter().map(|&(a, b)| a.max(b)).max() {
            Some(q) if q >= n => Err(Error::Argument(format!(
                "Bell pair qubit {q} out of range for {n} qubits"
            ))),
            _ => Ok(()),
        }
    }
}

/// Outcome of projecting onto all-pairs |Φ+>.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub probability: f64,
    /// True when the probability fell below [`PROJECTION_THRESHOLD`]; the state is left unnormalized.
    pub degenerate: bool,
}

impl Projection {
    pub fn into_result(self) -> Result<f64> {
        if self.degenerate {
            Err(Error::Degenerate { probability: self.probability })
        } else {
            Ok(self.probability)
        }
    }
}

impl QuantumState {
    /// Maps |0,0> on each pair to |Φ+> with H on the first qubit and a CNOT.
    pub fn prepare_bell_pairs(&mut self, pairing: &BellPairing) -> Result<()> {
        pairing.validate(self.n_qubits())?;
        for &(a, b) in pairing.pairs() {
            self.apply(&Gate::H(a))?;
            self.apply(&Gate::Cnot { control: a, target: b })?;
        }
        Ok(())
    }

    /// Projects every pair onto |Φ+> and renormalizes the post-selected state.
    ///
    /// Returns the joint outcome probability relative to the incoming norm.
    pub fn project_bell_pairs(&mut self, pairing: &BellPairing) -> Result<Projection> {
        pairing.validate(self.n_qubits())?;
        let before = self.norm_sqr();
        for &(a, b) in pairing.pairs() {
            project_pair(self.amplitudes_mut(), a, b);
        }
        let after = self.norm_sqr();
        let probability = if before > 0.0 { after / before } else { 0.0 };
        if probability < PROJECTION_THRESHOLD {
            return Ok(Projection { probability, degenerate: true });
        }
        let s = (before / after).sqrt();
        self.scale(C64::new(s, 0.0));
        Ok(Projection { probability, degenerate: false })
    }
}

fn project_pair(amps: &mut [C64], a: usize, b: usize) {
    let (ma, mb) = (1usize << a, 1usize << b);
    let both = ma | mb;
    for i in 0..amps.len() {
        if i & both != 0 {
            continue;
        }
        let avg = (amps[i] + amps[i | both]) * 0.5;
        amps[i] = avg;
        amps[i | both] = avg;
        amps[i | ma] = C64::new(0.0, 0.0);
        amps[i | mb] = C64::new(0.0, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_roundtrip() {
        let pairing = BellPairing::new(vec![(0, 3), (1, 2)]).unwrap();
        let mut s = QuantumState::zero(4).unwrap();
        s.prepare_bell_pairs(&pairing).unwrap();
        let p = s.project_bell_pairs(&pairing).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-12);
        assert!(!p.degenerate);
    }

    #[test]
    fn orthogonal_state_is_degenerate() {
        let pairing = BellPairing::new(vec![(0, 1)]).unwrap();
        let mut s = QuantumState::basis(2, 1).unwrap();
        let p = s.project_bell_pairs(&pairing).unwrap();
        assert!(p.degenerate);
        assert!(matches!(p.into_result(), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn product_state_projects_with_quarter() {
        let pairing = BellPairing::new(vec![(0, 1)]).unwrap();
        let mut s = QuantumState::zero(2).unwrap();
        let p = s.project_bell_pairs(&pairing).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlapping_pairs_rejected() {
        assert!(BellPairing::new(vec![(0, 1), (1, 2)]).is_err());
        assert!(BellPairing::new(vec![(2, 2)]).is_err());
    }
}
