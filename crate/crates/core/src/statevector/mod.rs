//! Dense statevector engine.
//!
//! Amplitudes are indexed little-endian: qubit 0 is the least significant bit
//! of the basis index.

mod bell;
mod gate;
mod kernels;
mod pauli;
mod sampling;

pub use bell::{BellPairing, Projection, PROJECTION_THRESHOLD};
pub use gate::{Gate, GateRecord};
pub use pauli::{Pauli, PauliString};
pub use sampling::{sample_binary_mean, BinaryEstimate};

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use kernels::Mat2;

/// Largest register the engine will allocate (2^26 amplitudes, 1 GiB).
pub const MAX_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<C64>,
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n} qubits outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl QuantumState {
    /// |0...0> on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Argument(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits: n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; no normalization is applied.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Argument(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_capacity(n)?;
        Ok(Self { n_qubits: n, amps })
    }

    /// Haar-random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_capacity(n)?;
        let amps: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut s = Self { n_qubits: n, amps };
        s.normalize();
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm and returns the norm before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        norm
    }

    pub fn scale(&mut self, factor: C64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    /// <self|other>, conjugating `self`.
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Argument(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_masked(gate, 0);
        Ok(())
    }

    /// Applies `gate` conditioned on `control` being |1>.
    pub fn apply_controlled(&mut self, gate: &Gate, control: usize) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if control >= self.n_qubits {
            return Err(Error::Argument(format!("control qubit {control} out of range")));
        }
        if gate.qubits().contains(&control) {
            return Err(Error::Argument(format!(
                "control qubit {control} is also a target"
            )));
        }
        self.apply_masked(gate, 1usize << control);
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Replays a gate list with every gate controlled on `control`.
    pub fn apply_all_controlled<'a>(
        &mut self,
        gates: impl IntoIterator<Item = &'a Gate>,
        control: usize,
    ) -> Result<()> {
        for g in gates {
            self.apply_controlled(g, control)?;
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_pauli(p)?;
        let (flip, phase, n_y) = p.masks();
        kernels::apply_pauli_masks(&mut self.amps, flip, phase, n_y, 0);
        Ok(())
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        match p.max_qubit() {
            Some(q) if q >= self.n_qubits => Err(Error::Argument(format!(
                "Pauli string acts on qubit {q} of a {}-qubit register",
                self.n_qubits
            ))),
            _ => Ok(()),
        }
    }

    /// <ψ|P|ψ>, real for a Pauli string.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        Ok(self.pauli_matrix_element(p)?.re)
    }

    /// <ψ|P|ψ> as a complex number.
    pub fn pauli_matrix_element(&self, p: &PauliString) -> Result<C64> {
        self.check_pauli(p)?;
        let (flip, phase, n_y) = p.masks();
        let global = C64::i().powu(n_y);
        let mut acc = C64::new(0.0, 0.0);
        for (x, a) in self.amps.iter().enumerate() {
            let y = x ^ flip;
            let term = self.amps[y].conj() * a;
            if (x & phase).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        Ok(global * acc)
    }

    fn apply_masked(&mut self, gate: &Gate, ctrl: usize) {
        let a = &mut self.amps;
        let c = |re: f64, im: f64| C64::new(re, im);
        match gate {
            Gate::Rx { qubit, theta } => {
                let (s, co) = (theta / 2.0).sin_cos();
                let m: Mat2 = [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]];
                kernels::apply_mat2(a, *qubit, &m, ctrl);
            }
            Gate::Ry { qubit, theta } => {
                let (s, co) = (theta / 2.0).sin_cos();
                let m: Mat2 = [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]];
                kernels::apply_mat2(a, *qubit, &m, ctrl);
            }
            Gate::Rz { qubit, theta } => {
                let h = theta / 2.0;
                kernels::apply_diag1(a, *qubit, C64::from_polar(1.0, -h), C64::from_polar(1.0, h), ctrl);
            }
            Gate::H(q) => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let m: Mat2 = [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]];
                kernels::apply_mat2(a, *q, &m, ctrl);
            }
            Gate::X(q) => kernels::apply_pauli_masks(a, 1 << q, 0, 0, ctrl),
            Gate::Y(q) => kernels::apply_pauli_masks(a, 1 << q, 1 << q, 1, ctrl),
            Gate::Z(q) => kernels::apply_pauli_masks(a, 0, 1 << q, 0, ctrl),
            Gate::Zz { q1, q2, theta } => {
                let h = theta / 2.0;
                kernels::apply_parity_phase(
                    a,
                    *q1,
                    *q2,
                    C64::from_polar(1.0, -h),
                    C64::from_polar(1.0, h),
                    ctrl,
                );
            }
            Gate::Cnot { control, target } => {
                kernels::apply_pauli_masks(a, 1 << target, 0, 0, ctrl | (1 << control));
            }
            Gate::SwapRot { q1, q2, theta } => kernels::apply_swap_rot(a, *q1, *q2, *theta, ctrl),
            Gate::Pauli(p) => {
                let (flip, phase, n_y) = p.masks();
                kernels::apply_pauli_masks(a, flip, phase, n_y, ctrl);
            }
        }
    }
}

/// |0^n>.
pub fn zero_state(n: usize) -> Result<QuantumState> {
    QuantumState::zero(n)
}

pub fn haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QuantumState> {
    QuantumState::haar(n, rng)
}

pub fn inner(a: &QuantumState, b: &QuantumState) -> Result<C64> {
    a.inner(b)
}
