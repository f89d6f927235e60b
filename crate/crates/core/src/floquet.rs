//! Kicked-Ising Floquet circuits.
//!
//! One cycle is an RX column, an RZ column, then ZZ on odd bonds (1,2),(3,4),...
//! and ZZ on even bonds (2,3),(4,5),... Sites are 1-based in user-facing
//! arguments and map to qubit `site - 1 + offset`.

use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::statevector::{Gate, QuantumState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => arg_err(format!("unknown boundary '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetSpec {
    pub n_sites: usize,
    pub jt: f64,
    pub bxt: f64,
    pub bzt: f64,
    pub boundary: Boundary,
}

pub type GateList = Vec<Gate>;

impl FloquetSpec {
    pub fn new(n_sites: usize, jt: f64, bxt: f64, bzt: f64, boundary: Boundary) -> Result<Self> {
        let s = Self { n_sites, jt, bxt, bzt, boundary };
        s.validate()?;
        Ok(s)
    }

    /// Parameters given as J·T and the field ratios B_X/J, B_Z/J.
    pub fn from_ratios(
        n_sites: usize,
        jt: f64,
        bx_ratio: f64,
        bz_ratio: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        Self::new(n_sites, jt, bx_ratio * jt, bz_ratio * jt, boundary)
    }

    /// |JT| = |B_X T| = π/2 with B_Z/J = 1.3.
    pub fn self_dual(n_sites: usize, boundary: Boundary) -> Result<Self> {
        Self::from_ratios(n_sites, std::f64::consts::FRAC_PI_2, 1.0, 1.3, boundary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return arg_err(format!("chain needs at least 2 sites, got {}", self.n_sites));
        }
        if ![self.jt, self.bxt, self.bzt].iter().all(|x| x.is_finite()) {
            return arg_err("non-finite Floquet angle");
        }
        Ok(())
    }

    /// Bonds as 0-based qubit pairs, odd layer first then even layer.
    pub fn bond_layers(&self) -> (Vec<Bond>, Vec<Bond>) {
        bond_layers(self.n_sites, self.boundary)
    }

    pub fn n_bonds(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.n_sites - 1,
            Boundary::Periodic => self.n_sites,
        }
    }
}

/// A nearest-neighbour pair of 0-based qubits.
pub type Bond = (usize, usize);

/// Brickwork bond layers on a chain of `n` sites.
///
/// The periodic wrap bond (N,1) goes in the layer matching the parity of N, so
/// it sits in the even layer for even N and in the odd layer for odd N.
pub fn bond_layers(n: usize, boundary: Boundary) -> (Vec<Bond>, Vec<Bond>) {
    let mut odd = Vec::new();
    let mut even = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if i % 2 == 0 {
            odd.push((i, i + 1));
        } else {
            even.push((i, i + 1));
        }
    }
    if boundary == Boundary::Periodic {
        let wrap = (n - 1, 0);
        if (n - 1).is_multiple_of(2) {
            odd.push(wrap);
        } else {
            even.push(wrap);
        }
    }
    (odd, even)
}

/// Gate list of one Floquet cycle on qubits `0..N`.
pub fn floquet_cycle(spec: &FloquetSpec) -> GateList {
    let n = spec.n_sites;
    let mut gates = Vec::with_capacity(3 * n + 1);
    gates.extend((0..n).map(|q| Gate::Rx { qubit: q, theta: spec.bxt }));
    gates.extend((0..n).map(|q| Gate::Rz { qubit: q, theta: spec.bzt }));
    let (odd, even) = spec.bond_layers();
    gates.extend(
        odd.into_iter()
            .chain(even)
            .map(|(q1, q2)| Gate::Zz { q1, q2, theta: -spec.jt }),
    );
    gates
}

/// `cycles` repetitions of the cycle, optionally conjugated, shifted by `offset`.
pub fn floquet_circuit(spec: &FloquetSpec, cycles: usize, conjugated: bool, offset: usize) -> GateList {
    let one: GateList = floquet_cycle(spec)
        .iter()
        .map(|g| {
            let g = if conjugated { g.conjugate() } else { g.clone() };
            g.shifted(offset)
        })
        .collect();
    let mut out = Vec::with_capacity(one.len() * cycles);
    for _ in 0..cycles {
        out.extend(one.iter().cloned());
    }
    out
}

/// Reversed list of inverted gates.
pub fn inverse_circuit(gates: &[Gate]) -> GateList {
    gates.iter().rev().map(Gate::inverse).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// Precomputed per-cycle action on a register of N sites at some offset.
struct CycleKernel {
    n: usize,
    offset: usize,
    rx: f64,
    periodic: bool,
    /// Phase indexed by `popcount * (n_bonds + 1) + domain_walls`.
    phases: Vec<C64>,
    n_bonds: usize,
}

impl CycleKernel {
    fn new(spec: &FloquetSpec, conjugated: bool, dir: Direction, offset: usize) -> Self {
        let n = spec.n_sites;
        let nb = spec.n_bonds();
        let sign = if conjugated { -1.0 } else { 1.0 };
        let inv = if dir == Direction::Inverse { -1.0 } else { 1.0 };
        let (bzt, jt) = (spec.bzt * sign * inv, spec.jt * sign * inv);
        let mut phases = Vec::with_capacity((n + 1) * (nb + 1));
        for pc in 0..=n {
            let zsum = n as f64 - 2.0 * pc as f64;
            for dw in 0..=nb {
                let zzsum = nb as f64 - 2.0 * dw as f64;
                // RZ(bzt) per site, ZZ(-jt) per bond
                phases.push(C64::from_polar(1.0, -0.5 * bzt * zsum + 0.5 * jt * zzsum));
            }
        }
        Self {
            n,
            offset,
            rx: spec.bxt * sign * inv,
            periodic: spec.boundary == Boundary::Periodic,
            phases,
            n_bonds: nb,
        }
    }

    fn apply_diag(&self, amps: &mut [C64]) {
        let mask = (1usize << self.n) - 1;
        let chain = (1usize << (self.n - 1)) - 1;
        let stride = self.n_bonds + 1;
        let (n, off, periodic) = (self.n, self.offset, self.periodic);
        for (x, a) in amps.iter_mut().enumerate() {
            let y = (x >> off) & mask;
            let pc = y.count_ones() as usize;
            let mut dw = ((y ^ (y >> 1)) & chain).count_ones() as usize;
            if periodic {
                dw += (y ^ (y >> (n - 1))) & 1;
            }
            *a *= self.phases[pc * stride + dw];
        }
    }

    fn apply_rx(&self, state: &mut QuantumState) -> Result<()> {
        for q in 0..self.n {
            state.apply(&Gate::Rx { qubit: q + self.offset, theta: self.rx })?;
        }
        Ok(())
    }

    fn apply(&self, state: &mut QuantumState, dir: Direction) -> Result<()> {
        match dir {
            Direction::Forward => {
                self.apply_rx(state)?;
                self.apply_diag(state.amplitudes_mut());
            }
            Direction::Inverse => {
                self.apply_diag(state.amplitudes_mut());
                self.apply_rx(state)?;
            }
        }
        Ok(())
    }
}

fn check_register(state: &QuantumState, spec: &FloquetSpec, offset: usize) -> Result<()> {
    spec.validate()?;
    if offset + spec.n_sites > state.n_qubits() {
        return arg_err(format!(
            "register [{offset}, {}) exceeds {} qubits",
            offset + spec.n_sites,
            state.n_qubits()
        ));
    }
    Ok(())
}

/// Applies (U_F)^m, or its complex conjugate, to qubits `[offset, offset + N)`.
pub fn evolve(
    state: &mut QuantumState,
    spec: &FloquetSpec,
    cycles: usize,
    conjugated: bool,
    offset: usize,
) -> Result<()> {
    check_register(state, spec, offset)?;
    let k = CycleKernel::new(spec, conjugated, Direction::Forward, offset);
    for _ in 0..cycles {
        k.apply(state, Direction::Forward)?;
    }
    Ok(())
}

/// Applies (U_F†)^m to qubits `[offset, offset + N)`.
pub fn evolve_inverse(
    state: &mut QuantumState,
    spec: &FloquetSpec,
    cycles: usize,
    offset: usize,
) -> Result<()> {
    check_register(state, spec, offset)?;
    let k = CycleKernel::new(spec, false, Direction::Inverse, offset);
    for _ in 0..cycles {
        k.apply(state, Direction::Inverse)?;
    }
    Ok(())
}

/// Result of a backward causal-cone traversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub two_qubit_gates: usize,
    pub qubits: BTreeSet<usize>,
    /// Positions of the counted gates in the traversed list, ascending.
    pub gate_indices: Vec<usize>,
}

/// Walks `gates` from last to first starting from `seed`; a two-qubit gate that
/// touches the cone is counted and pulls both qubits in.
pub fn backward_cone(gates: &[Gate], seed: impl IntoIterator<Item = usize>) -> Cone {
    let mut qubits: BTreeSet<usize> = seed.into_iter().collect();
    let mut idx = Vec::new();
    for (i, g) in gates.iter().enumerate().rev() {
        if !g.is_two_qubit() {
            continue;
        }
        let qs = g.qubits();
        if qs.iter().any(|q| qubits.contains(q)) {
            idx.push(i);
            qubits.extend(qs);
        }
    }
    idx.reverse();
    Cone { two_qubit_gates: idx.len(), qubits, gate_indices: idx }
}


fn sites_to_qubits(spec: &FloquetSpec, sites: &[usize]) -> Result<Vec<usize>> {
    sites
        .iter()
        .map(|&s| {
            if s == 0 || s > spec.n_sites {
                arg_err(format!("site {s} outside 1..={}", spec.n_sites))
            } else {
                Ok(s - 1)
            }
        })
        .collect()
}

/// Number of two-qubit gates in (U_F)^m causally connected to `seed_sites` (1-based).
pub fn lightcone_count(spec: &FloquetSpec, cycles: usize, seed_sites: &[usize]) -> Result<usize> {
    Ok(lightcone(spec, cycles, seed_sites)?.two_qubit_gates)
}

/// Backward cone of `seed_sites` through (U_F)^m, with 0-based qubits in the result.
pub fn lightcone(spec: &FloquetSpec, cycles: usize, seed_sites: &[usize]) -> Result<Cone> {
    spec.validate()?;
    let seed = sites_to_qubits(spec, seed_sites)?;
    Ok(backward_cone(&floquet_circuit(spec, cycles, false, 0), seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn self_dual_chain() -> FloquetSpec {
        FloquetSpec::from_ratios(9, FRAC_PI_2, 1.0, 1.3, Boundary::Open).unwrap()
    }

    #[test]
    fn cycle_shape() {
        let g = floquet_cycle(&self_dual_chain());
        assert_eq!(g.len(), 26);
        assert_eq!(g.iter().filter(|g| g.is_two_qubit()).count(), 8);

        let ring = FloquetSpec::self_dual(4, Boundary::Periodic).unwrap();
        let bonds: Vec<Vec<usize>> = floquet_cycle(&ring)
            .iter()
            .filter(|g| g.is_two_qubit())
            .map(|g| g.qubits())
            .collect();
        assert_eq!(bonds, vec![vec![0, 1], vec![2, 3], vec![1, 2], vec![3, 0]]);
    }

    #[test]
    fn published_gate_counts() {
        let spec = self_dual_chain();
        let ms = [0, 2, 4, 6, 7, 8, 9, 10, 12, 14];
        let want = [0, 6, 20, 36, 44, 52, 60, 68, 84, 100];
        for (m, w) in ms.iter().zip(want) {
            assert_eq!(lightcone_count(&spec, *m, &[8, 9]).unwrap(), w, "m={m}");
        }
    }

    #[test]
    fn fused_path_matches_gate_replay() {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            for n in 2..=6 {
                let spec = FloquetSpec::new(n, 0.37, 1.1, -0.6, boundary).unwrap();
                let mut a = QuantumState::haar(n + 2, &mut crate::rng::seeded(n as u64)).unwrap();
                let mut b = a.clone();
                for conj in [false, true] {
                    evolve(&mut a, &spec, 2, conj, 1).unwrap();
                    b.apply_all(&floquet_circuit(&spec, 2, conj, 1)).unwrap();
                    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                        assert!((x - y).norm() < 1e-12);
                    }
                }
                evolve_inverse(&mut a, &spec, 3, 1).unwrap();
                b.apply_all(&inverse_circuit(&floquet_circuit(&spec, 3, false, 1))).unwrap();
                for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_restores_state() {
        let spec = FloquetSpec::self_dual(5, Boundary::Open).unwrap();
        let orig = QuantumState::haar(5, &mut crate::rng::seeded(9)).unwrap();
        let mut s = orig.clone();
        evolve(&mut s, &spec, 3, false, 0).unwrap();
        evolve_inverse(&mut s, &spec, 3, 0).unwrap();
        assert!((s.inner(&orig).unwrap().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn register_overflow() {
        let spec = FloquetSpec::self_dual(4, Boundary::Open).unwrap();
        let mut s = QuantumState::zero(4).unwrap();
        assert!(evolve(&mut s, &spec, 1, false, 1).is_err());
        assert!(lightcone_count(&spec, 1, &[5]).is_err());
    }
}
