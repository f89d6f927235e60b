//! Dense spectra of the periodic spin-1/2 Heisenberg ring.
//!
//! Each bond contributes (J/2)(XX + YY + ZZ + II) = J·SWAP, which conserves the
//! number of up spins, so the Hamiltonian is diagonalized one magnetization
//! sector at a time.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::floquet::{bond_layers, Boundary};
use crate::statevector::{PauliString, QuantumState};

/// Largest ring handled by dense diagonalization.
pub const MAX_DENSE_SITES: usize = 12;

/// Ring bonds as 0-based pairs, odd layer then even layer.
pub fn ring_bonds(n: usize) -> Vec<(usize, usize)> {
    let (odd, even) = bond_layers(n, Boundary::Periodic);
    odd.into_iter().chain(even).collect()
}

struct Sector {
    basis: Vec<usize>,
    energies: Vec<f64>,
    /// Column k is the eigenvector for `energies[k]`.
    vectors: DMatrix<f64>,
}

pub struct XxxSpectrum {
    n_sites: usize,
    sectors: Vec<Sector>,
}

impl XxxSpectrum {
    pub fn new(n_sites: usize, coupling: f64) -> Result<Self> {
        if !(2..=MAX_DENSE_SITES).contains(&n_sites) {
            return Err(Error::Capacity(format!(
                "dense spectrum supports 2..={MAX_DENSE_SITES} sites, got {n_sites}"
            )));
        }
        let bonds = ring_bonds(n_sites);
        let mut sectors = Vec::with_capacity(n_sites + 1);
        for ups in 0..=n_sites as u32 {
            let basis: Vec<usize> = (0..1usize << n_sites).filter(|x| x.count_ones() == ups).collect();
            let dim = basis.len();
            let mut h = DMatrix::<f64>::zeros(dim, dim);
            for (col, &x) in basis.iter().enumerate() {
                for &(a, b) in &bonds {
                    let (ba, bb) = ((x >> a) & 1, (x >> b) & 1);
                    let y = if ba == bb { x } else { x ^ (1 << a) ^ (1 << b) };
                    let row = basis.binary_search(&y).expect("swap stays in sector");
                    h[(row, col)] += coupling;
                }
            }
            let eig = SymmetricEigen::new(h);
            sectors.push(Sector { basis, energies: eig.eigenvalues.as_slice().to_vec(), vectors: eig.eigenvectors });
        }
        Ok(Self { n_sites, sectors })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn energies(&self) -> Vec<f64> {
        self.sectors.iter().flat_map(|s| s.energies.iter().copied()).collect()
    }

    /// Tr[e^{-iHt}].
    pub fn trace_evolution(&self, t: f64) -> C64 {
        self.sectors
            .iter()
            .flat_map(|s| s.energies.iter())
            .map(|&e| C64::from_polar(1.0, -e * t))
            .sum()
    }

    /// |Tr[e^{-iHt}]|² / d².
    pub fn sff(&self, t: f64) -> f64 {
        let d = self.dim() as f64;
        self.trace_evolution(t).norm_sqr() / (d * d)
    }

    /// Pairs (E_k, |<k|ψ>|²) over the full eigenbasis.
    pub fn weights(&self, psi: &QuantumState) -> Result<Vec<(f64, f64)>> {
        self.check_state(psi)?;
        let amps = psi.amplitudes();
        let mut out = Vec::with_capacity(self.dim());
        for s in &self.sectors {
            for (k, &e) in s.energies.iter().enumerate() {
                let v = s.vectors.column(k);
                let c: C64 = s.basis.iter().zip(v.iter()).map(|(&x, &vx)| amps[x] * vx).sum();
                out.push((e, c.norm_sqr()));
            }
        }
        Ok(out)
    }

    /// Exact <ψ|e^{-iHt}|ψ>.
    pub fn loschmidt(&self, psi: &QuantumState, t: f64) -> Result<C64> {
        Ok(self
            .weights(psi)?
            .iter()
            .map(|&(e, w)| C64::from_polar(w, -e * t))
            .sum())
    }

    /// Exact e^{-iHt}|ψ>.
    pub fn evolve(&self, psi: &QuantumState, t: f64) -> Result<QuantumState> {
        self.check_state(psi)?;
        let amps = psi.amplitudes();
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for s in &self.sectors {
            let local: Vec<C64> = s.basis.iter().map(|&x| amps[x]).collect();
            for (k, &e) in s.energies.iter().enumerate() {
                let v = s.vectors.column(k);
                let c: C64 = local.iter().zip(v.iter()).map(|(a, &vx)| a * vx).sum();
                let c = c * C64::from_polar(1.0, -e * t);
                for (&x, &vx) in s.basis.iter().zip(v.iter()) {
                    out[x] += c * vx;
                }
            }
        }
        QuantumState::from_amplitudes(out)
    }

    /// Diagonal elements <k|O|k> for an observable diagonal in the computational basis.
    pub fn diagonal_expectations(&self, o: &PauliString) -> Result<Vec<(f64, f64)>> {
        if !o.is_diagonal() {
            return Err(Error::Argument(format!("{o} is not diagonal in the computational basis")));
        }
        if o.max_qubit().is_some_and(|q| q >= self.n_sites) {
            return Err(Error::Argument(format!("{o} leaves the ring")));
        }
        let (_, phase, _) = o.masks();
        let sign = |x: usize| if (x & phase).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut out = Vec::with_capacity(self.dim());
        for s in &self.sectors {
            for (k, &e) in s.energies.iter().enumerate() {
                let v = s.vectors.column(k);
                let val: f64 = s.basis.iter().zip(v.iter()).map(|(&x, &vx)| sign(x) * vx * vx).sum();
                out.push((e, val));
            }
        }
        Ok(out)
    }

    /// Tr[O G] / Tr[G] with G = exp(-(E - H)² / 2σ²), for diagonal O.
    pub fn microcanonical(&self, o: &PauliString, sigma: f64, energy: f64) -> Result<f64> {
        let g = |e: f64| (-(energy - e).powi(2) / (2.0 * sigma * sigma)).exp();
        let (num, den) = self
            .diagonal_expectations(o)?
            .iter()
            .fold((0.0, 0.0), |(n, d), &(e, v)| (n + v * g(e), d + g(e)));
        Ok(num / den)
    }

    /// ln Tr[G_σ(E)].
    pub fn filter_entropy(&self, sigma: f64, energy: f64) -> f64 {
        let es = self.energies();
        // log-sum-exp keeps narrow filters away from underflow
        let xs: Vec<f64> = es.iter().map(|e| -(energy - e).powi(2) / (2.0 * sigma * sigma)).collect();
        let mx = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        mx + xs.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
    }

    fn check_state(&self, psi: &QuantumState) -> Result<()> {
        if psi.n_qubits() != self.n_sites {
            return Err(Error::Argument(format!(
                "state has {} qubits, ring has {} sites",
                psi.n_qubits(),
                self.n_sites
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_levels() {
        // two SWAP bonds on the same pair: 2J SWAP
        let s = XxxSpectrum::new(2, 1.0).unwrap();
        let mut e = s.energies();
        e.sort_by(f64::total_cmp);
        let want = [-2.0, 2.0, 2.0, 2.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_and_sff() {
        let s = XxxSpectrum::new(6, 1.0).unwrap();
        assert!((s.sff(0.0) - 1.0).abs() < 1e-12);
        let tr: f64 = s.energies().iter().sum();
        assert!((tr / 64.0 - 3.0).abs() < 1e-10);
    }

    #[test]
    fn evolve_matches_loschmidt() {
        let s = XxxSpectrum::new(6, 1.0).unwrap();
        let psi = QuantumState::haar(6, &mut crate::rng::seeded(5)).unwrap();
        let t = 0.7;
        let a = psi.inner(&s.evolve(&psi, t).unwrap()).unwrap();
        let b = s.loschmidt(&psi, t).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(XxxSpectrum::new(13, 1.0), Err(Error::Capacity(_))));
    }
}
